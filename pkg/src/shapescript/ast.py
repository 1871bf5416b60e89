"""AST node definitions for ShapeScript libraries, bodies, and programs."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


def snap_float(x: float) -> float:
    """Normalize a float to the canonical 6-significant-digit print precision."""
    return float(f"{float(x):.6g}")


class ParamKind(enum.Enum):
    FLOAT = "float"
    INT = "int"
    BOOL = "bool"
    ENUM = "enum"


@dataclass(frozen=True)
class ParamType:
    kind: ParamKind
    enum_options: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind is ParamKind.ENUM:
            if not self.enum_options:
                return  # flagged by validate_interface, not a construction error
            assert len(set(self.enum_options)) == len(self.enum_options)

    def accepts(self, value) -> bool:
        if self.kind is ParamKind.BOOL:
            return isinstance(value, bool)
        if self.kind is ParamKind.INT:
            return isinstance(value, int) and not isinstance(value, bool)
        if self.kind is ParamKind.FLOAT:
            return isinstance(value, (int, float)) and not isinstance(value, bool)
        return isinstance(value, str) and value in self.enum_options


FLOAT = ParamType(ParamKind.FLOAT)
INT = ParamType(ParamKind.INT)
BOOL = ParamType(ParamKind.BOOL)


@dataclass
class DocString:
    description: str = ""
    parts_spec: str = ""
    valid_options: tuple[int, ...] = ()
    parameters_spec: dict[str, str] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Expressions (function bodies)


@dataclass(frozen=True)
class Num:
    value: float | int


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Str:
    value: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class UnOp:
    op: str  # "-" or "not"
    operand: "Expr"


@dataclass(frozen=True)
class CallExpr:
    name: str
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class ListLit:
    items: tuple["Expr", ...]


@dataclass(frozen=True)
class Attr:
    base: "Expr"
    name: str  # one of w, h, d, x, y, z on frame values


Expr = Num | BoolLit | Str | Var | BinOp | UnOp | CallExpr | ListLit | Attr


# ---------------------------------------------------------------------------
# Statements (function bodies)


@dataclass(frozen=True)
class Let:
    name: str
    expr: Expr


@dataclass(frozen=True)
class Assign:
    name: str
    expr: Expr


@dataclass(frozen=True)
class Append:
    name: str
    expr: Expr


@dataclass(frozen=True)
class For:
    var: str
    count: Expr
    body: tuple["Stmt", ...]


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...]


@dataclass(frozen=True)
class Return:
    expr: Expr


Stmt = Let | Assign | Append | For | If | Return


# ---------------------------------------------------------------------------
# Library


@dataclass
class LibraryFunction:
    name: str
    frame_param: str  # name of the implicit first CoordFrame parameter
    params: tuple[tuple[str, ParamType], ...]  # non-frame parameters, ordered
    doc: DocString
    body: tuple[Stmt, ...] | None = None

    def param_type(self, name: str) -> ParamType | None:
        for pname, ptype in self.params:
            if pname == name:
                return ptype
        return None


BUILTINS = frozenset(
    {
        "part",
        "make_part",
        "group_parts",
        "frame",
        "min",
        "max",
        "abs",
        "floor",
        "clamp",
        "uniform",
        "randint",
        "choice",
        "bernoulli",
        "range",
        "append",
        "len",
    }
)


@dataclass
class Library:
    functions: dict[str, LibraryFunction] = field(default_factory=dict)

    def add(self, fn: LibraryFunction) -> None:
        if fn.name in self.functions or fn.name in BUILTINS:
            raise ValueError(f"duplicate function name {fn.name!r}")
        self.functions[fn.name] = fn

    def __eq__(self, other) -> bool:
        return isinstance(other, Library) and self.functions == other.functions


# ---------------------------------------------------------------------------
# Client programs


@dataclass(frozen=True)
class FrameLit:
    """Literal CoordFrame: width, height, depth then center x, y, z."""

    w: float
    h: float
    d: float
    x: float
    y: float
    z: float


@dataclass(frozen=True)
class Call:
    fn_name: str
    frame: FrameLit
    args: tuple[int | float | bool | str, ...]


@dataclass(frozen=True)
class MakePart:
    frame: FrameLit
    label: str


ProgStmt = Call | MakePart


@dataclass(frozen=True)
class ShapeProgram:
    statements: tuple[ProgStmt, ...] = ()

    def __len__(self) -> int:
        return len(self.statements)

    def concat(self, other: "ShapeProgram") -> "ShapeProgram":
        return ShapeProgram(self.statements + other.statements)
