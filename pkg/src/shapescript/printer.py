"""Canonical printer and degree-of-freedom token accounting.

The printer is the single source of truth for program text: equal ASTs
produce byte-identical output, floats are rendered at 6 significant
digits, and the DoF counter operates on the canonical printing.
"""

from __future__ import annotations

from . import ast
from .lexer import tokenize


def fmt_float(x: float) -> str:
    text = f"{float(x):.6g}"
    # keep canonical exponent/zero forms stable across platforms
    if text == "-0":
        text = "0"
    return text


def fmt_literal(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return fmt_float(value)
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    raise TypeError(f"unprintable literal {value!r}")


def _fmt_frame(frame: ast.FrameLit) -> str:
    nums = ", ".join(fmt_float(v) for v in (frame.w, frame.h, frame.d, frame.x, frame.y, frame.z))
    return f"frame({nums})"


# ---------------------------------------------------------------------------
# Expressions / bodies

_PRECEDENCE = {
    "or": 1,
    "and": 2,
    "==": 4,
    "!=": 4,
    "<": 4,
    "<=": 4,
    ">": 4,
    ">=": 4,
    "+": 5,
    "-": 5,
    "*": 6,
    "/": 6,
    "%": 6,
}


def _fmt_expr(expr: ast.Expr, parent_prec: int = 0) -> str:
    if isinstance(expr, ast.Num):
        return fmt_literal(expr.value)
    if isinstance(expr, ast.BoolLit):
        return "true" if expr.value else "false"
    if isinstance(expr, ast.Str):
        return fmt_literal(expr.value)
    if isinstance(expr, ast.Var):
        return expr.name
    if isinstance(expr, ast.Attr):
        return f"{_fmt_expr(expr.base, 9)}.{expr.name}"
    if isinstance(expr, ast.CallExpr):
        args = ", ".join(_fmt_expr(a) for a in expr.args)
        return f"{expr.name}({args})"
    if isinstance(expr, ast.ListLit):
        return "[" + ", ".join(_fmt_expr(i) for i in expr.items) + "]"
    if isinstance(expr, ast.UnOp):
        if expr.op == "not":
            inner = _fmt_expr(expr.operand, 3)
            return f"not {inner}"
        return f"-{_fmt_expr(expr.operand, 8)}"
    if isinstance(expr, ast.BinOp):
        prec = _PRECEDENCE[expr.op]
        op = expr.op if expr.op not in ("and", "or") else f"{expr.op}"
        text = f"{_fmt_expr(expr.left, prec)} {op} {_fmt_expr(expr.right, prec + 1)}"
        if prec < parent_prec:
            return f"({text})"
        return text
    raise TypeError(f"unprintable expression {expr!r}")


def _fmt_stmt(stmt: ast.Stmt, indent: int) -> list[str]:
    pad = "  " * indent
    if isinstance(stmt, ast.Let):
        return [f"{pad}let {stmt.name} = {_fmt_expr(stmt.expr)};"]
    if isinstance(stmt, ast.Assign):
        return [f"{pad}{stmt.name} = {_fmt_expr(stmt.expr)};"]
    if isinstance(stmt, ast.Append):
        return [f"{pad}append({stmt.name}, {_fmt_expr(stmt.expr)});"]
    if isinstance(stmt, ast.Return):
        return [f"{pad}return {_fmt_expr(stmt.expr)};"]
    if isinstance(stmt, ast.For):
        lines = [f"{pad}for {stmt.var} in range({_fmt_expr(stmt.count)}) {{"]
        for inner in stmt.body:
            lines.extend(_fmt_stmt(inner, indent + 1))
        lines.append(f"{pad}}}")
        return lines
    if isinstance(stmt, ast.If):
        lines = [f"{pad}if {_fmt_expr(stmt.cond)} {{"]
        for inner in stmt.then:
            lines.extend(_fmt_stmt(inner, indent + 1))
        if stmt.orelse:
            lines.append(f"{pad}}} else {{")
            for inner in stmt.orelse:
                lines.extend(_fmt_stmt(inner, indent + 1))
        lines.append(f"{pad}}}")
        return lines
    raise TypeError(f"unprintable statement {stmt!r}")


# ---------------------------------------------------------------------------
# Library / program printing


def _fmt_param_type(ptype: ast.ParamType) -> str:
    if ptype.kind is ast.ParamKind.ENUM:
        options = ", ".join(fmt_literal(o) for o in ptype.enum_options)
        return f"enum({options})"
    return ptype.kind.value


def print_function(fn: ast.LibraryFunction) -> str:
    lines = []
    if fn.doc.description:
        lines.append(f"/// @description {fn.doc.description}")
    if fn.doc.parts_spec:
        lines.append(f"/// @parts {fn.doc.parts_spec}")
    if fn.doc.valid_options:
        lines.append(f"/// @valid_options [{', '.join(str(v) for v in fn.doc.valid_options)}]")
    for pname, _ in fn.params:
        if pname in fn.doc.parameters_spec:
            lines.append(f"/// @param {pname}: {fn.doc.parameters_spec[pname]}")
    params = ", ".join([f"{fn.frame_param}: Frame"] + [f"{n}: {_fmt_param_type(t)}" for n, t in fn.params])
    sig = f"fn {fn.name}({params}) -> PartList"
    if fn.body is None:
        lines.append(sig + ";")
    else:
        lines.append(sig + " {")
        for stmt in fn.body:
            lines.extend(_fmt_stmt(stmt, 1))
        lines.append("}")
    return "\n".join(lines)


def print_canonical(node: ast.Library | ast.ShapeProgram) -> str:
    if isinstance(node, ast.Library):
        chunks = [print_function(fn) for fn in node.functions.values()]
        return "\n\n".join(chunks) + ("\n" if chunks else "")
    if isinstance(node, ast.ShapeProgram):
        lines = []
        for stmt in node.statements:
            if isinstance(stmt, ast.MakePart):
                lines.append(f"make_part({_fmt_frame(stmt.frame)}, {fmt_literal(stmt.label)});")
            else:
                parts = [_fmt_frame(stmt.frame)] + [fmt_literal(a) for a in stmt.args]
                lines.append(f"{stmt.fn_name}({', '.join(parts)});")
        return "\n".join(lines) + ("\n" if lines else "")
    raise TypeError(f"cannot print {type(node).__name__}")


# ---------------------------------------------------------------------------
# Degrees of freedom


def count_dof_tokens(prog: ast.ShapeProgram) -> int:
    """Count lexer tokens of the canonical printing, skipping punctuation."""
    text = print_canonical(prog)
    count = 0
    for tok in tokenize(text):
        if tok.kind in ("PUNCT", "EOF", "DOC"):
            continue
        count += 1
    return count
