"""Interface conformance checks for parsed or constructed libraries."""

from __future__ import annotations

from dataclasses import dataclass

from . import ast


@dataclass(frozen=True)
class InterfaceViolation:
    fn_name: str
    code: str
    message: str


def _body_names(stmts) -> set[str]:
    names: set[str] = set()

    def walk_expr(expr):
        if isinstance(expr, ast.Var):
            names.add(expr.name)
        elif isinstance(expr, ast.Attr):
            walk_expr(expr.base)
        elif isinstance(expr, ast.BinOp):
            walk_expr(expr.left)
            walk_expr(expr.right)
        elif isinstance(expr, ast.UnOp):
            walk_expr(expr.operand)
        elif isinstance(expr, (ast.CallExpr, ast.ListLit)):
            for a in expr.args if isinstance(expr, ast.CallExpr) else expr.items:
                walk_expr(a)

    def walk_stmt(stmt):
        if isinstance(stmt, (ast.Let, ast.Assign, ast.Append)):
            walk_expr(stmt.expr)
        elif isinstance(stmt, ast.Return):
            walk_expr(stmt.expr)
        elif isinstance(stmt, ast.For):
            walk_expr(stmt.count)
            for s in stmt.body:
                walk_stmt(s)
        elif isinstance(stmt, ast.If):
            walk_expr(stmt.cond)
            for s in stmt.then + stmt.orelse:
                walk_stmt(s)

    for stmt in stmts:
        walk_stmt(stmt)
    return names


def validate_interface(lib: ast.Library) -> list[InterfaceViolation]:
    """Check every A.2.1-style interface rule; violations are data, not errors."""
    violations: list[InterfaceViolation] = []
    for fn in lib.functions.values():
        doc = fn.doc
        if not doc.description:
            violations.append(InterfaceViolation(fn.name, "MissingDocField", "doc has no @description"))
        if not doc.parts_spec:
            violations.append(InterfaceViolation(fn.name, "MissingDocField", "doc has no @parts"))
        if not doc.valid_options:
            violations.append(InterfaceViolation(fn.name, "MissingDocField", "doc has no @valid_options"))
        for v in doc.valid_options:
            if v <= 1:
                violations.append(
                    InterfaceViolation(fn.name, "ValidOptionsTooSmall", f"valid_options entry {v} must exceed 1")
                )
        for pname, ptype in fn.params:
            if pname not in doc.parameters_spec or not doc.parameters_spec[pname]:
                violations.append(
                    InterfaceViolation(fn.name, "MissingDocField", f"doc has no @param entry for {pname!r}")
                )
            if ptype.kind is ast.ParamKind.ENUM and not ptype.enum_options:
                violations.append(
                    InterfaceViolation(fn.name, "EmptyEnum", f"enum parameter {pname!r} declares no options")
                )
        if fn.body is not None:
            used = _body_names(fn.body)
            for pname, _ in fn.params:
                if pname not in used:
                    violations.append(
                        InterfaceViolation(fn.name, "UnusedParam", f"parameter {pname!r} never used in body")
                    )
    return violations
