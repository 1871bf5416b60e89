"""Recursive-descent parser for ShapeScript libraries and client programs."""

from __future__ import annotations

from . import ast
from .ast import (
    Append,
    Assign,
    BinOp,
    BoolLit,
    Call,
    CallExpr,
    DocString,
    For,
    FrameLit,
    If,
    Let,
    Library,
    LibraryFunction,
    ListLit,
    MakePart,
    Num,
    ParamKind,
    ParamType,
    Return,
    ShapeProgram,
    Str,
    UnOp,
    Var,
    snap_float,
)
from .errors import ParseError, TypeCheckError
from .lexer import Token, tokenize

_TYPE_NAMES = {"int": ast.INT, "float": ast.FLOAT, "bool": ast.BOOL}
_FRAME_ATTRS = ("w", "h", "d", "x", "y", "z")


class _Cursor:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, kind: str, value: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (value is not None and tok.value != value):
            want = value if value is not None else kind
            raise ParseError(f"expected {want!r}, found {tok.value or tok.kind!r}", tok.line, tok.column)
        return self.next()

    def at(self, kind: str, value: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (value is None or tok.value == value)

    def error(self, message: str, code: str = "SyntaxError") -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.line, tok.column, code=code)


# ---------------------------------------------------------------------------
# Doc-string blocks


def _parse_doc_block(cur: _Cursor) -> DocString:
    lines: list[tuple[str, int, int]] = []
    while cur.at("DOC"):
        tok = cur.next()
        lines.append((tok.value, tok.line, tok.column))
    doc = DocString()
    seen: set[str] = set()
    current: str | None = None

    def set_text(tag: str, text: str, append: bool = False):
        if tag == "description":
            doc.description = (doc.description + " " + text).strip() if append else text
        elif tag == "parts":
            doc.parts_spec = (doc.parts_spec + " " + text).strip() if append else text

    current_param: str | None = None
    for text, line, col in lines:
        if text.startswith("@"):
            head, _, rest = text.partition(" ")
            tag = head[1:]
            rest = rest.strip()
            if tag in ("description", "parts"):
                set_text(tag, rest)
                seen.add(tag)
                current, current_param = tag, None
            elif tag == "valid_options":
                doc.valid_options = _parse_valid_options(rest, line, col)
                seen.add(tag)
                current, current_param = None, None
            elif tag == "param":
                name, _, desc = rest.partition(":")
                name = name.strip()
                if not name:
                    raise ParseError("@param tag requires a parameter name", line, col)
                doc.parameters_spec[name] = desc.strip()
                current, current_param = "param", name
            else:
                raise ParseError(f"unknown doc tag @{tag}", line, col)
        elif current == "param" and current_param is not None:
            doc.parameters_spec[current_param] = (doc.parameters_spec[current_param] + " " + text).strip()
        elif current in ("description", "parts"):
            set_text(current, text, append=True)
    # Absent blocks parse fine (samplers carry none); a partial block is an
    # authoring error while an absent one is an interface-validation concern.
    if lines:
        for required in ("description", "parts", "valid_options"):
            if required not in seen:
                first = lines[0]
                raise ParseError(
                    f"doc-string missing required @{required} field", first[1], first[2], code="MissingDocField"
                )
    return doc


def _parse_valid_options(text: str, line: int, col: int) -> tuple[int, ...]:
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise ParseError("@valid_options expects a bracketed int list", line, col)
    inner = text[1:-1].strip()
    if not inner:
        raise ParseError("@valid_options list is empty", line, col, code="MissingDocField")
    values = []
    for chunk in inner.split(","):
        chunk = chunk.strip()
        if not chunk.lstrip("-").isdigit():
            raise ParseError(f"invalid valid_options entry {chunk!r}", line, col)
        values.append(int(chunk))
    for v in values:
        if v <= 1:
            raise ParseError(
                f"valid_options entry {v} must be greater than 1", line, col, code="ValidOptionsTooSmall"
            )
    return tuple(values)


# ---------------------------------------------------------------------------
# Library


def _parse_param_type(cur: _Cursor) -> ParamType:
    tok = cur.expect("IDENT")
    if tok.value in _TYPE_NAMES:
        return _TYPE_NAMES[tok.value]
    if tok.value == "enum":
        cur.expect("PUNCT", "(")
        options: list[str] = []
        while True:
            options.append(cur.expect("STRING").value)
            if cur.at("PUNCT", ","):
                cur.next()
                continue
            break
        cur.expect("PUNCT", ")")
        if len(set(options)) != len(options):
            raise ParseError(f"duplicate enum option in {options}", tok.line, tok.column)
        return ParamType(ParamKind.ENUM, tuple(options))
    raise ParseError(f"unknown parameter type {tok.value!r}", tok.line, tok.column)


def _parse_function(cur: _Cursor) -> LibraryFunction:
    doc = _parse_doc_block(cur)
    cur.expect("IDENT", "fn")
    name_tok = cur.expect("IDENT")
    cur.expect("PUNCT", "(")
    frame_tok = cur.expect("IDENT")
    cur.expect("PUNCT", ":")
    ftype = cur.expect("IDENT")
    if ftype.value != "Frame":
        raise ParseError("first parameter must have type Frame", ftype.line, ftype.column, code="FrameFirstParam")
    params: list[tuple[str, ParamType]] = []
    while cur.at("PUNCT", ","):
        cur.next()
        pname = cur.expect("IDENT")
        cur.expect("PUNCT", ":")
        ptype = _parse_param_type(cur)
        if pname.value == frame_tok.value or any(p == pname.value for p, _ in params):
            raise ParseError(f"duplicate parameter name {pname.value!r}", pname.line, pname.column)
        params.append((pname.value, ptype))
    cur.expect("PUNCT", ")")
    cur.expect("PUNCT", "->")
    ret = cur.expect("IDENT")
    if ret.value != "PartList":
        raise ParseError("return type must be PartList", ret.line, ret.column)
    body: tuple[ast.Stmt, ...] | None = None
    if cur.at("PUNCT", ";"):
        cur.next()
    else:
        body = _parse_block(cur)
    return LibraryFunction(name_tok.value, frame_tok.value, tuple(params), doc, body)


def parse_library(text: str) -> Library:
    """Parse library source; raises ParseError on the first problem."""
    lib, errors = parse_library_lenient(text)
    if errors:
        raise errors[0]
    return lib


def parse_library_lenient(text: str) -> tuple[Library, list[ParseError]]:
    """Parse as many functions as possible, collecting per-function errors.

    Used by the LLM stages, where one malformed function should not discard
    an otherwise usable response.
    """
    cur = _Cursor(tokenize(text))
    lib = Library()
    errors: list[ParseError] = []
    while not cur.at("EOF"):
        start = cur.pos
        try:
            fn = _parse_function(cur)
            if fn.name in lib.functions or fn.name in ast.BUILTINS:
                raise ParseError(f"duplicate function name {fn.name!r}", 0, 0, code="DuplicateFunction")
            lib.add(fn)
        except ParseError as exc:
            errors.append(exc)
            if cur.pos == start:
                cur.next()
            _skip_to_next_function(cur)
    return lib, errors


def _skip_to_next_function(cur: _Cursor) -> None:
    depth = 0
    while not cur.at("EOF"):
        tok = cur.peek()
        if depth == 0 and (tok.kind == "DOC" or (tok.kind == "IDENT" and tok.value == "fn")):
            return
        if tok.kind == "PUNCT" and tok.value == "{":
            depth += 1
        elif tok.kind == "PUNCT" and tok.value == "}":
            depth = max(0, depth - 1)
        cur.next()


# ---------------------------------------------------------------------------
# Function bodies


def _parse_block(cur: _Cursor) -> tuple[ast.Stmt, ...]:
    cur.expect("PUNCT", "{")
    stmts: list[ast.Stmt] = []
    while not cur.at("PUNCT", "}"):
        stmts.append(_parse_stmt(cur))
    cur.expect("PUNCT", "}")
    return tuple(stmts)


def _parse_stmt(cur: _Cursor) -> ast.Stmt:
    tok = cur.peek()
    if tok.kind != "IDENT":
        raise cur.error(f"expected a statement, found {tok.value!r}")
    if tok.value == "let":
        cur.next()
        name = cur.expect("IDENT").value
        cur.expect("PUNCT", "=")
        expr = _parse_expr(cur)
        cur.expect("PUNCT", ";")
        return Let(name, expr)
    if tok.value == "for":
        cur.next()
        var = cur.expect("IDENT").value
        cur.expect("IDENT", "in")
        cur.expect("IDENT", "range")
        cur.expect("PUNCT", "(")
        count = _parse_expr(cur)
        cur.expect("PUNCT", ")")
        body = _parse_block(cur)
        return For(var, count, body)
    if tok.value == "if":
        cur.next()
        cond = _parse_expr(cur)
        then = _parse_block(cur)
        orelse: tuple[ast.Stmt, ...] = ()
        if cur.at("IDENT", "else"):
            cur.next()
            if cur.at("IDENT", "if"):
                orelse = (_parse_stmt(cur),)
            else:
                orelse = _parse_block(cur)
        return If(cond, then, orelse)
    if tok.value == "return":
        cur.next()
        expr = _parse_expr(cur)
        cur.expect("PUNCT", ";")
        return Return(expr)
    if tok.value == "append":
        cur.next()
        cur.expect("PUNCT", "(")
        name = cur.expect("IDENT").value
        cur.expect("PUNCT", ",")
        expr = _parse_expr(cur)
        cur.expect("PUNCT", ")")
        cur.expect("PUNCT", ";")
        return Append(name, expr)
    if cur.peek(1).kind == "PUNCT" and cur.peek(1).value == "=":
        name = cur.next().value
        cur.next()
        expr = _parse_expr(cur)
        cur.expect("PUNCT", ";")
        return Assign(name, expr)
    raise cur.error(f"unexpected statement starting with {tok.value!r}")


def _parse_expr(cur: _Cursor) -> ast.Expr:
    return _parse_or(cur)


def _parse_or(cur: _Cursor) -> ast.Expr:
    left = _parse_and(cur)
    while cur.at("IDENT", "or"):
        cur.next()
        left = BinOp("or", left, _parse_and(cur))
    return left


def _parse_and(cur: _Cursor) -> ast.Expr:
    left = _parse_not(cur)
    while cur.at("IDENT", "and"):
        cur.next()
        left = BinOp("and", left, _parse_not(cur))
    return left


def _parse_not(cur: _Cursor) -> ast.Expr:
    if cur.at("IDENT", "not"):
        cur.next()
        return UnOp("not", _parse_not(cur))
    return _parse_cmp(cur)


_CMP_OPS = ("==", "!=", "<=", ">=", "<", ">")


def _parse_cmp(cur: _Cursor) -> ast.Expr:
    left = _parse_add(cur)
    if cur.peek().kind == "OP" and cur.peek().value in _CMP_OPS:
        op = cur.next().value
        return BinOp(op, left, _parse_add(cur))
    return left


def _parse_add(cur: _Cursor) -> ast.Expr:
    left = _parse_mul(cur)
    while cur.peek().kind == "OP" and cur.peek().value in ("+", "-"):
        op = cur.next().value
        left = BinOp(op, left, _parse_mul(cur))
    return left


def _parse_mul(cur: _Cursor) -> ast.Expr:
    left = _parse_unary(cur)
    while cur.peek().kind == "OP" and cur.peek().value in ("*", "/", "%"):
        op = cur.next().value
        left = BinOp(op, left, _parse_unary(cur))
    return left


def _parse_unary(cur: _Cursor) -> ast.Expr:
    if cur.at("OP", "-"):
        cur.next()
        return UnOp("-", _parse_unary(cur))
    return _parse_postfix(cur)


def _parse_postfix(cur: _Cursor) -> ast.Expr:
    expr = _parse_primary(cur)
    while cur.at("PUNCT", "."):
        cur.next()
        attr = cur.expect("IDENT")
        if attr.value not in _FRAME_ATTRS:
            raise ParseError(f"unknown frame attribute {attr.value!r}", attr.line, attr.column)
        expr = ast.Attr(expr, attr.value)
    return expr


def _parse_primary(cur: _Cursor) -> ast.Expr:
    tok = cur.peek()
    if tok.kind == "INT":
        cur.next()
        return Num(int(tok.value))
    if tok.kind == "FLOAT":
        cur.next()
        return Num(snap_float(float(tok.value)))
    if tok.kind == "STRING":
        cur.next()
        return Str(tok.value)
    if tok.kind == "IDENT":
        if tok.value in ("true", "false"):
            cur.next()
            return BoolLit(tok.value == "true")
        cur.next()
        if cur.at("PUNCT", "("):
            cur.next()
            args: list[ast.Expr] = []
            while not cur.at("PUNCT", ")"):
                args.append(_parse_expr(cur))
                if cur.at("PUNCT", ","):
                    cur.next()
                elif not cur.at("PUNCT", ")"):
                    raise cur.error("expected ',' or ')' in argument list")
            cur.expect("PUNCT", ")")
            return CallExpr(tok.value, tuple(args))
        return Var(tok.value)
    if tok.kind == "PUNCT" and tok.value == "(":
        cur.next()
        expr = _parse_expr(cur)
        cur.expect("PUNCT", ")")
        return expr
    if tok.kind == "PUNCT" and tok.value == "[":
        cur.next()
        items: list[ast.Expr] = []
        while not cur.at("PUNCT", "]"):
            items.append(_parse_expr(cur))
            if cur.at("PUNCT", ","):
                cur.next()
            elif not cur.at("PUNCT", "]"):
                raise cur.error("expected ',' or ']' in list literal")
        cur.expect("PUNCT", "]")
        return ListLit(tuple(items))
    raise cur.error(f"unexpected token {tok.value or tok.kind!r} in expression")


# ---------------------------------------------------------------------------
# Client programs


def _parse_number(cur: _Cursor) -> float:
    tok = cur.peek()
    if tok.kind in ("INT", "FLOAT"):
        cur.next()
        return snap_float(float(tok.value))
    raise cur.error(f"expected a number, found {tok.value or tok.kind!r}")


def _parse_frame_lit(cur: _Cursor) -> FrameLit:
    tok = cur.expect("IDENT")
    if tok.value != "frame":
        raise ParseError("call's first argument must be a frame(...) literal", tok.line, tok.column)
    cur.expect("PUNCT", "(")
    values = []
    for i in range(6):
        values.append(_parse_number(cur))
        if i < 5:
            cur.expect("PUNCT", ",")
    cur.expect("PUNCT", ")")
    frame = FrameLit(*values)
    if frame.w <= 0 or frame.h <= 0 or frame.d <= 0:
        raise TypeCheckError(
            f"frame dimensions must be positive, got ({frame.w}, {frame.h}, {frame.d})",
            tok.line,
            tok.column,
            code="NonPositiveFrameDims",
        )
    return frame


def _parse_prog_literal(cur: _Cursor):
    tok = cur.peek()
    if tok.kind == "INT":
        cur.next()
        return int(tok.value)
    if tok.kind == "FLOAT":
        cur.next()
        return snap_float(float(tok.value))
    if tok.kind == "STRING":
        cur.next()
        return tok.value
    if tok.kind == "IDENT" and tok.value in ("true", "false"):
        cur.next()
        return tok.value == "true"
    raise cur.error(f"expected a literal argument, found {tok.value or tok.kind!r}")


def parse_program(text: str, lib: Library) -> ShapeProgram:
    """Parse and type-check a client program against a library."""
    cur = _Cursor(tokenize(text))
    statements: list[ast.ProgStmt] = []
    while not cur.at("EOF"):
        tok = cur.expect("IDENT")
        if tok.value == "make_part":
            cur.expect("PUNCT", "(")
            frame = _parse_frame_lit(cur)
            cur.expect("PUNCT", ",")
            label = cur.expect("STRING").value
            cur.expect("PUNCT", ")")
            cur.expect("PUNCT", ";")
            statements.append(MakePart(frame, label))
            continue
        fn = lib.functions.get(tok.value)
        if fn is None:
            raise TypeCheckError(f"unknown function {tok.value!r}", tok.line, tok.column, code="UnknownFunction")
        cur.expect("PUNCT", "(")
        frame = _parse_frame_lit(cur)
        args = []
        while cur.at("PUNCT", ","):
            cur.next()
            args.append(_parse_prog_literal(cur))
        cur.expect("PUNCT", ")")
        cur.expect("PUNCT", ";")
        if len(args) != len(fn.params):
            raise TypeCheckError(
                f"{fn.name} expects {len(fn.params)} arguments after the frame, got {len(args)}",
                tok.line,
                tok.column,
                code="ArityMismatch",
            )
        coerced = []
        for value, (pname, ptype) in zip(args, fn.params):
            if ptype.kind is ParamKind.FLOAT and isinstance(value, int) and not isinstance(value, bool):
                value = float(value)
            if not ptype.accepts(value):
                raise TypeCheckError(
                    f"argument {pname!r} of {fn.name} does not accept {value!r}",
                    tok.line,
                    tok.column,
                    code="TypeMismatch",
                )
            coerced.append(value)
        statements.append(Call(fn.name, frame, tuple(coerced)))
    return ShapeProgram(tuple(statements))
