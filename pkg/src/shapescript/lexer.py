"""Hand-written lexer for ShapeScript source text."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError

# Punctuation tokens carry no information of their own; they are excluded
# from degree-of-freedom counts.
PUNCTUATION = {"(", ")", "[", "]", "{", "}", ",", ";", ":", "->", "=", "."}

OPERATORS = {"==", "!=", "<=", ">=", "<", ">", "+", "-", "*", "/", "%"}

# Multi-character symbols first so "->" wins over "-" and "==" over "=".
_SYMBOLS = sorted(PUNCTUATION | OPERATORS, key=len, reverse=True)

KEYWORDS = {"fn", "let", "for", "in", "if", "else", "return", "true", "false"}


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, INT, FLOAT, STRING, PUNCT, OP, DOC, EOF
    value: str
    line: int
    column: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(source)

    def prev_allows_sign() -> bool:
        if not tokens:
            return True
        t = tokens[-1]
        if t.kind in ("INT", "FLOAT", "IDENT", "STRING"):
            return t.value in KEYWORDS and t.value not in ("true", "false")
        if t.kind == "PUNCT":
            return t.value not in (")", "]")
        return True

    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if source.startswith("///", i):
            j = source.find("\n", i)
            j = n if j < 0 else j
            tokens.append(Token("DOC", source[i + 3 : j].strip(), line, col))
            col += j - i
            i = j
            continue
        if source.startswith("//", i):
            j = source.find("\n", i)
            j = n if j < 0 else j
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(Token("IDENT", source[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()) or (
            ch == "-"
            and i + 1 < n
            and (source[i + 1].isdigit() or source[i + 1] == ".")
            and prev_allows_sign()
        ):
            j = i + 1 if ch == "-" else i
            start = i
            is_float = False
            while j < n and source[j].isdigit():
                j += 1
            if j < n and source[j] == ".":
                is_float = True
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    is_float = True
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[start:j]
            tokens.append(Token("FLOAT" if is_float else "INT", text, line, col))
            col += j - start
            i = j
            continue
        if ch == '"':
            j = i + 1
            buf = []
            while j < n and source[j] != '"':
                if source[j] == "\n":
                    raise ParseError("unterminated string literal", line, col)
                if source[j] == "\\" and j + 1 < n:
                    esc = source[j + 1]
                    buf.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc, esc))
                    j += 2
                    continue
                buf.append(source[j])
                j += 1
            if j >= n:
                raise ParseError("unterminated string literal", line, col)
            tokens.append(Token("STRING", "".join(buf), line, col))
            col += j + 1 - i
            i = j + 1
            continue
        for sym in _SYMBOLS:
            if source.startswith(sym, i):
                kind = "PUNCT" if sym in PUNCTUATION else "OP"
                tokens.append(Token(kind, sym, line, col))
                col += len(sym)
                i += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("EOF", "", line, col))
    return tokens
