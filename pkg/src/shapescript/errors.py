"""Error types shared across the toolkit.

Errors that originate in source text carry line/column positions so the CLI
and service can point at the offending token. All errors expose a short
machine-readable ``code`` used by the JSON error payloads.
"""

from __future__ import annotations


class ShapeScriptError(Exception):
    """Base class for all toolkit errors."""

    code = "Error"

    def payload(self) -> dict:
        return {"code": self.code, "message": str(self)}


class SourceError(ShapeScriptError):
    """Error tied to a position in DSL source text."""

    def __init__(self, message: str, line: int = 0, column: int = 0, code: str | None = None):
        super().__init__(f"{line}:{column}: {message}" if line else message)
        self.message = message
        self.line = line
        self.column = column
        if code is not None:
            self.code = code

    def payload(self) -> dict:
        return {
            "code": self.code,
            "message": self.message,
            "line": self.line,
            "column": self.column,
        }


class ParseError(SourceError):
    code = "SyntaxError"


class TypeCheckError(SourceError):
    code = "TypeMismatch"


class ExecError(ShapeScriptError):
    """Runtime failure while executing a function body or program."""

    def __init__(self, message: str, code: str = "ExecError"):
        super().__init__(message)
        self.code = code


class GeometryError(ShapeScriptError):
    def __init__(self, message: str, code: str = "GeometryError"):
        super().__init__(message)
        self.code = code


class ProviderError(ShapeScriptError):
    def __init__(self, message: str, code: str = "ProviderFailure"):
        super().__init__(message)
        self.code = code
