from .lexer import QueryError
from .parser import parse_text
from .typecheck import TypedProgram, typecheck


def compile_query(text: str, builtins=None) -> TypedProgram:
    """Parse and typecheck ``text``; raises QueryError with every diagnostic."""
    return typecheck(parse_text(text), builtins)


__all__ = ["QueryError", "TypedProgram", "compile_query", "parse_text", "typecheck"]
