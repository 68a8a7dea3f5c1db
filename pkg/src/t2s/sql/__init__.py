from .ast import SqlAst
from .lexer import SqlToken, lex, lex_incremental
from .normalize import ClauseSet, normalize, render
from .parser import parse_sql

__all__ = [
    "SqlAst",
    "SqlToken",
    "lex",
    "lex_incremental",
    "ClauseSet",
    "normalize",
    "render",
    "parse_sql",
]
