"""Total lexer for the Spider SQL dialect.

Lexing never fails: unknown characters become one-character operator or
punctuation tokens, so the incremental checker can judge arbitrary
partially-decoded text.
"""

from __future__ import annotations

from dataclasses import dataclass

KEYWORDS = frozenset(
    {
        "select", "from", "where", "group", "order", "by", "having", "limit",
        "intersect", "union", "except", "join", "on", "as", "not", "between",
        "in", "like", "is", "exists", "and", "or", "asc", "desc", "distinct",
        "count", "sum", "min", "max", "avg", "null", "left", "right", "inner",
        "outer", "full", "cross",
    }
)

_MULTI_OPS = ("<>", "!=", ">=", "<=")
_SINGLE_OPS = frozenset("=<>*+-/!%")
_PUNCT = frozenset("(),.;")


@dataclass(frozen=True)
class SqlToken:
    kind: str  # keyword | identifier | literal | operator | punctuation
    lexeme: str
    span: tuple[int, int]

    @property
    def lower(self) -> str:
        return self.lexeme.lower()


def _word_kind(word: str) -> str:
    return "keyword" if word.lower() in KEYWORDS else "identifier"


def lex_incremental(text: str) -> tuple[list[SqlToken], bool]:
    """Lex ``text`` and report whether the final token is still extensible.

    The last token is "open" when appending more characters could grow it:
    a trailing word or number, or an unterminated string literal.
    """
    tokens: list[SqlToken] = []
    open_last = False
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        start = i
        if ch in "'\"":
            quote = ch
            i += 1
            closed = False
            while i < n:
                if text[i] == quote:
                    # doubled quote is an escaped quote inside the literal
                    if i + 1 < n and text[i + 1] == quote:
                        i += 2
                        continue
                    i += 1
                    closed = True
                    break
                i += 1
            tokens.append(SqlToken("literal", text[start:i], (start, i)))
            # even a closed literal at the very end could be extended by a
            # doubled-quote escape, so it stays open
            open_last = not closed or i == n
            continue
        if ch.isalpha() or ch == "_":
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            word = text[start:i]
            tokens.append(SqlToken(_word_kind(word), word, (start, i)))
            open_last = i == n
            continue
        if ch.isdigit():
            while i < n and (text[i].isdigit() or text[i] == "."):
                i += 1
            tokens.append(SqlToken("literal", text[start:i], (start, i)))
            open_last = i == n
            continue
        two = text[i : i + 2]
        if two in _MULTI_OPS:
            tokens.append(SqlToken("operator", two, (start, start + 2)))
            i += 2
            continue
        if ch in _SINGLE_OPS:
            tokens.append(SqlToken("operator", ch, (start, start + 1)))
            i += 1
            continue
        # '.', '(', ')' etc.; anything unrecognized also lands here so the
        # lexer stays total.
        kind = "punctuation" if ch in _PUNCT else "operator"
        tokens.append(SqlToken(kind, ch, (start, start + 1)))
        i += 1
    return tokens, open_last


def lex(text: str) -> list[SqlToken]:
    """Tokenize ``text``; total over arbitrary input."""
    tokens, _ = lex_incremental(text)
    return tokens
