"""Tokenizer for DVQ text. Tracks byte offsets so parse errors can point at the input."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import MalformedClause, UnbalancedParens

WORD = "word"
NUMBER = "number"
STRING = "string"
SYMBOL = "symbol"
EOF = "eof"


@dataclass(frozen=True)
class Token:
    kind: str
    text: str  # for STRING tokens, the unquoted content
    offset: int


_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<number>\d+(?:\.\d+)?)
    | (?P<squote>'(?:[^']|'')*')
    | (?P<dquote>"(?:[^"]|"")*")
    | (?P<symbol><>|!=|<=|>=|[(),.*=<>])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    open_parens: list[int] = []
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            char = text[pos]
            if char in "'\"":
                raise MalformedClause("unterminated string literal", pos)
            raise MalformedClause(f"unexpected character {char!r}", pos)
        if match.lastgroup == "ws":
            pos = match.end()
            continue
        lexeme = match.group()
        if match.lastgroup == "word":
            tokens.append(Token(WORD, lexeme, pos))
        elif match.lastgroup == "number":
            tokens.append(Token(NUMBER, lexeme, pos))
        elif match.lastgroup == "squote":
            tokens.append(Token(STRING, lexeme[1:-1].replace("''", "'"), pos))
        elif match.lastgroup == "dquote":
            tokens.append(Token(STRING, lexeme[1:-1].replace('""', '"'), pos))
        else:
            if lexeme == "(":
                open_parens.append(pos)
            elif lexeme == ")":
                if not open_parens:
                    raise UnbalancedParens(pos)
                open_parens.pop()
            tokens.append(Token(SYMBOL, lexeme, pos))
        pos = match.end()
    if open_parens:
        raise UnbalancedParens(open_parens[-1])
    tokens.append(Token(EOF, "", len(text)))
    return tokens
