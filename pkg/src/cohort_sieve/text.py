"""Text normalization shared by the term index and the annotator."""

from __future__ import annotations

import re
import string
import unicodedata
from typing import Iterator, NamedTuple

_TOKEN_RE = re.compile(r"\S+")
_ASCII_PUNCT = frozenset(string.punctuation)


def is_punct(ch: str) -> bool:
    return ch in _ASCII_PUNCT or unicodedata.category(ch).startswith("P")


def strip_punct(token: str) -> tuple[int, int]:
    """Return the (start, end) of ``token`` with edge punctuation removed.

    ``start == end`` when the token is punctuation only.
    """
    start, end = 0, len(token)
    while start < end and is_punct(token[start]):
        start += 1
    while end > start and is_punct(token[end - 1]):
        end -= 1
    return start, end


def normalize(text: str) -> str:
    """Lowercase, NFC, collapse whitespace and strip edge punctuation per token.

    >>> normalize("Small-Bowel  Obstruction,")
    'small-bowel obstruction'
    """
    out = []
    for raw in unicodedata.normalize("NFC", text).split():
        s, e = strip_punct(raw)
        if s < e:
            out.append(raw[s:e].lower())
    return " ".join(out)


class Token(NamedTuple):
    start: int  # offsets into the source string, edge punctuation excluded
    end: int
    norm: str


def tokens(text: str) -> Iterator[Token]:
    """Yield the non-empty tokens of ``text`` with source offsets."""
    for m in _TOKEN_RE.finditer(text):
        s, e = strip_punct(m.group())
        if s < e:
            core = m.group()[s:e]
            yield Token(m.start() + s, m.start() + e, unicodedata.normalize("NFC", core).lower())


def word_count(text: str) -> int:
    return len(text.split())
