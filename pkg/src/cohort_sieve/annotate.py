"""Sentence segmentation and dictionary concept annotation.

Annotation is exact matching of normalized ontology terms against
normalized sentence text. It does no disambiguation, negation handling
or abbreviation expansion: "no bowel obstruction" still annotates.
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

from .ontology import TermIndex
from .text import normalize, tokens

__all__ = ["Sentence", "Annotation", "segment", "annotate", "normalize", "select_longest"]

ABBREVIATIONS = frozenset({"dr", "mr", "mrs", "ms", "vs", "e.g", "i.e"})
BULLETS = frozenset("-*•+–—")

_BLANK_LINE = re.compile(r"[^\S\n]*\n")


@dataclass(frozen=True)
class Sentence:
    note_index: int
    sentence_index: int
    start: int  # character offsets into the note text
    end: int
    text: str


@dataclass(frozen=True)
class Annotation:
    concept_id: int
    matched_term: str
    start: int  # character offsets into the sentence text
    end: int
    note_index: int
    sentence_index: int


def _next_line_starts_clause(text: str, pos: int) -> bool:
    """``pos`` is just past a newline; decide whether a boundary falls here."""
    eol = text.find("\n", pos)
    line = text[pos:] if eol < 0 else text[pos:eol]
    stripped = line.strip()
    if not stripped:
        return True  # blank line
    first = stripped[0]
    return first.isupper() or first in BULLETS


def _ends_abbreviation(text: str, dot: int) -> bool:
    start = dot
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    word = text[start:dot].lower().lstrip("([\"'")
    return word in ABBREVIATIONS


def _cut_points(text: str) -> list[int]:
    cuts = []
    n = len(text)
    for i, ch in enumerate(text):
        if ch == "\n":
            if _next_line_starts_clause(text, i + 1):
                cuts.append(i + 1)
        elif ch in ".!?" and i + 1 < n and text[i + 1].isspace():
            j = i + 1
            while j < n and text[j].isspace():
                j += 1
            if j == n or not (text[j].isupper() or text[j].isdigit()):
                continue
            if ch == "." and _ends_abbreviation(text, i):
                continue
            cuts.append(i + 1)
    return cuts


def segment(note_text: str, note_index: int = 0) -> list[Sentence]:
    """Split a note into sentences with character offsets.

    Boundaries: blank lines; a newline whose next line opens with a
    capital letter or bullet; ``.``/``!``/``?`` followed by whitespace and
    an uppercase letter or digit, except after Dr, Mr, Mrs, Ms, vs, e.g.
    and i.e. Decimals never split since no whitespace follows the point.
    """
    out: list[Sentence] = []
    prev = 0
    for cut in _cut_points(note_text) + [len(note_text)]:
        chunk = note_text[prev:cut]
        lead = len(chunk) - len(chunk.lstrip())
        body = chunk.strip()
        if body:
            s = prev + lead
            out.append(Sentence(note_index, len(out), s, s + len(body), body))
        prev = cut
    return out


def select_longest(cands: Iterable[tuple[int, int, str]]) -> list[tuple[int, int, str]]:
    """Greedy non-overlapping selection: longest term first, then leftmost.

    Candidates are ``(start, end, term)`` in any coordinate system where
    overlap is interval intersection. Output is sorted by position.
    """
    chosen: list[tuple[int, int, str]] = []
    for c in sorted(set(cands), key=lambda c: (-len(c[2]), c[0], c[1])):
        if all(c[1] <= o[0] or c[0] >= o[1] for o in chosen):
            chosen.append(c)
    return sorted(chosen)


def _annotate_one(sentence: Sentence, index: TermIndex) -> list[Annotation]:
    toks = list(tokens(sentence.text))
    if not toks:
        return []
    # normalized sentence = token norms joined by single spaces
    starts: dict[int, int] = {}
    ends: dict[int, int] = {}
    pos = 0
    for k, t in enumerate(toks):
        starts[pos] = k
        pos += len(t.norm)
        ends[pos] = k
        pos += 1
    norm = " ".join(t.norm for t in toks)

    cands = []
    for s, e, term in index.automaton.search(norm):
        if s in starts and e in ends:
            cands.append((starts[s], ends[e] + 1, term))

    out = []
    for first, last, term in select_longest(cands):
        for cid in sorted(index.entries[term]):
            out.append(
                Annotation(
                    concept_id=cid,
                    matched_term=term,
                    start=toks[first].start,
                    end=toks[last - 1].end,
                    note_index=sentence.note_index,
                    sentence_index=sentence.sentence_index,
                )
            )
    return out


def annotate(sentences: Sequence[Sentence], index: TermIndex) -> list[Annotation]:
    if not index.entries:
        return []
    out: list[Annotation] = []
    for s in sentences:
        out.extend(_annotate_one(s, index))
    return out


def annotations_jsonl(patient_id: str, annotations: Iterable[Annotation]) -> str:
    lines = []
    for a in annotations:
        obj = {"patient_id": patient_id, **asdict(a)}
        obj["concept_id"] = str(a.concept_id)
        lines.append(json.dumps(obj, sort_keys=False))
    return "".join(line + "\n" for line in lines)
