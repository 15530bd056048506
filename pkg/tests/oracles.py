"""Deliberately naive reference implementations used as test oracles."""

from __future__ import annotations

import re
import string
import unicodedata


def ancestors_fixpoint(parents: dict[int, set[int]]) -> dict[int, set[int]]:
    """Transitive ancestor sets by repeated relaxation until nothing changes."""
    anc = {n: set(ps) for n, ps in parents.items()}
    changed = True
    while changed:
        changed = False
        for n in anc:
            extra = set()
            for p in anc[n]:
                extra |= anc.get(p, set())
            if not extra <= anc[n]:
                anc[n] |= extra
                changed = True
    return anc


def closure(parents: dict[int, set[int]], root: int) -> set[int]:
    anc = ancestors_fixpoint(parents)
    return {n for n in parents if root in anc[n]} | {root}


def _is_punct(ch: str) -> bool:
    return ch in string.punctuation or unicodedata.category(ch)[0] == "P"


def raw_tokens(text: str) -> list[tuple[int, int, str]]:
    out = []
    for m in re.finditer(r"\S+", text):
        s, e = m.start(), m.end()
        while s < e and _is_punct(text[s]):
            s += 1
        while e > s and _is_punct(text[e - 1]):
            e -= 1
        if s < e:
            out.append((s, e, unicodedata.normalize("NFC", text[s:e]).lower()))
    return out


def naive_matches(text: str, terms) -> list[tuple[int, int, str]]:
    """Longest-then-leftmost non-overlapping term matches as raw character spans.

    Every term is compared against every token window; no automaton.
    """
    toks = raw_tokens(text)
    norms = [t[2] for t in toks]
    cands = []
    for term in terms:
        words = term.split(" ")
        k = len(words)
        for i in range(len(toks) - k + 1):
            if norms[i:i + k] == words:
                cands.append((len(term), i, i + k, term))
    cands.sort(key=lambda c: (-c[0], c[1]))
    taken = [False] * len(toks)
    picked = []
    for _, i, j, term in cands:
        if not any(taken[i:j]):
            for x in range(i, j):
                taken[x] = True
            picked.append((toks[i][0], toks[j - 1][1], term))
    return sorted(picked)
