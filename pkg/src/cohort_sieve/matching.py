"""Aho-Corasick automaton over characters.

Patterns are inserted into a trie, failure links are filled in
breadth-first, and each state's output list is extended with the outputs
reachable through its failure link. ``search`` then reports every
occurrence of every pattern in one left-to-right pass.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Iterator


class AhoCorasick:
    def __init__(self, patterns: Iterable[str]):
        self._goto: list[dict[str, int]] = [{}]
        self._fail: list[int] = [0]
        self._out: list[list[str]] = [[]]
        for p in patterns:
            if p:
                self._insert(p)
        self._link()

    def _insert(self, pattern: str) -> None:
        state = 0
        for ch in pattern:
            nxt = self._goto[state].get(ch)
            if nxt is None:
                nxt = len(self._goto)
                self._goto.append({})
                self._fail.append(0)
                self._out.append([])
                self._goto[state][ch] = nxt
            state = nxt
        if pattern not in self._out[state]:
            self._out[state].append(pattern)

    def _link(self) -> None:
        queue = deque(self._goto[0].values())
        while queue:
            state = queue.popleft()
            for ch, nxt in self._goto[state].items():
                queue.append(nxt)
                f = self._fail[state]
                while f and ch not in self._goto[f]:
                    f = self._fail[f]
                cand = self._goto[f].get(ch, 0)
                self._fail[nxt] = cand if cand != nxt else 0
                # outputs of the failure state are all shorter suffixes
                self._out[nxt] = self._out[nxt] + self._out[self._fail[nxt]]

    def search(self, text: str) -> Iterator[tuple[int, int, str]]:
        """Yield ``(start, end, pattern)`` for every occurrence, by end position."""
        state = 0
        goto, fail, out = self._goto, self._fail, self._out
        for i, ch in enumerate(text):
            while state and ch not in goto[state]:
                state = fail[state]
            state = goto[state].get(ch, 0)
            for p in out[state]:
                yield i + 1 - len(p), i + 1, p

    def __len__(self) -> int:
        return len(self._goto)
