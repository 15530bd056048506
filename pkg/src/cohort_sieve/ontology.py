"""SNOMED CT concept graph, descendant closure and per-criterion code lists.

Two input formats are supported: an RF2 snapshot (concept, description
and relationship files) and a small four-column TSV used for fixtures.
Only active concepts and active IS-A rows make it into the graph.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .errors import OntologyError
from .matching import AhoCorasick
from .text import normalize

logger = logging.getLogger(__name__)

IS_A = 116680003
FSN_TYPE = 900000000000003001
SYNONYM_TYPE = 900000000000013009
MIN_TERM_LENGTH = 3
MAX_ID_DIGITS = 18

_SEMANTIC_TAG = re.compile(r"\s*\([^()]*\)\s*$")

CONCEPT_COLUMNS = ("id", "effectiveTime", "active", "moduleId", "definitionStatusId")
DESCRIPTION_COLUMNS = (
    "id", "effectiveTime", "active", "moduleId", "conceptId",
    "languageCode", "typeId", "term", "caseSignificanceId",
)
RELATIONSHIP_COLUMNS = (
    "id", "effectiveTime", "active", "moduleId", "sourceId", "destinationId",
    "relationshipGroup", "typeId", "characteristicTypeId", "modifierId",
)


def concept_id(value: str | int) -> int:
    """Parse and validate a SNOMED CT identifier."""
    if isinstance(value, str):
        text = value.strip()
        if not (text.isascii() and text.isdigit()) or len(text) > MAX_ID_DIGITS:
            raise ValueError(f"not a concept id: {value!r}")
        value = int(text)
    if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
        raise ValueError(f"not a concept id: {value!r}")
    if len(str(value)) > MAX_ID_DIGITS:
        raise ValueError(f"concept id has more than {MAX_ID_DIGITS} digits: {value}")
    return value


def strip_semantic_tag(term: str) -> str:
    """``"Major abdominal surgery (procedure)"`` -> ``"Major abdominal surgery"``."""
    stripped = _SEMANTIC_TAG.sub("", term)
    return stripped if stripped else term


@dataclass(frozen=True)
class Concept:
    id: int
    preferred_term: str
    synonyms: tuple[str, ...] = ()
    parents: tuple[int, ...] = ()
    active: bool = True

    def __post_init__(self):
        if not self.preferred_term.strip():
            raise OntologyError(f"concept {self.id} has an empty preferred term")
        if self.id in self.parents:
            raise OntologyError(f"concept {self.id} lists itself as a parent")


@dataclass(frozen=True)
class ConceptGraph:
    concepts: Mapping[int, Concept]
    children: Mapping[int, frozenset[int]]

    @classmethod
    def from_concepts(cls, concepts: Iterable[Concept]) -> ConceptGraph:
        by_id: dict[int, Concept] = {}
        for c in concepts:
            if c.id in by_id:
                raise OntologyError(f"duplicate concept {c.id}")
            by_id[c.id] = c
        children: dict[int, set[int]] = {cid: set() for cid in by_id}
        for c in by_id.values():
            for p in c.parents:
                if p not in by_id:
                    raise OntologyError(f"concept {c.id} references unknown parent {p}")
                children[p].add(c.id)
        frozen = {k: frozenset(v) for k, v in children.items()}
        cycle = find_cycle(frozen)
        if cycle:
            raise OntologyError("IS-A cycle: " + " -> ".join(map(str, cycle)))
        return cls(by_id, frozen)

    def __contains__(self, cid: object) -> bool:
        return cid in self.concepts

    def __len__(self) -> int:
        return len(self.concepts)

    def term_of(self, cid: int) -> str:
        return self.concepts[cid].preferred_term


def find_cycle(children: Mapping[int, Iterable[int]]) -> list[int] | None:
    """Return one cycle as a closed id path, or None for a DAG."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = {n: WHITE for n in children}
    for start in sorted(children):
        if color[start] != WHITE:
            continue
        path = [start]
        stack = [iter(sorted(children[start]))]
        color[start] = GREY
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                color[path.pop()] = BLACK
                stack.pop()
                continue
            if color.get(nxt, WHITE) == GREY:
                return path[path.index(nxt):] + [nxt]
            if color.get(nxt, WHITE) == WHITE:
                color[nxt] = GREY
                path.append(nxt)
                stack.append(iter(sorted(children.get(nxt, ()))))
    return None


def _rows(path: Path, columns: tuple[str, ...]) -> Iterator[tuple[int, list[str]]]:
    if not path.is_file():
        raise OntologyError(f"missing file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE)
        header = next(reader, None)
        if header is None:
            return
        if len(header) != len(columns):
            raise OntologyError(
                f"{path}:1: header has {len(header)} columns, expected {len(columns)}"
            )
        for row in reader:
            if not row:
                continue
            if len(row) != len(columns):
                raise OntologyError(
                    f"{path}:{reader.line_num}: expected {len(columns)} columns, got {len(row)}"
                )
            yield reader.line_num, row


def _parse_id(value: str, path: Path, line: int) -> int:
    try:
        return concept_id(value)
    except ValueError as exc:
        raise OntologyError(f"{path}:{line}: {exc}") from None


def load_rf2(concept_path, description_path, relationship_path) -> ConceptGraph:
    concept_path = Path(concept_path)
    description_path = Path(description_path)
    relationship_path = Path(relationship_path)

    active: set[int] = set()
    inactive = 0
    for line, row in _rows(concept_path, CONCEPT_COLUMNS):
        cid = _parse_id(row[0], concept_path, line)
        if row[2] == "1":
            active.add(cid)
        else:
            inactive += 1
    if inactive:
        logger.warning("dropped %d inactive concepts from %s", inactive, concept_path)

    fsn: dict[int, tuple[int, str]] = {}
    synonyms: dict[int, set[str]] = {}
    for line, row in _rows(description_path, DESCRIPTION_COLUMNS):
        if row[2] != "1":
            continue
        did = _parse_id(row[0], description_path, line)
        cid = _parse_id(row[4], description_path, line)
        if cid not in active:
            continue
        type_id = _parse_id(row[6], description_path, line)
        term = row[7].strip()
        if not term:
            continue
        if type_id == FSN_TYPE:
            # lowest description id wins so row order cannot matter
            if cid not in fsn or did < fsn[cid][0]:
                fsn[cid] = (did, strip_semantic_tag(term))
        else:
            synonyms.setdefault(cid, set()).add(term)

    parents: dict[int, set[int]] = {cid: set() for cid in active}
    dropped = 0
    for line, row in _rows(relationship_path, RELATIONSHIP_COLUMNS):
        if row[2] != "1":
            continue
        if _parse_id(row[7], relationship_path, line) != IS_A:
            continue
        src = _parse_id(row[4], relationship_path, line)
        dst = _parse_id(row[5], relationship_path, line)
        if src not in active or dst not in active:
            dropped += 1
            continue
        if src == dst:
            raise OntologyError(f"{relationship_path}:{line}: IS-A self-loop on {src}")
        parents[src].add(dst)
    if dropped:
        logger.warning(
            "dropped %d IS-A edges touching inactive or unknown concepts", dropped
        )

    concepts = []
    for cid in sorted(active):
        syns = sorted(synonyms.get(cid, ()))
        if cid in fsn:
            preferred = fsn[cid][1]
        elif syns:
            preferred = syns[0]
        else:
            logger.warning("concept %d has no active description; using its id", cid)
            preferred = str(cid)
        syns = [s for s in syns if s != preferred]
        concepts.append(Concept(cid, preferred, tuple(syns), tuple(sorted(parents[cid]))))
    return ConceptGraph.from_concepts(concepts)


def load_simple(path) -> ConceptGraph:
    """Load the fixture format: ``id<TAB>term<TAB>syn|syn<TAB>parent|parent``."""
    path = Path(path)
    if not path.is_file():
        raise OntologyError(f"missing file: {path}")
    concepts = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 4:
                raise OntologyError(f"{path}:{line_no}: expected 4 columns, got {len(cols)}")
            cid = _parse_id(cols[0], path, line_no)
            syns = tuple(s.strip() for s in cols[2].split("|") if s.strip())
            parents = tuple(
                sorted(_parse_id(p, path, line_no) for p in cols[3].split("|") if p.strip())
            )
            try:
                concepts.append(Concept(cid, cols[1].strip(), syns, parents))
            except OntologyError as exc:
                raise OntologyError(f"{path}:{line_no}: {exc}") from None
    return ConceptGraph.from_concepts(concepts)


def write_simple(graph: ConceptGraph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for cid in sorted(graph.concepts):
            c = graph.concepts[cid]
            fh.write(
                f"{cid}\t{c.preferred_term}\t{'|'.join(c.synonyms)}\t"
                f"{'|'.join(map(str, c.parents))}\n"
            )


def descendants(graph: ConceptGraph, root: int) -> frozenset[int]:
    """``root`` plus everything below it along IS-A edges."""
    if root not in graph.concepts:
        raise OntologyError(f"unknown concept {root}")
    seen = {root}
    queue = deque([root])
    while queue:
        for child in graph.children[queue.popleft()]:
            if child not in seen:
                seen.add(child)
                queue.append(child)
    return frozenset(seen)


@dataclass(frozen=True)
class CodeList:
    criterion_id: str
    codes: frozenset[int]
    seeds: tuple[int, ...]
    source_cuis: str = ""  # documentation only

    def __post_init__(self):
        missing = [s for s in self.seeds if s not in self.codes]
        if missing:
            raise OntologyError(f"seeds {missing} missing from code list {self.criterion_id}")

    def to_json(self) -> str:
        obj = {
            "criterion_id": self.criterion_id,
            "seeds": [str(s) for s in self.seeds],
            "codes": [str(c) for c in sorted(self.codes)],
        }
        if self.source_cuis:
            obj["source_cuis"] = self.source_cuis
        return json.dumps(obj, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> CodeList:
        obj = json.loads(text)
        return cls(
            obj["criterion_id"],
            frozenset(concept_id(c) for c in obj["codes"]),
            tuple(concept_id(s) for s in obj["seeds"]),
            obj.get("source_cuis", ""),
        )


def build_code_list(graph: ConceptGraph, criterion_id: str, seeds: Iterable[int]) -> CodeList:
    seeds = tuple(dict.fromkeys(seeds))
    if not seeds:
        raise OntologyError(f"{criterion_id}: no seed concepts")
    for s in seeds:
        if s not in graph.concepts:
            raise OntologyError(f"{criterion_id}: unknown seed concept {s}")
    codes: set[int] = set()
    for s in seeds:
        codes |= descendants(graph, s)
    return CodeList(criterion_id, frozenset(codes), seeds)


@dataclass(frozen=True)
class TermIndex:
    entries: Mapping[str, frozenset[int]] = field(default_factory=dict)

    @cached_property
    def automaton(self) -> AhoCorasick:
        return AhoCorasick(sorted(self.entries))

    def __len__(self) -> int:
        return len(self.entries)


def term_index(graph: ConceptGraph, code_list: CodeList) -> TermIndex:
    entries: dict[str, set[int]] = {}
    for cid in code_list.codes:
        if cid not in graph.concepts:
            raise OntologyError(f"code {cid} of {code_list.criterion_id} not in graph")
        c = graph.concepts[cid]
        for term in (c.preferred_term, *c.synonyms):
            key = normalize(term)
            if len(key) >= MIN_TERM_LENGTH:
                entries.setdefault(key, set()).add(cid)
    return TermIndex({k: frozenset(v) for k, v in sorted(entries.items())})


def merge_indexes(*indexes: TermIndex) -> TermIndex:
    merged: dict[str, set[int]] = {}
    for idx in indexes:
        for k, v in idx.entries.items():
            merged.setdefault(k, set()).update(v)
    return TermIndex({k: frozenset(v) for k, v in sorted(merged.items())})
