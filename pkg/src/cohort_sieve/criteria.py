"""The 13 eligibility criteria as a validated, user-editable registry."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterator, Mapping

from .errors import CriteriaError
from .labels import CRITERION_IDS, Label
from .ontology import ConceptGraph, concept_id

# fixed-day windows; calendar months are ambiguous at month ends
TEMPORAL_WINDOWS = {"DIETSUPP-2MOS": 61, "MI-6MOS": 183, "KETO-1YR": 365}

_FIELDS = (
    "id",
    "definition",
    "prompt_question",
    "seed_concepts",
    "yes_means",
    "temporal_window_days",
    "no_evidence_default",
)
_SENTENCE_END = re.compile(r"(?<=[.?!])\s+")


@dataclass(frozen=True)
class Criterion:
    id: str
    definition: str
    prompt_question: str
    seed_concepts: tuple[int, ...]
    yes_means: Label = Label.MET
    temporal_window_days: int | None = None
    no_evidence_default: Label = Label.NOT_MET

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "definition": self.definition,
            "prompt_question": self.prompt_question,
            "seed_concepts": [str(s) for s in self.seed_concepts],
            "yes_means": self.yes_means.value,
            "temporal_window_days": self.temporal_window_days,
            "no_evidence_default": self.no_evidence_default.value,
        }


def asks_for_one_word(question: str) -> bool:
    """True when the last sentence of ``question`` asks for a yes/no answer."""
    parts = [p for p in _SENTENCE_END.split(question.strip()) if p]
    if not parts:
        return False
    last = parts[-1].lower()
    return bool(re.search(r"\byes\b", last) and re.search(r"\bno\b", last))


@dataclass(frozen=True)
class CriteriaRegistry:
    criteria: Mapping[str, Criterion]

    def __getitem__(self, cid: str) -> Criterion:
        return self.criteria[cid]

    def __iter__(self) -> Iterator[Criterion]:
        return (self.criteria[c] for c in CRITERION_IDS if c in self.criteria)

    def __len__(self) -> int:
        return len(self.criteria)

    def to_json(self) -> str:
        return json.dumps([c.to_dict() for c in self], indent=2, ensure_ascii=False) + "\n"


def _criterion_from_dict(obj: dict, problems: list[str]) -> Criterion | None:
    where = obj.get("id", "<no id>")
    unknown = sorted(set(obj) - set(_FIELDS))
    if unknown:
        problems.append(f"{where}: unknown fields {unknown}")
    question = obj.get("prompt_question")
    if not isinstance(question, str) or not question.strip():
        problems.append(f"{where}: missing prompt_question")
        return None
    if not asks_for_one_word(question):
        problems.append(f"{where}: prompt_question must end by asking for a yes/no answer")
    try:
        seeds = tuple(concept_id(s) for s in obj.get("seed_concepts", []))
        yes_means = Label.parse(obj.get("yes_means", "met"))
        default = Label.parse(obj.get("no_evidence_default", "not met"))
    except (ValueError, TypeError) as exc:
        problems.append(f"{where}: {exc}")
        return None
    window = obj.get("temporal_window_days")
    if window is not None and (isinstance(window, bool) or not isinstance(window, int) or window <= 0):
        problems.append(f"{where}: temporal_window_days must be a positive integer or null")
        return None
    if (window is not None) != (where in TEMPORAL_WINDOWS):
        problems.append(
            f"{where}: temporal_window_days must be set exactly for {sorted(TEMPORAL_WINDOWS)}"
        )
    return Criterion(
        id=where,
        definition=obj.get("definition", ""),
        prompt_question=question,
        seed_concepts=seeds,
        yes_means=yes_means,
        temporal_window_days=window,
        no_evidence_default=default,
    )


def parse_registry(data: list) -> CriteriaRegistry:
    """Validate a decoded config and report every problem at once."""
    if not isinstance(data, list):
        raise CriteriaError("criteria config must be a JSON array")
    problems: list[str] = []
    found: dict[str, Criterion] = {}
    for i, obj in enumerate(data):
        if not isinstance(obj, dict):
            problems.append(f"entry {i}: not an object")
            continue
        cid = obj.get("id")
        if cid not in CRITERION_IDS:
            problems.append(f"entry {i}: unknown criterion {cid!r}")
            continue
        if cid in found:
            problems.append(f"{cid}: duplicate criterion")
            continue
        crit = _criterion_from_dict(obj, problems)
        if crit is not None:
            found[cid] = crit
    seen = {o.get("id") for o in data if isinstance(o, dict)}
    for cid in CRITERION_IDS:
        if cid not in seen:
            problems.append(f"{cid}: missing criterion")
    if problems:
        raise CriteriaError("invalid criteria config:\n  " + "\n  ".join(problems))
    return CriteriaRegistry({c: found[c] for c in CRITERION_IDS})


def load_registry(config_path=None) -> CriteriaRegistry:
    """Load a criteria config; ``None`` loads the shipped defaults."""
    if config_path is None:
        text = resources.files("cohort_sieve").joinpath("data/criteria_default.json").read_text(
            encoding="utf-8"
        )
        where = "default criteria"
    else:
        path = Path(config_path)
        if not path.is_file():
            raise CriteriaError(f"missing criteria config: {path}")
        text = path.read_text(encoding="utf-8")
        where = str(path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CriteriaError(f"{where}: {exc}") from None
    return parse_registry(data)


def validate_seeds(registry: CriteriaRegistry, graph: ConceptGraph) -> list[str]:
    warnings = []
    for crit in registry:
        if not crit.seed_concepts:
            warnings.append(f"{crit.id}: no seed concepts; its summaries will always be empty")
        for s in crit.seed_concepts:
            if s not in graph.concepts:
                warnings.append(f"{crit.id}: seed concept {s} not found in the ontology")
    return warnings
