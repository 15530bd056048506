"""Per-(patient, criterion) extractive summaries grouped under record dates."""

from __future__ import annotations

import datetime as dt
import json
import logging
import re
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .annotate import Annotation, Sentence, segment
from .corpus import PatientRecord
from .ontology import CodeList
from .text import word_count

logger = logging.getLogger(__name__)

DEFAULT_MAX_WORDS = 4000
_WORD = re.compile(r"\S+")


@dataclass(frozen=True)
class Block:
    note_index: int
    note_date: dt.date | None
    sentences: tuple[str, ...]


@dataclass(frozen=True)
class Summary:
    patient_id: str
    criterion_id: str
    blocks: tuple[Block, ...] = ()

    @property
    def word_count(self) -> int:
        return word_count(render(self))

    @property
    def is_empty(self) -> bool:
        return not self.blocks

    def to_json(self) -> str:
        obj = {
            "patient_id": self.patient_id,
            "criterion_id": self.criterion_id,
            "blocks": [
                {
                    "note_index": b.note_index,
                    "note_date": b.note_date.isoformat() if b.note_date else None,
                    "sentences": list(b.sentences),
                }
                for b in self.blocks
            ],
            "word_count": self.word_count,
        }
        return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> Summary:
        obj = json.loads(text)
        blocks = tuple(
            Block(
                b["note_index"],
                dt.date.fromisoformat(b["note_date"]) if b["note_date"] else None,
                tuple(b["sentences"]),
            )
            for b in obj["blocks"]
        )
        return cls(obj["patient_id"], obj["criterion_id"], blocks)


def segment_record(record: PatientRecord) -> list[Sentence]:
    out: list[Sentence] = []
    for note in record.notes:
        out.extend(segment(note.text, note.index))
    return out


def extract(
    record: PatientRecord,
    annotations: Iterable[Annotation],
    code_list: CodeList,
    sentences: Sequence[Sentence] | None = None,
) -> Summary:
    """Keep every sentence carrying an annotation whose concept is in ``code_list``."""
    if sentences is None:
        sentences = segment_record(record)
    hits = {(a.note_index, a.sentence_index) for a in annotations if a.concept_id in code_list.codes}
    dates = {n.index: n.date for n in record.notes}
    grouped: dict[int, list[str]] = {}
    for s in sorted(sentences, key=lambda s: (s.note_index, s.sentence_index)):
        if (s.note_index, s.sentence_index) in hits:
            grouped.setdefault(s.note_index, []).append(s.text)
    blocks = tuple(Block(i, dates.get(i), tuple(texts)) for i, texts in sorted(grouped.items()))
    return Summary(record.patient_id, code_list.criterion_id, blocks)


def full_record(record: PatientRecord, criterion_id: str = "") -> Summary:
    """Every note as one block; the input for the no-summarization scenario."""
    blocks = tuple(
        Block(n.index, n.date, (n.text.strip(),)) for n in record.notes if n.text.strip()
    )
    return Summary(record.patient_id, criterion_id, blocks)


def temporal_filter(summary: Summary, current: dt.date, window_days: int) -> Summary:
    """Drop dated blocks outside ``[current - window_days, current]``; keep undated ones."""
    earliest = current - dt.timedelta(days=window_days)
    kept = []
    for b in summary.blocks:
        if b.note_date is None:
            logger.warning(
                "%s/%s: undated block kept by temporal filter",
                summary.patient_id, summary.criterion_id,
            )
            kept.append(b)
        elif earliest <= b.note_date <= current:
            kept.append(b)
    return replace(summary, blocks=tuple(kept))


def render(summary: Summary) -> str:
    paragraphs = []
    for b in summary.blocks:
        date = b.note_date.isoformat() if b.note_date else "unknown"
        paragraphs.append(f"Record date: {date}\n" + " ".join(b.sentences))
    return "\n\n".join(paragraphs)


def truncate(text: str, max_words: int = DEFAULT_MAX_WORDS) -> str:
    """Keep the first ``max_words`` words, dropping the tail."""
    if max_words <= 0:
        raise ValueError("max_words must be positive")
    for i, m in enumerate(_WORD.finditer(text), 1):
        if i == max_words:
            rest = text[m.end():]
            return text if not rest.strip() else text[: m.end()]
    return text
