"""Challenge-format patient records: XML ingest, note splitting, gold labels."""

from __future__ import annotations

import datetime as dt
import logging
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .errors import CorpusError
from .labels import CRITERION_IDS, Label

logger = logging.getLogger(__name__)

_HEADER = re.compile(
    r"^[ \t]*record date:[ ]{0,2}(\d{4})-(\d{2})-(\d{2})\b[^\n]*(?:\n|$)",
    re.IGNORECASE | re.MULTILINE,
)


@dataclass(frozen=True)
class Note:
    index: int
    date: dt.date | None
    text: str  # body after the header line
    header: str = ""  # header line incl. newline; the first note also keeps blank preamble

    @property
    def raw(self) -> str:
        return self.header + self.text


@dataclass(frozen=True)
class PatientRecord:
    patient_id: str
    notes: tuple[Note, ...]
    gold_labels: Mapping[str, Label] | None = None

    def __post_init__(self):
        if not self.notes:
            raise CorpusError(f"{self.patient_id}: record has no notes")
        if self.gold_labels is not None:
            missing = [c for c in CRITERION_IDS if c not in self.gold_labels]
            if missing:
                raise CorpusError(f"{self.patient_id}: gold labels missing for {missing}")

    @property
    def text(self) -> str:
        return "".join(n.raw for n in self.notes)


def split_notes(raw_text: str, patient_id: str = "") -> list[Note]:
    """Split a record at every ``Record date: YYYY-MM-DD`` line.

    Text ahead of the first header becomes an undated note only when it
    has non-whitespace content; otherwise it rides along in the first
    note's header so nothing is lost.
    """
    headers = list(_HEADER.finditer(raw_text))
    if not headers:
        return [Note(0, None, raw_text)]

    notes: list[Note] = []
    prefix = raw_text[: headers[0].start()]
    carry = ""
    if prefix.strip():
        notes.append(Note(0, None, prefix))
    else:
        carry = prefix

    for i, m in enumerate(headers):
        body_end = headers[i + 1].start() if i + 1 < len(headers) else len(raw_text)
        y, mo, d = (int(g) for g in m.groups())
        try:
            date = dt.date(y, mo, d)
        except ValueError:
            logger.warning(
                "%sinvalid record date %04d-%02d-%02d; note left undated",
                f"{patient_id}: " if patient_id else "", y, mo, d,
            )
            date = None
        notes.append(Note(len(notes), date, raw_text[m.end():body_end], carry + m.group()))
        carry = ""
    return notes


def parse_patient_xml(data: bytes | str, patient_id: str) -> PatientRecord:
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise CorpusError(f"{patient_id}: malformed XML: {exc}") from None
    text_el = root.find("TEXT")
    if text_el is None:
        raise CorpusError(f"{patient_id}: no TEXT element")
    notes = split_notes(text_el.text or "", patient_id)

    gold = None
    tags = root.find("TAGS")
    if tags is not None:
        gold = {}
        for el in tags:
            if el.tag not in CRITERION_IDS:
                raise CorpusError(f"{patient_id}: unknown criterion tag {el.tag!r}")
            met = el.get("met")
            if met is None:
                raise CorpusError(f"{patient_id}: tag {el.tag} has no met attribute")
            try:
                gold[el.tag] = Label.parse(met)
            except ValueError as exc:
                raise CorpusError(f"{patient_id}: {el.tag}: {exc}") from None
        missing = [c for c in CRITERION_IDS if c not in gold]
        if missing:
            raise CorpusError(f"{patient_id}: TAGS missing criteria {missing}")
        gold = {c: gold[c] for c in CRITERION_IDS}
    return PatientRecord(patient_id, tuple(notes), gold)


def load_patient(path) -> PatientRecord:
    path = Path(path)
    return parse_patient_xml(path.read_bytes(), path.stem)


def load_corpus(directory) -> list[PatientRecord]:
    """Every ``*.xml`` in ``directory``, sorted by patient id."""
    directory = Path(directory)
    if not directory.is_dir():
        raise CorpusError(f"missing corpus directory: {directory}")
    files = sorted(directory.glob("*.xml"))
    if not files:
        raise CorpusError(f"no patient XML files in {directory}")
    records = [load_patient(f) for f in files]
    logger.info("loaded %d patient records from %s", len(records), directory)
    return records


def current_time(record: PatientRecord) -> dt.date:
    dates = [n.date for n in record.notes if n.date is not None]
    if not dates:
        raise CorpusError(f"{record.patient_id}: no dated notes to anchor the current time")
    return max(dates)


def to_xml(text: str, gold: Mapping[str, Label] | None = None) -> str:
    """Serialize a record in the challenge layout (TEXT as CDATA)."""
    if "]]>" in text:
        raise CorpusError("record text cannot contain ']]>'")
    lines = ['<?xml version="1.0" encoding="UTF-8" ?>', "<PatientMatching>", f"<TEXT><![CDATA[{text}]]></TEXT>"]
    if gold is not None:
        lines.append("<TAGS>")
        for c in CRITERION_IDS:
            lines.append(f'<{c} met="{gold[c].value}" />')
        lines.append("</TAGS>")
    lines.append("</PatientMatching>")
    return "\n".join(lines) + "\n"
