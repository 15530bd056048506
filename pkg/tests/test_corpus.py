import datetime as dt
import logging

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cohort_sieve.corpus import (
    PatientRecord, current_time, load_corpus, parse_patient_xml, split_notes, to_xml,
)
from cohort_sieve.errors import CorpusError
from cohort_sieve.labels import CRITERION_IDS, Label

GOLD = {c: (Label.MET if i % 2 else Label.NOT_MET) for i, c in enumerate(CRITERION_IDS)}

RECORD = (
    "\n\n\nRecord date: 2090-03-01\n\nFirst visit. BP fine.\n"
    "****\n\nRecord date: 2094-03-10\nSecond visit.\n"
)


def test_split_two_notes():
    notes = split_notes(RECORD)
    assert [n.date for n in notes] == [dt.date(2090, 3, 1), dt.date(2094, 3, 10)]
    assert notes[0].text == "\nFirst visit. BP fine.\n****\n\n"
    assert notes[1].text == "Second visit.\n"
    assert notes[0].header == "\n\n\nRecord date: 2090-03-01\n"
    assert "".join(n.raw for n in notes) == RECORD


def test_split_header_variants():
    text = "record date:2091-01-02 \nA\nRECORD DATE:  2091-02-03\nB"
    notes = split_notes(text)
    assert [n.date for n in notes] == [dt.date(2091, 1, 2), dt.date(2091, 2, 3)]
    assert notes[1].text == "B"


def test_three_spaces_is_not_a_header():
    notes = split_notes("Record date:   2091-01-02\nA")
    assert len(notes) == 1 and notes[0].date is None


def test_preamble_with_content_becomes_undated_note():
    notes = split_notes("Referral letter.\nRecord date: 2091-01-02\nA")
    assert [n.date for n in notes] == [None, dt.date(2091, 1, 2)]
    assert notes[0].text == "Referral letter.\n"
    assert [n.index for n in notes] == [0, 1]


def test_no_header_gives_single_undated_note():
    notes = split_notes("just text")
    assert len(notes) == 1 and notes[0].date is None and notes[0].text == "just text"


def test_invalid_date_left_undated_with_warning(caplog):
    with caplog.at_level(logging.WARNING):
        notes = split_notes("Record date: 2090-02-30\nA\nRecord date: 2090-03-01\nB", "P1")
    assert [n.date for n in notes] == [None, dt.date(2090, 3, 1)]
    assert "P1: invalid record date 2090-02-30" in caplog.text


header_lines = st.builds(
    lambda y, m, d, sp, tail: f"{'' if sp is None else sp}Record date:{' ' * (m % 3)}{y:04d}-{m:02d}-{d:02d}{tail}\n",
    st.integers(1900, 2200), st.integers(0, 13), st.integers(0, 32),
    st.sampled_from([None, " ", "\t"]), st.sampled_from(["", " ", " 10:00"]),
)
chunks = st.one_of(header_lines, st.text(alphabet="ab \n.*R:0-", max_size=30))


@settings(max_examples=300)
@given(st.lists(chunks, max_size=8).map("".join))
def test_split_reconstructs_input(text):
    notes = split_notes(text)
    assert "".join(n.raw for n in notes) == text
    assert [n.index for n in notes] == list(range(len(notes)))


def test_parse_xml_and_gold():
    rec = parse_patient_xml(to_xml(RECORD, GOLD), "101")
    assert rec.patient_id == "101"
    assert rec.text == RECORD
    assert rec.gold_labels == GOLD
    assert len(rec.notes) == 2


def test_parse_xml_without_tags():
    assert parse_patient_xml(to_xml(RECORD), "1").gold_labels is None


@pytest.mark.parametrize(
    "xml, message",
    [
        ("<PatientMatching><TEXT>x", "malformed XML"),
        ("<PatientMatching></PatientMatching>", "no TEXT"),
        ("<PatientMatching><TEXT>x</TEXT><TAGS><FOO met='met'/></TAGS></PatientMatching>", "unknown criterion"),
        ("<PatientMatching><TEXT>x</TEXT><TAGS><ABDOMINAL/></TAGS></PatientMatching>", "no met attribute"),
        ("<PatientMatching><TEXT>x</TEXT><TAGS><ABDOMINAL met='maybe'/></TAGS></PatientMatching>", "ABDOMINAL"),
        ("<PatientMatching><TEXT>x</TEXT><TAGS><ABDOMINAL met='met'/></TAGS></PatientMatching>", "missing criteria"),
    ],
)
def test_parse_xml_errors(xml, message):
    with pytest.raises(CorpusError, match=message):
        parse_patient_xml(xml, "1")


def test_to_xml_rejects_cdata_terminator():
    with pytest.raises(CorpusError):
        to_xml("a ]]> b")


def test_load_corpus_sorted(tmp_path):
    for pid in ("b", "a"):
        (tmp_path / f"{pid}.xml").write_text(to_xml(RECORD, GOLD))
    assert [r.patient_id for r in load_corpus(tmp_path)] == ["a", "b"]
    with pytest.raises(CorpusError):
        load_corpus(tmp_path / "missing")
    with pytest.raises(CorpusError):
        load_corpus(tmp_path / "..")


def test_current_time():
    rec = PatientRecord("1", tuple(split_notes(RECORD)))
    assert current_time(rec) == dt.date(2094, 3, 10)
    undated = PatientRecord("2", tuple(split_notes("nothing dated")))
    with pytest.raises(CorpusError, match="no dated notes"):
        current_time(undated)


def test_record_validation():
    with pytest.raises(CorpusError):
        PatientRecord("1", ())
    with pytest.raises(CorpusError, match="gold labels missing"):
        PatientRecord("1", tuple(split_notes("x")), {"ABDOMINAL": Label.MET})
