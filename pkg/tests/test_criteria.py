import json

import pytest

from cohort_sieve.criteria import (
    TEMPORAL_WINDOWS, asks_for_one_word, load_registry, parse_registry, validate_seeds,
)
from cohort_sieve.errors import CriteriaError
from cohort_sieve.fixtures import toy_graph
from cohort_sieve.labels import CRITERION_IDS, Label
from cohort_sieve.ontology import Concept, ConceptGraph


@pytest.fixture(scope="module")
def registry():
    return load_registry()


def raw_default():
    return json.loads(load_registry().to_json())


def test_default_registry_has_all_criteria_in_canonical_order(registry):
    assert len(registry) == 13
    assert [c.id for c in registry] == list(CRITERION_IDS)
    assert list(CRITERION_IDS) == sorted(CRITERION_IDS)


def test_abdominal_prompt_exact(registry):
    assert registry["ABDOMINAL"].prompt_question == (
        "Does the patient in the following text have a history of abdominal surgery? "
        "Answer with one word yes or no."
    )


def test_creatinine_threshold_kept(registry):
    assert "larger than 1.4" in registry["CREATININE"].prompt_question


def test_every_prompt_asks_for_one_word(registry):
    for c in registry:
        assert asks_for_one_word(c.prompt_question), c.id


def test_temporal_windows(registry):
    windows = {c.id: c.temporal_window_days for c in registry if c.temporal_window_days}
    assert windows == {"DIETSUPP-2MOS": 61, "MI-6MOS": 183, "KETO-1YR": 365}
    assert windows == TEMPORAL_WINDOWS


def test_polarity(registry):
    inverted = {c.id for c in registry if c.yes_means is Label.NOT_MET}
    assert inverted == {"ENGLISH", "MAKES-DECISIONS"}
    for c in registry:
        assert c.no_evidence_default is c.yes_means.flip()


def test_round_trip(registry):
    assert parse_registry(json.loads(registry.to_json())) == registry


@pytest.mark.parametrize(
    "question, ok",
    [
        ("Is it raining? Answer with one word yes or no.", True),
        ("Answer yes or no: is it raining?", True),
        ("Is it raining? Answer briefly.", False),
        ("Yes or no, is it raining? Explain your reasoning.", False),
        ("", False),
    ],
)
def test_asks_for_one_word(question, ok):
    assert asks_for_one_word(question) is ok


def test_twelve_entries_rejected():
    data = raw_default()[:-1]
    with pytest.raises(CriteriaError, match="MI-6MOS: missing criterion"):
        parse_registry(data)


def test_all_problems_reported_together():
    data = raw_default()
    data[0]["prompt_question"] = "Tell me about the abdomen."
    data[1]["temporal_window_days"] = 30
    data.append(dict(data[2]))
    data.append({"id": "BOGUS"})
    with pytest.raises(CriteriaError) as exc:
        parse_registry(data)
    msg = str(exc.value)
    assert "ABDOMINAL: prompt_question must end" in msg
    assert "ADVANCED-CAD: temporal_window_days must be set exactly" in msg
    assert "ALCOHOL-ABUSE: duplicate criterion" in msg
    assert "unknown criterion 'BOGUS'" in msg


@pytest.mark.parametrize(
    "field, value",
    [
        ("temporal_window_days", 0),
        ("temporal_window_days", True),
        ("yes_means", "maybe"),
        ("seed_concepts", ["abc"]),
        ("prompt_question", ""),
        ("colour", "blue"),
    ],
)
def test_bad_field_values(field, value):
    data = raw_default()
    data[5][field] = value
    with pytest.raises(CriteriaError):
        parse_registry(data)


def test_missing_temporal_window_rejected():
    data = raw_default()
    for obj in data:
        if obj["id"] == "KETO-1YR":
            obj["temporal_window_days"] = None
    with pytest.raises(CriteriaError, match="KETO-1YR"):
        parse_registry(data)


def test_not_a_list():
    with pytest.raises(CriteriaError):
        parse_registry({"ABDOMINAL": {}})


def test_load_from_path(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(load_registry().to_json())
    assert load_registry(p) == load_registry()
    with pytest.raises(CriteriaError, match="missing criteria config"):
        load_registry(tmp_path / "none.json")
    p.write_text("{not json")
    with pytest.raises(CriteriaError):
        load_registry(p)


def test_default_seeds_resolve_in_toy_graph(registry):
    assert validate_seeds(registry, toy_graph()) == []


def test_validate_seeds_reports_missing(registry):
    g = ConceptGraph.from_concepts([Concept(22298006, "Myocardial infarction")])
    warnings = validate_seeds(registry, g)
    assert "ABDOMINAL: seed concept 161617006 not found in the ontology" in warnings
    assert not any(w.startswith("MI-6MOS") for w in warnings)


def test_validate_seeds_empty_list():
    data = raw_default()
    data[0]["seed_concepts"] = []
    warnings = validate_seeds(parse_registry(data), toy_graph())
    assert warnings == ["ABDOMINAL: no seed concepts; its summaries will always be empty"]
