import csv
import json

import httpx
import pytest

from cohort_sieve import cli, pipeline
from cohort_sieve.llm import BackendConfig, HttpBackend
from cohort_sieve.pipeline import RunConfig
from cohort_sieve.errors import ConfigError


@pytest.fixture
def corpus(tmp_path):
    assert cli.main(["fixtures", "generate", "--out", str(tmp_path), "--patients", "3", "--seed", "1"]) == 0
    return tmp_path


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_ontology_build_is_byte_stable(corpus, capsys):
    cfg = corpus / "config.json"
    assert run("--config", cfg, "ontology", "build") == 0
    lists = corpus / "runs" / "summarize" / "code_lists"
    files = sorted(lists.iterdir())
    assert len(files) == 13
    first = {f.name: f.read_bytes() for f in files}
    assert run("ontology", "build", "--config", cfg) == 0
    assert {f.name: f.read_bytes() for f in sorted(lists.iterdir())} == first
    assert "wrote 13 code lists" in capsys.readouterr().out


def test_ontology_build_warns_on_unknown_seed(corpus, capsys):
    criteria = json.loads(pipeline.load_registry().to_json())
    criteria[0]["seed_concepts"].append("999999999")
    (corpus / "crit.json").write_text(json.dumps(criteria))
    cfg = json.loads((corpus / "config.json").read_text())
    cfg["criteria_path"] = "crit.json"
    (corpus / "config.json").write_text(json.dumps(cfg))
    assert run("--config", corpus / "config.json", "ontology", "build") == 0
    assert "ABDOMINAL: seed concept 999999999 not found" in capsys.readouterr().err


def read_predictions(run_dir):
    with open(run_dir / "predictions.csv", newline="") as fh:
        return list(csv.reader(fh))


def test_classify_and_evaluate(corpus, capsys):
    cfg = corpus / "config.json"
    assert run("--config", cfg, "classify") == 0
    run_dir = corpus / "runs" / "summarize"
    rows = read_predictions(run_dir)
    assert rows[0] == ["patient_id", "criterion", "label"]
    assert len(rows) == 1 + 3 * 13
    assert {r[2] for r in rows[1:]} <= {"met", "not met"}
    for name in ("config.json", "annotations.jsonl", "answers.jsonl"):
        assert (run_dir / name).is_file()
    assert len(list((run_dir / "summaries").glob("*.json"))) == 39
    capsys.readouterr()
    assert run("--run-dir", run_dir, "evaluate") == 0
    out = capsys.readouterr().out
    assert "Overall (micro)" in out
    assert (run_dir / "report.tsv").is_file() and (run_dir / "confusion.tsv").is_file()


def test_truncate_only_prompts_contain_full_record(corpus, tmp_path):
    run_dir = tmp_path / "trunc"
    assert run("--config", corpus / "config.json", "classify", "--run-dir", run_dir,
               "--scenario", "truncate-only", "--mock-script", corpus / "mock_all_no.json") == 0
    assert not (run_dir / "summaries").exists()
    answers = [json.loads(l) for l in (run_dir / "answers.jsonl").read_text().splitlines()]
    assert {a["source"] for a in answers} == {"mock"}
    cfg = RunConfig.load(run_dir / "config.json")
    assert cfg.scenario == "truncate-only"


def test_max_words_limits_prompt(corpus, tmp_path):
    seen = []

    class Spy(pipeline.MockBackend):
        def complete(self, prompt):
            seen.append(prompt)
            return super().complete(prompt)

    cfg = RunConfig.load(corpus / "config.json")
    cfg = pipeline.dataclasses.replace(cfg, run_dir=str(tmp_path / "r"), scenario="truncate-only", max_words=5)
    pipeline.run_classify(cfg, Spy())
    assert seen and all(len(p.body.split()) == 5 for p in seen)


def test_live_then_cache_only(corpus, tmp_path, monkeypatch):
    calls = []

    def handler(request):
        calls.append(request)
        return httpx.Response(200, json={"choices": [{"message": {"content": "No."}}]})

    client = httpx.Client(transport=httpx.MockTransport(handler))
    base = RunConfig.load(corpus / "config.json")
    live_cfg = pipeline.dataclasses.replace(base, run_dir=str(tmp_path / "live"), backend="live")
    backend = HttpBackend(live_cfg.llm, api_key="k", client=client)
    first = pipeline.run_classify(live_cfg, backend)
    assert calls and {a.source for a in first} <= {"live", "no-evidence-default"}
    n = len(calls)

    assert run("--run-dir", tmp_path / "live", "classify", "--backend", "cache-only") == 0
    assert len(calls) == n
    answers = [json.loads(l) for l in (tmp_path / "live" / "answers.jsonl").read_text().splitlines()]
    assert {a["source"] for a in answers} <= {"cache", "no-evidence-default"}
    assert [(a.patient_id, a.criterion_id, a.label.value) for a in first] == [
        (a["patient_id"], a["criterion_id"], a["label"]) for a in answers
    ]


def test_cache_only_miss_exits_3(corpus, tmp_path, capsys):
    assert run("--config", corpus / "config.json", "--run-dir", tmp_path / "cold",
               "classify", "--backend", "cache-only") == 3
    assert "rerun to resume" in capsys.readouterr().err


def test_evaluate_exit_codes(corpus, tmp_path, capsys):
    assert run("--config", corpus / "config.json", "--run-dir", tmp_path / "none", "evaluate") == 2
    assert "missing predictions" in capsys.readouterr().err
    assert run("evaluate") == 1
    assert run("--config", tmp_path / "missing.json", "evaluate") == 1
    assert run("bogus-command") == 1


def test_compare_runs(corpus, tmp_path, capsys):
    cfg = corpus / "config.json"
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("--config", cfg, "--run-dir", a, "classify", "--scenario", "truncate-only") == 0
    assert run("--run-dir", a, "evaluate") == 0
    assert run("--config", cfg, "--run-dir", b, "classify", "--hard-temporal-filter") == 0
    assert run("--run-dir", b, "evaluate") == 0
    capsys.readouterr()
    assert run("compare", a, b) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].split() == ["criterion", "A", "B", "delta"]
    assert [l.split()[0] for l in out[-2:]] == ["micro", "macro"]
    assert run("compare", a, tmp_path / "nothing") == 2


def test_run_config_validation(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig("d", ["o"], "r", scenario="abstractive")
    with pytest.raises(ConfigError):
        RunConfig("d", ["a", "b"], "r")
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"data_dir": "d", "ontology_paths": ["o"], "run_dir": "r", "extra": 1})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"data_dir": "d", "ontology_paths": ["o"], "run_dir": "r", "llm": {"temperature": 1}})
    cfg = RunConfig.from_dict({"data_dir": "d", "ontology_paths": ["o"], "run_dir": "r"}, tmp_path)
    assert cfg.data_dir == str(tmp_path / "d")
    assert RunConfig.from_dict(json.loads(cfg.to_json())) == cfg
    assert isinstance(cfg.llm, BackendConfig)


def test_rf2_ontology_config(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig("d", ["c"], "r", ontology_format="rf2")
    assert RunConfig("d", ["c", "d", "r"], "r", ontology_format="rf2").ontology_format == "rf2"
