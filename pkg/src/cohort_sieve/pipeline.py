"""Run-directory orchestration: code lists, classification, evaluation, comparison.

Layout of a run directory::

    config.json            resolved config snapshot, written before any work
    code_lists/<ID>.json   compiled code list per criterion
    summaries/<patient>__<ID>.json   extractive summaries (summarize scenario)
    annotations.jsonl      concept mentions (summarize scenario)
    llm_cache.jsonl        append-only response cache
    answers.jsonl          one AnswerRecord per (patient, criterion)
    predictions.csv        patient_id,criterion,label
    report.txt / report.tsv / confusion.tsv
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from . import corpus as corpus_mod
from .annotate import annotate, annotations_jsonl
from .criteria import CriteriaRegistry, load_registry, validate_seeds
from .errors import ConfigError, CorpusError, EvaluationError
from .evaluate import AggregateReport, compare, evaluate, read_tsv, render_confusion, render_report, render_tsv
from .labels import CRITERION_IDS, Label
from .llm import (
    AnswerRecord, BackendConfig, CacheOnlyBackend, HttpBackend, Job, MockBackend,
    ResponseCache, decide_all,
)
from .ontology import CodeList, ConceptGraph, build_code_list, load_rf2, load_simple, term_index
from .summarize import (
    DEFAULT_MAX_WORDS, extract, full_record, render, segment_record, temporal_filter, truncate,
)

logger = logging.getLogger(__name__)

SCENARIOS = ("summarize", "truncate-only")
BACKENDS = ("live", "mock", "cache-only")


@dataclass
class RunConfig:
    data_dir: str
    ontology_paths: list[str]
    run_dir: str
    ontology_format: str = "simple"
    split: str = "test"
    criteria_path: str | None = None
    scenario: str = "summarize"
    hard_temporal_filter: bool = False
    backend: str = "mock"
    mock_script: str | None = None
    max_words: int = DEFAULT_MAX_WORDS
    llm: BackendConfig = field(default_factory=BackendConfig)

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.backend not in BACKENDS:
            raise ConfigError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        if self.ontology_format == "simple" and len(self.ontology_paths) != 1:
            raise ConfigError("simple ontology format takes exactly one path")
        if self.ontology_format == "rf2" and len(self.ontology_paths) != 3:
            raise ConfigError("rf2 ontology format takes concept, description and relationship paths")
        if self.ontology_format not in ("simple", "rf2"):
            raise ConfigError(f"unknown ontology format {self.ontology_format!r}")
        if self.max_words < 1:
            raise ConfigError("max_words must be positive")

    @classmethod
    def from_dict(cls, obj: dict, base_dir=None) -> RunConfig:
        """Build from decoded JSON; relative paths resolve against ``base_dir``."""
        obj = dict(obj)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(obj) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        try:
            obj["llm"] = BackendConfig(**obj.get("llm", {}))
        except TypeError as exc:
            raise ConfigError(f"bad llm config: {exc}") from None
        base = Path(base_dir) if base_dir else None

        def resolve(p):
            if p is None or base is None:
                return p
            return str((base / p).resolve()) if not Path(p).is_absolute() else p

        for key in ("data_dir", "run_dir", "criteria_path", "mock_script"):
            if key in obj:
                obj[key] = resolve(obj[key])
        if "ontology_paths" in obj:
            obj["ontology_paths"] = [resolve(p) for p in obj["ontology_paths"]]
        try:
            return cls(**obj)
        except TypeError as exc:
            raise ConfigError(f"incomplete config: {exc}") from None

    @classmethod
    def load(cls, path) -> RunConfig:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"missing config file: {path}")
        try:
            obj = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        return cls.from_dict(obj, path.parent)

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2) + "\n"

    @property
    def run_path(self) -> Path:
        return Path(self.run_dir)


def write_snapshot(cfg: RunConfig) -> None:
    run = cfg.run_path
    run.mkdir(parents=True, exist_ok=True)
    snap = run / "config.json"
    text = cfg.to_json()
    if snap.exists() and snap.read_text(encoding="utf-8") != text:
        logger.warning("config differs from the snapshot in %s; overwriting", run)
    snap.write_text(text, encoding="utf-8")


def load_graph(cfg: RunConfig) -> ConceptGraph:
    if cfg.ontology_format == "rf2":
        return load_rf2(*cfg.ontology_paths)
    return load_simple(cfg.ontology_paths[0])


def compile_code_lists(
    graph: ConceptGraph, registry: CriteriaRegistry
) -> tuple[dict[str, CodeList], list[str]]:
    warnings = validate_seeds(registry, graph)
    lists = {}
    for crit in registry:
        seeds = [s for s in crit.seed_concepts if s in graph.concepts]
        if seeds:
            lists[crit.id] = build_code_list(graph, crit.id, seeds)
        else:
            lists[crit.id] = CodeList(crit.id, frozenset(), ())
    return lists, warnings


def build_ontology(cfg: RunConfig) -> tuple[dict[str, CodeList], list[str]]:
    write_snapshot(cfg)
    graph = load_graph(cfg)
    registry = load_registry(cfg.criteria_path)
    lists, warnings = compile_code_lists(graph, registry)
    out = cfg.run_path / "code_lists"
    out.mkdir(parents=True, exist_ok=True)
    for cid, cl in lists.items():
        (out / f"{cid}.json").write_text(cl.to_json(), encoding="utf-8")
    for w in warnings:
        logger.warning(w)
    return lists, warnings


def load_code_lists(cfg: RunConfig) -> dict[str, CodeList]:
    d = cfg.run_path / "code_lists"
    lists = {}
    for cid in CRITERION_IDS:
        p = d / f"{cid}.json"
        if p.is_file():
            lists[cid] = CodeList.from_json(p.read_text(encoding="utf-8"))
    return lists


def make_backend(cfg: RunConfig):
    if cfg.backend == "live":
        return HttpBackend(cfg.llm)
    if cfg.backend == "cache-only":
        return CacheOnlyBackend(cfg.llm.model_name)
    if cfg.mock_script:
        return MockBackend.from_file(cfg.mock_script)
    return MockBackend()


def prepare_jobs(cfg: RunConfig, records, registry, graph, code_lists) -> tuple[list[Job], str]:
    """Build the prompt text for every (patient, criterion) pair."""
    jobs: list[Job] = []
    dump: list[str] = []
    summaries_dir = cfg.run_path / "summaries"
    if cfg.scenario == "summarize":
        summaries_dir.mkdir(parents=True, exist_ok=True)
        indexes = {cid: term_index(graph, cl) for cid, cl in code_lists.items()}

    for rec in records:
        if cfg.scenario == "truncate-only":
            text = truncate(render(full_record(rec)), cfg.max_words)
            jobs.extend(Job(rec.patient_id, crit, text) for crit in registry)
            continue
        sentences = segment_record(rec)
        seen = set()
        for crit in registry:
            anns = annotate(sentences, indexes[crit.id])
            seen.update(anns)
            summary = extract(rec, anns, code_lists[crit.id], sentences)
            if cfg.hard_temporal_filter and crit.temporal_window_days:
                try:
                    now = corpus_mod.current_time(rec)
                except CorpusError as exc:
                    logger.warning("%s; temporal filter skipped", exc)
                else:
                    summary = temporal_filter(summary, now, crit.temporal_window_days)
            (summaries_dir / f"{rec.patient_id}__{crit.id}.json").write_text(
                summary.to_json(), encoding="utf-8"
            )
            jobs.append(Job(rec.patient_id, crit, truncate(render(summary), cfg.max_words)))
        ordered = sorted(seen, key=lambda a: (a.note_index, a.sentence_index, a.start, a.end, a.concept_id))
        dump.append(annotations_jsonl(rec.patient_id, ordered))
    return jobs, "".join(dump)


def predictions_csv(answers: list[AnswerRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["patient_id", "criterion", "label"])
    for a in answers:
        w.writerow([a.patient_id, a.criterion_id, a.label.value])
    return buf.getvalue()


def read_predictions(path) -> dict[str, dict[str, Label]]:
    path = Path(path)
    if not path.is_file():
        raise EvaluationError(f"missing predictions file: {path}")
    out: dict[str, dict[str, Label]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["patient_id", "criterion", "label"]:
            raise EvaluationError(f"{path}: unexpected header {reader.fieldnames}")
        for row in reader:
            try:
                out.setdefault(row["patient_id"], {})[row["criterion"]] = Label.parse(row["label"])
            except ValueError as exc:
                raise EvaluationError(f"{path}:{reader.line_num}: {exc}") from None
    return out


def run_classify(cfg: RunConfig, backend=None) -> list[AnswerRecord]:
    write_snapshot(cfg)
    registry = load_registry(cfg.criteria_path)
    records = corpus_mod.load_corpus(Path(cfg.data_dir) / cfg.split)
    graph = code_lists = None
    if cfg.scenario == "summarize":
        code_lists = load_code_lists(cfg)
        graph = load_graph(cfg)
        if set(code_lists) != set(CRITERION_IDS):
            logger.info("code lists missing from %s; building them", cfg.run_path)
            code_lists, _ = build_ontology(cfg)
    jobs, ann_dump = prepare_jobs(cfg, records, registry, graph, code_lists)
    if cfg.scenario == "summarize":
        (cfg.run_path / "annotations.jsonl").write_text(ann_dump, encoding="utf-8")

    backend = backend or make_backend(cfg)
    cache = ResponseCache(cfg.run_path / "llm_cache.jsonl")
    answers = decide_all(jobs, backend, cache, cfg.llm.request_concurrency_limit)

    (cfg.run_path / "answers.jsonl").write_text(
        "".join(json.dumps(a.to_dict(), ensure_ascii=False) + "\n" for a in answers), encoding="utf-8"
    )
    (cfg.run_path / "predictions.csv").write_text(predictions_csv(answers), encoding="utf-8")
    return answers


def run_evaluate(cfg: RunConfig) -> AggregateReport:
    records = corpus_mod.load_corpus(Path(cfg.data_dir) / cfg.split)
    gold = {}
    for r in records:
        if r.gold_labels is None:
            raise EvaluationError(f"{r.patient_id}: no gold labels to score against")
        gold[r.patient_id] = dict(r.gold_labels)
    pred = read_predictions(cfg.run_path / "predictions.csv")
    report = evaluate(gold, pred)
    (cfg.run_path / "report.txt").write_text(render_report(report), encoding="utf-8")
    (cfg.run_path / "report.tsv").write_text(render_tsv(report), encoding="utf-8")
    (cfg.run_path / "confusion.tsv").write_text(render_confusion(report), encoding="utf-8")
    return report


def compare_runs(run_a, run_b) -> str:
    reports = []
    for run in (run_a, run_b):
        p = Path(run) / "report.tsv"
        if not p.is_file():
            raise EvaluationError(f"{run} has not been evaluated (no report.tsv)")
        reports.append(read_tsv(p.read_text(encoding="utf-8")))
    return compare(*reports)
