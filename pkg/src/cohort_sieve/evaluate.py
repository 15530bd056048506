"""Challenge metric suite: per-class P/R/specificity/F, overall F, AUC, micro and macro.

Conventions follow the challenge scorer: Met is the positive class, any
0/0 ratio is 0, overall F is the mean of the two class F scores and AUC
for label-only predictions is balanced accuracy.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, fields
from decimal import ROUND_HALF_UP, Decimal
from statistics import fmean
from typing import Mapping

from .errors import EvaluationError
from .labels import CRITERION_IDS, Label

TSV_COLUMNS = (
    "criterion", "p_met", "r_met", "spec", "f_met",
    "p_notmet", "r_notmet", "f_notmet", "overall_f", "auc",
)


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __add__(self, other: ConfusionCounts) -> ConfusionCounts:
        return ConfusionCounts(
            self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn
        )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    specificity: float
    f1: float


@dataclass(frozen=True)
class CriterionReport:
    criterion_id: str
    met: ClassMetrics
    not_met: ClassMetrics
    overall_f: float
    auc: float

    def row(self) -> tuple[float, ...]:
        """Values in ``TSV_COLUMNS`` order (after the name)."""
        m, n = self.met, self.not_met
        return (m.precision, m.recall, m.specificity, m.f1,
                n.precision, n.recall, n.f1, self.overall_f, self.auc)


@dataclass(frozen=True)
class AggregateReport:
    per_criterion: Mapping[str, CriterionReport]
    micro: CriterionReport
    macro: CriterionReport
    counts: Mapping[str, ConfusionCounts]


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def f_score(precision: float, recall: float) -> float:
    return _ratio(2 * precision * recall, precision + recall)


def confusion(gold: Mapping[str, Label], pred: Mapping[str, Label], criterion: str) -> ConfusionCounts:
    """Count outcomes for one criterion; ``gold``/``pred`` map patient id -> label."""
    extra = sorted(set(pred) - set(gold))
    if extra:
        raise EvaluationError(f"{criterion}: predictions for patients without gold labels: {extra}")
    tp = fp = tn = fn = 0
    for pid in sorted(gold):
        if pid not in pred:
            raise EvaluationError(f"missing prediction for patient {pid}, criterion {criterion}")
        g, p = gold[pid], pred[pid]
        if p is Label.MET:
            tp, fp = (tp + 1, fp) if g is Label.MET else (tp, fp + 1)
        else:
            fn, tn = (fn + 1, tn) if g is Label.MET else (fn, tn + 1)
    return ConfusionCounts(tp, fp, tn, fn)


def class_metrics(counts: ConfusionCounts, positive: Label = Label.MET) -> ClassMetrics:
    c = counts
    if positive is Label.NOT_MET:
        c = ConfusionCounts(tp=c.tn, fp=c.fn, tn=c.tp, fn=c.fp)
    precision = _ratio(c.tp, c.tp + c.fp)
    recall = _ratio(c.tp, c.tp + c.fn)
    specificity = _ratio(c.tn, c.tn + c.fp)
    return ClassMetrics(precision, recall, specificity, f_score(precision, recall))


def report_from_classes(criterion_id: str, met: ClassMetrics, not_met: ClassMetrics) -> CriterionReport:
    return CriterionReport(
        criterion_id, met, not_met, (met.f1 + not_met.f1) / 2, (met.recall + met.specificity) / 2
    )


def criterion_report(counts: ConfusionCounts, criterion_id: str = "") -> CriterionReport:
    return report_from_classes(
        criterion_id, class_metrics(counts, Label.MET), class_metrics(counts, Label.NOT_MET)
    )


def macro_row(reports, name: str = "macro") -> CriterionReport:
    """Unweighted mean of every metric across criteria, zeros included."""
    reports = list(reports)
    if not reports:
        raise EvaluationError("macro average needs at least one criterion")

    def mean_class(attr: str) -> ClassMetrics:
        return ClassMetrics(*(
            fmean(getattr(getattr(r, attr), f.name) for r in reports) for f in fields(ClassMetrics)
        ))

    return CriterionReport(
        name,
        mean_class("met"),
        mean_class("not_met"),
        fmean(r.overall_f for r in reports),
        fmean(r.auc for r in reports),
    )


def aggregate(per_criterion: Mapping[str, ConfusionCounts]) -> AggregateReport:
    if not per_criterion:
        raise EvaluationError("nothing to aggregate: no criteria scored")
    order = [c for c in CRITERION_IDS if c in per_criterion] + sorted(
        c for c in per_criterion if c not in CRITERION_IDS
    )
    reports = {c: criterion_report(per_criterion[c], c) for c in order}
    pooled = ConfusionCounts()
    for c in order:
        pooled = pooled + per_criterion[c]
    return AggregateReport(
        reports,
        criterion_report(pooled, "micro"),
        macro_row(reports.values()),
        {c: per_criterion[c] for c in order},
    )


def evaluate(
    gold: Mapping[str, Mapping[str, Label]], pred: Mapping[str, Mapping[str, Label]]
) -> AggregateReport:
    """Score nested ``{patient: {criterion: label}}`` maps."""
    criteria = [c for c in CRITERION_IDS if any(c in g for g in gold.values())]
    counts = {}
    for c in criteria:
        g = {pid: labels[c] for pid, labels in gold.items() if c in labels}
        p = {pid: labels[c] for pid, labels in pred.items() if c in labels}
        counts[c] = confusion(g, p, c)
    return aggregate(counts)


def fmt4(value: float) -> str:
    """Four decimals, round half up on the shortest decimal repr."""
    return str(Decimal(repr(float(value))).quantize(Decimal("0.0001"), rounding=ROUND_HALF_UP))


def _rows(report: AggregateReport):
    for r in report.per_criterion.values():
        yield r.criterion_id, r
    yield "micro", report.micro
    yield "macro", report.macro


def render_report(report: AggregateReport) -> str:
    name_w = max(len("Overall (macro)"), *(len(c) for c in report.per_criterion))
    head1 = f"{'':<{name_w}}  {'Met':<31}  {'Not met':<23}  {'Overall':<15}"
    cols = ("Prec", "Rec", "Spec", "F(b=1)", "Prec", "Rec", "F(b=1)", "F(b=1)", "AUC")
    head2 = f"{'':<{name_w}}  " + "  ".join(f"{c:>6}" for c in cols)
    lines = [head1.rstrip(), head2]
    for name, r in _rows(report):
        label = {"micro": "Overall (micro)", "macro": "Overall (macro)"}.get(name, name)
        lines.append(f"{label:<{name_w}}  " + "  ".join(f"{fmt4(v):>6}" for v in r.row()))
    return "\n".join(lines) + "\n"


def render_tsv(report: AggregateReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter="\t", lineterminator="\n")
    w.writerow(TSV_COLUMNS)
    for name, r in _rows(report):
        w.writerow([name, *(fmt4(v) for v in r.row())])
    return buf.getvalue()


def render_confusion(report: AggregateReport) -> str:
    lines = ["criterion\ttp\tfp\ttn\tfn"]
    for c, k in report.counts.items():
        lines.append(f"{c}\t{k.tp}\t{k.fp}\t{k.tn}\t{k.fn}")
    return "\n".join(lines) + "\n"


def read_tsv(text: str) -> dict[str, dict[str, float]]:
    """Parse ``render_tsv`` output into ``{row name: {column: value}}``."""
    reader = csv.DictReader(io.StringIO(text), delimiter="\t")
    if tuple(reader.fieldnames or ()) != TSV_COLUMNS:
        raise EvaluationError(f"unexpected report columns: {reader.fieldnames}")
    return {row["criterion"]: {k: float(row[k]) for k in TSV_COLUMNS[1:]} for row in reader}


def compare(report_a: Mapping[str, Mapping[str, float]], report_b: Mapping[str, Mapping[str, float]]) -> str:
    """Per-row overall F delta (b minus a), sign-marked."""
    if set(report_a) != set(report_b):
        only_a = sorted(set(report_a) - set(report_b))
        only_b = sorted(set(report_b) - set(report_a))
        raise EvaluationError(f"criteria differ between runs: only in A {only_a}, only in B {only_b}")
    order = [c for c in CRITERION_IDS if c in report_a]
    order += sorted(c for c in report_a if c not in order and c not in ("micro", "macro"))
    order += [c for c in ("micro", "macro") if c in report_a]
    name_w = max(len(c) for c in order)
    lines = [f"{'criterion':<{name_w}}  {'A':>6}  {'B':>6}  {'delta':>7}"]
    for c in order:
        a, b = report_a[c]["overall_f"], report_b[c]["overall_f"]
        d = Decimal(fmt4(b)) - Decimal(fmt4(a))
        sign = "+" if d > 0 else ("-" if d < 0 else " ")
        lines.append(f"{c:<{name_w}}  {fmt4(a):>6}  {fmt4(b):>6}  {sign}{abs(d):.4f}")
    return "\n".join(lines) + "\n"
