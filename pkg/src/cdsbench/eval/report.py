"""Comparison reports with significance marks and per-query metric deltas."""

import csv
import io
from dataclasses import dataclass, field

from cdsbench.errors import EvaluationError
from cdsbench.eval.metrics import ALL_METRICS, DEFAULT_CONFIG, REPORT_METRICS, evaluate_run
from cdsbench.eval.stats import paired_t_test

DAGGER = "†"
DOUBLE_DAGGER = "‡"


@dataclass(frozen=True)
class ReportRow:
    method: str
    field: str
    metric: str
    mean: float
    mark: str = ""
    p_value: float = float("nan")


@dataclass
class ComparisonReport:
    baseline: str
    rows: list = field(default_factory=list)
    n_topics: int = 0

    def methods(self):
        out = []
        for r in self.rows:
            if (r.method, r.field) not in out:
                out.append((r.method, r.field))
        return out

    def lookup(self, method, metric):
        for r in self.rows:
            if r.method == method and r.metric == metric:
                return r
        raise KeyError((method, metric))

    def to_text(self):
        metrics = []
        for r in self.rows:
            if r.metric not in metrics:
                metrics.append(r.metric)
        cells = {(r.method, r.field, r.metric): f"{r.mean:.4f}{r.mark}" for r in self.rows}
        header = ["Method", "Query"] + metrics
        body = [[m, f] + [cells.get((m, f, x), "") for x in metrics] for m, f in self.methods()]
        widths = [max(len(row[i]) for row in [header] + body) for i in range(len(header))]
        lines = [
            "  ".join(c.ljust(w) if i < 2 else c.rjust(w) for i, (c, w) in enumerate(zip(row, widths))).rstrip()
            for row in [header] + body
        ]
        lines.insert(1, "  ".join("-" * w for w in widths))
        lines.append("")
        lines.append(
            f"{DAGGER} p < 0.05, {DOUBLE_DAGGER} p < 0.02 (paired two-tailed t-test vs {self.baseline}, "
            f"{self.n_topics} topics; topics without judged-relevant documents excluded)"
        )
        return "\n".join(lines) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["method", "field", "metric", "mean", "mark", "p_value"])
        for r in self.rows:
            writer.writerow([r.method, r.field, r.metric, f"{r.mean:.6f}", r.mark, f"{r.p_value:.6g}"])
        return buf.getvalue()


def _mark(result):
    if result.sig98:
        return DOUBLE_DAGGER
    if result.sig95:
        return DAGGER
    return ""


def _evaluated_topic_set(run, topics):
    return {t for t in run.topics if t in topics}


def compare_runs(runs, baseline, qrels, config=DEFAULT_CONFIG, metrics=REPORT_METRICS, fields=None,
                 include_baseline=True):
    """Mean of each metric per run, marked where the paired t-test vs ``baseline`` rejects.

    ``fields`` optionally maps run tags to the topic field they were run on.
    """
    fields = fields or {}
    topics = qrels.evaluated_topics()
    if len(topics) < 2:
        raise EvaluationError("comparison needs at least 2 evaluated topics")
    topic_set = set(topics)
    base_topics = _evaluated_topic_set(baseline, topic_set)
    for run in runs:
        if _evaluated_topic_set(run, topic_set) != base_topics:
            raise EvaluationError(f"run {run.run_tag!r} covers a different topic set than {baseline.run_tag!r}")

    base_scores = evaluate_run(baseline, qrels, config)
    report = ComparisonReport(baseline.run_tag, n_topics=len(topics))
    if include_baseline:
        for m in metrics:
            mean = sum(base_scores[t][m] for t in topics) / len(topics)
            report.rows.append(ReportRow(baseline.run_tag, fields.get(baseline.run_tag, "-"), m, mean))
    for run in runs:
        scores = evaluate_run(run, qrels, config)
        for m in metrics:
            a = [scores[t][m] for t in topics]
            b = [base_scores[t][m] for t in topics]
            result = paired_t_test(a, b, config.alphas)
            report.rows.append(
                ReportRow(run.run_tag, fields.get(run.run_tag, "-"), m, sum(a) / len(a), _mark(result),
                          result.p_two_tailed)
            )
    return report


def per_query_delta(run_a, run_b, qrels, metric, config=DEFAULT_CONFIG):
    """``[(topic_id, metric(a) - metric(b)), ...]`` by ascending topic id."""
    if metric not in ALL_METRICS:
        raise EvaluationError(f"unknown metric {metric!r}; expected one of {', '.join(ALL_METRICS)}")
    a = evaluate_run(run_a, qrels, config)
    b = evaluate_run(run_b, qrels, config)
    return [(t, a[t][metric] - b[t][metric]) for t in sorted(a)]


def delta_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["topic_id", "delta"])
    for topic, delta in rows:
        writer.writerow([topic, f"{delta:.6f}"])
    return buf.getvalue()
