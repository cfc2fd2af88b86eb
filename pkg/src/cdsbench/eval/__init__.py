"""Run and qrels I/O, exact and inferred metrics, significance testing and reports."""

from cdsbench.eval.metrics import (
    ALL_METRICS,
    DEFAULT_CONFIG,
    MetricConfig,
    evaluate_run,
    exact_metrics,
    exact_topic_metrics,
    inferred_metrics,
    inferred_topic_metrics,
    mean_metrics,
)
from cdsbench.eval.qrels import SampledQrels, Stratum, format_qrels, parse_qrels, read_qrels
from cdsbench.eval.report import ComparisonReport, ReportRow, compare_runs, delta_csv, per_query_delta
from cdsbench.eval.runs import RankedRun, format_run, parse_run, read_run, write_run
from cdsbench.eval.stats import TTestResult, paired_t_test

__all__ = [
    "ALL_METRICS",
    "DEFAULT_CONFIG",
    "ComparisonReport",
    "MetricConfig",
    "RankedRun",
    "ReportRow",
    "SampledQrels",
    "Stratum",
    "TTestResult",
    "compare_runs",
    "delta_csv",
    "evaluate_run",
    "exact_metrics",
    "exact_topic_metrics",
    "format_qrels",
    "format_run",
    "inferred_metrics",
    "inferred_topic_metrics",
    "mean_metrics",
    "paired_t_test",
    "parse_qrels",
    "parse_run",
    "per_query_delta",
    "read_qrels",
    "read_run",
    "write_run",
]
