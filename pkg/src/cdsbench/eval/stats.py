"""Paired two-sample t-test."""

import math
from dataclasses import dataclass

from scipy.special import betainc

from cdsbench.errors import EvaluationError


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: int
    p_two_tailed: float
    sig95: bool
    sig98: bool


def paired_t_test(scores_a, scores_b, alphas=(0.05, 0.02)):
    """Two-tailed paired t-test of ``a - b``; p from the regularized incomplete beta."""
    a = [float(x) for x in scores_a]
    b = [float(x) for x in scores_b]
    if len(a) != len(b):
        raise EvaluationError(f"score lists differ in length ({len(a)} vs {len(b)})")
    n = len(a)
    if n < 2:
        raise EvaluationError("paired t-test needs at least 2 pairs")
    diffs = [x - y for x, y in zip(a, b)]
    mean = math.fsum(diffs) / n
    var = math.fsum((d - mean) ** 2 for d in diffs) / (n - 1)
    df = n - 1
    alpha95, alpha98 = alphas
    if var == 0.0:
        if mean == 0.0:
            return TTestResult(0.0, df, 1.0, False, False)
        return TTestResult(math.copysign(math.inf, mean), df, 0.0, True, True)
    t = mean / math.sqrt(var / n)
    p = float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return TTestResult(t, df, p, p < alpha95, p < alpha98)
