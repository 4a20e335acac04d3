"""Statistical tests behind change flagging and the similarity analysis.

Provides the unequal-variance (Welch) two-sample t-test, a chi-squared test
of independence over 2 x V count tables with low-mass column collapsing, and
the population mean/std used by the relationship-inference rule.  All tests
are two-sided; reports emitted by the pipeline record that choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .special import regularized_gamma_q, regularized_incomplete_beta


class StatError(ValueError):
    pass


class DegenerateTableError(StatError):
    """Table cannot support a chi-squared test (all-zero, or fewer than two
    effective columns after low-mass collapsing)."""


@dataclass(frozen=True)
class TestResult:
    statistic: float
    df: float
    p_value: float
    degenerate: bool = False


@dataclass(frozen=True)
class StatConfig:
    """alpha is the significance level; min_expected the smallest column mass
    a chi-squared column may carry without being folded into the residual."""

    alpha: float = 0.05
    min_expected: float = 5.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise StatError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.min_expected <= 0:
            raise StatError(f"min_expected must be positive, got {self.min_expected}")


def student_t_sf(t: float, df: float) -> float:
    """Upper-tail P(T > t) of Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise StatError(f"df must be positive, got {df}")
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    x = df / (df + t * t)
    p = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, x)
    if t < 0:
        p = 1.0 - p
    return min(max(p, 0.0), 1.0)


def chi2_sf(x: float, df: float) -> float:
    """Upper-tail P(X > x) of the chi-squared distribution."""
    if df <= 0:
        raise StatError(f"df must be positive, got {df}")
    if x <= 0:
        return 1.0
    return min(max(regularized_gamma_q(df / 2.0, x / 2.0), 0.0), 1.0)


def welch_t_test(sample_a: Sequence[float], sample_b: Sequence[float]) -> TestResult:
    """Two-sided Welch t-test.

    Degenerate cases (both sample variances zero) return p=1 for equal means
    and p=0 for unequal means, with ``degenerate`` set and df reported as 0.
    """
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise StatError("each sample needs at least 2 elements")
    ma, mb = float(a.mean()), float(b.mean())
    va, vb = float(a.var(ddof=1)), float(b.var(ddof=1))
    na, nb = a.size, b.size
    if va == 0.0 and vb == 0.0:
        if ma == mb:
            return TestResult(0.0, 0.0, 1.0, degenerate=True)
        return TestResult(math.copysign(math.inf, ma - mb), 0.0, 0.0, degenerate=True)
    qa, qb = va / na, vb / nb
    t = (ma - mb) / math.sqrt(qa + qb)
    df = (qa + qb) ** 2 / (qa * qa / (na - 1) + qb * qb / (nb - 1))
    p = min(1.0, 2.0 * student_t_sf(abs(t), df))
    return TestResult(t, df, p)


def collapse_low_mass_columns(table: np.ndarray, min_expected: float) -> np.ndarray:
    """Fold every column whose total count falls below ``min_expected`` into a
    single trailing residual column (dropped again if it carries no mass).

    A column's total observed count equals its total expected count under
    independence, so this is the classic validity repair that preserves the
    table's total mass.
    """
    col_totals = table.sum(axis=0)
    keep = col_totals >= min_expected
    kept = table[:, keep]
    residual = table[:, ~keep].sum(axis=1)
    if residual.sum() > 0:
        kept = np.column_stack([kept, residual])
    return kept


def chi_square_independence(table, config: StatConfig = StatConfig()) -> TestResult:
    """Chi-squared test of independence on a 2 x V table of counts.

    Columns below ``config.min_expected`` total mass are collapsed into one
    residual column first; df = V' - 1 over the V' surviving columns.
    Raises ``DegenerateTableError`` when no valid test exists.
    """
    obs = np.asarray(table, dtype=float)
    if obs.ndim != 2 or obs.shape[0] != 2:
        raise StatError(f"expected a 2 x V table, got shape {obs.shape}")
    if (obs < 0).any():
        raise StatError("counts must be non-negative")
    total = obs.sum()
    if total == 0:
        raise DegenerateTableError("all-zero table")
    obs = collapse_low_mass_columns(obs, config.min_expected)
    n_cols = obs.shape[1]
    if n_cols < 2:
        raise DegenerateTableError(
            f"fewer than 2 effective columns after collapsing (got {n_cols})"
        )
    row_totals = obs.sum(axis=1)
    col_totals = obs.sum(axis=0)
    expected = np.outer(row_totals, col_totals) / obs.sum()
    with np.errstate(divide="ignore", invalid="ignore"):
        contrib = (obs - expected) ** 2 / expected
    contrib[expected == 0.0] = 0.0  # zero row: O == E == 0
    statistic = float(contrib.sum())
    df = float(n_cols - 1)
    return TestResult(statistic, df, chi2_sf(statistic, df))


def mean_std(values: Sequence[float]) -> tuple[float, float]:
    """Mean and population (ddof=0) standard deviation."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise StatError("empty input")
    return float(v.mean()), float(v.std(ddof=0))
