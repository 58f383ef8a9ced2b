"""Closed-form tail bound calculators.

Three bound formulas share one report shape:

- ``mcdiarmid``:      exp( -2 eps^2 / sum c_i^2 )
- ``hp_one_sided``:   p + exp( -2 ((eps - p*c_bar)^+)^2 / sum c_i^2 )
- ``hp_two_sided``:   2 * (the one-sided right-hand side)

where a^+ = max(a, 0). The high-probability forms depend on the instance
only through (eps, p, c): the behaviour of f off the good subset never
enters, however wild. All totals are clamped to [0, 1]; the pre-clamp value
is kept in ``raw`` (the two-sided total is min(1, 2 * one-sided raw)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import WeightedMetric

FORMULA_MCDIARMID = "mcdiarmid"
FORMULA_HP_ONE_SIDED = "hp_one_sided"
FORMULA_HP_TWO_SIDED = "hp_two_sided"


@dataclass(frozen=True)
class BoundReport:
    epsilon: float
    p: float
    c_bar: float
    sum_c_sq: float
    exp_term: float
    raw: float
    total: float
    formula: str


def _exp_term(eps_plus: float, sum_c_sq: float) -> float:
    # Degenerate sum c_i^2 = 0: pointwise limit of the formula, so the
    # all-zero-weights case stays well defined (1 at eps_plus = 0, else 0).
    if sum_c_sq == 0.0:
        return 1.0 if eps_plus == 0.0 else 0.0
    return math.exp(-2.0 * eps_plus * eps_plus / sum_c_sq)


def _assemble(epsilon: float, p: float, metric: WeightedMetric,
              formula: str, multiplier: float) -> BoundReport:
    epsilon = float(epsilon)
    p = float(p)
    if not math.isfinite(epsilon) or epsilon < 0.0:
        raise ValueError(f"epsilon must be finite and >= 0, got {epsilon!r}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    shifted = epsilon - p * metric.c_bar
    eps_plus = shifted if shifted > 0.0 else 0.0
    e = _exp_term(eps_plus, metric.sum_sq)
    raw = multiplier * p + multiplier * e
    total = min(1.0, raw)
    return BoundReport(
        epsilon=epsilon,
        p=p,
        c_bar=metric.c_bar,
        sum_c_sq=metric.sum_sq,
        exp_term=e,
        raw=raw,
        total=total,
        formula=formula,
    )


def mcdiarmid_bound(epsilon: float, metric: WeightedMetric) -> BoundReport:
    """Upper-tail bound for a function with c-bounded differences everywhere.

    Shares the arithmetic of hp_bound at p = 0, so the two agree bitwise.
    """
    return _assemble(epsilon, 0.0, metric, FORMULA_MCDIARMID, 1.0)


def hp_bound(epsilon: float, p: float, metric: WeightedMetric) -> BoundReport:
    """Upper-tail bound around the conditional mean when the bounded
    differences hold only on a subset missed with probability p."""
    return _assemble(epsilon, p, metric, FORMULA_HP_ONE_SIDED, 1.0)


def hp_bound_two_sided(epsilon: float, p: float, metric: WeightedMetric) -> BoundReport:
    """Two-sided variant: doubles the one-sided right-hand side."""
    return _assemble(epsilon, p, metric, FORMULA_HP_TWO_SIDED, 2.0)


def mean_gap_bound(p: float, F: float) -> float:
    """Bound 2*p*F on |mu - m| for |f| <= F everywhere."""
    p = float(p)
    F = float(F)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    if not math.isfinite(F) or F < 0.0:
        raise ValueError(f"F must be finite and >= 0, got {F!r}")
    return 2.0 * p * F


def reference_toy_bound(n: int, epsilon: float) -> float:
    """Alternative closed form 2^-n + exp(-2 n ((eps - 2^(1-n))^+)^2 ) quoted
    for the two-corner toy instance.

    Shown side by side with the computed bound for comparison; it does not
    match a direct instantiation of hp_bound on that instance (different p
    and exponent normalization), so it is never used as a bound here.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    epsilon = float(epsilon)
    shifted = max(epsilon - 2.0 ** (1 - n), 0.0)
    return 2.0 ** (-n) + math.exp(-2.0 * n * shifted * shifted)
