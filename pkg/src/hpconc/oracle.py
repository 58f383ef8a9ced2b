"""Ground truth by exhaustive enumeration, plus seeded Monte Carlo.

Exact quantities are sums over the whole space weighted by the product law:
p (mass off the good subset), mu = E[f], m = E[f | in subset], M = E of the
smoothed extension, and tail masses P[f - center >= eps]. Sums run in
ascending rank order with numpy's pairwise summation, so results are
deterministic and rounding stays bounded.

``dominance_check`` is the verification workhorse: at each epsilon it pits
the exact tail around m against the closed-form bound; the bound must
dominate on every certified instance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .bounds import hp_bound
from .core import (
    EmptySubsetError,
    ProductSpace,
    SubsetY,
    TabulatedFunction,
    WeightedMetric,
    probability_table,
)
from .extension import extend

#: Slack used when comparing exact tails against bound totals.
DOMINANCE_TOL = 1e-12

#: Fixed Monte Carlo chunk length. Chunk j draws from the substream keyed by
#: (seed, j), and chunks reduce in index order, so reports depend only on
#: (seed, samples, instance) no matter how chunks are scheduled.
MC_CHUNK = 1 << 16


@dataclass(frozen=True)
class ExactReport:
    """Exact instance statistics; M is present only when requested."""

    p: float
    mu: float
    m: float
    M: Optional[float]
    c_bar: float
    y_count: int


@dataclass(frozen=True)
class TailPoint:
    """One epsilon of a dominance comparison."""

    epsilon: float
    exact_tail: float
    p: float
    exp_term: float
    bound_total: float
    dominated: bool


@dataclass(frozen=True)
class TailEstimate:
    epsilon: float
    tail_hat: float
    tail_se: float


@dataclass(frozen=True)
class MCReport:
    """Monte Carlo estimates; identical (seed, samples, instance) inputs
    reproduce this report bitwise. m_hat is absent when no sample landed in
    the subset, its standard error when fewer than two did."""

    seed: int
    samples: int
    center: float
    p_hat: float
    p_se: float
    m_hat: Optional[float]
    m_se: Optional[float]
    in_y_count: int
    tails: tuple[TailEstimate, ...]


def _value_tables(space, f, cap):
    prob = probability_table(space, cap)
    table = np.asarray(f.tabulate(space, cap), dtype=float)
    if f.sup_bound is not None and table.size:
        worst = float(np.abs(table).max())
        if worst > f.sup_bound:
            raise ValueError(
                f"declared sup_bound {f.sup_bound!r} violated: |f| reaches {worst!r}"
            )
    return prob, table


def _membership(space, Y, cap):
    mask = Y.mask(space, cap)
    if not mask.any():
        raise EmptySubsetError("Y is empty; conditional statistics undefined")
    return mask


def _conditional_mean(prob, table, mask):
    p = min(1.0, float(prob[~mask].sum()))
    denom = 1.0 - p
    if denom <= 0.0:
        raise EmptySubsetError("Y has probability 0; conditional mean undefined")
    m = float((prob[mask] * table[mask]).sum() / denom)
    return p, m


def exact_stats(
    space: ProductSpace,
    f: TabulatedFunction,
    Y: SubsetY,
    metric: WeightedMetric,
    *,
    with_extension: bool = False,
    cap: Optional[int] = None,
) -> ExactReport:
    """Exact p, mu, m (and M = E of the extension when requested)."""
    prob, table = _value_tables(space, f, cap)
    mask = _membership(space, Y, cap)
    p, m = _conditional_mean(prob, table, mask)
    mu = float((prob * table).sum())
    M = None
    if with_extension:
        ext = extend(f, Y, metric, space, cap=cap)
        M = float((prob * ext.values).sum())
    return ExactReport(p=p, mu=mu, m=m, M=M, c_bar=metric.c_bar,
                       y_count=int(mask.sum()))


def exact_tail(
    space: ProductSpace,
    f: TabulatedFunction,
    Y: Optional[SubsetY] = None,
    center: Optional[float] = None,
    *,
    epsilon: float,
    side: str = "upper",
    cap: Optional[int] = None,
) -> float:
    """Exact mass of { f(x) - center >= epsilon } (or |f - center| >= epsilon).

    With center omitted, the conditional mean over Y is used (Y required).
    Comparisons are plain >= on doubles.
    """
    if side not in ("upper", "two_sided"):
        raise ValueError(f"side must be 'upper' or 'two_sided', got {side!r}")
    prob, table = _value_tables(space, f, cap)
    if center is None:
        if Y is None:
            raise ValueError("center omitted: Y is required to center at its mean")
        mask = _membership(space, Y, cap)
        _, center = _conditional_mean(prob, table, mask)
    diffs = table - float(center)
    if side == "upper":
        sel = diffs >= epsilon
    else:
        sel = np.abs(diffs) >= epsilon
    return float(prob[sel].sum())


def dominance_check(
    space: ProductSpace,
    f: TabulatedFunction,
    Y: SubsetY,
    metric: WeightedMetric,
    eps_grid: Sequence[float],
    *,
    tol: float = DOMINANCE_TOL,
    cap: Optional[int] = None,
) -> list[TailPoint]:
    """Exact tail around m vs the closed-form bound at each epsilon.

    Precondition: the instance is certified (bounded differences hold on
    Y); under it every point must come back dominated, so a False value
    flags a defect in either the bound or the oracle.
    """
    prob, table = _value_tables(space, f, cap)
    mask = _membership(space, Y, cap)
    p, m = _conditional_mean(prob, table, mask)
    diffs = table - m
    points = []
    for eps in eps_grid:
        eps = float(eps)
        tail = float(prob[diffs >= eps].sum())
        rep = hp_bound(eps, p, metric)
        points.append(
            TailPoint(
                epsilon=eps,
                exact_tail=tail,
                p=p,
                exp_term=rep.exp_term,
                bound_total=rep.total,
                dominated=bool(tail <= rep.total + tol),
            )
        )
    return points


def _sample_coords(space, rng, count):
    coords = np.empty((count, space.n), dtype=np.int64)
    u = rng.random((count, space.n))
    for i, pv in enumerate(space.probs):
        cums = np.cumsum(np.asarray(pv, dtype=float))
        idx = np.searchsorted(cums, u[:, i], side="right")
        coords[:, i] = np.minimum(idx, len(pv) - 1)
    return coords


def mc_estimate(
    space: ProductSpace,
    f: TabulatedFunction,
    Y: SubsetY,
    center: float = 0.0,
    eps_grid: Sequence[float] = (),
    *,
    seed: int,
    samples: int,
) -> MCReport:
    """Seeded i.i.d. estimates of p, the conditional mean, and tail masses.

    Sampling is inverse-CDF per coordinate on uniforms from PCG64; chunk j
    uses the SeedSequence (seed, spawn_key=(j,)) substream, and chunk
    results reduce in index order. Standard errors are binomial for the
    proportions and the in-subset sample deviation over sqrt(count) for the
    ratio estimator m_hat.
    """
    samples = int(samples)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    center = float(center)
    grid = [float(e) for e in eps_grid]

    n_out = 0
    n_in = 0
    sum_y = 0.0
    sum_y_sq = 0.0
    tail_hits = [0] * len(grid)

    done = 0
    chunk_index = 0
    while done < samples:
        count = min(MC_CHUNK, samples - done)
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(chunk_index,)))
        )
        coords = _sample_coords(space, rng, count)
        vals = np.asarray(f.evaluate(space, coords), dtype=float)
        member = Y.batch_contains(space, coords)
        n_in += int(member.sum())
        n_out += int(count - member.sum())
        in_vals = vals[member]
        sum_y += float(in_vals.sum())
        sum_y_sq += float((in_vals * in_vals).sum())
        if grid:
            diffs = vals - center
            for gi, eps in enumerate(grid):
                tail_hits[gi] += int((diffs >= eps).sum())
        done += count
        chunk_index += 1

    total = float(samples)
    p_hat = n_out / total
    p_se = math.sqrt(p_hat * (1.0 - p_hat) / total)
    if n_in > 0:
        m_hat = sum_y / n_in
    else:
        m_hat = None
    if n_in > 1:
        var = max(0.0, (sum_y_sq - sum_y * sum_y / n_in) / (n_in - 1))
        m_se = math.sqrt(var / n_in)
    else:
        m_se = None
    tails = tuple(
        TailEstimate(
            epsilon=eps,
            tail_hat=hits / total,
            tail_se=math.sqrt((hits / total) * (1.0 - hits / total) / total),
        )
        for eps, hits in zip(grid, tail_hits)
    )
    return MCReport(
        seed=seed,
        samples=samples,
        center=center,
        p_hat=p_hat,
        p_se=p_se,
        m_hat=m_hat,
        m_se=m_se,
        in_y_count=n_in,
        tails=tails,
    )
