"""Lipschitz smoothing of a function from a good subset to the whole space.

``extend`` computes the upper McShane extension
f_bar(x) = min over y in Y of ( f(y) + d_c(x, y) ),
the largest function that agrees with f on Y and has c-bounded differences
on the whole space (given that f has them on Y). ``lower_extend`` computes
the dual minimal extension, useful as an independent cross-check: every
c-Lipschitz extension of f lies pointwise between the two.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    BoundedDifferencesError,
    EmptySubsetError,
    ProductSpace,
    SubsetY,
    TabulatedFunction,
    WeightedMetric,
    _require_enumerable,
    check_bounded_differences,
    coords_matrix,
)


@dataclass(frozen=True, eq=False)
class ExtensionTable:
    """Dense table of a smoothed function in ascending rank order.

    ``y_min`` caches the minimum of f over Y; the upper extension never
    exceeds ``y_min + metric.c_bar``.
    """

    values: np.ndarray
    metric: WeightedMetric
    y_min: float

    def to_function(self) -> TabulatedFunction:
        return TabulatedFunction.from_table(np.asarray(self.values))


def _prepare(f, Y, metric, space, verify, cap, pair_cap):
    size = _require_enumerable(space, cap)
    if metric.n != space.n:
        raise ValueError(
            f"metric has {metric.n} weights, space has {space.n} coordinates"
        )
    if verify:
        witness = check_bounded_differences(
            f, Y, metric, space, cap=cap, pair_cap=pair_cap
        )
        if witness is not None:
            raise BoundedDifferencesError(witness)
    table = np.asarray(f.tabulate(space, cap), dtype=float)
    ranks = Y.ranks(space, cap)
    if ranks.size == 0:
        raise EmptySubsetError("Y is empty; extension undefined")
    coords = coords_matrix(space, cap)
    return size, table, coords, ranks


def extend(
    f: TabulatedFunction,
    Y: SubsetY,
    metric: WeightedMetric,
    space: ProductSpace,
    *,
    verify: bool = False,
    cap: Optional[int] = None,
    pair_cap: Optional[int] = None,
) -> ExtensionTable:
    """Upper extension min_{y in Y} ( f(y) + d_c(x, y) ), exact over finite Y.

    The bounded-differences precondition on (f, Y, c) is the caller's
    contract and is not re-verified unless ``verify`` is set (the formula is
    total either way, but agreement with f on Y can fail without it). The
    table is a direct scan over Y per point; each entry is independent, so
    the computation parallelizes without changing results.
    """
    size, table, coords, ranks = _prepare(f, Y, metric, space, verify, cap, pair_cap)
    fy = table[ranks]
    yc = coords[ranks]
    carr = np.asarray(metric.c, dtype=float)
    out = np.full(size, np.inf)
    for j in range(ranks.size):
        dist = (coords != yc[j]) @ carr
        np.minimum(out, fy[j] + dist, out=out)
    out.setflags(write=False)
    return ExtensionTable(values=out, metric=metric, y_min=float(fy.min()))


def lower_extend(
    f: TabulatedFunction,
    Y: SubsetY,
    metric: WeightedMetric,
    space: ProductSpace,
    *,
    verify: bool = False,
    cap: Optional[int] = None,
    pair_cap: Optional[int] = None,
) -> ExtensionTable:
    """Lower extension max_{y in Y} ( f(y) - d_c(x, y) ); dual of extend."""
    size, table, coords, ranks = _prepare(f, Y, metric, space, verify, cap, pair_cap)
    fy = table[ranks]
    yc = coords[ranks]
    carr = np.asarray(metric.c, dtype=float)
    out = np.full(size, -np.inf)
    for j in range(ranks.size):
        dist = (coords != yc[j]) @ carr
        np.maximum(out, fy[j] - dist, out=out)
    out.setflags(write=False)
    return ExtensionTable(values=out, metric=metric, y_min=float(fy.min()))
