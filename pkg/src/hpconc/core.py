"""Finite product probability spaces, weighted Hamming metrics, tabulated
functions, good-subset membership, and bounded-differences certification.

Points are plain tuples of symbol indices. Every point of a space has a
mixed-radix rank (first coordinate most significant); dense tables are laid
out in ascending rank order throughout the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

Point = tuple[int, ...]

#: Enumeration refuses spaces with more points than this unless overridden.
DEFAULT_ENUMERATION_CAP = 1 << 26
#: Pairwise scans refuse subsets with more than this many ordered pairs.
DEFAULT_PAIR_CAP = 1 << 28

#: Tolerance on probability-vector normalization.
PROB_TOL = 1e-12
#: Tolerance on bounded-differences inequality checks.
CHECK_TOL = 1e-9

BUILTIN_FUNCTIONS = ("constant", "coordinate_mean")
BUILTIN_PREDICATES = ("full", "coordinate_sum_at_least")


class ToolkitError(Exception):
    """Base class for errors raised by this package."""


class EnumerationCapError(ToolkitError):
    """A space has more points than the enumeration cap allows."""

    def __init__(self, size: int, cap: int):
        super().__init__(
            f"space has {size} points, exceeding the enumeration cap {cap}"
        )
        self.size = size
        self.cap = cap


class PairScanCapError(ToolkitError):
    """A pairwise scan would visit more pairs than the pair cap allows."""

    def __init__(self, n_pairs: int, cap: int):
        super().__init__(f"pairwise scan needs {n_pairs} pairs, cap is {cap}")
        self.n_pairs = n_pairs
        self.cap = cap


class EmptySubsetError(ToolkitError):
    """Y contains no points but the operation conditions on membership."""


class InstanceFormatError(ToolkitError):
    """Malformed instance document; the message names the offending field."""


class BoundedDifferencesError(ToolkitError):
    """Raised when a requested certification fails; carries the witness."""

    def __init__(self, witness: "ViolationWitness"):
        super().__init__(
            f"bounded differences violated: |f(x)-f(y)| = {witness.delta_f!r} "
            f"> d_c(x,y) = {witness.distance!r} for x={witness.x}, y={witness.y}"
        )
        self.witness = witness


@dataclass(frozen=True)
class ProductSpace:
    """Product of finite alphabets with independent per-coordinate laws.

    ``alphabet_sizes[i]`` is the number of symbols of coordinate i and
    ``probs[i]`` its probability vector. A zero-coordinate space is legal
    and has a single point (the empty tuple) of probability 1.
    """

    alphabet_sizes: tuple[int, ...]
    probs: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        sizes = tuple(int(k) for k in self.alphabet_sizes)
        probs = tuple(tuple(float(q) for q in pv) for pv in self.probs)
        object.__setattr__(self, "alphabet_sizes", sizes)
        object.__setattr__(self, "probs", probs)
        if len(probs) != len(sizes):
            raise ValueError("alphabet_sizes and probs must have equal length")
        for i, (k, pv) in enumerate(zip(sizes, probs)):
            if k < 1:
                raise ValueError(f"alphabet size of coordinate {i} must be >= 1")
            if len(pv) != k:
                raise ValueError(
                    f"probability vector of coordinate {i} has length "
                    f"{len(pv)}, expected {k}"
                )
            if any(q < 0.0 for q in pv):
                raise ValueError(f"negative probability at coordinate {i}")
            total = math.fsum(pv)
            if abs(total - 1.0) > PROB_TOL:
                raise ValueError(
                    f"probabilities of coordinate {i} sum to {total!r}, not 1"
                )

    @property
    def n(self) -> int:
        return len(self.alphabet_sizes)

    @property
    def size(self) -> int:
        return math.prod(self.alphabet_sizes)

    @classmethod
    def uniform(cls, alphabet_sizes: Sequence[int]) -> "ProductSpace":
        sizes = tuple(int(k) for k in alphabet_sizes)
        return cls(sizes, tuple(tuple(1.0 / k for _ in range(k)) for k in sizes))


def _require_enumerable(space: ProductSpace, cap: Optional[int]) -> int:
    cap = DEFAULT_ENUMERATION_CAP if cap is None else int(cap)
    if space.size > cap:
        raise EnumerationCapError(space.size, cap)
    return space.size


def _validate_point(space: ProductSpace, x: Sequence[int]) -> None:
    if len(x) != space.n:
        raise ValueError(f"point has {len(x)} coordinates, space has {space.n}")
    for i, (xi, k) in enumerate(zip(x, space.alphabet_sizes)):
        if not 0 <= int(xi) < k:
            raise ValueError(f"coordinate {i} is {xi}, valid range is [0, {k})")


def point_rank(space: ProductSpace, x: Sequence[int]) -> int:
    """Mixed-radix rank of x (first coordinate most significant)."""
    _validate_point(space, x)
    r = 0
    for xi, k in zip(x, space.alphabet_sizes):
        r = r * k + int(xi)
    return r


def point_unrank(space: ProductSpace, rank: int) -> Point:
    """Inverse of point_rank."""
    rank = int(rank)
    if not 0 <= rank < space.size:
        raise ValueError(f"rank {rank} out of range [0, {space.size})")
    coords = [0] * space.n
    for i in reversed(range(space.n)):
        k = space.alphabet_sizes[i]
        coords[i] = rank % k
        rank //= k
    return tuple(coords)


def enumerate_points(space: ProductSpace, cap: Optional[int] = None) -> Iterator[Point]:
    """Yield all points of the space in ascending rank order."""
    _require_enumerable(space, cap)
    n = space.n
    coords = [0] * n
    while True:
        yield tuple(coords)
        i = n - 1
        while i >= 0 and coords[i] == space.alphabet_sizes[i] - 1:
            coords[i] = 0
            i -= 1
        if i < 0:
            return
        coords[i] += 1


def _coord_dtype(space: ProductSpace):
    kmax = max(space.alphabet_sizes, default=1)
    if kmax <= 127:
        return np.int8
    if kmax <= 32767:
        return np.int16
    return np.int64


def coords_matrix(space: ProductSpace, cap: Optional[int] = None) -> np.ndarray:
    """Dense (size, n) matrix of symbol indices in ascending rank order."""
    size = _require_enumerable(space, cap)
    if space.n == 0:
        return np.zeros((size, 0), dtype=np.int8)
    idx = np.unravel_index(np.arange(size), space.alphabet_sizes)
    return np.stack(idx, axis=1).astype(_coord_dtype(space), copy=False)


def _rank_weights(space: ProductSpace) -> np.ndarray:
    w = np.ones(space.n, dtype=np.int64)
    for i in reversed(range(space.n - 1)):
        w[i] = w[i + 1] * space.alphabet_sizes[i + 1]
    return w


def point_probability(space: ProductSpace, x: Sequence[int]) -> float:
    """Product-law probability of a single point."""
    _validate_point(space, x)
    return math.prod(space.probs[i][int(xi)] for i, xi in enumerate(x))


def probability_table(space: ProductSpace, cap: Optional[int] = None) -> np.ndarray:
    """Dense probability table over the space in ascending rank order."""
    _require_enumerable(space, cap)
    table = np.ones(1)
    for pv in space.probs:
        table = np.multiply.outer(table, np.asarray(pv, dtype=float))
    return table.reshape(-1)


@dataclass(frozen=True)
class WeightedMetric:
    """Non-negative weights c defining d_c(x, y) = sum of c_i where x_i != y_i."""

    c: tuple[float, ...]
    c_bar: float = field(init=False)

    def __post_init__(self):
        c = tuple(float(v) for v in self.c)
        for i, v in enumerate(c):
            if not math.isfinite(v) or v < 0.0:
                raise ValueError(f"weight {i} is {v!r}, must be finite and >= 0")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "c_bar", math.fsum(c))

    @property
    def n(self) -> int:
        return len(self.c)

    @property
    def sum_sq(self) -> float:
        return math.fsum(v * v for v in self.c)


def weighted_hamming(metric: WeightedMetric, x: Sequence[int], y: Sequence[int]) -> float:
    """d_c(x, y); always in [0, c_bar]."""
    if len(x) != metric.n or len(y) != metric.n:
        raise ValueError(
            f"arity mismatch: |x|={len(x)}, |y|={len(y)}, metric has {metric.n} weights"
        )
    return math.fsum(ci for ci, xi, yi in zip(metric.c, x, y) if xi != yi)


@dataclass(frozen=True, eq=False)
class TabulatedFunction:
    """Real function on a product space.

    The source is either a dense value table in ascending rank order or a
    named builtin rule with parameters. Builtins:

    - ``constant``: params ``{"value": v}``
    - ``coordinate_mean``: params ``{"scale": a, "offset": b}``, the value
      ``a * mean(symbol indices) + b`` (0-coordinate spaces use mean 0)

    Either builtin accepts an optional ``"overrides"`` param,
    ``{"points": [[...], ...], "values": [...]}``, replacing the rule value
    at the listed points. ``sup_bound`` declares |f| <= sup_bound everywhere;
    it is verified lazily by the enumeration oracle.
    """

    values: Optional[np.ndarray] = None
    builtin: Optional[str] = None
    params: Optional[dict] = None
    sup_bound: Optional[float] = None

    def __post_init__(self):
        if (self.values is None) == (self.builtin is None):
            raise ValueError("exactly one of values / builtin must be given")
        if self.values is not None:
            arr = np.array(self.values, dtype=float)
            if arr.ndim != 1:
                raise ValueError("value table must be one-dimensional")
            arr.setflags(write=False)
            object.__setattr__(self, "values", arr)
        else:
            if self.builtin not in BUILTIN_FUNCTIONS:
                raise ValueError(f"unknown builtin function {self.builtin!r}")
            object.__setattr__(self, "params", dict(self.params or {}))
        if self.sup_bound is not None:
            sup = float(self.sup_bound)
            if not math.isfinite(sup) or sup < 0.0:
                raise ValueError("sup_bound must be finite and >= 0")
            object.__setattr__(self, "sup_bound", sup)

    @classmethod
    def from_table(cls, values, sup_bound: Optional[float] = None) -> "TabulatedFunction":
        return cls(values=values, sup_bound=sup_bound)

    @classmethod
    def from_builtin(cls, name: str, params: Optional[dict] = None,
                     sup_bound: Optional[float] = None) -> "TabulatedFunction":
        return cls(builtin=name, params=params, sup_bound=sup_bound)

    def _overrides(self, space: ProductSpace):
        spec = (self.params or {}).get("overrides")
        if spec is None:
            return []
        points = spec.get("points", [])
        values = spec.get("values", [])
        if len(points) != len(values):
            raise ValueError("overrides: points and values differ in length")
        out = []
        for pt, v in zip(points, values):
            _validate_point(space, pt)
            out.append((tuple(int(c) for c in pt), float(v)))
        return out

    def _rule_values(self, space: ProductSpace, coords: np.ndarray) -> np.ndarray:
        params = self.params or {}
        if self.builtin == "constant":
            out = np.full(coords.shape[0], float(params.get("value", 0.0)))
        else:  # coordinate_mean
            scale = float(params.get("scale", 1.0))
            offset = float(params.get("offset", 0.0))
            if space.n == 0:
                out = np.full(coords.shape[0], offset)
            else:
                out = scale * coords.mean(axis=1) + offset
        for pt, v in self._overrides(space):
            hit = (coords == np.asarray(pt)).all(axis=1)
            out[hit] = v
        return out

    def tabulate(self, space: ProductSpace, cap: Optional[int] = None) -> np.ndarray:
        """Dense value table over the space in ascending rank order."""
        size = _require_enumerable(space, cap)
        if self.values is not None:
            if len(self.values) != size:
                raise InstanceFormatError(
                    f"f: table has {len(self.values)} values, space has {size} points"
                )
            return self.values
        return self._rule_values(space, coords_matrix(space, cap))

    def evaluate(self, space: ProductSpace, coords: np.ndarray) -> np.ndarray:
        """Values at the given (m, n) coordinate rows; no enumeration."""
        if self.values is not None:
            ranks = coords @ _rank_weights(space)
            return np.asarray(self.values)[ranks]
        return self._rule_values(space, coords)

    def value_at(self, space: ProductSpace, x: Sequence[int]) -> float:
        _validate_point(space, x)
        row = np.asarray([tuple(int(c) for c in x)], dtype=np.int64)
        if space.n == 0:
            row = row.reshape(1, 0)
        return float(self.evaluate(space, row)[0])


@dataclass(frozen=True, eq=False)
class SubsetY:
    """Membership structure for the good subset Y of a product space.

    Representations: ``exclude`` (complement of a point list), ``include``
    (a point list), or a named builtin predicate. Builtins: ``full`` (all
    of the space) and ``coordinate_sum_at_least`` with params
    ``{"threshold": t}`` (sum of symbol indices >= t).
    """

    kind: str
    points: Optional[tuple[Point, ...]] = None
    builtin: Optional[str] = None
    params: Optional[dict] = None

    def __post_init__(self):
        if self.kind in ("exclude", "include"):
            if self.points is None:
                raise ValueError(f"{self.kind} representation needs a point list")
            pts = tuple(tuple(int(c) for c in p) for p in self.points)
            object.__setattr__(self, "points", pts)
        elif self.kind == "builtin":
            if self.builtin not in BUILTIN_PREDICATES:
                raise ValueError(f"unknown builtin predicate {self.builtin!r}")
            object.__setattr__(self, "params", dict(self.params or {}))
        else:
            raise ValueError(f"unknown subset representation {self.kind!r}")

    @classmethod
    def exclude(cls, points: Sequence[Sequence[int]]) -> "SubsetY":
        return cls(kind="exclude", points=tuple(tuple(p) for p in points))

    @classmethod
    def include(cls, points: Sequence[Sequence[int]]) -> "SubsetY":
        return cls(kind="include", points=tuple(tuple(p) for p in points))

    @classmethod
    def full(cls) -> "SubsetY":
        return cls(kind="builtin", builtin="full")

    @classmethod
    def from_builtin(cls, name: str, params: Optional[dict] = None) -> "SubsetY":
        return cls(kind="builtin", builtin=name, params=params)

    def contains(self, space: ProductSpace, x: Sequence[int]) -> bool:
        _validate_point(space, x)
        row = np.asarray([tuple(int(c) for c in x)], dtype=np.int64).reshape(1, space.n)
        return bool(self.batch_contains(space, row)[0])

    def batch_contains(self, space: ProductSpace, coords: np.ndarray) -> np.ndarray:
        """Vectorized membership for (m, n) coordinate rows; no enumeration."""
        m = coords.shape[0]
        if self.kind == "exclude":
            out = np.ones(m, dtype=bool)
            for pt in self.points:
                _validate_point(space, pt)
                out &= ~(coords == np.asarray(pt)).all(axis=1)
            return out
        if self.kind == "include":
            out = np.zeros(m, dtype=bool)
            for pt in self.points:
                _validate_point(space, pt)
                out |= (coords == np.asarray(pt)).all(axis=1)
            return out
        if self.builtin == "full":
            return np.ones(m, dtype=bool)
        threshold = int((self.params or {}).get("threshold", 0))
        return coords.sum(axis=1) >= threshold

    def mask(self, space: ProductSpace, cap: Optional[int] = None) -> np.ndarray:
        """Dense boolean membership table in ascending rank order."""
        size = _require_enumerable(space, cap)
        if self.kind == "exclude":
            out = np.ones(size, dtype=bool)
            for pt in self.points:
                out[point_rank(space, pt)] = False
            return out
        if self.kind == "include":
            out = np.zeros(size, dtype=bool)
            for pt in self.points:
                out[point_rank(space, pt)] = True
            return out
        if self.builtin == "full":
            return np.ones(size, dtype=bool)
        return self.batch_contains(space, coords_matrix(space, cap))

    def ranks(self, space: ProductSpace, cap: Optional[int] = None) -> np.ndarray:
        """Sorted ranks of the members of Y."""
        return np.flatnonzero(self.mask(space, cap))


@dataclass(frozen=True)
class ViolationWitness:
    """Pair violating the bounded-differences inequality."""

    x: Point
    y: Point
    delta_f: float
    distance: float


def _axis_spreads(table: np.ndarray, space: ProductSpace) -> list[float]:
    """Per coordinate, the largest |f(x)-f(y)| over pairs differing only there."""
    t = np.asarray(table, dtype=float).reshape(space.alphabet_sizes)
    spreads = []
    for i, k in enumerate(space.alphabet_sizes):
        if k == 1:
            spreads.append(0.0)
            continue
        moved = np.moveaxis(t, i, -1)
        spread = moved.max(axis=-1) - moved.min(axis=-1)
        spreads.append(float(spread.max(initial=0.0)))
    return spreads


def check_bounded_differences(
    f: TabulatedFunction,
    Y: SubsetY,
    metric: WeightedMetric,
    space: ProductSpace,
    *,
    tol: float = CHECK_TOL,
    cap: Optional[int] = None,
    pair_cap: Optional[int] = None,
) -> Optional[ViolationWitness]:
    """Certify |f(x)-f(y)| <= d_c(x,y) + tol for all pairs in Y^2.

    Returns None when the inequality holds, otherwise the first violating
    pair in ascending (rank(x), rank(y)) order. When Y is the whole space
    the per-coordinate characterization is used to certify without a
    pairwise scan; the scan still runs (under pair_cap) to locate a
    canonical witness when that fast path detects a violation.
    """
    size = _require_enumerable(space, cap)
    if metric.n != space.n:
        raise ValueError(f"metric has {metric.n} weights, space has {space.n} coordinates")
    table = np.asarray(f.tabulate(space, cap), dtype=float)
    mask = Y.mask(space, cap)
    m = int(mask.sum())
    if m == 0:
        raise EmptySubsetError("Y is empty; nothing to certify")

    if m == size:
        spreads = _axis_spreads(table, space)
        if all(s <= ci + tol for s, ci in zip(spreads, metric.c)):
            return None

    pair_cap = DEFAULT_PAIR_CAP if pair_cap is None else int(pair_cap)
    if m * m > pair_cap:
        raise PairScanCapError(m * m, pair_cap)

    ranks = np.flatnonzero(mask)
    yc = coords_matrix(space, cap)[ranks]
    fy = table[ranks]
    carr = np.asarray(metric.c, dtype=float)
    for i in range(m - 1):
        d = (yc[i + 1:] != yc[i]) @ carr
        df = np.abs(fy[i + 1:] - fy[i])
        bad = df > d + tol
        if bad.any():
            j = int(np.argmax(bad))
            return ViolationWitness(
                x=tuple(int(v) for v in yc[i]),
                y=tuple(int(v) for v in yc[i + 1 + j]),
                delta_f=float(df[j]),
                distance=float(d[j]),
            )
    return None


def tightest_full_space_c(
    f: TabulatedFunction, space: ProductSpace, cap: Optional[int] = None
) -> WeightedMetric:
    """Smallest c certifying bounded differences on the whole space.

    c_i is the largest |f(x)-f(y)| over pairs differing only in coordinate
    i; no smaller weight certifies that coordinate.
    """
    table = f.tabulate(space, cap)
    return WeightedMetric(tuple(_axis_spreads(table, space)))
