"""Geometry of the n-dimensional cross-polytope with peaks.

The base solid is the L1 unit ball O_n = {x : sum |x_i| <= 1}, of volume
2^n / n!.  Each of its 2^n facets F_s (one per sign pattern s in {-1,+1}^n,
with vertices {s_i e_i}) can carry a "peak": the pyramid over F_s with apex
alpha * centroid(F_s) = s / (n-1), where alpha = n / (n-1) is the largest
apex scale that keeps the union of the core and any set of peaks convex.
Each peak has volume exactly vol(O_n) / (2^n (n-1)), so all the peaks
together add vol(O_n) / (n-1).

A body is the core plus any subset of the 2^n peaks.  Orthants are encoded
as n-bit integers: bit i of the index is 1 iff s_i = +1.

Construction constants are exact rationals.  The scalar predicates
(classify_point, membership_inner, membership_q_oracle) pass Fraction
inputs through untouched, so membership on rational points is exact; the
batch variants work either on float arrays or on integer-scaled points
(x = X / scale), where every comparison is exact integer arithmetic.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

from .errors import ParameterError

# membership_q_oracle enumerates n * 2^(n-1) halfspaces; cap the blowup.
MAX_Q_ORACLE_DIM = 12


# ---------------------------------------------------------------------------
# orthant encoding

def signs_to_index(signs) -> int:
    """Encode a {-1,+1} sign vector as an integer: bit i set iff signs[i] = +1."""
    index = 0
    for i, s in enumerate(signs):
        if s == 1:
            index |= 1 << i
        elif s != -1:
            raise ParameterError(f"sign vector entries must be -1 or +1, got {s!r}")
    return index


def index_to_signs(n: int, index: int) -> tuple[int, ...]:
    """Decode an orthant index back to its {-1,+1} sign vector."""
    if not 0 <= index < (1 << n):
        raise ParameterError(f"orthant index {index} out of range for n={n}")
    return tuple(1 if (index >> i) & 1 else -1 for i in range(n))


@dataclass(frozen=True)
class OrthantSign:
    """One of the 2^n orthants, held as (dimension, encoded index)."""

    n: int
    index: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ParameterError("OrthantSign needs n >= 1")
        if not 0 <= self.index < (1 << self.n):
            raise ParameterError(
                f"orthant index {self.index} out of range for n={self.n}")

    @classmethod
    def from_signs(cls, signs) -> "OrthantSign":
        signs = tuple(signs)
        return cls(len(signs), signs_to_index(signs))

    @property
    def signs(self) -> tuple[int, ...]:
        return index_to_signs(self.n, self.index)


@dataclass(frozen=True)
class RegionLabel:
    """Where a point sits: the core, a specific peak, or outside."""

    kind: str  # "core" | "peak" | "outside"
    orthant: OrthantSign | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("core", "peak", "outside"):
            raise ParameterError(f"unknown region kind {self.kind!r}")
        if (self.kind == "peak") != (self.orthant is not None):
            raise ParameterError("peak labels carry an orthant; others must not")

    @classmethod
    def core(cls) -> "RegionLabel":
        return cls("core")

    @classmethod
    def outside(cls) -> "RegionLabel":
        return cls("outside")

    @classmethod
    def peak(cls, orthant: OrthantSign) -> "RegionLabel":
        return cls("peak", orthant)

    @property
    def is_core(self) -> bool:
        return self.kind == "core"

    @property
    def is_peak(self) -> bool:
        return self.kind == "peak"

    @property
    def is_outside(self) -> bool:
        return self.kind == "outside"

    def text(self) -> str:
        """Transcript form: 'C', 'P<orthant index in hex>', or 'O'."""
        if self.kind == "core":
            return "C"
        if self.kind == "outside":
            return "O"
        return "P" + format(self.orthant.index, "x")


# integer label sentinels used by the batch paths: values < 2^n are peak
# orthant indices, 2^n is the core, 2^n + 1 is outside.
def core_label_value(n: int) -> int:
    return 1 << n


def outside_label_value(n: int) -> int:
    return (1 << n) + 1


def label_from_value(n: int, value: int) -> RegionLabel:
    if value == core_label_value(n):
        return RegionLabel.core()
    if value == outside_label_value(n):
        return RegionLabel.outside()
    return RegionLabel.peak(OrthantSign(n, int(value)))


# ---------------------------------------------------------------------------
# exact construction constants

@dataclass(frozen=True)
class GeometryParams:
    """Exact construction constants for dimension n.

    alpha        apex scale n/(n-1)
    core_volume  vol(O_n) = 2^n/n!
    peak_volume  vol of one peak = core_volume / (2^n (n-1))
    """

    n: int
    alpha: Fraction
    core_volume: Fraction
    peak_volume: Fraction


def make_geometry(n: int) -> GeometryParams:
    if n < 2:
        raise ParameterError("peaks need n >= 2 (alpha = n/(n-1) degenerates at n=1)")
    core = Fraction(2 ** n, factorial(n))
    return GeometryParams(
        n=n,
        alpha=Fraction(n, n - 1),
        core_volume=core,
        peak_volume=core / (2 ** n * (n - 1)),
    )


def peak_vertices(n: int, orthant: OrthantSign) -> list[list[Fraction]]:
    """The n+1 vertices of the peak simplex in the given orthant:
    the facet vertices s_i e_i plus the apex s/(n-1)."""
    s = orthant.signs
    verts = []
    for i in range(n):
        v = [Fraction(0)] * n
        v[i] = Fraction(s[i])
        verts.append(v)
    verts.append([Fraction(s[i], n - 1) for i in range(n)])
    return verts


# ---------------------------------------------------------------------------
# bodies

@dataclass(frozen=True)
class InnerBody:
    """The cross-polytope O_n plus a chosen subset of its 2^n peaks."""

    n: int
    peaks: frozenset[int]

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ParameterError("InnerBody needs n >= 2")
        object.__setattr__(self, "peaks", frozenset(self.peaks))
        for p in self.peaks:
            if not 0 <= p < (1 << self.n):
                raise ParameterError(f"peak orthant {p} out of range for n={self.n}")

    @property
    def mask(self) -> int:
        m = 0
        for p in self.peaks:
            m |= 1 << p
        return m

    @property
    def peak_count(self) -> int:
        return len(self.peaks)

    def has_peak(self, orthant_index: int) -> bool:
        return orthant_index in self.peaks

    def text(self) -> str:
        """Serialized form: n=<int>;peaks=<hex of 2^n bits, orthant 0 = LSB>."""
        width = max(1, (1 << self.n) // 4)
        return f"n={self.n};peaks={self.mask:0{width}x}"


def body_from_mask(n: int, mask: int) -> InnerBody:
    if not 0 <= mask < (1 << (1 << n)):
        raise ParameterError(f"peak mask {mask:#x} out of range for n={n}")
    return InnerBody(n, frozenset(i for i in range(1 << n) if (mask >> i) & 1))


def bare_body(n: int) -> InnerBody:
    return InnerBody(n, frozenset())


def full_body(n: int) -> InnerBody:
    return InnerBody(n, frozenset(range(1 << n)))


def parse_inner_body(text: str) -> InnerBody:
    text = text.strip()
    try:
        left, right = text.split(";")
        if not left.startswith("n=") or not right.startswith("peaks="):
            raise ValueError
        n = int(left[2:])
        mask = int(right[6:], 16)
    except ValueError as exc:
        raise ParameterError(f"malformed body text {text!r}") from exc
    return body_from_mask(n, mask)


def inner_volume(body: InnerBody) -> Fraction:
    g = make_geometry(body.n)
    return g.core_volume + body.peak_count * g.peak_volume


# ---------------------------------------------------------------------------
# classification and membership (scalar, exact on rational inputs)

def classify_point(n: int, x) -> RegionLabel:
    """Classify a point against the fully-peaked body in dimension n.

    With t_i = |x_i| and T = sum t_i: the core is T <= 1; the peak in x's
    orthant is 1 < T <= 1 + min_i t_i; everything else is outside.  Ties go
    to the region (all regions closed).  A zero coordinate with T > 1 forces
    "outside" since then min_i t_i = 0.
    """
    x = list(x)
    if len(x) != n:
        raise ParameterError(f"point has dimension {len(x)}, expected {n}")
    t = [abs(v) for v in x]
    total = sum(t)
    if total <= 1:
        return RegionLabel.core()
    if total <= 1 + min(t):
        index = 0
        for i, v in enumerate(x):
            if v > 0:
                index |= 1 << i
        return RegionLabel.peak(OrthantSign(n, index))
    return RegionLabel.outside()


def membership_inner(body: InnerBody, x) -> bool:
    """Exact membership for a cross-polytope-with-peaks body."""
    label = classify_point(body.n, x)
    if label.is_core:
        return True
    if label.is_peak:
        return label.orthant.index in body.peaks
    return False


@functools.lru_cache(maxsize=32)
def q_halfspace_normals(n: int) -> np.ndarray:
    """The n * 2^(n-1) normals a in {-1,0,1}^n with exactly one zero entry.

    The fully-peaked body equals the intersection of the halfspaces
    a . x <= 1 over these normals; removing a peak s adds s . x <= 1.
    """
    rows = []
    for zero_pos in range(n):
        for signs in itertools.product((-1, 1), repeat=n - 1):
            a = list(signs[:zero_pos]) + [0] + list(signs[zero_pos:])
            rows.append(a)
    return np.array(rows, dtype=np.int8)


def membership_q_oracle(n: int, missing, x) -> bool:
    """Membership decided purely by halfspaces, an independent route from
    classify_point.  `missing` lists the orthants (indices or OrthantSign)
    whose peaks the body does NOT have.
    """
    if n > MAX_Q_ORACLE_DIM:
        raise ParameterError(f"halfspace oracle capped at n <= {MAX_Q_ORACLE_DIM}")
    x = list(x)
    if len(x) != n:
        raise ParameterError(f"point has dimension {len(x)}, expected {n}")
    for a in q_halfspace_normals(n):
        acc = 0
        for i in range(n):
            ai = int(a[i])
            if ai:
                acc = acc + x[i] if ai > 0 else acc - x[i]
        if acc > 1:
            return False
    for m in missing:
        index = m.index if isinstance(m, OrthantSign) else int(m)
        signs = index_to_signs(n, index)
        acc = 0
        for i in range(n):
            acc = acc + x[i] if signs[i] > 0 else acc - x[i]
        if acc > 1:
            return False
    return True


# ---------------------------------------------------------------------------
# batch classification (float and integer-scaled exact paths)

def _orthant_indices(points: np.ndarray) -> np.ndarray:
    n = points.shape[1]
    weights = (1 << np.arange(n, dtype=np.int64))
    return ((points > 0).astype(np.int64) * weights).sum(axis=1)


def classify_batch(n: int, points: np.ndarray) -> np.ndarray:
    """Vector classify_point over float points; returns integer labels
    (< 2^n peak index, 2^n core, 2^n + 1 outside)."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != n:
        raise ParameterError("points must be a (count, n) array")
    t = np.abs(points)
    total = t.sum(axis=1)
    in_core = total <= 1.0
    in_peak = ~in_core & (total <= 1.0 + t.min(axis=1))
    labels = np.full(len(points), outside_label_value(n), dtype=np.int64)
    labels[in_core] = core_label_value(n)
    labels[in_peak] = _orthant_indices(points)[in_peak]
    return labels


def classify_scaled_batch(n: int, ipoints: np.ndarray, scale: int) -> np.ndarray:
    """Exact vector classification of rational points X / scale given as an
    int64 array X.  All comparisons are integer, so boundary ties are exact."""
    ipoints = np.asarray(ipoints, dtype=np.int64)
    if ipoints.ndim != 2 or ipoints.shape[1] != n:
        raise ParameterError("ipoints must be a (count, n) array")
    t = np.abs(ipoints)
    total = t.sum(axis=1)
    in_core = total <= scale
    in_peak = ~in_core & (total <= scale + t.min(axis=1))
    labels = np.full(len(ipoints), outside_label_value(n), dtype=np.int64)
    labels[in_core] = core_label_value(n)
    labels[in_peak] = _orthant_indices(ipoints)[in_peak]
    return labels


def _membership_from_labels(body: InnerBody, labels: np.ndarray) -> np.ndarray:
    member = labels == core_label_value(body.n)
    if body.peaks:
        peak_rows = labels < core_label_value(body.n)
        if peak_rows.any():
            mask = np.zeros(1 << body.n, dtype=bool)
            mask[sorted(body.peaks)] = True
            member = member.copy()
            member[peak_rows] = mask[labels[peak_rows]]
    return member


def membership_batch(body: InnerBody, points: np.ndarray) -> np.ndarray:
    return _membership_from_labels(body, classify_batch(body.n, points))


def membership_scaled_batch(body: InnerBody, ipoints: np.ndarray, scale: int) -> np.ndarray:
    return _membership_from_labels(body, classify_scaled_batch(body.n, ipoints, scale))


def q_membership_scaled_batch(n: int, missing, ipoints: np.ndarray, scale: int) -> np.ndarray:
    """Exact vectorized halfspace-oracle membership on integer-scaled points."""
    if n > MAX_Q_ORACLE_DIM:
        raise ParameterError(f"halfspace oracle capped at n <= {MAX_Q_ORACLE_DIM}")
    ipoints = np.asarray(ipoints, dtype=np.int64)
    normals = q_halfspace_normals(n).astype(np.int64)
    member = (ipoints @ normals.T <= scale).all(axis=1)
    missing = list(missing)
    if missing:
        rows = []
        for m in missing:
            index = m.index if isinstance(m, OrthantSign) else int(m)
            rows.append(index_to_signs(n, index))
        signs = np.array(rows, dtype=np.int64)
        member &= (ipoints @ signs.T <= scale).all(axis=1)
    return member


# ---------------------------------------------------------------------------
# sampling

@functools.lru_cache(maxsize=4096)
def _present_peaks(body: InnerBody) -> np.ndarray:
    return np.array(sorted(body.peaks), dtype=np.int64)


def _core_weight(n: int) -> int:
    # core_volume / peak_volume = 2^n (n-1): an integer, so region selection
    # can use exact integer weights (core -> 2^n (n-1), each peak -> 1).
    return (1 << n) * (n - 1)


def sample_region_labels(body: InnerBody, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw `count` region labels with probabilities exactly proportional to
    region volumes, via integer weights.  Returns integer labels."""
    n = body.n
    r = _core_weight(n)
    p = body.peak_count
    u = rng.integers(0, r + p, size=count)
    labels = np.full(count, core_label_value(n), dtype=np.int64)
    if p:
        hit = u >= r
        if hit.any():
            labels[hit] = _present_peaks(body)[u[hit] - r]
    return labels


def region_expectations(body: InnerBody) -> tuple[np.ndarray, list[Fraction]]:
    """Region label values and their exact probabilities under the uniform
    law on the body: the core plus every present peak."""
    g = make_geometry(body.n)
    vol = inner_volume(body)
    values = [core_label_value(body.n)]
    probs = [g.core_volume / vol]
    for index in sorted(body.peaks):
        values.append(index)
        probs.append(g.peak_volume / vol)
    return np.array(values, dtype=np.int64), probs


def _simplex_weights(count: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """(count, n+1) rows of uniform barycentric weights: n+1 unit-rate
    exponentials, normalized."""
    e = rng.standard_exponential((count, n + 1))
    return e / e.sum(axis=1, keepdims=True)


def _core_points(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform points of O_n: a uniform point of the standard simplex (the
    first n normalized exponentials) with independent uniform signs."""
    w = _simplex_weights(count, n, rng)
    signs = rng.integers(0, 2, size=(count, n)) * 2 - 1
    return w[:, :n] * signs


def _peak_points(n: int, orthant_index: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform points of the peak simplex in one orthant: uniform barycentric
    weights over the n facet vertices s_i e_i and the apex s/(n-1)."""
    w = _simplex_weights(count, n, rng)
    signs = np.array(index_to_signs(n, orthant_index), dtype=np.float64)
    return signs * (w[:, :n] + w[:, n:] / (n - 1))


def sample_inner_batch(body: InnerBody, count: int, rng: np.random.Generator
                       ) -> tuple[np.ndarray, np.ndarray]:
    """Draw `count` uniform points of the body.  Returns (points, labels):
    points is (count, n) float64, labels the integer region labels."""
    n = body.n
    labels = sample_region_labels(body, count, rng)
    points = np.empty((count, n), dtype=np.float64)
    core_rows = labels == core_label_value(n)
    n_core = int(core_rows.sum())
    if n_core:
        points[core_rows] = _core_points(n, n_core, rng)
    if body.peaks:
        # group by orthant in sorted order so the draw sequence is reproducible
        for orthant in sorted(body.peaks):
            rows = labels == orthant
            cnt = int(rows.sum())
            if cnt:
                points[rows] = _peak_points(n, orthant, cnt, rng)
    return points, labels


def sample_inner(body: InnerBody, rng: np.random.Generator
                 ) -> tuple[np.ndarray, RegionLabel]:
    """Draw one uniform point of the body; also reports which region it
    landed in.  Single draws go through the same code path as batches."""
    pts, labels = sample_inner_batch(body, 1, rng)
    return pts[0], label_from_value(body.n, int(labels[0]))
