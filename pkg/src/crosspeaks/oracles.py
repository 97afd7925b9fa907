"""Query oracles over product bodies, and the discrete-to-continuous bridge.

Four oracles, all driven by a caller-supplied numpy Generator:

  continuous_random     uniform point of the body
  continuous_membership point in body?
  discrete_random       per-factor region label (core or a present peak),
                        with probabilities exactly proportional to volumes
  discrete_membership   per-factor "is peak #i present?" bits

A discrete random answer carries everything needed to regenerate a
continuous sample: conditioned on the label, the point is uniform on that
region, so simulate_continuous_from_discrete(answer) has exactly the
distribution of continuous_random on the same body.  Every body answers a
random query with one of (2^n + 1)^k possible label tuples (2^n peaks or
core, per factor), which is the fan-out that bounds what q queries can
distinguish.

Transcripts record queries append-only and serialize one line per query:
'R <label,...>' for random draws, 'M <idx,...> -> <bool,...>' for
membership probes; labels are 'C' or 'P<orthant-hex>'.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .family import ProductBody
from .geometry import (InnerBody, RegionLabel, core_label_value, label_from_value,
                       membership_inner, sample_inner_batch, sample_region_labels,
                       _core_points, _peak_points)


@dataclass(frozen=True)
class DiscreteRandomAnswer:
    """One random-oracle draw: a region label per factor (never 'outside')."""

    n: int
    labels: tuple[RegionLabel, ...]

    def __post_init__(self) -> None:
        if not self.labels:
            raise ParameterError("an answer needs at least one factor")
        for lab in self.labels:
            if lab.is_outside:
                raise ParameterError("random draws always land inside the body")
            if lab.is_peak and lab.orthant.n != self.n:
                raise ParameterError("peak label dimension mismatch")

    @property
    def k(self) -> int:
        return len(self.labels)

    def text(self) -> str:
        return ",".join(lab.text() for lab in self.labels)


@dataclass(frozen=True)
class MembershipQuery:
    """Per-factor peak indices to probe: 'does factor j carry peak indices[j]?'"""

    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.indices:
            raise ParameterError("a membership query needs at least one factor")

    @property
    def k(self) -> int:
        return len(self.indices)


@dataclass
class Transcript:
    """Append-only record of oracle interactions."""

    entries: list = field(default_factory=list)

    @property
    def query_count(self) -> int:
        return len(self.entries)

    def record_random(self, answer: DiscreteRandomAnswer) -> None:
        self.entries.append(("R", answer))

    def record_membership(self, query: MembershipQuery, answers: tuple[bool, ...]) -> None:
        self.entries.append(("M", query, answers))

    def to_log(self) -> str:
        lines = []
        for e in self.entries:
            if e[0] == "R":
                lines.append(f"R {e[1].text()}")
            else:
                idx = ",".join(str(i) for i in e[1].indices)
                ans = ",".join("true" if b else "false" for b in e[2])
                lines.append(f"M {idx} -> {ans}")
        return "\n".join(lines)


def parse_transcript_log(n: int, text: str) -> Transcript:
    """Inverse of Transcript.to_log for n-dimensional factors."""
    t = Transcript()
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("R "):
            labels = []
            for token in line[2:].split(","):
                token = token.strip()
                if token == "C":
                    labels.append(RegionLabel.core())
                elif token.startswith("P"):
                    from .geometry import OrthantSign
                    labels.append(RegionLabel.peak(OrthantSign(n, int(token[1:], 16))))
                else:
                    raise ParameterError(f"unknown label {token!r}")
            t.record_random(DiscreteRandomAnswer(n, tuple(labels)))
        elif line.startswith("M "):
            try:
                left, right = line[2:].split("->")
                idx = tuple(int(s) for s in left.strip().split(","))
                ans = tuple({"true": True, "false": False}[s.strip()]
                            for s in right.strip().split(","))
            except (ValueError, KeyError) as exc:
                raise ParameterError(f"malformed membership line {line!r}") from exc
            t.record_membership(MembershipQuery(idx), ans)
        else:
            raise ParameterError(f"unknown transcript line {line!r}")
    return t


# ---------------------------------------------------------------------------
# continuous oracles

def continuous_random(body: ProductBody, rng: np.random.Generator) -> np.ndarray:
    """One uniform point of the product body, as a length-kn vector."""
    parts = [sample_inner_batch(f, 1, rng)[0][0] for f in body.factors]
    return np.concatenate(parts)


def continuous_random_batch(body: ProductBody, count: int,
                            rng: np.random.Generator) -> np.ndarray:
    cols = [sample_inner_batch(f, count, rng)[0] for f in body.factors]
    return np.concatenate(cols, axis=1)


def continuous_membership(body: ProductBody, x) -> bool:
    """Point-in-body test: every factor block must be a member."""
    x = list(x)
    n, k = body.n, body.k
    if len(x) != n * k:
        raise ParameterError(f"point has dimension {len(x)}, expected {n * k}")
    return all(membership_inner(f, x[j * n:(j + 1) * n])
               for j, f in enumerate(body.factors))


# ---------------------------------------------------------------------------
# discrete oracles

def discrete_random(body: ProductBody, rng: np.random.Generator) -> DiscreteRandomAnswer:
    """Region label per factor, distributed exactly by region volumes."""
    n = body.n
    labels = []
    for f in body.factors:
        v = int(sample_region_labels(f, 1, rng)[0])
        labels.append(label_from_value(n, v))
    return DiscreteRandomAnswer(n, tuple(labels))


def discrete_random_batch(body: ProductBody, count: int,
                          rng: np.random.Generator) -> np.ndarray:
    """(count, k) integer label matrix (core = 2^n)."""
    out = np.empty((count, body.k), dtype=np.int64)
    for j, f in enumerate(body.factors):
        out[:, j] = sample_region_labels(f, count, rng)
    return out


def discrete_membership(body: ProductBody, query: MembershipQuery) -> tuple[bool, ...]:
    """Peak-presence bit per factor for the queried orthant indices."""
    if query.k != body.k:
        raise ParameterError(f"query has {query.k} indices, body has {body.k} factors")
    n = body.n
    for i in query.indices:
        if not 0 <= i < (1 << n):
            raise ParameterError(f"peak index {i} out of range for n={n}")
    return tuple(i in f.peaks for i, f in zip(query.indices, body.factors))


def simulate_continuous_from_discrete(answer: DiscreteRandomAnswer,
                                      rng: np.random.Generator) -> np.ndarray:
    """Regenerate a uniform point of the labeled region, factor by factor.

    Because continuous_random is a mixture over regions with the label
    distribution of discrete_random, feeding this a discrete draw yields
    exactly the continuous oracle's distribution."""
    n = answer.n
    parts = []
    for lab in answer.labels:
        if lab.is_core:
            parts.append(_core_points(n, 1, rng)[0])
        else:
            parts.append(_peak_points(n, lab.orthant.index, 1, rng)[0])
    return np.concatenate(parts)


def simulate_batch(n: int, labels: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Vector form: (count, k) integer labels -> (count, k*n) points."""
    labels = np.asarray(labels)
    count, k = labels.shape
    out = np.empty((count, k * n), dtype=np.float64)
    core = core_label_value(n)
    for j in range(k):
        col = labels[:, j]
        block = slice(j * n, (j + 1) * n)
        rows = col == core
        cnt = int(rows.sum())
        if cnt:
            out[rows, block] = _core_points(n, cnt, rng)
        for orthant in np.unique(col[col < core]):
            rows = col == orthant
            out[rows, block] = _peak_points(n, int(orthant), int(rows.sum()), rng)
    return out


# ---------------------------------------------------------------------------
# answer space

def answer_space_size(n: int, k: int) -> int:
    """The fan-out of the discrete random oracle: (2^n + 1)^k."""
    return ((1 << n) + 1) ** k


def answer_space(n: int, k: int):
    """All label tuples any n,k body could ever return: per factor, core or
    any of the 2^n peaks.  Intended for small n, k (the count is (2^n+1)^k)."""
    from .geometry import OrthantSign
    per_factor = [RegionLabel.core()] + [
        RegionLabel.peak(OrthantSign(n, i)) for i in range(1 << n)]
    for combo in itertools.product(per_factor, repeat=k):
        yield DiscreteRandomAnswer(n, combo)
