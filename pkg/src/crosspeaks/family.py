"""Families of hard-to-tell-apart bodies, indexed by error-correcting codes.

Inner level: fix n, take the greedy binary code of length 2^(n-1) and
distance max(1, ceil(2^n/8)), and extend each word by its complement.  The
extended words are constant-weight 2^(n-1) subsets of the 2^n orthants, so
each becomes an InnerBody with exactly half the peaks, any two differing in
at least 2^n/4 peaks, i.e. symmetric-difference volume >= vol(O_n)/(4(n-1)).

Product level: a q-ary outer code (alphabet = the inner bodies, length k,
distance >= ceil(k/2)) turns each codeword into a k-fold product body in
dimension d = kn.  The normalized distance

    dist(K, L) = vol(K \\ L) / max(vol K, vol L)

factorizes: for equal-volume bodies it is 1 - prod_i (R + m_i) / (R + w)
with R = 2^n (n-1), w = 2^(n-1) the per-factor peak count, and m_i the
number of shared peaks in factor i.  certify_separation checks, in exact
integer arithmetic, that every pair clears 1 - e^(-k/(16n)).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import codes as codes_mod
from .codes import BinaryCode, QaryCode, certified_binary, certified_qary
from .errors import BudgetExceededError, ParameterError, VerificationError
from .exactmath import ceil_fraction, compare_exp_neg, exp_neg_bounds
from .geometry import InnerBody, inner_volume, make_geometry

DEFAULT_MAX_N = 4
DEFAULT_MAX_K = 8
DEFAULT_FAMILY_CAP = 1 << 20
DEFAULT_PAIR_CHECK_CAP = 10_000_000

MANIFEST_COMMENT = "# crosspeaks family manifest v1"


# ---------------------------------------------------------------------------
# inner families

@dataclass(frozen=True)
class InnerFamily:
    """All bodies carved from one constant-weight binary code.

    code words live over length 2^n (one coordinate per orthant, coordinate
    i = orthant i); every word has weight 2^(n-1) and pairwise distance
    >= 2^n / 4.
    """

    n: int
    code: BinaryCode
    bodies: tuple[InnerBody, ...]

    @property
    def size(self) -> int:
        return len(self.bodies)

    def masks(self) -> np.ndarray:
        return np.array([b.mask for b in self.bodies], dtype=np.uint32)


def inner_family_from_code(n: int, code: BinaryCode) -> InnerFamily:
    """Wrap a code as an inner family, validating the family invariants."""
    orthants = 1 << n
    if code.length != orthants:
        raise ParameterError(
            f"code length {code.length} != 2^n = {orthants}")
    half = orthants // 2
    for w in code.words:
        if sum(w) != half:
            raise VerificationError(f"word {w} is not constant weight {half}")
    if code.size >= 2 and 4 * code.min_distance < orthants:
        raise VerificationError(
            f"min distance {code.min_distance} under the floor {orthants}/4")
    bodies = tuple(
        InnerBody(n, frozenset(i for i, b in enumerate(w) if b)) for w in code.words)
    return InnerFamily(n=n, code=code, bodies=bodies)


def build_inner_family(n: int, *, max_n: int = DEFAULT_MAX_N,
                       enumeration_budget: int = codes_mod.DEFAULT_ENUMERATION_BUDGET
                       ) -> InnerFamily:
    """Greedy seed code over length 2^(n-1), complement-extended."""
    if n < 2:
        raise ParameterError("inner families need n >= 2")
    if n > max_n:
        raise BudgetExceededError(
            f"n={n} over the construction cap {max_n}; raise max_n explicitly")
    half = 1 << (n - 1)
    min_dist = max(1, -((-(1 << n)) // 8))  # ceil(2^n / 8)
    seed = codes_mod.gv_greedy(2, half, min_dist, enumeration_budget=enumeration_budget)
    code = codes_mod.complement_extend(seed)
    return inner_family_from_code(n, code)


# ---------------------------------------------------------------------------
# product bodies and families

@dataclass(frozen=True)
class ProductBody:
    """A k-fold product of same-dimension inner bodies, living in R^(kn)."""

    factors: tuple[InnerBody, ...]

    def __post_init__(self) -> None:
        if not self.factors:
            raise ParameterError("a product body needs at least one factor")
        n = self.factors[0].n
        if any(f.n != n for f in self.factors):
            raise ParameterError("all factors must share the same dimension")

    @property
    def n(self) -> int:
        return self.factors[0].n

    @property
    def k(self) -> int:
        return len(self.factors)

    @property
    def dimension(self) -> int:
        return self.n * self.k

    def volume(self) -> Fraction:
        v = Fraction(1)
        for f in self.factors:
            v *= inner_volume(f)
        return v

    def text(self) -> str:
        return "|".join(f.text() for f in self.factors)


@dataclass(frozen=True)
class ProductFamily:
    """Inner family + outer code; bodies materialize on demand by index."""

    inner: InnerFamily
    outer: QaryCode

    @property
    def n(self) -> int:
        return self.inner.n

    @property
    def k(self) -> int:
        return self.outer.length

    @property
    def dimension(self) -> int:
        return self.n * self.k

    @property
    def size(self) -> int:
        return self.outer.size

    def __len__(self) -> int:
        return self.outer.size

    def body(self, index: int) -> ProductBody:
        if not 0 <= index < self.size:
            raise ParameterError(f"body index {index} out of range [0, {self.size})")
        word = self.outer.words[index]
        return ProductBody(tuple(self.inner.bodies[s] for s in word))

    def outer_matrix(self) -> np.ndarray:
        return self.outer.word_array().astype(np.int64)

    def mask_matrix(self) -> np.ndarray:
        """(size, k) matrix of per-factor peak masks."""
        return self.inner.masks().astype(np.int64)[self.outer_matrix()]


def product_family_from_parts(inner: InnerFamily, outer: QaryCode) -> ProductFamily:
    if outer.alphabet_size != inner.size:
        raise ParameterError(
            f"outer alphabet {outer.alphabet_size} != inner family size {inner.size}")
    need = -((-outer.length) // 2)  # ceil(k/2)
    if outer.size >= 2 and outer.min_distance < need:
        raise VerificationError(
            f"outer min distance {outer.min_distance} under ceil(k/2) = {need}")
    return ProductFamily(inner=inner, outer=outer)


def build_product_family(n: int, k: int, *, outer: QaryCode | None = None,
                         max_n: int = DEFAULT_MAX_N, max_k: int = DEFAULT_MAX_K,
                         enumeration_budget: int = codes_mod.DEFAULT_ENUMERATION_BUDGET,
                         family_cap: int = DEFAULT_FAMILY_CAP) -> ProductFamily:
    if k < 1:
        raise ParameterError("product families need k >= 1")
    if k > max_k:
        raise BudgetExceededError(f"k={k} over the construction cap {max_k}")
    inner = build_inner_family(n, max_n=max_n, enumeration_budget=enumeration_budget)
    if outer is None:
        outer = codes_mod.gv_greedy(inner.size, k, -((-k) // 2),
                                    enumeration_budget=enumeration_budget)
    family = product_family_from_parts(inner, outer)
    if family.size > family_cap:
        raise BudgetExceededError(
            f"family of {family.size} bodies over the cap {family_cap}")
    return family


# ---------------------------------------------------------------------------
# exact distances

def intersection_volume_inner(a: InnerBody, b: InnerBody) -> Fraction:
    """vol(a intersect b) = core + |shared peaks| * peak, exactly: every peak
    is either wholly inside or wholly outside the other body."""
    if a.n != b.n:
        raise ParameterError("intersection needs equal dimensions")
    g = make_geometry(a.n)
    shared = len(a.peaks & b.peaks)
    return g.core_volume + shared * g.peak_volume


def intersection_volume(a: ProductBody, b: ProductBody) -> Fraction:
    if a.n != b.n or a.k != b.k:
        raise ParameterError("intersection needs matching (n, k)")
    v = Fraction(1)
    for fa, fb in zip(a.factors, b.factors):
        v *= intersection_volume_inner(fa, fb)
    return v


def exact_distance(a: ProductBody, b: ProductBody) -> Fraction:
    """dist(a, b) = vol(bigger \\ smaller) / vol(bigger), exact.

    For equal volumes this is the symmetric 1 - vol(a^b)/vol(a); the
    two-branch form also covers unequal-volume pairs.
    """
    va, vb = a.volume(), b.volume()
    inter = intersection_volume(a, b)
    big = va if va >= vb else vb
    return (big - inter) / big


def exact_distance_inner(a: InnerBody, b: InnerBody) -> Fraction:
    return exact_distance(ProductBody((a,)), ProductBody((b,)))


# ---------------------------------------------------------------------------
# separation certificate

def separation_floor(n: int, k: int) -> tuple[Fraction, Fraction]:
    """Certified rational bounds (lo, hi) around 1 - e^(-k/(16n))."""
    e_lo, e_hi = exp_neg_bounds(Fraction(k, 16 * n))
    return 1 - e_hi, 1 - e_lo


def separation_holds(n: int, k: int, epsilon: Fraction) -> bool:
    """Exact decision of 2*epsilon < 1 - e^(-k/(16n))."""
    # equivalent to e^(-k/(16n)) < 1 - 2 eps
    return compare_exp_neg(Fraction(k, 16 * n), 1 - 2 * Fraction(epsilon)) < 0


def _pair_threshold(n: int, k: int, w: int) -> tuple[int, int]:
    """(T, den) such that for intersection counts m_1..m_k the pair clears the
    floor 1 - e^(-k/(16n)) iff prod (R + m_i) <= T, where den = (R + w)^k.

    dist = 1 - num/den with num = prod (R + m_i); dist > 1 - e^(-x) iff
    num < den * e^(-x).  Since e^(-x) is irrational for rational x != 0,
    den * e^(-x) is never an integer and T = floor(den * e^(-x)) is decided
    exactly from rational bounds on e^(-x).
    """
    r = (1 << n) * (n - 1)
    den = (r + w) ** k
    terms = 32
    while True:
        lo, hi = exp_neg_bounds(Fraction(k, 16 * n), terms)
        t_lo = (den * lo.numerator) // lo.denominator
        t_hi = (den * hi.numerator) // hi.denominator
        if t_lo == t_hi:
            return int(t_lo), den
        terms *= 2


@dataclass(frozen=True)
class SeparationReport:
    n: int
    k: int
    family_size: int
    pairs_checked: int
    mode: str  # "all" or "sampled"
    min_distance: Fraction
    floor_lo: Fraction
    floor_hi: Fraction
    max_shared_on_diff: int
    min_differing_factors: int


class _PairChecker:
    """Vectorized per-pair checks shared by the all-pairs and sampled scans."""

    def __init__(self, n: int, k: int) -> None:
        self.n = n
        self.k = k
        self.w = 1 << (n - 1)
        self.r = (1 << n) * (n - 1)
        self.threshold, self.den = _pair_threshold(n, k, self.w)
        self.shared_cap = 3 * (1 << n)  # compare 8*m <= 3*2^n
        self.need_diff = -((-k) // 2)
        self.pairs = 0
        self.worst_num = -1
        self.worst_pair = (0, 0)
        self.max_shared = 0
        self.min_diff_factors = k + 1

    def check(self, left_masks: np.ndarray, right_masks: np.ndarray,
              i_ids: np.ndarray, j_ids: np.ndarray) -> None:
        shared = np.bitwise_count(left_masks & right_masks).astype(np.int64)
        differs = left_masks != right_masks
        diff_counts = differs.sum(axis=1)
        self.pairs += len(shared)

        over_cap = differs & (shared * 8 > self.shared_cap)
        if over_cap.any():
            row, col = np.argwhere(over_cap)[0]
            raise VerificationError(
                f"pair ({int(i_ids[row])}, {int(j_ids[row])}): factor {int(col)} "
                f"shares {int(shared[row, col])} peaks, over 3*2^n/8")
        if differs.any():
            self.max_shared = max(self.max_shared, int(shared[differs].max()))

        low = diff_counts < self.need_diff
        if low.any():
            row = int(low.nonzero()[0][0])
            raise VerificationError(
                f"pair ({int(i_ids[row])}, {int(j_ids[row])}) differs in "
                f"{int(diff_counts[row])} factors, under ceil(k/2) = {self.need_diff}")
        self.min_diff_factors = min(self.min_diff_factors,
                                    int(diff_counts.min(initial=self.k + 1)))

        num = (self.r + np.where(differs, shared, self.w)).prod(axis=1)
        over = num > self.threshold
        if over.any():
            row = int(over.nonzero()[0][0])
            raise VerificationError(
                f"pair ({int(i_ids[row])}, {int(j_ids[row])}): distance "
                f"1 - {int(num[row])}/{self.den} fails the floor "
                f"1 - e^(-{self.k}/(16*{self.n}))")
        row = int(num.argmax())
        if int(num[row]) > self.worst_num:
            self.worst_num = int(num[row])
            self.worst_pair = (int(i_ids[row]), int(j_ids[row]))


def certify_separation(family: ProductFamily, *,
                       max_pairs: int = DEFAULT_PAIR_CHECK_CAP,
                       seed: int = 0) -> SeparationReport:
    """Check every (or, past max_pairs, a seeded sample of) distinct pair for:

      * normalized distance > 1 - e^(-k/(16n))        (exact integer compare)
      * shared peaks <= 3 * 2^n / 8 in differing factors
      * at least ceil(k/2) differing factors

    Raises VerificationError naming the offending pair on any violation.
    """
    n, k = family.n, family.k
    masks = family.mask_matrix()
    f = family.size
    if f < 2:
        raise ParameterError("separation needs at least two bodies")
    checker = _PairChecker(n, k)
    total_pairs = f * (f - 1) // 2

    if total_pairs <= max_pairs:
        mode = "all"
        for i in range(f - 1):
            checker.check(masks[i][None, :], masks[i + 1:],
                          np.full(f - 1 - i, i), np.arange(i + 1, f))
    else:
        mode = "sampled"
        rng = np.random.default_rng(seed)
        lefts = rng.integers(0, f, size=max_pairs)
        rights = rng.integers(0, f, size=max_pairs)
        keep = lefts != rights
        lefts, rights = lefts[keep], rights[keep]
        for start in range(0, len(lefts), 1 << 16):
            sl = slice(start, start + (1 << 16))
            checker.check(masks[lefts[sl]], masks[rights[sl]],
                          lefts[sl], rights[sl])

    floor_lo, floor_hi = separation_floor(n, k)
    min_distance = (1 - Fraction(checker.worst_num, checker.den)
                    if checker.worst_num >= 0 else Fraction(1))
    return SeparationReport(
        n=n, k=k, family_size=f, pairs_checked=checker.pairs, mode=mode,
        min_distance=min_distance, floor_lo=floor_lo, floor_hi=floor_hi,
        max_shared_on_diff=checker.max_shared,
        min_differing_factors=checker.min_diff_factors)


def certify_cardinality(family: ProductFamily) -> None:
    """Assert |family| > (q/4)^(k/2) exactly (compared via squaring)."""
    q = Fraction(family.inner.size, 4)
    if Fraction(family.size) ** 2 <= q ** family.k:
        raise VerificationError(
            f"family size {family.size} fails the floor (q/4)^(k/2) "
            f"with q={family.inner.size}, k={family.k}")


def certify_equal_volumes(family: ProductFamily) -> Fraction:
    vols = {inner_volume(b) for b in family.inner.bodies}
    if len(vols) != 1:
        raise VerificationError("inner bodies do not share a volume")
    return vols.pop() ** family.k


# ---------------------------------------------------------------------------
# manifests

def format_manifest(family: ProductFamily) -> str:
    lines = [
        MANIFEST_COMMENT,
        f"n={family.n} k={family.k} inner_size={family.inner.size} "
        f"outer_size={family.outer.size}",
    ]
    for w in family.outer.words:
        lines.append(",".join(str(s) for s in w))
    lines.append(codes_mod.format_code(family.inner.code).rstrip("\n"))
    return "\n".join(lines) + "\n"


def write_manifest(family: ProductFamily, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(format_manifest(family))


def parse_manifest(text: str) -> ProductFamily:
    lines = [ln.strip() for ln in text.splitlines()
             if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ParameterError("empty manifest")
    try:
        head = dict(p.split("=", 1) for p in lines[0].split())
        n = int(head["n"])
        k = int(head["k"])
        inner_size = int(head["inner_size"])
        outer_size = int(head["outer_size"])
    except (ValueError, KeyError) as exc:
        raise ParameterError(f"malformed manifest header {lines[0]!r}") from exc
    if len(lines) != 1 + outer_size + 1 + inner_size:
        raise ParameterError(
            f"manifest should hold {outer_size} outer words and a code block of "
            f"{inner_size} words; found {len(lines) - 1} content lines")
    outer_words = []
    for ln in lines[1:1 + outer_size]:
        try:
            outer_words.append(tuple(int(s) for s in ln.split(",")))
        except ValueError as exc:
            raise ParameterError(f"malformed outer word {ln!r}") from exc
    inner_code = codes_mod.parse_code("\n".join(lines[1 + outer_size:]))
    if not isinstance(inner_code, BinaryCode):
        raise ParameterError("inner code block must be binary")
    inner = inner_family_from_code(n, inner_code)
    outer = certified_qary(inner.size, k, outer_words)
    return product_family_from_parts(inner, outer)


def read_manifest(path) -> ProductFamily:
    with open(path) as fh:
        return parse_manifest(fh.read())
