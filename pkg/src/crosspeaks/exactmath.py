"""Exact-rational helpers: certified bounds for e^-x and log2, exact determinants.

Everything here returns Fractions (or ints) with a guaranteed direction of
error, so callers can decide strict inequalities involving transcendental
quantities without trusting floating point.
"""

from __future__ import annotations

from fractions import Fraction
from math import ceil

from .errors import ParameterError


def exp_neg_bounds(x: Fraction, terms: int = 32) -> tuple[Fraction, Fraction]:
    """Rational bounds (lo, hi) with lo <= e^-x <= hi, for rational x >= 0.

    Uses the alternating Taylor series, whose partial sums bracket the limit
    once the term magnitudes decrease; x > 1 is reduced by squaring
    e^-x = (e^-(x/2))^2.
    """
    x = Fraction(x)
    if x < 0:
        raise ParameterError("exp_neg_bounds requires x >= 0")
    if x == 0:
        one = Fraction(1)
        return one, one
    if x > 1:
        lo, hi = exp_neg_bounds(x / 2, terms)
        return lo * lo, hi * hi
    # Terms t_i = (-x)^i / i! strictly decrease in magnitude for 0 < x <= 1,
    # so consecutive partial sums bracket the limit.
    term = Fraction(1)
    total = Fraction(1)
    lo = hi = total
    for i in range(1, terms + 1):
        term = term * -x / i
        total += term
        if term < 0:
            lo = total
        else:
            hi = total
    if lo > hi:
        raise ParameterError("exp_neg_bounds: series did not bracket; raise terms")
    return lo, hi


def compare_exp_neg(x: Fraction, value: Fraction, terms: int = 32) -> int:
    """Sign of (e^-x - value), decided exactly.

    Returns -1, 0 or +1.  A 0 can only happen for x == 0 with value == 1:
    for rational x != 0 the number e^-x is irrational, so after enough terms
    the bracket separates from any rational value.
    """
    x = Fraction(x)
    value = Fraction(value)
    if x == 0:
        return (1 > value) - (1 < value)
    for t in (terms, 2 * terms, 4 * terms, 8 * terms):
        lo, hi = exp_neg_bounds(x, t)
        if lo > value:
            return 1
        if hi < value:
            return -1
    raise ParameterError("compare_exp_neg: could not separate; raise terms")


def floor_log2(value: int) -> int:
    """Exact floor(log2(value)) for a positive integer."""
    if value <= 0:
        raise ParameterError("floor_log2 requires a positive integer")
    return value.bit_length() - 1


def log2_bounds(y: Fraction, precision_bits: int = 10) -> tuple[Fraction, Fraction]:
    """Rational bounds (lo, hi) with lo <= log2(y) <= hi and hi - lo <= 2^(1-precision_bits).

    Works by exact powering: log2(y) = log2(y^M) / M with M = 2^precision_bits,
    and the bit lengths of numerator and denominator of y^M pin log2(y^M)
    within one unit.
    """
    y = Fraction(y)
    if y <= 0:
        raise ParameterError("log2_bounds requires a positive value")
    m = 1 << precision_bits
    z = y ** m
    a, b = z.numerator, z.denominator
    # 2^(bl(a)-1) <= a < 2^bl(a) and likewise for b.
    lo = Fraction(a.bit_length() - 1 - b.bit_length(), m)
    hi = Fraction(a.bit_length() - (b.bit_length() - 1), m)
    return lo, hi


def ceil_fraction(x: Fraction) -> int:
    """Exact ceiling of a rational."""
    return -((-x.numerator) // x.denominator)


def binomial_ball_size(q: int, n: int, r: int) -> int:
    """Number of words within Hamming distance r of a fixed word of length n
    over an alphabet of size q: sum_{i=0}^{r} C(n, i) (q-1)^i, exactly.

    Runs in O(r) big-integer steps via the ratio recurrence, so it stays
    usable for n far beyond what per-term math.comb calls would allow.
    """
    if q < 2 or n < 0:
        raise ParameterError("binomial_ball_size requires q >= 2 and n >= 0")
    r = min(r, n)
    if r < 0:
        return 0
    term = 1  # C(n, 0) (q-1)^0
    total = 1
    for i in range(r):
        term = term * (n - i) * (q - 1) // (i + 1)
        total += term
    return total


def simplex_volume(vertices: list[list[Fraction]]) -> Fraction:
    """Exact volume of the simplex spanned by n+1 points in R^n.

    vol = |det(v_1 - v_0, ..., v_n - v_0)| / n!, with the determinant done by
    fraction-free-enough Gaussian elimination over Fractions.
    """
    m = len(vertices) - 1
    if m < 1 or any(len(v) != m for v in vertices):
        raise ParameterError("simplex_volume needs n+1 points of dimension n")
    rows = [[Fraction(vertices[i + 1][j]) - Fraction(vertices[0][j]) for j in range(m)]
            for i in range(m)]
    det = Fraction(1)
    for col in range(m):
        pivot = next((r for r in range(col, m) if rows[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            rows[col], rows[pivot] = rows[pivot], rows[col]
            det = -det
        det *= rows[col][col]
        inv = 1 / rows[col][col]
        for r in range(col + 1, m):
            factor = rows[r][col] * inv
            if factor == 0:
                continue
            for c in range(col, m):
                rows[r][c] -= factor * rows[col][c]
    fact = 1
    for i in range(2, m + 1):
        fact *= i
    return abs(det) / fact
