"""Error-correcting codes built by greedy scan, with exhaustively certified
minimum distance.

gv_greedy scans all q^length words in lexicographic order and keeps every
word at Hamming distance >= min_dist from everything kept so far.  The
result is a maximal code, so its size meets the classical floor
q^length / V_q(length, min_dist - 1), which is asserted on every build.
complement_extend doubles a binary code's length by appending each word's
complement, which doubles the absolute minimum distance and makes every
word constant-weight length/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceededError, ParameterError, VerificationError
from .exactmath import binomial_ball_size

DEFAULT_ENUMERATION_BUDGET = 1 << 24
DEFAULT_PAIR_BUDGET = 50_000_000
_BLOCK = 4096


def v_q(q: int, n: int, r: int) -> int:
    """Hamming-ball size: sum_{i=0}^{r} C(n,i) (q-1)^i, exact."""
    return binomial_ball_size(q, n, r)


def gv_floor(q: int, length: int, min_dist: int) -> int:
    """ceil(q^length / V_q(length, min_dist - 1)): the size any maximal
    min_dist-separated code must reach."""
    ball = v_q(q, length, min_dist - 1)
    return -((-(q ** length)) // ball)


def _validate_words(q: int, length: int, words) -> tuple[tuple[int, ...], ...]:
    out = []
    seen = set()
    for w in words:
        w = tuple(int(s) for s in w)
        if len(w) != length:
            raise ParameterError(f"word {w} has length {len(w)}, expected {length}")
        if any(not 0 <= s < q for s in w):
            raise ParameterError(f"word {w} has symbols outside [0, {q})")
        if w in seen:
            raise ParameterError(f"repeated word {w}")
        seen.add(w)
        out.append(w)
    return tuple(out)


def min_distance_exhaustive(words, *, pair_budget: int = DEFAULT_PAIR_BUDGET) -> int:
    """Exact minimum pairwise Hamming distance over all word pairs."""
    words = [tuple(w) for w in words]
    m = len(words)
    if m < 2:
        raise ParameterError("minimum distance needs at least two words")
    if m * (m - 1) // 2 > pair_budget:
        raise BudgetExceededError(
            f"{m} words means {m*(m-1)//2} pairs, over the budget of {pair_budget}")
    arr = np.array(words, dtype=np.uint8)
    best = arr.shape[1] + 1
    for i in range(m - 1):
        d = int(np.count_nonzero(arr[i + 1:] != arr[i], axis=1).min())
        if d < best:
            best = d
            if best == 0:
                break
    return best


@dataclass(frozen=True)
class BinaryCode:
    """A set of distinct binary words with exhaustively certified min distance."""

    length: int
    words: tuple[tuple[int, ...], ...]
    min_distance: int

    @property
    def size(self) -> int:
        return len(self.words)

    def word_array(self) -> np.ndarray:
        return np.array(self.words, dtype=np.uint8)


@dataclass(frozen=True)
class QaryCode:
    """A set of distinct q-ary words with exhaustively certified min distance."""

    alphabet_size: int
    length: int
    words: tuple[tuple[int, ...], ...]
    min_distance: int

    @property
    def size(self) -> int:
        return len(self.words)

    def word_array(self) -> np.ndarray:
        return np.array(self.words, dtype=np.uint16)


def certified_binary(length: int, words, *, pair_budget: int = DEFAULT_PAIR_BUDGET) -> BinaryCode:
    words = _validate_words(2, length, words)
    dmin = min_distance_exhaustive(words, pair_budget=pair_budget)
    return BinaryCode(length=length, words=words, min_distance=dmin)


def certified_qary(q: int, length: int, words, *, pair_budget: int = DEFAULT_PAIR_BUDGET) -> QaryCode:
    if q < 2:
        raise ParameterError("alphabet size must be >= 2")
    words = _validate_words(q, length, words)
    dmin = min_distance_exhaustive(words, pair_budget=pair_budget)
    return QaryCode(alphabet_size=q, length=length, words=words, min_distance=dmin)


def _lex_block(q: int, length: int, start: int, stop: int) -> np.ndarray:
    """Words number start..stop-1 in lexicographic order, as a (stop-start,
    length) uint8 block.  Lexicographic order over symbol tuples equals
    numeric order of the mixed-radix value with coordinate 0 most significant."""
    idx = np.arange(start, stop, dtype=np.int64)
    cols = np.empty((stop - start, length), dtype=np.uint8)
    for pos in range(length):
        cols[:, pos] = (idx // q ** (length - 1 - pos)) % q
    return cols


def gv_greedy(q: int, length: int, min_dist: int, *,
              enumeration_budget: int = DEFAULT_ENUMERATION_BUDGET,
              pair_budget: int = DEFAULT_PAIR_BUDGET):
    """Deterministic greedy code: scan all q^length words in lexicographic
    order, keep each word whose distance to everything kept is >= min_dist.

    Returns a BinaryCode when q == 2, else a QaryCode, with the minimum
    distance re-certified exhaustively.  The size floor
    q^length / V_q(length, min_dist - 1) is a hard assertion.
    """
    if q < 2 or length < 1 or not 1 <= min_dist <= length:
        raise ParameterError(f"bad greedy-code parameters q={q} len={length} d={min_dist}")
    total = q ** length
    if total > enumeration_budget:
        raise BudgetExceededError(
            f"q^length = {total} exceeds the enumeration budget {enumeration_budget}; "
            "supply a smaller instance or an explicit code")

    kept = np.empty((256, length), dtype=np.uint8)
    m = 0
    for start in range(0, total, _BLOCK):
        block = _lex_block(q, length, start, min(start + _BLOCK, total))
        alive = np.ones(len(block), dtype=bool)
        # filter against previously kept words, in chunks to bound memory
        for cstart in range(0, m, 1024):
            chunk = kept[cstart:min(cstart + 1024, m)]
            d = np.count_nonzero(block[:, None, :] != chunk[None, :, :], axis=2)
            alive &= (d >= min_dist).all(axis=1)
            if not alive.any():
                break
        m_start = m
        for row in block[alive]:
            if m > m_start:
                d = np.count_nonzero(kept[m_start:m] != row, axis=1)
                if (d < min_dist).any():
                    continue
            if m == len(kept):
                kept = np.concatenate([kept, np.empty_like(kept)])
            kept[m] = row
            m += 1

    words = tuple(tuple(int(s) for s in kept[i]) for i in range(m))
    code = (certified_binary(length, words, pair_budget=pair_budget) if q == 2
            else certified_qary(q, length, words, pair_budget=pair_budget))
    if m > 1 and code.min_distance < min_dist:
        raise VerificationError("greedy code certification came in under the target distance")
    floor = gv_floor(q, length, min_dist)
    if m < floor:
        raise VerificationError(
            f"greedy code of size {m} fell below the guaranteed floor {floor}")
    return code


def complement_extend(code: BinaryCode) -> BinaryCode:
    """Map every word c to (c, complement(c)).  Output words are constant
    weight length/2 (in the doubled length) and the minimum distance doubles,
    since flipped and unflipped positions each contribute once."""
    words = tuple(w + tuple(1 - b for b in w) for w in code.words)
    out = certified_binary(2 * code.length, words)
    if out.size >= 2 and out.min_distance != 2 * code.min_distance:
        raise VerificationError(
            f"complement extension produced distance {out.min_distance}, "
            f"expected {2 * code.min_distance}")
    return out


def word_to_mask(word) -> int:
    """Binary word (bit per orthant, coordinate i = orthant i) -> bitmask int."""
    m = 0
    for i, b in enumerate(word):
        if b:
            m |= 1 << i
    return m


# ---------------------------------------------------------------------------
# serialization: header "q=<int> len=<int> dmin=<int>", one word per line,
# bit-strings for q=2, comma-separated symbol indices otherwise.

def format_code(code) -> str:
    q = 2 if isinstance(code, BinaryCode) else code.alphabet_size
    lines = [f"q={q} len={code.length} dmin={code.min_distance}"]
    for w in code.words:
        if q == 2:
            lines.append("".join(str(b) for b in w))
        else:
            lines.append(",".join(str(s) for s in w))
    return "\n".join(lines) + "\n"


def _parse_header(line: str) -> tuple[int, int, int]:
    try:
        parts = dict(p.split("=", 1) for p in line.split())
        return int(parts["q"]), int(parts["len"]), int(parts["dmin"])
    except (ValueError, KeyError) as exc:
        raise ParameterError(f"malformed code header {line!r}") from exc


def parse_code(text: str):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParameterError("empty code text")
    q, length, dmin = _parse_header(lines[0])
    words = []
    for ln in lines[1:]:
        ln = ln.strip()
        if q == 2:
            if len(ln) != length or any(c not in "01" for c in ln):
                raise ParameterError(f"malformed binary word {ln!r}")
            words.append(tuple(int(c) for c in ln))
        else:
            words.append(tuple(int(s) for s in ln.split(",")))
    code = (certified_binary(length, words) if q == 2
            else certified_qary(q, length, words))
    if code.size >= 2 and code.min_distance != dmin:
        raise VerificationError(
            f"stored dmin={dmin} but certification found {code.min_distance}")
    return code
