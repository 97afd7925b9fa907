"""Query games between a hidden family member and a learner, plus the exact
counting bounds that limit any learner.

A game hides a uniformly drawn family body behind the discrete oracles and
lets the learner spend at most q queries before naming a hypothesis.  The
hypothesis succeeds if its normalized distance to the hidden body is at most
epsilon; with 2*epsilon below the family's separation floor, at most one
body can ever be that close, so success coincides with exact identification
for in-family hypotheses.

The fan-out bound: q queries can split the family into at most
(2^n + 1)^(kq) classes, so any learner's success probability is at most
(2^n + 1)^(kq) / family_size.  choose_parameters and query_lower_bound
instantiate the bound for a target dimension d = kn, using exact
big-integer code-size floors where they are computable and certified
power-of-two floors beyond that.

Randomness: every run derives independent per-trial streams from the master
seed via numpy SeedSequence.spawn (trial t gets child t, split again into
hidden-draw, oracle, and learner streams), so trial outcomes are
order-independent and reproducible, and two runs that differ only in the
query budget see identical hidden bodies and oracle draw prefixes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BudgetExceededError, ParameterError, VerificationError
from .exactmath import binomial_ball_size, ceil_fraction, log2_bounds
from .family import ProductBody, ProductFamily, exact_distance, separation_holds
from .oracles import (DiscreteRandomAnswer, MembershipQuery, Transcript,
                      answer_space_size, discrete_membership, discrete_random)


# ---------------------------------------------------------------------------
# oracle sessions and consistency filtering

class OracleSession:
    """Budgeted access to one hidden body's discrete oracles; every query is
    recorded on the transcript."""

    def __init__(self, body: ProductBody, budget: int, rng: np.random.Generator):
        if budget < 0:
            raise ParameterError("query budget must be >= 0")
        self._body = body
        self.budget = budget
        self._rng = rng
        self.transcript = Transcript()

    @property
    def remaining(self) -> int:
        return self.budget - self.transcript.query_count

    def _spend(self) -> None:
        if self.remaining <= 0:
            raise BudgetExceededError("query budget exhausted")

    def random(self) -> DiscreteRandomAnswer:
        self._spend()
        answer = discrete_random(self._body, self._rng)
        self.transcript.record_random(answer)
        return answer

    def membership(self, indices) -> tuple[bool, ...]:
        self._spend()
        query = MembershipQuery(tuple(int(i) for i in indices))
        answers = discrete_membership(self._body, query)
        self.transcript.record_membership(query, answers)
        return answers


def _consistent_from_masks(transcript: Transcript, masks: np.ndarray) -> np.ndarray:
    """Boolean row mask over the family's (size, k) peak-mask matrix."""
    k = masks.shape[1]
    required = [0] * k             # per factor: peaks that must be present
    forced: dict[tuple[int, int], bool] = {}   # (factor, index) -> answer
    for e in transcript.entries:
        if e[0] == "R":
            for j, lab in enumerate(e[1].labels):
                if lab.is_peak:
                    required[j] |= 1 << lab.orthant.index
        else:
            for j, (idx, ans) in enumerate(zip(e[1].indices, e[2])):
                prev = forced.get((j, idx))
                if prev is not None and prev != ans:
                    return np.zeros(len(masks), dtype=bool)
                forced[(j, idx)] = ans
    alive = np.ones(len(masks), dtype=bool)
    for j in range(k):
        if required[j]:
            alive &= (masks[:, j] & required[j]) == required[j]
    for (j, idx), ans in forced.items():
        bit = (masks[:, j] >> idx) & 1
        alive &= bit == (1 if ans else 0)
    return alive


def consistent_indices(transcript: Transcript, family: ProductFamily) -> np.ndarray:
    """Indices of family bodies consistent with every transcript answer:
    observed peaks present, membership bits matching."""
    return np.flatnonzero(_consistent_from_masks(transcript, family.mask_matrix()))


def ml_consistency_learner(transcript: Transcript, family: ProductFamily,
                           rng: np.random.Generator | None = None) -> int:
    """Lowest-index family body consistent with the transcript (all
    consistent bodies carry equal posterior mass under a uniform prior, so
    any fixed tie-break is maximum-likelihood; pass rng for a seeded uniform
    tie-break instead of index order)."""
    idx = consistent_indices(transcript, family)
    if len(idx) == 0:
        raise VerificationError("no family body is consistent with the transcript")
    if rng is None:
        return int(idx[0])
    return int(idx[int(rng.integers(len(idx)))])


# ---------------------------------------------------------------------------
# learners

class RandomGuessLearner:
    """Ignores the oracles entirely; guesses a uniform family index."""

    def play(self, session: OracleSession, family: ProductFamily,
             rng: np.random.Generator) -> int:
        return int(rng.integers(family.size))


class MLConsistencyLearner:
    """Consistency learner with a query policy:

    policy="random"  spend the whole budget on random-oracle draws (learning
                     from samples); observed peaks accumulate monotonically,
                     so a longer budget always refines the consistent set
    policy="census"  sweep membership queries (j, j, ..., j) over the 2^n
                     peak indices; 2^n answered queries pin every factor
    """

    def __init__(self, policy: str = "random", shuffle: bool = False):
        if policy not in ("random", "census"):
            raise ParameterError(f"unknown policy {policy!r}")
        self.policy = policy
        self.shuffle = shuffle
        self._mask_cache: tuple[int, np.ndarray] | None = None

    def _masks(self, family: ProductFamily) -> np.ndarray:
        if self._mask_cache is None or self._mask_cache[0] != id(family):
            self._mask_cache = (id(family), family.mask_matrix())
        return self._mask_cache[1]

    def play(self, session: OracleSession, family: ProductFamily,
             rng: np.random.Generator) -> int:
        if self.policy == "random":
            while session.remaining > 0:
                session.random()
        else:
            for index in range(1 << family.n):
                if session.remaining <= 0:
                    break
                session.membership((index,) * family.k)
        alive = _consistent_from_masks(session.transcript, self._masks(family))
        idx = np.flatnonzero(alive)
        if len(idx) == 0:
            raise VerificationError("no family body is consistent with the transcript")
        if self.shuffle:
            return int(idx[int(rng.integers(len(idx)))])
        return int(idx[0])


# ---------------------------------------------------------------------------
# the game

@dataclass(frozen=True)
class GameConfig:
    """One experiment: which family, how many queries, what counts as close.

    Requires 2*epsilon < 1 - e^(-k/(16n)) (decided exactly), so that an
    epsilon-ball around any hypothesis contains at most one family body and
    per-trial success is unambiguous.
    """

    family: ProductFamily
    query_budget: int
    epsilon: Fraction
    trials: int
    seed: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        if self.query_budget < 0:
            raise ParameterError("query budget must be >= 0")
        if self.trials < 1:
            raise ParameterError("need at least one trial")
        if self.epsilon <= 0:
            raise ParameterError("epsilon must be positive")
        if not separation_holds(self.family.n, self.family.k, self.epsilon):
            raise ParameterError(
                "2*epsilon must stay under the family separation floor "
                f"1 - e^(-k/(16n)) for (n, k) = ({self.family.n}, {self.family.k})")


@dataclass(frozen=True)
class GameStats:
    trials: int
    successes: int
    exact_identifications: int
    budget_violations: int

    def __post_init__(self) -> None:
        if self.exact_identifications > self.successes:
            raise VerificationError("identification implies success")

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials

    @property
    def confidence_radius(self) -> float:
        """95% normal-approximation radius for the success rate."""
        p = self.success_rate
        return 1.96 * math.sqrt(p * (1 - p) / self.trials)


def run_game(config: GameConfig, learner) -> GameStats:
    """Play config.trials independent rounds of hide-and-identify.

    Each trial draws a hidden body uniformly, gives the learner a budgeted
    oracle session, and scores the returned hypothesis (a family index, or
    any ProductBody) by exact distance.  A learner that overdraws its budget
    forfeits the trial; this is counted separately.
    """
    family = config.family
    master = np.random.SeedSequence(config.seed)
    successes = exact_ids = violations = 0
    for trial_seq in master.spawn(config.trials):
        hidden_seq, oracle_seq, learner_seq = trial_seq.spawn(3)
        hidden_index = int(np.random.default_rng(hidden_seq).integers(family.size))
        hidden = family.body(hidden_index)
        session = OracleSession(hidden, config.query_budget,
                                np.random.default_rng(oracle_seq))
        try:
            hypothesis = learner.play(session, family,
                                      np.random.default_rng(learner_seq))
        except BudgetExceededError:
            violations += 1
            continue
        if isinstance(hypothesis, (int, np.integer)):
            identified = int(hypothesis) == hidden_index
            hyp_body = None if identified else family.body(int(hypothesis))
        else:
            hyp_body = hypothesis
            identified = exact_distance(hyp_body, hidden) == 0
        if identified:
            exact_ids += 1
            successes += 1
        elif exact_distance(hyp_body, hidden) <= config.epsilon:
            successes += 1
    return GameStats(trials=config.trials, successes=successes,
                     exact_identifications=exact_ids, budget_violations=violations)


def success_upper_bound(n: int, k: int, q: int, family_size: int,
                        epsilon: Fraction | None = None) -> Fraction:
    """min(1, (2^n + 1)^(kq) / family_size), exact.

    Valid as a success bound only under the separation condition
    2*epsilon < 1 - e^(-k/(16n)) (each answer tuple commits to at most one
    body).  Pass epsilon to have that precondition decided exactly and
    refused when unmet; without it the caller owns the precondition.
    """
    if q < 0 or family_size < 1:
        raise ParameterError("need q >= 0 and a non-empty family")
    if epsilon is not None and not separation_holds(n, k, Fraction(epsilon)):
        raise ParameterError(
            "success_upper_bound needs 2*epsilon below the separation floor")
    return min(Fraction(1), Fraction(answer_space_size(n, k) ** q, family_size))


# ---------------------------------------------------------------------------
# parameter selection for a target dimension

@dataclass(frozen=True)
class ParameterChoice:
    d: int
    epsilon: Fraction
    n: int
    k: int
    sqrt_ratio: float              # sqrt(d / ln(1/(1-2 eps)))
    separation_satisfied: bool     # exact decision of 2 eps < 1 - e^(-k/(16n))


def choose_parameters(d: int, epsilon) -> ParameterChoice:
    """Split a target dimension d into k factors of dimension n:
    n = smallest power of two >= sqrt(d / ln(1/(1 - 2 eps))), k = d/n.

    Requires d a power of two and 8/d <= epsilon <= 1/8.  The chain
    2 <= sqrt(d/L) <= n < 4 sqrt(d/L) <= d is asserted.  Note the selection
    maximizes the answer-space blowup 2^n; at this n the separation
    condition 2 eps < 1 - e^(-k/(16n)) generally does NOT hold (it would
    need n about 4x smaller), so it is reported, not asserted.
    """
    epsilon = Fraction(epsilon)
    if d < 1 or d & (d - 1):
        raise ParameterError(f"d={d} must be a power of two")
    if not Fraction(8, d) <= epsilon <= Fraction(1, 8):
        raise ParameterError(f"epsilon={epsilon} outside [8/d, 1/8] for d={d}")
    big_l = math.log(1 / float(1 - 2 * epsilon))
    x = math.sqrt(d / big_l)
    n = 1
    while n < x:
        n <<= 1
    if not (2 <= x <= n < 4 * x <= d):
        raise VerificationError(
            f"parameter chain broke for d={d}, eps={epsilon}: x={x}, n={n}")
    k = d // n
    return ParameterChoice(d=d, epsilon=epsilon, n=n, k=k, sqrt_ratio=x,
                           separation_satisfied=separation_holds(n, k, epsilon))


# ---------------------------------------------------------------------------
# query lower bound

@dataclass(frozen=True)
class QueryBound:
    d: int
    epsilon: Fraction
    delta: Fraction
    n: int
    k: int
    q_floor: int                 # least q with (2^n+1)^(kq) >= (1-delta) * bound
    regime: str                  # "explicit" | "exact" | "certified"
    family_bound_log2: float     # log2 of the family-size lower bound used
    asymptotic_log2: float       # sqrt(d / ln(1/(1-2 eps))), for context


def _least_q(satisfies, cap: int = 1 << 40) -> int:
    if satisfies(0):
        return 0
    hi = 1
    while not satisfies(hi):
        hi *= 2
        if hi > cap:
            raise BudgetExceededError("query bound search exceeded its cap")
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if satisfies(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _least_q_certified(n: int, k: int, exponent: int, one_minus: Fraction) -> int:
    """Least q with (2^n + 1)^(kq) >= one_minus * 2^exponent, certified by
    rational log2 bracketing: n < log2(2^n + 1) <= n + 3/2^(n+1)."""
    tau = Fraction(3, 1 << (n + 1))
    for precision in (10, 14, 18):
        lg_lo, lg_hi = log2_bounds(one_minus, precision)
        target_lo = exponent + lg_lo
        target_hi = exponent + lg_hi
        if target_hi <= 0:
            return 0
        q = max(1, ceil_fraction(target_hi / (k * n)))
        if (n + tau) * k * (q - 1) < target_lo:
            return q
    raise ParameterError("could not certify the minimal q; target sits on a boundary")


def query_lower_bound(d: int, epsilon, delta=Fraction(1, 2), *,
                      family_size: int | None = None,
                      exact_term_budget: int = 1 << 14) -> QueryBound:
    """Least q such that (2^n+1)^(kq) >= (1 - delta) * family-size bound:
    below it, any learner's success probability on the (n, k) family falls
    under 1 - delta.

    The family-size lower bound is, in order of preference: an explicitly
    supplied size; the exact big-integer floor (ceil(2^m / V_2(m, r)) / 4)^(k/2)
    with m = 2^(n-1) and r = ceil(2^n/8) - 1 when the ball sum is within
    exact_term_budget terms; else the certified floor 2^((3m/16 - 2) k / 2)
    from the entropy bound V_2(m, r) <= 2^(13m/16) for r <= m/4.
    """
    choice = choose_parameters(d, epsilon)
    n, k = choice.n, choice.k
    delta = Fraction(delta)
    if not 0 <= delta < 1:
        raise ParameterError("delta must lie in [0, 1)")
    one_minus = 1 - delta
    base = (1 << n) + 1
    a, b = one_minus.numerator, one_minus.denominator

    if family_size is not None:
        if family_size < 1:
            raise ParameterError("family_size must be positive")
        regime = "explicit"
        q_floor = _least_q(lambda q: b * base ** (k * q) >= a * family_size)
        bound_log2 = math.log2(family_size)
    else:
        m = 1 << (n - 1)
        radius = -((-(1 << n)) // 8) - 1
        if radius + 1 <= exact_term_budget:
            regime = "exact"
            ball = binomial_ball_size(2, m, radius)
            g = ((1 << m) + ball - 1) // ball
            q_floor = _least_q(
                lambda q: (base ** (k * q)) ** 2 * b * b * 4 ** k >= a * a * g ** k)
            bound_log2 = (g.bit_length() - 1 - 2) * (k / 2)
        else:
            if 4 * radius > m:
                raise ParameterError("entropy certificate needs r <= m/4")
            regime = "certified"
            exponent = ((3 * m) // 16 - 2) * k // 2
            q_floor = _least_q_certified(n, k, exponent, one_minus)
            bound_log2 = float(exponent)

    return QueryBound(d=d, epsilon=choice.epsilon, delta=delta, n=n, k=k,
                      q_floor=q_floor, regime=regime,
                      family_bound_log2=bound_log2,
                      asymptotic_log2=choice.sqrt_ratio)


# ---------------------------------------------------------------------------
# experiment reports

RESULTS_CSV_COLUMNS = ("n", "k", "d", "family_size", "q", "trials", "successes",
                       "success_rate", "upper_bound", "seed")


def game_result_row(config: GameConfig, stats: GameStats) -> dict:
    family = config.family
    bound = success_upper_bound(family.n, family.k, config.query_budget,
                                family.size, config.epsilon)
    return {
        "n": family.n,
        "k": family.k,
        "d": family.dimension,
        "family_size": family.size,
        "q": config.query_budget,
        "trials": stats.trials,
        "successes": stats.successes,
        "success_rate": repr(stats.success_rate),
        "upper_bound": repr(float(bound)),
        "seed": config.seed,
    }


def write_results_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=RESULTS_CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
