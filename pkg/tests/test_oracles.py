import itertools
import math

import numpy as np
import pytest
from scipy.stats import chisquare, ks_2samp

from crosspeaks.errors import ParameterError
from crosspeaks.family import ProductBody
from crosspeaks.geometry import (OrthantSign, RegionLabel, bare_body,
                                 body_from_mask, classify_batch,
                                 core_label_value, full_body,
                                 sample_inner_batch)
from crosspeaks.oracles import (DiscreteRandomAnswer, MembershipQuery,
                                Transcript, answer_space, answer_space_size,
                                continuous_membership, continuous_random,
                                continuous_random_batch, discrete_membership,
                                discrete_random, discrete_random_batch,
                                parse_transcript_log,
                                simulate_continuous_from_discrete,
                                simulate_batch)


def _product(mask_per_factor, n=3):
    return ProductBody(tuple(body_from_mask(n, m) for m in mask_per_factor))


# ---------------------------------------------------------------------------
# discrete random oracle: exact region frequencies

def test_discrete_frequencies_full_factor(rng):
    # full body at n=3: core 2/3, each peak 1/24
    body = ProductBody((full_body(3),))
    draws = discrete_random_batch(body, 120_000, rng)[:, 0]
    counts = np.bincount(draws, minlength=9)[:9]
    expected = np.array([1 / 24] * 8 + [2 / 3]) * len(draws)
    assert chisquare(counts, expected).pvalue > 1e-3


def test_discrete_frequencies_four_peaks(rng):
    # 4-peak body: core 4/5, each present peak exactly 1/20
    body = ProductBody((body_from_mask(3, 0x0F),))
    draws = discrete_random_batch(body, 200_000, rng)[:, 0]
    count = len(draws)
    for index in range(4):
        freq = float(np.mean(draws == index))
        sigma = math.sqrt(0.05 * 0.95 / count)
        assert abs(freq - 1 / 20) < 5 * sigma
    # absent peaks never show up
    assert not np.isin(draws, [4, 5, 6, 7]).any()


def test_discrete_scalar_never_outside(rng):
    body = _product((0x0F, 0xF0))
    for _ in range(300):
        ans = discrete_random(body, rng)
        assert ans.k == 2
        for j, lab in enumerate(ans.labels):
            assert not lab.is_outside
            if lab.is_peak:
                assert body.factors[j].has_peak(lab.orthant.index)


# ---------------------------------------------------------------------------
# continuous oracle

def test_continuous_peak_block_share(rng):
    # full factor: peaks together carry 1/3 of the volume
    body = ProductBody((full_body(3),))
    pts = continuous_random_batch(body, 100_000, rng)
    labels = classify_batch(3, pts)
    frac = float(np.mean(labels < core_label_value(3)))
    assert abs(frac - 1 / 3) < 5 * math.sqrt((1 / 3) * (2 / 3) / len(pts))


def test_continuous_mean_near_zero(rng):
    # the all-peaks body is centrally symmetric, so every coordinate mean is 0
    body = ProductBody((full_body(3),))
    pts = continuous_random_batch(body, 1_000_000, rng)
    sigma = pts.std(axis=0) / math.sqrt(len(pts))
    assert np.all(np.abs(pts.mean(axis=0)) < 5 * sigma)


def test_continuous_membership_literals():
    body = _product((0x0F, 0xFF))
    assert continuous_membership(body, [0.0] * 6)
    # second block outside its factor
    assert not continuous_membership(body, [0.0, 0.0, 0.0, 0.9, 0.9, 0.9])
    # first block in an absent peak of factor 0
    assert not continuous_membership(body, [-0.5, -0.5, 0.45, 0.0, 0.0, 0.0])
    with pytest.raises(ParameterError):
        continuous_membership(body, [0.0] * 5)


def test_continuous_random_points_are_members(rng):
    body = _product((0x0F, 0x33, 0xC3))
    for _ in range(100):
        x = continuous_random(body, rng)
        assert x.shape == (9,)
        assert continuous_membership(body, x)


# ---------------------------------------------------------------------------
# membership oracle

def test_discrete_membership_literals():
    body = _product((0x0F, 0x0F))
    assert discrete_membership(body, MembershipQuery((0, 7))) == (True, False)
    assert discrete_membership(body, MembershipQuery((3, 2))) == (True, True)
    assert discrete_membership(body, MembershipQuery((7, 4))) == (False, False)
    with pytest.raises(ParameterError):
        discrete_membership(body, MembershipQuery((0,)))
    with pytest.raises(ParameterError):
        discrete_membership(body, MembershipQuery((0, 8)))


# ---------------------------------------------------------------------------
# simulation: discrete draw -> continuous point

def test_simulate_core_label_matches_core_sampler(rng):
    n = 3
    count = 60_000
    labels = np.full((count, 1), core_label_value(n), dtype=np.int64)
    sim = simulate_batch(n, labels, rng)
    direct, _ = sample_inner_batch(bare_body(n), count, rng)
    for axis in range(n):
        assert ks_2samp(sim[:, axis], direct[:, axis]).pvalue > 1e-3


def test_simulate_peak_label_classifies_back(rng):
    n = 3
    for orthant in (0, 5, 7):
        labels = np.full((20_000, 1), orthant, dtype=np.int64)
        sim = simulate_batch(n, labels, rng)
        back = classify_batch(n, sim)
        assert np.all(back == orthant)


def test_simulate_scalar_matches_label(rng):
    ans = DiscreteRandomAnswer(3, (RegionLabel.core(),
                                   RegionLabel.peak(OrthantSign(3, 6))))
    for _ in range(200):
        x = simulate_continuous_from_discrete(ans, rng)
        assert x.shape == (6,)
        labs = classify_batch(3, x.reshape(2, 3))
        assert labs[0] == core_label_value(3)
        assert labs[1] == 6


def test_simulation_pipeline_matches_continuous(rng):
    # discrete draw + simulation must be indistinguishable from the
    # continuous oracle, coordinate by coordinate
    body = _product((0x0F, 0x3C))
    count = 80_000
    sim = simulate_batch(3, discrete_random_batch(body, count, rng), rng)
    direct = continuous_random_batch(body, count, rng)
    for axis in range(6):
        assert ks_2samp(sim[:, axis], direct[:, axis]).pvalue > 1e-3


# ---------------------------------------------------------------------------
# answer space

def test_answer_space_enumeration():
    for n, k in [(2, 1), (2, 2), (3, 1), (3, 2)]:
        texts = {a.text() for a in answer_space(n, k)}
        assert len(texts) == answer_space_size(n, k)
        assert answer_space_size(n, k) == ((1 << n) + 1) ** k


def test_answer_validation():
    with pytest.raises(ParameterError):
        DiscreteRandomAnswer(3, ())
    with pytest.raises(ParameterError):
        DiscreteRandomAnswer(3, (RegionLabel.outside(),))
    with pytest.raises(ParameterError):
        DiscreteRandomAnswer(3, (RegionLabel.peak(OrthantSign(2, 1)),))
    with pytest.raises(ParameterError):
        MembershipQuery(())


# ---------------------------------------------------------------------------
# transcripts

def test_transcript_roundtrip():
    t = Transcript()
    t.record_random(DiscreteRandomAnswer(
        3, (RegionLabel.core(), RegionLabel.peak(OrthantSign(3, 7)))))
    t.record_membership(MembershipQuery((0, 5)), (True, False))
    log = t.to_log()
    assert log == "R C,P7\nM 0,5 -> true,false"
    back = parse_transcript_log(3, log)
    assert back.to_log() == log
    assert back.query_count == 2


def test_transcript_parse_errors():
    with pytest.raises(ParameterError):
        parse_transcript_log(3, "R C,X1")
    with pytest.raises(ParameterError):
        parse_transcript_log(3, "M 0,5 -> yes,no")
    with pytest.raises(ParameterError):
        parse_transcript_log(3, "Z what")
    with pytest.raises(ParameterError):
        parse_transcript_log(2, "R P7")  # orthant 7 needs n >= 3


def test_identical_seeds_identical_transcripts():
    body = _product((0x0F, 0x33))
    logs = []
    for _ in range(2):
        rng = np.random.default_rng(424242)
        t = Transcript()
        for _ in range(50):
            t.record_random(discrete_random(body, rng))
        q = MembershipQuery((2, 3))
        t.record_membership(q, discrete_membership(body, q))
        logs.append(t.to_log())
    assert logs[0] == logs[1]
