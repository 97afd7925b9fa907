import math
from fractions import Fraction

import numpy as np
import pytest

from crosspeaks.errors import ParameterError
from crosspeaks.exactmath import simplex_volume
from crosspeaks.geometry import (InnerBody, OrthantSign, RegionLabel,
                                 bare_body, body_from_mask, classify_batch,
                                 classify_point, classify_scaled_batch,
                                 core_label_value, full_body, index_to_signs,
                                 inner_volume, label_from_value, make_geometry,
                                 membership_batch, membership_inner,
                                 membership_q_oracle, membership_scaled_batch,
                                 outside_label_value, parse_inner_body,
                                 peak_vertices, q_halfspace_normals,
                                 q_membership_scaled_batch, region_expectations,
                                 sample_inner, sample_inner_batch,
                                 signs_to_index)

F = Fraction


# ---------------------------------------------------------------------------
# constants

def test_geometry_constants_small():
    g2 = make_geometry(2)
    assert g2.alpha == 2
    assert g2.core_volume == 2
    # four peaks complete the diamond to the square [-1,1]^2 of area 4
    assert g2.peak_volume == F(1, 2)
    assert g2.core_volume + 4 * g2.peak_volume == 4

    g3 = make_geometry(3)
    assert g3.alpha == F(3, 2)
    assert g3.core_volume == F(4, 3)
    assert g3.peak_volume == F(1, 12)


def test_geometry_identities_range():
    for n in range(2, 9):
        g = make_geometry(n)
        assert g.alpha == F(n, n - 1)
        assert g.core_volume == F(2 ** n, math.factorial(n))
        assert g.peak_volume == g.core_volume / ((1 << n) * (n - 1))
        assert (1 << n) * g.peak_volume == g.core_volume / (n - 1)


def test_total_peak_share():
    # all peaks together add vol/(n-1); at n=5 that is a quarter of the core
    g = make_geometry(5)
    assert (1 << 5) * g.peak_volume / g.core_volume == F(1, 4)


def test_peak_volume_determinant_oracle():
    # independent route: volume of conv{s_i e_i} u {alpha * centroid}
    for n in (2, 3, 4):
        g = make_geometry(n)
        for index in range(1 << n):
            vertices = peak_vertices(n, OrthantSign(n, index))
            assert simplex_volume(vertices) == g.peak_volume


def test_make_geometry_rejects_n1():
    with pytest.raises(ParameterError):
        make_geometry(1)


# ---------------------------------------------------------------------------
# orthant encoding

def test_orthant_roundtrip():
    for n in (2, 3, 4):
        for index in range(1 << n):
            signs = index_to_signs(n, index)
            assert all(s in (-1, 1) for s in signs)
            assert signs_to_index(signs) == index
    # bit i set means coordinate i positive
    assert index_to_signs(3, 0b101) == (1, -1, 1)


def test_orthant_bad_values():
    with pytest.raises(ParameterError):
        OrthantSign(3, 8)
    with pytest.raises(ParameterError):
        signs_to_index((1, 0, 1))


# ---------------------------------------------------------------------------
# classification

def test_classify_literals():
    assert classify_point(3, (F(1, 5), F(-3, 10), F(1, 10))).is_core
    lab = classify_point(3, (F(1, 2), F(2, 5), F(3, 10)))
    assert lab.is_peak and lab.orthant.index == 0b111
    assert classify_point(3, (F(9, 10), F(9, 10), F(1, 10))).is_outside


def test_classify_zero_coordinate_rule():
    # a zero coordinate with |x| sum over 1 can never be in a peak
    assert classify_point(3, (F(9, 10), F(9, 10), F(0))).is_outside
    assert classify_point(2, (F(1), F(0))).is_core  # boundary stays closed


def test_classify_boundary_ties():
    # ties classify into the closed region: sum = 1 -> Core,
    # sum = 1 + min -> still Peak
    assert classify_point(3, (F(1, 2), F(1, 4), F(1, 4))).is_core
    lab = classify_point(3, (F(1, 2), F(1, 2), F(1, 4)))
    assert lab.is_peak and lab.orthant.signs == (1, 1, 1)
    apex = classify_point(3, (F(1, 2), F(1, 2), F(1, 2)))
    assert apex.is_peak  # alpha * centroid, the top of the (+,+,+) peak


def test_classify_matches_batch(rng):
    n = 3
    pts = rng.uniform(-1.3, 1.3, size=(300, n))
    labels = classify_batch(n, pts)
    for row, lab in zip(pts, labels):
        want = classify_point(n, [float(c) for c in row])
        assert label_from_value(n, int(lab)).text() == want.text()


def test_classify_scaled_matches_exact(rng):
    n, scale = 3, 1 << 12
    coords = rng.integers(-scale - scale // 2, scale + scale // 2, size=(400, n))
    labels = classify_scaled_batch(n, coords.astype(np.int64), scale)
    for row, lab in zip(coords, labels):
        want = classify_point(n, [F(int(c), scale) for c in row])
        assert label_from_value(n, int(lab)).text() == want.text()


def test_label_text_forms():
    assert RegionLabel.core().text() == "C"
    assert RegionLabel.peak(OrthantSign(4, 10)).text() == "Pa"
    assert RegionLabel.outside().text() == "O"
    assert core_label_value(3) == 8
    assert outside_label_value(3) == 9


# ---------------------------------------------------------------------------
# membership and the facet-oracle cross-check

def test_membership_literals():
    x = (F(1, 2), F(2, 5), F(3, 10))
    assert membership_inner(full_body(3), x)
    assert not membership_inner(body_from_mask(3, 0x7F), x)  # peak 7 missing
    assert membership_inner(bare_body(3), (F(0), F(0), F(0)))


def test_membership_dimension_check():
    with pytest.raises(ParameterError):
        membership_inner(bare_body(3), (F(0), F(0)))


def test_q_oracle_literals():
    assert membership_q_oracle(2, (), (F(99, 100), F(-99, 100)))
    assert not membership_q_oracle(3, (), (F(9, 10), F(9, 10), F(1, 10)))
    # classify says Peak(+,+,+) but the missing-peak halfspace cuts it off
    x = (F(9, 20), F(9, 20), F(1, 5))
    assert classify_point(3, x).is_peak
    assert not membership_q_oracle(3, (7,), x)


def test_q_halfspace_normal_count():
    for n in (2, 3, 4, 5):
        normals = q_halfspace_normals(n)
        assert normals.shape == (n * (1 << (n - 1)), n)
        # each has exactly one zero entry
        assert np.all(np.sum(normals == 0, axis=1) == 1)
        assert len({tuple(r) for r in normals.tolist()}) == len(normals)


def test_membership_agrees_with_q_oracle(rng):
    # rational inputs make the agreement exact, no boundary epsilon needed
    scale = 1 << 10
    for n in (2, 3, 5):
        for _ in range(8):
            mask = int(rng.integers(1 << (1 << n))) if n < 5 else int(
                rng.integers(1 << 30))
            body = body_from_mask(n, mask & ((1 << (1 << n)) - 1))
            missing = [i for i in range(1 << n) if not body.has_peak(i)]
            coords = rng.integers(-scale - scale // 4, scale + scale // 4,
                                  size=(2000, n)).astype(np.int64)
            mine = membership_scaled_batch(body, coords, scale)
            theirs = q_membership_scaled_batch(n, missing, coords, scale)
            assert np.array_equal(mine, theirs)


def test_q_oracle_dimension_cap():
    with pytest.raises(ParameterError):
        membership_q_oracle(13, (), tuple(F(0) for _ in range(13)))


def test_convex_combinations_stay_inside(rng):
    scale = 1 << 10
    body = body_from_mask(3, 0x55)
    coords = rng.integers(-scale, scale + 1, size=(8000, 3)).astype(np.int64)
    members = coords[membership_scaled_batch(body, coords, scale)]
    assert len(members) >= 1000
    half = len(members) // 2
    lam = rng.integers(0, 257, size=(half, 1)).astype(np.int64)
    mix = members[:half] * lam + members[half:2 * half] * (256 - lam)
    assert np.all(membership_scaled_batch(body, mix, scale * 256))


# ---------------------------------------------------------------------------
# bodies, volume, text form

def test_inner_volume_examples():
    assert inner_volume(bare_body(3)) == F(4, 3)
    assert inner_volume(full_body(3)) == 2
    assert inner_volume(body_from_mask(3, 0x0F)) == F(5, 3)


def test_inner_volume_monotone():
    prev = None
    for count in range(9):
        body = body_from_mask(3, (1 << count) - 1)
        vol = inner_volume(body)
        if prev is not None:
            assert vol > prev
        prev = vol


def test_body_text_roundtrip():
    body = body_from_mask(3, 0x0F)
    assert body.text() == "n=3;peaks=0f"
    assert parse_inner_body("n=3;peaks=0f") == body
    full = full_body(4)
    assert parse_inner_body(full.text()) == full
    with pytest.raises(ParameterError):
        parse_inner_body("n=3;peaks=zz")


def test_body_peak_queries():
    body = body_from_mask(3, 0b00001010)
    assert body.peak_count == 2
    assert body.has_peak(1) and body.has_peak(3)
    assert not body.has_peak(0)
    with pytest.raises(ParameterError):
        body_from_mask(3, 1 << 8)


# ---------------------------------------------------------------------------
# sampling

def test_sample_single_reports_its_region(rng):
    body = body_from_mask(3, 0x0F)
    for _ in range(200):
        x, lab = sample_inner(body, rng)
        assert classify_point(3, [float(c) for c in x]).text() == lab.text()
        assert membership_inner(body, [float(c) for c in x])


def test_sample_batch_classifies_back(rng):
    body = body_from_mask(3, 0xA5)
    pts, labels = sample_inner_batch(body, 20_000, rng)
    assert np.array_equal(classify_batch(3, pts), labels)
    assert np.all(membership_batch(body, pts))


def test_sample_region_frequencies(rng):
    # 4-peak body at n=3: each present peak carries exactly 1/20 of the mass
    body = body_from_mask(3, 0x0F)
    _, labels = sample_inner_batch(body, 200_000, rng)
    values, probs = region_expectations(body)
    assert probs[0] == F(4, 5)
    assert all(p == F(1, 20) for p in probs[1:])
    for v, p in zip(values, probs):
        freq = float(np.mean(labels == v))
        sigma = math.sqrt(float(p) * (1 - float(p)) / len(labels))
        assert abs(freq - float(p)) < 5 * sigma


def test_sample_core_signs_balanced(rng):
    pts, _ = sample_inner_batch(bare_body(3), 100_000, rng)
    frac = np.mean(pts > 0, axis=0)
    sigma = 0.5 / math.sqrt(len(pts))
    assert np.all(np.abs(frac - 0.5) < 5 * sigma)


def test_sample_full_body_core_share(rng):
    # all peaks present: core carries (4/3)/2 = 2/3 of the volume
    _, labels = sample_inner_batch(full_body(3), 100_000, rng)
    frac = float(np.mean(labels == core_label_value(3)))
    assert abs(frac - 2 / 3) < 5 * math.sqrt((2 / 3) * (1 / 3) / len(labels))


def test_sampling_is_reproducible():
    body = body_from_mask(3, 0x3C)
    a, la = sample_inner_batch(body, 500, np.random.default_rng(123))
    b, lb = sample_inner_batch(body, 500, np.random.default_rng(123))
    assert np.array_equal(a, b) and np.array_equal(la, lb)
