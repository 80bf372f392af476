import math

import numpy as np
import pytest

from app.errors import InvalidInput
from app.services.criteria import (
    ad_condition, ad_condition_lambda, entanglement_condition, eps_star, full_verdict,
    noise_condition, noise_threshold_exact, noise_threshold_horodecki, noise_threshold_sufficient,
    recurrence_condition, recurrence_noise_check, threshold_table, thresholds_horodecki,
)
from app.services.operators import HermitianOperator
from app.services.shielded import (
    KeySpectrum, ShieldedState, add_white_noise, example_4x4, horodecki_family, key_spectrum,
)


def _equal_shields():
    sigma = HermitianOperator.identity(4) / 16
    return ShieldedState(sigma=(sigma, sigma, sigma, sigma), shield_dims=(2, 2))


def _flip_point(predicate, d, l, lo=0.01, hi=0.49):
    """Bisect the p at which predicate(horodecki(p)) turns True."""
    assert not predicate(horodecki_family(lo, d, l))[0]
    assert predicate(horodecki_family(hi, d, l))[0]
    while hi - lo > 1e-8:
        mid = (lo + hi) / 2
        if predicate(horodecki_family(mid, d, l))[0]:
            hi = mid
        else:
            lo = mid
    return hi


# ── Entanglement ──────────────────────────────────────────────────────────────

def test_entanglement_examples():
    ok, margin = entanglement_condition(horodecki_family(0.4, 2, 1))
    assert ok and margin == pytest.approx(0.2)
    ok, margin = entanglement_condition(horodecki_family(0.3, 2, 1))
    assert not ok and margin == pytest.approx(-0.1)
    assert not entanglement_condition(_equal_shields())[0]


# ── Recurrence ────────────────────────────────────────────────────────────────

def test_recurrence_examples(example_state):
    assert recurrence_condition(example_state)[0]
    ok, overlap = recurrence_condition(horodecki_family(0.4, 2, 1))
    assert not ok and overlap == pytest.approx(0.4 ** 2 / 6)
    assert not recurrence_condition(_equal_shields())[0]


def test_recurrence_at_tolerance_edge_never_outruns_ad():
    # entanglement margin 1.5e-9 clears TOLERANCE, AD margin 7.5e-10 does not
    q1 = 0.5 + 0.75e-9
    v = full_verdict(example_4x4(q1, 1 - q1))
    assert v.entangled
    assert not v.ad_ok
    assert not v.recurrence_ok


# ── Advantage distillation ────────────────────────────────────────────────────

def test_ad_examples(example_state):
    assert ad_condition(horodecki_family(0.33, 2, 2))[0]
    assert not ad_condition(horodecki_family(0.30, 2, 2))[0]
    ok, margin = ad_condition(example_state)
    assert ok and margin == pytest.approx(0.36 - 0.24)


@pytest.mark.parametrize("lambdas,expected,margin", [
    ((0.6, 0.0, 0.2, 0.2), True, 0.36 - 0.24),
    ((0.45, 0.15, 0.2, 0.2), False, 0.09 - 0.24),
    ((1.0, 0.0, 0.0, 0.0), True, 1.0),
])
def test_ad_condition_lambda(lambdas, expected, margin):
    ok, m = ad_condition_lambda(KeySpectrum(lambdas))
    assert ok is expected
    assert m == pytest.approx(margin)


# ── Thresholds ────────────────────────────────────────────────────────────────

def test_thresholds_exact():
    assert thresholds_horodecki(1) == pytest.approx((1 / 3, 2 / 5), abs=1e-12)
    assert thresholds_horodecki(2) == pytest.approx((2 / 7, 8 / 25), abs=1e-12)
    p1, p2 = thresholds_horodecki(60)
    assert p1 == pytest.approx(0.25) and p2 == pytest.approx(0.25)


def test_thresholds_ordered():
    for l in range(1, 12):
        p1, p2 = thresholds_horodecki(l)
        assert 0.25 < p1 <= p2


def test_thresholds_reject_l0():
    with pytest.raises(InvalidInput):
        thresholds_horodecki(0)


@pytest.mark.parametrize("l", [1, 2, 3])
def test_flip_points_match_thresholds(l):
    p1, p2 = thresholds_horodecki(l)
    assert _flip_point(entanglement_condition, 2, l) == pytest.approx(p1, abs=1e-6)
    assert _flip_point(ad_condition, 2, l) == pytest.approx(p2, abs=1e-6)


def test_threshold_table():
    rows = threshold_table(3)
    assert [r.l for r in rows] == [1, 2, 3]
    assert rows[1].p2 == pytest.approx(0.32)
    assert rows[1].ppt_bound == pytest.approx(0.2)
    assert rows[1].eps_star == pytest.approx(eps_star(2))


# ── Random-state properties ───────────────────────────────────────────────────

def test_recurrence_implies_ad(random_states):
    recurrence_count = 0
    for s in random_states:
        if recurrence_condition(s)[0]:
            recurrence_count += 1
            assert ad_condition(s)[0]
    assert recurrence_count > 100


def test_ad_implies_entanglement(random_states):
    ad_count = 0
    for s in random_states:
        if ad_condition(s)[0]:
            ad_count += 1
            assert entanglement_condition(s)[0]
    assert ad_count > 100


def test_norm_and_lambda_forms_agree(random_states):
    for s in random_states:
        ok, margin = ad_condition(s)
        ok_lambda, margin_lambda = ad_condition_lambda(key_spectrum(s))
        assert margin == pytest.approx(margin_lambda, abs=1e-12)
        assert ok == ok_lambda


# ── Noise ─────────────────────────────────────────────────────────────────────

def test_zero_noise_reduces_to_ad(few_random_states):
    for s in few_random_states:
        expected = ad_condition(s)[0]
        assert noise_condition(s, 0.0) == (expected, expected)


def test_sufficient_noise_condition_implies_exact(random_states):
    rng = np.random.default_rng(7)
    hits = 0
    for s in random_states[:1000]:
        eps = float(rng.uniform(0.0, 0.1))
        exact, sufficient = noise_condition(s, eps)
        if sufficient:
            hits += 1
            assert exact
    assert hits > 0


def test_noise_condition_example():
    exact, sufficient = noise_condition(horodecki_family(0.34, 2, 2), 0.01)
    assert sufficient and exact


def test_noise_condition_rejects_eps_one(example_state):
    with pytest.raises(InvalidInput):
        noise_condition(example_state, 1.0)


def test_noise_threshold_at_zero():
    for l in (1, 2, 3):
        _, p2 = thresholds_horodecki(l)
        assert noise_threshold_horodecki(l, 0.0) == pytest.approx(p2)
        assert noise_threshold_exact(l, 0.0) == pytest.approx(p2)
        assert noise_threshold_sufficient(l, 0.0) == pytest.approx(p2)


def test_eps_star_root():
    p2 = 0.32
    expected = ((1 + p2) - math.sqrt(1 + 2 * p2)) / p2
    assert eps_star(2) == pytest.approx(expected, abs=1e-12)
    assert eps_star(2) == pytest.approx(0.1232, abs=1e-3)
    assert eps_star(2) / (1 - eps_star(2)) ** 2 == pytest.approx(p2 / 2)


def test_literal_threshold_vanishes_past_eps_star():
    star = eps_star(2)
    assert noise_threshold_horodecki(2, star - 1e-4) is not None
    assert noise_threshold_horodecki(2, star + 1e-4) is None


def test_literal_threshold_value():
    eps = 0.05
    k = eps / (1 - eps) ** 2
    expected = 0.16 * (1 + math.sqrt(1 - (2 / 0.32) * k))
    assert noise_threshold_horodecki(2, eps) == pytest.approx(expected)
    assert noise_threshold_horodecki(2, eps) == pytest.approx(0.2894, abs=1e-3)


def test_exact_threshold_brackets_noisy_ad():
    eps = 0.05
    p_min = noise_threshold_exact(2, eps)
    assert p_min == pytest.approx(0.333, abs=1e-3)
    assert ad_condition(add_white_noise(horodecki_family(p_min + 1e-4, 2, 2), eps))[0]
    assert not ad_condition(add_white_noise(horodecki_family(p_min - 1e-4, 2, 2), eps))[0]


def test_sufficient_threshold_is_conservative():
    for eps in (0.01, 0.03, 0.05):
        sufficient = noise_threshold_sufficient(2, eps)
        assert sufficient is not None
        assert sufficient >= noise_threshold_exact(2, eps)
        assert ad_condition(add_white_noise(horodecki_family(sufficient + 1e-4, 2, 2), eps))[0]


def test_noise_breaks_recurrence(example_state):
    assert recurrence_noise_check(example_state, 0.0)[0]
    ok, overlap = recurrence_noise_check(example_state, 0.01)
    assert not ok and overlap > 0


# ── Aggregate verdict ─────────────────────────────────────────────────────────

def test_full_verdict_example(example_state):
    v = full_verdict(example_state)
    assert v.entangled and v.recurrence_ok and v.ad_ok
    assert v.ppt is not None and not v.ppt_skipped


def test_full_verdict_bound_key_region():
    v = full_verdict(horodecki_family(0.33, 4, 2))
    assert v.entangled and v.ad_ok and v.ppt
    assert not v.recurrence_ok


def test_full_verdict_below_p1():
    v = full_verdict(horodecki_family(0.2, 2, 2))
    assert not v.entangled and not v.recurrence_ok and not v.ad_ok


def test_full_verdict_skips_ppt_past_limit(example_state):
    v = full_verdict(example_state, max_dim=8)
    assert v.ppt is None and v.ppt_skipped


@pytest.mark.parametrize("q1", [0.45, 0.55, 0.75])
def test_example_verdicts_follow_q1_vs_q2(q1):
    v = full_verdict(example_4x4(q1, 1 - q1))
    expected = q1 > 1 - q1
    assert v.entangled is expected
    assert v.recurrence_ok is expected
    assert v.ad_ok is expected
