import numpy as np
import pytest

from app.errors import InvalidInput
from app.services.operators import HermitianOperator, partial_trace, permute_subsystems
from app.services.recurrence import (
    bilateral_cnot, closed_form_r, closed_form_sequence, converges_to_private, explicit_round, iterate,
)
from app.services.sampling import random_shielded_state
from app.services.shielded import (
    ShieldedState, assemble_density, example_4x4, horodecki_family,
)


def _brute_force_round(s: ShieldedState):
    """Full two-copy simulation: CNOTs, projection on equal A2B2 outcomes, trace over A2B2."""
    d_a, d_b = s.shield_dims
    shield = s.shield_dim
    rho = assemble_density(s).entries
    two = permute_subsystems(np.kron(rho, rho), [4, shield, 4, shield], [0, 2, 1, 3]).entries

    u = np.kron(bilateral_cnot(), np.eye(shield * shield))
    keep = np.zeros((4, 4))
    keep[0, 0] = keep[3, 3] = 1
    proj = np.kron(np.kron(np.eye(4), keep), np.eye(shield * shield))
    after = proj @ u @ two @ u.conj().T @ proj

    reduced = partial_trace(after, [4, 4, shield * shield], keep=[0, 2])
    prob = reduced.trace
    ordered = permute_subsystems(reduced / prob, [4, d_a, d_b, d_a, d_b], [0, 1, 3, 2, 4])
    return ordered.entries, prob


# ── Closed form ───────────────────────────────────────────────────────────────

def test_closed_form_example(example_state):
    trace = closed_form_sequence(example_state, 3)
    assert trace.r[0] == pytest.approx(0.3)
    assert trace.r[1] == pytest.approx(0.36 / (2 * 0.36 + 2 * 0.16))
    assert [step.effective_m for step in trace.steps] == [1, 2, 3]


def test_closed_form_first_term_is_half_norm(horodecki_state):
    assert closed_form_sequence(horodecki_state, 1).r[0] == pytest.approx(horodecki_state.norms.minus_12 / 2)


def test_closed_form_decays_for_horodecki(horodecki_state):
    r = closed_form_sequence(horodecki_state, 30).r
    assert all(a > b for a, b in zip(r, r[1:]))
    assert r[-1] < 1e-3


def test_closed_form_grows_for_orthogonal_shields(example_state):
    r = closed_form_sequence(example_state, 30).r
    assert all(a < b for a, b in zip(r, r[1:]))
    assert r[-1] == pytest.approx(0.5, abs=1e-5)


def test_closed_form_zero_when_shields_equal():
    sigma = HermitianOperator.identity(4) / 16
    s = ShieldedState(sigma=(sigma, sigma, sigma, sigma), shield_dims=(2, 2))
    assert closed_form_sequence(s, 5).r == pytest.approx([0.0] * 5)


def test_closed_form_large_m_is_finite(example_state):
    assert closed_form_r(example_state.norms, 5000) == pytest.approx(0.5)


def test_closed_form_rejects_m0(example_state):
    with pytest.raises(InvalidInput):
        closed_form_sequence(example_state, 0)


# ── Explicit rounds ───────────────────────────────────────────────────────────

def test_bilateral_cnot_is_permutation():
    u = bilateral_cnot()
    assert np.allclose(u @ u.T, np.eye(16))
    assert np.allclose(u @ u, np.eye(16))


def test_explicit_round_example(example_state):
    out, prob = explicit_round(example_state)
    assert out.shield_dims == (4, 4)
    assert prob == pytest.approx(0.52, abs=1e-12)
    assert out.norms.minus_12 / 2 == pytest.approx(0.36 / 1.04, abs=1e-9)


def test_explicit_round_matches_brute_force():
    rng = np.random.default_rng(3)
    for orthogonal in (False, True):
        s = random_shielded_state(rng, (2, 1), orthogonal=orthogonal)
        out, prob = explicit_round(s)
        expected, expected_prob = _brute_force_round(s)
        assert prob == pytest.approx(expected_prob, abs=1e-12)
        assert np.allclose(assemble_density(out).entries, expected, atol=1e-12)


def test_explicit_round_squares_norms():
    rng = np.random.default_rng(11)
    for _ in range(5):
        s = random_shielded_state(rng, (2, 2))
        a, b, c = s.norms.plus_12, s.norms.minus_12, s.norms.plus_34
        out, prob = explicit_round(s)
        assert prob == pytest.approx(a * a + c * c, abs=1e-12)
        assert out.norms.plus_12 == pytest.approx(a * a / prob, abs=1e-9)
        assert out.norms.minus_12 == pytest.approx(b * b / prob, abs=1e-9)
        assert out.norms.plus_34 == pytest.approx(c * c / prob, abs=1e-9)


def test_error_free_key_stays_error_free():
    out, prob = explicit_round(example_4x4(1.0, 0.0))
    assert prob == pytest.approx(1.0)
    assert np.allclose(out.sigma[2].entries, 0, atol=1e-12)
    assert np.allclose(out.sigma[3].entries, 0, atol=1e-12)


def test_fully_mixed_key_gives_zero_r():
    sigma = HermitianOperator.identity(2) / 8
    s = ShieldedState(sigma=(sigma, sigma, sigma, sigma), shield_dims=(2, 1))
    out, _ = explicit_round(s)
    assert out.norms.minus_12 == pytest.approx(0.0, abs=1e-12)


# ── Iteration ─────────────────────────────────────────────────────────────────

def test_iterate_matches_closed_form(example_state):
    trace = iterate(example_state, 2)
    assert not trace.truncated
    assert [step.round for step in trace.steps] == [1, 2]
    assert [step.effective_m for step in trace.steps] == [2, 4]
    for step in trace.steps:
        assert abs(step.r - closed_form_r(example_state.norms, step.effective_m)) < 1e-9
    assert trace.r[0] < trace.r[1] < 0.5


def test_iterate_truncates_at_resource_limit(example_state):
    trace = iterate(example_state, 3)
    assert trace.truncated and trace.truncated_at == 3
    assert len(trace.steps) == 2
    assert "exceeds resource limit" in trace.message


def test_iterate_decreasing_for_horodecki(horodecki_state):
    trace = iterate(horodecki_state, 2)
    r0 = horodecki_state.norms.minus_12 / 2
    assert r0 > trace.r[0] > trace.r[1]


def test_iterate_rejects_zero_rounds(example_state):
    with pytest.raises(InvalidInput):
        iterate(example_state, 0)


# ── Convergence ───────────────────────────────────────────────────────────────

def test_converges_for_orthogonal_shields(example_state):
    assert converges_to_private(example_state, 1e-3)


def test_does_not_converge_for_horodecki_shields():
    assert not converges_to_private(horodecki_family(0.28, 2, 5), 1e-3, m_max=10_000)


def test_does_not_converge_without_entanglement():
    assert not converges_to_private(example_4x4(0.4, 0.6), 1e-3)


def test_convergence_needs_positive_tolerance(example_state):
    with pytest.raises(InvalidInput):
        converges_to_private(example_state, 0.0)
