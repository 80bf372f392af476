"""Recurrence protocol on shielded states.

One round takes two copies of the current state, applies CNOTs A1→A2 and B1→B2 on
the key qubits, measures A2B2 in the computational basis and keeps the pair when
the outcomes agree. Both shield pairs survive, so the shield dimension squares
every round; after k rounds the off-diagonal norm r = ‖⟨00|ρ|11⟩‖ equals the
closed form

    r_m = ‖σ1−σ2‖^m / (2‖σ1+σ2‖^m + 2‖σ3+σ4‖^m)

at m = 2^k.
"""
import logging
from typing import Optional

import numpy as np

from app.config import settings
from app.errors import ConsistencyError, InvalidInput, ResourceLimitExceeded
from app.schemas import RecurrenceStep, RecurrenceTrace
from app.services.operators import HermitianOperator, check_dim, permute_subsystems
from app.services.shielded import (
    KEY_DIM, ShieldNorms, ShieldedState, assemble_density, from_density,
)

log = logging.getLogger(__name__)

CLOSED_FORM_TOL = 1e-9


def closed_form_r(norms: ShieldNorms, m: int) -> float:
    # scaled by the larger denominator norm so large m underflows instead of overflowing
    a, b, c = norms.plus_12, norms.minus_12, norms.plus_34
    top = max(a, c)
    return 0.5 * (b / top) ** m / ((a / top) ** m + (c / top) ** m)


def closed_form_sequence(s: ShieldedState, m_max: int) -> RecurrenceTrace:
    if m_max < 1:
        raise InvalidInput(f"m_max must be >= 1, got {m_max}")
    steps = []
    for m in range(1, m_max + 1):
        r = closed_form_r(s.norms, m)
        steps.append(RecurrenceStep(effective_m=m, r=r, closed_form_r=r))
    return RecurrenceTrace(steps=steps)


def converges_to_private(s: ShieldedState, tol: float, m_max: Optional[int] = None) -> bool:
    """True iff r_m reaches 1/2 − tol for some m ≤ m_max."""
    if tol <= 0:
        raise InvalidInput(f"tol must be positive, got {tol}")
    m_max = settings.CONVERGENCE_M_MAX if m_max is None else m_max
    if m_max < 1:
        raise InvalidInput(f"m_max must be >= 1, got {m_max}")
    n = s.norms
    top = max(n.plus_12, n.plus_34)
    m = np.arange(1, m_max + 1, dtype=float)
    r = 0.5 * (n.minus_12 / top) ** m / ((n.plus_12 / top) ** m + (n.plus_34 / top) ** m)
    return bool(np.any(r >= 0.5 - tol))


# ── Explicit rounds ───────────────────────────────────────────────────────────

def bilateral_cnot() -> np.ndarray:
    """CNOT A1→A2 and B1→B2 on key qubits ordered (A1, B1, A2, B2)."""
    u = np.zeros((16, 16), dtype=complex)
    for a1 in range(2):
        for b1 in range(2):
            for a2 in range(2):
                for b2 in range(2):
                    src = a1 * 8 + b1 * 4 + a2 * 2 + b2
                    dst = a1 * 8 + b1 * 4 + (a2 ^ a1) * 2 + (b2 ^ b1)
                    u[dst, src] = 1.0
    return u


def _post_selection_kraus() -> list[np.ndarray]:
    """K_x = (I ⊗ ⟨xx|_{A2B2}) U for x ∈ {0, 1}, each 4 × 16."""
    u = bilateral_cnot().reshape(KEY_DIM, KEY_DIM, 16)
    return [u[:, 3 * x, :] for x in (0, 1)]


def explicit_round(s: ShieldedState, max_dim: int | None = None) -> tuple[ShieldedState, float]:
    """One recurrence round on two copies of ``s``; returns (output state, success probability).

    The two-copy state is handled block by block over the key indices so the
    full (4S)² matrix is never materialized.
    """
    shield = s.shield_dim
    check_dim((KEY_DIM * shield) ** 2, max_dim, "two-copy dimension")
    d_a, d_b = s.shield_dims

    blocks = assemble_density(s).entries.reshape(KEY_DIM, shield, KEY_DIM, shield)
    out = np.zeros((KEY_DIM, shield * shield, KEY_DIM, shield * shield), dtype=complex)
    for kraus in _post_selection_kraus():
        for i, j in np.ndindex(KEY_DIM, KEY_DIM):
            for alpha in np.flatnonzero(kraus[i]):
                for beta in np.flatnonzero(kraus[j]):
                    row1, row2 = divmod(int(alpha), KEY_DIM)
                    col1, col2 = divmod(int(beta), KEY_DIM)
                    coeff = kraus[i, alpha] * np.conj(kraus[j, beta])
                    out[i, :, j, :] += coeff * np.kron(blocks[row1, :, col1, :], blocks[row2, :, col2, :])

    new_dim = KEY_DIM * shield * shield
    rho = HermitianOperator(out.reshape(new_dim, new_dim))
    success_prob = rho.trace
    if success_prob <= 0:
        raise ConsistencyError(f"post-selection probability {success_prob:.3e} is not positive")

    # (A'1 B'1)(A'2 B'2) -> (A'1 A'2)(B'1 B'2)
    rho = permute_subsystems(rho / success_prob, [KEY_DIM, d_a, d_b, d_a, d_b], [0, 1, 3, 2, 4])
    return from_density(rho, (d_a * d_a, d_b * d_b)), success_prob


def iterate(s: ShieldedState, k: int, max_dim: int | None = None) -> RecurrenceTrace:
    if int(k) != k or k < 1:
        raise InvalidInput(f"number of rounds must be an integer >= 1, got {k}")
    initial = s.norms
    steps: list[RecurrenceStep] = []
    current = s
    for rnd in range(1, int(k) + 1):
        try:
            current, success_prob = explicit_round(current, max_dim)
        except ResourceLimitExceeded as exc:
            log.warning("Recurrence truncated before round %s: %s", rnd, exc)
            return RecurrenceTrace(steps=steps, truncated=True, truncated_at=rnd, message=str(exc))

        m = 2 ** rnd
        r = current.norms.minus_12 / 2
        expected = closed_form_r(initial, m)
        if abs(r - expected) > CLOSED_FORM_TOL:
            raise ConsistencyError(f"round {rnd}: explicit r={r:.12g} but closed form gives {expected:.12g} at m={m}")
        log.info("Round %s: m=%s r=%.12g success=%.12g shield=%s", rnd, m, r, success_prob, current.shield_dims)
        steps.append(RecurrenceStep(round=rnd, effective_m=m, r=r, success_prob=success_prob, closed_form_r=expected))
    return RecurrenceTrace(steps=steps)
