"""ccq correlations of shielded states and advantage distillation.

Eve holds a purification of the honest parties' state. Measuring the key qubits in
the computational basis and discarding the shields leaves the classical-classical-
quantum state Σ p(i,j) |ij⟩⟨ij| ⊗ ω_ij. A twisting Σ |ij⟩⟨ij| ⊗ U_ij commutes with
that measurement, so the ccq state of a state and of any twisted version agree.

Advantage distillation: Alice draws s_A, publishes x_i = s_A ⊕ a_i over a block of
N raw bits, Bob computes y_i = b_i ⊕ x_i and accepts iff all y_i agree.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import block_diag

from app.config import settings
from app.errors import DegenerateInput, InvalidInput
from app.schemas import AdBlockStats
from app.services.operators import (
    HermitianOperator, KetVector, Operand, as_operator, bell_basis, fidelity_from_factors,
)
from app.services.shielded import KEY_DIM, KeySpectrum

log = logging.getLogger(__name__)

PROB_TOL = 1e-10
UNITARY_TOL = 1e-9
PURIFICATION_CUTOFF = 1e-14


# ── Types ─────────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class CcqDescriptor:
    """Outcome distribution p[i, j] and Eve's view.

    ``eve_overlap`` is |⟨e00|e11⟩| for pure conditional states and the root
    fidelity of ω00 and ω11 in general. ``eve_states`` holds ω00, ω01, ω10, ω11.
    """

    p: np.ndarray
    eve_overlap: float
    eve_states: Optional[tuple[HermitianOperator, ...]] = None

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.shape != (2, 2):
            raise InvalidInput(f"p must be a 2x2 table, got shape {p.shape}")
        if p.min() < -PROB_TOL or abs(p.sum() - 1.0) > PROB_TOL:
            raise InvalidInput(f"p must be a probability table, got {p.tolist()}")
        if not -PROB_TOL <= self.eve_overlap <= 1 + PROB_TOL:
            raise InvalidInput(f"eve_overlap must lie in [0, 1], got {self.eve_overlap}")
        p = np.clip(p, 0.0, None)
        p.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "eve_overlap", min(max(float(self.eve_overlap), 0.0), 1.0))

    @property
    def agreement(self) -> float:
        return float(self.p[0, 0] + self.p[1, 1])

    @property
    def disagreement(self) -> float:
        return float(self.p[0, 1] + self.p[1, 0])


@dataclass(frozen=True, eq=False)
class TwistingSpec:
    """Shield unitaries U_ij indexed by the key basis state ij (order 00, 01, 10, 11)."""

    unitaries: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]

    def __post_init__(self):
        us = tuple(np.array(u, dtype=complex) for u in self.unitaries)
        if len(us) != 4:
            raise InvalidInput(f"a twisting needs four unitaries, got {len(us)}")
        dim = us[0].shape[0]
        for q, u in enumerate(us):
            if u.shape != (dim, dim):
                raise InvalidInput(f"U_{q:02b} has shape {u.shape}, expected ({dim}, {dim})")
            deviation = float(np.max(np.abs(u @ u.conj().T - np.eye(dim))))
            if deviation > UNITARY_TOL:
                raise InvalidInput(f"U_{q:02b} is not unitary (deviation {deviation:.3e})")
            u.setflags(write=False)
        object.__setattr__(self, "unitaries", us)

    @property
    def dim(self) -> int:
        return self.unitaries[0].shape[0]

    @classmethod
    def identity(cls, dim: int) -> "TwistingSpec":
        return cls(tuple(np.eye(dim, dtype=complex) for _ in range(4)))


# ── Twisting ──────────────────────────────────────────────────────────────────

def twisting_unitary(t: TwistingSpec) -> np.ndarray:
    return block_diag(*t.unitaries)


def _check_twisting_dims(dim: int, t: TwistingSpec, dims: Optional[Sequence[int]]) -> None:
    if dims is not None:
        if len(dims) != 4 or dims[0] != 2 or dims[1] != 2 or dims[2] * dims[3] != t.dim:
            raise InvalidInput(f"dims {list(dims)} do not describe 2 x 2 x shield({t.dim})")
    if dim != KEY_DIM * t.dim:
        raise InvalidInput(f"dimension {dim} does not match a twisting on shield dimension {t.dim}")


def apply_twisting(rho: Operand, t: TwistingSpec, dims: Optional[Sequence[int]] = None) -> HermitianOperator:
    rho = as_operator(rho)
    _check_twisting_dims(rho.dim, t, dims)
    u = twisting_unitary(t)
    return HermitianOperator(u @ rho.entries @ u.conj().T)


def twist_purification(psi: KetVector, t: TwistingSpec) -> KetVector:
    """(T ⊗ I_E)|ψ⟩, a purification of the twisted state in the same environment frame."""
    if psi.dim % (KEY_DIM * t.dim):
        raise InvalidInput(f"purification of dimension {psi.dim} does not fit shield dimension {t.dim}")
    env = psi.dim // (KEY_DIM * t.dim)
    amp = psi.amplitudes.reshape(KEY_DIM * t.dim, env)
    return KetVector((twisting_unitary(t) @ amp).reshape(-1))


# ── Purification and ccq ──────────────────────────────────────────────────────

def purify(k: KeySpectrum) -> KetVector:
    """Σ_i √λ_i |φ_i⟩|E_i⟩ with E the computational basis of C^4."""
    env = np.eye(4, dtype=complex)
    vec = sum(math.sqrt(lam) * np.kron(phi.amplitudes, env[i])
              for i, (lam, phi) in enumerate(zip(k.lambdas, bell_basis())))
    return KetVector(vec / np.linalg.norm(vec))


def purify_state(rho: Operand) -> KetVector:
    """Minimal purification Σ_k √μ_k |v_k⟩|k⟩ over the nonzero eigenvalues of ρ."""
    rho = as_operator(rho)
    tol = settings.HERMITIAN_TOL
    if abs(rho.trace - 1.0) > tol or not rho.is_psd(tol):
        raise InvalidInput("purification needs a density operator (PSD, unit trace)")
    mu, v = np.linalg.eigh(rho.entries)
    keep = mu > PURIFICATION_CUTOFF * mu.max()
    factor = v[:, keep] * np.sqrt(mu[keep])
    vec = factor.reshape(-1)
    log.debug("Purified dimension-%s state with %s environment levels", rho.dim, int(keep.sum()))
    return KetVector(vec / np.linalg.norm(vec))


def ccq_from_purification(psi: KetVector, shield_dim: int) -> CcqDescriptor:
    """Measure the key of |ψ⟩ on (key ⊗ shield ⊗ E) and give Eve's conditional states."""
    if shield_dim < 1 or psi.dim % (KEY_DIM * shield_dim):
        raise InvalidInput(f"purification of dimension {psi.dim} does not fit shield dimension {shield_dim}")
    env = psi.dim // (KEY_DIM * shield_dim)
    branches = psi.amplitudes.reshape(KEY_DIM, shield_dim, env)

    probs = np.array([float(np.vdot(m, m).real) for m in branches])
    eve_states = []
    for m, prob in zip(branches, probs):
        omega = m.T @ m.conj()
        eve_states.append(HermitianOperator(omega / prob if prob > PROB_TOL else np.zeros_like(omega)))

    p00, p11 = probs[0], probs[3]
    if p00 <= PROB_TOL or p11 <= PROB_TOL:
        raise DegenerateInput("outcomes 00 and 11 must both occur to define Eve's overlap")
    overlap = fidelity_from_factors(branches[0].conj(), branches[3].conj()) / math.sqrt(p00 * p11)
    return CcqDescriptor(p=(probs / probs.sum()).reshape(2, 2), eve_overlap=overlap, eve_states=tuple(eve_states))


def ccq_from_spectrum(k: KeySpectrum) -> CcqDescriptor:
    l1, l2, l3, l4 = k.lambdas
    agree = l1 + l2
    if agree <= PROB_TOL:
        raise DegenerateInput("λ1 + λ2 = 0: the key bits never agree")
    eve = ccq_from_purification(purify(k), 1).eve_states
    dis = l3 + l4
    return CcqDescriptor(
        p=np.array([[agree / 2, dis / 2], [dis / 2, agree / 2]]),
        eve_overlap=(l1 - l2) / agree,
        eve_states=eve,
    )


def ccq_from_full_state(rho: Operand, shield_dims: Sequence[int]) -> CcqDescriptor:
    rho = as_operator(rho)
    shield_dim = int(np.prod(shield_dims))
    if rho.dim != KEY_DIM * shield_dim:
        raise InvalidInput(f"state of dimension {rho.dim} does not match shield dims {list(shield_dims)}")
    return ccq_from_purification(purify_state(rho), shield_dim)


# ── Advantage distillation ────────────────────────────────────────────────────

def _check_block_size(n: int) -> int:
    if int(n) != n or n < 1:
        raise InvalidInput(f"block size must be an integer >= 1, got {n}")
    return int(n)


def ad_block_stats(c: CcqDescriptor, n: int) -> AdBlockStats:
    n = _check_block_size(n)
    agree_n, dis_n = c.agreement ** n, c.disagreement ** n
    accept = agree_n + dis_n
    return AdBlockStats(
        block_size=n,
        accept_prob=accept,
        post_error=dis_n / accept if accept > 0 else 0.0,
        eve_overlap_effective=c.eve_overlap ** n,
    )


def _simulate_chunk(p: np.ndarray, n: int, trials: int, seed: np.random.SeedSequence) -> tuple[int, int]:
    """Returns (accepted blocks, accepted blocks where Bob's bit differs from Alice's)."""
    rng = np.random.default_rng(seed)
    outcome = rng.choice(4, size=(trials, n), p=p.reshape(-1))
    a_bits, b_bits = np.divmod(outcome, 2)
    s_a = rng.integers(2, size=trials)
    x = s_a[:, None] ^ a_bits
    y = b_bits ^ x
    accepted = np.all(y == y[:, :1], axis=1)
    errors = accepted & (y[:, 0] != s_a)
    return int(accepted.sum()), int(errors.sum())


def ad_monte_carlo(
    c: CcqDescriptor,
    n: int,
    trials: int,
    seed: int,
    chunk_size: Optional[int] = None,
    workers: Optional[int] = None,
) -> AdBlockStats:
    """Literal protocol simulation.

    Trials are split into chunks of ``chunk_size`` with seeds spawned from
    ``SeedSequence(seed)``; chunk counts are summed, so the result depends only on
    (seed, chunk_size) and not on the number of workers.
    """
    n = _check_block_size(n)
    if trials < 1:
        raise InvalidInput(f"trials must be >= 1, got {trials}")
    chunk_size = chunk_size or settings.MC_CHUNK_SIZE
    workers = workers or settings.SCAN_WORKERS

    sizes = [chunk_size] * (trials // chunk_size)
    if trials % chunk_size:
        sizes.append(trials % chunk_size)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    log.info("AD Monte Carlo: N=%s trials=%s chunks=%s workers=%s", n, trials, len(sizes), workers)

    p = c.p / c.p.sum()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda args: _simulate_chunk(p, n, *args), zip(sizes, seeds)))
    accepted = sum(r[0] for r in results)
    errors = sum(r[1] for r in results)

    accept_prob = accepted / trials
    if accepted:
        post_error = errors / accepted
        post_error_se = math.sqrt(post_error * (1 - post_error) / accepted)
    else:
        log.warning("No block accepted in %s trials; post-selected error undefined", trials)
        post_error, post_error_se = 0.0, 0.0
    return AdBlockStats(
        block_size=n,
        accept_prob=accept_prob,
        post_error=post_error,
        eve_overlap_effective=c.eve_overlap ** n,
        trials=trials,
        accepted=accepted,
        accept_se=math.sqrt(accept_prob * (1 - accept_prob) / trials),
        post_error_se=post_error_se,
    )


def ad_security_check(c: CcqDescriptor) -> tuple[bool, float]:
    """|⟨e00|e11⟩|² > (p01 + p10)/(p00 + p11)."""
    agree = c.agreement
    if agree <= PROB_TOL:
        raise DegenerateInput("p(0,0) + p(1,1) = 0: advantage distillation has nothing to accept")
    margin = c.eve_overlap ** 2 - c.disagreement / agree
    return margin > settings.TOLERANCE, margin
