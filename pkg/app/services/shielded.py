"""Shielded two-qubit states.

A shielded state is Σ_i |φ_i⟩⟨φ_i| ⊗ σ_i on key AB ⊗ shield A'B' with four
unnormalized positive shield operators. This module builds the generic state and
the two named families, assembles full density matrices (ordering A ⊗ B ⊗ A' ⊗ B'),
refactors Bell-block-diagonal matrices back into shield form, and computes the
key spectrum from shield trace norms.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from app.config import settings
from app.errors import ConsistencyError, InvalidInput
from app.schemas import (
    Example4x4Spec, ExplicitSpec, HorodeckiSpec, KeySpectrumResponse, StateSpec,
)
from app.services.operators import (
    HermitianOperator, KetVector, Operand, as_operator, bell_basis, check_dim,
    computational_ket, is_ppt, permute_subsystems, sym_antisym_projectors,
    tensor_power, trace_norm,
)

log = logging.getLogger(__name__)

KEY_DIM = 4


# ── Types ─────────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class ShieldNorms:
    plus_12: float
    minus_12: float
    plus_34: float
    minus_34: float


@dataclass(frozen=True, eq=False)
class ShieldedState:
    sigma: tuple[HermitianOperator, HermitianOperator, HermitianOperator, HermitianOperator]
    shield_dims: tuple[int, int]

    def __post_init__(self):
        sigma = tuple(as_operator(s) for s in self.sigma)
        if len(sigma) != 4:
            raise InvalidInput(f"a shielded state needs four shield operators, got {len(sigma)}")
        d_a, d_b = (int(x) for x in self.shield_dims)
        if d_a < 1 or d_b < 1:
            raise InvalidInput(f"shield dims must be positive, got {self.shield_dims}")
        tol = settings.HERMITIAN_TOL
        for i, s in enumerate(sigma, start=1):
            if s.dim != d_a * d_b:
                raise InvalidInput(f"sigma_{i} has dimension {s.dim}, expected {d_a * d_b}")
            if not s.is_psd(tol):
                raise InvalidInput(f"sigma_{i} is not positive (min eigenvalue {s.min_eigenvalue:.3e})")
        total = sum(s.trace for s in sigma)
        if abs(total - 1.0) > tol:
            raise InvalidInput(f"shield traces sum to {total:.12f}, expected 1")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "shield_dims", (d_a, d_b))

    @property
    def shield_dim(self) -> int:
        return self.shield_dims[0] * self.shield_dims[1]

    @property
    def dim(self) -> int:
        return KEY_DIM * self.shield_dim

    @cached_property
    def norms(self) -> ShieldNorms:
        s1, s2, s3, s4 = self.sigma
        return ShieldNorms(
            plus_12=trace_norm(s1 + s2),
            minus_12=trace_norm(s1 - s2),
            plus_34=trace_norm(s3 + s4),
            minus_34=trace_norm(s3 - s4),
        )


@dataclass(frozen=True, eq=False)
class KeySpectrum:
    """Bell-diagonal weights λ1..λ4 of the twisted key part."""

    lambdas: tuple[float, float, float, float]

    def __post_init__(self):
        lam = [float(x) for x in self.lambdas]
        if len(lam) != 4:
            raise InvalidInput(f"key spectrum needs four weights, got {len(lam)}")
        tol = settings.HERMITIAN_TOL
        if min(lam) < -tol:
            raise InvalidInput(f"key spectrum weights must be nonnegative, got {lam}")
        lam = [max(x, 0.0) for x in lam]
        if lam[0] < lam[1] - tol or lam[2] < lam[3] - tol:
            raise InvalidInput(f"key spectrum must satisfy λ1 ≥ λ2 and λ3 ≥ λ4, got {lam}")
        if abs(sum(lam) - 1.0) > tol:
            raise InvalidInput(f"key spectrum sums to {sum(lam):.12f}, expected 1")
        object.__setattr__(self, "lambdas", tuple(lam))

    def to_response(self) -> KeySpectrumResponse:
        l1, l2, l3, l4 = self.lambdas
        return KeySpectrumResponse(lambda_1=l1, lambda_2=l2, lambda_3=l3, lambda_4=l4)


# ── Assembly and refactoring ──────────────────────────────────────────────────

_BELL_PROJECTORS = tuple(k.projector() for k in bell_basis())


def assemble_density(s: ShieldedState, max_dim: int | None = None) -> HermitianOperator:
    check_dim(s.dim, max_dim)
    rho = sum(np.kron(p.entries, sig.entries) for p, sig in zip(_BELL_PROJECTORS, s.sigma))
    return HermitianOperator(rho)


def key_block(rho: Operand, shield_dim: int, bra: int, ket: int) -> np.ndarray:
    """Shield block ⟨bra|ρ|ket⟩ for computational key indices (0=|00⟩ … 3=|11⟩)."""
    r = as_operator(rho).entries.reshape(KEY_DIM, shield_dim, KEY_DIM, shield_dim)
    return r[bra, :, ket, :]


def bell_block(rho: Operand, shield_dim: int, i: int, j: int) -> np.ndarray:
    """Shield block ⟨φ_i|ρ|φ_j⟩ (0-based Bell indices)."""
    phis = bell_basis()
    r = as_operator(rho).entries.reshape(KEY_DIM, shield_dim, KEY_DIM, shield_dim)
    return np.einsum("k,l,kslt->st", phis[i].amplitudes.conj(), phis[j].amplitudes, r)


def from_density(rho: Operand, shield_dims: Sequence[int], tol: float | None = None) -> ShieldedState:
    """Refactor a Bell-block-diagonal density matrix into shield form."""
    rho = as_operator(rho)
    tol = settings.HERMITIAN_TOL if tol is None else tol
    d_a, d_b = shield_dims
    shield_dim = d_a * d_b
    if rho.dim != KEY_DIM * shield_dim:
        raise InvalidInput(f"density of dimension {rho.dim} does not match shield dims {list(shield_dims)}")
    for i in range(4):
        for j in range(4):
            if i == j:
                continue
            leak = float(np.max(np.abs(bell_block(rho, shield_dim, i, j))))
            if leak > tol:
                raise ConsistencyError(f"state is not Bell-block-diagonal: |<φ{i + 1}|ρ|φ{j + 1}>| = {leak:.3e}")
    sigma = tuple(HermitianOperator(bell_block(rho, shield_dim, i, i)) for i in range(4))
    return ShieldedState(sigma=sigma, shield_dims=(d_a, d_b))


def key_spectrum(s: ShieldedState) -> KeySpectrum:
    n = s.norms
    return KeySpectrum((
        (n.plus_12 + n.minus_12) / 2,
        (n.plus_12 - n.minus_12) / 2,
        (n.plus_34 + n.minus_34) / 2,
        (n.plus_34 - n.minus_34) / 2,
    ))


# ── Families ──────────────────────────────────────────────────────────────────

def _pairs_to_parties(op: HermitianOperator, d: int, l: int) -> HermitianOperator:
    """Reorder (A'1 B'1 … A'l B'l) into (A'1 … A'l)(B'1 … B'l)."""
    if l == 1:
        return op
    order = list(range(0, 2 * l, 2)) + list(range(1, 2 * l, 2))
    return permute_subsystems(op, [d] * (2 * l), order)


def horodecki_family(p: float, d: int, l: int, max_dim: int | None = None) -> ShieldedState:
    """σ1 = p τ^{⊗l}, σ2 = p ρs^{⊗l}, σ3 = σ4 = (1/2 − p) ρs^{⊗l} with τ = (ρs + ρa)/2.

    Each of the l factors is a d⊗d operator split across A'|B'.
    """
    if not 0.0 < p < 0.5:
        raise InvalidInput(f"p must lie in (0, 1/2), got {p}")
    if int(d) != d or d < 2:
        raise InvalidInput(f"d must be an integer >= 2, got {d}")
    if int(l) != l or l < 1:
        raise InvalidInput(f"l must be an integer >= 1, got {l}")
    d, l = int(d), int(l)

    rho_s, rho_a = sym_antisym_projectors(d)
    tau = (rho_s + rho_a) / 2
    tau_l = _pairs_to_parties(tensor_power(tau, l, max_dim), d, l)
    sym_l = _pairs_to_parties(tensor_power(rho_s, l, max_dim), d, l)

    return ShieldedState(
        sigma=(p * tau_l, p * sym_l, (0.5 - p) * sym_l, (0.5 - p) * sym_l),
        shield_dims=(d ** l, d ** l),
    )


def chi_kets() -> tuple[KetVector, KetVector]:
    """|χ±⟩ = (√(2±√2)|00⟩ ± √(2∓√2)|11⟩)/2."""
    r2 = np.sqrt(2.0)
    plus = np.array([np.sqrt(2 + r2), 0, 0, np.sqrt(2 - r2)], dtype=complex) / 2
    minus = np.array([np.sqrt(2 - r2), 0, 0, -np.sqrt(2 + r2)], dtype=complex) / 2
    return KetVector(plus), KetVector(minus)


def example_4x4(q1: float, q2: float) -> ShieldedState:
    if q1 < 0 or q2 < 0 or abs(q1 + q2 - 1.0) > 1e-12:
        raise InvalidInput(f"q1, q2 must be nonnegative with q1 + q2 = 1, got ({q1}, {q2})")
    _, _, phi3, phi4 = bell_basis()
    chi_plus, chi_minus = chi_kets()
    ket00, ket11 = computational_ket(0, 4), computational_ket(3, 4)
    return ShieldedState(
        sigma=(
            (q1 / 4) * (ket00.projector() + phi3.projector()),
            (q1 / 4) * (ket11.projector() + phi4.projector()),
            (q2 / 2) * chi_plus.projector(),
            (q2 / 2) * chi_minus.projector(),
        ),
        shield_dims=(2, 2),
    )


def add_white_noise(s: ShieldedState, eps: float) -> ShieldedState:
    """σ_i^ε = (1 − ε) σ_i + ε I/(4 dim_shield)."""
    if not 0.0 <= eps <= 1.0:
        raise InvalidInput(f"eps must lie in [0, 1], got {eps}")
    white = HermitianOperator.identity(s.shield_dim) * (eps / (4 * s.shield_dim))
    return ShieldedState(
        sigma=tuple((1 - eps) * sig + white for sig in s.sigma),
        shield_dims=s.shield_dims,
    )


# ── PPT ───────────────────────────────────────────────────────────────────────

def ppt_verdict(s: ShieldedState, tol: float | None = None, max_dim: int | None = None) -> tuple[bool, float]:
    """PPT test across the AA'|BB' cut."""
    d_a, d_b = s.shield_dims
    rho = assemble_density(s, max_dim)
    cut = permute_subsystems(rho, [2, 2, d_a, d_b], [0, 2, 1, 3])
    return is_ppt(cut, [2 * d_a, 2 * d_b], tol)


def ppt_bound_horodecki(d: int, l: int) -> float:
    return min(1 / 3, 1 / (1 + (d / (d - 1)) ** l))


def ppt_analytic_check(p: float, d: int, l: int, max_dim: int | None = None) -> tuple[bool, bool]:
    numeric, min_eig = ppt_verdict(horodecki_family(p, d, l, max_dim), max_dim=max_dim)
    analytic = p <= ppt_bound_horodecki(d, l) + 1e-12
    if numeric != analytic:
        log.warning("PPT mismatch at p=%s d=%s l=%s: numeric=%s (min eig %.3e), analytic=%s",
                    p, d, l, numeric, min_eig, analytic)
    return numeric, analytic


# ── Spec ingestion ────────────────────────────────────────────────────────────

def state_from_spec(spec: StateSpec, max_dim: int | None = None) -> ShieldedState:
    if isinstance(spec, HorodeckiSpec):
        state = horodecki_family(spec.p, spec.d, spec.l, max_dim)
    elif isinstance(spec, Example4x4Spec):
        state = example_4x4(spec.q1, spec.q2)
    elif isinstance(spec, ExplicitSpec):
        state = ShieldedState(
            sigma=tuple(HermitianOperator.from_payload(m) for m in spec.sigma),
            shield_dims=spec.shield_dims,
        )
    else:
        raise InvalidInput(f"unknown state family {type(spec).__name__}")

    if spec.noise_eps is not None:
        state = add_white_noise(state, spec.noise_eps)
    return state
