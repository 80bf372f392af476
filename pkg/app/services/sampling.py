"""Seeded random shielded states, key spectra and twistings for property checks."""
import logging
from typing import Sequence

import numpy as np
from scipy.stats import unitary_group

from app.errors import InvalidInput
from app.services.ccq import TwistingSpec
from app.services.operators import HermitianOperator
from app.services.shielded import KeySpectrum, ShieldedState

log = logging.getLogger(__name__)


def _random_psd(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return g @ g.conj().T


def _normalized(m: np.ndarray, weight: float) -> HermitianOperator:
    return HermitianOperator(weight * m / np.trace(m).real)


def random_shielded_state(
    rng: np.random.Generator,
    shield_dims: Sequence[int] = (2, 2),
    orthogonal: bool = False,
) -> ShieldedState:
    """Four Wishart shields with Dirichlet-distributed traces.

    With ``orthogonal`` σ1 and σ2 are compressed onto complementary halves of a
    Haar-random basis, so tr(σ1 σ2) = 0.
    """
    d_a, d_b = shield_dims
    dim = d_a * d_b
    weights = rng.dirichlet(np.ones(4))
    mats = [_random_psd(rng, dim) for _ in range(4)]
    if orthogonal:
        if dim < 2:
            raise InvalidInput("orthogonal shields need a shield dimension of at least 2")
        basis = unitary_group.rvs(dim, random_state=rng)
        half = dim // 2
        for i, cols in ((0, basis[:, :half]), (1, basis[:, half:])):
            proj = cols @ cols.conj().T
            mats[i] = proj @ mats[i] @ proj
    return ShieldedState(
        sigma=tuple(_normalized(m, w) for m, w in zip(mats, weights)),
        shield_dims=(d_a, d_b),
    )


def random_ensemble(seed: int, count: int, shield_dims: Sequence[int] = (2, 2)) -> list[ShieldedState]:
    """``count`` states, every second one with orthogonal σ1, σ2."""
    rng = np.random.default_rng(seed)
    log.info("Sampling %s random shielded states (seed %s, shield %s)", count, seed, list(shield_dims))
    return [random_shielded_state(rng, shield_dims, orthogonal=bool(i % 2)) for i in range(count)]


def random_key_spectrum(rng: np.random.Generator) -> KeySpectrum:
    w = rng.dirichlet(np.ones(4))
    return KeySpectrum((max(w[0], w[1]), min(w[0], w[1]), max(w[2], w[3]), min(w[2], w[3])))


def random_twisting(rng: np.random.Generator, dim: int) -> TwistingSpec:
    return TwistingSpec(tuple(unitary_group.rvs(dim, random_state=rng) for _ in range(4)))
