"""Key-distillability predicates and thresholds for shielded states.

Every predicate returns ``(verdict, margin)``. Strict inequalities hold only when
the margin exceeds ``settings.TOLERANCE``, so boundary states report False with a
near-zero margin.
"""
import logging
import math
from typing import Optional

import numpy as np

from app.config import settings
from app.errors import InvalidInput, ResourceLimitExceeded
from app.schemas import ThresholdRow, Verdict
from app.services.shielded import (
    KeySpectrum, ShieldedState, add_white_noise, ppt_bound_horodecki, ppt_verdict,
)

log = logging.getLogger(__name__)


def _check_l(l: int) -> int:
    if int(l) != l or l < 1:
        raise InvalidInput(f"l must be an integer >= 1, got {l}")
    return int(l)


def _check_eps(eps: float) -> float:
    if not 0.0 <= eps < 1.0:
        raise InvalidInput(f"eps must lie in [0, 1), got {eps}")
    return float(eps)


# ── Predicates ────────────────────────────────────────────────────────────────

def entanglement_condition(s: ShieldedState) -> tuple[bool, float]:
    """‖σ1 − σ2‖ > ‖σ3 + σ4‖, i.e. λ1 > λ2 + λ3 + λ4."""
    n = s.norms
    margin = n.minus_12 - n.plus_34
    return margin > settings.TOLERANCE, margin


def shield_overlap(s: ShieldedState) -> float:
    """tr(σ1 σ2)."""
    s1, s2 = s.sigma[0].entries, s.sigma[1].entries
    return float(np.sum(s1 * s2.T).real)


def recurrence_condition(s: ShieldedState) -> tuple[bool, float]:
    """σ1 ⊥ σ2 (relative to their traces) and the key part is entangled.

    With σ1 ⊥ σ2 the AD inequality reduces to ‖σ1 − σ2‖(‖σ1 − σ2‖ − ‖σ3 + σ4‖) > 0, and the
    entanglement test is applied at the AD margin.
    """
    overlap = shield_overlap(s)
    orthogonal = overlap <= settings.TOLERANCE * s.sigma[0].trace * s.sigma[1].trace
    return orthogonal and ad_condition(s)[0], overlap


def ad_condition(s: ShieldedState) -> tuple[bool, float]:
    """‖σ1 − σ2‖² > ‖σ3 + σ4‖ ‖σ1 + σ2‖."""
    n = s.norms
    margin = n.minus_12 ** 2 - n.plus_34 * n.plus_12
    return margin > settings.TOLERANCE, margin


def ad_condition_lambda(k: KeySpectrum) -> tuple[bool, float]:
    l1, l2, l3, l4 = k.lambdas
    margin = (l1 - l2) ** 2 - (l3 + l4) * (l1 + l2)
    return margin > settings.TOLERANCE, margin


# ── Horodecki-family thresholds ───────────────────────────────────────────────

def thresholds_horodecki(l: int) -> tuple[float, float]:
    """(p1, p2) with p_j = ½[(1 − 2^-l)^j + 1]^-1; entangled above p1, AD-distillable above p2."""
    x = 1.0 - 2.0 ** -_check_l(l)
    return 0.5 / (x + 1.0), 0.5 / (x * x + 1.0)


def noise_condition(s: ShieldedState, eps: float) -> tuple[bool, bool]:
    """(exact, sufficient) AD distillability of the state after white noise ε.

    ``sufficient`` evaluates ‖σ1−σ2‖² > ‖σ3+σ4‖‖σ1+σ2‖ + ε/(1−ε)² on the noiseless
    norms and implies ``exact``.
    """
    eps = _check_eps(eps)
    exact, _ = ad_condition(add_white_noise(s, eps))
    n = s.norms
    margin = n.minus_12 ** 2 - n.plus_34 * n.plus_12 - eps / (1 - eps) ** 2
    return exact, margin > settings.TOLERANCE


def _solve_family_threshold(l: int, penalty: float) -> Optional[float]:
    """Smallest p with 2p²/p2 − 2p − penalty > 0, or None if it leaves (0, 1/2)."""
    _, p2 = thresholds_horodecki(l)
    p_min = (p2 / 2) * (1 + math.sqrt(1 + 2 * penalty / p2))
    return p_min if p_min < 0.5 else None


def noise_threshold_horodecki(l: int, eps: float) -> Optional[float]:
    """p_min = (p2/2)[1 + (1 − (2/p2) ε/(1−ε)²)^½], None once the root turns complex.

    Evaluated as printed; it lies below p2 for ε > 0, so it is reported next to
    :func:`noise_threshold_sufficient` and :func:`noise_threshold_exact`.
    """
    eps = _check_eps(eps)
    _, p2 = thresholds_horodecki(l)
    disc = 1 - (2 / p2) * eps / (1 - eps) ** 2
    if disc < 0:
        return None
    return (p2 / 2) * (1 + math.sqrt(disc))


def noise_threshold_sufficient(l: int, eps: float) -> Optional[float]:
    eps = _check_eps(eps)
    return _solve_family_threshold(l, eps / (1 - eps) ** 2)


def noise_threshold_exact(l: int, eps: float) -> Optional[float]:
    """Threshold above which the noisy family state satisfies the AD condition."""
    eps = _check_eps(eps)
    return _solve_family_threshold(l, eps * (2 - eps) / (4 * (1 - eps) ** 2))


def eps_star(l: int) -> float:
    """Root of ε/(1−ε)² = p2/2: the noise level past which the printed threshold has no solution."""
    _, p2 = thresholds_horodecki(l)
    return ((1 + p2) - math.sqrt(1 + 2 * p2)) / p2


def threshold_table(l_max: int, d: int = 2) -> list[ThresholdRow]:
    l_max = _check_l(l_max)
    if d < 2:
        raise InvalidInput(f"d must be >= 2, got {d}")
    log.info("Threshold table for l=1..%s, d=%s", l_max, d)
    rows = []
    for l in range(1, l_max + 1):
        p1, p2 = thresholds_horodecki(l)
        rows.append(ThresholdRow(l=l, p1=p1, p2=p2, ppt_bound=ppt_bound_horodecki(d, l), eps_star=eps_star(l)))
    return rows


def recurrence_noise_check(s: ShieldedState, eps: float) -> tuple[bool, float]:
    """Recurrence condition after white noise; full-rank noise breaks σ1 ⊥ σ2."""
    return recurrence_condition(add_white_noise(s, _check_eps(eps)))


# ── Aggregate ─────────────────────────────────────────────────────────────────

def full_verdict(s: ShieldedState, max_dim: int | None = None) -> Verdict:
    entangled, ent_margin = entanglement_condition(s)
    rec_ok, rec_margin = recurrence_condition(s)
    ad_ok, ad_margin = ad_condition(s)

    ppt: Optional[bool] = None
    ppt_margin: Optional[float] = None
    skipped = False
    try:
        ppt, ppt_margin = ppt_verdict(s, max_dim=max_dim)
    except ResourceLimitExceeded as exc:
        log.warning("Skipping PPT check: %s", exc)
        skipped = True

    return Verdict(
        entangled=entangled,
        entangled_margin=ent_margin,
        recurrence_ok=rec_ok,
        recurrence_margin=rec_margin,
        ad_ok=ad_ok,
        ad_margin=ad_margin,
        ppt=ppt,
        ppt_margin=ppt_margin,
        ppt_skipped=skipped,
    )
