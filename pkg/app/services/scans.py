"""Parameter scans behind the CLI.

Rows are evaluated on a thread pool and returned in grid order. A row whose
state cannot be built within the resource limit is kept with its ``error`` set;
the rest of the scan continues.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Optional, Sequence, TypeVar

import numpy as np

from app.config import settings
from app.errors import InvalidInput, ResourceLimitExceeded
from app.schemas import Example4x4ScanRow, HorodeckiScanRow, NoiseScanRow
from app.services.criteria import (
    ad_condition, entanglement_condition, full_verdict, noise_threshold_exact,
    noise_threshold_horodecki, noise_threshold_sufficient, recurrence_condition,
    thresholds_horodecki,
)
from app.services.shielded import (
    add_white_noise, example_4x4, horodecki_family, key_spectrum, ppt_bound_horodecki, ppt_verdict,
)

log = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def grid(start: float, stop: float, step: float) -> list[float]:
    """Inclusive arithmetic grid ``start, start+step, …, ≤ stop``."""
    if step <= 0:
        raise InvalidInput(f"grid step must be positive, got {step}")
    if stop < start:
        raise InvalidInput(f"grid stop {stop} is below start {start}")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def _ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> list[R]:
    with ThreadPoolExecutor(max_workers=workers or settings.SCAN_WORKERS) as pool:
        return list(pool.map(fn, items))


def _require_grid(values: Sequence[float], name: str, inside: Callable[[float], bool], interval: str) -> list[float]:
    values = [float(v) for v in values]
    if not values:
        raise InvalidInput(f"{name} grid is empty")
    for v in values:
        if not inside(v):
            raise InvalidInput(f"{name}={v} outside {interval}")
    return values


# ── Horodecki family ──────────────────────────────────────────────────────────

def horodecki_scan(
    d: int,
    l: int,
    p_grid: Sequence[float],
    eps: float = 0.0,
    max_dim: Optional[int] = None,
    workers: Optional[int] = None,
) -> list[HorodeckiScanRow]:
    p_grid = _require_grid(p_grid, "p", lambda v: 0.0 < v < 0.5, "(0, 1/2)")
    if not 0.0 <= eps < 1.0:
        raise InvalidInput(f"eps must lie in [0, 1), got {eps}")
    p1, p2 = thresholds_horodecki(l)
    bound = ppt_bound_horodecki(d, l)
    log.info("Horodecki scan d=%s l=%s eps=%s over %s points", d, l, eps, len(p_grid))

    def row(p: float) -> HorodeckiScanRow:
        # the analytic PPT rule holds for the noiseless family only
        analytic = p <= bound + 1e-12 if eps == 0 else None
        base = dict(d=d, l=l, p=p, eps=eps, p1=p1, p2=p2, ppt_bound=bound, ppt_analytic=analytic)
        try:
            state = horodecki_family(p, d, l, max_dim)
            if eps > 0:
                state = add_white_noise(state, eps)
            v = full_verdict(state, max_dim)
        except ResourceLimitExceeded as exc:
            log.warning("Row p=%s skipped: %s", p, exc)
            return HorodeckiScanRow(**base, error=str(exc))
        return HorodeckiScanRow(
            **base,
            entangled=v.entangled,
            entangled_margin=v.entangled_margin,
            recurrence_ok=v.recurrence_ok,
            recurrence_margin=v.recurrence_margin,
            ad_ok=v.ad_ok,
            ad_margin=v.ad_margin,
            ppt=v.ppt,
            ppt_margin=v.ppt_margin,
            key_distillable=v.ad_ok,
            bound_key=None if v.ppt is None else (v.ad_ok and v.ppt),
            error="PPT check skipped: resource limit" if v.ppt_skipped else None,
        )

    return _ordered_map(row, p_grid, workers)


# ── 4x4 example ───────────────────────────────────────────────────────────────

def example_4x4_scan(q1_grid: Sequence[float], workers: Optional[int] = None) -> list[Example4x4ScanRow]:
    q1_grid = _require_grid(q1_grid, "q1", lambda v: 0.0 <= v <= 1.0, "[0, 1]")

    def row(q1: float) -> Example4x4ScanRow:
        state = example_4x4(q1, 1.0 - q1)
        l1, l2, l3, l4 = key_spectrum(state).lambdas
        ad_ok, ad_margin = ad_condition(state)
        ppt, _ = ppt_verdict(state)
        return Example4x4ScanRow(
            q1=q1, q2=1.0 - q1,
            lambda_1=l1, lambda_2=l2, lambda_3=l3, lambda_4=l4,
            entangled=entanglement_condition(state)[0],
            recurrence_ok=recurrence_condition(state)[0],
            ad_ok=ad_ok,
            ppt=ppt,
            ad_margin=ad_margin,
        )

    return _ordered_map(row, q1_grid, workers)


# ── Noise ─────────────────────────────────────────────────────────────────────

def _ad_at(p: Optional[float], d: int, l: int, eps: float) -> Optional[bool]:
    if p is None or not 0.0 < p < 0.5:
        return None
    return ad_condition(add_white_noise(horodecki_family(p, d, l), eps))[0]


def noise_scan(
    l: int,
    eps_grid: Sequence[float],
    d: int = 2,
    delta: float = 1e-3,
    workers: Optional[int] = None,
) -> list[NoiseScanRow]:
    """Noise thresholds per ε, each checked on the noisy family at p_min ± delta."""
    eps_grid = _require_grid(eps_grid, "eps", lambda v: 0.0 <= v < 1.0, "[0, 1)")
    if delta <= 0:
        raise InvalidInput(f"delta must be positive, got {delta}")

    def row(eps: float) -> NoiseScanRow:
        literal = noise_threshold_horodecki(l, eps)
        exact = noise_threshold_exact(l, eps)
        return NoiseScanRow(
            l=l,
            eps=eps,
            p_min_literal=literal,
            p_min_sufficient=noise_threshold_sufficient(l, eps),
            p_min_exact=exact,
            ad_below_literal=_ad_at(None if literal is None else literal - delta, d, l, eps),
            ad_above_literal=_ad_at(None if literal is None else literal + delta, d, l, eps),
            ad_below_exact=_ad_at(None if exact is None else exact - delta, d, l, eps),
            ad_above_exact=_ad_at(None if exact is None else exact + delta, d, l, eps),
        )

    return _ordered_map(row, eps_grid, workers)
