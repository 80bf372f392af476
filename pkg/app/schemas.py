from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, Field, RootModel, field_validator, model_validator


# ── Operators ─────────────────────────────────────────────────────────────────

class MatrixPayload(BaseModel):
    """Row-major complex matrix; each entry is a [re, im] pair."""

    dim: int = Field(ge=1)
    entries: list[list[tuple[float, float]]]

    @model_validator(mode="after")
    def check_shape(self):
        if len(self.entries) != self.dim or any(len(row) != self.dim for row in self.entries):
            raise ValueError(f"entries must be a {self.dim}x{self.dim} array of [re, im] pairs")
        return self


# ── State specs ───────────────────────────────────────────────────────────────

class _NoiseMixin(BaseModel):
    noise_eps: Optional[float] = None

    @field_validator("noise_eps")
    @classmethod
    def check_eps(cls, v):
        if v is not None and not 0.0 <= v <= 1.0:
            raise ValueError("noise_eps must lie in [0, 1]")
        return v


class HorodeckiSpec(_NoiseMixin):
    family: Literal["horodecki"]
    p: float
    d: int
    l: int


class Example4x4Spec(_NoiseMixin):
    family: Literal["example4x4"]
    q1: float
    q2: float


class ExplicitSpec(_NoiseMixin):
    family: Literal["explicit"]
    sigma: list[MatrixPayload] = Field(min_length=4, max_length=4)
    shield_dims: tuple[int, int]


StateSpec = Annotated[
    Union[HorodeckiSpec, Example4x4Spec, ExplicitSpec],
    Field(discriminator="family"),
]


class StateSpecDocument(RootModel[StateSpec]):
    pass


# ── Verdicts ──────────────────────────────────────────────────────────────────

class KeySpectrumResponse(BaseModel):
    lambda_1: float
    lambda_2: float
    lambda_3: float
    lambda_4: float


class Verdict(BaseModel):
    entangled: bool
    entangled_margin: float
    recurrence_ok: bool
    recurrence_margin: float
    ad_ok: bool
    ad_margin: float
    ppt: Optional[bool] = None
    ppt_margin: Optional[float] = None
    ppt_skipped: bool = False


class CheckResponse(BaseModel):
    family: str
    shield_dims: tuple[int, int]
    noise_eps: Optional[float] = None
    key_spectrum: KeySpectrumResponse
    verdict: Verdict


# ── Recurrence ────────────────────────────────────────────────────────────────

class RecurrenceStep(BaseModel):
    round: Optional[int] = None
    effective_m: int
    r: float
    success_prob: Optional[float] = None
    closed_form_r: float

    @field_validator("r", "closed_form_r")
    @classmethod
    def check_range(cls, v):
        if not -1e-10 <= v <= 0.5 + 1e-10:
            raise ValueError(f"off-diagonal norm {v} outside [0, 1/2]")
        return v


class RecurrenceTrace(BaseModel):
    steps: list[RecurrenceStep]
    truncated: bool = False
    truncated_at: Optional[int] = None
    message: Optional[str] = None

    @property
    def r(self) -> list[float]:
        return [step.r for step in self.steps]

    @property
    def success_prob(self) -> list[Optional[float]]:
        return [step.success_prob for step in self.steps]


# ── Advantage distillation ────────────────────────────────────────────────────

class AdBlockStats(BaseModel):
    block_size: int
    accept_prob: float
    post_error: float
    eve_overlap_effective: float
    trials: Optional[int] = None
    accepted: Optional[int] = None
    accept_se: Optional[float] = None
    post_error_se: Optional[float] = None


class AdSimulationReport(BaseModel):
    p_ab: list[list[float]]
    eve_overlap: float
    security_ok: bool
    security_margin: float
    seed: int
    chunk_size: int
    analytic: AdBlockStats
    empirical: AdBlockStats


# ── Scan rows ─────────────────────────────────────────────────────────────────

class HorodeckiScanRow(BaseModel):
    d: int
    l: int
    p: float
    eps: float
    entangled: Optional[bool] = None
    entangled_margin: Optional[float] = None
    recurrence_ok: Optional[bool] = None
    recurrence_margin: Optional[float] = None
    ad_ok: Optional[bool] = None
    ad_margin: Optional[float] = None
    ppt: Optional[bool] = None
    ppt_margin: Optional[float] = None
    ppt_analytic: Optional[bool] = None
    key_distillable: Optional[bool] = None
    bound_key: Optional[bool] = None
    p1: float
    p2: float
    ppt_bound: float
    error: Optional[str] = None


class Example4x4ScanRow(BaseModel):
    q1: float
    q2: float
    lambda_1: float
    lambda_2: float
    lambda_3: float
    lambda_4: float
    entangled: bool
    recurrence_ok: bool
    ad_ok: bool
    ppt: Optional[bool] = None
    ad_margin: float


class NoiseScanRow(BaseModel):
    l: int
    eps: float
    p_min_literal: Optional[float] = None
    p_min_sufficient: Optional[float] = None
    p_min_exact: Optional[float] = None
    ad_below_literal: Optional[bool] = None
    ad_above_literal: Optional[bool] = None
    ad_below_exact: Optional[bool] = None
    ad_above_exact: Optional[bool] = None


class ThresholdRow(BaseModel):
    l: int
    p1: float
    p2: float
    ppt_bound: float
    eps_star: float
