"""Config."""

from __future__ import annotations

import math
from typing import Annotated, Literal, Optional

from annotated_types import Ge, Gt
from pydantic import BaseModel, Field, model_validator

PositiveInt = Annotated[int, Ge(1)]
PositiveFloat = Annotated[float, Gt(0)]
NormOrder = Literal[1, 2, "inf"]


def norm_ord(q: NormOrder) -> float:
    """Return the numpy ``ord`` argument for a norm order."""
    return math.inf if q == "inf" else float(q)


class VoltageBand(BaseModel):
    """Admissible voltage band, given in per-unit volts and squared internally."""

    v_min: PositiveFloat = Field(default=0.9, description="Lower voltage bound in pu.")
    v_max: PositiveFloat = Field(default=1.1, description="Upper voltage bound in pu.")

    @model_validator(mode="after")
    def validate(self) -> VoltageBand:  # type: ignore
        if self.v_min >= self.v_max:
            raise ValueError("v_min must be strictly smaller than v_max.")
        return self

    @property
    def u_lo(self) -> float:
        return self.v_min**2

    @property
    def u_hi(self) -> float:
        return self.v_max**2

    @property
    def sqrt_u_lo(self) -> float:
        return self.v_min

    @property
    def sqrt_u_hi(self) -> float:
        return self.v_max


class SolveOptions(BaseModel):
    """Options shared by all solvers."""

    tol: PositiveFloat = Field(
        default=1e-6, description="Stopping threshold in the infinity norm."
    )
    max_iter: PositiveInt = Field(
        default=10_000, description="The maximum number of iterations."
    )
    record_trace: bool = Field(
        default=False, description="Whether to keep the per-iteration metric."
    )


class MonotoneOptions(SolveOptions):
    """Options of the squared-voltage fixed-point iteration."""

    stay_in_band: bool = Field(
        default=True,
        description="Stop with LeftBand once an iterate falls below the band.",
    )


class ZbusOptions(SolveOptions):
    """Options of the Z-bus iteration."""

    radius: Optional[float] = Field(
        default=None,
        description="Ball radius for the theoretical modulus. Defaults to the smallest admissible radius.",
    )
    singular_threshold: PositiveFloat = Field(
        default=1e-9, description="Voltages below this magnitude count as singular."
    )


class EnergyOptions(SolveOptions):
    """Options of the energy-function gradient descent."""

    tol: PositiveFloat = Field(
        default=1e-8, description="Stopping threshold on the gradient infinity norm."
    )
    max_iter: PositiveInt = Field(
        default=100_000, description="The maximum number of iterations."
    )
    step_scale: PositiveFloat = Field(
        default=0.9,
        description="Initial step as a fraction of 1/lambda_max(H) at the start point.",
    )
    armijo: PositiveFloat = Field(
        default=1e-4, description="Sufficient-decrease constant of the backtracking."
    )
    max_backtracks: PositiveInt = Field(
        default=60, description="Step halvings allowed per iteration."
    )
    max_abs_rho: PositiveFloat = Field(
        default=50.0, description="Divergence threshold on the log-squared voltages."
    )
    min_energy: float = Field(
        default=-1e12, description="Divergence threshold on the energy value."
    )


class AnalysisConfig(BaseModel):
    """Configuration of the sufficient-condition checks."""

    band: VoltageBand = Field(
        default_factory=VoltageBand, description="The voltage band."
    )
    q: NormOrder = Field(default=2, description="Norm order for the contraction ball.")
    strict_current_filter: bool = Field(
        default=False,
        description="Constrain only buses with i0 strictly above the boundary current.",
    )


class McConfig(BaseModel):
    """Monte-Carlo loading configuration."""

    trials: PositiveInt = Field(default=1000, description="The number of trials.")
    seed: int = Field(default=0, ge=0, lt=2**64, description="Root seed.")
    p_scale_range: tuple[float, float] = Field(
        default=(-10.0, 10.0), description="Range of the constant-power scale."
    )
    iz_scale_range: tuple[float, float] = Field(
        default=(0.0, 10.0),
        description="Range of the constant-current and constant-conductance scale.",
    )
    max_concurrency: PositiveInt = Field(
        default=4, description="The maximum number of concurrent trials."
    )
    agreement_tol: PositiveFloat = Field(
        default=1e-5, description="Infinity distance below which two solutions agree."
    )
    solver_tol: PositiveFloat = Field(
        default=1e-9,
        description="Successive-difference tolerance of the fixed-point solvers during trials.",
    )

    @model_validator(mode="after")
    def validate(self) -> McConfig:  # type: ignore
        for name in ("p_scale_range", "iz_scale_range"):
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ValueError(f"{name} must be finite.")
            if lo > hi:
                raise ValueError(f"{name} must be ordered as (low, high).")
        return self
