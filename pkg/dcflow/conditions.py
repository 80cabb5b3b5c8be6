"""Sufficient conditions for solver convergence and the method-selection flowchart.

Every check reports per-bus margins as right-hand side minus left-hand side of
its inequality, so a negative margin marks a violating bus and 0 is the boundary.
"""

from __future__ import annotations

import logging
import math
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from dcflow.config import AnalysisConfig, NormOrder, VoltageBand
from dcflow.grid import DerivedModel
from dcflow.models import Method
from dcflow.numerics import induced_norm, vector_norm

logger = logging.getLogger(__name__)


class ConditionCheck(BaseModel):
    """Outcome of a per-bus inequality."""

    ok: bool = Field(description="Whether every margin is non-negative.")
    margins: list[float] = Field(description="Per-bus margins, +inf if unconstrained.")
    worst_bus: Optional[int] = Field(
        default=None, description="Network id of the bus with the smallest finite margin."
    )
    worst_margin: float = Field(default=math.inf, description="The smallest margin.")

    model_config = ConfigDict(ser_json_inf_nan="constants")

    @classmethod
    def from_margins(cls, model: DerivedModel, margins: np.ndarray) -> ConditionCheck:
        margins = np.asarray(margins, dtype=float)
        worst = int(np.argmin(margins))
        worst_margin = float(margins[worst])
        return cls(
            ok=bool(np.all(margins >= 0)),
            margins=[float(m) for m in margins],
            worst_bus=model.bus_id(worst) if math.isfinite(worst_margin) else None,
            worst_margin=worst_margin,
        )

    def summary(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "worst_bus": self.worst_bus,
            "worst_margin": self.worst_margin if math.isfinite(self.worst_margin) else None,
        }


class BallAnalysis(BaseModel):
    """Radius analysis of the Z-bus contraction ball around d."""

    q: NormOrder = Field(description="Norm order of the ball.")
    beta: float = Field(description="Norm of Z times norm of p.")
    d_min: float = Field(description="Smallest |d_n|.")
    d_max: float = Field(description="Largest |d_n|.")
    feasible: bool = Field(description="Whether d_min^2 >= 4 beta.")
    r_under: Optional[float] = Field(
        default=None, description="Smallest admissible radius, localising the solution."
    )
    r_over: Optional[float] = Field(
        default=None, description="Largest admissible radius, certifying uniqueness."
    )
    ball_in_box: Optional[bool] = Field(
        default=None, description="Whether the smallest ball lies inside the voltage band."
    )
    box_in_ball: Optional[bool] = Field(
        default=None, description="Whether the voltage band lies inside the largest ball."
    )

    def alpha(self, radius: float) -> Optional[float]:
        """Contraction modulus beta / (d_min - R)^2 on the ball of the given radius."""
        gap = self.d_min - radius
        if gap <= 0:
            return None
        return self.beta / gap**2

    def summary(self) -> dict[str, Any]:
        return self.model_dump()


class MethodChoice(BaseModel):
    """Solver recommended by the flowchart."""

    method: Method
    rationale: str


class ConditionReport(BaseModel):
    """All sufficient conditions evaluated on one model."""

    monotone_current: ConditionCheck
    monotone_power: ConditionCheck
    contraction: BallAnalysis
    global_convexity: ConditionCheck
    local_convexity: ConditionCheck
    lambda_min_G: float
    recommended: Optional[MethodChoice] = None

    model_config = ConfigDict(ser_json_inf_nan="constants")

    @property
    def monotone_ok(self) -> bool:
        return self.monotone_current.ok and self.monotone_power.ok

    def summary(self) -> dict[str, Any]:
        """JSON-ready digest: per condition the flag, worst bus and worst margin."""
        return {
            "monotone_current": self.monotone_current.summary(),
            "monotone_power": self.monotone_power.summary(),
            "contraction": self.contraction.summary(),
            "global_convexity": self.global_convexity.summary(),
            "local_convexity": self.local_convexity.summary(),
            "lambda_min_G": self.lambda_min_G,
            "recommended": self.recommended.model_dump(mode="json")
            if self.recommended
            else None,
        }


def monotone_coefficient(band: VoltageBand) -> float:
    """Ratio u_lo / sqrt(2 u_hi - u_lo) bounding the constant currents."""
    return band.u_lo / math.sqrt(2 * band.u_hi - band.u_lo)


def check_monotone_current(
    model: DerivedModel, band: VoltageBand, strict: bool = False
) -> ConditionCheck:
    """Constant-current bound making the squared-voltage map monotone in the band.

    Only buses whose constant current reaches the current fed by their
    constant-voltage neighbours are constrained; with ``strict`` the current
    must exceed it.
    """
    if strict:
        constrained = model.i0 > model.boundary_current
    else:
        constrained = model.i0 >= model.boundary_current
    margins = np.where(
        constrained, monotone_coefficient(band) * model.gn - model.i0, math.inf
    )
    return ConditionCheck.from_margins(model, margins)


def check_monotone_power(model: DerivedModel, band: VoltageBand) -> ConditionCheck:
    """Lower bound on constant-power generation for convergence from the band top."""
    margins = band.u_hi * model.g0 + band.sqrt_u_hi * model.i0 + model.p
    return ConditionCheck.from_margins(model, margins)


def contraction_analysis(
    model: DerivedModel, band: VoltageBand, q: NormOrder = 2
) -> BallAnalysis:
    """Admissible radii of the Z-bus contraction ball and its position against the band."""
    beta = induced_norm(model.Z, q) * vector_norm(model.p, q)
    abs_d = np.abs(model.d)
    d_min = float(abs_d.min())
    d_max = float(abs_d.max())
    disc = d_min**2 - 4 * beta
    if disc < 0:
        return BallAnalysis(q=q, beta=beta, d_min=d_min, d_max=d_max, feasible=False)

    # 2 beta / (d + sqrt(disc)) equals (d - sqrt(disc)) / 2 without the cancellation
    root = math.sqrt(disc)
    r_under = 2 * beta / (d_min + root) if beta > 0 else 0.0
    r_over = d_min - math.sqrt(beta)
    ball_in_box = r_under <= min(d_min - band.sqrt_u_lo, band.sqrt_u_hi - d_max)
    center = (band.sqrt_u_lo + band.sqrt_u_hi) * np.ones(model.P) - 2 * model.d
    spread = (band.sqrt_u_hi - band.sqrt_u_lo) * vector_norm(np.ones(model.P), q)
    box_in_ball = vector_norm(center, q) + spread <= 2 * r_over
    return BallAnalysis(
        q=q,
        beta=beta,
        d_min=d_min,
        d_max=d_max,
        feasible=True,
        r_under=r_under,
        r_over=r_over,
        ball_in_box=bool(ball_in_box),
        box_in_ball=bool(box_in_ball),
    )


def check_global_convexity(model: DerivedModel, band: VoltageBand) -> ConditionCheck:
    """Per-bus bound making the energy function convex over the whole band."""
    coupling = model.W.sum(axis=1)
    margins = band.sqrt_u_lo * (
        model.lambda_min_G + model.c - math.sqrt(band.u_hi / band.u_lo) * coupling
    ) - np.maximum(model.k, 0.0)
    return ConditionCheck.from_margins(model, margins)


def check_local_convexity(model: DerivedModel, band: VoltageBand) -> ConditionCheck:
    """State-independent bound making the energy function convex at every solution in the band."""
    margins = model.lambda_min_G * band.u_lo - np.maximum(model.p, 0.0)
    return ConditionCheck.from_margins(model, margins)


def select_method(report: ConditionReport) -> MethodChoice:
    """Pick a solver: Z-bus if the contraction ball exists, else monotone, else energy."""
    ball = report.contraction
    if ball.feasible:
        return MethodChoice(
            method=Method.ZBUS,
            rationale=(
                f"d_min^2 = {ball.d_min**2:.6g} >= 4 beta = {4 * ball.beta:.6g}: "
                "Z-bus contracts to the unique solution near d"
            ),
        )
    if report.monotone_ok:
        return MethodChoice(
            method=Method.MONOTONE,
            rationale=(
                "contraction ball empty; constant-current and constant-power bounds "
                "hold, so the squared-voltage iteration reaches the high-voltage solution"
            ),
        )
    failed = "constant-current" if not report.monotone_current.ok else "constant-power"
    return MethodChoice(
        method=Method.ENERGY,
        rationale=(
            f"contraction ball empty and the {failed} bound fails "
            f"(worst margin {min(report.monotone_current.worst_margin, report.monotone_power.worst_margin):.6g}); "
            "falling back to energy minimisation"
        ),
    )


def analyze(model: DerivedModel, config: AnalysisConfig | None = None) -> ConditionReport:
    """Evaluate every condition and attach the recommended method.

    :param model: The derived model.
    :param config: Band, norm order and filter configuration.
    """
    config = config or AnalysisConfig()
    band = config.band
    report = ConditionReport(
        monotone_current=check_monotone_current(
            model, band, strict=config.strict_current_filter
        ),
        monotone_power=check_monotone_power(model, band),
        contraction=contraction_analysis(model, band, config.q),
        global_convexity=check_global_convexity(model, band),
        local_convexity=check_local_convexity(model, band),
        lambda_min_G=model.lambda_min_G,
    )
    report = report.model_copy(update={"recommended": select_method(report)})
    logger.info(
        f"Conditions: contraction={report.contraction.feasible} "
        f"monotone={report.monotone_ok} recommended={report.recommended.method}"  # type: ignore[union-attr]
    )
    return report
