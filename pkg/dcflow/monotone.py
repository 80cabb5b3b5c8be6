"""Fixed-point iteration on squared voltages, descending from the top of the band."""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from dcflow.config import MonotoneOptions, VoltageBand
from dcflow.exceptions import NonPositiveInput
from dcflow.grid import DerivedModel, residual, residual_tolerance
from dcflow.models import Method, SolveResult, Status

logger = logging.getLogger(__name__)

DIVERGENCE_FACTOR = 10.0
BAND_SLACK = 1e-9


def monotone_map(model: DerivedModel, u: np.ndarray) -> np.ndarray:
    """Squared-voltage map f(u) whose fixed points are power-flow solutions.

    f_n(u) = [sqrt(u_n) (W sqrt(u))_n + k_n sqrt(u_n) - p_n] / c_n

    :param model: The derived model.
    :param u: Positive squared voltages.
    """
    u = np.asarray(u, dtype=float)
    if not np.all(u > 0):
        raise NonPositiveInput(f"Squared voltages must be positive, got min {u.min()}")
    s = np.sqrt(u)
    return (s * (model.W @ s) + model.k * s - model.p) / model.c


def _result(
    model: DerivedModel,
    u: np.ndarray,
    iterations: int,
    status: Status,
    message: str,
    trace: Optional[list[float]],
) -> SolveResult:
    v = np.sqrt(np.maximum(u, 0.0))
    res = float(np.max(np.abs(residual(model, v)))) if np.all(v > 0) else float("inf")
    return SolveResult(
        method=Method.MONOTONE,
        v=v,
        bus_ids=model.bus_ids,
        iterations=iterations,
        status=status,
        residual_inf=res,
        message=message,
        trace=trace,
    )


def solve_monotone(
    model: DerivedModel,
    band: VoltageBand,
    opts: MonotoneOptions | None = None,
    init: np.ndarray | None = None,
) -> SolveResult:
    """Iterate u <- f(u) from u_hi everywhere.

    Under the constant-current and constant-power bounds the iterates decrease
    monotonically to the high-voltage solution. A step below tol only counts as
    convergence once the residual is within ``residual_tolerance`` as well.

    :param model: The derived model.
    :param band: The voltage band; the start point is its upper squared bound.
    :param opts: Solver options.
    :param init: Optional squared-voltage start; convergence is only covered from the band top.
    """
    opts = opts or MonotoneOptions()
    if init is None:
        u = np.full(model.P, band.u_hi)
    else:
        logger.warning("Monotone start override is not covered by the convergence theory")
        u = np.asarray(init, dtype=float).copy()
    ceiling = DIVERGENCE_FACTOR * band.u_hi
    res_tol = residual_tolerance(model, opts.tol)
    floor = band.u_lo * (1 - BAND_SLACK)
    trace: Optional[list[float]] = [] if opts.record_trace else None
    logger.info(f"Monotone iteration on {model.P} buses, tol={opts.tol}")

    for t in range(1, opts.max_iter + 1):
        try:
            u_next = monotone_map(model, u)
        except NonPositiveInput:
            return _result(model, u, t - 1, Status.DOMAIN_ERROR, "non-positive iterate", trace)
        if not np.all(np.isfinite(u_next)) or not np.all(u_next > 0):
            return _result(
                model, u, t - 1, Status.DOMAIN_ERROR, "map produced a non-positive entry", trace
            )
        diff = float(np.max(np.abs(u_next - u)))
        if trace is not None:
            trace.append(diff)
        u = u_next
        logger.debug(f"iteration {t}: |du|_inf={diff:.3e}")
        if np.any(u > ceiling):
            return _result(model, u, t, Status.DIVERGED, f"iterate exceeded {ceiling:.4g}", trace)
        if opts.stay_in_band and np.any(u < floor):
            return _result(
                model, u, t, Status.LEFT_BAND, f"iterate fell below u_lo={band.u_lo:.4g}", trace
            )
        if diff <= opts.tol:
            res = float(np.max(np.abs(residual(model, np.sqrt(u)))))
            if res <= res_tol:
                logger.info(f"Monotone iteration converged in {t} iterations")
                return _result(
                    model, u, t, Status.CONVERGED, "successive difference and residual below tol", trace
                )
            logger.debug(f"iteration {t}: residual {res:.3e} still above {res_tol:.3e}")

    return _result(
        model, u, opts.max_iter, Status.MAX_ITERATIONS, "iteration limit reached", trace
    )


def is_high_voltage(v: np.ndarray, others: list[np.ndarray], tol: float = 1e-6) -> bool:
    """Whether v dominates every other solution entrywise within tol."""
    return all(bool(np.all(v >= other - tol)) for other in others)

