"""Z-bus fixed-point iteration v <- Z [k - D(v) p] and its contraction diagnostics."""

from __future__ import annotations

import logging
from typing import Iterable, Optional

import numpy as np

from dcflow.conditions import BallAnalysis, contraction_analysis
from dcflow.config import NormOrder, VoltageBand, ZbusOptions
from dcflow.exceptions import ZeroVoltageEntry
from dcflow.grid import DerivedModel, residual, residual_tolerance
from dcflow.models import Method, SolveResult, Status, ZbusDiagnostics
from dcflow.numerics import vector_norm

logger = logging.getLogger(__name__)

GROWTH_FACTOR = 10.0


def zbus_map(model: DerivedModel, v: np.ndarray) -> np.ndarray:
    """Z-bus map h(v) = Z [k - D(v) p] with D(v) = diag(v)^-1.

    :param model: The derived model.
    :param v: Voltages with no zero entry.
    """
    v = np.asarray(v, dtype=float)
    if np.any(v == 0):
        raise ZeroVoltageEntry(f"Z-bus map undefined at zero voltage (bus {model.bus_id(int(np.argmin(np.abs(v))))})")
    # d - Z (p / v) returns d exactly when p = 0
    return model.d - model.Z @ (model.p / v)


def seed_start(model: DerivedModel, threshold: float = 1e-9) -> np.ndarray:
    """Default start d, with near-zero entries replaced by a per-bus estimate.

    Such entries get the positive root of c_n v^2 - (k_n + (W d)_n) v + p_n = 0,
    or 1 pu when the decoupled quadratic has none.
    """
    start = np.array(model.d, dtype=float)
    near_zero = np.abs(start) < threshold
    if not np.any(near_zero):
        return start
    b = model.k + model.W @ model.d
    disc = b**2 - 4 * model.c * model.p
    root = (b + np.sqrt(np.maximum(disc, 0.0))) / (2 * model.c)
    estimate = np.where((disc >= 0) & (root > threshold), root, 1.0)
    start[near_zero] = estimate[near_zero]
    logger.debug(f"Seeded {int(near_zero.sum())} near-zero entries of d")
    return start


def monotone_h_ok(model: DerivedModel, band: VoltageBand) -> bool:
    """Advisory check for the monotone reading of h when no bus injects constant power."""
    if np.any(model.p < 0):
        return False
    return bool(np.all(model.i0 + model.g0 + model.p / band.sqrt_u_hi >= 0))


def _radius(ball: BallAnalysis, requested: Optional[float]) -> Optional[float]:
    if requested is not None:
        return requested
    return ball.r_under


def solve_zbus(
    model: DerivedModel,
    band: VoltageBand,
    opts: ZbusOptions | None = None,
    init: np.ndarray | None = None,
    q: NormOrder = 2,
) -> SolveResult:
    """Iterate the Z-bus map until successive voltages agree within tol and the
    residual is within ``residual_tolerance``.

    When the contraction ball is non-empty the iterates converge to the unique
    solution near d. Diagnostics are computed either way.

    :param model: The derived model.
    :param band: The voltage band, used by the advisory monotone check.
    :param opts: Solver options.
    :param init: Optional start; defaults to d.
    :param q: Norm order of the contraction ball.
    """
    opts = opts or ZbusOptions()
    ball = contraction_analysis(model, band, q)
    r_used = _radius(ball, opts.radius)
    alpha_theoretical = ball.alpha(r_used) if r_used is not None else None
    v = seed_start(model, opts.singular_threshold) if init is None else np.array(init, dtype=float)
    limit = GROWTH_FACTOR * (ball.d_max + 1.0)
    res_tol = residual_tolerance(model, opts.tol)

    trace: Optional[list[float]] = [] if opts.record_trace else None
    ratios: list[float] = []
    distances: list[float] = [vector_norm(v - model.d, q)]
    prev_step: Optional[float] = None
    status, message, iterations = Status.MAX_ITERATIONS, "iteration limit reached", opts.max_iter
    logger.info(f"Z-bus iteration on {model.P} buses, tol={opts.tol}")

    for t in range(1, opts.max_iter + 1):
        try:
            v_next = zbus_map(model, v)
        except ZeroVoltageEntry as e:
            status, message, iterations = Status.DIVERGED, str(e), t - 1
            break
        if not np.all(np.isfinite(v_next)) or np.any(v_next < opts.singular_threshold):
            status, message, iterations = Status.DIVERGED, "iterate reached a non-positive voltage", t - 1
            break
        if vector_norm(v_next, "inf") > limit:
            status, message, iterations = Status.DIVERGED, f"iterate norm exceeded {limit:.4g}", t - 1
            break
        diff = float(np.max(np.abs(v_next - v)))
        step = vector_norm(v_next - v, q)
        if trace is not None:
            trace.append(diff)
        if prev_step is not None and prev_step > 0:
            ratios.append(step / prev_step)
        prev_step = step
        v = v_next
        distances.append(vector_norm(v - model.d, q))
        logger.debug(f"iteration {t}: |dv|_inf={diff:.3e}")
        if diff <= opts.tol:
            res = float(np.max(np.abs(residual(model, v))))
            if res <= res_tol:
                status, message = Status.CONVERGED, "successive difference and residual below tol"
                iterations = t
                logger.info(f"Z-bus iteration converged in {t} iterations")
                break
            logger.debug(f"iteration {t}: residual {res:.3e} still above {res_tol:.3e}")

    stayed = ball.r_over is not None and all(dist <= ball.r_over + 1e-12 for dist in distances)
    diagnostics = ZbusDiagnostics(
        alpha_theoretical=alpha_theoretical,
        alpha_empirical=max(ratios, default=0.0),
        r_used=r_used,
        stayed_in_ball=stayed,
        monotone_h_ok=monotone_h_ok(model, band),
        ratios=ratios,
        distances=distances,
    )
    positive = np.all(v > 0)
    return SolveResult(
        method=Method.ZBUS,
        v=v,
        bus_ids=model.bus_ids,
        iterations=iterations,
        status=status,
        residual_inf=float(np.max(np.abs(residual(model, v)))) if positive else float("inf"),
        message=message,
        trace=trace,
        diagnostics=diagnostics,
    )


def solve_zbus_multistart(
    model: DerivedModel,
    band: VoltageBand,
    inits: Iterable[np.ndarray],
    opts: ZbusOptions | None = None,
    q: NormOrder = 2,
) -> list[SolveResult]:
    """Run the Z-bus iteration from several starting points."""
    return [solve_zbus(model, band, opts, init=init, q=q) for init in inits]
