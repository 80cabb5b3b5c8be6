"""Energy function over log-squared voltages and its gradient-descent solver.

With rho_n = log u_n the energy is

    E(rho) = sum_n [c_n e^rho_n - 2 k_n e^(rho_n/2) + p_n rho_n]
             - sum_{n<m} 2 g_nm e^((rho_n + rho_m)/2)

Its gradient is the power-flow mismatch, so stationary points are exactly the
power-flow solutions. The coupling sum runs over unordered pairs, which is what
makes the gradient match the mismatch term for term.
"""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from dcflow.config import EnergyOptions, VoltageBand
from dcflow.exceptions import EnergyOverflow
from dcflow.grid import DerivedModel, residual
from dcflow.models import Method, SolveResult, Status
from dcflow.numerics import max_eigenvalue_sym, min_eigenvalue_sym

logger = logging.getLogger(__name__)

NOISE_ULPS = 64
# Armijo is trusted only when the expected decrease exceeds this many noise levels
RESOLVABLE = 8.0


class EnergyState(BaseModel):
    """A point of the descent."""

    rho: np.ndarray = Field(description="Log-squared voltages.")
    value: float = Field(description="Energy at rho.")
    grad_norm_inf: float = Field(description="Infinity norm of the gradient at rho.")

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @property
    def v(self) -> np.ndarray:
        return np.exp(self.rho / 2)


class HessianBundle(BaseModel):
    """Hessian of the energy and its scaled form G + diag(K)."""

    H: np.ndarray = Field(description="Hessian of E at rho.")
    H_tilde: np.ndarray = Field(description="2 diag(e^-rho/2) H diag(e^-rho/2).")
    K_diag: np.ndarray = Field(description="Diagonal correction K with H_tilde = G + diag(K).")
    lambda_min_tilde: float = Field(description="Smallest eigenvalue of H_tilde.")

    model_config = ConfigDict(arbitrary_types_allowed=True)


def _exp(x: np.ndarray) -> np.ndarray:
    try:
        with np.errstate(over="raise"):
            return np.exp(x)
    except FloatingPointError:
        raise EnergyOverflow(f"Exponential overflow at max argument {np.max(x):.4g}")


def energy_value(model: DerivedModel, rho: np.ndarray) -> float:
    """Energy E(rho)."""
    rho = np.asarray(rho, dtype=float)
    u = _exp(rho)
    s = _exp(rho / 2)
    value = float(np.sum(model.c * u - 2 * model.k * s + model.p * rho) - s @ model.W @ s)
    if not np.isfinite(value):
        raise EnergyOverflow("Energy is not finite")
    return value


def energy_noise(model: DerivedModel, rho: np.ndarray) -> float:
    """Round-off scale of ``energy_value`` at rho, from the magnitude of its terms."""
    rho = np.asarray(rho, dtype=float)
    u = _exp(rho)
    s = _exp(rho / 2)
    magnitude = float(
        np.sum(np.abs(model.c * u) + np.abs(2 * model.k * s) + np.abs(model.p * rho))
        + s @ model.W @ s
    )
    return NOISE_ULPS * np.finfo(float).eps * (1.0 + magnitude)


def energy_gradient(model: DerivedModel, rho: np.ndarray) -> np.ndarray:
    """Gradient c e^rho - e^(rho/2) W e^(rho/2) - k e^(rho/2) + p."""
    rho = np.asarray(rho, dtype=float)
    u = _exp(rho)
    s = _exp(rho / 2)
    return model.c * u - s * (model.W @ s) - model.k * s + model.p


def hessian(model: DerivedModel, rho: np.ndarray) -> HessianBundle:
    """Hessian of the energy, its scaled form and the smallest scaled eigenvalue."""
    rho = np.asarray(rho, dtype=float)
    u = _exp(rho)
    s = _exp(rho / 2)
    coupled = model.W @ s
    H = np.diag(model.c * u - 0.5 * s * coupled - 0.5 * model.k * s) - 0.5 * np.outer(
        s, s
    ) * model.W
    inv_s = 1.0 / s
    H_tilde = 2 * (inv_s[:, None] * H * inv_s[None, :])
    K_diag = model.c - coupled * inv_s - model.k * inv_s
    return HessianBundle(
        H=H,
        H_tilde=H_tilde,
        K_diag=K_diag,
        lambda_min_tilde=min_eigenvalue_sym(H_tilde),
    )


def _result(
    model: DerivedModel,
    rho: np.ndarray,
    iterations: int,
    status: Status,
    message: str,
    trace: Optional[list[float]],
    energies: Optional[list[float]],
) -> SolveResult:
    with np.errstate(over="ignore", under="ignore"):
        v = np.exp(rho / 2)
    finite = bool(np.all(np.isfinite(v)) and np.all(v > 0))
    return SolveResult(
        method=Method.ENERGY,
        v=v,
        bus_ids=model.bus_ids,
        iterations=iterations,
        status=status,
        residual_inf=float(np.max(np.abs(residual(model, v)))) if finite else float("inf"),
        message=message,
        trace=trace,
        energy_trace=energies,
    )


def initial_step(model: DerivedModel, rho: np.ndarray, scale: float) -> float:
    """Step scale / lambda_max(H(rho)), or scale itself when H has no positive eigenvalue."""
    lam = max_eigenvalue_sym(hessian(model, rho).H)
    return scale / lam if lam > 0 and np.isfinite(lam) else scale


def solve_energy(
    model: DerivedModel,
    band: VoltageBand,
    opts: EnergyOptions | None = None,
    init: np.ndarray | None = None,
) -> SolveResult:
    """Minimise the energy by gradient descent with Armijo backtracking.

    Near a minimum the decrease of E drops below its round-off (``energy_noise``);
    from there a step is accepted when it shortens the gradient without raising E
    beyond that noise. A step too short to move rho ends the descent.

    An energy that keeps decreasing past the divergence thresholds means no
    power-flow solution was found.

    :param model: The derived model.
    :param band: The voltage band, only reported in the logs.
    :param opts: Solver options.
    :param init: Optional log-squared start; defaults to the flat profile rho = 0.
    """
    opts = opts or EnergyOptions()
    rho = np.zeros(model.P) if init is None else np.array(init, dtype=float)
    trace: Optional[list[float]] = [] if opts.record_trace else None
    energies: Optional[list[float]] = [] if opts.record_trace else None
    logger.info(
        f"Energy descent on {model.P} buses, tol={opts.tol}, band={band.v_min}-{band.v_max}"
    )

    try:
        step0 = initial_step(model, rho, opts.step_scale)
        value = energy_value(model, rho)
        grad = energy_gradient(model, rho)
    except EnergyOverflow as e:
        return _result(model, rho, 0, Status.DIVERGED, str(e), trace, energies)

    for t in range(1, opts.max_iter + 1):
        grad_norm = float(np.max(np.abs(grad)))
        if grad_norm <= opts.tol:
            logger.info(f"Energy descent converged in {t - 1} iterations")
            return _result(model, rho, t - 1, Status.CONVERGED, "gradient below tol", trace, energies)

        sq = float(grad @ grad)
        noise = energy_noise(model, rho)
        step = step0
        accepted = stalled = False
        for _ in range(opts.max_backtracks):
            candidate = rho - step * grad
            if np.array_equal(candidate, rho):
                stalled = True
                break
            try:
                cand_value = energy_value(model, candidate)
                cand_grad = energy_gradient(model, candidate)
            except EnergyOverflow:
                step /= 2
                continue
            if step * sq > RESOLVABLE * noise:
                accepted = cand_value <= value - opts.armijo * step * sq
            else:
                # E cannot resolve the decrease; ask for a shorter gradient instead
                accepted = cand_value <= value + noise and float(cand_grad @ cand_grad) < sq
            if accepted:
                break
            step /= 2
        if not accepted:
            reason = "line search stalled" if stalled else "line search found no descent"
            return _result(
                model,
                rho,
                t - 1,
                Status.DIVERGED,
                f"{reason} at gradient {grad_norm:.3e}",
                trace,
                energies,
            )

        rho, value, grad = candidate, cand_value, cand_grad
        if trace is not None and energies is not None:
            energies.append(value)
            trace.append(float(np.max(np.abs(grad))))
        logger.debug(f"iteration {t}: E={value:.10g} step={step:.3e}")
        if value < opts.min_energy or np.max(np.abs(rho)) > opts.max_abs_rho:
            return _result(
                model, rho, t, Status.DIVERGED, "energy unbounded below, no solution found", trace, energies
            )

    return _result(
        model, rho, opts.max_iter, Status.MAX_ITERATIONS, "iteration limit reached", trace, energies
    )


def state(model: DerivedModel, rho: np.ndarray) -> EnergyState:
    """Energy, gradient norm and rho bundled together."""
    rho = np.asarray(rho, dtype=float)
    return EnergyState(
        rho=rho,
        value=energy_value(model, rho),
        grad_norm_inf=float(np.max(np.abs(energy_gradient(model, rho)))),
    )
