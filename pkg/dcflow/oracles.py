"""Independent reference solutions used to check the solvers."""

from __future__ import annotations

import logging
import math

import numpy as np

from dcflow.exceptions import NoPositiveRoot
from dcflow.grid import DerivedModel, residual

logger = logging.getLogger(__name__)

DEDUP_TOL = 1e-5


def oracle_single_pbus(model: DerivedModel) -> list[float]:
    """Positive roots of c v^2 - k v + p = 0, largest first.

    :param model: A model with exactly one ZIP bus.
    """
    if model.P != 1:
        raise ValueError(f"Closed form needs exactly one ZIP bus, got {model.P}")
    c, k, p = float(model.c[0]), float(model.k[0]), float(model.p[0])
    disc = k * k - 4 * c * p
    if disc < 0:
        raise NoPositiveRoot(f"Discriminant {disc:.6g} is negative")
    root = math.sqrt(disc)
    roots = sorted({(k + root) / (2 * c), (k - root) / (2 * c)}, reverse=True)
    positive = [r for r in roots if r > 0]
    if not positive:
        raise NoPositiveRoot(f"Roots {roots} are not positive")
    return positive


def jacobian(model: DerivedModel, v: np.ndarray) -> np.ndarray:
    """Jacobian of the residual with respect to v."""
    return np.diag(2 * model.c * v - model.W @ v - model.k) - v[:, None] * model.W


def _damped_newton(
    model: DerivedModel, v: np.ndarray, max_iter: int = 100, tol: float = 1e-10
) -> np.ndarray | None:
    scale = tol * max(1.0, float(np.max(np.abs(model.p), initial=0.0)))
    r = residual(model, v)
    for _ in range(max_iter):
        norm = float(np.max(np.abs(r)))
        if norm < scale:
            return v
        try:
            dv = np.linalg.solve(jacobian(model, v), -r)
        except np.linalg.LinAlgError:
            return None
        step = 1.0
        for _ in range(40):
            trial = v + step * dv
            if np.all(trial > 0):
                r_trial = residual(model, trial)
                if float(np.max(np.abs(r_trial))) < norm:
                    break
            step /= 2
        else:
            return None
        v, r = trial, r_trial
    return None


def oracle_multistart(model: DerivedModel, starts: int, seed: int) -> list[np.ndarray]:
    """Distinct positive solutions found by damped Newton from random starts.

    :param model: The derived model; intended for a handful of buses.
    :param starts: Number of random starts drawn in [0.1, 2.0] per bus.
    :param seed: Random seed.
    """
    rng = np.random.default_rng(seed)
    found: list[np.ndarray] = []
    for _ in range(starts):
        root = _damped_newton(model, rng.uniform(0.1, 2.0, size=model.P))
        if root is None:
            continue
        if all(np.max(np.abs(root - other)) >= DEDUP_TOL for other in found):
            found.append(root)
    logger.debug(f"Multistart oracle found {len(found)} solutions from {starts} starts")
    return sorted(found, key=lambda x: tuple(-x))


def in_root_set(v: np.ndarray, roots: list[np.ndarray], tol: float = DEDUP_TOL) -> bool:
    """Whether v matches one of the roots within tol in the infinity norm."""
    return any(np.max(np.abs(np.asarray(v) - root)) < tol for root in roots)
