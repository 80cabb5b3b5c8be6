"""
High-level entry points: solving with the flowchart, Monte-Carlo studies, loading sweeps and timings.
"""

from __future__ import annotations

import asyncio
import pathlib
import time
from logging import getLogger
from typing import Iterable, Optional

import numpy as np
from pydantic import BaseModel, Field, validate_call

from dcflow.conditions import ConditionReport, analyze
from dcflow.config import (
    AnalysisConfig,
    EnergyOptions,
    McConfig,
    MonotoneOptions,
    NormOrder,
    SolveOptions,
    VoltageBand,
    ZbusOptions,
)
from dcflow.data import TrialRecord, success
from dcflow.energy import solve_energy
from dcflow.files import writers
from dcflow.generate import scale_power
from dcflow.grid import DerivedModel, derive, validate
from dcflow.models import Method, Network, SolveResult
from dcflow.monotone import solve_monotone
from dcflow.worker import FailedTrial, MonteCarloWorker
from dcflow.zbus import solve_zbus

logger = getLogger(__name__)

FLOWCHART_ORDER = (Method.ZBUS, Method.MONOTONE, Method.ENERGY)


def default_options(method: Method, **overrides) -> SolveOptions:
    """Solver options of a method with field overrides applied."""
    options: dict[Method, type[SolveOptions]] = {
        Method.ZBUS: ZbusOptions,
        Method.MONOTONE: MonotoneOptions,
        Method.ENERGY: EnergyOptions,
    }
    return options[method](**{k: v for k, v in overrides.items() if v is not None})


def run_solver(
    method: Method,
    model: DerivedModel,
    band: VoltageBand,
    opts: SolveOptions | None = None,
    q: NormOrder = 2,
) -> SolveResult:
    """Dispatch to one of the three solvers."""
    opts = opts or default_options(method)
    if method == Method.ZBUS:
        return solve_zbus(model, band, opts, q=q)  # type: ignore[arg-type]
    if method == Method.MONOTONE:
        return solve_monotone(model, band, opts)  # type: ignore[arg-type]
    return solve_energy(model, band, opts)  # type: ignore[arg-type]


def solve(
    network: Network,
    method: Method | str = "auto",
    *,
    config: AnalysisConfig | None = None,
    tol: float | None = None,
    max_iter: int | None = None,
    record_trace: bool = False,
    fallback: bool = False,
) -> tuple[SolveResult, ConditionReport]:
    """Validate, derive, check the conditions and solve.

    :param network: The network case.
    :param method: A solver name or ``auto`` for the flowchart choice.
    :param config: Band, norm order and filter; defaults to the network's.
    :param fallback: On failure, try the remaining methods in flowchart order.
    :return: The result of the last solver run and the condition report.
    """
    validate(network)
    config = config or AnalysisConfig(band=network.band, q=network.q)
    model = derive(network)
    report = analyze(model, config)
    first = report.recommended.method if method == "auto" else Method(method)  # type: ignore[union-attr]
    order = [first] + [m for m in FLOWCHART_ORDER if m != first] if fallback else [first]

    result: SolveResult | None = None
    for candidate in order:
        opts = default_options(candidate, tol=tol, max_iter=max_iter, record_trace=record_trace)
        result = run_solver(candidate, model, config.band, opts, q=config.q)
        if result.converged:
            break
        logger.info(f"{candidate} ended with {result.status}: {result.message}")
    return result, report  # type: ignore[return-value]


class Contingency(BaseModel):
    """Counts of a condition against the success of the solver it certifies."""

    holds_success: int = 0
    holds_failure: int = 0
    fails_success: int = 0
    fails_failure: int = 0

    def add(self, holds: bool, succeeded: bool) -> None:
        if holds and succeeded:
            self.holds_success += 1
        elif holds:
            self.holds_failure += 1
        elif succeeded:
            self.fails_success += 1
        else:
            self.fails_failure += 1


class McSummary(BaseModel):
    """Aggregate outcome of a Monte-Carlo study."""

    trials: int = Field(description="Number of trials run.")
    agree_count: int = Field(description="Trials where the converged solvers agreed.")
    fail_count: int = Field(description="Trials with no solution or with disagreement.")
    all_failed_count: int = Field(default=0, description="Trials where no solver converged.")
    setup_failures: int = Field(default=0, description="Trials whose model could not be built.")
    condition_vs_success: dict[str, Contingency] = Field(
        description="Per condition, counts against the success of the solver it certifies."
    )
    worst_disagreement: float = Field(
        default=0.0, description="Largest distance between converged solutions."
    )
    soundness_violations: int = Field(
        default=0, description="Trials where a condition held but its guarantee did not."
    )


CONDITION_SOLVER = {
    "contraction": Method.ZBUS,
    "monotone_conditions": Method.MONOTONE,
    "global_convexity": Method.ENERGY,
    "local_convexity": Method.ENERGY,
}


def _violates_guarantee(record: TrialRecord, tol: float) -> bool:
    if record.contraction and not (success(record.zbus) and record.zbus_in_ball):
        return True
    if record.monotone_conditions and record.in_band_solution:
        monotone = record.monotone
        if monotone is None or not monotone.converged:
            return True
        others = [v for m, v in record.converged().items() if m != Method.MONOTONE]
        if any(np.any(monotone.v < other - tol) for other in others):
            return True
    return False


def summarize(
    records: list[TrialRecord], failures: dict[int, FailedTrial], config: McConfig
) -> McSummary:
    """Aggregate trial records into counts."""
    table = {name: Contingency() for name in CONDITION_SOLVER}
    agree = all_failed = violations = 0
    worst = 0.0
    for record in records:
        for name, method in CONDITION_SOLVER.items():
            table[name].add(getattr(record, name), method in record.converged())
        if record.agrees(config.agreement_tol):
            agree += 1
        if not record.converged():
            all_failed += 1
        if _violates_guarantee(record, config.agreement_tol):
            violations += 1
        worst = max(worst, record.max_disagreement())
    return McSummary(
        trials=config.trials,
        agree_count=agree,
        fail_count=config.trials - agree,
        all_failed_count=all_failed + len(failures),
        setup_failures=len(failures),
        condition_vs_success=table,
        worst_disagreement=worst,
        soundness_violations=violations,
    )


class MonteCarloService:
    """
    Runs a Monte-Carlo loading study on a base network.

    :Example:
        .. code-block:: python

            from dcflow import McConfig, MonteCarloService, generate_network

            network = generate_network("radial", 10, seed=1)
            service = MonteCarloService(network, McConfig(trials=100, seed=1))
            summary = service.run()
            print(summary.agree_count)
    """

    def __init__(
        self,
        network: Network,
        config: McConfig = McConfig(),
        analysis: AnalysisConfig | None = None,
    ):
        validate(network)
        self.network = network
        self.config = config
        self.analysis = analysis
        self._worker: MonteCarloWorker | None = None

    @property
    def worker(self) -> MonteCarloWorker:
        if self._worker is None:
            raise ValueError("Worker not initialized.")
        return self._worker

    async def arun(self) -> McSummary:
        """Runs the trials and returns their summary."""
        self._worker = MonteCarloWorker(
            self.network, config=self.config, analysis=self.analysis
        )
        logger.info(f"Start {self.config.trials} trials with seed {self.config.seed}.")
        await self._worker.run()
        return summarize(self._worker.records, self._worker.get_failures(), self.config)

    def run(self) -> McSummary:
        """Blocking version of ``arun``."""
        return asyncio.run(self.arun())

    @property
    def records(self) -> list[TrialRecord]:
        return self.worker.records

    @validate_call
    def write(self, filepath: pathlib.Path) -> None:
        """
        Writes the per-trial records to a file.

        :param filepath: The output path; the suffix selects csv or json.
        """
        writer = writers[filepath.suffix[1:]]
        writer(filepath).write(record.row() for record in self.records)


def run_monte_carlo(
    base: Network, cfg: McConfig, analysis: AnalysisConfig | None = None
) -> McSummary:
    """Scale the loads of ``base`` at random and tally solver agreement and condition outcomes."""
    return MonteCarloService(base, cfg, analysis).run()


def loading_sweep(
    network: Network,
    factors: Iterable[float],
    method: Method | str,
    config: AnalysisConfig | None = None,
    opts: SolveOptions | None = None,
) -> list[tuple[float, SolveResult]]:
    """Solve at several multiples of the constant-power loading, recording traces."""
    validate(network)
    config = config or AnalysisConfig(band=network.band, q=network.q)
    method = Method(method)
    opts = opts or default_options(method, record_trace=True)
    results = []
    for factor in factors:
        model = derive(scale_power(network, factor))
        result = run_solver(method, model, config.band, opts, q=config.q)
        logger.info(f"Loading x{factor}: {result.status} after {result.iterations} iterations")
        results.append((factor, result))
    return results


def time_solvers(
    model: DerivedModel,
    band: VoltageBand,
    methods: Iterable[Method] = FLOWCHART_ORDER,
    q: NormOrder = 2,
    opts: Optional[dict[Method, SolveOptions]] = None,
) -> dict[Method, tuple[float, SolveResult]]:
    """Wall-clock seconds and result of each method on the same model."""
    timings = {}
    for method in methods:
        start = time.perf_counter()
        result = run_solver(method, model, band, (opts or {}).get(method), q=q)
        timings[method] = (time.perf_counter() - start, result)
    return timings
