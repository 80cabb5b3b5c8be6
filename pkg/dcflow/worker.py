"""Runs Monte-Carlo trials concurrently and collects their records in trial order."""

from __future__ import annotations

import asyncio
import logging
from typing import TypedDict

import numpy as np

from dcflow.conditions import analyze
from dcflow.config import AnalysisConfig, McConfig, MonotoneOptions, ZbusOptions
from dcflow.data import TrialRecord
from dcflow.energy import solve_energy
from dcflow.exceptions import DCFlowException
from dcflow.generate import scale_loads
from dcflow.grid import derive
from dcflow.models import Network
from dcflow.monotone import solve_monotone
from dcflow.numerics import vector_norm
from dcflow.zbus import solve_zbus

logger = logging.getLogger(__name__)


class FailedTrial(TypedDict):
    """Trial that could not be set up."""

    index: int
    message: str
    exception: str


class MonteCarloWorker:
    """
    A worker class running independent loading trials on a base network.
    """

    def __init__(
        self,
        network: Network,
        *,
        config: McConfig,
        analysis: AnalysisConfig | None = None,
    ):
        """
        Initializes the worker.

        :param network: The validated base network.
        :param config: The Monte-Carlo configuration.
        :param analysis: Band and norm order; defaults to the network's.
        """
        self.network = network
        self.config = config
        self.analysis = analysis or AnalysisConfig(band=network.band, q=network.q)
        self._records: dict[int, TrialRecord] = {}
        self._failures: dict[int, FailedTrial] = {}
        self._semaphore = asyncio.Semaphore(self.config.max_concurrency)
        self._started = False

    @property
    def has_started(self) -> bool:
        return self._started

    @property
    def records(self) -> list[TrialRecord]:
        """Completed trial records in trial order."""
        return [self._records[i] for i in sorted(self._records)]

    def get_failures(self) -> dict[int, FailedTrial]:
        return self._failures

    def _draw_scales(self, seed: np.random.SeedSequence) -> tuple[np.ndarray, ...]:
        rng = np.random.default_rng(seed)
        n = len(self.network.zip_buses)
        p_scales = rng.uniform(*self.config.p_scale_range, size=n)
        i_scales = rng.uniform(*self.config.iz_scale_range, size=n)
        g_scales = rng.uniform(*self.config.iz_scale_range, size=n)
        return p_scales, i_scales, g_scales

    def run_trial(self, index: int, seed: np.random.SeedSequence) -> TrialRecord:
        """
        Scale the loads, check every condition and run all three solvers.

        :param index: The trial index.
        :param seed: The trial's own seed sequence.
        :return: The trial record; solver exceptions are stored in its errors.
        """
        scaled = scale_loads(self.network, *self._draw_scales(seed))
        model = derive(scaled)
        band, q = self.analysis.band, self.analysis.q
        tol = self.config.solver_tol
        report = analyze(model, self.analysis)

        record = TrialRecord(
            index=index,
            contraction=report.contraction.feasible,
            monotone_conditions=report.monotone_ok,
            global_convexity=report.global_convexity.ok,
            local_convexity=report.local_convexity.ok,
            zbus=lambda: solve_zbus(model, band, ZbusOptions(tol=tol), q=q),
            monotone=lambda: solve_monotone(model, band, MonotoneOptions(tol=tol)),
            energy=lambda: solve_energy(model, band),
        )
        in_band = [
            bool(np.all((r.v >= band.v_min - 1e-9) & (r.v <= band.v_max + 1e-9)))
            for r in record.results().values()
            if r.converged
        ]
        update: dict = {"in_band_solution": any(in_band)}
        if record.zbus is not None and record.zbus.converged and report.contraction.feasible:
            distance = vector_norm(record.zbus.v - model.d, q)
            update["zbus_in_ball"] = distance <= report.contraction.r_under + 1e-9  # type: ignore[operator]
        for key, error in record.errors.items():
            logger.warning(f"Trial {index}: {key} raised {error['type']}: {error['message']}")
        return record.model_copy(update=update)

    async def _handle_trial(self, index: int, seed: np.random.SeedSequence) -> None:
        """
        Runs one trial in a worker thread.

        :param index: The trial index.
        :param seed: The trial's seed sequence.
        """
        async with self._semaphore:
            try:
                record = await asyncio.to_thread(self.run_trial, index, seed)
            except DCFlowException as e:
                logger.error(f"Trial {index} failed: {e}")
                self._failures[index] = {
                    "index": index,
                    "message": str(e),
                    "exception": type(e).__name__,
                }
                return
            self._records[index] = record

    async def run(self) -> None:
        """
        Runs every trial; the semaphore keeps at most ``max_concurrency`` in flight.
        """
        self._started = True
        seeds = np.random.SeedSequence(self.config.seed).spawn(self.config.trials)
        logger.debug(f"Scheduling {self.config.trials} trials")
        await asyncio.gather(
            *(self._handle_trial(index, seed) for index, seed in enumerate(seeds))
        )
        logger.info(
            f"Finished {len(self._records)} trials, {len(self._failures)} failed to set up"
        )
