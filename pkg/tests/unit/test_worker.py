import threading
import time

import numpy as np
import pytest

from dcflow.config import McConfig
from dcflow.exceptions import SingularGError
from dcflow.models import Method
from dcflow.worker import MonteCarloWorker


@pytest.fixture
def config():
    return McConfig(trials=6, seed=11, p_scale_range=(0.5, 1.5), iz_scale_range=(0.5, 1.5))


@pytest.mark.asyncio
async def test_worker_runs_all_trials(feeder, config):
    worker = MonteCarloWorker(feeder, config=config)
    assert not worker.has_started
    await worker.run()
    assert worker.has_started
    assert [record.index for record in worker.records] == list(range(6))
    assert worker.get_failures() == {}
    for record in worker.records:
        assert record.contraction
        assert Method.ZBUS in record.converged()
        assert record.zbus_in_ball
        assert record.in_band_solution


@pytest.mark.asyncio
async def test_worker_is_deterministic(feeder, config):
    first = MonteCarloWorker(feeder, config=config)
    second = MonteCarloWorker(feeder, config=config.model_copy(update={"max_concurrency": 1}))
    await first.run()
    await second.run()
    assert [r.row() for r in first.records] == [r.row() for r in second.records]


def test_worker_scales_per_bus(feeder, config):
    worker = MonteCarloWorker(feeder, config=config)
    seed = np.random.SeedSequence(0)
    p_scales, i_scales, g_scales = worker._draw_scales(seed)
    assert p_scales.shape == (3,)
    assert not np.allclose(p_scales, p_scales[0])
    assert not np.array_equal(i_scales, g_scales)
    assert np.all((p_scales >= 0.5) & (p_scales <= 1.5))


@pytest.mark.asyncio
async def test_worker_records_setup_failures(feeder, config, mocker):
    mocker.patch("dcflow.worker.derive", side_effect=SingularGError("singular"))
    worker = MonteCarloWorker(feeder, config=config)
    await worker.run()
    assert worker.records == []
    failures = worker.get_failures()
    assert sorted(failures) == list(range(6))
    assert failures[0] == {"index": 0, "message": "singular", "exception": "SingularGError"}


@pytest.mark.asyncio
async def test_worker_does_not_wait_for_slow_trials(feeder, config):
    worker = MonteCarloWorker(feeder, config=config.model_copy(update={"max_concurrency": 2}))
    lock = threading.Lock()
    in_flight = []
    finished = []
    running = 0

    def fake_trial(index, seed):
        nonlocal running
        with lock:
            running += 1
            in_flight.append(running)
        time.sleep(0.5 if index == 0 else 0.01)
        with lock:
            running -= 1
            finished.append(index)
        return index

    worker.run_trial = fake_trial
    await worker.run()
    assert max(in_flight) <= 2
    assert finished[-1] == 0
    assert sorted(finished) == list(range(6))
