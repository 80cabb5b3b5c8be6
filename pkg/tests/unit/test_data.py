from collections import abc

import numpy as np
import pytest

from dcflow.data import BaseDataItem, DataWrapper, TrialRecord, success
from dcflow.models import Method, SolveResult, Status


class MockItem(BaseDataItem):
    foo: int | None
    bar: int | None


def make_result(method, v, status=Status.CONVERGED):
    return SolveResult(
        method=method,
        v=np.array(v),
        bus_ids=list(range(1, len(v) + 1)),
        iterations=5,
        status=status,
        residual_inf=0.0,
    )


def make_record(**kwargs):
    fields = {
        "index": 0,
        "contraction": True,
        "monotone_conditions": True,
        "global_convexity": False,
        "local_convexity": True,
    }
    fields.update(kwargs)
    return TrialRecord(**fields)


def test_maybe_callable_returns_value():
    d = DataWrapper()
    value, exception = d.maybe(lambda: 1)
    assert value == 1
    assert exception is None


def test_maybe_callable_raises_exception():
    d = DataWrapper()

    def raise_exception():
        raise ValueError("error")

    value, exception = d.maybe(raise_exception)
    assert value is None
    assert isinstance(exception, ValueError)


def test_maybe_non_callable_value():
    d = DataWrapper()
    value, exception = d.maybe(1)
    assert value == 1
    assert exception is None


def test_datawrapper_init_kwargs():
    d = DataWrapper(a=lambda: 1, b=lambda: 1 / 0)
    assert d["a"] == 1
    assert d["b"] is None
    assert d.errors == {
        "b": {"type": "ZeroDivisionError", "message": "division by zero"}
    }


def test_datawrapper_setitem():
    d = DataWrapper()
    d["a"] = lambda: 1 / 0
    assert d["a"] is None
    assert d.errors["a"]["type"] == "ZeroDivisionError"


def test_datawrapper_is_instance_of_dict():
    d = DataWrapper(a=lambda: 1, **{"b": lambda: 1 / 0})
    assert isinstance(d, abc.MutableMapping)


@pytest.mark.parametrize(
    "data, expected_foo, expected_bar, expected_errors",
    [
        (
            {"foo": lambda: 1, "bar": lambda: 1 / 0},
            1,
            None,
            {"bar": {"type": "ZeroDivisionError", "message": "division by zero"}},
        ),
        ({"foo": 1, "bar": lambda: 2}, 1, 2, {}),
    ],
)
def test_data_item_init(data, expected_foo, expected_bar, expected_errors):
    item = MockItem(**data)
    assert item.foo == expected_foo
    assert item.bar == expected_bar
    assert item.errors == expected_errors


def test_trial_record_agreement():
    record = make_record(
        zbus=make_result(Method.ZBUS, [1.0, 0.98]),
        monotone=make_result(Method.MONOTONE, [1.000002, 0.98]),
        energy=make_result(Method.ENERGY, [0.5, 0.4], Status.DIVERGED),
    )
    assert set(record.converged()) == {Method.ZBUS, Method.MONOTONE}
    assert record.max_disagreement() == pytest.approx(2e-6)
    assert record.agrees(1e-5)
    assert not record.agrees(1e-6)


def test_trial_record_no_solution_does_not_agree():
    record = make_record(energy=make_result(Method.ENERGY, [0.5], Status.DIVERGED))
    assert record.converged() == {}
    assert record.max_disagreement() == 0.0
    assert not record.agrees(1e-5)


def test_trial_record_captures_solver_errors():
    def broken():
        raise RuntimeError("solver blew up")

    record = make_record(zbus=broken, energy=lambda: make_result(Method.ENERGY, [0.9]))
    assert record.zbus is None
    assert record.energy.converged
    assert record.errors == {"zbus": {"type": "RuntimeError", "message": "solver blew up"}}


def test_trial_record_row():
    record = make_record(zbus=make_result(Method.ZBUS, [1.0]))
    row = record.row()
    assert row["index"] == 0
    assert row["zbus_status"] == "converged"
    assert row["zbus_iterations"] == 5
    assert row["energy_status"] == "error"
    assert row["max_disagreement"] == 0.0


def test_success():
    assert success(make_result(Method.ZBUS, [1.0]))
    assert not success(make_result(Method.ZBUS, [1.0], Status.MAX_ITERATIONS))
    assert not success(None)
