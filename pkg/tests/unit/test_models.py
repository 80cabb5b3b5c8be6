import json

import numpy as np
import pytest

from dcflow.exceptions import ParsingException
from dcflow.models import (
    Line,
    Method,
    Network,
    SolveResult,
    Status,
    VoltageBus,
    ZipAggregate,
    ZipBus,
    load_case,
    parse_case,
    two_bus_case,
)


def test_zip_aggregate_combine():
    total = ZipAggregate.combine([{"i0": 0.1, "p0": 0.5}, {"p0": -0.2, "g0": 0.3}])
    assert total.i0 == pytest.approx(0.1)
    assert total.p0 == pytest.approx(0.3)
    assert total.g0 == pytest.approx(0.3)
    assert not total.is_zero_injection


def test_zip_aggregate_zero_injection():
    assert ZipAggregate().is_zero_injection


@pytest.mark.parametrize("field", ["i0", "g0"])
def test_zip_aggregate_rejects_negative_components(field):
    with pytest.raises(ValueError):
        ZipAggregate(**{field: -1.0})


def test_zip_bus_aggregates_loads():
    bus = ZipBus.model_validate(
        {"id": 1, "type": "P", "loads": [{"i0": 1.0, "p0": 2.0}, {"p0": -0.5, "g0": 0.1}]}
    )
    assert bus.load == ZipAggregate(i0=1.0, p0=1.5, g0=0.1)


def test_zip_bus_rejects_loads_and_components():
    with pytest.raises(ValueError):
        ZipBus.model_validate({"id": 1, "loads": [{"p0": 1.0}], "p0": 1.0})


def test_line_alias_and_pair():
    line = Line.model_validate({"from": 3, "to": 1, "g": 2.0})
    assert line.from_ == 3
    assert line.pair == (1, 3)
    assert Line(from_=3, to=1, g=2.0) == line


def test_parse_case_discriminates_bus_types(shared_datadir):
    network = parse_case((shared_datadir / "twobus_a.json").read_text())
    assert isinstance(network.buses[0], VoltageBus)
    assert isinstance(network.buses[1], ZipBus)
    assert network.zip_buses[0].p0 == -1.0
    assert network.band.v_min == 0.9


def test_parse_case_from_dict():
    network = parse_case(
        {
            "buses": [{"id": 0, "type": "V", "v": 1.0}, {"id": 1, "type": "P"}],
            "lines": [{"from": 0, "to": 1, "g": 1.0}],
        }
    )
    assert network.q == 2
    assert len(network.voltage_buses) == 1


def test_parse_case_invalid_json(shared_datadir):
    with pytest.raises(ParsingException, match="line") as exc_info:
        load_case(shared_datadir / "broken.json")
    assert exc_info.value.exit_code == 2


def test_parse_case_unknown_bus_type():
    with pytest.raises(ParsingException, match="buses.0"):
        parse_case({"buses": [{"id": 0, "type": "X"}], "lines": []})


def test_parse_case_missing_field():
    with pytest.raises(ParsingException, match="lines"):
        parse_case({"buses": [{"id": 0, "type": "V", "v": 1.0}]})


def test_load_case_missing_file(tmp_path):
    with pytest.raises(ParsingException, match="Cannot read"):
        load_case(tmp_path / "nope.json")


def test_network_round_trips_through_case_dict(feeder):
    case = feeder.to_case()
    assert case["lines"][0]["from"] == 0
    assert parse_case(json.dumps(case)) == feeder


def test_network_zip_buses_sorted():
    network = Network(
        buses=[ZipBus(id=2), VoltageBus(id=0, v=1.0), ZipBus(id=1)],
        lines=[],
    )
    assert [bus.id for bus in network.zip_buses] == [1, 2]


@pytest.mark.parametrize(
    "case, p0, i0", [("a", -1.0, 1.0), ("b", -2.0, 1.0), ("c", -2.0, 10.0), ("d", -5.0, 20.0)]
)
def test_two_bus_case(case, p0, i0):
    network = two_bus_case(case)
    bus = network.zip_buses[0]
    assert (bus.p0, bus.i0, bus.g0) == (p0, i0, 1.0)
    assert network.lines[0].g == 10.0
    assert network.voltage_buses[0].v == 1.0


def test_two_bus_case_matches_data_file(shared_datadir):
    assert load_case(shared_datadir / "twobus_c.json") == two_bus_case("c")


def test_solve_result_serialization():
    result = SolveResult(
        method=Method.ZBUS,
        v=np.array([0.95, 0.97]),
        bus_ids=[1, 2],
        iterations=3,
        status=Status.CONVERGED,
        residual_inf=1e-9,
    )
    dumped = result.model_dump(mode="json")
    assert dumped["v"] == [0.95, 0.97]
    assert dumped["status"] == "converged"
    assert dumped["method"] == "zbus"
    assert result.converged
    assert result.voltages() == {1: 0.95, 2: 0.97}


def test_solve_result_not_converged():
    result = SolveResult(
        method=Method.MONOTONE,
        v=np.array([0.5]),
        bus_ids=[1],
        iterations=1,
        status=Status.LEFT_BAND,
        residual_inf=float("inf"),
    )
    assert not result.converged
    assert '"residual_inf":Infinity' in result.model_dump_json()
