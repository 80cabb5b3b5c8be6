"""Models for DC networks, case files and solver results."""

from __future__ import annotations

import json
import logging
from enum import StrEnum
from pathlib import Path
from typing import Annotated, Any, Literal, Optional, Union

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_serializer,
    model_validator,
)

from dcflow.config import NormOrder, VoltageBand
from dcflow.exceptions import ParsingException

logger = logging.getLogger(__name__)

NonNegativeFloat = Annotated[float, Field(ge=0)]


class ZipAggregate(BaseModel):
    """Aggregate ZIP components of a bus. Positive power is load, negative is generation."""

    i0: NonNegativeFloat = Field(default=0.0, description="Constant-current component.")
    p0: float = Field(default=0.0, description="Constant-power component.")
    g0: NonNegativeFloat = Field(
        default=0.0, description="Constant-conductance component."
    )

    @classmethod
    def combine(cls, loads: list[dict[str, float]]) -> ZipAggregate:
        """Sum several loads and generators hosted on one bus."""
        parts = [cls(**load) for load in loads]
        return cls(
            i0=sum(part.i0 for part in parts),
            p0=sum(part.p0 for part in parts),
            g0=sum(part.g0 for part in parts),
        )

    @property
    def is_zero_injection(self) -> bool:
        return self.i0 == 0 and self.p0 == 0 and self.g0 == 0


class VoltageBus(BaseModel):
    """Constant-voltage bus."""

    id: int = Field(ge=0, description="Dense bus index; the slack bus is 0.")
    type: Literal["V"] = "V"
    v: float = Field(gt=0, description="Fixed voltage in pu.")


class ZipBus(ZipAggregate):
    """Bus hosting ZIP loads and constant-power generators.

    A ``loads`` list in the case file is pre-aggregated into the bus components.
    """

    id: int = Field(ge=0, description="Dense bus index.")
    type: Literal["P"] = "P"

    @model_validator(mode="before")
    @classmethod
    def _aggregate_loads(cls, data: Any) -> Any:
        if isinstance(data, dict) and "loads" in data:
            data = dict(data)
            loads = data.pop("loads")
            if any(key in data for key in ("i0", "p0", "g0")):
                raise ValueError("Give either 'loads' or i0/p0/g0, not both.")
            data.update(ZipAggregate.combine(loads).model_dump())
        return data

    @property
    def load(self) -> ZipAggregate:
        return ZipAggregate(i0=self.i0, p0=self.p0, g0=self.g0)


Bus = Annotated[Union[VoltageBus, ZipBus], Field(discriminator="type")]


class Line(BaseModel):
    """Line between two buses. Conductance sign is checked by ``grid.validate``."""

    from_: int = Field(alias="from", ge=0, description="Sending bus id.")
    to: int = Field(ge=0, description="Receiving bus id.")
    g: float = Field(description="Line conductance in pu.")

    model_config = ConfigDict(populate_by_name=True)

    @property
    def pair(self) -> tuple[int, int]:
        return min(self.from_, self.to), max(self.from_, self.to)


class Network(BaseModel):
    """A DC network case."""

    buses: list[Bus] = Field(description="The buses, slack first.")
    lines: list[Line] = Field(description="The lines.")
    band: VoltageBand = Field(
        default_factory=VoltageBand, description="The voltage band."
    )
    q: NormOrder = Field(default=2, description="Norm order of the contraction ball.")

    @property
    def voltage_buses(self) -> list[VoltageBus]:
        return [bus for bus in self.buses if isinstance(bus, VoltageBus)]

    @property
    def zip_buses(self) -> list[ZipBus]:
        return sorted(
            (bus for bus in self.buses if isinstance(bus, ZipBus)), key=lambda b: b.id
        )

    def to_case(self) -> dict[str, Any]:
        """Return the case-file dictionary of the network."""
        return self.model_dump(by_alias=True, mode="json")


def parse_case(data: dict[str, Any] | str) -> Network:
    """Parse a case from a dictionary or a JSON document.

    :param data: The case content.
    :return: The network, not yet validated.
    """
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as e:
            raise ParsingException(
                f"Invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}"
            )
    try:
        return Network.model_validate(data)
    except ValidationError as e:
        details = "; ".join(
            f"{'.'.join(str(part) for part in err['loc'])}: {err['msg']}"
            for err in e.errors()
        )
        raise ParsingException(f"Invalid case: {details}")


def load_case(path: Path | str) -> Network:
    """Read a case file.

    :param path: The path of the JSON case file.
    :return: The network, not yet validated.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ParsingException(f"Cannot read case file {path}: {e}")
    logger.debug(f"Parsing case file {path}")
    return parse_case(text)


TWO_BUS_CASES: dict[str, tuple[float, float]] = {
    "a": (-1.0, 1.0),
    "b": (-2.0, 1.0),
    "c": (-2.0, 10.0),
    "d": (-5.0, 20.0),
}


def two_bus_case(case: Literal["a", "b", "c", "d"]) -> Network:
    """Return one of the four loadings of the two-bus system.

    Slack at 1 pu, line conductance 10 pu, constant-conductance load 1 pu,
    band 0.9-1.1 pu.
    """
    p0, i0 = TWO_BUS_CASES[case]
    return Network(
        buses=[VoltageBus(id=0, v=1.0), ZipBus(id=1, i0=i0, p0=p0, g0=1.0)],
        lines=[Line(from_=0, to=1, g=10.0)],
        band=VoltageBand(v_min=0.9, v_max=1.1),
    )


class Status(StrEnum):
    """Termination status of a solver."""

    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    DIVERGED = "diverged"
    DOMAIN_ERROR = "domain_error"
    LEFT_BAND = "left_band"


class Method(StrEnum):
    """Available solvers."""

    ZBUS = "zbus"
    MONOTONE = "monotone"
    ENERGY = "energy"


class ZbusDiagnostics(BaseModel):
    """Contraction diagnostics of a Z-bus run."""

    alpha_theoretical: Optional[float] = Field(
        default=None, description="Contraction modulus at the radius used."
    )
    alpha_empirical: float = Field(
        default=0.0, description="Largest ratio of successive difference norms."
    )
    r_used: Optional[float] = Field(
        default=None, description="Radius the theoretical modulus refers to."
    )
    stayed_in_ball: bool = Field(
        default=False, description="Whether every iterate stayed in the uniqueness ball."
    )
    monotone_h_ok: bool = Field(
        default=False,
        description="Advisory check for the monotone reading of the Z-bus map.",
    )
    ratios: Optional[list[float]] = Field(
        default=None, description="Successive difference ratios in the ball norm."
    )
    distances: Optional[list[float]] = Field(
        default=None, description="Distance of each iterate from the ball center."
    )


class SolveResult(BaseModel):
    """Outcome of a solver run."""

    method: Method = Field(description="The solver that produced the result.")
    v: np.ndarray = Field(description="Voltages of the ZIP buses in pu.")
    bus_ids: list[int] = Field(description="Network ids of the ZIP buses.")
    iterations: int = Field(ge=0, description="Number of iterations performed.")
    status: Status = Field(description="Termination status.")
    residual_inf: float = Field(
        description="Infinity norm of the power-flow residual at v."
    )
    message: str = Field(default="", description="Termination reason.")
    trace: Optional[list[float]] = Field(
        default=None, description="Per-iteration convergence metric."
    )
    energy_trace: Optional[list[float]] = Field(
        default=None, description="Per-iteration energy values."
    )
    diagnostics: Optional[ZbusDiagnostics] = Field(
        default=None, description="Z-bus diagnostics."
    )

    model_config = ConfigDict(arbitrary_types_allowed=True, ser_json_inf_nan="constants")

    @field_serializer("v")
    def _ser_v(self, v: np.ndarray) -> list[float]:
        return [float(x) for x in v]

    @property
    def converged(self) -> bool:
        return self.status == Status.CONVERGED

    def voltages(self) -> dict[int, float]:
        """Return voltages keyed by network bus id."""
        return {bus_id: float(x) for bus_id, x in zip(self.bus_ids, self.v)}
