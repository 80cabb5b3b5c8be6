"""Data Module."""

from __future__ import annotations

import itertools
import sys
from abc import ABC
from typing import Any, Iterable, Optional

if sys.version_info >= (3, 12):
    from typing import TypedDict
else:
    from typing_extensions import TypedDict

import numpy as np
from pydantic import BaseModel, model_validator

from dcflow.models import Method, SolveResult, Status


class DataError(TypedDict):
    """Data error type."""

    type: str
    message: str


class DataWrapper(dict):
    """Dictionary that evaluates callables on assignment and stores their exceptions.

    Used to run each solver of a trial independently: a solver raising does not
    lose the results of the others, the error lands in ``errors`` instead.
    """

    def __init__(self, mapping: dict | None = None, /, **kwargs):
        self.errors: dict = {}

        mapping = dict(mapping) if mapping is not None else {}
        mapping.update(kwargs)
        for key, value in mapping.items():
            mapping[key] = self._set_item(key, value)

        super().__init__(mapping)

    def __setitem__(self, key: Any, value: Any):
        """Set a value, evaluating callables and recording their exceptions.

        :param key: The key to set.
        :param value: The value or a zero-argument callable producing it.
        """
        super().__setitem__(key, self._set_item(key, value))

    def _set_item(self, key, value):
        maybe_value, maybe_exception = self.maybe(value)
        if maybe_exception:
            self.errors[key] = DataError(
                type=type(maybe_exception).__name__,
                message=str(maybe_exception),
            )
        return maybe_value

    @staticmethod
    def maybe(value: Any) -> tuple[Any | None, None | Exception]:
        """When `value` is a callable, return `(value(), None)` or `(None, exception)`.
        Return `(value, None)` if `value` is not a callable.

        :Example:

        .. code-block:: python

            DataWrapper.maybe(lambda: 1)
            (1, None)
            DataWrapper.maybe(lambda: 1 / 0)
            (None, ZeroDivisionError('division by zero'))
        """
        if callable(value):
            try:
                return value(), None
            except Exception as e:
                return None, e
        return value, None


class BaseDataItem(BaseModel):
    """Base class for records built from a `DataWrapper`.

    Callable fields are evaluated on construction; their exceptions end up in ``errors``.
    """

    errors: dict[Any, DataError] = {}

    @model_validator(mode="before")
    @classmethod
    def _run_callables(cls, data: Any) -> Any:
        wrapped = DataWrapper(data)
        return {**wrapped, "errors": wrapped.errors}


class TrialRecord(BaseDataItem):
    """Outcome of one Monte-Carlo trial."""

    index: int
    contraction: bool
    monotone_conditions: bool
    global_convexity: bool
    local_convexity: bool
    zbus: Optional[SolveResult] = None
    monotone: Optional[SolveResult] = None
    energy: Optional[SolveResult] = None
    zbus_in_ball: Optional[bool] = None
    in_band_solution: Optional[bool] = None

    def results(self) -> dict[Method, SolveResult]:
        found = {Method.ZBUS: self.zbus, Method.MONOTONE: self.monotone, Method.ENERGY: self.energy}
        return {method: result for method, result in found.items() if result is not None}

    def converged(self) -> dict[Method, np.ndarray]:
        return {method: r.v for method, r in self.results().items() if r.converged}

    def max_disagreement(self) -> float:
        """Largest pairwise infinity distance between converged solutions."""
        solutions = list(self.converged().values())
        return max(
            (float(np.max(np.abs(a - b))) for a, b in itertools.combinations(solutions, 2)),
            default=0.0,
        )

    def agrees(self, tol: float) -> bool:
        """At least one solver converged and all converged solvers agree within tol."""
        return bool(self.converged()) and self.max_disagreement() < tol

    def row(self) -> dict[str, Any]:
        """Flat dictionary for CSV export."""
        row: dict[str, Any] = {
            "index": self.index,
            "contraction": self.contraction,
            "monotone_conditions": self.monotone_conditions,
            "global_convexity": self.global_convexity,
            "local_convexity": self.local_convexity,
        }
        for method in Method:
            result = self.results().get(method)
            row[f"{method}_status"] = result.status if result else "error"
            row[f"{method}_iterations"] = result.iterations if result else ""
        row["max_disagreement"] = self.max_disagreement()
        return row


def success(result: Optional[SolveResult]) -> bool:
    return result is not None and result.status == Status.CONVERGED


class DataSink(ABC):
    """Data sink protocol.

    Base class used to define the interface for data sinks."""

    def write(self, data: Iterable[dict | BaseModel]) -> None:
        """Write data to the sink."""
        raise NotImplementedError
