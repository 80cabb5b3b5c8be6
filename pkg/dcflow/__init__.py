from dcflow.conditions import ConditionReport, analyze, select_method
from dcflow.config import (
    AnalysisConfig,
    EnergyOptions,
    McConfig,
    MonotoneOptions,
    SolveOptions,
    VoltageBand,
    ZbusOptions,
)
from dcflow.data import BaseDataItem, DataWrapper, TrialRecord
from dcflow.energy import solve_energy
from dcflow.exceptions import DCFlowException, ParsingException, ValidationException
from dcflow.generate import generate_network
from dcflow.grid import DerivedModel, derive, residual, validate
from dcflow.logs import setup_logging
from dcflow.models import Method, Network, SolveResult, Status, load_case, two_bus_case
from dcflow.monotone import solve_monotone
from dcflow.service import McSummary, MonteCarloService, run_monte_carlo, solve
from dcflow.zbus import solve_zbus

__all__ = [
    "AnalysisConfig",
    "BaseDataItem",
    "ConditionReport",
    "DataWrapper",
    "DCFlowException",
    "DerivedModel",
    "EnergyOptions",
    "McConfig",
    "McSummary",
    "Method",
    "MonotoneOptions",
    "MonteCarloService",
    "Network",
    "ParsingException",
    "SolveOptions",
    "SolveResult",
    "Status",
    "TrialRecord",
    "ValidationException",
    "VoltageBand",
    "ZbusOptions",
    "analyze",
    "derive",
    "generate_network",
    "load_case",
    "residual",
    "run_monte_carlo",
    "select_method",
    "setup_logging",
    "solve",
    "solve_energy",
    "solve_monotone",
    "solve_zbus",
    "two_bus_case",
    "validate",
]
