"""Exact wave-ray trajectories from the Helmholtz-like wave equation, with a
Schrödinger/Bohm comparator and CSV/SVG outputs."""

from __future__ import annotations

from .config import ComparatorConfig, RunConfig, parse_run_config, serialize_run_config
from .dynamics import prepare_front, propagate, step, suggest_dt
from .errors import (
    CausticError,
    ConfigError,
    DegenerateFrontError,
    DomainEscapeError,
    EnergyDriftError,
    EvanescentError,
    HelmrayError,
    NodeError,
    NumericalError,
    OutOfDomainError,
    TurningPointError,
)
from .output import CSV_HEADER, read_trajectories, render_figure, write_trajectories
from .potentials import IndexField, PotentialField
from .scenarios import ScenarioConfig, ScenarioKind, TrajectoryBundle, run_scenario
from .units import Regime, RegimeKind, UnitSystem, Wavefront, make_unit_system, rayleigh_length
from .wavefront import wave_potential

__version__ = "0.1.0"

__all__ = [
    "CSV_HEADER",
    "CausticError",
    "ComparatorConfig",
    "ConfigError",
    "DegenerateFrontError",
    "DomainEscapeError",
    "EnergyDriftError",
    "EvanescentError",
    "HelmrayError",
    "IndexField",
    "NodeError",
    "NumericalError",
    "OutOfDomainError",
    "PotentialField",
    "Regime",
    "RegimeKind",
    "RunConfig",
    "ScenarioConfig",
    "ScenarioKind",
    "TrajectoryBundle",
    "TurningPointError",
    "UnitSystem",
    "Wavefront",
    "make_unit_system",
    "parse_run_config",
    "prepare_front",
    "propagate",
    "rayleigh_length",
    "read_trajectories",
    "render_figure",
    "run_scenario",
    "serialize_run_config",
    "step",
    "suggest_dt",
    "wave_potential",
    "write_trajectories",
]
