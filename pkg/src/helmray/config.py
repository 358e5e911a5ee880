"""Run configuration: a flat ``section.key = value`` document with a fixed
schema, parsed into a validated RunConfig and serialized back losslessly.

Example::

    # gaussian beam at the default wavelength
    scenario.name = gaussian
    units.lambda0_over_w0 = 2e-4
    output.dir = out/gaussian

Lines starting with ``#`` are comments. Values are bare (no quoting);
``none`` clears an optional number, lists are comma separated.
"""

from __future__ import annotations

import difflib
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Callable

from .errors import ConfigError
from .scenarios import ScenarioConfig, ScenarioKind
from .units import Regime, RegimeKind


class ConfigParseError(ConfigError):
    """Malformed line, unknown key or out-of-range value."""

    def __init__(self, message: str, *, key: str | None = None, line: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.key = key
        self.line = line


@dataclass(frozen=True)
class ComparatorConfig:
    """Optional 1D Schrödinger/Bohm companion run.

    ``initial`` is ``packet`` (Gaussian with ``packet_x0``, ``packet_sigma``,
    ``packet_k``) or ``modes`` (equal-weight superposition of the listed
    box eigenmodes, 1-based).
    """

    n_points: int = 1024
    box_length: float = 40.0
    initial: str = "packet"
    packet_x0: float = 0.0
    packet_sigma: float = 1.0
    packet_k: float = 0.0
    modes: tuple[int, ...] = (1,)
    dt: float = 0.002
    steps: int = 500
    history_every: int = 1
    seeds: tuple[float, ...] = (-1.0, 0.0, 1.0)


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    output_dir: Path = Path("output")
    emit_svg: bool = True
    comparator: ComparatorConfig | None = None

    @property
    def snapshot_every(self) -> int:
        return self.scenario.snapshot_every


# ---------------------------------------------------------------------------
# value codecs


def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_optional_float(text: str) -> float | None:
    return None if text.lower() == "none" else float(text)


def _format(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    if isinstance(value, (ScenarioKind, RegimeKind)):
        return value.value
    return str(value)


def _list_of(kind: Callable[[str], Any]) -> Callable[[str], tuple]:
    def parse(text: str) -> tuple:
        items = [t.strip() for t in text.split(",") if t.strip()]
        if not items:
            raise ValueError("expected a non-empty comma-separated list")
        return tuple(kind(t) for t in items)
    return parse


@dataclass(frozen=True)
class _Key:
    parse: Callable[[str], Any]
    lo: float | None = None
    hi: float | None = None
    lo_open: bool = False
    choices: tuple[str, ...] | None = None

    def check(self, name: str, value: Any, line: int | None) -> None:
        if self.choices is not None and value not in self.choices:
            raise ConfigParseError(f"must be one of {', '.join(self.choices)}, got {value!r}", key=name, line=line)
        values = value if isinstance(value, tuple) else (value,)
        for v in values:
            if v is None or isinstance(v, (str, bool)):
                continue
            if not math.isfinite(v):
                raise ConfigParseError(f"must be finite, got {v!r}", key=name, line=line)
            if self.lo is not None and (v <= self.lo if self.lo_open else v < self.lo):
                op = ">" if self.lo_open else ">="
                raise ConfigParseError(f"must be {op} {self.lo:g}, got {v!r}", key=name, line=line)
            if self.hi is not None and v > self.hi:
                raise ConfigParseError(f"must be <= {self.hi:g}, got {v!r}", key=name, line=line)


_SCHEMA: dict[str, _Key] = {
    "scenario.name": _Key(str, choices=tuple(k.value for k in ScenarioKind)),
    "scenario.n_rays": _Key(int, lo=51),
    "scenario.half_width": _Key(float, lo=0.0, lo_open=True),
    "scenario.z_max": _Key(_parse_optional_float, lo=0.0, lo_open=True),
    "scenario.slit_width": _Key(float, lo=0.0, lo_open=True),
    "scenario.slit_separation": _Key(float, lo=0.0, lo_open=True),
    "scenario.edge_order": _Key(int, lo=2),
    "scenario.snapshot_every": _Key(int, lo=1),
    "scenario.dt": _Key(_parse_optional_float, lo=0.0, lo_open=True),
    "units.lambda0_over_w0": _Key(float, lo=0.0, lo_open=True, hi=1.0),
    "units.regime": _Key(str, choices=tuple(k.value for k in RegimeKind)),
    "units.pc_over_rest_energy": _Key(_parse_optional_float, lo=0.0, lo_open=True),
    "units.rest_mass": _Key(float, lo=0.0),
    "units.eikonal": _Key(_parse_bool),
    "units.wave_scale": _Key(float, lo=0.0),
    "units.front_viscosity": _Key(float, lo=0.0),
    "output.dir": _Key(str),
    "output.emit_svg": _Key(_parse_bool),
    "comparator.enabled": _Key(_parse_bool),
    "comparator.n_points": _Key(int, lo=64),
    "comparator.box_length": _Key(float, lo=0.0, lo_open=True),
    "comparator.initial": _Key(str, choices=("packet", "modes")),
    "comparator.packet_x0": _Key(float),
    "comparator.packet_sigma": _Key(float, lo=0.0, lo_open=True),
    "comparator.packet_k": _Key(float),
    "comparator.modes": _Key(_list_of(int), lo=1),
    "comparator.dt": _Key(float, lo=0.0, lo_open=True),
    "comparator.steps": _Key(int, lo=1),
    "comparator.history_every": _Key(int, lo=1),
    "comparator.seeds": _Key(_list_of(float)),
}

_SCENARIO_FIELDS = {
    "scenario.name": "scenario",
    "scenario.n_rays": "n_rays",
    "scenario.half_width": "half_width",
    "scenario.z_max": "z_max",
    "scenario.slit_width": "slit_width",
    "scenario.slit_separation": "slit_separation",
    "scenario.edge_order": "edge_order",
    "scenario.snapshot_every": "snapshot_every",
    "scenario.dt": "dt",
    "units.lambda0_over_w0": "lambda0_over_w0",
    "units.pc_over_rest_energy": "pc_over_rest_energy",
    "units.rest_mass": "rest_mass",
}
_REGIME_FIELDS = {
    "units.regime": "kind",
    "units.eikonal": "eikonal",
    "units.wave_scale": "wave_scale",
    "units.front_viscosity": "front_viscosity",
}

SCHEMA_KEYS = tuple(_SCHEMA)


def _split_lines(text: str):
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigParseError(f"expected 'key = value', got {raw.strip()!r}", line=number)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigParseError("missing key before '='", line=number)
        yield number, key, value


def parse_run_config(text: str) -> RunConfig:
    """Parse and validate a configuration document."""
    values: dict[str, Any] = {}
    lines: dict[str, int] = {}
    for number, key, raw in _split_lines(text):
        spec = _SCHEMA.get(key)
        if spec is None:
            near = difflib.get_close_matches(key, SCHEMA_KEYS, n=1, cutoff=0.5)
            hint = f"; did you mean {near[0]!r}?" if near else ""
            raise ConfigParseError(f"unknown key{hint}", key=key, line=number)
        if key in values:
            raise ConfigParseError(f"duplicate key (first set on line {lines[key]})", key=key, line=number)
        try:
            value = spec.parse(raw)
        except ValueError as exc:
            raise ConfigParseError(f"cannot parse {raw!r}: {exc}", key=key, line=number) from None
        spec.check(key, value, number)
        values[key] = value
        lines[key] = number
    return _build(values, lines)


def _build(values: dict[str, Any], lines: dict[str, int]) -> RunConfig:
    def fail(exc: ConfigError, keys) -> ConfigParseError:
        # pin construction errors to the first involved key that was set
        for key in keys:
            if key in values:
                return ConfigParseError(str(exc), key=key, line=lines[key])
        return ConfigParseError(str(exc))

    regime_kw = {name: values[key] for key, name in _REGIME_FIELDS.items() if key in values}
    try:
        regime = Regime(**regime_kw)
    except ConfigError as exc:
        raise fail(exc, _REGIME_FIELDS) from None
    scenario_kw = {name: values[key] for key, name in _SCENARIO_FIELDS.items() if key in values}
    try:
        scenario = ScenarioConfig(regime=regime, **scenario_kw)
        scenario.units()
    except ConfigError as exc:
        raise fail(exc, list(_SCENARIO_FIELDS) + list(_REGIME_FIELDS)) from None

    comparator = None
    comp_keys = {k: v for k, v in values.items() if k.startswith("comparator.") and k != "comparator.enabled"}
    if values.get("comparator.enabled", bool(comp_keys)):
        comparator = ComparatorConfig(**{k.split(".", 1)[1]: v for k, v in comp_keys.items()})
        if comparator.history_every > comparator.steps:
            raise ConfigParseError("must not exceed comparator.steps", key="comparator.history_every",
                                   line=lines.get("comparator.history_every"))
        half = 0.5 * comparator.box_length
        for seed in comparator.seeds:
            if not -half < seed < half:
                raise ConfigParseError(f"seed {seed!r} lies outside the box (-{half:g}, {half:g})",
                                       key="comparator.seeds", line=lines.get("comparator.seeds"))
    elif comp_keys:
        raise ConfigParseError("comparator keys given but comparator.enabled = false",
                               key=next(iter(comp_keys)), line=lines[next(iter(comp_keys))])

    return RunConfig(
        scenario=scenario,
        output_dir=Path(values.get("output.dir", RunConfig.output_dir)),
        emit_svg=values.get("output.emit_svg", RunConfig.emit_svg),
        comparator=comparator,
    )


def load_run_config(path: str | Path) -> RunConfig:
    return parse_run_config(Path(path).read_text())


def serialize_run_config(cfg: RunConfig) -> str:
    """Every schema key with its value, in schema order."""
    sc = cfg.scenario
    out = {key: getattr(sc, name) for key, name in _SCENARIO_FIELDS.items()}
    out.update({key: getattr(sc.regime, name) for key, name in _REGIME_FIELDS.items()})
    out["output.dir"] = cfg.output_dir.as_posix()
    out["output.emit_svg"] = cfg.emit_svg
    out["comparator.enabled"] = cfg.comparator is not None
    if cfg.comparator is not None:
        for f in fields(ComparatorConfig):
            out[f"comparator.{f.name}"] = getattr(cfg.comparator, f.name)
    return "".join(f"{key} = {_format(out[key])}\n" for key in SCHEMA_KEYS if key in out)


def with_output_dir(cfg: RunConfig, output_dir: str | Path) -> RunConfig:
    return replace(cfg, output_dir=Path(output_dir))
