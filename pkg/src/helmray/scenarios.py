"""Canned launch fronts (Gaussian beam, single and double slit), the run loop
that turns them into trajectory bundles, and front-level diagnostics."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.signal import find_peaks

from .dynamics import prepare_front, propagate, suggest_dt
from .errors import ConfigError, DegenerateFrontError, NumericalError
from .potentials import IndexField, PotentialField
from .units import Regime, RegimeKind, UnitSystem, Wavefront, make_unit_system, rayleigh_length
from .wavefront import AMPLITUDE_FLOOR

log = logging.getLogger(__name__)

MAX_STEPS = 10_000_000


class ScenarioKind(str, enum.Enum):
    GAUSSIAN = "gaussian"
    SINGLE_SLIT = "single_slit"
    DOUBLE_SLIT = "double_slit"


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to reproduce one run.

    Lengths are in units of w0. ``z_max=None`` means three Rayleigh lengths;
    ``dt=None`` lets the step-size rule pick the step. ``edge_order`` is the
    (even) exponent of the super-Gaussian slit profile: 2 gives Gaussian
    slits, larger values sharper edges.
    """

    scenario: ScenarioKind = ScenarioKind.GAUSSIAN
    n_rays: int = 201
    half_width: float = 4.0
    z_max: float | None = None
    regime: Regime = field(default_factory=Regime)
    lambda0_over_w0: float = 2e-4
    pc_over_rest_energy: float | None = None
    rest_mass: float = 1.0
    slit_width: float = 2.0
    slit_separation: float = 8.0
    edge_order: int = 8
    snapshot_every: int = 10
    dt: float | None = None

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "scenario", ScenarioKind(self.scenario))
        except ValueError as exc:
            raise ConfigError(f"unknown scenario {self.scenario!r}") from exc
        if isinstance(self.regime, (str, RegimeKind)):
            object.__setattr__(self, "regime", Regime(kind=self.regime))
        if self.n_rays < 51 or self.n_rays % 2 == 0:
            raise ConfigError(f"n_rays must be odd and >= 51, got {self.n_rays}")
        if self.scenario is ScenarioKind.GAUSSIAN and not self.half_width >= 3.0:
            raise ConfigError(f"half_width must be >= 3 w0 for the gaussian scenario, got {self.half_width}")
        if not self.half_width > 0.0:
            raise ConfigError("half_width must be > 0")
        if self.z_max is not None and not self.z_max > 0.0:
            raise ConfigError(f"z_max must be > 0, got {self.z_max}")
        if self.snapshot_every < 1:
            raise ConfigError("snapshot_every must be >= 1")
        if self.dt is not None and not self.dt > 0.0:
            raise ConfigError("dt must be > 0")
        if self.edge_order < 2 or self.edge_order % 2:
            raise ConfigError(f"edge_order must be an even integer >= 2, got {self.edge_order}")
        if self.scenario is not ScenarioKind.GAUSSIAN:
            if not self.slit_width > 0.0:
                raise ConfigError("slit_width must be > 0")
            reach = 0.5 * self.slit_width
            if self.scenario is ScenarioKind.DOUBLE_SLIT:
                if self.slit_separation < self.slit_width:
                    raise ConfigError("slit_separation must be at least slit_width")
                reach += 0.5 * self.slit_separation
            if self.half_width <= reach:
                raise ConfigError(f"half_width {self.half_width} does not cover the aperture (needs > {reach})")

    def units(self) -> UnitSystem:
        return make_unit_system(
            self.lambda0_over_w0,
            self.regime.kind,
            self.pc_over_rest_energy,
            rest_mass=self.rest_mass,
        )

    def resolved_z_max(self, u: UnitSystem | None = None) -> float:
        if self.z_max is not None:
            return self.z_max
        return 3.0 * rayleigh_length(u or self.units())


@dataclass
class TrajectoryBundle:
    """Time-ordered snapshots of one run plus the config that produced it.

    ``source`` tags the CSV rows: ``exact`` for ray runs, ``bohm`` for
    comparator paths (which carry no ScenarioConfig).
    """

    snapshots: list[Wavefront]
    units: UnitSystem
    config: ScenarioConfig | None = None
    source: str = "exact"

    def __post_init__(self) -> None:
        if self.snapshots:
            n = len(self.snapshots[0])
            if any(len(s) != n for s in self.snapshots):
                raise ValueError("ray count changed between snapshots")
            t = np.array([s.t for s in self.snapshots])
            if np.any(np.diff(t) <= 0.0):
                raise ValueError("snapshot times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.snapshots)

    @property
    def n_rays(self) -> int:
        return len(self.snapshots[0]) if self.snapshots else 0

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    def column(self, name: str) -> np.ndarray:
        """Array of shape (n_snapshots, n_rays) for one ray attribute."""
        return np.stack([getattr(s, name) for s in self.snapshots])

    def path(self, ray: int) -> dict[str, np.ndarray]:
        """Full sampled path (t, x, z, px, pz, R, Q, H) of one ray."""
        out = {"t": self.times}
        for name in ("x", "z", "px", "pz", "R", "Q", "H"):
            out[name] = np.array([getattr(s, name)[ray] for s in self.snapshots])
        return out


def gaussian_waist_reference(z, u: UnitSystem):
    """Positive waist line x(z) = sqrt(w0^2 + (lambda0 z / (pi w0))^2)."""
    z = np.asarray(z, dtype=float)
    x = np.sqrt(u.w0**2 + (u.lambda0 * z / (math.pi * u.w0)) ** 2)
    return float(x) if x.ndim == 0 else x


def launch_profile(cfg: ScenarioConfig, x: np.ndarray) -> np.ndarray:
    """Launch amplitude R(x), normalized to a maximum of 1."""
    if cfg.scenario is ScenarioKind.GAUSSIAN:
        R = np.exp(-(x**2))
    else:
        half = 0.5 * cfg.slit_width
        centres = (0.0,) if cfg.scenario is ScenarioKind.SINGLE_SLIT else (
            -0.5 * cfg.slit_separation, 0.5 * cfg.slit_separation)
        R = sum(np.exp(-(((x - c) / half) ** cfg.edge_order)) for c in centres)
    return R / R.max()


def build_launch_front(cfg: ScenarioConfig, u: UnitSystem) -> Wavefront:
    """Equispaced rays on [-half_width, half_width] at z = 0 with p = (0, p0)."""
    x = np.linspace(-cfg.half_width, cfg.half_width, cfg.n_rays) * u.w0
    # exact zero on the axis keeps the launch mirror-symmetric bit for bit
    x[cfg.n_rays // 2] = 0.0
    x[cfg.n_rays // 2 + 1:] = -x[cfg.n_rays // 2 - 1::-1]
    p0 = u.p0 if cfg.regime.kind is not RegimeKind.OPTICS else u.k0
    return Wavefront(x=x, z=0.0, px=0.0, pz=p0, R=launch_profile(cfg, x / u.w0))


def run_scenario(cfg: ScenarioConfig, field: PotentialField | IndexField | None = None,
                 *, energy_limit: float | None = None) -> TrajectoryBundle:
    """Launch, integrate until the central ray passes ``z_max``, snapshot.

    ``field`` defaults to free space (all canned scenarios are field-free);
    other fields are accepted for numerical experiments. A PotentialField
    is converted to n = 1 - V/E in the optics regime.
    """
    u = cfg.units()
    if field is None:
        field = PotentialField.free()
    if cfg.regime.kind is RegimeKind.OPTICS and isinstance(field, PotentialField):
        field = IndexField.from_potential(field, u)
    front = prepare_front(build_launch_front(cfg, u), u, field, cfg.regime)
    z_max = cfg.resolved_z_max(u)
    dt = cfg.dt or suggest_dt(front, u, field, cfg.regime, rayleigh_length(u))
    centre = cfg.n_rays // 2
    snapshots = [front]
    n_steps = 0
    for current, report in propagate(front, u, field, cfg.regime, dt, energy_limit=energy_limit):
        n_steps += 1
        done = current.z[centre] >= z_max
        if done or n_steps % cfg.snapshot_every == 0:
            snapshots.append(current)
        if done:
            break
        if n_steps >= MAX_STEPS:
            raise NumericalError(f"runaway run: {MAX_STEPS} steps without reaching z_max={z_max:.6g}")
    log.info("%s run: %d steps of dt=%.6g, %d snapshots", cfg.scenario.value, n_steps, dt, len(snapshots))
    return TrajectoryBundle(snapshots=snapshots, config=cfg, units=u)


def _weights(front: Wavefront, floor: float = AMPLITUDE_FLOOR) -> np.ndarray:
    R = front.R
    if not R.max() > 0.0:
        raise DegenerateFrontError("all weights at the amplitude floor")
    w = np.where(R > floor * R.max(), R**2, 0.0) * front.tube_widths
    if not w.sum() > 0.0:
        raise DegenerateFrontError("all weights at the amplitude floor")
    return w / w.sum()


def uncertainty_product(front: Wavefront, u: UnitSystem) -> float:
    """Delta x * Delta p_x / hbar with R^2-weighted statistics over the front.

    Each ray is weighted by R^2 times its tube width, i.e. by the
    probability it carries. In optics ``px`` is a wave number, so the
    product is Delta x * Delta k_x.
    """
    w = _weights(front)

    def spread(v):
        mean = np.dot(w, v)
        return math.sqrt(max(np.dot(w, (v - mean) ** 2), 0.0))

    hbar = 1.0 if u.regime is RegimeKind.OPTICS else u.hbar
    return spread(front.x) * spread(front.px) / hbar


def screen_crossings(bundle: TrajectoryBundle, z_screen: float) -> np.ndarray:
    """x where each ray crosses ``z_screen``, by linear interpolation in t."""
    z = bundle.column("z")
    x = bundle.column("x")
    if not (z[0].max() <= z_screen <= z[-1].min()):
        raise ValueError(f"z_screen={z_screen:.6g} is not covered by every ray of the bundle")
    out = np.empty(bundle.n_rays)
    for i in range(bundle.n_rays):
        out[i] = np.interp(z_screen, z[:, i], x[:, i])
    return out


def fringe_spacing(bundle: TrajectoryBundle, z_screen: float, *, bins: int | None = None,
                   min_prominence: float = 0.05) -> float:
    """Mean distance between adjacent intensity maxima on a screen.

    Rays are binned at their screen crossing with their launch flux
    R^2 |p| ds as weight (flux is conserved along every tube).
    """
    launch = bundle.snapshots[0]
    flux = launch.R**2 * launch.p * launch.tube_widths
    x = screen_crossings(bundle, z_screen)
    live = launch.R > AMPLITUDE_FLOOR * launch.R.max()
    lo, hi = x[live].min(), x[live].max()
    if bins is None:
        bins = max(int(live.sum()) // 4, 16)
    hist, edges = np.histogram(x, bins=bins, range=(lo, hi), weights=flux)
    peaks, _ = find_peaks(np.concatenate(([0.0], hist, [0.0])), prominence=min_prominence * hist.max())
    centres = 0.5 * (edges[:-1] + edges[1:])
    maxima = centres[peaks - 1]
    if maxima.size < 3:
        raise DegenerateFrontError(f"only {maxima.size} resolvable intensity maxima at z={z_screen:.6g}")
    return float(np.diff(maxima).mean())


def fraunhofer_spacing(u: UnitSystem, z_screen: float, separation: float) -> float:
    """Two-slit far-field fringe spacing lambda0 * z / d."""
    return u.lambda0 * z_screen / separation


def waist_errors(bundle: TrajectoryBundle, rays: Iterable[int]) -> np.ndarray:
    """max_z |x - x_ref| / x_ref per ray, with x_ref scaled by the launch x."""
    u = bundle.units
    x = bundle.column("x")
    z = bundle.column("z")
    out = []
    for i in rays:
        ref = abs(x[0, i]) * gaussian_waist_reference(z[:, i], u) / u.w0
        out.append(np.max(np.abs(np.abs(x[:, i]) - ref) / ref))
    return np.array(out)
