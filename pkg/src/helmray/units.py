"""Unit normalization and the shared ray/wavefront containers.

Internal units fix hbar = 1, w0 = 1 and (for massive particles) m = 1, so
the only physical knob is the ratio lambda0 / w0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError

TWO_PI = 2.0 * math.pi


class RegimeKind(str, enum.Enum):
    OPTICS = "optics"
    NONRELATIVISTIC = "nonrelativistic"
    RELATIVISTIC = "relativistic"


@dataclass(frozen=True)
class UnitSystem:
    """Normalization constants for one run.

    ``p0`` is the launch momentum (or hbar * k0 in optics), ``E`` the total
    energy fixed at launch, ``epsilon = lambda0 / (2 pi w0)``.
    ``c`` is ``None`` in the non-relativistic regime.
    """

    regime: RegimeKind
    lambda0_over_w0: float
    hbar: float
    mass: float
    w0: float
    c: float | None
    p0: float
    E: float
    epsilon: float
    launch_potential: float = 0.0

    @property
    def lambda0(self) -> float:
        return self.lambda0_over_w0 * self.w0

    @property
    def k0(self) -> float:
        return TWO_PI / self.lambda0

    @property
    def omega(self) -> float:
        """Angular frequency E / hbar."""
        return self.E / self.hbar

    @property
    def pc_over_rest_energy(self) -> float | None:
        if self.regime is not RegimeKind.RELATIVISTIC or self.mass == 0.0:
            return None
        return self.p0 / (self.mass * self.c)

    def launch_energy(self, V: float | np.ndarray = 0.0, p: float | np.ndarray | None = None):
        """Regime energy relation evaluated for momentum ``p`` at potential ``V``."""
        p = self.p0 if p is None else p
        if self.regime is RegimeKind.NONRELATIVISTIC:
            return p * p / (2.0 * self.mass) + V
        if self.regime is RegimeKind.RELATIVISTIC:
            rest = self.mass * self.c**2
            return V + np.sqrt((p * self.c) ** 2 + rest * rest)
        return p * self.c


def make_unit_system(
    lambda0_over_w0: float,
    regime: RegimeKind | str = RegimeKind.NONRELATIVISTIC,
    pc_over_rest_energy: float | None = None,
    *,
    rest_mass: float = 1.0,
    launch_potential: float = 0.0,
) -> UnitSystem:
    """Build the unit bundle for a run.

    ``rest_mass=0`` selects massless relativistic particles; ``c`` is then 1
    and ``pc_over_rest_energy`` must be omitted. Optics runs also use c = 1.
    """
    try:
        regime = RegimeKind(regime)
    except ValueError as exc:
        raise ConfigError(f"unknown regime {regime!r}") from exc
    if regime is RegimeKind.OPTICS and launch_potential != 0.0:
        raise ConfigError("optics regime takes its medium from a refractive index, not a launch potential")
    if not (lambda0_over_w0 > 0.0) or not math.isfinite(lambda0_over_w0):
        raise ConfigError(f"lambda0_over_w0 must be > 0, got {lambda0_over_w0}")

    hbar, w0 = 1.0, 1.0
    p0 = TWO_PI * hbar / (lambda0_over_w0 * w0)
    epsilon = lambda0_over_w0 / TWO_PI

    if regime is RegimeKind.NONRELATIVISTIC:
        mass, c = 1.0, None
    elif regime is RegimeKind.OPTICS:
        mass, c = 0.0, 1.0
    else:
        if rest_mass < 0.0:
            raise ConfigError("rest_mass must be >= 0")
        if rest_mass == 0.0:
            if pc_over_rest_energy is not None:
                raise ConfigError("pc_over_rest_energy is meaningless for massless particles")
            mass, c = 0.0, 1.0
        else:
            if pc_over_rest_energy is None:
                raise ConfigError("relativistic regime needs pc_over_rest_energy")
            if not (pc_over_rest_energy > 0.0):
                raise ConfigError(f"pc_over_rest_energy must be > 0, got {pc_over_rest_energy}")
            mass = float(rest_mass)
            # p0 / (m c) = pc / (m c^2)
            c = p0 / (mass * pc_over_rest_energy)

    units = UnitSystem(
        regime=regime,
        lambda0_over_w0=float(lambda0_over_w0),
        hbar=hbar,
        mass=mass,
        w0=w0,
        c=c,
        p0=p0,
        E=0.0,
        epsilon=epsilon,
        launch_potential=float(launch_potential),
    )
    energy = float(units.launch_energy(launch_potential))
    return replace(units, E=energy)


def rayleigh_length(u: UnitSystem) -> float:
    """pi w0^2 / lambda0."""
    return math.pi * u.w0**2 / u.lambda0


@dataclass(frozen=True)
class Regime:
    """Which Hamiltonian system to integrate.

    ``eikonal=True`` switches the wave potential off entirely;
    ``wave_scale`` multiplies it otherwise (1 is the exact system).
    ``front_viscosity`` (in units of hbar/m) damps grid-scale transverse
    oscillations of the ray front; it vanishes with the wave potential.
    """

    kind: RegimeKind = RegimeKind.NONRELATIVISTIC
    eikonal: bool = False
    wave_scale: float = 1.0
    front_viscosity: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", RegimeKind(self.kind))
        if not self.front_viscosity >= 0.0:
            raise ConfigError("front_viscosity must be >= 0")

    @property
    def coupling(self) -> float:
        return 0.0 if self.eikonal else float(self.wave_scale)


@dataclass(frozen=True)
class RayState:
    x: float
    z: float
    px: float
    pz: float
    R: float
    Q: float = 0.0
    H: float = 0.0


@dataclass
class Wavefront:
    """Equal-time set of rays stored column-wise.

    Ray order is fixed at launch; index 0 is the "first" ray from which the
    transverse arclength ``s`` is measured.
    """

    x: np.ndarray
    z: np.ndarray
    px: np.ndarray
    pz: np.ndarray
    R: np.ndarray
    t: float = 0.0
    Q: np.ndarray = field(default=None)
    H: np.ndarray = field(default=None)

    def __post_init__(self) -> None:
        self.x = np.asarray(self.x, dtype=float)
        n = self.x.shape[0]
        self.z = _column(self.z, n, "z")
        self.px = _column(self.px, n, "px")
        self.pz = _column(self.pz, n, "pz")
        self.R = _column(self.R, n, "R")
        self.Q = np.zeros(n) if self.Q is None else _column(self.Q, n, "Q")
        self.H = np.zeros(n) if self.H is None else _column(self.H, n, "H")
        if self.x.ndim != 1:
            raise ValueError("ray columns must be 1-D")
        if np.any(self.R < 0.0):
            raise ValueError("ray amplitudes must be non-negative")

    @classmethod
    def from_rays(cls, rays, t: float = 0.0) -> Wavefront:
        rays = list(rays)
        cols = {k: np.array([getattr(r, k) for r in rays], dtype=float) for k in ("x", "z", "px", "pz", "R", "Q", "H")}
        return cls(t=t, **cols)

    def __len__(self) -> int:
        return self.x.shape[0]

    @property
    def rays(self) -> list[RayState]:
        return [
            RayState(*map(float, row))
            for row in zip(self.x, self.z, self.px, self.pz, self.R, self.Q, self.H)
        ]

    @property
    def p(self) -> np.ndarray:
        """Momentum magnitude per ray."""
        return np.hypot(self.px, self.pz)

    @property
    def gaps(self) -> np.ndarray:
        """Euclidean distance between consecutive rays (length N-1)."""
        return np.hypot(np.diff(self.x), np.diff(self.z))

    @property
    def s(self) -> np.ndarray:
        return np.concatenate(([0.0], np.cumsum(self.gaps)))

    @property
    def tube_widths(self) -> np.ndarray:
        """Per-ray width: mean of the adjacent gaps, half-gap at the edges."""
        g = self.gaps
        w = np.empty(len(self))
        w[0] = 0.5 * g[0]
        w[-1] = 0.5 * g[-1]
        w[1:-1] = 0.5 * (g[:-1] + g[1:])
        return w

    def copy(self) -> Wavefront:
        return Wavefront(
            x=self.x.copy(), z=self.z.copy(), px=self.px.copy(), pz=self.pz.copy(),
            R=self.R.copy(), t=self.t, Q=self.Q.copy(), H=self.H.copy(),
        )


def _column(values, n: int, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValueError(f"column {name!r} has shape {arr.shape}, expected ({n},)")
    return arr
