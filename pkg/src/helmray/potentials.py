"""Stationary external potentials V(x, z) with analytic gradients, and the
refractive index seen by massless particles, n = 1 - V/E."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import ConfigError, EvanescentError, OutOfDomainError
from .units import UnitSystem


class PotentialKind(str, enum.Enum):
    FREE = "free"
    LINEAR_RAMP = "linear_ramp"
    HARMONIC = "harmonic"
    STEP_SMOOTHED = "step_smoothed"
    CUSTOM_TABULATED = "custom_tabulated"


DEFAULT_SMOOTHING = 1.0 / 50.0


@dataclass(frozen=True)
class PotentialField:
    """A potential of one of the registered kinds.

    Parameters per kind (missing ones take defaults):

    * linear_ramp: ``offset``, ``slope_x``, ``slope_z``
    * harmonic: ``kappa`` (and ``kappa_z``), centred on ``x_c``, ``z_c``
    * step_smoothed: ``height``, ``position``, ``width`` (inf for a single
      step), ``smoothing`` (> 0), ``axis`` (0 for x, 1 for z)
    * custom_tabulated: ``x``, ``z`` grid vectors and ``V`` of shape (nx, nz)
    """

    kind: PotentialKind = PotentialKind.FREE
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", PotentialKind(self.kind))
        if self.kind is PotentialKind.STEP_SMOOTHED:
            if not self.params.get("smoothing", DEFAULT_SMOOTHING) > 0.0:
                raise ConfigError("step_smoothed needs a positive smoothing length")
        if self.kind is PotentialKind.CUSTOM_TABULATED:
            xs = np.asarray(self.params["x"], dtype=float)
            zs = np.asarray(self.params["z"], dtype=float)
            table = np.asarray(self.params["V"], dtype=float)
            if table.shape != (xs.size, zs.size):
                raise ConfigError(f"tabulated V has shape {table.shape}, expected {(xs.size, zs.size)}")
            if xs.size < 2 or zs.size < 2 or np.any(np.diff(xs) <= 0) or np.any(np.diff(zs) <= 0):
                raise ConfigError("tabulated grid must be strictly increasing with >= 2 nodes per axis")
            if not np.all(np.isfinite(table)):
                raise ConfigError("tabulated V must be finite")
            gx, gz = np.gradient(table, xs, zs, edge_order=2)
            object.__setattr__(self, "_interp", tuple(
                RegularGridInterpolator((xs, zs), a, method="linear") for a in (table, gx, gz)
            ))

    @classmethod
    def free(cls) -> PotentialField:
        return cls()

    @classmethod
    def linear_ramp(cls, slope_x: float = 0.0, slope_z: float = 0.0, offset: float = 0.0) -> PotentialField:
        return cls(PotentialKind.LINEAR_RAMP, {"slope_x": slope_x, "slope_z": slope_z, "offset": offset})

    @classmethod
    def harmonic(cls, kappa: float, kappa_z: float = 0.0, x_c: float = 0.0, z_c: float = 0.0) -> PotentialField:
        return cls(PotentialKind.HARMONIC, {"kappa": kappa, "kappa_z": kappa_z, "x_c": x_c, "z_c": z_c})

    @classmethod
    def step(cls, height: float, position: float = 0.0, *, width: float = math.inf,
             smoothing: float = DEFAULT_SMOOTHING, axis: int = 1) -> PotentialField:
        return cls(PotentialKind.STEP_SMOOTHED, {
            "height": height, "position": position, "width": width, "smoothing": smoothing, "axis": axis,
        })

    @classmethod
    def tabulated(cls, x, z, V) -> PotentialField:
        return cls(PotentialKind.CUSTOM_TABULATED, {"x": np.asarray(x), "z": np.asarray(z), "V": np.asarray(V)})

    @classmethod
    def from_csv(cls, path: str | Path) -> PotentialField:
        """Load a tabulated field from a CSV with header ``x,z,V``.

        Rows may come in any order but must cover a full rectangular grid.
        """
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = [h.strip() for h in next(reader)]
            if header != ["x", "z", "V"]:
                raise ConfigError(f"{path}: expected header x,z,V, got {','.join(header)}")
            rows = np.array([[float(v) for v in row] for row in reader if row], dtype=float)
        xs = np.unique(rows[:, 0])
        zs = np.unique(rows[:, 1])
        if rows.shape[0] != xs.size * zs.size:
            raise ConfigError(f"{path}: rows do not form a complete {xs.size}x{zs.size} grid")
        table = np.full((xs.size, zs.size), np.nan)
        table[np.searchsorted(xs, rows[:, 0]), np.searchsorted(zs, rows[:, 1])] = rows[:, 2]
        if np.isnan(table).any():
            raise ConfigError(f"{path}: duplicate grid nodes")
        return cls.tabulated(xs, zs, table)

    def evaluate(self, x, z) -> tuple[np.ndarray, tuple[np.ndarray, np.ndarray]]:
        """Return ``V`` and ``(dV/dx, dV/dz)`` at the given points."""
        x, z = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(z, dtype=float))
        p = self.params
        kind = self.kind
        if kind is PotentialKind.FREE:
            zero = np.zeros_like(x)
            return zero, (zero, zero.copy())
        if kind is PotentialKind.LINEAR_RAMP:
            gx, gz = p.get("slope_x", 0.0), p.get("slope_z", 0.0)
            V = p.get("offset", 0.0) + gx * x + gz * z
            return V, (np.full_like(x, gx), np.full_like(x, gz))
        if kind is PotentialKind.HARMONIC:
            kx, kz = p.get("kappa", 0.0), p.get("kappa_z", 0.0)
            dx, dz = x - p.get("x_c", 0.0), z - p.get("z_c", 0.0)
            return 0.5 * (kx * dx * dx + kz * dz * dz), (kx * dx, kz * dz)
        if kind is PotentialKind.STEP_SMOOTHED:
            return self._step(x, z)
        return self._tabulated(x, z)

    def __call__(self, x, z) -> np.ndarray:
        return self.evaluate(x, z)[0]

    def _step(self, x, z):
        p = self.params
        h = p.get("height", 0.0)
        L = p.get("smoothing", DEFAULT_SMOOTHING)
        q0 = p.get("position", 0.0)
        width = p.get("width", math.inf)
        axis = int(p.get("axis", 1))
        q = z if axis == 1 else x

        def edge(arg):
            t = np.tanh(arg)
            return 0.5 * (1.0 + t), 0.5 * (1.0 - t * t) / L

        up, dup = edge((q - q0) / L)
        if math.isfinite(width):
            down, ddown = edge((q - q0 - width) / L)
            up, dup = up - down, dup - ddown
        V = h * up
        g = h * dup
        zero = np.zeros_like(V)
        return V, ((g, zero) if axis == 0 else (zero, g))

    def _tabulated(self, x, z):
        pts = np.stack([x.ravel(), z.ravel()], axis=-1)
        xs, zs = self.params["x"], self.params["z"]
        inside = (pts[:, 0] >= xs[0]) & (pts[:, 0] <= xs[-1]) & (pts[:, 1] >= zs[0]) & (pts[:, 1] <= zs[-1])
        if not inside.all():
            bad = pts[~inside][0]
            raise OutOfDomainError(f"point ({bad[0]:.6g}, {bad[1]:.6g}) outside tabulated grid")
        V, gx, gz = (f(pts).reshape(x.shape) for f in self._interp)
        return V, (gx, gz)


def refractive_index_from_potential(field: PotentialField, u: UnitSystem, x, z) -> np.ndarray:
    """n = 1 - V/E; raises EvanescentError where n <= 0."""
    if not u.E > 0.0:
        raise ConfigError("refractive index mapping needs E > 0")
    V, _ = field.evaluate(x, z)
    n = 1.0 - V / u.E
    if np.any(n <= 0.0):
        raise EvanescentError("n <= 0: the wave cannot propagate there")
    return n


@dataclass(frozen=True)
class IndexField:
    """Refractive index n = background - V/E for optics runs."""

    potential: PotentialField = field(default_factory=PotentialField)
    energy: float = 1.0
    background: float = 1.0

    @classmethod
    def from_potential(cls, potential: PotentialField, u: UnitSystem) -> IndexField:
        if not u.E > 0.0:
            raise ConfigError("refractive index mapping needs E > 0")
        return cls(potential=potential, energy=u.E)

    def evaluate(self, x, z):
        V, (gx, gz) = self.potential.evaluate(x, z)
        n = self.background - V / self.energy
        return n, (-gx / self.energy, -gz / self.energy)
