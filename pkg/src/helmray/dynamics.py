"""Leapfrog integration of the three exact ray systems.

Every ray of a front advances with one common ``dt``. The wave-potential
force is rebuilt from the current front at each half kick and always points
perpendicular to the ray momentum.

Systems (``p`` is the wave vector ``k`` in optics):

* non-relativistic: dr/dt = p/m, dp/dt = -grad V - grad Q
* relativistic:     dr/dt = c^2 p/(E - V), dp/dt = -grad V - E/(E - V) grad Q
* optics:           dr/dt = c k/k0, dk/dt = grad(c k0 n^2 / 2) - grad W
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import EnergyDriftError, EvanescentError, TurningPointError
from .potentials import IndexField, PotentialField
from .units import Regime, RegimeKind, UnitSystem, Wavefront
from .wavefront import (
    coupling_force,
    damping_coefficient,
    front_damping,
    front_tangent,
    transport_amplitude,
    wave_potential,
)

log = logging.getLogger(__name__)

__all__ = [
    "Regime",
    "StepReport",
    "step",
    "step_nonrelativistic",
    "step_relativistic",
    "step_optics",
    "hamiltonian",
    "hamiltonian_residual",
    "suggest_dt",
    "propagate",
    "prepare_front",
    "energy_consistent_momenta",
]

_DRIFT_TOL = 1e-15
_DRIFT_MAX_ITER = 50


@dataclass(frozen=True)
class StepReport:
    dt: float
    max_energy_residual: float
    max_speed_drift: float
    caustic_flag: bool


def _field_values(kind: RegimeKind, field, u: UnitSystem, x, z):
    value, (gx, gz) = field.evaluate(x, z)
    if kind is RegimeKind.OPTICS:
        if np.any(value <= 0.0):
            raise EvanescentError("ray entered a region with n <= 0")
    elif kind is RegimeKind.RELATIVISTIC:
        if np.any(u.E - value <= 0.0):
            raise TurningPointError("E - V <= 0 on a ray")
    return value, gx, gz


def _velocity(kind: RegimeKind, u: UnitSystem, value, px, pz):
    if kind is RegimeKind.NONRELATIVISTIC:
        return px / u.mass, pz / u.mass
    if kind is RegimeKind.RELATIVISTIC:
        f = u.c**2 / (u.E - value)
        return f * px, f * pz
    f = u.c / u.k0
    return f * px, f * pz


def _force(kind: RegimeKind, u: UnitSystem, front: Wavefront, value, gx, gz, potential, nu: float = 0.0):
    cx, cz = coupling_force(front, potential) if np.any(potential) else (0.0, 0.0)
    if nu:
        dx, dz = front_damping(front, nu)
        cx, cz = cx + dx, cz + dz
    if kind is RegimeKind.NONRELATIVISTIC:
        return -gx + cx, -gz + cz
    if kind is RegimeKind.RELATIVISTIC:
        f = u.E / (u.E - value)
        return -gx + f * cx, -gz + f * cz
    f = u.c * u.k0 * value
    return f * gx + cx, f * gz + cz


def hamiltonian(front: Wavefront, u: UnitSystem, field, regime: Regime | RegimeKind | str,
                potential: np.ndarray | None = None) -> np.ndarray:
    """Per-ray H (particle regimes) or dispersion D (optics).

    ``potential`` defaults to the Q/W stored on the front.
    """
    kind = _kind(regime)
    Q = front.Q if potential is None else potential
    value, _ = field.evaluate(front.x, front.z)
    p2 = front.px**2 + front.pz**2
    if kind is RegimeKind.NONRELATIVISTIC:
        return p2 / (2.0 * u.mass) + value + Q
    if kind is RegimeKind.RELATIVISTIC:
        # -hbar^2 c^2 lap R / R == 2 E Q
        radicand = p2 * u.c**2 + (u.mass * u.c**2) ** 2 + 2.0 * u.E * Q
        return value + np.sqrt(np.maximum(radicand, 0.0))
    return u.c / (2.0 * u.k0) * (p2 - (value * u.k0) ** 2) + Q


def hamiltonian_residual(front: Wavefront, u: UnitSystem, field, regime) -> np.ndarray:
    """(H - E)/E per ray, or D / (c k0 / 2) in optics."""
    kind = _kind(regime)
    h = hamiltonian(front, u, field, kind)
    if kind is RegimeKind.OPTICS:
        return h / (0.5 * u.c * u.k0)
    return (h - u.E) / u.E


def _kind(regime) -> RegimeKind:
    return regime.kind if isinstance(regime, Regime) else RegimeKind(regime)


def _regime(regime) -> Regime:
    return regime if isinstance(regime, Regime) else Regime(kind=regime)


def prepare_front(front: Wavefront, u: UnitSystem, field, regime) -> Wavefront:
    """Evaluate Q/W and H on a front (typically the launch front)."""
    regime = _regime(regime)
    out = front.copy()
    out.Q = wave_potential(out, u, regime)
    out.H = hamiltonian(out, u, field, regime.kind)
    return out


def energy_consistent_momenta(front: Wavefront, u: UnitSystem, field, regime) -> Wavefront:
    """Rescale |p| per ray so that H = E exactly (D = 0 in optics).

    Directions are kept. The correction is of relative order
    (lambda0 / w0)^2 for smooth launch profiles.
    """
    regime = _regime(regime)
    kind = regime.kind
    out = front.copy()
    Q = wave_potential(out, u, regime)
    value, _ = field.evaluate(out.x, out.z)
    if kind is RegimeKind.NONRELATIVISTIC:
        p2 = 2.0 * u.mass * (u.E - value - Q)
    elif kind is RegimeKind.RELATIVISTIC:
        p2 = ((u.E - value) ** 2 - (u.mass * u.c**2) ** 2 - 2.0 * u.E * Q) / u.c**2
    else:
        p2 = (value * u.k0) ** 2 - 2.0 * u.k0 / u.c * Q
    if np.any(p2 <= 0.0):
        raise TurningPointError("no propagating momentum satisfies H = E at launch")
    scale = np.sqrt(p2) / out.p
    out.px = out.px * scale
    out.pz = out.pz * scale
    out.Q = Q
    out.H = hamiltonian(out, u, field, kind, Q)
    return out


def _drift(kind, u, field, front: Wavefront, value0, px, pz, dt):
    vx0, vz0 = _velocity(kind, u, value0, px, pz)
    x1 = front.x + dt * vx0
    z1 = front.z + dt * vz0
    if kind is not RegimeKind.RELATIVISTIC or _is_free(field):
        return x1, z1
    # trapezoidal drift keeps the step symmetric when v depends on V(r)
    for _ in range(_DRIFT_MAX_ITER):
        value1, _, _ = _field_values(kind, field, u, x1, z1)
        vx1, vz1 = _velocity(kind, u, value1, px, pz)
        xn = front.x + 0.5 * dt * (vx0 + vx1)
        zn = front.z + 0.5 * dt * (vz0 + vz1)
        delta = max(np.abs(xn - x1).max(), np.abs(zn - z1).max())
        x1, z1 = xn, zn
        scale = max(np.abs(x1).max(), np.abs(z1).max(), 1.0)
        if delta <= _DRIFT_TOL * scale:
            break
    else:
        log.warning("relativistic drift iteration did not converge (delta=%.3g)", delta)
    return x1, z1


def _is_free(field) -> bool:
    from .potentials import PotentialKind

    pot = field.potential if isinstance(field, IndexField) else field
    return isinstance(pot, PotentialField) and pot.kind is PotentialKind.FREE


def _advance(front: Wavefront, u: UnitSystem, field, dt: float, regime: Regime,
             energy_limit: float | None) -> tuple[Wavefront, StepReport]:
    kind = regime.kind
    nu = damping_coefficient(u, regime)
    value0, gx0, gz0 = _field_values(kind, field, u, front.x, front.z)
    fx, fz = _force(kind, u, front, value0, gx0, gz0, front.Q, nu)
    px_h = front.px + 0.5 * dt * fx
    pz_h = front.pz + 0.5 * dt * fz

    x1, z1 = _drift(kind, u, field, front, value0, px_h, pz_h, dt)
    trial = Wavefront(x=x1, z=z1, px=px_h, pz=pz_h, R=front.R, t=front.t + dt)
    trial.R = transport_amplitude(front, trial)
    Q_trial = wave_potential(trial, u, regime)

    value1, gx1, gz1 = _field_values(kind, field, u, x1, z1)
    fx, fz = _force(kind, u, trial, value1, gx1, gz1, Q_trial, nu)
    nxt = Wavefront(x=x1, z=z1, px=px_h + 0.5 * dt * fx, pz=pz_h + 0.5 * dt * fz, R=front.R, t=front.t + dt)
    nxt.R = transport_amplitude(front, nxt)
    nxt.Q = wave_potential(nxt, u, regime)
    nxt.H = hamiltonian(nxt, u, field, kind)

    residual = np.abs(hamiltonian_residual(nxt, u, field, kind))
    p_prev = front.p
    report = StepReport(
        dt=dt,
        max_energy_residual=float(residual.max()),
        max_speed_drift=float(np.abs(nxt.p - p_prev).max() / p_prev.min()),
        caustic_flag=bool(np.any(nxt.tube_widths < 0.5 * front.tube_widths)),
    )
    if energy_limit is not None and report.max_energy_residual > energy_limit:
        raise EnergyDriftError(
            f"|H - E|/E = {report.max_energy_residual:.3g} exceeds {energy_limit:.3g} at t={nxt.t:.6g}"
        )
    return nxt, report


def step(front: Wavefront, u: UnitSystem, field, dt: float, regime,
         *, energy_limit: float | None = None) -> tuple[Wavefront, StepReport]:
    """One kick-drift-kick step; Q/W is re-evaluated on the incoming front."""
    regime = _regime(regime)
    current = front.copy()
    current.Q = wave_potential(current, u, regime)
    return _advance(current, u, field, dt, regime, energy_limit)


def step_nonrelativistic(front, u, V: PotentialField, dt, *, eikonal=False, wave_scale=1.0, energy_limit=None):
    return step(front, u, V, dt, Regime(RegimeKind.NONRELATIVISTIC, eikonal, wave_scale), energy_limit=energy_limit)


def step_relativistic(front, u, V: PotentialField, dt, *, eikonal=False, wave_scale=1.0, energy_limit=None):
    return step(front, u, V, dt, Regime(RegimeKind.RELATIVISTIC, eikonal, wave_scale), energy_limit=energy_limit)


def step_optics(front, u, n: IndexField, dt, *, eikonal=False, wave_scale=1.0, energy_limit=None):
    return step(front, u, n, dt, Regime(RegimeKind.OPTICS, eikonal, wave_scale), energy_limit=energy_limit)


def suggest_dt(front: Wavefront, u: UnitSystem, field, regime, z_scale: float,
               *, longitudinal_fraction: float = 1e-3, spacing_fraction: float = 0.1,
               dispersion_fraction: float = 0.8) -> float:
    """Largest dt allowed by the step-size rule.

    Longitudinal: dt <= longitudinal_fraction * z_scale / max|v_z|.
    Transverse: neighbouring rays may not close or open their gap by more
    than ``spacing_fraction`` of it in one step.
    With the wave potential on, dt also stays below ``dispersion_fraction``
    of the explicit limit for the fastest ray-to-ray mode, whose frequency
    grows like (hbar/m) / gap^2, and of the front-viscosity limit.
    """
    regime = _regime(regime)
    kind = regime.kind
    value, _ = field.evaluate(front.x, front.z)
    vx, vz = _velocity(kind, u, value, front.px, front.pz)
    dt = longitudinal_fraction * z_scale / np.abs(vz).max()
    tx, tz = front_tangent(front)
    mx, mz = 0.5 * (tx[:-1] + tx[1:]), 0.5 * (tz[:-1] + tz[1:])
    rel = np.abs(np.diff(vx) * mx + np.diff(vz) * mz)
    moving = rel > 0.0
    if moving.any():
        dt = min(dt, spacing_fraction * (front.gaps[moving] / rel[moving]).min())
    if regime.coupling:
        kappa = damping_coefficient(u, Regime(kind, wave_scale=regime.coupling, front_viscosity=1.0))
        if kind is RegimeKind.RELATIVISTIC:
            kappa *= np.max(u.E / (u.E - value))
        h2 = front.gaps.min() ** 2
        limit = min(4.0 / np.pi**2, 0.5 / regime.front_viscosity if regime.front_viscosity else np.inf)
        dt = min(dt, dispersion_fraction * limit * h2 / kappa)
    return float(dt)


def propagate(front: Wavefront, u: UnitSystem, field, regime, dt: float,
              *, energy_limit: float | None = None) -> Iterator[tuple[Wavefront, StepReport]]:
    """Yield successive fronts forever; the caller decides when to stop."""
    regime = _regime(regime)
    current = front.copy()
    current.Q = wave_potential(current, u, regime)
    while True:
        current, report = _advance(current, u, field, dt, regime, energy_limit)
        yield current, report
