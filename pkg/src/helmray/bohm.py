"""One-dimensional probabilistic comparator: Schrödinger evolution in a
hard-wall box, eigenmode superposition, Bohm guidance trajectories, the
quantum potential and Madelung (continuity / Hamilton-Jacobi) residuals.

The Hamiltonian uses the fourth-order five-point Laplacian with odd
reflection at the walls, so box eigenvectors are exact discrete sines and
the log-amplitude kernel shared with the wavefront module agrees with the
discrete eigen-equation to fourth order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.linalg import eig_banded, solve_banded

from .errors import ConfigError, DomainEscapeError, NodeError, NumericalError
from .potentials import PotentialField
from .scenarios import TrajectoryBundle
from .units import UnitSystem, Wavefront
from .wavefront import stencil_weights

NODE_THRESHOLD = 1e-6
ESCAPE_PROBABILITY = 1e-6
_LAPLACIAN_5 = np.array([-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0])


@dataclass(frozen=True)
class WaveFunctionGrid:
    """psi sampled on the uniform grid x_min .. x_max (walls included)."""

    x_min: float
    x_max: float
    psi: np.ndarray
    t: float = 0.0

    def __post_init__(self) -> None:
        psi = np.asarray(self.psi, dtype=complex)
        if psi.ndim != 1 or psi.size < 64:
            raise ConfigError(f"a wave-function grid needs >= 64 points, got {psi.size}")
        if not self.x_max > self.x_min:
            raise ConfigError("x_max must exceed x_min")
        if not np.all(np.isfinite(psi)):
            raise NumericalError("non-finite wave function values")
        psi.setflags(write=False)
        object.__setattr__(self, "psi", psi)

    @property
    def n_points(self) -> int:
        return self.psi.size

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.psi) ** 2

    def norm(self) -> float:
        return float(self.density.sum() * self.dx)

    def same_grid(self, other: WaveFunctionGrid) -> bool:
        return (self.x_min, self.x_max, self.n_points) == (other.x_min, other.x_max, other.n_points)

    def with_psi(self, psi, t: float | None = None) -> WaveFunctionGrid:
        return replace(self, psi=psi, t=self.t if t is None else t)


@dataclass(frozen=True)
class EigenMode:
    u_n: np.ndarray
    E_n: float
    grid: WaveFunctionGrid
    c_n: complex = 1.0
    hbar: float = 1.0

    @property
    def omega_n(self) -> float:
        return self.E_n / self.hbar


def _mass(u: UnitSystem) -> float:
    if not u.mass > 0.0:
        raise ConfigError("the comparator needs a massive particle")
    return u.mass


def _hamiltonian_bands(x: np.ndarray, dx: float, V: PotentialField, u: UnitSystem) -> np.ndarray:
    """Upper banded storage (3, n_interior) of the interior Hamiltonian."""
    n = x.size - 2
    kin = -(u.hbar**2) / (2.0 * _mass(u) * dx * dx)
    potential, _ = V.evaluate(x[1:-1], np.zeros(n))
    bands = np.zeros((3, n))
    bands[2] = kin * _LAPLACIAN_5[2] + potential
    # odd reflection psi[-1] = -psi[1] folds the far neighbour onto the diagonal
    bands[2, 0] -= kin * _LAPLACIAN_5[0]
    bands[2, -1] -= kin * _LAPLACIAN_5[0]
    bands[1, 1:] = kin * _LAPLACIAN_5[1]
    bands[0, 2:] = kin * _LAPLACIAN_5[0]
    return bands


def _apply_hamiltonian(bands: np.ndarray, v: np.ndarray) -> np.ndarray:
    out = bands[2] * v
    out[1:] += bands[1, 1:] * v[:-1]
    out[:-1] += bands[1, 1:] * v[1:]
    out[2:] += bands[0, 2:] * v[:-2]
    out[:-2] += bands[0, 2:] * v[2:]
    return out


def hamiltonian_matrix(grid: WaveFunctionGrid, V: PotentialField, u: UnitSystem) -> np.ndarray:
    """Dense interior Hamiltonian (for checks and small grids)."""
    bands = _hamiltonian_bands(grid.x, grid.dx, V, u)
    n = bands.shape[1]
    H = np.diag(bands[2])
    H += np.diag(bands[1, 1:], 1) + np.diag(bands[1, 1:], -1)
    H += np.diag(bands[0, 2:], 2) + np.diag(bands[0, 2:], -2)
    assert H.shape == (n, n)
    return H


def eigenmodes(x_min: float, x_max: float, n_points: int, V: PotentialField, u: UnitSystem,
               count: int) -> list[EigenMode]:
    """Lowest ``count`` eigenmodes of the discrete box Hamiltonian, unit norm."""
    grid = WaveFunctionGrid(x_min, x_max, np.zeros(n_points))
    if not 1 <= count <= n_points - 2:
        raise ConfigError(f"count must be in [1, {n_points - 2}]")
    bands = _hamiltonian_bands(grid.x, grid.dx, V, u)
    energies, vectors = eig_banded(bands, select="i", select_range=(0, count - 1))
    modes = []
    for k in range(count):
        v = vectors[:, k]
        # deterministic sign: first significant lobe positive
        v = v * np.sign(v[np.argmax(np.abs(v) > 1e-3 * np.abs(v).max())])
        full = np.zeros(n_points)
        full[1:-1] = v / math.sqrt(grid.dx)
        modes.append(EigenMode(u_n=full, E_n=float(energies[k]), grid=grid, hbar=u.hbar))
    return modes


def superpose(modes: Sequence[EigenMode], t: float = 0.0) -> WaveFunctionGrid:
    """psi = sum c_n u_n exp(-i E_n t / hbar), normalized."""
    if not modes:
        raise ValueError("superpose needs at least one mode")
    grid = modes[0].grid
    if any(not m.grid.same_grid(grid) for m in modes):
        raise ValueError("modes live on different grids")
    psi = sum(m.c_n * m.u_n * np.exp(-1j * m.E_n * t / m.hbar) for m in modes)
    out = grid.with_psi(psi, t=t)
    norm = out.norm()
    if not norm > 0.0:
        raise ValueError("superposition vanishes identically")
    return out.with_psi(out.psi / math.sqrt(norm))


def gaussian_packet(x_min: float, x_max: float, n_points: int, x0: float, sigma0: float,
                    k0: float = 0.0) -> WaveFunctionGrid:
    """Normalized packet with position spread sigma0 and mean wave number k0."""
    x = np.linspace(x_min, x_max, n_points)
    psi = np.exp(-((x - x0) ** 2) / (4.0 * sigma0**2) + 1j * k0 * x)
    psi[0] = psi[-1] = 0.0
    grid = WaveFunctionGrid(x_min, x_max, psi)
    return grid.with_psi(grid.psi / math.sqrt(grid.norm()))


def free_packet_width2(t, sigma0: float, u: UnitSystem):
    """sigma(t)^2 = sigma0^2 + (hbar t / (2 m sigma0))^2."""
    return sigma0**2 + (u.hbar * np.asarray(t) / (2.0 * _mass(u) * sigma0)) ** 2


def position_variance(grid: WaveFunctionGrid) -> float:
    P = grid.density
    w = P / P.sum()
    mean = np.dot(w, grid.x)
    return float(np.dot(w, (grid.x - mean) ** 2))


def energy_expectation(grid: WaveFunctionGrid, V: PotentialField, u: UnitSystem) -> float:
    bands = _hamiltonian_bands(grid.x, grid.dx, V, u)
    inner = grid.psi[1:-1]
    return float(np.real(np.vdot(inner, _apply_hamiltonian(bands, inner))) * grid.dx / grid.norm())


def _check_resolution(grid: WaveFunctionGrid, points_per_wavelength: float = 8.0,
                      tail: float = 1e-8) -> None:
    # odd extension matches the wall condition, so box modes show no leakage
    psi = grid.psi
    extended = np.concatenate((psi, -psi[-2:0:-1]))
    power = np.abs(np.fft.fft(extended)) ** 2
    index = np.abs(np.fft.fftfreq(extended.size) * extended.size)
    if power[index > extended.size / points_per_wavelength].sum() > tail * power.sum():
        raise ConfigError(f"grid has fewer than {points_per_wavelength:g} points per shortest wavelength")


def _wall_probability(psi: np.ndarray, dx: float) -> float:
    return float((np.abs(psi[1:3]) ** 2).sum() + (np.abs(psi[-3:-1]) ** 2).sum()) * dx


def evolve_tdse(grid: WaveFunctionGrid, V: PotentialField, dt: float, steps: int, u: UnitSystem,
                *, escape_probability: float = ESCAPE_PROBABILITY, history_every: int = 0):
    """Crank-Nicolson evolution with psi = 0 at both walls.

    Returns the final grid, or ``(final, history)`` when ``history_every``
    is positive (history holds the start and every k-th step).
    """
    if not dt > 0.0 or steps < 0:
        raise ConfigError("need dt > 0 and steps >= 0")
    x = grid.x
    vmax = np.abs(V.evaluate(x, np.zeros_like(x))[0]).max()
    if dt * vmax / u.hbar > 0.1:
        raise ConfigError(f"dt * max|V| / hbar = {dt * vmax / u.hbar:.3g} exceeds 0.1")
    _check_resolution(grid)
    bands = _hamiltonian_bands(x, grid.dx, V, u)
    n = bands.shape[1]
    a = 0.5j * dt / u.hbar
    # (I + a H) psi_new = (I - a H) psi_old, symmetric pentadiagonal
    lhs = np.zeros((5, n), dtype=complex)
    lhs[0, 2:] = a * bands[0, 2:]
    lhs[1, 1:] = a * bands[1, 1:]
    lhs[2] = 1.0 + a * bands[2]
    lhs[3, :-1] = a * bands[1, 1:]
    lhs[4, :-2] = a * bands[0, 2:]
    psi = np.array(grid.psi[1:-1], dtype=complex)
    history = [grid] if history_every > 0 else None
    t = grid.t
    full = np.zeros(grid.n_points, dtype=complex)
    # escape means probability piling up at the walls beyond what the
    # initial state already had there (box modes touch the walls legitimately)
    baseline = _wall_probability(grid.psi, grid.dx)
    for k in range(1, steps + 1):
        rhs = psi - a * _apply_hamiltonian(bands, psi)
        psi = solve_banded((2, 2), lhs, rhs, check_finite=False)
        t = grid.t + k * dt
        full[1:-1] = psi
        if escape_probability is not None:
            leaked = _wall_probability(full, grid.dx) - baseline
            if leaked > escape_probability:
                raise DomainEscapeError(f"probability {leaked:.3g} at the walls at t={t:.6g}")
        if history is not None and k % history_every == 0:
            history.append(grid.with_psi(full.copy(), t=t))
    final = grid.with_psi(full.copy(), t=t) if steps else grid
    if history is not None:
        if history[-1].t != final.t:
            history.append(final)
        return final, history
    return final


def _node_mask(grid: WaveFunctionGrid, threshold: float = NODE_THRESHOLD) -> np.ndarray:
    A = np.abs(grid.psi)
    return A < threshold * A.max()


def guidance_field(grid: WaveFunctionGrid, u: UnitSystem, threshold: float = NODE_THRESHOLD) -> np.ndarray:
    """v = (hbar/m) Im(psi'/psi) on the grid, NaN at nodes and walls.

    The derivative is the centred difference of log psi, i.e. the phase of
    psi[j+1] * conj(psi[j-1]) over 2 dx, which is exact for plane waves.
    """
    psi = grid.psi
    v = np.full(grid.n_points, np.nan)
    phase = np.angle(psi[2:] * np.conj(psi[:-2]))
    v[1:-1] = u.hbar / _mass(u) * phase / (2.0 * grid.dx)
    bad = _node_mask(grid, threshold)
    bad[1:-1] |= bad[:-2] | bad[2:]
    v[bad] = np.nan
    return v


def guidance_velocity(grid: WaveFunctionGrid, x, u: UnitSystem, threshold: float = NODE_THRESHOLD):
    """Guidance velocity interpolated to position(s) ``x``."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs < grid.x_min) or np.any(xs > grid.x_max):
        raise NumericalError("query outside the comparator grid")
    v = guidance_field(grid, u, threshold)
    pos = (xs - grid.x_min) / grid.dx
    j = np.clip(np.floor(pos).astype(int), 0, grid.n_points - 2)
    f = pos - j
    out = (1.0 - f) * v[j] + f * v[j + 1]
    if np.any(~np.isfinite(out)):
        raise NodeError(f"guidance velocity undefined near x={xs[~np.isfinite(out)][0]:.6g} (node)")
    return float(out[0]) if np.ndim(x) == 0 else out


def quantum_potential(grid: WaveFunctionGrid, u: UnitSystem, threshold: float = NODE_THRESHOLD) -> np.ndarray:
    """Q_B = -(hbar^2 / 2m) R''/R with R = |psi|, NaN where masked.

    Uses (ln R)'' + (ln R)'^2 on five-point stencils, the kernel of the ray
    engine's Laplacian ratio. Points whose stencil touches a node are masked.
    """
    A = np.abs(grid.psi)
    bad = _node_mask(grid, threshold)
    with np.errstate(divide="ignore"):
        lnR = np.log(np.where(bad, 1.0, A))
    index, (w1, w2) = stencil_weights(grid.x, 5, (1, 2))
    d1 = (w1 * lnR[index]).sum(axis=1)
    d2 = (w2 * lnR[index]).sum(axis=1)
    Q = -(u.hbar**2) / (2.0 * _mass(u)) * (d2 + d1 * d1)
    Q[bad[index].any(axis=1)] = np.nan
    return Q


def _wall_derivatives(f: np.ndarray, dx: float, parity: float = -1.0):
    """Five-point first and second derivatives with mirror ghosts at the walls.

    ``parity=-1`` continues f oddly, as psi, R and the current all are.
    """
    g = np.concatenate((parity * f[2:0:-1], f, parity * f[-2:-4:-1]))
    d1 = (g[:-4] - 8.0 * g[1:-3] + 8.0 * g[3:-1] - g[4:]) / (12.0 * dx)
    d2 = sum(w * g[k:k + f.size] for k, w in enumerate(_LAPLACIAN_5)) / (dx * dx)
    return d1, d2


def madelung_residuals(history: Sequence[WaveFunctionGrid], V: PotentialField, u: UnitSystem,
                       *, min_density: float = 1e-4,
                       threshold: float = NODE_THRESHOLD) -> tuple[float, float]:
    """Max residuals of the continuity and Hamilton-Jacobi equations.

    Evaluated at interior snapshots with centred differences in t and
    five-point differences in x (the Hamiltonian's own stencil, so a
    discrete eigenmode satisfies the split to round-off), on points where
    P >= ``min_density`` * max P and away from nodes.
    The continuity residual is scaled by max(P) E / hbar, the
    Hamilton-Jacobi residual by E, with E the energy expectation.
    """
    if len(history) < 3:
        raise ValueError("need at least 3 snapshots")
    t = np.array([g.t for g in history])
    steps = np.diff(t)
    if np.any(steps <= 0.0) or np.ptp(steps) > 1e-9 * steps.mean():
        raise ValueError("snapshots must be uniformly spaced in time")
    dt = steps.mean()
    if any(not g.same_grid(history[0]) for g in history):
        raise ValueError("snapshots live on different grids")
    m, hbar = _mass(u), u.hbar
    x = history[0].x
    dx = history[0].dx
    potential, _ = V.evaluate(x, np.zeros_like(x))
    E = abs(energy_expectation(history[len(history) // 2], V, u))
    if not E > 0.0:
        raise NumericalError("zero energy scale for the residual normalization")
    cont_max = hj_max = 0.0
    for n in range(1, len(history) - 1):
        prev, cur, nxt = history[n - 1], history[n], history[n + 1]
        P = cur.density
        window = P >= min_density * P.max()
        for g in (prev, cur, nxt):
            node = _node_mask(g, threshold)
            window &= ~node
        window[:3] = window[-3:] = False
        if window.sum() < 0.5 * (P >= min_density * P.max()).sum() or not window.any():
            raise NodeError(f"node-dominated snapshot at t={cur.t:.6g}")
        d1, d2 = _wall_derivatives(cur.psi, dx)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            dS = hbar * np.imag(d1 / cur.psi)
            R = np.abs(cur.psi)
            Q = -(hbar**2) / (2.0 * m) * _wall_derivatives(R, dx)[1] / R
            J = hbar / m * np.imag(np.conj(cur.psi) * d1)
            div = _wall_derivatives(J, dx)[0]
            P_t = (nxt.density - prev.density) / (2.0 * dt)
            S_t = hbar * np.angle(nxt.psi * np.conj(prev.psi)) / (2.0 * dt)
            cont = np.abs(P_t + div)[window] / (P.max() * E / hbar)
            hj = np.abs(S_t + dS**2 / (2.0 * m) + potential + Q)[window] / E
        if not (np.all(np.isfinite(cont)) and np.all(np.isfinite(hj))):
            raise NodeError(f"undefined residuals inside the window at t={cur.t:.6g}")
        cont_max = max(cont_max, float(cont.max()))
        hj_max = max(hj_max, float(hj.max()))
    return cont_max, hj_max


def _velocity_at(grid_a: WaveFunctionGrid, grid_b: WaveFunctionGrid | None, frac: float, x, u):
    va = guidance_velocity(grid_a, x, u)
    if grid_b is None or frac == 0.0:
        return va
    return (1.0 - frac) * va + frac * guidance_velocity(grid_b, x, u)


def trace_bohm_trajectories(history: Sequence[WaveFunctionGrid], seeds, u: UnitSystem) -> np.ndarray:
    """Integrate dx/dt = v(x, t) along the stored history with the midpoint rule.

    Returns positions of shape (len(history), len(seeds)). Velocities at
    half steps are linear in time between neighbouring snapshots.
    """
    seeds = np.asarray(seeds, dtype=float)
    paths = np.empty((len(history), seeds.size))
    paths[0] = seeds
    x = seeds.copy()
    for n in range(len(history) - 1):
        a, b = history[n], history[n + 1]
        h = b.t - a.t
        k1 = guidance_velocity(a, x, u)
        mid = x + 0.5 * h * k1
        x = x + h * _velocity_at(a, b, 0.5, mid, u)
        paths[n + 1] = x
    return paths


def bohm_bundle(history: Sequence[WaveFunctionGrid], seeds, V: PotentialField, u: UnitSystem) -> TrajectoryBundle:
    """Bohm paths as a trajectory bundle tagged ``bohm``.

    Each path point carries px = m v, R = |psi|, Q = Q_B and
    H = m v^2 / 2 + V + Q_B interpolated at the particle; z and pz are 0.
    """
    paths = trace_bohm_trajectories(history, seeds, u)
    m = _mass(u)
    snapshots = []
    for grid, x in zip(history, paths):
        v = guidance_velocity(grid, x, u)
        R = np.sqrt(np.interp(x, grid.x, grid.density))
        Q = np.interp(x, grid.x, quantum_potential(grid, u))
        potential, _ = V.evaluate(x, np.zeros_like(x))
        snapshots.append(Wavefront(x=x, z=0.0, px=m * v, pz=0.0, R=R, t=grid.t,
                                   Q=Q, H=0.5 * m * v * v + potential + Q))
    return TrajectoryBundle(snapshots=snapshots, units=u, source="bohm")


def paths_preserve_order(paths: np.ndarray) -> bool:
    """True if seeds keep their launch order at every stored time."""
    order = np.argsort(paths[0], kind="stable")
    return bool(np.all(np.diff(paths[:, order], axis=1) > 0.0))


def momentum_rate(paths: np.ndarray, times: np.ndarray, u: UnitSystem) -> np.ndarray:
    """d|p|/dt along each Bohm path (energy-exchange diagnostic)."""
    v = np.gradient(paths, times, axis=0)
    return np.gradient(_mass(u) * np.abs(v), times, axis=0)
