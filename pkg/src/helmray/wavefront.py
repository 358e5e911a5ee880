"""Front-level operators: amplitude Laplacian ratio, wave potential, transverse
gradient and flux-tube amplitude transport.

All derivatives are taken along the front with respect to the transverse
arclength ``s``. Longitudinal variation of R is not modelled: R is constant
along rays between fronts except for tube-width changes.
"""

from __future__ import annotations

import numpy as np

from .errors import CausticError, DegenerateFrontError
from .units import Regime, RegimeKind, UnitSystem, Wavefront

AMPLITUDE_FLOOR = 1e-8


def stencil_weights(s: np.ndarray, width: int, orders: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
    """Finite-difference weights on a non-uniform grid.

    Returns ``(index, weights)`` with ``index`` of shape (N, width) and
    ``weights`` of shape (len(orders), N, width), so that
    ``(weights[k] * f[index]).sum(-1)`` approximates the ``orders[k]``-th
    derivative at every node. Stencils are centered where possible and
    shifted inward at the edges.
    """
    s = np.asarray(s, dtype=float)
    n = s.shape[0]
    if n < width:
        raise DegenerateFrontError(f"need at least {width} points, got {n}")
    start = np.clip(np.arange(n) - width // 2, 0, n - width)
    index = start[:, None] + np.arange(width)[None, :]
    offsets = s[index] - s[:, None]
    # scale offsets to O(1) to keep the moment matrix well conditioned
    h = np.abs(offsets).max(axis=1) / (width // 2)
    if np.any(h <= 0.0):
        raise CausticError("zero spacing between adjacent rays")
    scaled = offsets / h[:, None]
    powers = np.arange(width)
    factorial = np.cumprod(np.concatenate(([1.0], np.arange(1.0, width))))
    moments = scaled[:, None, :] ** powers[None, :, None] / factorial[None, :, None]
    rhs = np.zeros((n, width, len(orders)))
    for k, order in enumerate(orders):
        rhs[:, order, k] = 1.0
    try:
        w = np.linalg.solve(moments, rhs)
    except np.linalg.LinAlgError as exc:
        raise CausticError("coincident rays in a stencil") from exc
    weights = np.stack([w[:, :, k] / h[:, None] ** order for k, order in enumerate(orders)])
    return index, weights


def _check_gaps(front: Wavefront) -> None:
    if np.any(front.gaps <= 0.0):
        raise CausticError("duplicate ray positions on the front")


def laplacian_ratio(front: Wavefront, floor: float = AMPLITUDE_FLOOR) -> np.ndarray:
    """Per-ray estimate of (d2R/ds2) / R along the front.

    Works on u = ln R as u'' + u'^2 with five-point stencils. Amplitudes are
    clamped at ``floor * max(R)``; floored rays take the value of the nearest
    ray above the floor.
    """
    if len(front) < 5:
        raise DegenerateFrontError(f"laplacian_ratio needs >= 5 rays, got {len(front)}")
    _check_gaps(front)
    rmax = front.R.max()
    if not rmax > 0.0:
        raise DegenerateFrontError("front carries no amplitude")
    cut = floor * rmax
    live = front.R > cut
    if live.sum() < 5:
        raise DegenerateFrontError("fewer than 5 rays above the amplitude floor")
    u = np.log(np.maximum(front.R, cut))
    index, (w1, w2) = stencil_weights(front.s, 5, (1, 2))
    uf = u[index]
    du = (w1 * uf).sum(axis=1)
    d2u = (w2 * uf).sum(axis=1)
    ratio = d2u + du * du
    if not live.all():
        ratio = _fill_from_nearest(ratio, live)
    return ratio


def _fill_from_nearest(values: np.ndarray, live: np.ndarray) -> np.ndarray:
    idx = np.flatnonzero(live)
    pos = np.arange(values.shape[0])
    right = np.searchsorted(idx, pos).clip(0, idx.size - 1)
    left = (right - 1).clip(0, idx.size - 1)
    pick = np.where(np.abs(idx[left] - pos) <= np.abs(idx[right] - pos), idx[left], idx[right])
    out = values.copy()
    out[~live] = values[pick[~live]]
    return out


def wave_potential_prefactor(u: UnitSystem, kind: RegimeKind) -> float:
    """Constant C such that the regime's wave potential is C * (lap R / R)."""
    if kind is RegimeKind.NONRELATIVISTIC:
        return -(u.hbar**2) / (2.0 * u.mass)
    if kind is RegimeKind.RELATIVISTIC:
        return -(u.hbar**2) * u.c**2 / (2.0 * u.E)
    return -u.c / (2.0 * u.k0)


def wave_potential(front: Wavefront, u: UnitSystem, regime: Regime | RegimeKind | str) -> np.ndarray:
    """W (optics) or Q (particle regimes) at every ray, in energy units.

    In optics W has units of frequency, consistent with the kinematic
    Hamiltonian whose momentum is the wave vector.
    """
    if not isinstance(regime, Regime):
        regime = Regime(kind=regime)
    if regime.coupling == 0.0:
        return np.zeros(len(front))
    return regime.coupling * wave_potential_prefactor(u, regime.kind) * laplacian_ratio(front)


def transverse_gradient(front: Wavefront, f: np.ndarray) -> np.ndarray:
    """df/ds with three-point non-uniform stencils (one-sided at the edges)."""
    f = np.asarray(f, dtype=float)
    if len(front) < 3:
        raise DegenerateFrontError("transverse_gradient needs >= 3 rays")
    if f.shape != (len(front),):
        raise ValueError("scalar field is not aligned with the front")
    _check_gaps(front)
    index, (w1,) = stencil_weights(front.s, 3, (1,))
    return (w1 * f[index]).sum(axis=1)


def front_tangent(front: Wavefront) -> tuple[np.ndarray, np.ndarray]:
    """Unit tangent along increasing ray index."""
    x, z = front.x, front.z
    tx = np.empty_like(x)
    tz = np.empty_like(z)
    tx[1:-1] = x[2:] - x[:-2]
    tz[1:-1] = z[2:] - z[:-2]
    tx[0], tz[0] = x[1] - x[0], z[1] - z[0]
    tx[-1], tz[-1] = x[-1] - x[-2], z[-1] - z[-2]
    norm = np.hypot(tx, tz)
    return tx / norm, tz / norm


def coupling_direction(front: Wavefront) -> tuple[np.ndarray, np.ndarray]:
    """In-plane unit vector perpendicular to each ray's momentum, oriented
    along increasing ``s``. Its dot product with p is zero by construction."""
    p = front.p
    nx = front.pz / p
    nz = -front.px / p
    tx, tz = front_tangent(front)
    sign = np.where(nx * tx + nz * tz < 0.0, -1.0, 1.0)
    return sign * nx, sign * nz


def coupling_force(front: Wavefront, potential: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """-(d potential / ds) applied along ``coupling_direction``."""
    g = transverse_gradient(front, potential)
    nx, nz = coupling_direction(front)
    return -g * nx, -g * nz


def damping_coefficient(u: UnitSystem, regime: Regime) -> float:
    """Front viscosity in physical units: nu * hbar/m (c/k0 in optics)."""
    scale = 2.0 * abs(wave_potential_prefactor(u, regime.kind))
    if regime.kind is not RegimeKind.OPTICS:
        scale /= u.hbar
    return regime.coupling * regime.front_viscosity * scale


def front_damping(front: Wavefront, coefficient: float) -> tuple[np.ndarray, np.ndarray]:
    """Viscous force ``coefficient * d2p/ds2`` projected on ``coupling_direction``.

    The term annihilates momentum fields that vary linearly across the
    front (the self-similar Gaussian expansion is one), so it only acts on
    ray-to-ray oscillations. Without it the tail rays of a truncated front,
    where d(ln R)/ds is large, amplify rounding noise until neighbours cross.
    """
    if coefficient == 0.0:
        zero = np.zeros(len(front))
        return zero, zero.copy()
    _check_gaps(front)
    index, (w2,) = stencil_weights(front.s, 3, (2,))
    ax = (w2 * front.px[index]).sum(axis=1)
    az = (w2 * front.pz[index]).sum(axis=1)
    nx, nz = coupling_direction(front)
    a = coefficient * (ax * nx + az * nz)
    return a * nx, a * nz


def signed_gaps(front: Wavefront) -> np.ndarray:
    """Gap between neighbours measured across the mean ray direction.

    Positive while the launch ordering is preserved; a non-positive value
    means two rays met or crossed.
    """
    ux = front.px / front.p
    uz = front.pz / front.p
    mx, mz = ux[:-1] + ux[1:], uz[:-1] + uz[1:]
    norm = np.hypot(mx, mz)
    # rotate the mean direction by -90 degrees: +z travel maps to +x
    return (np.diff(front.x) * mz - np.diff(front.z) * mx) / norm


def check_ordering(front: Wavefront) -> None:
    g = signed_gaps(front)
    if np.any(g <= 0.0):
        i = int(np.argmin(g))
        raise CausticError(f"rays {i} and {i + 1} crossed at t={front.t:.6g}")


def flux(front: Wavefront) -> np.ndarray:
    """Per-tube flux R^2 |p| ds."""
    return front.R**2 * front.p * front.tube_widths


def transport_amplitude(front_prev: Wavefront, front_next: Wavefront) -> np.ndarray:
    """Amplitudes on ``front_next`` conserving R^2 |p| ds per ray tube."""
    if len(front_prev) != len(front_next):
        raise ValueError("fronts must carry the same rays")
    check_ordering(front_next)
    width_prev = front_prev.tube_widths
    width_next = front_next.tube_widths
    if np.any(width_next <= 0.0) or np.any(width_prev <= 0.0):
        raise CausticError("zero-width ray tube")
    gain = (front_prev.p * width_prev) / (front_next.p * width_next)
    return front_prev.R * np.sqrt(gain)
