from __future__ import annotations

import math
from itertools import islice

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helmray import (
    EnergyDriftError,
    EvanescentError,
    IndexField,
    PotentialField,
    Regime,
    TurningPointError,
    Wavefront,
    make_unit_system,
    prepare_front,
    propagate,
    rayleigh_length,
    step,
    suggest_dt,
)
from helmray.dynamics import energy_consistent_momenta, hamiltonian, hamiltonian_residual


def _front(u, n=21, half=2.0, px=0.0, pz=None):
    x = np.linspace(-half, half, n)
    return Wavefront(x=x, z=0.0, px=px, pz=u.p0 if pz is None else pz, R=np.exp(-x**2))


def _run(front, u, field, regime, dt, steps):
    current = prepare_front(front, u, field, regime)
    for current, _ in islice(propagate(current, u, field, regime, dt), steps):
        pass
    return current


def test_eikonal_rays_are_straight_and_uniform():
    u = make_unit_system(1e-2)
    f = _front(u, px=np.linspace(-1, 1, 21))
    out = _run(f, u, PotentialField.free(), Regime(eikonal=True), 0.01, 50)
    np.testing.assert_allclose(out.x, f.x + 0.5 * f.px, rtol=0, atol=1e-12)
    np.testing.assert_allclose(out.z, 0.5 * u.p0, rtol=1e-14)
    np.testing.assert_array_equal(out.px, f.px)


def test_optics_vacuum_eikonal_moves_at_c():
    u = make_unit_system(1e-2, "optics")
    f = _front(u, pz=u.k0)
    field = IndexField()
    out = _run(f, u, field, Regime("optics", eikonal=True), 0.25, 40)
    np.testing.assert_allclose(out.z, 10.0 * u.c, rtol=1e-14)
    np.testing.assert_array_equal(out.x, f.x)


@settings(max_examples=25, deadline=None)
@given(st.floats(-50.0, 50.0), st.integers(1, 30))
def test_constant_force_is_integrated_exactly(g, steps):
    u = make_unit_system(1e-2)
    f = _front(u)
    dt = 1e-3
    out = _run(f, u, PotentialField.linear_ramp(slope_x=g), Regime(eikonal=True), dt, steps)
    t = steps * dt
    np.testing.assert_allclose(out.px, -g * t, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(out.x, f.x - 0.5 * g * t * t, rtol=0, atol=1e-12)


def test_harmonic_lens_follows_cosine():
    # eikonal rays in V = k x^2 / 2 follow x0 cos(w t) until they meet at T/4
    u = make_unit_system(1e-2)
    omega = 2.0
    field = PotentialField.harmonic(kappa=omega**2)
    regime = Regime(eikonal=True)
    f = _front(u)
    n = 1000
    t_end = 0.125 * 2 * math.pi / omega
    current = prepare_front(f, u, field, regime)
    h0 = hamiltonian(current, u, field, regime)
    drift = 0.0
    for current, _ in islice(propagate(current, u, field, regime, t_end / n), n):
        drift = max(drift, float(np.abs(hamiltonian(current, u, field, regime) / h0 - 1.0).max()))
    np.testing.assert_allclose(current.x, f.x * math.cos(omega * t_end), atol=1e-6)
    np.testing.assert_allclose(current.px, -omega * f.x * math.sin(omega * t_end), atol=1e-6)
    assert drift < 1e-8


def test_eikonal_leapfrog_is_time_reversible():
    u = make_unit_system(1e-2)
    field = PotentialField.harmonic(kappa=0.3, kappa_z=1e-3)
    f = _front(u, px=0.1)
    regime = Regime(eikonal=True)
    out = _run(f, u, field, regime, 0.002, 200)
    # reversed motion flips the front orientation, so reverse the ray order too
    flip = slice(None, None, -1)
    back = Wavefront(x=out.x[flip], z=out.z[flip], px=-out.px[flip], pz=-out.pz[flip], R=out.R[flip], t=out.t)
    ret = _run(back, u, field, regime, 0.002, 200)
    np.testing.assert_allclose(ret.x[flip], f.x, atol=1e-10)
    np.testing.assert_allclose(ret.z[flip], f.z, atol=1e-9)
    np.testing.assert_allclose(-ret.px[flip], f.px, atol=1e-10)
    np.testing.assert_allclose(-ret.pz[flip], f.pz, rtol=1e-13)


def test_wave_force_keeps_speed():
    u = make_unit_system(2e-4)
    f = _front(u, n=101, half=4.0)
    dt = suggest_dt(prepare_front(f, u, PotentialField.free(), Regime()), u, PotentialField.free(),
                    Regime(), rayleigh_length(u))
    out = _run(f, u, PotentialField.free(), Regime(), dt, 200)
    np.testing.assert_allclose(out.p, u.p0, rtol=1e-10)
    assert np.abs(out.px).max() > 0.0


def test_suggest_dt_gaussian_default():
    u = make_unit_system(2e-4)
    x = np.linspace(-4, 4, 201)
    f = prepare_front(Wavefront(x=x, z=0.0, px=0.0, pz=u.p0, R=np.exp(-x**2)), u, PotentialField.free(), Regime())
    assert suggest_dt(f, u, PotentialField.free(), Regime(), rayleigh_length(u)) == pytest.approx(5e-4)


def test_energy_consistent_launch():
    u = make_unit_system(1e-2)
    field = PotentialField.linear_ramp(slope_x=0.1)
    f = energy_consistent_momenta(_front(u), u, field, Regime())
    np.testing.assert_allclose(hamiltonian_residual(f, u, field, Regime()), 0.0, atol=1e-15)


def test_energy_limit_triggers():
    u = make_unit_system(2e-4)
    f = prepare_front(_front(u), u, PotentialField.free(), Regime())
    with pytest.raises(EnergyDriftError):
        step(f, u, PotentialField.free(), 1e-4, Regime(), energy_limit=1e-15)


def test_relativistic_turning_point():
    u = make_unit_system(1e-2, "relativistic", 0.5)
    above = PotentialField.linear_ramp(offset=1.5 * u.E)
    f = prepare_front(_front(u), u, PotentialField.free(), Regime("relativistic"))
    with pytest.raises(TurningPointError):
        step(f, u, above, 1e-4, Regime("relativistic"))


def test_optics_evanescent_region():
    u = make_unit_system(1e-2, "optics")
    opaque = IndexField(PotentialField.linear_ramp(offset=2.0 * u.E), energy=u.E)
    f = prepare_front(_front(u, pz=u.k0), u, IndexField(), Regime("optics"))
    with pytest.raises(EvanescentError):
        step(f, u, opaque, 1e-3, Regime("optics"))


def test_relativistic_energy_conserved_across_smooth_step():
    u = make_unit_system(1e-3, "relativistic", 0.3)
    field = PotentialField.step(0.01 * u.E, position=50.0, smoothing=20.0)
    regime = Regime("relativistic")
    f = energy_consistent_momenta(_front(u, n=41, half=4.0), u, field, regime)
    current = prepare_front(f, u, field, regime)
    worst = 0.0
    for current, report in islice(propagate(current, u, field, regime, 2.5e-5), 2000):
        worst = max(worst, report.max_energy_residual)
    assert current.z.min() > 150.0
    assert worst < 1e-6
    # climbing the step costs momentum: (E - V)^2 = (pc)^2 + (mc^2)^2
    p_out = math.sqrt((0.99 * u.E) ** 2 - (u.mass * u.c**2) ** 2) / u.c
    np.testing.assert_allclose(current.p, p_out, rtol=1e-5)


def test_massless_hamiltonian_is_pc():
    u = make_unit_system(1e-3, "relativistic", rest_mass=0.0)
    f = _front(u)
    np.testing.assert_allclose(hamiltonian(f, u, PotentialField.free(), "relativistic", np.zeros(21)), u.E, rtol=1e-15)
