from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import curve_fit

from helmray import ConfigError, DomainEscapeError, NodeError, PotentialField, Regime, Wavefront, make_unit_system
from helmray.bohm import (
    WaveFunctionGrid,
    bohm_bundle,
    eigenmodes,
    energy_expectation,
    evolve_tdse,
    free_packet_width2,
    gaussian_packet,
    guidance_field,
    guidance_velocity,
    hamiltonian_matrix,
    madelung_residuals,
    paths_preserve_order,
    position_variance,
    quantum_potential,
    superpose,
    trace_bohm_trajectories,
)
from helmray.wavefront import wave_potential

U = make_unit_system(2e-4)
FREE = PotentialField.free()
L = 10.0


@pytest.fixture(scope="module")
def box_modes():
    return eigenmodes(0.0, L, 256, FREE, U, 4)


def test_box_energies_and_orthonormality(box_modes):
    E1 = math.pi**2 / (2 * L**2)
    for n, mode in enumerate(box_modes, start=1):
        assert mode.E_n == pytest.approx(n * n * E1, rel=1e-6)
    dx = box_modes[0].grid.dx
    gram = np.array([[np.dot(a.u_n, b.u_n) * dx for b in box_modes] for a in box_modes])
    np.testing.assert_allclose(gram, np.eye(4), atol=1e-12)
    assert box_modes[0].u_n[1] > 0.0


def test_dense_hamiltonian_matches_banded(box_modes):
    grid = box_modes[0].grid
    small = WaveFunctionGrid(0.0, L, np.zeros(64))
    H = hamiltonian_matrix(small, FREE, U)
    np.testing.assert_allclose(H, H.T)
    assert np.linalg.eigvalsh(H)[0] == pytest.approx(eigenmodes(0.0, L, 64, FREE, U, 1)[0].E_n, rel=1e-12)
    assert grid.n_points == 256


def test_stationary_mode_rotates_in_phase(box_modes):
    g = superpose([box_modes[0]])
    final, hist = evolve_tdse(g, FREE, 0.05, 200, U, history_every=1)
    assert max(abs(h.norm() - 1.0) for h in hist) < 1e-12
    assert np.abs(final.density - g.density).max() < 1e-12
    phase = np.unwrap([np.angle(h.psi[128]) for h in hist])
    slope = -np.polyfit([h.t for h in hist], phase, 1)[0]
    assert slope == pytest.approx(box_modes[0].E_n, rel=1e-4)


def test_beat_frequency(box_modes):
    a, b = box_modes[:2]
    g = superpose([replace(a, c_n=1 / math.sqrt(2)), replace(b, c_n=1 / math.sqrt(2))])
    gap = b.E_n - a.E_n
    dt = 2 * math.pi / gap / 200
    _, hist = evolve_tdse(g, FREE, dt, 600, U, history_every=1)
    t = np.array([h.t for h in hist])
    signal = np.array([h.density[64] for h in hist])

    def model(t, amp, omega, phi, mean):
        return mean + amp * np.cos(omega * t + phi)

    p0 = (0.5 * np.ptp(signal), gap, 0.0, signal.mean())
    popt, _ = curve_fit(model, t, signal, p0=p0)
    assert abs(popt[1]) == pytest.approx(gap, rel=1e-2)
    assert energy_expectation(hist[-1], FREE, U) == pytest.approx(0.5 * (a.E_n + b.E_n), rel=1e-10)


def test_free_packet_spreads():
    g = gaussian_packet(-100.0, 100.0, 4096, 0.0, 1.0)
    E0 = energy_expectation(g, FREE, U)
    final = evolve_tdse(g, FREE, 0.01, 500, U)
    assert position_variance(final) == pytest.approx(free_packet_width2(final.t, 1.0, U), rel=1e-3)
    assert final.norm() == pytest.approx(1.0, abs=1e-10)
    assert energy_expectation(final, FREE, U) == pytest.approx(E0, rel=1e-8)


def test_madelung_residuals_small(box_modes):
    _, hist = evolve_tdse(superpose([box_modes[0]]), FREE, 0.01, 10, U, history_every=1)
    cont, hj = madelung_residuals(hist, FREE, U)
    assert cont <= 1e-6 and hj <= 1e-6
    packet = gaussian_packet(-50.0, 50.0, 2048, 0.0, 1.0, 1.0)
    _, hist = evolve_tdse(packet, FREE, 0.002, 4, U, history_every=1)
    cont, hj = madelung_residuals(hist, FREE, U)
    assert cont <= 1e-4 and hj <= 1e-4


def test_madelung_input_checks(box_modes):
    g = superpose([box_modes[0]])
    with pytest.raises(ValueError):
        madelung_residuals([g, g], FREE, U)
    uneven = [g, g.with_psi(g.psi, t=1.0), g.with_psi(g.psi, t=3.0)]
    with pytest.raises(ValueError):
        madelung_residuals(uneven, FREE, U)


def test_guidance_exact_for_plane_waves():
    k = 2 * math.pi
    x = np.linspace(0.0, L, 641)
    v = guidance_field(WaveFunctionGrid(0.0, L, np.exp(1j * k * x)), U)
    assert np.isnan(v[0]) and np.isnan(v[-1])
    np.testing.assert_allclose(v[1:-1], k, rtol=1e-12)


def test_guidance_fails_at_nodes():
    # odd point count puts the node of the second mode on a grid point
    g = superpose([eigenmodes(0.0, L, 257, FREE, U, 2)[1]])
    with pytest.raises(NodeError):
        guidance_velocity(g, L / 2, U)
    assert guidance_velocity(g, 2.0, U) == pytest.approx(0.0, abs=1e-12)


def test_real_modes_give_static_paths(box_modes):
    _, hist = evolve_tdse(superpose([box_modes[0]]), FREE, 0.05, 40, U, history_every=1)
    paths = trace_bohm_trajectories(hist, [2.0, 5.0, 7.0], U)
    assert np.abs(paths - paths[0]).max() < 1e-9


def test_packet_paths_keep_order_and_scale():
    # a free Gaussian packet expands self-similarly: x(t) = x0 sigma(t) / sigma0
    g = gaussian_packet(-40.0, 40.0, 2048, 0.0, 1.0)
    _, hist = evolve_tdse(g, FREE, 0.01, 200, U, history_every=5)
    seeds = [-1.0, -0.3, 0.4, 1.2]
    paths = trace_bohm_trajectories(hist, seeds, U)
    assert paths_preserve_order(paths)
    scale = math.sqrt(free_packet_width2(hist[-1].t, 1.0, U))
    np.testing.assert_allclose(paths[-1], np.array(seeds) * scale, rtol=1e-4)


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 4))
def test_quantum_potential_matches_ray_kernel(n):
    # a single box mode has R = |sin|, so both kernels see the same amplitude
    mode = eigenmodes(0.0, L, 512, FREE, U, n)[-1]
    g = superpose([mode])
    QB = quantum_potential(g, U)
    ok = np.isfinite(QB)
    front = Wavefront(x=g.x, z=0.0, px=0.0, pz=U.p0, R=np.abs(g.psi))
    Qw = wave_potential(front, U, Regime())
    assert ok.sum() > 400
    np.testing.assert_allclose(QB[ok], Qw[ok], rtol=0, atol=1e-9 * np.abs(QB[ok]).max())
    # away from nodes Q_B equals the mode energy for a free box
    interior = ok & (np.abs(g.psi) > 0.5 * np.abs(g.psi).max())
    np.testing.assert_allclose(QB[interior], mode.E_n, rtol=1e-3)


def test_evolution_rejects_bad_setups():
    coarse = WaveFunctionGrid(0.0, L, np.sin(np.pi * 30 * np.linspace(0, 1, 64)))
    with pytest.raises(ConfigError):
        evolve_tdse(coarse, FREE, 0.01, 1, U)
    g = gaussian_packet(-10.0, 10.0, 512, 0.0, 1.0)
    with pytest.raises(ConfigError):
        evolve_tdse(g, FREE, 0.0, 1, U)
    with pytest.raises(ConfigError):
        evolve_tdse(g, PotentialField.linear_ramp(offset=100.0), 0.01, 1, U)
    with pytest.raises(DomainEscapeError):
        evolve_tdse(gaussian_packet(-10.0, 10.0, 512, 4.0, 0.5, 3.0), FREE, 0.01, 300, U)
    with pytest.raises(ConfigError):
        WaveFunctionGrid(0.0, 1.0, np.zeros(10))
    with pytest.raises(ConfigError):
        eigenmodes(0.0, 1.0, 64, FREE, make_unit_system(1e-3, "optics"), 1)


def test_bohm_bundle_columns():
    g = gaussian_packet(-40.0, 40.0, 2048, 0.0, 1.0, 0.5)
    _, hist = evolve_tdse(g, FREE, 0.01, 20, U, history_every=5)
    b = bohm_bundle(hist, [-0.5, 0.5], FREE, U)
    assert b.source == "bohm"
    assert len(b) == len(hist) and b.n_rays == 2
    first = b.snapshots[0]
    np.testing.assert_allclose(first.px, 0.5, rtol=1e-6)
    np.testing.assert_allclose(first.H, 0.5 * first.px**2 + first.Q)
    assert not first.z.any() and not first.pz.any()
    np.testing.assert_allclose(first.R, np.exp(-0.25 * 0.25) / (2 * math.pi) ** 0.25, rtol=1e-3)
