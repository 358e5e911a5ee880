from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helmray import ConfigError, EvanescentError, IndexField, OutOfDomainError, PotentialField, make_unit_system
from helmray.potentials import PotentialKind, refractive_index_from_potential

FIELDS = [
    PotentialField.linear_ramp(slope_x=0.3, slope_z=-1.2, offset=2.0),
    PotentialField.harmonic(kappa=2.0, kappa_z=0.5, x_c=0.3, z_c=-1.0),
    PotentialField.step(3.0, position=1.0, smoothing=0.5),
    PotentialField.step(3.0, position=-1.0, width=2.0, smoothing=0.4, axis=0),
]


@pytest.mark.parametrize("field", FIELDS, ids=lambda f: f.kind.value)
@settings(max_examples=30, deadline=None)
@given(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
def test_analytic_gradients_match_differences(field, x, z):
    h = 1e-5
    _, (gx, gz) = field.evaluate(x, z)
    fd_x = (field(x + h, z) - field(x - h, z)) / (2 * h)
    fd_z = (field(x, z + h) - field(x, z - h)) / (2 * h)
    assert gx == pytest.approx(fd_x, abs=1e-6)
    assert gz == pytest.approx(fd_z, abs=1e-6)


def test_free_is_zero():
    V, (gx, gz) = PotentialField.free().evaluate(np.arange(3.0), 1.0)
    assert not V.any() and not gx.any() and not gz.any()


def test_step_limits():
    f = PotentialField.step(2.0, position=0.0, smoothing=0.01)
    assert f(0.0, -1.0) == pytest.approx(0.0, abs=1e-12)
    assert f(0.0, 1.0) == pytest.approx(2.0)
    assert f(0.0, 0.0) == pytest.approx(1.0)
    barrier = PotentialField.step(2.0, position=0.0, width=1.0, smoothing=0.01)
    assert barrier(0.0, 0.5) == pytest.approx(2.0)
    assert barrier(0.0, 2.0) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ConfigError):
        PotentialField.step(1.0, smoothing=0.0)


def test_tabulated_bilinear_and_domain(tmp_path):
    xs = np.linspace(-2, 2, 41)
    zs = np.linspace(0, 4, 21)
    X, Z = np.meshgrid(xs, zs, indexing="ij")
    table = 0.5 * X + 2.0 * Z
    field = PotentialField.tabulated(xs, zs, table)
    V, (gx, gz) = field.evaluate(np.array([0.33, -1.1]), np.array([1.7, 3.2]))
    np.testing.assert_allclose(V, [0.5 * 0.33 + 3.4, -0.55 + 6.4])
    np.testing.assert_allclose(gx, 0.5)
    np.testing.assert_allclose(gz, 2.0)
    with pytest.raises(OutOfDomainError):
        field.evaluate(3.0, 1.0)

    path = tmp_path / "v.csv"
    rows = ["x,z,V"] + [f"{x!r},{z!r},{v!r}" for x, z, v in zip(*(a.ravel()[::-1].tolist() for a in (X, Z, table)))]
    path.write_text("\n".join(rows) + "\n")
    loaded = PotentialField.from_csv(path)
    assert loaded.kind is PotentialKind.CUSTOM_TABULATED
    np.testing.assert_array_equal(loaded.params["V"], table)


def test_tabulated_validation(tmp_path):
    with pytest.raises(ConfigError):
        PotentialField.tabulated([0, 1], [0, 1, 2], np.zeros((2, 2)))
    with pytest.raises(ConfigError):
        PotentialField.tabulated([1, 0], [0, 1], np.zeros((2, 2)))
    path = tmp_path / "bad.csv"
    path.write_text("x,z,W\n0,0,1\n")
    with pytest.raises(ConfigError):
        PotentialField.from_csv(path)
    path.write_text("x,z,V\n0,0,1\n1,0,1\n0,1,1\n")
    with pytest.raises(ConfigError):
        PotentialField.from_csv(path)


def test_refractive_index_mapping():
    u = make_unit_system(1e-3, "relativistic", rest_mass=0.0)
    V = PotentialField.linear_ramp(slope_z=0.1 * u.E)
    n = refractive_index_from_potential(V, u, 0.0, np.array([0.0, 5.0]))
    np.testing.assert_allclose(n, [1.0, 0.5])
    with pytest.raises(EvanescentError):
        refractive_index_from_potential(V, u, 0.0, 10.0)
    index = IndexField.from_potential(V, u)
    value, (gx, gz) = index.evaluate(0.0, 5.0)
    assert value == pytest.approx(0.5)
    assert gz == pytest.approx(-0.1)
    assert gx == 0.0


@given(st.floats(-2.0, 2.0))
def test_index_field_is_one_minus_v_over_e(x):
    u = make_unit_system(1e-3, "optics")
    V = PotentialField.harmonic(kappa=1e-3 * u.E)
    n, _ = IndexField.from_potential(V, u).evaluate(x, 0.0)
    assert float(n) == pytest.approx(1.0 - 0.5e-3 * x * x, rel=1e-14)
    assert math.isfinite(float(n))
