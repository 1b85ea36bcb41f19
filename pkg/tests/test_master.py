import numpy as np
import pytest

from escycles.errors import ConfigError
from escycles.master import (
    DensityMatrix,
    integrate,
    lindblad_rhs,
    liouvillian,
    liouvillian_nullspace,
    monte_carlo_trace_error,
    trace_distance,
    unvec,
    vec,
)
from escycles.spin import Basis, HalfInteger, change_basis, chi_state, initial_state
from escycles.trajectory import CollapseSpec


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix(1, Basis.Z, np.array([[1.0, 0.3], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        DensityMatrix(1, Basis.Z, np.diag([0.7, 0.7]))
    with pytest.raises(ValueError):
        DensityMatrix(1, Basis.Z, np.diag([1.2, -0.2]))


def test_rhs_vanishes_on_x_diagonal_states():
    rho = DensityMatrix(4, Basis.X, np.diag([0.1, 0.2, 0.3, 0.25, 0.15]))
    assert np.abs(lindblad_rhs(rho)).max() < 1e-15
    mixed = DensityMatrix(3, Basis.Z, np.eye(4) / 4)
    assert np.abs(lindblad_rhs(mixed)).max() < 1e-14


def test_rhs_is_traceless_and_hermitian():
    rho = DensityMatrix.pure(initial_state(3))
    d = lindblad_rhs(rho)
    assert abs(np.trace(d)) < 1e-14
    assert np.allclose(d, d.conj().T)


def test_integrate_zero_time():
    rho0 = DensityMatrix.pure(initial_state(2))
    out = integrate(rho0, t=0.0)
    assert np.allclose(out.entries, rho0.entries)


def test_integrate_long_time_two_atoms():
    out = integrate(DensityMatrix.pure(initial_state(2)), t=30.0, dt=1e-2).in_basis(Basis.X)
    assert np.allclose(out.entries, np.diag([0.25, 0.5, 0.25]), atol=1e-9)


def test_integrate_against_closed_form_coherence():
    # X-basis coherences decay as exp(-(m - n)^2 t)
    rho0 = DensityMatrix.pure(change_basis(initial_state(3), Basis.X))
    t = 0.7
    out = integrate(rho0, t=t, dt=1e-3)
    m = np.arange(-3, 4, 2) / 2
    expected = rho0.entries * np.exp(-((m[:, None] - m[None, :]) ** 2) * t)
    assert np.abs(out.entries - expected).max() < 1e-12


def test_integrate_rejects_bad_time():
    rho0 = DensityMatrix.pure(initial_state(2))
    with pytest.raises(ConfigError):
        integrate(rho0, t=-1.0)
    with pytest.raises(ConfigError):
        integrate(rho0, t=1.0, dt=0.0)


def test_trace_distance_basics():
    a = DensityMatrix.pure(chi_state(3, "3/2", 1))
    b = DensityMatrix.pure(chi_state(3, "3/2", -1))
    assert trace_distance(a, b) == pytest.approx(1.0, abs=1e-14)
    assert trace_distance(a, a.in_basis(Basis.Z)) < 1e-13


def test_monte_carlo_error_scale():
    pure = DensityMatrix.pure(initial_state(2))
    assert monte_carlo_trace_error(pure, 100) == 0.0
    mixed = DensityMatrix(2, Basis.X, np.eye(3) / 3)
    assert monte_carlo_trace_error(mixed, 10_000) == pytest.approx(0.5 * np.sqrt(3 * (2 / 3) / 1e4))


def test_vec_convention():
    rng = np.random.default_rng(0)
    a, rho, b = (rng.normal(size=(3, 3)) for _ in range(3))
    assert np.allclose(vec(a @ rho @ b), np.kron(b.T, a) @ vec(rho))
    assert np.array_equal(unvec(vec(rho)), rho)


@pytest.mark.parametrize("spec", [CollapseSpec(), CollapseSpec(1.0, 0.5, scaled=False)])
def test_liouvillian_matches_rhs(spec):
    rho = DensityMatrix.pure(initial_state(3))
    lv = liouvillian(spec, "3/2")
    assert np.allclose(unvec(lv @ vec(rho.entries)), lindblad_rhs(rho, spec))


def test_nullspace_two_atoms():
    assert liouvillian_nullspace(CollapseSpec(), 1).zero_eigenvalue_count >= 2
    assert liouvillian_nullspace(CollapseSpec(1.0, 0.5, scaled=False), 1).zero_eigenvalue_count == 1


@pytest.mark.parametrize("n", range(2, 7))
def test_nullspace_counts(n):
    j = HalfInteger(n)
    scaled = liouvillian_nullspace(CollapseSpec(), j)
    assert scaled.zero_eigenvalue_count == n + 1
    for kernel in scaled.stationary_states:
        assert np.abs(liouvillian(CollapseSpec(), j) @ vec(kernel)).max() < 1e-9
    assert liouvillian_nullspace(CollapseSpec(1.0, 0.5, scaled=False), j).zero_eigenvalue_count == 1


def test_nullspace_size_guard():
    with pytest.raises(ConfigError):
        liouvillian_nullspace(CollapseSpec(), 40)
