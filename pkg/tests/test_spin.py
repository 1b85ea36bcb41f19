import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from escycles.errors import BasisMismatch
from escycles.spin import (
    Basis,
    HalfInteger,
    OperatorMatrix,
    SpinState,
    change_basis,
    chi_state,
    collective_operators,
    dicke_state,
    index_of,
    initial_state,
    jx_squared_expectation,
    ladder_operators,
    rotation_oracle,
    rotation_to_x,
    twice,
    wigner_d,
    wigner_d_matrix,
)


def exact_d_squared_half_pi(twice_j, twice_m, twice_n):
    """d^j_{m,n}(-pi/2)^2 as an exact rational.

    At beta = -pi/2 every term of the Wigner sum carries cos^a sin^b with
    a + b = 2j, so d = 2^-j * sqrt(prefactor) * (signed integer sum).
    """
    jpm, jmm = (twice_j + twice_m) // 2, (twice_j - twice_m) // 2
    jpn, jmn = (twice_j + twice_n) // 2, (twice_j - twice_n) // 2
    dm = (twice_m - twice_n) // 2
    fact = math.factorial
    total = 0
    for k in range(max(0, -dm), min(jpn, jmm) + 1):
        # sin(-pi/4) = -1/sqrt2 contributes (-1)^(m-n+2k) overall with the Wigner sign
        sign = (-1) ** (k + dm) * (-1) ** (dm + 2 * k)
        total += Fraction(sign, fact(jpn - k) * fact(k) * fact(k + dm) * fact(jmm - k))
    pref = fact(jpm) * fact(jmm) * fact(jpn) * fact(jmn)
    return Fraction(pref) * total * total / Fraction(2) ** twice_j


def test_half_integer_parsing():
    assert HalfInteger.of("3/2").twice == 3
    assert HalfInteger.of(1.5).twice == 3
    assert HalfInteger.of(Fraction(-1, 2)).twice == -1
    assert HalfInteger.of(2).twice == 4
    assert str(HalfInteger(3)) == "3/2"
    assert str(HalfInteger(-4)) == "-2"
    with pytest.raises(ValueError):
        HalfInteger.of(0.3)


def test_spin_half_jx():
    _, _, jx = ladder_operators(HalfInteger(1))
    assert np.allclose(jx.entries, [[0, 0.5], [0.5, 0]])


def test_spin_one_raising_element():
    jp, _, _ = ladder_operators(1)
    # <1,1|J+|1,0>: row m=1 (index 2), column m=0 (index 1)
    assert jp.entries[2, 1] == pytest.approx(math.sqrt(2), abs=1e-15)


def test_two_atom_sum_matches_ladder():
    sx = np.array([[0, 0.5], [0.5, 0]])
    eye = np.eye(2)
    total = np.kron(sx, eye) + np.kron(eye, sx)
    # symmetric subspace basis |00>, (|01>+|10>)/sqrt2, |11> with |0> = spin down
    iso = np.zeros((4, 3))
    iso[0, 0] = 1
    iso[1, 1] = iso[2, 1] = 1 / math.sqrt(2)
    iso[3, 2] = 1
    _, _, jx = collective_operators(2)
    assert np.allclose(iso.T @ total @ iso, jx)


@pytest.mark.parametrize("twice_j", [1, 2, 3, 7, 12])
def test_jx_spectrum(twice_j):
    _, _, jx = collective_operators(twice_j)
    ev = np.linalg.eigvalsh(jx)
    assert np.allclose(ev, np.arange(-twice_j, twice_j + 1, 2) / 2, atol=1e-12)


def test_wigner_spin_half_value():
    assert wigner_d("1/2", "1/2", "1/2", -math.pi / 2) == pytest.approx(math.cos(math.pi / 4), abs=1e-15)


def test_wigner_spin_one_coefficient():
    assert wigner_d(1, 0, -1, -math.pi / 2) == pytest.approx(1 / math.sqrt(2), abs=1e-15)


@pytest.mark.parametrize("twice_j", [1, 2, 5, 10])
def test_wigner_zero_angle_is_identity(twice_j):
    assert np.array_equal(wigner_d_matrix(HalfInteger(twice_j), 0.0), np.eye(twice_j + 1))


def test_oracle_spin_half_pi():
    rot = rotation_oracle("1/2", math.pi).entries
    assert np.allclose(np.abs(rot), [[0, 1], [1, 0]], atol=1e-15)
    assert np.allclose(rot, wigner_d_matrix("1/2", math.pi), atol=1e-15)


def test_oracle_zero_angle():
    assert np.allclose(rotation_oracle(3, 0.0).entries, np.eye(7))


def test_wigner_matches_oracle_j5():
    diff = np.abs(rotation_oracle(5, -math.pi / 2).entries - wigner_d_matrix(5, -math.pi / 2))
    assert diff.max() <= 1e-10


@pytest.mark.parametrize("twice_j", [1, 4, 9, 16, 20])
def test_wigner_against_exact_rationals(twice_j):
    d = rotation_to_x(twice_j)
    for a, tm in enumerate(range(-twice_j, twice_j + 1, 2)):
        for b, tn in enumerate(range(-twice_j, twice_j + 1, 2)):
            exact = float(exact_d_squared_half_pi(twice_j, tm, tn))
            assert d[a, b] ** 2 == pytest.approx(exact, rel=1e-12, abs=1e-15)


def test_wigner_validates_indices():
    with pytest.raises(ValueError):
        wigner_d(1, 2, 0, 0.1)
    with pytest.raises(ValueError):
        wigner_d(1, "1/2", 0, 0.1)


def test_x_basis_diagonalizes_jx():
    for twice_j in (2, 3, 6):
        _, _, jx = collective_operators(twice_j, Basis.X)
        manual = rotation_to_x(twice_j) @ collective_operators(twice_j)[2] @ rotation_to_x(twice_j).T
        assert np.allclose(manual, jx, atol=1e-13)


def test_all_down_in_x_basis_n2():
    x = change_basis(initial_state(2), Basis.X)
    assert np.allclose(x.amplitudes, [0.5, 1 / math.sqrt(2), 0.5], atol=1e-15)


def test_all_down_in_x_basis_n4_weights():
    probs = change_basis(initial_state(4), Basis.X).probabilities()
    assert np.allclose(probs, [1 / 16, 1 / 4, 3 / 8, 1 / 4, 1 / 16], atol=1e-15)


def test_change_basis_same_basis_is_identity():
    s = dicke_state(3, "1/2", Basis.X)
    assert change_basis(s, Basis.X) is s


@settings(max_examples=40, deadline=None)
@given(
    twice_j=st.integers(min_value=1, max_value=24),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_round_trip_and_norm(twice_j, seed):
    rng = np.random.default_rng(seed)
    vec = rng.normal(size=twice_j + 1) + 1j * rng.normal(size=twice_j + 1)
    s = SpinState.from_vector(twice_j, Basis.Z, vec)
    x = change_basis(s, Basis.X)
    back = change_basis(x, Basis.Z)
    assert abs(np.linalg.norm(x.amplitudes) - 1) <= 1e-12
    assert np.abs(back.amplitudes - s.amplitudes).max() <= 1e-12


def test_chi_definitions():
    assert np.allclose(chi_state(2, 1, 1).amplitudes, [1 / math.sqrt(2), 0, 1 / math.sqrt(2)])
    ghz = chi_state(3, "3/2", -1)
    assert np.allclose(ghz.amplitudes, [-1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)])
    z = change_basis(chi_state(2, 1, 1), Basis.Z)
    assert abs(abs(z.amplitudes[0]) - 1 / math.sqrt(2)) < 1e-14
    assert abs(z.amplitudes[1]) < 1e-14
    assert np.isclose(z.amplitudes[0], z.amplitudes[2])


def test_chi_rejects_m_zero_or_bad_sign():
    with pytest.raises(ValueError):
        chi_state(2, 0, 1)
    with pytest.raises(ValueError):
        chi_state(2, 1, 0)


def test_jx_squared_expectations():
    assert jx_squared_expectation(dicke_state(4, 0, Basis.X)) == pytest.approx(0.0, abs=1e-15)
    for n, m in [(3, "3/2"), (4, 1), (5, "5/2"), (6, 2)]:
        for sign in (1, -1):
            assert jx_squared_expectation(chi_state(n, m, sign)) == pytest.approx(twice(m) ** 2 / 4)
    assert jx_squared_expectation(initial_state(2)) == pytest.approx(0.5, abs=1e-14)


def test_jx_squared_rejects_unnormalized():
    s = SpinState(2, Basis.X, np.array([0.1, 0, 0.1]), normalized=False)
    with pytest.raises(ValueError):
        jx_squared_expectation(s)


def test_state_validation():
    with pytest.raises(ValueError):
        SpinState(2, Basis.Z, np.array([1.0, 1.0, 0.0]))
    with pytest.raises(ValueError):
        SpinState(2, Basis.Z, np.array([1.0, 0.0]))
    s = dicke_state(2, 1)
    with pytest.raises(ValueError):
        s.amplitudes[0] = 1.0


def test_operator_basis_mismatch():
    _, _, jx = ladder_operators(1)
    with pytest.raises(BasisMismatch):
        jx.apply(dicke_state(2, 0, Basis.X))
    op = OperatorMatrix(2, Basis.Z, jx.entries)
    assert np.allclose(op.to_basis(Basis.X).entries, np.diag([-1.0, 0.0, 1.0]), atol=1e-14)


def test_index_of():
    assert index_of(3, -3) == 0
    assert index_of(3, 3) == 3
    with pytest.raises(ValueError):
        index_of(3, 0)
