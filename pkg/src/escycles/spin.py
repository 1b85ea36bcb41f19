"""Collective spin algebra for N two-level atoms in the maximal j = N/2 shell.

Amplitude vectors are indexed by m ascending from -j to +j in both the J_z
(``Basis.Z``) and J_x (``Basis.X``) eigenbases. Half-integers are carried as
doubled ints (``twice_j == N``) so odd N stays exact.

The X basis is fixed by

    |j, n>_z = sum_m d^j_{m,n}(-pi/2) |j, m>_x ,

so X-basis amplitudes are ``d(-pi/2) @ z`` and J_x is diag(m) there.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np
from scipy.linalg import expm

from .errors import BasisMismatch

NORM_TOL = 1e-12

# Above this the exact big-integer factorial ratio gets slow; use lgamma.
_EXACT_COEFF_MAX_TWICE_J = 400


@dataclass(frozen=True, order=True)
class HalfInteger:
    """An integer or half-integer stored as ``twice`` its value."""

    twice: int

    @classmethod
    def of(cls, value) -> "HalfInteger":
        """Coerce ints, Fractions, floats, or strings such as ``"3/2"``."""
        if isinstance(value, HalfInteger):
            return value
        if isinstance(value, bool):
            raise TypeError("bool is not a half-integer")
        if isinstance(value, int):
            return cls(2 * value)
        if isinstance(value, str):
            value = Fraction(value.strip())
        if isinstance(value, Rational):
            doubled = Fraction(value) * 2
            if doubled.denominator != 1:
                raise ValueError(f"{value} is not a multiple of 1/2")
            return cls(int(doubled))
        twice = 2.0 * float(value)
        rounded = round(twice)
        if not math.isfinite(twice) or abs(twice - rounded) > 1e-9:
            raise ValueError(f"{value!r} is not a multiple of 1/2")
        return cls(int(rounded))

    @property
    def value(self) -> float:
        return self.twice / 2

    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def __float__(self) -> float:
        return self.twice / 2

    def __neg__(self) -> "HalfInteger":
        return HalfInteger(-self.twice)

    def __str__(self) -> str:
        if self.twice % 2 == 0:
            return str(self.twice // 2)
        return f"{self.twice}/2"


def twice(value) -> int:
    """Doubled integer representation of a half-integer-like value."""
    return HalfInteger.of(value).twice


class Basis(enum.Enum):
    Z = "Z"
    X = "X"


def _check_twice_j(twice_j: int) -> int:
    if not isinstance(twice_j, (int, np.integer)) or twice_j < 1:
        raise ValueError(f"need 2j >= 1, got 2j = {twice_j}")
    return int(twice_j)


def twice_m_values(twice_j: int) -> np.ndarray:
    """Doubled magnetic quantum numbers -2j, -2j+2, ..., 2j."""
    return np.arange(-twice_j, twice_j + 1, 2)


def m_values(twice_j: int) -> np.ndarray:
    return twice_m_values(twice_j) / 2.0


def index_of(twice_j: int, twice_m: int) -> int:
    """Position of ``m`` in the ascending amplitude layout."""
    if abs(twice_m) > twice_j or (twice_j - twice_m) % 2:
        raise ValueError(f"m = {twice_m}/2 is not in the spectrum of j = {twice_j}/2")
    return (twice_j + twice_m) // 2


@dataclass(frozen=True, eq=False)
class SpinState:
    """Amplitudes over |j, m> in one basis. Arrays are stored read-only."""

    twice_j: int
    basis: Basis
    amplitudes: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        _check_twice_j(self.twice_j)
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != self.twice_j + 1:
            raise ValueError(
                f"expected {self.twice_j + 1} amplitudes for 2j = {self.twice_j}, got {amps.shape[0]}"
            )
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        norm2 = float(np.vdot(amps, amps).real)
        if self.normalized and abs(norm2 - 1.0) > NORM_TOL:
            raise ValueError(f"state flagged normalized has squared norm {norm2!r}")
        if not self.normalized and norm2 > 1.0 + NORM_TOL:
            raise ValueError(f"unnormalized state has squared norm {norm2!r} > 1")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, twice_j: int, basis: Basis, vector) -> "SpinState":
        """Normalize an arbitrary nonzero vector into a state."""
        vec = np.asarray(vector, dtype=complex)
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(twice_j, basis, vec / norm)

    @property
    def j(self) -> HalfInteger:
        return HalfInteger(self.twice_j)

    @property
    def n_atoms(self) -> int:
        return self.twice_j

    @property
    def dim(self) -> int:
        return self.twice_j + 1

    @property
    def m_values(self) -> np.ndarray:
        return m_values(self.twice_j)

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probabilities(self) -> np.ndarray:
        a = self.amplitudes
        return a.real**2 + a.imag**2

    def amplitude(self, m) -> complex:
        return complex(self.amplitudes[index_of(self.twice_j, twice(m))])

    def normalize(self) -> "SpinState":
        return SpinState.from_vector(self.twice_j, self.basis, self.amplitudes)

    def in_basis(self, target: Basis) -> "SpinState":
        return change_basis(self, target)

    def __repr__(self) -> str:
        amps = np.array2string(self.amplitudes, precision=4, suppress_small=True)
        return f"SpinState(j={self.j}, basis={self.basis.value}, amplitudes={amps})"


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    twice_j: int
    basis: Basis
    entries: np.ndarray

    def __post_init__(self):
        _check_twice_j(self.twice_j)
        mat = np.array(self.entries, dtype=complex)
        if mat.shape != (self.twice_j + 1, self.twice_j + 1):
            raise ValueError(f"operator shape {mat.shape} does not match 2j = {self.twice_j}")
        mat.flags.writeable = False
        object.__setattr__(self, "entries", mat)

    @property
    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.twice_j, self.basis, self.entries.conj().T)

    def _check_compatible(self, other) -> None:
        if other.twice_j != self.twice_j:
            raise ValueError("operands belong to different spin shells")
        if other.basis is not self.basis:
            raise BasisMismatch(f"{self.basis.value}-basis operator applied to {other.basis.value}-basis object")

    def apply(self, state: SpinState) -> np.ndarray:
        """Raw (unnormalized) image vector of ``state``."""
        self._check_compatible(state)
        return self.entries @ state.amplitudes

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_compatible(other)
        return OperatorMatrix(self.twice_j, self.basis, self.entries @ other.entries)

    def to_basis(self, target: Basis) -> "OperatorMatrix":
        if target is self.basis:
            return self
        rot = rotation_to_x(self.twice_j)
        if target is Basis.X:
            mat = rot @ self.entries @ rot.T
        else:
            mat = rot.T @ self.entries @ rot
        return OperatorMatrix(self.twice_j, target, mat)


@functools.lru_cache(maxsize=None)
def _ladder_arrays(twice_j: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    j = twice_j / 2
    m = m_values(twice_j)[:-1]
    raising = np.diag(np.sqrt(j * (j + 1) - m * (m + 1)), k=-1)
    lowering = raising.T.copy()
    jx = (raising + lowering) / 2
    for arr in (raising, lowering, jx):
        arr.flags.writeable = False
    return raising, lowering, jx


def ladder_operators(j) -> tuple[OperatorMatrix, OperatorMatrix, OperatorMatrix]:
    """J+, J- and J_x for spin ``j`` in the Z basis."""
    twice_j = _check_twice_j(twice(j))
    raising, lowering, jx = _ladder_arrays(twice_j)
    return (
        OperatorMatrix(twice_j, Basis.Z, raising),
        OperatorMatrix(twice_j, Basis.Z, lowering),
        OperatorMatrix(twice_j, Basis.Z, jx),
    )


def collective_operators(twice_j: int, basis: Basis = Basis.Z) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(J+, J-, J_x) as plain arrays expressed in ``basis``."""
    raising, lowering, jx = _ladder_arrays(_check_twice_j(twice_j))
    if basis is Basis.Z:
        return raising, lowering, jx
    rot = rotation_to_x(twice_j)
    return rot @ raising @ rot.T, rot @ lowering @ rot.T, np.diag(m_values(twice_j))


def _log_factorial(n: int) -> float:
    return math.lgamma(n + 1)


def _coefficient(jpn: int, jmn: int, jpm: int, jmm: int, k: int, dm: int, numerator: int | None) -> float:
    # sqrt((j+n)!(j-n)!(j+m)!(j-m)!) / (k!(j+n-k)!(j-m-k)!(k+m-n)!)
    if numerator is not None:
        f = math.factorial
        denom = f(k) * f(jpn - k) * f(jmm - k) * f(k + dm)
        # int / int is correctly rounded, so only the sqrt adds error
        return math.sqrt(numerator / (denom * denom))
    log_c = 0.5 * (
        _log_factorial(jpn) + _log_factorial(jmn) + _log_factorial(jpm) + _log_factorial(jmm)
    ) - (_log_factorial(k) + _log_factorial(jpn - k) + _log_factorial(jmm - k) + _log_factorial(k + dm))
    return math.exp(log_c)


def _wigner_d_twice(twice_j: int, twice_m: int, twice_n: int, beta: float) -> float:
    jpm = (twice_j + twice_m) // 2
    jmm = (twice_j - twice_m) // 2
    jpn = (twice_j + twice_n) // 2
    jmn = (twice_j - twice_n) // 2
    dm = (twice_m - twice_n) // 2
    cos_half = math.cos(beta / 2)
    sin_half = math.sin(beta / 2)
    numerator = None
    if twice_j <= _EXACT_COEFF_MAX_TWICE_J:
        f = math.factorial
        numerator = f(jpn) * f(jmn) * f(jpm) * f(jmm)
    total = 0.0
    # only terms whose factorial arguments are all non-negative
    for k in range(max(0, -dm), min(jpn, jmm) + 1):
        term = _coefficient(jpn, jmn, jpm, jmm, k, dm, numerator)
        term *= cos_half ** (twice_j - 2 * k - dm) * sin_half ** (2 * k + dm)
        total += -term if (k + dm) % 2 else term
    return total


def wigner_d(j, m, n, beta: float) -> float:
    """Rotation matrix element d^j_{m,n}(beta) = <j,m| exp(-i beta J_y) |j,n>."""
    twice_j = _check_twice_j(twice(j))
    twice_m, twice_n = twice(m), twice(n)
    for label, tm in (("m", twice_m), ("n", twice_n)):
        if abs(tm) > twice_j:
            raise ValueError(f"|{label}| = {abs(tm)}/2 exceeds j = {twice_j}/2")
        if (twice_j - tm) % 2:
            raise ValueError(f"{label} = {tm}/2 differs from j = {twice_j}/2 by a non-integer")
    return _wigner_d_twice(twice_j, twice_m, twice_n, float(beta))


def wigner_d_matrix(j, beta: float) -> np.ndarray:
    """Full real (2j+1)x(2j+1) matrix, rows m and columns n ascending."""
    twice_j = _check_twice_j(twice(j))
    tms = twice_m_values(twice_j)
    out = np.empty((twice_j + 1, twice_j + 1))
    for row, tm in enumerate(tms):
        for col, tn in enumerate(tms):
            out[row, col] = _wigner_d_twice(twice_j, int(tm), int(tn), float(beta))
    return out


def rotation_oracle(j, beta: float) -> OperatorMatrix:
    """exp(-i beta J_y) by dense matrix exponential, J_y = (J+ - J-)/2i."""
    twice_j = _check_twice_j(twice(j))
    if not math.isfinite(beta):
        raise ValueError("rotation angle must be finite")
    raising, lowering, _ = _ladder_arrays(twice_j)
    jy = (raising - lowering) / 2j
    return OperatorMatrix(twice_j, Basis.Z, expm(-1j * beta * jy))


@functools.lru_cache(maxsize=None)
def rotation_to_x(twice_j: int) -> np.ndarray:
    """d(-pi/2): maps Z-basis amplitude vectors to X-basis ones."""
    mat = wigner_d_matrix(HalfInteger(twice_j), -math.pi / 2)
    mat.flags.writeable = False
    return mat


def change_basis(state: SpinState, target: Basis) -> SpinState:
    if state.basis is target:
        return state
    rot = rotation_to_x(state.twice_j)
    if target is Basis.X:
        amps = rot @ state.amplitudes
    else:
        amps = rot.T @ state.amplitudes
    if state.normalized:
        # absorb the rotation's roundoff so the normalized flag stays honest
        amps = amps / np.linalg.norm(amps)
    else:
        norm = np.linalg.norm(amps)
        if norm > 1.0:
            amps = amps / norm
    return SpinState(state.twice_j, target, amps, normalized=state.normalized)


def dicke_state(twice_j: int, m, basis: Basis = Basis.Z) -> SpinState:
    """|j, m> in the requested basis (a basis vector there)."""
    twice_j = _check_twice_j(twice_j)
    amps = np.zeros(twice_j + 1, dtype=complex)
    amps[index_of(twice_j, twice(m))] = 1.0
    return SpinState(twice_j, basis, amps)


def initial_state(n_atoms: int) -> SpinState:
    """All atoms in |0>: |N/2, -N/2>_z."""
    return dicke_state(n_atoms, HalfInteger(-n_atoms), Basis.Z)


def chi_state(n_atoms: int, m, sign: int) -> SpinState:
    """(|N/2, m>_x + sign |N/2, -m>_x) / sqrt(2) for m > 0."""
    twice_j = _check_twice_j(n_atoms)
    twice_m = twice(m)
    if twice_m <= 0:
        raise ValueError("chi states need m > 0; m = 0 is the Dicke state |N/2,0>_x")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    amps = np.zeros(twice_j + 1, dtype=complex)
    amps[index_of(twice_j, twice_m)] = 1 / math.sqrt(2)
    amps[index_of(twice_j, -twice_m)] = sign / math.sqrt(2)
    return SpinState(twice_j, Basis.X, amps)


def jx_squared_expectation(state: SpinState) -> float:
    if not state.normalized:
        raise ValueError("<J_x^2> needs a normalized state")
    x = change_basis(state, Basis.X)
    return float(np.dot(x.m_values**2, x.probabilities()))
