"""Density-matrix reference for the trajectory ensemble.

drho/dt = 2 X rho X^+ - X^+X rho - rho X^+X, integrated with fixed-step RK4,
plus the Liouvillian superoperator on column-major vec(rho).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, TraceDrift
from .spin import Basis, HalfInteger, SpinState, change_basis, rotation_to_x, twice
from .trajectory import CollapseSpec

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_FLOOR = -1e-10
TRACE_DRIFT_LIMIT = 1e-6
ZERO_EIGENVALUE_TOL = 1e-9
MAX_LIOUVILLIAN_DIM = 4096


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    twice_j: int
    basis: Basis
    entries: np.ndarray

    def __post_init__(self):
        rho = np.array(self.entries, dtype=complex)
        dim = self.twice_j + 1
        if rho.shape != (dim, dim):
            raise ValueError(f"density matrix shape {rho.shape} does not match 2j = {self.twice_j}")
        herm = np.abs(rho - rho.conj().T).max()
        if herm > HERMITIAN_TOL:
            raise ValueError(f"density matrix not Hermitian (defect {herm:.3g})")
        tr = np.trace(rho).real
        if abs(tr - 1) > TRACE_TOL:
            raise ValueError(f"density matrix trace {tr!r} != 1")
        lowest = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
        if lowest < POSITIVITY_FLOOR:
            raise ValueError(f"density matrix has eigenvalue {lowest:.3g} < 0")
        rho.flags.writeable = False
        object.__setattr__(self, "entries", rho)

    @classmethod
    def pure(cls, state: SpinState) -> "DensityMatrix":
        a = state.amplitudes / np.linalg.norm(state.amplitudes)
        return cls(state.twice_j, state.basis, np.outer(a, a.conj()))

    @classmethod
    def from_states(cls, states, basis: Basis = Basis.X) -> "DensityMatrix":
        """Equal-weight mixture of normalized pure states."""
        vecs = np.array([change_basis(s, basis).amplitudes for s in states])
        if vecs.size == 0:
            raise ValueError("empty ensemble")
        rho = vecs.T @ vecs.conj() / len(vecs)
        rho = 0.5 * (rho + rho.conj().T)
        return cls(int(vecs.shape[1] - 1), basis, rho / np.trace(rho).real)

    def in_basis(self, target: Basis) -> "DensityMatrix":
        if target is self.basis:
            return self
        rot = rotation_to_x(self.twice_j)
        if target is Basis.X:
            rho = rot @ self.entries @ rot.T
        else:
            rho = rot.T @ self.entries @ rot
        rho = 0.5 * (rho + rho.conj().T)
        return DensityMatrix(self.twice_j, target, rho / np.trace(rho).real)

    def purity(self) -> float:
        return float(np.trace(self.entries @ self.entries).real)


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """(1/2) ||a - b||_1, compared in a's basis."""
    diff = a.entries - b.in_basis(a.basis).entries
    return 0.5 * float(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))).sum())


def monte_carlo_trace_error(rho_hat: DensityMatrix, n_samples: int) -> float:
    """One-sigma scale of the trace distance between an n-sample pure-state average and its mean.

    E||rho_hat - rho||_F^2 = (1 - tr rho^2) / n for pure-state samples, and
    the trace norm is at most sqrt(dim) times the Frobenius norm.
    """
    dim = rho_hat.twice_j + 1
    return 0.5 * math.sqrt(dim * max(1.0 - rho_hat.purity(), 0.0) / n_samples)


def _collapse(spec: CollapseSpec, twice_j: int, basis: Basis) -> np.ndarray:
    return spec.collapse_operator(HalfInteger(twice_j), basis).entries


def lindblad_rhs(rho: DensityMatrix | np.ndarray, spec: CollapseSpec | None = None, basis: Basis | None = None) -> np.ndarray:
    """Time derivative of rho (a traceless Hermitian array)."""
    spec = spec or CollapseSpec()
    if isinstance(rho, DensityMatrix):
        basis, mat = rho.basis, rho.entries
    else:
        mat = np.asarray(rho, dtype=complex)
        basis = basis or Basis.Z
    x = _collapse(spec, mat.shape[0] - 1, basis)
    return _rhs(mat, x, x.conj().T @ x)


def _rhs(rho: np.ndarray, x: np.ndarray, xdx: np.ndarray) -> np.ndarray:
    return 2.0 * x @ rho @ x.conj().T - xdx @ rho - rho @ xdx


def integrate(
    rho0: DensityMatrix,
    spec: CollapseSpec | None = None,
    t: float = 1.0,
    dt: float = 1e-3,
) -> DensityMatrix:
    """Classical RK4 to time t; the last step is shortened to land on t."""
    spec = spec or CollapseSpec()
    if t < 0 or not math.isfinite(t):
        raise ConfigError("integration time must be finite and >= 0")
    if dt <= 0:
        raise ConfigError("dt must be positive")
    x = _collapse(spec, rho0.twice_j, rho0.basis)
    xdx = x.conj().T @ x
    rho = np.array(rho0.entries)
    n_steps = int(math.ceil(t / dt - 1e-9)) if t > 0 else 0
    h = t / n_steps if n_steps else 0.0
    for step in range(n_steps):
        k1 = _rhs(rho, x, xdx)
        k2 = _rhs(rho + 0.5 * h * k1, x, xdx)
        k3 = _rhs(rho + 0.5 * h * k2, x, xdx)
        k4 = _rhs(rho + h * k3, x, xdx)
        rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        drift = abs(np.trace(rho).real - 1.0)
        if drift > TRACE_DRIFT_LIMIT:
            raise TraceDrift(f"trace drifted by {drift:.3g} at t = {(step + 1) * h:.6g}")
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho0.twice_j, rho0.basis, rho / np.trace(rho).real)


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-major stacking."""
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    dim = int(round(math.sqrt(v.size)))
    return np.asarray(v).reshape((dim, dim), order="F")


def liouvillian(spec: CollapseSpec | None, j, basis: Basis = Basis.Z) -> np.ndarray:
    """Superoperator L with vec(drho/dt) = L vec(rho); vec(A rho B) = (B^T kron A) vec(rho)."""
    spec = spec or CollapseSpec()
    twice_j = twice(j)
    x = _collapse(spec, twice_j, basis)
    xdx = x.conj().T @ x
    eye = np.eye(twice_j + 1)
    return 2.0 * np.kron(x.conj(), x) - np.kron(eye, xdx) - np.kron(xdx.T, eye)


@dataclass(frozen=True)
class NullSpace:
    zero_eigenvalue_count: int
    eigenvalues: np.ndarray
    stationary_states: list[np.ndarray]


def liouvillian_nullspace(spec: CollapseSpec | None, j, tol: float = ZERO_EIGENVALUE_TOL) -> NullSpace:
    """Count |lambda| < tol and return a basis of vec-null matrices (Z basis)."""
    twice_j = twice(j)
    if (twice_j + 1) ** 2 > MAX_LIOUVILLIAN_DIM:
        raise ConfigError(f"Liouvillian dimension {(twice_j + 1) ** 2} exceeds {MAX_LIOUVILLIAN_DIM}")
    lv = liouvillian(spec, HalfInteger(twice_j))
    eigenvalues = np.linalg.eigvals(lv)
    count = int(np.sum(np.abs(eigenvalues) < tol))
    # right-singular vectors for the smallest singular values span the kernel
    _, _, vh = np.linalg.svd(lv)
    kernel = [unvec(vh[-(k + 1)].conj()) for k in range(count)]
    return NullSpace(count, eigenvalues, kernel)
