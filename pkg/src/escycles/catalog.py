"""Named reference states for N = 2, 3, 4, written as product-basis kets.

Every entry keeps its printed form (a superposition of bit strings, ``"011"``
meaning atom 1 in |0> and atoms 2, 3 in |1>) and its definition in terms of
X-basis Dicke and chi states. Bit strings are projected onto the symmetric
j = N/2 shell: Dicke amplitude = sum of the string coefficients / sqrt(C(N, k)).
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np

from .spin import Basis, HalfInteger, SpinState, change_basis, chi_state, dicke_state


class Family(enum.Enum):
    GHZ = "GHZ"
    W = "W"
    G = "G"
    DICKE = "Dicke"
    CHI_PLUS = "ChiPlus"
    CHI_MINUS = "ChiMinus"
    PRODUCT = "Product"
    SUPERPOSITION = "Superposition"


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    name: str
    n_atoms: int
    basis: Basis
    state: SpinState
    family: Family
    definition: SpinState
    note: str = ""

    def to_dict(self) -> dict:
        amps = self.state.amplitudes
        return {
            "name": self.name,
            "N": self.n_atoms,
            "family": self.family.value,
            "basis": self.basis.value,
            "amplitudes": [[float(a.real), float(a.imag)] for a in amps],
        }


def symmetric_state(n_atoms: int, basis: Basis, terms: dict[str, float]) -> SpinState:
    """Project a printed superposition of product kets onto the Dicke basis.

    Coefficients must be equal within each excitation number; otherwise the
    expression leaves the symmetric shell.
    """
    by_k: dict[int, list[float]] = {}
    for bits, coeff in terms.items():
        if len(bits) != n_atoms or set(bits) - {"0", "1"}:
            raise ValueError(f"bad product ket {bits!r} for N = {n_atoms}")
        by_k.setdefault(bits.count("1"), []).append(coeff)
    amps = np.zeros(n_atoms + 1, dtype=complex)
    for k, coeffs in by_k.items():
        size = math.comb(n_atoms, k)
        if len(coeffs) != size or np.ptp(coeffs) > 1e-15:
            raise ValueError(f"excitation-{k} kets are not symmetric")
        amps[k] = sum(coeffs) / math.sqrt(size)
    return SpinState(n_atoms, basis, amps)


def _kets(weight: float, *bit_strings: str) -> dict[str, float]:
    return {b: weight for b in bit_strings}


def _chi(n, m, sign):
    return chi_state(n, HalfInteger.of(m), sign)


def _x_combination(n_atoms: int, parts) -> SpinState:
    amps = sum(c * s.amplitudes for c, s in parts)
    return SpinState.from_vector(n_atoms, Basis.X, amps)


R2 = 1 / math.sqrt(2)
R8 = 1 / math.sqrt(8)
W3 = 1 / (2 * math.sqrt(3))
S3 = math.sqrt(3) / 2
R6 = 1 / math.sqrt(6)

_FOUR_ONE = ("0001", "0010", "0100", "1000")
_FOUR_THREE = ("1110", "1101", "1011", "0111")
_FOUR_TWO = ("1100", "1010", "1001", "0101", "0011", "0110")


def _entries_2() -> list[CatalogEntry]:
    z, x = Basis.Z, Basis.X
    d0 = dicke_state(2, 0, x)
    return [
        CatalogEntry("|1,0>_x", 2, z, symmetric_state(2, z, {"00": R2, "11": -R2}), Family.DICKE, d0),
        CatalogEntry("chi-_2(1)", 2, z, symmetric_state(2, z, _kets(R2, "01", "10")), Family.CHI_MINUS, _chi(2, 1, -1)),
        CatalogEntry("chi+_2(1)", 2, z, symmetric_state(2, z, _kets(R2, "00", "11")), Family.CHI_PLUS, _chi(2, 1, 1)),
        CatalogEntry(
            "chi-_2(1)", 2, x, _x_combination(2, [(R2, dicke_state(2, 1, x)), (-R2, dicke_state(2, -1, x))]),
            Family.CHI_MINUS, _chi(2, 1, -1),
        ),
        CatalogEntry(
            "psi_2(0)", 2, z, symmetric_state(2, z, {"00": 1.0}), Family.PRODUCT,
            _x_combination(2, [(R2, d0), (R2, _chi(2, 1, 1))]),
        ),
    ]


def _entries_3() -> list[CatalogEntry]:
    z, x = Basis.Z, Basis.X
    return [
        CatalogEntry(
            "chi+_3(1/2)", 3, x,
            symmetric_state(3, x, _kets(R6, "110", "101", "011", "001", "010", "100")),
            Family.G, _chi(3, "1/2", 1),
        ),
        CatalogEntry(
            "chi+_3(1/2)", 3, z,
            symmetric_state(3, z, {**_kets(-W3, "011", "101", "110"), "000": S3}),
            Family.SUPERPOSITION, _chi(3, "1/2", 1),
            note="W-part sign corrected from the printed '+' (printed form is not orthogonal to chi+_3(3/2))",
        ),
        CatalogEntry(
            "chi-_3(1/2)", 3, x,
            symmetric_state(3, x, {**_kets(R6, "110", "101", "011"), **_kets(-R6, "001", "010", "100")}),
            Family.G, _chi(3, "1/2", -1),
        ),
        CatalogEntry(
            "chi-_3(1/2)", 3, z,
            symmetric_state(3, z, {**_kets(W3, "100", "010", "001"), "111": -S3}),
            Family.SUPERPOSITION, _chi(3, "1/2", -1),
        ),
        CatalogEntry(
            "chi+_3(3/2)", 3, x, symmetric_state(3, x, _kets(R2, "111", "000")), Family.GHZ, _chi(3, "3/2", 1)
        ),
        CatalogEntry(
            "chi+_3(3/2)", 3, z, symmetric_state(3, z, _kets(0.5, "000", "011", "101", "110")),
            Family.SUPERPOSITION, _chi(3, "3/2", 1),
        ),
        CatalogEntry(
            "chi-_3(3/2)", 3, x, symmetric_state(3, x, {"111": R2, "000": -R2}), Family.GHZ, _chi(3, "3/2", -1)
        ),
        CatalogEntry(
            "chi-_3(3/2)", 3, z, symmetric_state(3, z, _kets(0.5, "111", "100", "010", "001")),
            Family.SUPERPOSITION, _chi(3, "3/2", -1),
        ),
        CatalogEntry(
            "psi_3(0)", 3, z, symmetric_state(3, z, {"000": 1.0}), Family.PRODUCT,
            _x_combination(3, [(math.sqrt(3 / 4), _chi(3, "1/2", 1)), (0.5, _chi(3, "3/2", 1))]),
        ),
    ]


def _entries_4() -> list[CatalogEntry]:
    z, x = Basis.Z, Basis.X
    d0 = dicke_state(4, 0, x)
    return [
        CatalogEntry(
            "chi+_4(1)", 4, z, symmetric_state(4, z, {"0000": R2, "1111": -R2}), Family.GHZ, _chi(4, 1, 1)
        ),
        CatalogEntry(
            "chi-_4(1)", 4, z, symmetric_state(4, z, {**_kets(R8, *_FOUR_ONE), **_kets(-R8, *_FOUR_THREE)}),
            Family.G, _chi(4, 1, -1),
        ),
        CatalogEntry(
            "chi+_4(2)", 4, z, symmetric_state(4, z, _kets(R8, *_FOUR_TWO, "0000", "1111")),
            Family.SUPERPOSITION, _chi(4, 2, 1),
        ),
        CatalogEntry(
            "chi-_4(2)", 4, z, symmetric_state(4, z, _kets(R8, *_FOUR_ONE, *_FOUR_THREE)),
            Family.G, _chi(4, 2, -1),
        ),
        CatalogEntry("|2,0>_x", 4, x, d0, Family.DICKE, d0),
        CatalogEntry(
            "psi_4(0)", 4, z, symmetric_state(4, z, {"0000": 1.0}), Family.PRODUCT,
            _x_combination(4, [(R2, _chi(4, 1, 1)), (R8, _chi(4, 2, 1)), (math.sqrt(3 / 8), d0)]),
        ),
    ]


@functools.lru_cache(maxsize=None)
def _catalog(n_atoms: int) -> tuple[CatalogEntry, ...]:
    builders = {2: _entries_2, 3: _entries_3, 4: _entries_4}
    return tuple(builders[n_atoms]())


def catalog(n_atoms: int) -> list[CatalogEntry]:
    if n_atoms not in (2, 3, 4):
        raise ValueError("the catalog covers N = 2, 3, 4 only")
    return list(_catalog(n_atoms))


def lookup(n_atoms: int, name: str, basis: Basis | None = None) -> CatalogEntry:
    for entry in catalog(n_atoms):
        if entry.name == name and (basis is None or entry.basis is basis):
            return entry
    raise KeyError(f"no catalog entry {name!r} for N = {n_atoms}")


def fidelity(a: SpinState, b: SpinState) -> float:
    """|<a|b>|^2 after bringing b into a's basis."""
    if a.twice_j != b.twice_j:
        raise ValueError("states belong to different spin shells")
    if not (a.normalized and b.normalized):
        raise ValueError("fidelity needs normalized states")
    overlap = np.vdot(a.amplitudes, change_basis(b, a.basis).amplitudes)
    return float(min(abs(overlap) ** 2, 1.0))

