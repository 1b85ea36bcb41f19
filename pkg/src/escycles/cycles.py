"""Outcome classification, closed-form outcome probabilities and ensemble statistics."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable

import numpy as np

from .spin import Basis, HalfInteger, SpinState, change_basis, index_of, jx_squared_expectation, twice

if TYPE_CHECKING:
    from .trajectory import TrajectoryRecord

DEFAULT_EPSILON = 1e-6


class Outcome(enum.Enum):
    STEADY_ZERO = "steady_zero"
    CYCLE = "cycle"
    UNRESOLVED = "unresolved"


@dataclass(frozen=True)
class Classification:
    outcome: Outcome
    twice_m: int | None
    dominant_weight: float
    jumps_observed: int

    def __post_init__(self):
        if self.outcome is Outcome.CYCLE:
            if self.twice_m is None or self.twice_m <= 0:
                raise ValueError("a cycle needs m > 0")
            if self.jumps_observed < 1:
                raise ValueError("a cycle needs at least one observed jump")
        if self.outcome is Outcome.STEADY_ZERO and self.jumps_observed != 0:
            raise ValueError("steady m = 0 preparation emits no photons")

    @property
    def m(self) -> HalfInteger | None:
        return None if self.twice_m is None else HalfInteger(self.twice_m)

    @property
    def label(self) -> str:
        return outcome_label(self.outcome, self.twice_m)

    def to_dict(self) -> dict:
        return {
            "kind": self.outcome.value,
            "m": None if self.twice_m is None else str(HalfInteger(self.twice_m)),
            "dominant_weight": float(self.dominant_weight),
            "jumps_observed": self.jumps_observed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Classification":
        m = data.get("m")
        return cls(
            outcome=Outcome(data["kind"]),
            twice_m=None if m is None else twice(m),
            dominant_weight=float(data["dominant_weight"]),
            jumps_observed=int(data["jumps_observed"]),
        )


def outcome_label(outcome: Outcome, twice_m: int | None = None) -> str:
    if outcome is Outcome.STEADY_ZERO:
        return "SteadyZero"
    if outcome is Outcome.CYCLE:
        return f"Cycle({HalfInteger(twice_m)})"
    return "Unresolved"


def _label_sort_key(label: str) -> tuple[int, int]:
    if label == "SteadyZero":
        return (0, 0)
    if label.startswith("Cycle("):
        return (1, twice(label[6:-1]))
    return (2, 0)


def classify_state(state: SpinState, n_jumps: int, epsilon: float = DEFAULT_EPSILON) -> Classification:
    """Assign a final state to |N/2,0>_x, a chi(m) pair, or Unresolved."""
    x = change_basis(state, Basis.X)
    probs = x.probabilities()
    twice_j = x.twice_j
    candidates: list[tuple[float, int]] = []
    if twice_j % 2 == 0:
        candidates.append((float(probs[index_of(twice_j, 0)]), 0))
    for tm in range(2 - twice_j % 2, twice_j + 1, 2):
        pair = probs[index_of(twice_j, tm)] + probs[index_of(twice_j, -tm)]
        candidates.append((float(pair), tm))
    weight, tm = max(candidates)
    if weight > 1 - epsilon:
        if tm == 0 and n_jumps == 0:
            return Classification(Outcome.STEADY_ZERO, None, weight, n_jumps)
        if tm > 0 and n_jumps >= 1:
            return Classification(Outcome.CYCLE, tm, weight, n_jumps)
    return Classification(Outcome.UNRESOLVED, tm if tm > 0 else None, weight, n_jumps)


def classify(record: "TrajectoryRecord", epsilon: float = DEFAULT_EPSILON) -> Classification:
    return classify_state(record.final_state, len(record.jump_times), epsilon)


# Closed-form outcome probabilities. Factorials go through lgamma so large N
# does not overflow.

def _log_binomial(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _check_n(n_atoms: int) -> int:
    if not isinstance(n_atoms, (int, np.integer)) or n_atoms < 1:
        raise ValueError(f"N must be a positive integer, got {n_atoms!r}")
    return int(n_atoms)


def p_steady(n_atoms: int) -> float:
    """Probability of never emitting a photon: N! / (2^N ((N/2)!)^2), N even."""
    n = _check_n(n_atoms)
    if n % 2:
        raise ValueError("odd N has no m = 0 component, so no steady Dicke state")
    return math.exp(_log_binomial(n, n // 2) - n * math.log(2))


def p_steady_or_zero(n_atoms: int) -> float:
    """p_steady for even N and exactly 0 for odd N."""
    n = _check_n(n_atoms)
    return 0.0 if n % 2 else p_steady(n)


def p_steady_stirling(n_atoms: int) -> float:
    n = _check_n(n_atoms)
    if n < 2:
        raise ValueError("the large-N form needs N >= 2")
    return math.sqrt(2.0 / (math.pi * n))


def _check_m(n_atoms: int, m, allow_zero: bool = False) -> int:
    tm = twice(m)
    if tm < 0 or (tm == 0 and not allow_zero):
        raise ValueError("m must be > 0")
    index_of(n_atoms, tm)
    return tm


def p_cycle(n_atoms: int, m) -> float:
    """Probability of the chi(m) cycle: N! / (2^(N-1) (N/2+m)! (N/2-m)!)."""
    n = _check_n(n_atoms)
    tm = _check_m(n, m)
    k = (n + tm) // 2
    return math.exp(_log_binomial(n, k) - (n - 1) * math.log(2))


def p_cycle_gauss(n_atoms: int, m) -> float:
    """Large-N Gaussian form 2 sqrt(2/(pi N)) exp(-m^2 / (N/2)); m is any real >= 0."""
    n = _check_n(n_atoms)
    if n < 2:
        raise ValueError("the large-N form needs N >= 2")
    m = float(m)
    if m < 0:
        raise ValueError("m must be >= 0")
    return 2.0 * math.sqrt(2.0 / (math.pi * n)) * math.exp(-m * m / (n / 2))


def allowed_cycles(n_atoms: int) -> list[HalfInteger]:
    """Positive m values, ascending: 1/2, 3/2, ... (odd N) or 1, 2, ... (even N)."""
    n = _check_n(n_atoms)
    return [HalfInteger(tm) for tm in range(2 - n % 2, n + 1, 2)]


def outcome_probabilities(n_atoms: int) -> dict[str, float]:
    out = {}
    if n_atoms % 2 == 0:
        out["SteadyZero"] = p_steady(n_atoms)
    for m in allowed_cycles(n_atoms):
        out[outcome_label(Outcome.CYCLE, m.twice)] = p_cycle(n_atoms, m)
    return out


def jump_rate_ratio(n_atoms: int, m1, m2) -> float:
    """Ratio of photon-emission rates of two cycles, (m1/m2)^2."""
    t1 = _check_m(_check_n(n_atoms), m1)
    t2 = _check_m(n_atoms, m2)
    return (t1 / t2) ** 2


def witness_genuine_entanglement(state: SpinState, n_atoms: int | None = None) -> bool:
    """<J_x^2> < N/4."""
    n = state.twice_j if n_atoms is None else _check_n(n_atoms)
    if n != state.twice_j:
        raise ValueError("N does not match the state's spin shell")
    return jx_squared_expectation(state) < n / 4


@dataclass(frozen=True)
class Estimate:
    probability: float
    sigma: float
    low: float
    high: float


@dataclass
class EnsembleStats:
    """Outcome counts plus late-time jump tallies per cycle.

    Jump rates are measured over the window (t_settle, t_max], after the
    trajectory has locked onto its cycle. Tallies are integers and window
    lengths all equal, so merging is exact and order-independent.
    """

    t_max: float
    t_settle: float
    total: int = 0
    counts: dict[str, int] = field(default_factory=dict)
    window_jumps: dict[str, int] = field(default_factory=dict)

    def add(self, record: "TrajectoryRecord") -> None:
        label = record.outcome.label
        self.total += 1
        self.counts[label] = self.counts.get(label, 0) + 1
        if record.outcome.outcome is Outcome.CYCLE:
            late = sum(1 for t in record.jump_times if t > self.t_settle)
            self.window_jumps[label] = self.window_jumps.get(label, 0) + late

    def merge(self, other: "EnsembleStats") -> "EnsembleStats":
        if (self.t_max, self.t_settle) != (other.t_max, other.t_settle):
            raise ValueError("cannot merge statistics gathered over different windows")
        out = EnsembleStats(self.t_max, self.t_settle, self.total + other.total)
        for src in (self.counts, other.counts):
            for k, v in src.items():
                out.counts[k] = out.counts.get(k, 0) + v
        for src in (self.window_jumps, other.window_jumps):
            for k, v in src.items():
                out.window_jumps[k] = out.window_jumps.get(k, 0) + v
        return out

    __add__ = merge

    def labels(self) -> list[str]:
        return sorted(self.counts, key=_label_sort_key)

    def estimate(self, label: str, z: float = 3.0) -> Estimate:
        """Empirical probability with a normal-approximation interval p +- z sigma."""
        if self.total == 0:
            raise ValueError("no trajectories aggregated")
        p = self.counts.get(label, 0) / self.total
        sigma = math.sqrt(p * (1 - p) / self.total)
        return Estimate(p, sigma, max(0.0, p - z * sigma), min(1.0, p + z * sigma))

    def exposure(self, label: str) -> float:
        return self.counts.get(label, 0) * (self.t_max - self.t_settle)

    def mean_jump_rate(self, label: str) -> float:
        exposure = self.exposure(label)
        if exposure == 0:
            return math.nan
        return self.window_jumps.get(label, 0) / exposure

    def to_dict(self, z: float = 3.0) -> dict:
        outcomes = {}
        for label in self.labels():
            est = self.estimate(label, z)
            entry = {
                "count": self.counts[label],
                "probability": est.probability,
                "sigma": est.sigma,
                "ci": [est.low, est.high],
            }
            if label.startswith("Cycle("):
                entry["window_jumps"] = self.window_jumps.get(label, 0)
                entry["mean_jump_rate"] = self.mean_jump_rate(label)
            outcomes[label] = entry
        return {
            "total": self.total,
            "t_max": self.t_max,
            "t_settle": self.t_settle,
            "ci_z": z,
            "outcomes": outcomes,
        }


def aggregate(records: Iterable["TrajectoryRecord"], t_max: float, settle_fraction: float = 0.5) -> EnsembleStats:
    if not 0 <= settle_fraction < 1:
        raise ValueError("settle_fraction must lie in [0, 1)")
    stats = EnsembleStats(t_max=t_max, t_settle=settle_fraction * t_max)
    for record in records:
        stats.add(record)
    return stats
