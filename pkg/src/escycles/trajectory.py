"""Monte Carlo wave-function unraveling of the collective-spin master equation.

Trajectories are propagated in the J_x eigenbasis, where the effective
Hamiltonian -i J_x^2 is diagonal. Free evolution is therefore exact
(a_m -> a_m exp(-m^2 t)) and the collapse J_x is a multiplication by m.

Batches of trajectories advance in lockstep as rows of one array. Each
row owns its own PCG64 stream, so a trajectory's record depends only on its
seed and the stepper configuration, not on which batch it ran in.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cycles import Classification, classify_state
from .errors import BasisMismatch, ConfigError, ZeroJumpAmplitude
from .spin import (
    Basis,
    OperatorMatrix,
    SpinState,
    change_basis,
    collective_operators,
    initial_state,
    m_values,
    twice,
)

MAX_JUMP_PROBABILITY_PER_STEP = 0.1
JUMP_NORM_FLOOR = 1e-14
_BISECTION_ITERATIONS = 64
_UNIFORM_BLOCK = 256


class Sampler(enum.Enum):
    FIXED_STEP = "fixed-step"
    WAITING_TIME = "waiting-time"


@dataclass(frozen=True)
class CollapseSpec:
    """Raman rates of X = sqrt(gamma01) J+ + sqrt(gamma10) J-.

    ``scaled`` selects the equal-rate case with time in units of
    (4 gamma01)^-1, where the collapse operator is exactly J_x.
    """

    gamma01: float = 0.25
    gamma10: float = 0.25
    scaled: bool = True

    def __post_init__(self):
        for name in ("gamma01", "gamma10"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ConfigError(f"{name} must be a finite rate >= 0, got {value!r}")
        if self.scaled and self.gamma01 != self.gamma10:
            raise ConfigError("scaled time requires gamma01 == gamma10")

    @property
    def equal_rates(self) -> bool:
        return self.gamma01 == self.gamma10

    @property
    def time_unit(self) -> float:
        """Length of one scaled time unit, (4 gamma01)^-1, in the rates' units."""
        if self.gamma01 == 0:
            return math.inf
        return 1.0 / (4.0 * self.gamma01)

    def collapse_operator(self, j, basis: Basis = Basis.Z) -> OperatorMatrix:
        twice_j = twice(j)
        raising, lowering, jx = collective_operators(twice_j, basis)
        if self.scaled:
            return OperatorMatrix(twice_j, basis, jx)
        mat = math.sqrt(self.gamma01) * raising + math.sqrt(self.gamma10) * lowering
        return OperatorMatrix(twice_j, basis, mat)


def effective_hamiltonian(spec: CollapseSpec, j, basis: Basis = Basis.Z) -> OperatorMatrix:
    """-i C^dag C; equals -i J_x^2 in the scaled case."""
    c = spec.collapse_operator(j, basis)
    return OperatorMatrix(c.twice_j, basis, -1j * (c.dagger @ c).entries)


@dataclass(frozen=True)
class StepperConfig:
    dt: float = 1e-3
    t_max: float = 25.0
    jump_factor_two: bool = True
    sampler: Sampler = Sampler.WAITING_TIME

    def __post_init__(self):
        if not isinstance(self.sampler, Sampler):
            object.__setattr__(self, "sampler", Sampler(self.sampler))
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"dt must be positive, got {self.dt!r}")
        if not (math.isfinite(self.t_max) and self.t_max > 0):
            raise ConfigError(f"t_max must be positive, got {self.t_max!r}")
        steps = self.t_max / self.dt
        if abs(steps - round(steps)) > 1e-6 * max(1.0, steps):
            raise ConfigError(f"t_max = {self.t_max} is not a whole number of dt = {self.dt} steps")

    @property
    def jump_factor(self) -> float:
        return 2.0 if self.jump_factor_two else 1.0

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))

    def check(self, n_atoms: int) -> None:
        """Reject dt too coarse for the fastest jump rate of an N-atom system."""
        bound = self.dt * 2.0 * (n_atoms / 2.0) ** 2
        if bound > MAX_JUMP_PROBABILITY_PER_STEP:
            raise ConfigError(
                f"dt = {self.dt} too large for N = {n_atoms}: "
                f"dt * 2 (N/2)^2 = {bound:.3g} > {MAX_JUMP_PROBABILITY_PER_STEP}"
            )

    def to_dict(self) -> dict:
        return {
            "dt": self.dt,
            "t_max": self.t_max,
            "jump_factor_two": self.jump_factor_two,
            "sampler": self.sampler.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StepperConfig":
        return cls(
            dt=float(data["dt"]),
            t_max=float(data["t_max"]),
            jump_factor_two=bool(data["jump_factor_two"]),
            sampler=Sampler(data["sampler"]),
        )


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    seed: int
    n_atoms: int
    jump_times: tuple[float, ...]
    outcome: Classification
    final_state: SpinState
    residual_weight: float
    wall_steps: int
    index: int | None = field(default=None)

    @property
    def n_jumps(self) -> int:
        return len(self.jump_times)

    def to_dict(self) -> dict:
        amps = self.final_state.amplitudes
        out = {
            "seed": int(self.seed),
            "N": self.n_atoms,
            "jump_times": [float(t) for t in self.jump_times],
            "outcome": self.outcome.to_dict(),
            "final_state": {
                "basis": self.final_state.basis.value,
                "re": [float(x) for x in amps.real],
                "im": [float(x) for x in amps.imag],
            },
            "residual_weight": float(self.residual_weight),
            "wall_steps": int(self.wall_steps),
        }
        if self.index is not None:
            out = {"index": self.index, **out}
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TrajectoryRecord":
        fs = data["final_state"]
        amps = np.asarray(fs["re"]) + 1j * np.asarray(fs["im"])
        return cls(
            seed=int(data["seed"]),
            n_atoms=int(data["N"]),
            jump_times=tuple(float(t) for t in data["jump_times"]),
            outcome=Classification.from_dict(data["outcome"]),
            final_state=SpinState(int(data["N"]), Basis(fs["basis"]), amps),
            residual_weight=float(data["residual_weight"]),
            wall_steps=int(data["wall_steps"]),
            index=data.get("index"),
        )


def _require_x(state: SpinState) -> None:
    if state.basis is not Basis.X:
        raise BasisMismatch("trajectory operations act on X-basis states; use change_basis first")


def free_evolve(state: SpinState, dt: float) -> SpinState:
    """Exact no-jump propagation, a_m -> a_m exp(-m^2 dt); not renormalized."""
    _require_x(state)
    if dt < 0:
        raise ValueError("free evolution needs dt >= 0")
    amps = state.amplitudes * np.exp(-(state.m_values**2) * dt)
    return SpinState(state.twice_j, Basis.X, amps, normalized=False)


def jump_probability(state: SpinState, dt: float, config: StepperConfig | None = None) -> float:
    """Collapse probability over dt, factor * <J_x^2> * dt, clipped to [0, 1]."""
    config = config or StepperConfig()
    if not state.normalized:
        raise ValueError("jump probability needs a normalized state")
    x = change_basis(state, Basis.X)
    p = config.jump_factor * float(np.dot(x.m_values**2, x.probabilities())) * dt
    return min(max(p, 0.0), 1.0)


def apply_jump(state: SpinState) -> SpinState:
    """C|psi> / ||C|psi>|| with C = J_x, in the state's own basis."""
    if state.basis is Basis.X:
        image = state.m_values * state.amplitudes
    else:
        _, _, jx = collective_operators(state.twice_j, Basis.Z)
        image = jx @ state.amplitudes
    norm = float(np.linalg.norm(image))
    if norm <= JUMP_NORM_FLOOR:
        raise ZeroJumpAmplitude(f"||J_x psi|| = {norm:.3g}: the state is annihilated by the collapse")
    return SpinState(state.twice_j, state.basis, image / norm)


def _rowsum(values: np.ndarray) -> np.ndarray:
    # fixed left-to-right order so a row's sum never depends on the batch shape
    acc = values[:, 0].copy()
    for col in range(1, values.shape[1]):
        acc += values[:, col]
    return acc


def _abs2(values: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(values):
        return values.real**2 + values.imag**2
    return values * values


class _UniformStreams:
    """Per-row uniform draws, buffered in blocks, consumed in lockstep."""

    def __init__(self, seeds: Sequence[int], block: int = _UNIFORM_BLOCK):
        self._gens = [np.random.Generator(np.random.PCG64(int(s))) for s in seeds]
        self._rows = np.arange(len(seeds))
        self._block = block
        self._buf = np.empty((len(seeds), block))
        self._pos = block

    def keep(self, mask: np.ndarray) -> None:
        self._rows = self._rows[mask]
        self._buf = self._buf[mask]

    def draw(self) -> np.ndarray:
        if self._pos == self._block:
            for i, row in enumerate(self._rows):
                self._buf[i] = self._gens[row].random(self._block)
            self._pos = 0
        out = self._buf[:, self._pos]
        self._pos += 1
        return out


@dataclass
class _RawTrajectory:
    jump_times: list[float]
    final_x: np.ndarray
    steps: int


def _normalize_rows(amps: np.ndarray) -> np.ndarray:
    return amps / np.sqrt(_rowsum(_abs2(amps)))[:, None]


def _check_jump_norms(norm2: np.ndarray) -> None:
    if np.any(norm2 <= JUMP_NORM_FLOOR**2):
        raise ZeroJumpAmplitude("a selected jump annihilates the state (||J_x psi|| <= 1e-14)")


def _run_fixed_step(m: np.ndarray, amps: np.ndarray, config: StepperConfig, streams: _UniformStreams):
    n = amps.shape[0]
    dt = config.dt
    m2 = m * m
    decay = np.exp(-m2 * dt)
    keep_factor = config.jump_factor * dt
    jumps: list[list[float]] = [[] for _ in range(n)]
    for step in range(config.n_steps):
        weights = _abs2(amps)
        prob = np.clip(keep_factor * _rowsum(weights * m2), 0.0, 1.0)
        hit = prob > streams.draw()
        if hit.any():
            _check_jump_norms(_rowsum(weights[hit] * m2))
            amps = np.where(hit[:, None], amps * m, amps * decay)
            t_jump = (step + 1) * dt
            for row in np.flatnonzero(hit):
                jumps[row].append(t_jump)
        else:
            amps = amps * decay
        amps = _normalize_rows(amps)
    return [_RawTrajectory(jumps[r], amps[r], config.n_steps) for r in range(n)]


def _survival(weights: np.ndarray, m2: np.ndarray, tau: np.ndarray) -> np.ndarray:
    # squared norm of the freely evolved state after tau
    return _rowsum(weights * np.exp(-2.0 * m2 * tau[:, None]))


def _run_waiting_time(m: np.ndarray, amps: np.ndarray, config: StepperConfig, streams: _UniformStreams):
    n = amps.shape[0]
    m2 = m * m
    t_max = config.t_max
    # survival of the jump process is ||psi(t)||^(factor), so solve ||psi||^2 = u^(2/factor)
    exponent = 2.0 / config.jump_factor
    t = np.zeros(n)
    steps = np.zeros(n, dtype=np.int64)
    jumps: list[list[float]] = [[] for _ in range(n)]
    final = np.array(amps)
    active = np.arange(n)
    cur = amps
    while active.size:
        weights = _abs2(cur)
        remaining = t_max - t[active]
        u = 1.0 - streams.draw()
        target = u**exponent
        steps[active] += 1
        finished = _survival(weights, m2, remaining) >= target

        if finished.any():
            rows = active[finished]
            evolved = cur[finished] * np.exp(-m2 * remaining[finished][:, None])
            final[rows] = _normalize_rows(evolved)
            t[rows] = t_max

        pending = ~finished
        if pending.any():
            w = weights[pending]
            tgt = target[pending]
            lo = np.zeros(w.shape[0])
            hi = remaining[pending].copy()
            for _ in range(_BISECTION_ITERATIONS):
                mid = 0.5 * (lo + hi)
                above = _survival(w, m2, mid) > tgt
                lo = np.where(above, mid, lo)
                hi = np.where(above, hi, mid)
            tau = hi
            image = cur[pending] * np.exp(-m2 * tau[:, None]) * m
            norm2 = _rowsum(_abs2(image))
            _check_jump_norms(norm2)
            image = image / np.sqrt(norm2)[:, None]
            rows = active[pending]
            t_old = t[rows]
            t_new = np.minimum(np.maximum(t_old + tau, np.nextafter(t_old, np.inf)), t_max)
            t[rows] = t_new
            for row, tj in zip(rows, t_new):
                jumps[row].append(float(tj))
            at_end = t_new >= t_max
            final[rows[at_end]] = image[at_end]
            cur_next = image[~at_end]
            survivors = np.zeros(active.size, dtype=bool)
            survivors[np.flatnonzero(pending)[~at_end]] = True
        else:
            cur_next = cur[:0]
            survivors = np.zeros(active.size, dtype=bool)

        streams.keep(survivors)
        active = active[survivors]
        cur = cur_next
    return [_RawTrajectory(jumps[r], final[r], int(steps[r])) for r in range(n)]


def _initial_x(n_atoms: int, initial: SpinState | None) -> np.ndarray:
    state = initial_state(n_atoms) if initial is None else initial
    if state.twice_j != n_atoms:
        raise ConfigError(f"initial state has 2j = {state.twice_j}, expected N = {n_atoms}")
    if not state.normalized:
        raise ConfigError("initial state must be normalized")
    x = change_basis(state, Basis.X).amplitudes
    if np.all(x.imag == 0):
        return x.real.copy()
    return x.copy()


def _check_spec(spec: CollapseSpec) -> None:
    if not spec.equal_rates:
        raise ConfigError("trajectories are implemented for gamma01 == gamma10 only")


def run_batch(
    n_atoms: int,
    seeds: Sequence[int],
    spec: CollapseSpec | None = None,
    config: StepperConfig | None = None,
    initial: SpinState | None = None,
    epsilon: float = 1e-6,
    first_index: int | None = None,
) -> list[TrajectoryRecord]:
    """Run one trajectory per seed; record i depends only on seeds[i]."""
    spec = spec or CollapseSpec()
    config = config or StepperConfig()
    _check_spec(spec)
    config.check(n_atoms)
    seeds = [int(s) for s in seeds]
    if not seeds:
        return []
    x0 = _initial_x(n_atoms, initial)
    m = m_values(n_atoms)
    amps = np.tile(x0, (len(seeds), 1))
    streams = _UniformStreams(seeds)
    if config.sampler is Sampler.FIXED_STEP:
        raw = _run_fixed_step(m, amps, config, streams)
    else:
        raw = _run_waiting_time(m, amps, config, streams)

    records = []
    for i, (seed, r) in enumerate(zip(seeds, raw)):
        final = SpinState.from_vector(n_atoms, Basis.X, r.final_x)
        outcome = classify_state(final, len(r.jump_times), epsilon)
        records.append(
            TrajectoryRecord(
                seed=seed,
                n_atoms=n_atoms,
                jump_times=tuple(r.jump_times),
                outcome=outcome,
                final_state=final,
                residual_weight=min(max(1.0 - outcome.dominant_weight, 0.0), 1.0),
                wall_steps=r.steps,
                index=None if first_index is None else first_index + i,
            )
        )
    return records


def run_trajectory(
    n_atoms: int,
    spec: CollapseSpec | None = None,
    config: StepperConfig | None = None,
    seed: int = 0,
    initial: SpinState | None = None,
    epsilon: float = 1e-6,
) -> TrajectoryRecord:
    """One trajectory from |N/2, -N/2>_z (or ``initial``), deterministic in ``seed``."""
    return run_batch(n_atoms, [seed], spec, config, initial, epsilon)[0]


def replay(
    n_atoms: int,
    jump_times: Sequence[float],
    times: Sequence[float],
    config: StepperConfig | None = None,
    initial: SpinState | None = None,
) -> np.ndarray:
    """Rebuild normalized X-basis amplitudes at ``times`` from a jump record.

    A jump at t_j replaces the state by J_x psi / ||J_x psi||. Under the
    fixed-step sampler the interval (t_j - dt, t_j] carries the jump instead
    of free evolution, exactly as the stepping loop does.
    """
    config = config or StepperConfig()
    m = m_values(n_atoms)
    state = _initial_x(n_atoms, initial).astype(complex)
    lag = config.dt if config.sampler is Sampler.FIXED_STEP else 0.0
    times = np.asarray(times, dtype=float)
    order = np.argsort(times, kind="stable")
    out = np.empty((times.size, n_atoms + 1), dtype=complex)
    t_ref = 0.0
    jumps = list(jump_times)
    k = 0
    for idx in order:
        t = times[idx]
        while k < len(jumps) and jumps[k] <= t:
            pre = state * np.exp(-m * m * max(jumps[k] - lag - t_ref, 0.0))
            image = pre * m
            state = image / np.linalg.norm(image)
            t_ref = jumps[k]
            k += 1
        evolved = state * np.exp(-m * m * (t - t_ref))
        out[idx] = evolved / np.linalg.norm(evolved)
    return out
