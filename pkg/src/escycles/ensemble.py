"""Reproducible ensembles: manifests, seed derivation, record streams, summaries."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from . import __version__
from .cycles import (
    DEFAULT_EPSILON,
    EnsembleStats,
    aggregate,
    allowed_cycles,
    outcome_probabilities,
    p_cycle,
    p_cycle_gauss,
    p_steady,
    p_steady_stirling,
)
from .errors import ConfigError
from .trajectory import CollapseSpec, StepperConfig, TrajectoryRecord, run_batch

CHUNK_SIZE = 1024
MAX_TABLE_N = 200


def trajectory_seed(master_seed: int, index: int) -> int:
    """64-bit seed of trajectory ``index``, independent of how the ensemble is split."""
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(index),))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class RunManifest:
    n_atoms: int
    master_seed: int = 0
    trajectories: int = 10_000
    stepper: StepperConfig = field(default_factory=StepperConfig)
    epsilon: float = DEFAULT_EPSILON
    records_path: str | None = None
    summary_path: str | None = None
    version: str = __version__

    def __post_init__(self):
        if not isinstance(self.n_atoms, int) or self.n_atoms < 1:
            raise ConfigError(f"N must be a positive integer, got {self.n_atoms!r}")
        if self.trajectories < 1:
            raise ConfigError("need at least one trajectory")
        if not 0 < self.epsilon < 1:
            raise ConfigError("epsilon must lie in (0, 1)")
        if self.master_seed < 0:
            raise ConfigError("master seed must be non-negative")
        self.stepper.check(self.n_atoms)

    def to_dict(self) -> dict:
        return {
            "N": self.n_atoms,
            "master_seed": self.master_seed,
            "trajectories": self.trajectories,
            "stepper": self.stepper.to_dict(),
            "epsilon": self.epsilon,
            "records_path": self.records_path,
            "summary_path": self.summary_path,
            "version": self.version,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunManifest":
        try:
            return cls(
                n_atoms=int(data["N"]),
                master_seed=int(data["master_seed"]),
                trajectories=int(data["trajectories"]),
                stepper=StepperConfig.from_dict(data["stepper"]),
                epsilon=float(data.get("epsilon", DEFAULT_EPSILON)),
                records_path=data.get("records_path"),
                summary_path=data.get("summary_path"),
                version=data.get("version", __version__),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed manifest: {exc}") from exc

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "RunManifest":
        return cls.from_dict(json.loads(Path(path).read_text()))


def run_records(manifest: RunManifest, threads: int = 1, spec: CollapseSpec | None = None) -> list[TrajectoryRecord]:
    """All records of a manifest, in index order, identical for any thread count."""
    seeds = [trajectory_seed(manifest.master_seed, k) for k in range(manifest.trajectories)]
    starts = list(range(0, len(seeds), CHUNK_SIZE))

    def work(start: int) -> list[TrajectoryRecord]:
        return run_batch(
            manifest.n_atoms,
            seeds[start : start + CHUNK_SIZE],
            spec,
            manifest.stepper,
            epsilon=manifest.epsilon,
            first_index=start,
        )

    if threads <= 1 or len(starts) == 1:
        chunks = [work(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(work, starts))
    return [rec for chunk in chunks for rec in chunk]


def record_line(record: TrajectoryRecord) -> str:
    return json.dumps(record.to_dict(), separators=(",", ":"))


def write_records(records: Iterable[TrajectoryRecord], path) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(record_line(rec) + "\n")


def read_records(path) -> Iterator[TrajectoryRecord]:
    with open(path) as fh:
        for line in fh:
            if line.strip():
                yield TrajectoryRecord.from_dict(json.loads(line))


def summarize(manifest: RunManifest, stats: EnsembleStats) -> dict:
    """Summary document: the manifest, empirical outcome statistics and the closed forms."""
    expected = outcome_probabilities(manifest.n_atoms)
    summary = {"manifest": manifest.to_dict(), "stats": stats.to_dict()}
    comparison = {}
    for label, p in expected.items():
        est = stats.estimate(label)
        sigma_theory = math.sqrt(p * (1 - p) / stats.total)
        comparison[label] = {
            "expected": p,
            "observed": est.probability,
            "deviation_sigma": (est.probability - p) / sigma_theory if sigma_theory > 0 else 0.0,
        }
    for m in allowed_cycles(manifest.n_atoms):
        label = f"Cycle({m})"
        if label in comparison:
            comparison[label]["expected_jump_rate"] = manifest.stepper.jump_factor * m.value**2
    summary["closed_form"] = comparison
    return summary


def simulate(manifest: RunManifest, threads: int = 1, spec: CollapseSpec | None = None):
    """Run the manifest; returns (records, stats, summary) and writes any configured outputs.

    The summary is always aggregated from the record stream itself.
    """
    records = run_records(manifest, threads=threads, spec=spec)
    if manifest.records_path:
        write_records(records, manifest.records_path)
        stats = aggregate(read_records(manifest.records_path), manifest.stepper.t_max)
    else:
        stats = aggregate(records, manifest.stepper.t_max)
    summary = summarize(manifest, stats)
    if manifest.summary_path:
        Path(manifest.summary_path).write_text(json.dumps(summary, indent=2) + "\n")
    return records, stats, summary


def with_outputs(manifest: RunManifest, output_dir) -> RunManifest:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return replace(
        manifest,
        records_path=str(out / "records.jsonl"),
        summary_path=str(out / "summary.json"),
    )


def probability_table(n_values: Iterable[int], m_max: float | None = None) -> list[dict]:
    """Rows (N, m, p_steady, p_cycle, gaussian, stirling) for every allowed m >= 0.

    ``p_steady`` and ``stirling`` fill the m = 0 row of even N; ``p_cycle``
    fills m > 0 rows; ``gaussian`` is given on every row.
    """
    rows = []
    for n in n_values:
        n = int(n)
        if not 1 <= n <= MAX_TABLE_N:
            raise ConfigError(f"N must lie in 1..{MAX_TABLE_N}, got {n}")
        ms = [] if n % 2 else [0]
        ms += [m.value for m in allowed_cycles(n)]
        for m in ms:
            if m_max is not None and m > m_max:
                continue
            row = {"N": n, "m": m, "p_steady": None, "p_cycle": None, "gaussian": None, "stirling": None}
            if n >= 2:
                row["gaussian"] = p_cycle_gauss(n, m)
            if m == 0:
                row["p_steady"] = p_steady(n)
                row["stirling"] = p_steady_stirling(n)
            else:
                row["p_cycle"] = p_cycle(n, m)
            rows.append(row)
    return rows


TABLE_COLUMNS = ("N", "m", "p_steady", "p_cycle", "gaussian", "stirling")


def table_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TABLE_COLUMNS)
    for row in rows:
        writer.writerow(["" if row[c] is None else (repr(row[c]) if isinstance(row[c], float) else row[c]) for c in TABLE_COLUMNS])
    return buf.getvalue()


def trace_csv(n_atoms: int, times: np.ndarray, amplitudes: np.ndarray) -> str:
    buf = io.StringIO()
    labels = []
    for tm in range(-n_atoms, n_atoms + 1, 2):
        labels.append(f"m={tm // 2}" if tm % 2 == 0 else f"m={tm}/2")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", *labels])
    probs = amplitudes.real**2 + amplitudes.imag**2
    for t, row in zip(times, probs):
        writer.writerow([repr(float(t)), *(repr(float(p)) for p in row)])
    return buf.getvalue()
