"""Command-line entry point.

    escycles simulate --n-atoms 4 --trajectories 10000 --seed 7 --output runs/n4
    escycles simulate --manifest runs/n4/manifest.json
    escycles trace --n-atoms 3 --seed 11 --output trace.csv
    escycles probabilities --n-min 2 --n-max 100
    escycles catalog --n-atoms 3
    escycles oracle --n-atoms 3 --t-max 1
    escycles nullspace --n-atoms 4 --gamma01 1 --gamma10 0.5
    escycles rates --g-s 1 --zeta-s 1 --delta-s 10 --g-r 1 --zeta-r 1 --delta-r 10 --kappa 1

Exit codes: 0 success, 2 invalid configuration, 3 numerical guard tripped.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import catalog
from .cycles import DEFAULT_EPSILON
from .ensemble import (
    RunManifest,
    probability_table,
    run_records,
    simulate,
    table_csv,
    trace_csv,
    trajectory_seed,
    with_outputs,
)
from .errors import ConfigError, NumericalGuardError
from .master import DensityMatrix, integrate, liouvillian_nullspace, monte_carlo_trace_error, trace_distance
from .params import PhysicalParams, derive_rates
from .spin import Basis, HalfInteger, initial_state
from .trajectory import CollapseSpec, Sampler, StepperConfig, replay, run_trajectory

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("escycles")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_stepper_flags(p: argparse.ArgumentParser, t_max: float = 25.0) -> None:
    p.add_argument("--dt", type=float, default=1e-3, help="time step in scaled units")
    p.add_argument("--t-max", type=float, default=t_max, help="time horizon in scaled units")
    p.add_argument(
        "--sampler",
        choices=[s.value for s in Sampler],
        default=Sampler.WAITING_TIME.value,
        help="fixed-step Bernoulli draws or exact waiting-time inversion",
    )
    p.add_argument(
        "--appendix-literal",
        action="store_true",
        help="jump probability <C^dag C> dt instead of 2 <C^dag C> dt",
    )


def _add_run_flags(p: argparse.ArgumentParser, trajectories: int = 10_000, t_max: float = 25.0) -> None:
    p.add_argument("--n-atoms", type=int, required=True)
    p.add_argument("--trajectories", type=int, default=trajectories)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON, help="classification threshold")
    p.add_argument("--threads", type=int, default=1)
    _add_stepper_flags(p, t_max)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="escycles", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run an ensemble and summarize outcomes")
    p.add_argument("--manifest", help="re-run a saved manifest (other run flags ignored)")
    p.add_argument("--n-atoms", type=int)
    p.add_argument("--trajectories", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--output", help="directory for manifest.json, records.jsonl, summary.json")
    _add_stepper_flags(p)

    p = sub.add_parser("trace", help="per-step X-basis populations of one trajectory (CSV)")
    p.add_argument("--n-atoms", type=int, required=True)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--index", type=int, default=0, help="trajectory index within the master seed")
    p.add_argument("--every", type=int, default=10, help="emit one row per this many dt steps")
    p.add_argument("--output", help="CSV path (default stdout)")
    _add_stepper_flags(p)

    p = sub.add_parser("probabilities", help="closed-form outcome probabilities (CSV)")
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=100)
    p.add_argument("--even-only", action="store_true")
    p.add_argument("--m-max", type=float)
    p.add_argument("--output")

    p = sub.add_parser("catalog", help="named reference states, one JSON object per line")
    p.add_argument("--n-atoms", type=int, choices=(2, 3, 4))
    p.add_argument("--output")

    p = sub.add_parser("oracle", help="compare the trajectory ensemble with the master equation")
    _add_run_flags(p, trajectories=10_000, t_max=1.0)
    p.add_argument("--rk4-dt", type=float, default=1e-3)

    p = sub.add_parser("nullspace", help="count zero eigenvalues of the Liouvillian")
    p.add_argument("--n-atoms", type=int, required=True)
    p.add_argument("--gamma01", type=float, default=0.25)
    p.add_argument("--gamma10", type=float, default=0.25)

    p = sub.add_parser("rates", help="Raman rates from cavity-QED parameters")
    for name in ("g-r", "g-s", "zeta-r", "zeta-s", "delta-r", "delta-s", "kappa"):
        p.add_argument(f"--{name}", type=float, required=True)
    return parser


def _stepper(args) -> StepperConfig:
    return StepperConfig(
        dt=args.dt,
        t_max=args.t_max,
        jump_factor_two=not args.appendix_literal,
        sampler=Sampler(args.sampler),
    )


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_simulate(args) -> int:
    if args.manifest:
        manifest = RunManifest.load(args.manifest)
    else:
        if args.n_atoms is None:
            raise ConfigError("simulate needs --n-atoms or --manifest")
        manifest = RunManifest(
            n_atoms=args.n_atoms,
            master_seed=args.seed,
            trajectories=args.trajectories,
            stepper=_stepper(args),
            epsilon=args.epsilon,
        )
        if args.output:
            manifest = with_outputs(manifest, args.output)
            manifest.save(Path(args.output) / "manifest.json")
    log.info("running %d trajectories for N = %d", manifest.trajectories, manifest.n_atoms)
    _, _, summary = simulate(manifest, threads=args.threads)
    json.dump(summary, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def _cmd_trace(args) -> int:
    config = _stepper(args)
    if args.every < 1:
        raise ConfigError("--every must be >= 1")
    seed = trajectory_seed(args.seed, args.index)
    record = run_trajectory(args.n_atoms, config=config, seed=seed)
    steps = np.arange(0, config.n_steps + 1, args.every)
    times = steps * config.dt
    amps = replay(args.n_atoms, record.jump_times, times, config)
    _emit(trace_csv(args.n_atoms, times, amps), args.output)
    log.info("seed %d: %d jumps, outcome %s", seed, record.n_jumps, record.outcome.label)
    return EXIT_OK


def _cmd_probabilities(args) -> int:
    step = 2 if args.even_only else 1
    start = args.n_min + (args.n_min % 2 if args.even_only else 0)
    rows = probability_table(range(start, args.n_max + 1, step), m_max=args.m_max)
    _emit(table_csv(rows), args.output)
    return EXIT_OK


def _cmd_catalog(args) -> int:
    ns = [args.n_atoms] if args.n_atoms else [2, 3, 4]
    lines = [json.dumps(e.to_dict()) for n in ns for e in catalog(n)]
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    manifest = RunManifest(
        n_atoms=args.n_atoms,
        master_seed=args.seed,
        trajectories=args.trajectories,
        stepper=_stepper(args),
        epsilon=args.epsilon,
    )
    records = run_records(manifest, threads=args.threads)
    mixed = DensityMatrix.from_states([r.final_state for r in records], Basis.X)
    exact = integrate(DensityMatrix.pure(initial_state(args.n_atoms)), CollapseSpec(), args.t_max, args.rk4_dt)
    report = {
        "N": args.n_atoms,
        "t": args.t_max,
        "trajectories": manifest.trajectories,
        "jump_factor_two": manifest.stepper.jump_factor_two,
        "trace_distance": trace_distance(mixed, exact),
        "monte_carlo_error": monte_carlo_trace_error(mixed, manifest.trajectories),
    }
    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def _cmd_nullspace(args) -> int:
    equal = args.gamma01 == args.gamma10
    spec = CollapseSpec(args.gamma01, args.gamma10, scaled=equal)
    result = liouvillian_nullspace(spec, HalfInteger(args.n_atoms))
    report = {
        "N": args.n_atoms,
        "gamma01": args.gamma01,
        "gamma10": args.gamma10,
        "zero_eigenvalue_count": result.zero_eigenvalue_count,
        "max_real_part": float(result.eigenvalues.real.max()),
    }
    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def _cmd_rates(args) -> int:
    params = PhysicalParams(
        g_r=args.g_r, g_s=args.g_s, zeta_r=args.zeta_r, zeta_s=args.zeta_s,
        delta_r=args.delta_r, delta_s=args.delta_s, kappa=args.kappa,
    )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        spec = derive_rates(params)
    report = {
        "gamma01": spec.gamma01,
        "gamma10": spec.gamma10,
        "scaled": spec.scaled,
        "scaled_time_unit": spec.time_unit,
        "warnings": [str(w.message) for w in caught],
    }
    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "trace": _cmd_trace,
    "probabilities": _cmd_probabilities,
    "catalog": _cmd_catalog,
    "oracle": _cmd_oracle,
    "nullspace": _cmd_nullspace,
    "rates": _cmd_rates,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"escycles: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalGuardError as exc:
        print(f"escycles: numerical guard tripped: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"escycles: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
