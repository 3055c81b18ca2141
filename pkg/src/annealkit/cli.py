"""Command-line entry point.

Exit codes: 0 success, 2 validation error, 3 capacity error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import baseline, dynamics, embed, quadratize
from .bench.experiments import EXPERIMENTS, run_experiment
from .errors import CapacityError, FormatError, ValidationError
from .model import IsingModel, QuboModel, SampleSet, brute_force_ground, dumps_model, loads_model, qubo_to_ising
from .schedule import linear_forward, loads_schedule

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CAPACITY = 3

logger = logging.getLogger("annealkit")


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc


def _load_ising(path: str) -> IsingModel:
    m = loads_model(_read(path))
    return qubo_to_ising(m) if isinstance(m, QuboModel) else m


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _cmd_experiment(args) -> int:
    config = {}
    if args.config:
        try:
            config = json.loads(_read(args.config))
        except json.JSONDecodeError as exc:
            raise FormatError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(config, dict):
            raise FormatError("config must be a JSON object")
    if args.seed is not None:
        config["seed"] = args.seed
    if args.shots is not None:
        config["shots"] = args.shots
    summary = run_experiment(args.command, config, args.out)
    print(json.dumps({k: v for k, v in summary.items() if k != "wall_time_s"}, default=str))
    return EXIT_OK


def _cmd_solve(args) -> int:
    m = _load_ising(args.model)
    if args.method == "brute":
        _, ground = brute_force_ground(m)
        samples = SampleSet.from_masks(m, [c.mask for c in ground])
    elif args.method == "sa":
        samples = baseline.simulated_annealing(m, args.sweeps, (args.beta0, args.beta1), args.shots, args.seed)
    else:
        sch = loads_schedule(_read(args.schedule)) if args.schedule else linear_forward(args.tau)
        samples = dynamics.anneal_run(m, sch, dt=args.dt, shots=args.shots, seed=args.seed).samples
    _emit(samples.to_csv(), args.out)
    return EXIT_OK


def _cmd_reduce(args) -> int:
    poly = quadratize.loads_poly(_read(args.poly))
    penalty = args.penalty if args.penalty is not None else "auto"
    qubo, amap = quadratize.reduce_to_quadratic(poly, penalty)
    payload = json.loads(dumps_model(qubo))
    payload["ancillas"] = [list(r) for r in amap.records]
    if args.verify:
        report = quadratize.verify_reduction(poly, qubo, amap)
        payload["verified"] = report.passed
        if not report.passed:
            _emit(json.dumps(payload) + "\n", args.out)
            raise ValidationError("; ".join(report.violations))
    _emit(json.dumps(payload) + "\n", args.out)
    return EXIT_OK


def _cmd_embed(args) -> int:
    m = _load_ising(args.model)
    hw = embed.parse_hardware(_read(args.hardware), Path(args.hardware).name)
    e = embed.parse_embedding(_read(args.embedding))
    report = embed.validate_embedding(hw, m, e)
    if not report.valid:
        raise ValidationError("invalid embedding: " + "; ".join(report.violations))
    physical = embed.apply_embedding(hw, m, e, args.chain_strength)
    _emit(dumps_model(physical) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="annealkit", description="Quantum annealing simulation and benchmarking toolkit.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    for name in EXPERIMENTS:
        e = sub.add_parser(name, help=f"run the {name} experiment")
        e.add_argument("--config", help="JSON configuration file")
        e.add_argument("--out", default=f"out/{name}", help="output directory")
        e.add_argument("--seed", type=int)
        e.add_argument("--shots", type=int)
        e.set_defaults(func=_cmd_experiment)

    s = sub.add_parser("solve", help="sample an Ising or QUBO instance")
    s.add_argument("--model", required=True)
    s.add_argument("--method", choices=("sim", "sa", "brute"), default="sa")
    s.add_argument("--shots", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--schedule", help="schedule JSON for the simulator (default: linear)")
    s.add_argument("--tau", type=float, default=10.0, help="anneal time of the default linear schedule")
    s.add_argument("--dt", type=float, default=0.01)
    s.add_argument("--sweeps", type=int, default=baseline.DEFAULT_SWEEPS)
    s.add_argument("--beta0", type=float, default=baseline.DEFAULT_BETA[0])
    s.add_argument("--beta1", type=float, default=baseline.DEFAULT_BETA[1])
    s.add_argument("--out", help="CSV output file (default: stdout)")
    s.set_defaults(func=_cmd_solve)

    r = sub.add_parser("reduce", help="quadratize a polynomial over binary variables")
    r.add_argument("--poly", required=True)
    r.add_argument("--penalty", type=float)
    r.add_argument("--verify", action="store_true", help="check the reduction exhaustively")
    r.add_argument("--out")
    r.set_defaults(func=_cmd_reduce)

    m = sub.add_parser("embed", help="map a logical model onto hardware")
    m.add_argument("--model", required=True)
    m.add_argument("--hardware", required=True)
    m.add_argument("--embedding", required=True)
    m.add_argument("--chain-strength", type=float)
    m.add_argument("--out")
    m.set_defaults(func=_cmd_embed)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"annealkit: capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except ValidationError as exc:
        print(f"annealkit: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
