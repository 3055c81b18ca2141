"""Named experiments. Each writes a CSV table and a JSON summary into an output directory.

CSV files contain only deterministic quantities (no wall-clock times), so
identical configurations and seeds produce byte-identical tables.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .. import baseline, dynamics, encode, quadratize
from ..errors import ParameterError
from ..model import IsingModel, SpinConfig, all_energies, brute_force_ground, qubo_to_ising, random_spin_glass
from ..schedule import linear_forward, reverse_path
from .metrics import (
    DEFAULT_TARGET,
    InstanceMetrics,
    approximation_ratio,
    build_report,
    distinct_optimal,
    success_probability,
    time_to_epsilon,
    tts,
)

__all__ = ["EXPERIMENTS", "run_experiment", "false_vacuum_potential", "false_vacuum_histograms"]

logger = logging.getLogger(__name__)


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def _write_csv(path: Path, header: list[str], rows: list[list[Any]]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return _jsonable(obj.item())
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _mis_fig2(cfg: dict, out: Path) -> dict:
    g = encode.fig2_graph()
    m = encode.encode_max_independent_set(g, cfg.get("lam", 1.0), cfg.get("lam_prime", 1.0))
    e0, ground = brute_force_ground(m)
    labels = [sorted(encode.FIG2_LABELS[i] for i in encode.decode_mis(c, g).nodes) for c in ground]
    tau = cfg.get("tau", 50.0)
    res = dynamics.anneal_run(m, linear_forward(tau), dt=cfg.get("dt", 0.02), shots=cfg["shots"], seed=cfg["seed"])
    rows = []
    for e in res.samples.entries:
        dec = encode.decode_mis(e.config, g)
        rows.append([e.config.bitstring(), e.energy, e.count, "".join(sorted(encode.FIG2_LABELS[i] for i in dec.nodes)) or "-", dec.independent])
    _write_csv(out / "samples.csv", ["config_bitstring", "energy", "count", "selected", "independent"], rows)
    return {
        "ground_energy": e0,
        "ground_selections": labels,
        "passed": labels == [["BR", "TL", "TR"]],
        "anneal_success_probability": success_probability(res.samples, e0),
        "tau": tau,
    }


def _interface_grid(cfg: dict, out: Path) -> dict:
    grid = encode.GridSpec(cfg.get("side", 2))
    lam = cfg.get("lam", 1.0)
    m = encode.encode_interface_min(grid, lam, cfg.get("lam_prime", 10.0 * lam))
    e0, ground = brute_force_ground(m)
    rows = [[c.bitstring(), sum(c.spins), _unlike_count(grid, c)] for c in ground]
    _write_csv(out / "ground_states.csv", ["config_bitstring", "magnetisation", "unlike_adjacencies"], rows)
    return {
        "side": grid.side,
        "ground_energy": e0,
        "num_ground_states": len(ground),
        "passed": all(r[1] == 0 for r in rows),
    }


def _unlike_count(grid: encode.GridSpec, c: SpinConfig) -> int:
    s = c.spins
    return sum(1 for u, v in grid.neighbour_pairs() if s[u] != s[v])


def _cubic_reduction(cfg: dict, out: Path) -> dict:
    lam = cfg.get("penalty", 8.0)
    poly = quadratize.spin_poly_to_binary({(0, 1, 2): 1.0})
    qubo, amap = quadratize.reduce_to_quadratic(poly, lam)
    report = quadratize.verify_reduction(poly, qubo, amap)
    rows = [[" ".join(map(str, k)) or "const", v] for k, v in poly.terms.items()]
    rows += [[f"Q {i} {j}", v] for (i, j), v in qubo.Q.items()]
    _write_csv(out / "terms.csv", ["term", "coefficient"], rows)
    return {
        "penalty": lam,
        "ancillas": [list(r) for r in amap.records],
        "original_ground": report.original_ground,
        "reduced_ground": report.reduced_ground,
        "passed": report.passed,
    }


def _lz_sweep(cfg: dict, out: Path) -> dict:
    delta = cfg.get("delta", 1.0)
    rows = []
    worst = 0.0
    for v in cfg.get("rates", [0.5, 1.0, 2.0, 4.0]):
        sim = dynamics.landau_zener_sweep(delta, v, dt=cfg.get("dt", 0.01))
        ref = dynamics.landau_zener_prob(delta, v)
        worst = max(worst, abs(sim - ref))
        rows.append([v, delta, sim, ref, abs(sim - ref)])
    _write_csv(out / "lz.csv", ["v", "delta", "simulated", "formula", "abs_error"], rows)
    return {"max_abs_error": worst, "passed": worst <= cfg.get("tolerance", 0.02)}


def _gap_trace(cfg: dict, out: Path) -> dict:
    if "n" in cfg:
        m = random_spin_glass(cfg["n"], cfg["seed"], cfg.get("coupling_law", "pm1"))
    else:
        m = IsingModel(1, {0: 1.0})
    sch = linear_forward(1.0)
    grid = np.linspace(0.0, 1.0, cfg.get("points", 101))
    trace = dynamics.instantaneous_spectrum(m, sch, grid, cfg.get("levels", 4))
    gmin, s_star = dynamics.min_gap(trace)
    est = dynamics.adiabatic_time_estimate(m, sch, trace)
    header = ["s"] + [f"E{k}" for k in range(trace.energies.shape[1])] + ["gap"]
    rows = [[float(s), *map(float, row), float(g)] for s, row, g in zip(trace.s, trace.energies, trace.gaps)]
    _write_csv(out / "spectrum.csv", header, rows)
    return {"min_gap": gmin, "s_star": s_star, "adiabatic_time_estimate": est, "num_qubits": m.num_vars}


def _glass_instance(job: tuple) -> list[InstanceMetrics]:
    k, iseed, cfg = job
    n = cfg.get("n", 8)
    tau = cfg.get("tau", 10.0)
    sweeps = cfg.get("sweeps", 100)
    target = cfg.get("target", DEFAULT_TARGET)
    model_seed, sim_seed, sa_seed = (int(s.generate_state(1)[0]) for s in iseed.spawn(3))
    m = random_spin_glass(n, model_seed, cfg.get("coupling_law", "pm1"), cfg.get("density", 1.0))
    energies = all_energies(m)
    e0, e_worst = float(energies.min()), float(energies.max())
    eps = cfg.get("epsilon_fraction", 0.05) * abs(e0)
    runs = {
        "sim": (dynamics.anneal_run(m, linear_forward(tau), dt=cfg.get("dt", 0.05), shots=cfg["shots"], seed=sim_seed).samples, tau),
        "sa": (baseline.simulated_annealing(m, sweeps, tuple(cfg.get("beta", (0.1, 10.0))), cfg["shots"], sa_seed), float(sweeps)),
    }
    rows = []
    for solver, (samples, t_run) in runs.items():
        p_s = success_probability(samples, e0)
        best = samples.lowest.energy
        rows.append(
            InstanceMetrics(
                f"glass-{k}", solver, n, e0, best, p_s, t_run,
                tts(p_s, t_run, target), time_to_epsilon(samples, t_run, e0, eps, target),
                approximation_ratio(best, e0, e_worst) if e_worst > e0 else 1.0,
                distinct_optimal(samples, e0),
            )
        )
    return rows


def _glass_tts(cfg: dict, out: Path) -> dict:
    target = cfg.get("target", DEFAULT_TARGET)
    eps_frac = cfg.get("epsilon_fraction", 0.05)
    seeds = np.random.SeedSequence(cfg["seed"]).spawn(cfg.get("instances", 8))
    jobs = [(k, s, cfg) for k, s in enumerate(seeds)]
    workers = int(cfg.get("workers", 1))
    if workers > 1:
        # map keeps submission order, so the table does not depend on scheduling
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_instance = list(pool.map(_glass_instance, jobs))
    else:
        per_instance = [_glass_instance(job) for job in jobs]
    rows = [r for chunk in per_instance for r in chunk]
    report = build_report(rows, target, eps_frac)
    header = list(asdict(rows[0]).keys())
    _write_csv(out / "tts.csv", header, [list(asdict(r).values()) for r in rows])
    return {
        "target": target,
        "epsilon_fraction": eps_frac,
        "percentiles": report.percentiles,
        "t_run_units": {"sim": "anneal time (hbar=1)", "sa": "sweeps"},
        "caveat": "pure algorithm cost only; classical and simulated-quantum time units are not comparable",
    }


# Double well over 11 levels: metastable minimum at level 1, true minimum
# at level 8 lying 0.5 lower. A fast quench to FV_S_TARGET brings the two
# wells close to resonance, so the wall tunnels coherently between them
# during the hold. FV_LAMBDA keeps the dynamics inside the single-wall sector.
FV_VALUES = (0.691, 0.0, 0.452, 0.636, 0.61, 0.673, 0.518, 0.4, -0.5, 1.246, 0.627)
FV_S_TARGET = 0.2305
FV_RAMP = 0.1
FV_LAMBDA = 60.0
FV_DT = 0.002


def false_vacuum_potential() -> encode.PotentialSpec:
    return encode.PotentialSpec(-2.5 / 7, 2.5 / 7, tuple(FV_VALUES))


def false_vacuum_histograms(
    holds, s_target=None, ramp=None, shots=10_000, seed=0, dt=FV_DT, potential=None, lam=FV_LAMBDA
) -> tuple[encode.DomainWallCode, list[dict]]:
    """Reverse anneals from the false-vacuum wall position, one histogram per hold time.

    Each histogram maps wall position ``d`` to the fraction of all shots
    decoding to that position; shots outside the single-wall sector are
    reported under ``"invalid"``.
    """
    pot = potential or false_vacuum_potential()
    s_target = FV_S_TARGET if s_target is None else s_target
    ramp = FV_RAMP if ramp is None else ramp
    m, code = encode.encode_domain_wall_potential(pot, lam)
    false_d = int(np.argmin(pot.values[: len(pot.values) // 2]))
    start = SpinConfig.from_spins([-1] * false_d + [1] * (code.spins - false_d))
    out = []
    for k, hold in enumerate(holds):
        sch = reverse_path(s_target, ramp, hold, ramp)
        res = dynamics.anneal_run(m, sch, init=start, dt=dt, shots=shots, seed=dynamics.derive_seed(seed, k))
        hist = {d: 0 for d in range(code.spins + 1)}
        invalid = 0
        for e in res.samples.entries:
            d, ok = encode.decode_domain_wall(code, e.config)
            if ok:
                hist[d] += e.count
            else:
                invalid += e.count
        total = res.samples.total_reads
        out.append({"hold": hold, "fractions": {d: c / total for d, c in hist.items()}, "invalid": invalid / total, "shots": total})
    return code, out


def _false_vacuum(cfg: dict, out: Path) -> dict:
    holds = cfg.get("holds", [0, 5, 20, 80])
    pot = encode.PotentialSpec(cfg["phi_min"], cfg["delta_phi"], tuple(cfg["values"])) if "values" in cfg else None
    code, hists = false_vacuum_histograms(
        holds, cfg.get("s_target"), cfg.get("ramp"), cfg["shots"], cfg["seed"], cfg.get("dt", FV_DT), pot, cfg.get("lam", FV_LAMBDA)
    )
    pot = code.potential
    rows = []
    for h in hists:
        for d, f in h["fractions"].items():
            rows.append([h["hold"], d, pot.phi(d), pot.values[d], f / pot.delta_phi])
    _write_csv(out / "histograms.csv", ["hold", "d", "phi", "U", "density"], rows)
    false_d = int(np.argmin(pot.values[: pot.levels // 2]))
    true_d = int(np.argmin(pot.values))
    true_mass = [h["fractions"][true_d] for h in hists]
    two_mode = [_two_mode(h["fractions"], false_d, true_d) for h in hists]
    return {
        "false_vacuum_d": false_d,
        "true_vacuum_d": true_d,
        "holds": holds,
        "true_vacuum_mass": true_mass,
        "invalid_fraction": [h["invalid"] for h in hists],
        "two_mode": two_mode,
        "nondecreasing_first_three": all(b >= a for a, b in zip(true_mass[:3], true_mass[1:3])),
        "two_mode_by_last_hold": any(two_mode),
    }


def _two_mode(fractions: dict, false_d: int, true_d: int) -> bool:
    """Both well bins exceed every bin strictly between them."""
    middle = [fractions[d] for d in range(false_d + 1, true_d)]
    return min(fractions[false_d], fractions[true_d]) > max(middle, default=0.0)


def _factor_small(cfg: dict, out: Path) -> dict:
    N = cfg.get("N", 15)
    qubo, code = encode.encode_factoring(N, cfg.get("bits_p", 3), cfg.get("bits_q", 3))
    m = qubo_to_ising(qubo)
    e0, ground = brute_force_ground(m)
    pairs = sorted({code.decode(c.bits) for c in ground})
    rows = [[c.bitstring(), *code.decode(c.bits)] for c in ground]
    _write_csv(out / "ground_states.csv", ["config_bitstring", "p", "q"], rows)
    return {
        "N": N,
        "ground_energy": e0,
        "factor_pairs": [list(p) for p in pairs],
        "num_variables": qubo.num_vars,
        "passed": abs(e0) < 1e-9 and all(p * q == N for p, q in pairs),
    }


EXPERIMENTS: dict[str, Callable[[dict, Path], dict]] = {
    "mis-fig2": _mis_fig2,
    "interface-grid": _interface_grid,
    "cubic-reduction": _cubic_reduction,
    "lz-sweep": _lz_sweep,
    "gap-trace": _gap_trace,
    "glass-tts": _glass_tts,
    "false-vacuum": _false_vacuum,
    "factor-small": _factor_small,
}

DEFAULT_SHOTS = {"false-vacuum": 10_000, "glass-tts": 200}


def run_experiment(name: str, config: dict | None = None, out_dir: str | Path = ".") -> dict:
    """Run a named experiment, writing ``<out_dir>/*.csv`` and ``<out_dir>/summary.json``."""
    if name not in EXPERIMENTS:
        raise ParameterError(f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}")
    cfg = dict(config or {})
    cfg.setdefault("seed", 0)
    cfg.setdefault("shots", DEFAULT_SHOTS.get(name, 1000))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    summary = EXPERIMENTS[name](cfg, out)
    summary = {"experiment": name, "seed": cfg["seed"], "shots": cfg["shots"], **summary,
               "wall_time_s": round(time.perf_counter() - start, 3)}
    (out / "summary.json").write_text(json.dumps(_jsonable(summary), indent=2) + "\n", encoding="utf-8")
    logger.info("%s finished in %.2fs", name, summary["wall_time_s"])
    return summary
