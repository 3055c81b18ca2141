"""Solution-quality and runtime metrics computed from sample sets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import CapacityError, ParameterError, ValidationError
from ..model import IsingModel, SampleSet, all_energies

__all__ = [
    "DEFAULT_TARGET",
    "success_probability",
    "tts",
    "time_to_epsilon",
    "approximation_ratio",
    "beta_eff_fit",
    "distinct_optimal",
    "InstanceMetrics",
    "TtsReport",
    "build_report",
]

DEFAULT_TARGET = 0.99
ENERGY_TOL = 1e-9


def success_probability(samples: SampleSet, ground_energy: float, tol: float = ENERGY_TOL) -> float:
    """Fraction of reads with energy at most ``ground_energy + tol``."""
    total = samples.total_reads
    if total < 1:
        raise ValidationError("sample set is empty")
    hits = sum(e.count for e in samples.entries if e.energy <= ground_energy + tol)
    return hits / total


def tts(p_s: float, t_run: float, p: float = DEFAULT_TARGET) -> float:
    """``t_run * ln(1 - p) / ln(1 - p_s)``, fractional repetitions.

    ``p_s == 0`` gives ``inf``; ``p_s == 1`` gives ``t_run``, the limit of a
    single sure run.
    """
    if not 0 < p < 1:
        raise ParameterError(f"target probability must lie in (0, 1), got {p}")
    if not 0 <= p_s <= 1:
        raise ParameterError(f"success probability must lie in [0, 1], got {p_s}")
    if not t_run > 0:
        raise ParameterError("t_run must be positive")
    if p_s == 0:
        return math.inf
    if p_s == 1:
        return t_run
    return t_run * math.log1p(-p) / math.log1p(-p_s)


def time_to_epsilon(
    samples: SampleSet, t_run: float, E_star: float, eps: float, p: float = DEFAULT_TARGET
) -> float:
    """Same repetition formula as :func:`tts` with success meaning ``E <= E_star + eps``."""
    if eps < 0:
        raise ParameterError("eps must be nonnegative")
    return tts(success_probability(samples, E_star, eps + ENERGY_TOL), t_run, p)


def approximation_ratio(best_energy: float, E_star: float, E_worst: float) -> float:
    """``(E_worst - best) / (E_worst - E_star)``: 1 at the optimum, 0 at the worst configuration."""
    if not E_worst > E_star:
        raise ValidationError("E_worst must exceed E_star")
    return (E_worst - best_energy) / (E_worst - E_star)


def distinct_optimal(samples: SampleSet, ground_energy: float, tol: float = ENERGY_TOL) -> int:
    """Number of distinct optimal configurations observed."""
    return sum(1 for e in samples.entries if e.energy <= ground_energy + tol)


def beta_eff_fit(samples: SampleSet, m: IsingModel, tol: float = 1e-9) -> tuple[float, float]:
    """Least-squares inverse temperature from ``ln(count / degeneracy)`` against ``-E``.

    Reads are grouped by energy level; level degeneracies come from full
    enumeration. Returns ``(beta, r_squared)``.
    """
    if m.num_vars > 20:
        raise CapacityError("degeneracy enumeration limited to 20 spins")
    levels = np.sort(all_energies(m))
    groups: list[list[float]] = []
    for e in samples.entries:
        if groups and abs(e.energy - groups[-1][0]) <= tol:
            groups[-1][1] += e.count
        else:
            groups.append([e.energy, e.count])
    if len(groups) < 2:
        raise ValidationError("need at least two distinct observed energies")
    x, y = [], []
    for energy, count in groups:
        g = int(np.count_nonzero(np.abs(levels - energy) <= tol))
        x.append(-energy)
        y.append(math.log(count / g))
    x, y = np.array(x), np.array(y)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


@dataclass
class InstanceMetrics:
    instance: str
    solver: str
    n: int
    ground_energy: float
    best_energy: float
    p_s: float
    t_run: float
    tts: float
    time_to_eps: float
    approximation_ratio: float
    distinct_optimal: int


@dataclass
class TtsReport:
    rows: list[InstanceMetrics]
    target: float
    epsilon: float
    percentiles: dict[str, dict[str, float]] = field(default_factory=dict)


def _percentiles(values: Sequence[float]) -> dict[str, float]:
    # nearest-rank keeps infinite TTS values usable and the percentiles monotone
    v = np.sort(np.asarray(values, dtype=float))
    out = {}
    for q in (25, 50, 75):
        k = max(0, math.ceil(q / 100 * v.size) - 1)
        out[f"p{q}"] = float(v[k])
    return out


def build_report(rows: list[InstanceMetrics], target: float, epsilon: float) -> TtsReport:
    pct: dict[str, dict[str, float]] = {}
    for solver in sorted({r.solver for r in rows}):
        sub = [r for r in rows if r.solver == solver]
        pct[solver] = {
            **{f"tts_{k}": v for k, v in _percentiles([r.tts for r in sub]).items()},
            **{f"p_s_{k}": v for k, v in _percentiles([r.p_s for r in sub]).items()},
        }
    return TtsReport(rows, target, epsilon, pct)
