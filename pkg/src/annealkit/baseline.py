"""Classical reference solvers: simulated annealing and greedy descent."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DimensionError, ParameterError
from .model import IsingModel, SampleSet, SpinConfig

__all__ = ["geometric_betas", "metropolis_sweeps", "simulated_annealing", "greedy_descent"]

DEFAULT_BETA = (0.1, 10.0)
DEFAULT_SWEEPS = 1000
_CHUNK_SWEEPS = 64


def geometric_betas(beta0: float, beta1: float, sweeps: int) -> np.ndarray:
    if sweeps < 1:
        raise ParameterError("sweeps must be >= 1")
    if not 0 < beta0 < beta1:
        raise ParameterError(f"need 0 < beta0 < beta1, got {beta0}, {beta1}")
    if sweeps == 1:
        return np.array([beta1])
    return np.geomspace(beta0, beta1, sweeps)


def metropolis_sweeps(m: IsingModel, betas: Sequence[float], restarts: int, seed) -> np.ndarray:
    """Run ``restarts`` independent Metropolis chains; return final spins, shape (restarts, n).

    Each sweep visits spins in index order. Restart ``r`` draws from its own
    stream spawned from ``seed``, so its result does not depend on how many
    other restarts run alongside it.
    """
    betas = np.asarray(betas, dtype=float)
    n = m.num_vars
    h = m.field_vector()
    J = m.coupling_matrix()
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(restarts)]
    spins = np.stack([2.0 * rng.integers(0, 2, size=n) - 1.0 for rng in streams])
    for start in range(0, betas.size, _CHUNK_SWEEPS):
        chunk = betas[start : start + _CHUNK_SWEEPS]
        u = np.stack([rng.random((chunk.size, n)) for rng in streams], axis=1)
        for k, beta in enumerate(chunk):
            for i in range(n):
                local = h[i] + spins @ J[:, i]
                delta = -2.0 * spins[:, i] * local
                flip = (delta <= 0) | (u[k, :, i] < np.exp(-beta * np.maximum(delta, 0)))
                spins[flip, i] *= -1
    return spins.astype(np.int8)


def _masks(spins: np.ndarray) -> np.ndarray:
    weights = 1 << np.arange(spins.shape[1], dtype=np.int64)
    return ((spins > 0).astype(np.int64) * weights).sum(axis=1)


def simulated_annealing(
    m: IsingModel,
    sweeps: int = DEFAULT_SWEEPS,
    beta_schedule: tuple[float, float] = DEFAULT_BETA,
    restarts: int = 1,
    seed=0,
) -> SampleSet:
    """Metropolis annealing with a geometric inverse-temperature ramp; one read per restart."""
    if restarts < 1:
        raise ParameterError("restarts must be >= 1")
    betas = geometric_betas(beta_schedule[0], beta_schedule[1], sweeps)
    spins = metropolis_sweeps(m, betas, restarts, seed)
    return SampleSet.from_masks(m, _masks(spins))


def greedy_descent(m: IsingModel, start: SpinConfig | Sequence[int], seed=0) -> SpinConfig:
    """Flip the single spin with the largest energy decrease until none decreases it.

    Ties go to the lowest index, so ``seed`` does not affect the result; it is
    accepted for signature parity with the other solvers.
    """
    s = np.array(start.spins if isinstance(start, SpinConfig) else tuple(start), dtype=float)
    if s.size != m.num_vars:
        raise DimensionError(f"configuration has {s.size} spins, model has {m.num_vars}")
    h = m.field_vector()
    J = m.coupling_matrix()
    while True:
        delta = -2.0 * s * (h + J @ s)
        i = int(np.argmin(delta))
        if delta[i] >= -1e-12:
            return SpinConfig.from_spins(int(v) for v in s)
        s[i] = -s[i]
