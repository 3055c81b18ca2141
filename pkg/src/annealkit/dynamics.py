"""Closed-system state-vector simulation of transverse-field annealing.

The simulated Hamiltonian is

    H(s) = A(s) * (-sum_i X_i)
         + B(s) * (C(s) * sum_i h_i Z_i + sum_{i<j} J_ij Z_i Z_j + offset)
         + g(s) * sum_{(i,j)} w_ij X_i X_j

with ``hbar = 1``. Basis index bit ``i`` set means qubit ``i`` has
``Z_i = +1`` (spin +1), matching the bitmask convention of
:mod:`annealkit.model`.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import CapacityError, ParameterError, ValidationError
from .model import IsingModel, SampleSet, SpinConfig, _energies_range
from .schedule import Envelope, Schedule, SPath, evaluate

__all__ = [
    "StateVector",
    "SpectrumTrace",
    "AnnealResult",
    "MAX_QUBITS",
    "MAX_DENSE_QUBITS",
    "prepare_driver_ground",
    "prepare_basis_state",
    "evolve",
    "sample_measurements",
    "hamiltonian_matrix",
    "instantaneous_spectrum",
    "min_gap",
    "landau_zener_prob",
    "landau_zener_schedule",
    "landau_zener_sweep",
    "adiabatic_time_estimate",
    "anneal_run",
    "derive_seed",
]

logger = logging.getLogger(__name__)

MAX_QUBITS = 22
MAX_DENSE_QUBITS = 12
NORM_TOL = 1e-8
DEGENERACY_TOL = 1e-9


def _check_qubits(n: int, limit: int = MAX_QUBITS) -> None:
    if n < 1:
        raise ValidationError("need at least one qubit")
    if n > limit:
        raise CapacityError(f"{n} qubits exceeds limit {limit}")


@dataclass
class StateVector:
    """Normalised amplitudes over ``2**n`` basis states. Mutated in place by :func:`evolve`."""

    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _check_qubits(self.n)
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << self.n,):
            raise ValidationError(f"expected {1 << self.n} amplitudes, got {self.amplitudes.shape}")
        if abs(self.norm() - 1.0) > NORM_TOL:
            raise ValidationError(f"state not normalised (norm {self.norm():.12g})")

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def fidelity(self, other: "StateVector") -> float:
        """``|<other|self>|**2``; global phase is irrelevant."""
        return float(abs(np.vdot(other.amplitudes, self.amplitudes)) ** 2)

    def copy(self) -> "StateVector":
        return StateVector(self.n, self.amplitudes.copy())


def prepare_driver_ground(n: int) -> StateVector:
    """Uniform superposition, the ground state of ``-sum X_i``."""
    _check_qubits(n)
    return StateVector(n, np.full(1 << n, 2.0 ** (-n / 2), dtype=np.complex128))


def prepare_basis_state(c: SpinConfig) -> StateVector:
    _check_qubits(c.n)
    amp = np.zeros(1 << c.n, dtype=np.complex128)
    amp[c.mask] = 1.0
    return StateVector(c.n, amp)


def _diagonals(m: IsingModel) -> tuple[np.ndarray, np.ndarray]:
    """(field part, coupling part + offset) of the problem diagonal."""
    size = 1 << m.num_vars
    fields = IsingModel(m.num_vars, m.h, {}, 0.0)
    couplings = IsingModel(m.num_vars, {}, m.J, m.offset)
    return _energies_range(fields, 0, size), _energies_range(couplings, 0, size)


def _catalyst_diagonal(n: int, pairs) -> np.ndarray:
    """``sum w X_i X_j`` in the Hadamard-rotated basis (bit 0 means X = +1)."""
    idx = np.arange(1 << n, dtype=np.int64)
    out = np.zeros(idx.shape)
    for i, j, w in pairs:
        out += w * (1 - 2 * ((idx >> i) & 1)) * (1 - 2 * ((idx >> j) & 1))
    return out


def _hadamard_all(psi: np.ndarray, n: int) -> np.ndarray:
    """Apply the normalised Hadamard gate to every qubit."""
    out = psi.reshape((2,) * n)
    for axis in range(n):
        a = np.take(out, 0, axis=axis)
        b = np.take(out, 1, axis=axis)
        out = np.stack(((a + b), (a - b)), axis=axis)
    return out.reshape(-1) * 2.0 ** (-n / 2)


def _rotate_x(psi: np.ndarray, n: int, theta: float) -> None:
    """In place: apply ``exp(1j * theta * X)`` to every qubit."""
    c, s = math.cos(theta), 1j * math.sin(theta)
    for i in range(n):
        view = psi.reshape(-1, 2, 1 << i)
        a = view[:, 0, :].copy()
        b = view[:, 1, :]
        view[:, 0, :] = c * a + s * b
        view[:, 1, :] = s * a + c * b


def evolve(
    m: IsingModel,
    sch: Schedule,
    psi0: StateVector,
    dt: float,
    return_drift: bool = False,
):
    """Integrate the Schrodinger equation with symmetric second-order splitting.

    Each step evaluates the schedule at the step midpoint and applies half a
    diagonal phase, the transverse rotation (with the catalyst exchange
    phase in the Hadamard basis when present), then the other half of the
    diagonal phase. The step count is ``ceil(tau / dt)`` with the step
    shortened to fit the path exactly. The state is renormalised once at the
    end; ``return_drift=True`` also returns the norm error removed there.
    """
    if not dt > 0:
        raise ParameterError("dt must be positive")
    n = m.num_vars
    _check_qubits(n)
    if psi0.n != n:
        raise ValidationError(f"state has {psi0.n} qubits, model has {n}")
    tau = sch.duration
    steps = max(1, math.ceil(tau / dt - 1e-9))
    h = tau / steps
    fdiag, cdiag = _diagonals(m)
    cat = _catalyst_diagonal(n, sch.catalyst.pairs) if sch.catalyst is not None else None
    psi = psi0.amplitudes.copy()
    for k in range(steps):
        v = evaluate(sch, (k + 0.5) * h)
        half = np.exp(-0.5j * h * v.B * (v.C * fdiag + cdiag))
        psi *= half
        _rotate_x(psi, n, h * v.A)
        if cat is not None and v.g != 0.0:
            psi = _hadamard_all(psi, n)
            psi *= np.exp(-1j * h * v.g * cat)
            psi = _hadamard_all(psi, n)
        psi *= half
    norm = float(np.sqrt(np.vdot(psi, psi).real))
    drift = abs(norm - 1.0)
    if drift > 1e-10:
        logger.debug("norm drift %.3e over %d steps", drift, steps)
    out = StateVector(n, psi / norm)
    return (out, drift) if return_drift else out


def sample_measurements(psi: StateVector, shots: int, seed, m: IsingModel | None = None) -> SampleSet:
    """Draw ``shots`` i.i.d. computational-basis outcomes from ``|amp|**2``."""
    if shots < 1:
        raise ParameterError("shots must be positive")
    if m is None:
        m = IsingModel(psi.n)
    if m.num_vars != psi.n:
        raise ValidationError("model and state sizes differ")
    p = psi.probabilities()
    p = p / p.sum()
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, p)
    nz = np.flatnonzero(counts)
    return SampleSet.from_counts(m, dict(zip(nz.tolist(), counts[nz].tolist())))


def _driver_matrix(n: int) -> np.ndarray:
    size = 1 << n
    idx = np.arange(size)
    H = np.zeros((size, size))
    for i in range(n):
        H[idx ^ (1 << i), idx] -= 1.0
    return H


def _catalyst_matrix(n: int, pairs) -> np.ndarray:
    size = 1 << n
    idx = np.arange(size)
    H = np.zeros((size, size))
    for i, j, w in pairs:
        H[idx ^ ((1 << i) | (1 << j)), idx] += w
    return H


def hamiltonian_matrix(m: IsingModel, sch: Schedule, s: float) -> np.ndarray:
    """Dense real-symmetric ``H(s)``."""
    _check_qubits(m.num_vars, MAX_DENSE_QUBITS)
    A, B, C = sch.A(s), sch.B(s), sch.C(s)
    fdiag, cdiag = _diagonals(m)
    H = A * _driver_matrix(m.num_vars)
    H[np.diag_indices_from(H)] += B * (C * fdiag + cdiag)
    if sch.catalyst is not None:
        g = sch.catalyst.g(s)
        if g:
            H += g * _catalyst_matrix(m.num_vars, sch.catalyst.pairs)
    return H


@dataclass
class SpectrumTrace:
    """Lowest eigenvalues of ``H(s)`` on a grid of ``s`` values."""

    s: np.ndarray
    energies: np.ndarray
    tol: float = DEGENERACY_TOL
    gaps: np.ndarray = field(init=False)

    def __post_init__(self):
        self.s = np.asarray(self.s, dtype=float)
        self.energies = np.asarray(self.energies, dtype=float)
        self.gaps = np.array([_gap(row, self.tol) for row in self.energies])


def _gap(levels: np.ndarray, tol: float) -> float:
    """Distance from the ground level to the first level above the degenerate manifold."""
    above = levels[levels > levels[0] + tol]
    return float(above[0] - levels[0]) if above.size else 0.0


def instantaneous_spectrum(m: IsingModel, sch: Schedule, s_grid, m_levels: int = 2) -> SpectrumTrace:
    """Dense diagonalisation at each grid point.

    When every computed level lies inside the ground manifold the gap is
    reported as 0; request enough levels to see past a known degeneracy.
    """
    _check_qubits(m.num_vars, MAX_DENSE_QUBITS)
    size = 1 << m.num_vars
    m_levels = min(int(m_levels), size)
    if m_levels < 1:
        raise ParameterError("m_levels must be >= 1")
    rows = []
    for s in s_grid:
        H = hamiltonian_matrix(m, sch, float(s))
        rows.append(scipy.linalg.eigh(H, eigvals_only=True, subset_by_index=[0, m_levels - 1]))
    return SpectrumTrace(np.asarray(s_grid, dtype=float), np.array(rows))


def min_gap(trace: SpectrumTrace) -> tuple[float, float]:
    """Grid minimum of the gap refined by a parabola through the bracketing points."""
    if trace.s.size == 0:
        raise ValidationError("empty spectrum trace")
    g = trace.gaps
    i = int(np.argmin(g))
    if i == 0 or i == g.size - 1:
        return float(g[i]), float(trace.s[i])
    x0, x1, x2 = (float(x) for x in trace.s[i - 1 : i + 2])
    y0, y1, y2 = (float(y) for y in g[i - 1 : i + 2])
    curv = y0 - 2 * y1 + y2
    step = x1 - x0
    if abs((x2 - x1) - step) <= 1e-12 * max(abs(x2), 1.0):
        # uniform spacing: exact symmetry gives the centre point exactly
        if curv <= 0:
            return y1, x1
        shift = 0.5 * (y0 - y2) / curv
        return y1 - 0.125 * (y0 - y2) ** 2 / curv, x1 + step * shift
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom
    if a <= 0:
        return float(y1), float(x1)
    c = y1 - a * x1 * x1 - b * x1
    xv = -b / (2 * a)
    xv = min(max(xv, x0), x2)
    return float(a * xv * xv + b * xv + c), float(xv)


def landau_zener_prob(delta: float, v: float) -> float:
    """Diabatic excitation probability ``exp(-pi * delta**2 / (2 v))``."""
    if not v > 0:
        raise ParameterError("sweep rate v must be positive")
    if delta < 0:
        raise ParameterError("delta must be nonnegative")
    return math.exp(-math.pi * delta * delta / (2 * v))


def landau_zener_schedule(delta: float, v: float, T: float) -> tuple[IsingModel, Schedule]:
    """Two-level sweep ``H(t) = (v t / 2) Z - (delta / 2) X`` for ``t`` in ``[-T, T]``.

    Realised as a one-qubit model with ``h = 1``, a constant driver
    envelope ``delta / 2`` and a problem envelope ramping from ``-vT/2`` to
    ``vT/2``.
    """
    if not (v > 0 and T > 0):
        raise ParameterError("v and T must be positive")
    A = Envelope.constant(delta / 2)
    B = Envelope.tabulated([(0.0, -v * T / 2), (1.0, v * T / 2)])
    return IsingModel(1, {0: 1.0}), Schedule(A, B, SPath(((2 * T, 0.0, 1.0),)))


def landau_zener_sweep(delta: float, v: float, T: float | None = None, dt: float = 0.01, return_state: bool = False):
    """Simulated excitation probability for a full sweep through the avoided crossing.

    Starts in the instantaneous ground state at ``t = -T`` and returns the
    population of the instantaneous excited state at ``t = T``.
    """
    if T is None:
        T = max(100.0 / v, 20.0 * max(delta, 1.0) / v)
    m, sch = landau_zener_schedule(delta, v, T)
    _, v0 = np.linalg.eigh(hamiltonian_matrix(m, sch, 0.0))
    psi0 = StateVector(1, v0[:, 0].astype(np.complex128))
    psi = evolve(m, sch, psi0, dt)
    _, v1 = np.linalg.eigh(hamiltonian_matrix(m, sch, 1.0))
    p_exc = float(abs(np.vdot(v1[:, 1], psi.amplitudes)) ** 2)
    return (p_exc, psi) if return_state else p_exc


def _problem_derivative(m: IsingModel, sch: Schedule, s: float) -> np.ndarray:
    """``dH/ds`` without the identity (offset) contribution."""
    fdiag, cdiag = _diagonals(m)
    cdiag = cdiag - m.offset
    dA, dB, dC = sch.A.derivative(s), sch.B.derivative(s), sch.C.derivative(s)
    B, C = sch.B(s), sch.C(s)
    D = dA * _driver_matrix(m.num_vars)
    D[np.diag_indices_from(D)] += dB * (C * fdiag + cdiag) + B * dC * fdiag
    if sch.catalyst is not None:
        dg = sch.catalyst.g.derivative(s)
        if dg:
            D += dg * _catalyst_matrix(m.num_vars, sch.catalyst.pairs)
    return D


def adiabatic_time_estimate(m: IsingModel, sch: Schedule, trace: SpectrumTrace) -> float:
    """Heuristic runtime scale ``max_s ||dH/ds|| / gap_min**2`` over the trace grid.

    Not a rigorous bound: constants are dropped. Infinite when the minimum
    gap vanishes. Depends only on the envelopes, never on the time path.
    """
    _check_qubits(m.num_vars, MAX_DENSE_QUBITS)
    gmin, _ = min_gap(trace)
    norm = 0.0
    for s in trace.s:
        ev = np.linalg.eigvalsh(_problem_derivative(m, sch, float(s)))
        norm = max(norm, float(max(abs(ev[0]), abs(ev[-1]))))
    if gmin <= 0:
        return math.inf
    return norm / gmin**2


def derive_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    """Per-run seed mixed from a master seed and a run index."""
    return np.random.SeedSequence([int(master_seed), int(index)])


@dataclass
class AnnealResult:
    final_state: StateVector
    samples: SampleSet
    wall_time: float
    num_qubits: int
    schedule: Schedule
    norm_drift: float = 0.0


def anneal_run(
    m: IsingModel,
    sch: Schedule,
    init: str | SpinConfig = "driver_ground",
    dt: float = 0.01,
    shots: int = 1000,
    seed=0,
) -> AnnealResult:
    """Prepare, evolve and measure. A :class:`SpinConfig` ``init`` starts from that basis state."""
    start = time.perf_counter()
    if isinstance(init, SpinConfig):
        psi0 = prepare_basis_state(init)
    elif init == "driver_ground":
        psi0 = prepare_driver_ground(m.num_vars)
    else:
        raise ParameterError(f"unknown initial state {init!r}")
    psi, drift = evolve(m, sch, psi0, dt, return_drift=True)
    samples = sample_measurements(psi, shots, seed, m)
    return AnnealResult(psi, samples, time.perf_counter() - start, m.num_vars, sch, drift)
