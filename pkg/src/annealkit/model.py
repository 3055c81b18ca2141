"""Ising/QUBO data model, energies, conversions and exact oracles.

Spin configurations are bitmasks: bit ``i`` set means spin ``i`` is +1.
The same convention indexes computational-basis states in
:mod:`annealkit.dynamics`, so ``all_energies(m)[mask]`` is the diagonal of
the problem Hamiltonian.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CapacityError, DimensionError, FormatError, ParameterError, ValidationError

__all__ = [
    "IsingModel",
    "QuboModel",
    "SpinConfig",
    "SampleEntry",
    "SampleSet",
    "ScalingWarning",
    "ising_energy",
    "qubo_energy",
    "ising_to_qubo",
    "qubo_to_ising",
    "all_energies",
    "brute_force_ground",
    "random_spin_glass",
    "scale_to_range",
    "dumps_model",
    "loads_model",
]

logger = logging.getLogger(__name__)

BRUTE_FORCE_MAX_VARS = 26
TIE_TOL = 1e-9
_CHUNK_BITS = 20

ISING_FORMAT = "annealkit-ising-v1"
QUBO_FORMAT = "annealkit-qubo-v1"


class ScalingWarning(UserWarning):
    """Coefficient auto-scaling shrank the model and with it every energy gap."""


def _check_finite(value: float, what: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{what} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class SpinConfig:
    """A spin configuration stored as a bitmask (bit set means spin +1)."""

    mask: int
    n: int

    def __post_init__(self):
        if self.n < 0 or self.mask < 0 or self.mask >> self.n:
            raise ValidationError(f"mask {self.mask} does not fit in {self.n} spins")

    @classmethod
    def from_spins(cls, spins: Iterable[int]) -> "SpinConfig":
        mask = 0
        n = 0
        for i, s in enumerate(spins):
            if s == 1:
                mask |= 1 << i
            elif s != -1:
                raise ValidationError(f"spin values must be +1 or -1, got {s!r}")
            n = i + 1
        return cls(mask, n)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "SpinConfig":
        """Build from binary values, 1 meaning spin +1."""
        return cls.from_spins(2 * int(b) - 1 for b in bits)

    @property
    def spins(self) -> tuple[int, ...]:
        return tuple(1 if (self.mask >> i) & 1 else -1 for i in range(self.n))

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.mask >> i) & 1 for i in range(self.n))

    def __len__(self) -> int:
        return self.n

    def __iter__(self):
        return iter(self.spins)

    def __neg__(self) -> "SpinConfig":
        return SpinConfig(self.mask ^ ((1 << self.n) - 1), self.n)

    def bitstring(self) -> str:
        """Little-endian '+'/'-' rendering, qubit 0 first."""
        return "".join("+" if (self.mask >> i) & 1 else "-" for i in range(self.n))

    @classmethod
    def from_bitstring(cls, text: str) -> "SpinConfig":
        return cls.from_spins(1 if ch == "+" else -1 if ch in "-−" else 0 for ch in text)


def _as_spins(c, n: int) -> tuple[int, ...]:
    spins = c.spins if isinstance(c, SpinConfig) else tuple(int(s) for s in c)
    if len(spins) != n:
        raise DimensionError(f"configuration has {len(spins)} spins, model has {n}")
    return spins


@dataclass(frozen=True)
class IsingModel:
    """Energy ``offset + sum h_i s_i + sum_{i<j} J_ij s_i s_j`` over spins ``s_i = +-1``."""

    num_vars: int
    h: Mapping[int, float] = field(default_factory=dict)
    J: Mapping[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        n = int(self.num_vars)
        if n < 1:
            raise ValidationError("num_vars must be positive")
        h = {}
        for i, v in sorted(self.h.items()):
            i = int(i)
            if not 0 <= i < n:
                raise ValidationError(f"field index {i} out of range [0, {n})")
            h[i] = _check_finite(v, f"h[{i}]")
        J = {}
        for key, v in sorted(self.J.items()):
            i, j = (int(k) for k in key)
            if not i < j:
                raise ValidationError(f"coupling key ({i}, {j}) must satisfy i < j")
            if not (0 <= i and j < n):
                raise ValidationError(f"coupling ({i}, {j}) out of range [0, {n})")
            J[(i, j)] = _check_finite(v, f"J[{i},{j}]")
        object.__setattr__(self, "num_vars", n)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "offset", _check_finite(self.offset, "offset"))

    def scaled(self, alpha: float) -> "IsingModel":
        return IsingModel(
            self.num_vars,
            {i: alpha * v for i, v in self.h.items()},
            {k: alpha * v for k, v in self.J.items()},
            alpha * self.offset,
        )

    def field_vector(self) -> np.ndarray:
        h = np.zeros(self.num_vars)
        for i, v in self.h.items():
            h[i] = v
        return h

    def coupling_matrix(self) -> np.ndarray:
        """Symmetric coupling matrix with zero diagonal."""
        J = np.zeros((self.num_vars, self.num_vars))
        for (i, j), v in self.J.items():
            J[i, j] = J[j, i] = v
        return J

    def edges(self) -> list[tuple[int, int]]:
        return [k for k, v in self.J.items() if v != 0]

    def abs_sum(self) -> float:
        """``sum |h| + sum |J|``."""
        return sum(abs(v) for v in self.h.values()) + sum(abs(v) for v in self.J.values())


@dataclass(frozen=True)
class QuboModel:
    """Energy ``offset + sum_{i<=j} Q_ij x_i x_j`` over binary ``x_i``."""

    num_vars: int
    Q: Mapping[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        n = int(self.num_vars)
        if n < 1:
            raise ValidationError("num_vars must be positive")
        Q = {}
        for key, v in sorted(self.Q.items()):
            i, j = (int(k) for k in key)
            if not i <= j:
                raise ValidationError(f"QUBO key ({i}, {j}) must satisfy i <= j")
            if not (0 <= i and j < n):
                raise ValidationError(f"QUBO key ({i}, {j}) out of range [0, {n})")
            Q[(i, j)] = _check_finite(v, f"Q[{i},{j}]")
        object.__setattr__(self, "num_vars", n)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "offset", _check_finite(self.offset, "offset"))


def ising_energy(m: IsingModel, c: SpinConfig | Sequence[int]) -> float:
    """Energy of ``c`` under ``m``, summed in ascending index order."""
    s = _as_spins(c, m.num_vars)
    e = m.offset
    for i, v in m.h.items():
        e += v * s[i]
    for (i, j), v in m.J.items():
        e += v * s[i] * s[j]
    return e


def qubo_energy(m: QuboModel, x: Sequence[int]) -> float:
    x = tuple(int(b) for b in x)
    if len(x) != m.num_vars:
        raise DimensionError(f"assignment has {len(x)} variables, model has {m.num_vars}")
    e = m.offset
    for (i, j), v in m.Q.items():
        e += v * x[i] * x[j]
    return e


def ising_to_qubo(m: IsingModel) -> QuboModel:
    """Rewrite ``m`` over binary variables via ``s = 2x - 1``; energies are preserved."""
    Q: dict[tuple[int, int], float] = {}
    offset = m.offset
    for i, v in m.h.items():
        Q[(i, i)] = Q.get((i, i), 0.0) + 2 * v
        offset -= v
    for (i, j), v in m.J.items():
        Q[(i, j)] = Q.get((i, j), 0.0) + 4 * v
        Q[(i, i)] = Q.get((i, i), 0.0) - 2 * v
        Q[(j, j)] = Q.get((j, j), 0.0) - 2 * v
        offset += v
    return QuboModel(m.num_vars, Q, offset)


def qubo_to_ising(m: QuboModel) -> IsingModel:
    """Rewrite ``m`` over spins via ``x = (s + 1) / 2``; energies are preserved."""
    h: dict[int, float] = {}
    J: dict[tuple[int, int], float] = {}
    offset = m.offset
    for (i, j), v in m.Q.items():
        if i == j:
            h[i] = h.get(i, 0.0) + v / 2
            offset += v / 2
        else:
            J[(i, j)] = J.get((i, j), 0.0) + v / 4
            h[i] = h.get(i, 0.0) + v / 4
            h[j] = h.get(j, 0.0) + v / 4
            offset += v / 4
    return IsingModel(m.num_vars, h, J, offset)


def _energies_range(m: IsingModel, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    spin = {}

    def s(i):
        if i not in spin:
            spin[i] = (((idx >> i) & 1) * 2 - 1).astype(np.int8)
        return spin[i]

    e = np.full(idx.shape, m.offset)
    for i, v in m.h.items():
        if v:
            e += v * s(i)
    for (i, j), v in m.J.items():
        if v:
            e += v * (s(i) * s(j))
    return e


def all_energies(m: IsingModel) -> np.ndarray:
    """Energy of every configuration, indexed by bitmask."""
    if m.num_vars > BRUTE_FORCE_MAX_VARS:
        raise CapacityError(f"{m.num_vars} spins exceeds enumeration limit {BRUTE_FORCE_MAX_VARS}")
    return _energies_range(m, 0, 1 << m.num_vars)


def brute_force_ground(m: IsingModel, tol: float = TIE_TOL) -> tuple[float, list[SpinConfig]]:
    """Exact minimum energy and every configuration within ``tol`` of it."""
    n = m.num_vars
    if n > BRUTE_FORCE_MAX_VARS:
        raise CapacityError(f"{n} spins exceeds enumeration limit {BRUTE_FORCE_MAX_VARS}")
    total = 1 << n
    chunk = 1 << _CHUNK_BITS
    best = math.inf
    kept: dict[int, float] = {}
    for start in range(0, total, chunk):
        e = _energies_range(m, start, min(total, start + chunk))
        best = min(best, float(e.min()))
        for k in np.flatnonzero(e <= best + tol):
            kept[int(k) + start] = float(e[k])
        kept = {k: v for k, v in kept.items() if v <= best + tol}
    # exact recomputation in the canonical summation order
    ground = sorted(kept)
    energies = {k: ising_energy(m, SpinConfig(k, n)) for k in ground}
    best = min(energies.values())
    configs = [SpinConfig(k, n) for k in ground if energies[k] <= best + tol]
    return best, configs


def random_spin_glass(n: int, seed: int, coupling_law: str = "pm1", density: float = 1.0) -> IsingModel:
    """Random zero-field glass; each pair coupled independently with probability ``density``.

    ``coupling_law`` is ``"pm1"`` for +-1 couplings or ``"uniform"`` for
    couplings drawn from [-1, 1].
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    if not 0 < density <= 1:
        raise ParameterError(f"density must lie in (0, 1], got {density}")
    rng = np.random.default_rng(seed)
    pairs = list(itertools.combinations(range(n), 2))
    keep = rng.random(len(pairs)) < density
    if coupling_law in ("pm1", "+-1", "±1"):
        values = rng.choice([-1.0, 1.0], size=len(pairs))
    elif coupling_law == "uniform":
        values = rng.uniform(-1.0, 1.0, size=len(pairs))
    else:
        raise ParameterError(f"unknown coupling law {coupling_law!r}")
    J = {p: float(v) for p, v, k in zip(pairs, values, keep) if k}
    return IsingModel(n, {}, J, 0.0)


def _range_factor(v: float, lo: float, hi: float) -> float:
    if v > hi:
        return hi / v
    if v < lo:
        return lo / v
    return 1.0


def scale_to_range(
    m: IsingModel, h_range: tuple[float, float], j_range: tuple[float, float]
) -> tuple[IsingModel, float]:
    """Shrink all coefficients uniformly so that every ``h`` and ``J`` fits its range.

    The factor never exceeds 1. Shrinking compresses every energy gap,
    including penalty gaps that encode constraints, so a
    :class:`ScalingWarning` is emitted whenever the factor is below 1.
    """
    for name, (lo, hi) in (("h_range", h_range), ("j_range", j_range)):
        if not lo < hi:
            raise ParameterError(f"{name} is empty: [{lo}, {hi}]")
        if not lo < 0 < hi:
            raise ParameterError(f"{name} must contain 0 in its interior")
    factor = 1.0
    for v in m.h.values():
        factor = min(factor, _range_factor(v, *h_range))
    for v in m.J.values():
        factor = min(factor, _range_factor(v, *j_range))
    if factor == 1.0:
        return m, 1.0
    msg = f"coefficients scaled by {factor:.6g}; penalty gaps shrink by the same factor"
    logger.warning(msg)
    warnings.warn(msg, ScalingWarning, stacklevel=2)
    return m.scaled(factor), factor


@dataclass(frozen=True)
class SampleEntry:
    config: SpinConfig
    energy: float
    count: int


@dataclass(frozen=True)
class SampleSet:
    """Multiset of measured configurations, sorted by energy then bitstring."""

    entries: tuple[SampleEntry, ...]

    def __post_init__(self):
        for e in self.entries:
            if e.count < 1:
                raise ValidationError("sample counts must be positive")
        ordered = tuple(sorted(self.entries, key=lambda e: (e.energy, e.config.bitstring())))
        object.__setattr__(self, "entries", ordered)

    @property
    def total_reads(self) -> int:
        return sum(e.count for e in self.entries)

    @classmethod
    def from_masks(cls, m: IsingModel, masks: Iterable[int]) -> "SampleSet":
        masks = np.asarray(list(masks) if not isinstance(masks, np.ndarray) else masks, dtype=np.int64)
        if masks.size == 0:
            raise ValidationError("a sample set needs at least one read")
        uniq, counts = np.unique(masks, return_counts=True)
        entries = []
        for k, c in zip(uniq.tolist(), counts.tolist()):
            cfg = SpinConfig(k, m.num_vars)
            entries.append(SampleEntry(cfg, ising_energy(m, cfg), c))
        return cls(tuple(entries))

    @classmethod
    def from_counts(cls, m: IsingModel, counts: Mapping[int, int]) -> "SampleSet":
        entries = []
        for k, c in counts.items():
            if c:
                cfg = SpinConfig(int(k), m.num_vars)
                entries.append(SampleEntry(cfg, ising_energy(m, cfg), int(c)))
        return cls(tuple(entries))

    def energies(self) -> np.ndarray:
        return np.array([e.energy for e in self.entries])

    def counts(self) -> np.ndarray:
        return np.array([e.count for e in self.entries], dtype=np.int64)

    @property
    def lowest(self) -> SampleEntry:
        return self.entries[0]

    def merged(self, other: "SampleSet") -> "SampleSet":
        acc: dict[SpinConfig, SampleEntry] = {}
        for e in self.entries + other.entries:
            if e.config in acc:
                prev = acc[e.config]
                acc[e.config] = SampleEntry(e.config, prev.energy, prev.count + e.count)
            else:
                acc[e.config] = e
        return SampleSet(tuple(acc.values()))

    def check(self, m: IsingModel, rtol: float = 1e-9) -> None:
        """Raise if any stored energy disagrees with ``m``."""
        for e in self.entries:
            ref = ising_energy(m, e.config)
            if abs(ref - e.energy) > rtol * max(1.0, abs(ref)):
                raise ValidationError(f"stored energy {e.energy} != {ref} for {e.config.bitstring()}")

    def to_csv(self) -> str:
        lines = ["config_bitstring,energy,count"]
        for e in self.entries:
            lines.append(f"{e.config.bitstring()},{e.energy!r},{e.count}")
        return "\n".join(lines) + "\n"


def dumps_model(m: IsingModel | QuboModel) -> str:
    """Serialise to the annealkit JSON instance format."""
    if isinstance(m, IsingModel):
        obj = {
            "format": ISING_FORMAT,
            "num_vars": m.num_vars,
            "h": {str(i): v for i, v in m.h.items()},
            "J": {f"{i},{j}": v for (i, j), v in m.J.items()},
            "offset": m.offset,
        }
    else:
        obj = {
            "format": QUBO_FORMAT,
            "num_vars": m.num_vars,
            "Q": {f"{i},{j}": v for (i, j), v in m.Q.items()},
            "offset": m.offset,
        }
    return json.dumps(obj)


def _parse_pair(key: str) -> tuple[int, int]:
    parts = key.split(",")
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise FormatError(f"malformed pair key {key!r}")
    return int(parts[0]), int(parts[1])


def loads_model(text: str) -> IsingModel | QuboModel:
    """Parse the annealkit JSON instance format (Ising or QUBO)."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise FormatError("instance must be a JSON object")
    fmt = obj.get("format")
    try:
        n = int(obj["num_vars"])
        offset = float(obj.get("offset", 0.0))
        if fmt == ISING_FORMAT:
            h = {}
            for k, v in obj.get("h", {}).items():
                if not k.isdigit():
                    raise FormatError(f"malformed field key {k!r}")
                h[int(k)] = float(v)
            J = {_parse_pair(k): float(v) for k, v in obj.get("J", {}).items()}
            return IsingModel(n, h, J, offset)
        if fmt == QUBO_FORMAT:
            Q = {_parse_pair(k): float(v) for k, v in obj.get("Q", {}).items()}
            return QuboModel(n, Q, offset)
    except (KeyError, TypeError, AttributeError) as exc:
        raise FormatError(f"malformed instance: {exc}") from exc
    raise FormatError(f"unknown instance format {fmt!r}")
