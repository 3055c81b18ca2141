"""Minor-embedding application, chain-break decoding and repetition (QAC) codes.

Embeddings are supplied by the caller; this module validates and applies
them but does not search for them.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .encode import parse_edge_list
from .errors import FormatError, ParameterError, ValidationError
from .model import IsingModel, SampleSet, SpinConfig

__all__ = [
    "HardwareGraph",
    "Embedding",
    "EmbeddingReport",
    "ChainStats",
    "QacCode",
    "grid_hardware",
    "king_hardware",
    "parse_hardware",
    "parse_embedding",
    "default_chain_strength",
    "validate_embedding",
    "apply_embedding",
    "decode_majority",
    "decode_samples",
    "qac_encode",
    "qac_decode",
]


@dataclass(frozen=True)
class HardwareGraph:
    num_qubits: int
    edges: frozenset
    name: str = "custom"

    def __post_init__(self):
        clean = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValidationError(f"hardware self-loop at qubit {u}")
            if not (0 <= u < self.num_qubits and 0 <= v < self.num_qubits):
                raise ValidationError(f"hardware edge ({u}, {v}) out of range")
            clean.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(clean))

    def neighbours(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {q: set() for q in range(self.num_qubits)}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj


def grid_hardware(rows: int, cols: int) -> HardwareGraph:
    edges = set()
    for r in range(rows):
        for c in range(cols):
            q = r * cols + c
            if c + 1 < cols:
                edges.add((q, q + 1))
            if r + 1 < rows:
                edges.add((q, q + cols))
    return HardwareGraph(rows * cols, frozenset(edges), f"grid-{rows}x{cols}")


def king_hardware(rows: int, cols: int) -> HardwareGraph:
    """Grid plus both diagonals in every plaquette."""
    edges = set(grid_hardware(rows, cols).edges)
    for r in range(rows - 1):
        for c in range(cols - 1):
            q = r * cols + c
            edges.add((q, q + cols + 1))
            edges.add((q + 1, q + cols))
    return HardwareGraph(rows * cols, frozenset(edges), f"king-{rows}x{cols}")


def parse_hardware(text: str, name: str = "file") -> HardwareGraph:
    g = parse_edge_list(text)
    return HardwareGraph(g.num_nodes, g.edges, name)


@dataclass(frozen=True)
class Embedding:
    """Logical variable -> chain of physical qubits."""

    chains: Mapping[int, frozenset]

    def __post_init__(self):
        object.__setattr__(
            self, "chains", {int(k): frozenset(int(q) for q in v) for k, v in sorted(self.chains.items())}
        )

    @classmethod
    def identity(cls, n: int) -> "Embedding":
        return cls({i: frozenset({i}) for i in range(n)})

    def chain_list(self, i: int) -> list[int]:
        return sorted(self.chains[i])


def parse_embedding(text: str) -> Embedding:
    try:
        obj = json.loads(text)
        return Embedding({int(k): frozenset(int(q) for q in v) for k, v in obj.items()})
    except (json.JSONDecodeError, AttributeError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed embedding: {exc}") from exc


@dataclass
class EmbeddingReport:
    valid: bool
    violations: list[str] = field(default_factory=list)


def _connected(nodes: frozenset, adj: dict[int, set[int]]) -> bool:
    start = next(iter(nodes))
    seen = {start}
    todo = deque([start])
    while todo:
        u = todo.popleft()
        for v in adj.get(u, ()):
            if v in nodes and v not in seen:
                seen.add(v)
                todo.append(v)
    return seen == nodes


def _inter_chain_edges(hw: HardwareGraph, a: frozenset, b: frozenset) -> list[tuple[int, int]]:
    return sorted((u, v) for u, v in hw.edges if (u in a and v in b) or (u in b and v in a))


def validate_embedding(hw: HardwareGraph, logical: IsingModel, e: Embedding) -> EmbeddingReport:
    """List every violated embedding condition."""
    problems = []
    adj = hw.neighbours()
    owner: dict[int, int] = {}
    for i in range(logical.num_vars):
        chain = e.chains.get(i)
        if not chain:
            problems.append(f"logical {i}: missing or empty chain")
            continue
        bad = sorted(q for q in chain if not 0 <= q < hw.num_qubits)
        if bad:
            problems.append(f"logical {i}: qubits {bad} not in hardware")
            continue
        for q in sorted(chain):
            if q in owner:
                problems.append(f"qubit {q} shared by chains {owner[q]} and {i}")
            owner[q] = i
        if not _connected(chain, adj):
            problems.append(f"logical {i}: chain {sorted(chain)} is disconnected")
    extra = sorted(k for k in e.chains if not 0 <= k < logical.num_vars)
    if extra:
        problems.append(f"chains for unknown logical variables {extra}")
    for i, j in logical.edges():
        if i in e.chains and j in e.chains and e.chains[i] and e.chains[j]:
            if not _inter_chain_edges(hw, e.chains[i], e.chains[j]):
                problems.append(f"logical coupling ({i}, {j}) has no physical edge between its chains")
    return EmbeddingReport(not problems, problems)


def default_chain_strength(logical: IsingModel) -> float:
    """``2 * sum |J| + sum |h|``, floored at 1 for an empty model."""
    s = 2 * sum(abs(v) for v in logical.J.values()) + sum(abs(v) for v in logical.h.values())
    return s if s > 0 else 1.0


def apply_embedding(
    hw: HardwareGraph, logical: IsingModel, e: Embedding, chain_strength: float | None = None
) -> IsingModel:
    """Physical model: fields split evenly over each chain, couplings split evenly over
    the available inter-chain edges, intra-chain edges set to ``-chain_strength``."""
    report = validate_embedding(hw, logical, e)
    if not report.valid:
        raise ValidationError("invalid embedding: " + "; ".join(report.violations))
    if chain_strength is None:
        chain_strength = default_chain_strength(logical)
    if not chain_strength > 0:
        raise ParameterError("chain_strength must be positive")
    h: dict[int, float] = {}
    J: dict[tuple[int, int], float] = {}
    for i, v in logical.h.items():
        chain = e.chain_list(i)
        for q in chain:
            h[q] = h.get(q, 0.0) + v / len(chain)
    for (i, j), v in logical.J.items():
        if v == 0:
            continue
        edges = _inter_chain_edges(hw, e.chains[i], e.chains[j])
        for edge in edges:
            J[edge] = J.get(edge, 0.0) + v / len(edges)
    for i in range(logical.num_vars):
        chain = e.chains[i]
        for u, v in hw.edges:
            if u in chain and v in chain:
                J[(u, v)] = J.get((u, v), 0.0) - chain_strength
    return IsingModel(hw.num_qubits, h, J, logical.offset)


@dataclass
class ChainStats:
    chain_break_fraction: float
    broken: dict[int, int]
    reads: int = 1


def _coin(seed: int, chain: int) -> int:
    return 1 if np.random.default_rng([seed, chain]).integers(2) else -1


def decode_majority(
    e: Embedding, physical_config: SpinConfig | Sequence[int], seed: int = 0
) -> tuple[SpinConfig, ChainStats]:
    """Majority vote per chain; an exact tie is settled by a coin keyed on ``(seed, chain)``."""
    spins = physical_config.spins if isinstance(physical_config, SpinConfig) else tuple(physical_config)
    logical = []
    broken = {}
    for i, chain in e.chains.items():
        try:
            votes = [spins[q] for q in sorted(chain)]
        except IndexError:
            raise ValidationError(f"configuration does not cover chain {i}") from None
        total = sum(votes)
        logical.append(1 if total > 0 else -1 if total < 0 else _coin(seed, i))
        broken[i] = int(abs(total) != len(votes))
    frac = sum(broken.values()) / len(broken) if broken else 0.0
    return SpinConfig.from_spins(logical), ChainStats(frac, broken)


def decode_samples(e: Embedding, logical: IsingModel, samples: SampleSet, seed: int = 0) -> tuple[SampleSet, ChainStats]:
    """Decode every read of a physical sample set."""
    counts: dict[int, int] = {}
    broken = {i: 0 for i in e.chains}
    for entry in samples.entries:
        cfg, stats = decode_majority(e, entry.config, seed)
        counts[cfg.mask] = counts.get(cfg.mask, 0) + entry.count
        for i, b in stats.broken.items():
            broken[i] += b * entry.count
    reads = samples.total_reads
    frac = sum(broken.values()) / (len(broken) * reads) if broken else 0.0
    return SampleSet.from_counts(logical, counts), ChainStats(frac, broken, reads)


@dataclass(frozen=True)
class QacCode:
    """Repetition code: logical qubit ``i`` is carried by physical qubits ``i*k ... i*k + k - 1``."""

    k: int
    num_logical: int
    penalty: float

    @property
    def embedding(self) -> Embedding:
        return Embedding({i: frozenset(range(i * self.k, (i + 1) * self.k)) for i in range(self.num_logical)})

    def codeword(self, c: SpinConfig | Sequence[int]) -> SpinConfig:
        spins = c.spins if isinstance(c, SpinConfig) else tuple(c)
        return SpinConfig.from_spins(s for s in spins for _ in range(self.k))


def qac_encode(logical: IsingModel, k: int = 3, penalty: float | None = None) -> tuple[IsingModel, QacCode]:
    """``k`` coupled replicas of ``logical`` with all-to-all ferromagnetic penalty inside each tuple.

    ``penalty`` defaults to ``4 * (sum |h| + sum |J|)``.
    """
    if k < 3 or k % 2 == 0:
        raise ParameterError(f"k must be an odd integer >= 3, got {k}")
    if penalty is None:
        penalty = 4 * logical.abs_sum() or 1.0
    if not penalty > 0:
        raise ParameterError("penalty must be positive")
    n = logical.num_vars
    h = {}
    J = {}
    for c in range(k):
        for i, v in logical.h.items():
            h[i * k + c] = v
        for (i, j), v in logical.J.items():
            J[(i * k + c, j * k + c)] = v
    for i in range(n):
        for a in range(k):
            for b in range(a + 1, k):
                J[(i * k + a, i * k + b)] = -penalty
    return IsingModel(n * k, h, J, k * logical.offset), QacCode(k, n, penalty)


def qac_decode(code: QacCode, physical_config: SpinConfig | Sequence[int], seed: int = 0) -> SpinConfig:
    logical, _ = decode_majority(code.embedding, physical_config, seed)
    return logical
