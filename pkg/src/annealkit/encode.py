"""Encoders and decoders for concrete problems.

Covers maximum independent set, grid interface minimisation, integer
factoring, a fifth-power Diophantine residual, and domain-wall encodings of
a discretised scalar potential.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import FormatError, ParameterError, ValidationError
from .model import IsingModel, QuboModel, SpinConfig
from .quadratize import AncillaMap, PolyBinary, reduce_to_quadratic

__all__ = [
    "Graph",
    "GridSpec",
    "PotentialSpec",
    "DomainWallCode",
    "MisDecoding",
    "FactoringCode",
    "FIG2_LABELS",
    "fig2_graph",
    "encode_max_independent_set",
    "decode_mis",
    "encode_interface_min",
    "encode_factoring",
    "encode_diophantine_power4",
    "diophantine_bits",
    "encode_domain_wall_potential",
    "decode_domain_wall",
    "parse_edge_list",
    "format_edge_list",
    "parse_potential",
]


@dataclass(frozen=True)
class Graph:
    num_nodes: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.num_nodes < 1:
            raise ValidationError("graph needs at least one node")
        clean = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValidationError(f"self-loop at node {u}")
            if not (0 <= u < self.num_nodes and 0 <= v < self.num_nodes):
                raise ValidationError(f"edge ({u}, {v}) out of range")
            clean.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(clean))

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def degree(self, i: int) -> int:
        return sum(1 for e in self.edges if i in e)

    def is_independent(self, nodes: Iterable[int]) -> bool:
        chosen = set(nodes)
        return not any(u in chosen and v in chosen for u, v in self.edges)


# Node order of the five-node example network: top-left, top-right,
# bottom-left, bottom-right, centre.
FIG2_LABELS = ("TL", "TR", "BL", "BR", "C")


def fig2_graph() -> Graph:
    TL, TR, BL, BR, C = range(5)
    return Graph(5, frozenset({(TL, BL), (BL, BR), (C, TL), (C, TR), (C, BL), (C, BR)}))


def encode_max_independent_set(
    g: Graph, lam: float = 1.0, lam_prime: float = 1.0, allow_weak_penalty: bool = False
) -> IsingModel:
    """``-lam * sum s_i + lam_prime * sum_edges (1 + s_i)(1 + s_j)``.

    ``lam < 4 * lam_prime`` guarantees that every ground state is an
    independent set; violating it raises unless ``allow_weak_penalty``.
    """
    if not (lam > 0 and lam_prime > 0):
        raise ParameterError("lam and lam_prime must be positive")
    if not lam < 4 * lam_prime and not allow_weak_penalty:
        raise ParameterError(f"lam={lam} must be < 4*lam_prime={4 * lam_prime}")
    h = {i: -lam for i in range(g.num_nodes)}
    J = {}
    offset = 0.0
    for i, j in g.sorted_edges():
        h[i] += lam_prime
        h[j] += lam_prime
        J[(i, j)] = lam_prime
        offset += lam_prime
    return IsingModel(g.num_nodes, h, J, offset)


@dataclass(frozen=True)
class MisDecoding:
    nodes: frozenset
    independent: bool | None


def decode_mis(c: SpinConfig | Sequence[int], g: Graph | None = None) -> MisDecoding:
    """Selected nodes are the +1 spins; independence is checked when a graph is given."""
    spins = c.spins if isinstance(c, SpinConfig) else tuple(c)
    nodes = frozenset(i for i, s in enumerate(spins) if s == 1)
    return MisDecoding(nodes, None if g is None else g.is_independent(nodes))


@dataclass(frozen=True)
class GridSpec:
    side: int

    def __post_init__(self):
        if self.side < 2 or self.side % 2:
            raise ParameterError(f"grid side must be an even integer >= 2, got {self.side}")

    @property
    def num_sites(self) -> int:
        return self.side * self.side

    def index(self, row: int, col: int) -> int:
        return row * self.side + col

    def neighbour_pairs(self) -> list[tuple[int, int]]:
        n = self.side
        pairs = []
        for r in range(n):
            for c in range(n):
                if c + 1 < n:
                    pairs.append((self.index(r, c), self.index(r, c + 1)))
                if r + 1 < n:
                    pairs.append((self.index(r, c), self.index(r + 1, c)))
        return sorted(pairs)


def encode_interface_min(grid: GridSpec, lam: float = 1.0, lam_prime: float = 10.0) -> IsingModel:
    """Unlike-neighbour penalty plus ``lam_prime * (sum s)**2`` population constraint.

    The squared sum couples every pair of sites, so the model is dense.
    """
    if not (lam > 0 and lam_prime > 0):
        raise ParameterError("lam and lam_prime must be positive")
    n = grid.num_sites
    J: dict[tuple[int, int], float] = {}
    offset = lam_prime * n
    for u, v in grid.neighbour_pairs():
        J[(u, v)] = J.get((u, v), 0.0) - lam
        offset += lam
    for i in range(n):
        for j in range(i + 1, n):
            J[(i, j)] = J.get((i, j), 0.0) + 2 * lam_prime
    return IsingModel(n, {}, J, offset)


@dataclass(frozen=True)
class FactoringCode:
    """Bit layout of a factoring encoding.

    ``p_bits``/``q_bits`` list, least significant first, either a variable
    index or the fixed value ``"1"``.
    """

    N: int
    bits_p: int
    bits_q: int
    p_bits: tuple
    q_bits: tuple
    poly: PolyBinary
    ancillas: AncillaMap
    certificate_possible: bool

    @property
    def num_logical(self) -> int:
        return self.poly.num_vars

    def _value(self, layout, x) -> int:
        return sum((1 if b == "1" else int(x[b])) << k for k, b in enumerate(layout))

    def decode(self, x: Sequence[int]) -> tuple[int, int]:
        return self._value(self.p_bits, x), self._value(self.q_bits, x)

    def assignment(self, p: int, q: int) -> list[int]:
        """Logical bit assignment representing ``(p, q)``; fixed bits must agree."""
        x = [0] * self.poly.num_vars
        for value, layout in ((p, self.p_bits), (q, self.q_bits)):
            if value >> len(layout):
                raise ParameterError(f"{value} does not fit in {len(layout)} bits")
            for k, b in enumerate(layout):
                bit = (value >> k) & 1
                if b == "1":
                    if bit != 1:
                        raise ParameterError(f"{value} conflicts with a fixed bit")
                else:
                    x[b] = bit
        return x


def _factor_in_range(N: int, max_p: int, max_q: int) -> bool:
    for p in range(2, min(max_p, N) + 1):
        if N % p == 0 and 2 <= N // p <= max_q:
            return True
    return False


def encode_factoring(
    N: int,
    bits_p: int,
    bits_q: int,
    trivial_penalty: float = 1.0,
    penalty: float | str = "auto",
    reduce: bool = True,
) -> tuple[QuboModel | None, FactoringCode]:
    """Encode ``(N - p q)**2`` plus a penalty on ``p <= 1`` or ``q <= 1``.

    For odd ``N`` the least significant bit of both factors is fixed to 1.
    The zero-energy states are exactly the factor pairs with both factors in
    ``[2, 2**bits - 1]``. With ``reduce=False`` the QUBO is not built (useful
    for large ``N`` where only the polynomial is wanted).
    """
    if N < 4:
        raise ParameterError("N must be >= 4")
    if bits_p < 2 or bits_q < 2:
        raise ParameterError("each factor needs at least 2 bits to exceed 1")
    fix_lsb = N % 2 == 1
    idx = 0
    layouts = []
    for bits in (bits_p, bits_q):
        layout = []
        for k in range(bits):
            if k == 0 and fix_lsb:
                layout.append("1")
            else:
                layout.append(idx)
                idx += 1
        layouts.append(tuple(layout))
    n = idx

    def number(layout):
        out = PolyBinary.constant(n, 0.0)
        for k, b in enumerate(layout):
            out = out + (PolyBinary.constant(n, 2.0**k) if b == "1" else PolyBinary.variable(n, b, 2.0**k))
        return out

    def at_most_one(layout):
        out = PolyBinary.constant(n, 1.0)
        for b in layout[1:]:
            out = out * (1 - PolyBinary.variable(n, b))
        return out

    p, q = number(layouts[0]), number(layouts[1])
    poly = (N - p * q) ** 2
    poly = poly + trivial_penalty * at_most_one(layouts[0]) + trivial_penalty * at_most_one(layouts[1])
    if reduce:
        qubo, amap = reduce_to_quadratic(poly, penalty)
    else:
        qubo, amap = None, AncillaMap(n)
    possible = _factor_in_range(N, 2**bits_p - 1, 2**bits_q - 1)
    code = FactoringCode(N, bits_p, bits_q, layouts[0], layouts[1], poly, amap, possible)
    return qubo, code


def diophantine_bits(values: Sequence[int], width: int) -> list[int]:
    """Bit assignment for ``(x, y, z, t)``, each ``width`` bits, least significant first."""
    bits = []
    for v in values:
        if not 0 <= v < 2**width:
            raise ParameterError(f"{v} does not fit in {width} bits")
        bits.extend((v >> k) & 1 for k in range(width))
    return bits


def encode_diophantine_power4(width: int, lam: float = 1.0) -> PolyBinary:
    """``(x^5 + y^5 - z^5 - t^5)^2 - lam * (eq(x, z) + eq(x, t))`` over four ``width``-bit integers.

    Variable ``v`` in ``(x, y, z, t)`` occupies bits ``v*width ... v*width + width - 1``.
    The equality indicators mark the trivial solutions.
    """
    if width < 1:
        raise ParameterError("width must be >= 1")
    n = 4 * width

    def number(v):
        out = PolyBinary.constant(n, 0.0)
        for k in range(width):
            out = out + PolyBinary.variable(n, v * width + k, 2.0**k)
        return out

    def equal(a, b):
        out = PolyBinary.constant(n, 1.0)
        for k in range(width):
            xa = PolyBinary.variable(n, a * width + k)
            xb = PolyBinary.variable(n, b * width + k)
            out = out * (xa * xb + (1 - xa) * (1 - xb))
        return out

    x, y, z, t = (number(v) for v in range(4))
    residual = x**5 + y**5 - z**5 - t**5
    return residual**2 - lam * (equal(0, 2) + equal(0, 3))


@dataclass(frozen=True)
class PotentialSpec:
    phi_min: float
    delta_phi: float
    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 2:
            raise ValidationError("a potential needs at least 2 levels")
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError("potential values must be finite")
        if not self.delta_phi > 0:
            raise ValidationError("delta_phi must be positive")
        object.__setattr__(self, "values", vals)

    @property
    def levels(self) -> int:
        return len(self.values)

    @property
    def spread(self) -> float:
        return max(self.values) - min(self.values)

    def phi(self, d: int) -> float:
        return self.phi_min + d * self.delta_phi


@dataclass(frozen=True)
class DomainWallCode:
    """Domain-wall layout: ``spins`` chain spins, wall position ``d`` = number of -1 spins."""

    spins: int
    lambda_chain: float
    field_terms: tuple
    potential: PotentialSpec

    @property
    def sector_gap(self) -> float:
        return 4 * self.lambda_chain


def encode_domain_wall_potential(p: PotentialSpec, lam: float | None = None) -> tuple[IsingModel, DomainWallCode]:
    """Ferromagnetic chain with fixed ends (-1 left, +1 right) and telescoping fields.

    In the single-wall sector the configuration with its wall at ``d`` has
    energy exactly ``p.values[d]``. Configurations with three or more walls
    cost at least ``4 * lam`` extra in the chain term. ``lam`` defaults to
    twice the potential spread (1 for a flat potential).
    """
    M = p.levels - 1
    if lam is None:
        lam = 2 * p.spread if p.spread > 0 else 1.0
    if not lam > 0:
        raise ParameterError("lam must be positive")
    U = p.values
    w = [U[k - 1] - U[k] for k in range(1, M + 1)]
    h = {k: w[k] / 2 for k in range(M)}
    # virtual boundary spins: -1 before spin 0, +1 after spin M-1
    h[0] += lam
    h[M - 1] -= lam
    J = {(k, k + 1): -lam for k in range(M - 1)}
    offset = (U[0] + U[M]) / 2 + lam * (M - 1)
    model = IsingModel(M, h, J, offset)
    return model, DomainWallCode(M, lam, tuple(wk / 2 for wk in w), p)


def decode_domain_wall(code: DomainWallCode, c: SpinConfig | Sequence[int]) -> tuple[int, bool]:
    """Wall position and whether the configuration is a single-wall state."""
    spins = c.spins if isinstance(c, SpinConfig) else tuple(c)
    if len(spins) != code.spins:
        raise ValidationError(f"configuration has {len(spins)} spins, code has {code.spins}")
    d = sum(1 for s in spins if s == -1)
    valid = all(s == -1 for s in spins[:d]) and all(s == 1 for s in spins[d:])
    return d, valid


def parse_edge_list(text: str) -> Graph:
    """Parse ``n m`` followed by ``m`` lines ``i j``."""
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise FormatError("empty edge list")
    try:
        n, m = (int(t) for t in lines[0])
        edges = [(int(a), int(b)) for a, b in lines[1:]]
    except ValueError as exc:
        raise FormatError(f"malformed edge list: {exc}") from exc
    if len(edges) != m:
        raise FormatError(f"header declares {m} edges, found {len(edges)}")
    return Graph(n, frozenset(edges))


def format_edge_list(g: Graph) -> str:
    edges = g.sorted_edges()
    return "\n".join([f"{g.num_nodes} {len(edges)}", *(f"{i} {j}" for i, j in edges)]) + "\n"


def parse_potential(text: str) -> PotentialSpec:
    try:
        obj = json.loads(text)
        return PotentialSpec(float(obj["phi_min"]), float(obj["delta_phi"]), tuple(obj["values"]))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise FormatError(f"malformed potential: {exc}") from exc
