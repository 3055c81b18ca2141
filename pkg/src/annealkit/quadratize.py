"""Reduction of higher-order binary polynomials to QUBO form.

Each reduction step picks a variable pair ``(i, j)``, introduces an
ancilla ``a`` meant to equal ``x_i x_j``, substitutes ``a`` for the pair in
every term of degree three or more, and adds the penalty

    lam * (x_i x_j - 2 a (x_i + x_j) + 3 a)

which is zero exactly when ``a == x_i x_j`` and at least ``lam`` otherwise.
"""

from __future__ import annotations

import itertools
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CapacityError, FormatError, ParameterError, ValidationError
from .model import QuboModel

__all__ = [
    "PolyBinary",
    "AncillaMap",
    "ReductionReport",
    "PenaltyWarning",
    "spin_poly_to_binary",
    "penalty_constraint",
    "penalty_weight_bound",
    "reduce_to_quadratic",
    "verify_reduction",
    "loads_poly",
    "dumps_poly",
]

VERIFY_MAX_ORIGINAL = 16
VERIFY_MAX_TOTAL = 24
PENALTY_RATIO_WARN = 100.0


class PenaltyWarning(UserWarning):
    """Penalty weight dwarfs the problem coefficients (precision loss after rescaling)."""


Monomial = tuple[int, ...]


def _canon(key: Iterable[int]) -> Monomial:
    return tuple(sorted(set(int(k) for k in key)))


@dataclass(frozen=True)
class PolyBinary:
    """Multilinear polynomial over binary variables.

    ``terms`` maps a strictly increasing index tuple to its coefficient; the
    empty tuple holds the constant. Zero coefficients are dropped.
    """

    num_vars: int
    terms: Mapping[Monomial, float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for key, v in self.terms.items():
            key = tuple(int(k) for k in key)
            if any(a >= b for a, b in zip(key, key[1:])):
                raise ValidationError(f"monomial {key} is not a strictly increasing index set")
            if key and not (0 <= key[0] and key[-1] < self.num_vars):
                raise ValidationError(f"monomial {key} out of range [0, {self.num_vars})")
            v = float(v)
            if not math.isfinite(v):
                raise ValidationError(f"coefficient of {key} is not finite")
            if v != 0.0:
                clean[key] = v
        object.__setattr__(self, "terms", dict(sorted(clean.items(), key=lambda kv: (len(kv[0]), kv[0]))))

    @classmethod
    def constant(cls, num_vars: int, c: float) -> "PolyBinary":
        return cls(num_vars, {(): c})

    @classmethod
    def variable(cls, num_vars: int, i: int, coeff: float = 1.0) -> "PolyBinary":
        return cls(num_vars, {(i,): coeff})

    @classmethod
    def multilinear(cls, num_vars: int, items: Iterable[tuple[Iterable[int], float]]) -> "PolyBinary":
        """Collect ``(indices, coeff)`` pairs, applying ``x**2 == x``."""
        acc: dict[Monomial, float] = {}
        for key, v in items:
            k = _canon(key)
            acc[k] = acc.get(k, 0.0) + v
        return cls(num_vars, acc)

    @property
    def degree(self) -> int:
        return max((len(k) for k in self.terms), default=0)

    @property
    def const(self) -> float:
        return self.terms.get((), 0.0)

    def __add__(self, other):
        if not isinstance(other, PolyBinary):
            other = PolyBinary.constant(self.num_vars, other)
        n = max(self.num_vars, other.num_vars)
        return PolyBinary.multilinear(n, itertools.chain(self.terms.items(), other.terms.items()))

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PolyBinary):
            return PolyBinary(self.num_vars, {k: v * other for k, v in self.terms.items()})
        n = max(self.num_vars, other.num_vars)
        items = (
            (a + b, u * v) for a, u in self.terms.items() for b, v in other.terms.items()
        )
        return PolyBinary.multilinear(n, items)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = PolyBinary.constant(self.num_vars, 1.0)
        for _ in range(k):
            out = out * self
        return out

    def evaluate(self, x: Sequence[int]) -> float:
        if len(x) != self.num_vars:
            raise ValidationError(f"assignment has {len(x)} variables, polynomial has {self.num_vars}")
        e = 0.0
        for key, v in self.terms.items():
            if all(x[i] for i in key):
                e += v
        return e

    def evaluate_all(self) -> np.ndarray:
        """Value at every assignment, indexed by bitmask (bit i is x_i)."""
        idx = np.arange(1 << self.num_vars, dtype=np.int64)
        out = np.zeros(idx.shape)
        for key, v in self.terms.items():
            mask = sum(1 << i for i in key)
            out += v * ((idx & mask) == mask)
        return out


@dataclass(frozen=True)
class AncillaMap:
    """Ancilla records ``(ancilla, parent_i, parent_j)`` in creation order."""

    num_original: int
    records: tuple[tuple[int, int, int], ...] = ()

    @property
    def num_ancillas(self) -> int:
        return len(self.records)

    def extend(self, x: Sequence[int]) -> list[int]:
        """Append the consistent ancilla values to an original assignment."""
        full = list(int(b) for b in x)
        for a, i, j in self.records:
            assert a == len(full)
            full.append(full[i] * full[j])
        return full


def spin_poly_to_binary(terms: Mapping[Iterable[int], float], num_vars: int | None = None) -> PolyBinary:
    """Substitute ``s_i = 2 x_i - 1`` into a multilinear spin polynomial.

    Constants are kept, so energies agree exactly on every assignment.
    """
    items = []
    top = -1
    for key, c in terms.items():
        key = tuple(key)
        if len(set(key)) != len(key):
            raise ValidationError(f"spin monomial {key} is not multilinear")
        key = tuple(sorted(key))
        top = max(top, *key) if key else top
        k = len(key)
        for r in range(k + 1):
            for sub in itertools.combinations(key, r):
                items.append((sub, c * (2.0**r) * (-1.0) ** (k - r)))
    n = num_vars if num_vars is not None else top + 1
    return PolyBinary.multilinear(max(n, 1), items)


def penalty_constraint(ti: int, tj: int, tij: int, lam: float) -> float:
    """Penalty enforcing ``tij == ti * tj``."""
    return lam * (ti * tj - 2 * tij * (ti + tj) + 3 * tij)


def penalty_weight_bound(p: PolyBinary) -> float:
    """``1 + 2 * sum |c|`` over monomials of degree three or more."""
    return 1.0 + 2.0 * sum(abs(v) for k, v in p.terms.items() if len(k) >= 3)


def _pick_pair(high: dict[Monomial, float]) -> tuple[int, int]:
    counts: Counter = Counter()
    for key in high:
        counts.update(itertools.combinations(key, 2))
    best = max(counts.values())
    return min(pair for pair, c in counts.items() if c == best)


def reduce_to_quadratic(p: PolyBinary, penalty: float | str = "auto") -> tuple[QuboModel, AncillaMap]:
    """Reduce ``p`` to a QUBO by greedy ancilla substitution.

    Pairs are chosen by how many remaining degree >= 3 terms contain them,
    ties going to the lexicographically smallest pair.
    """
    if penalty == "auto":
        lam = penalty_weight_bound(p)
    else:
        lam = float(penalty)
        if not lam > 0:
            raise ParameterError("penalty must be positive")
    biggest = max((abs(v) for k, v in p.terms.items() if k), default=0.0)
    if p.degree >= 3 and biggest > 0 and lam / biggest > PENALTY_RATIO_WARN:
        warnings.warn(
            f"penalty {lam:g} is {lam / biggest:.0f}x the largest coefficient",
            PenaltyWarning,
            stacklevel=2,
        )

    terms = dict(p.terms)
    records = []
    nxt = p.num_vars
    while True:
        high = {k: v for k, v in terms.items() if len(k) >= 3}
        if not high:
            break
        i, j = _pick_pair(high)
        a = nxt
        nxt += 1
        records.append((a, i, j))
        for key, v in high.items():
            if i in key and j in key:
                del terms[key]
                new = tuple(k for k in key if k != i and k != j) + (a,)
                terms[new] = terms.get(new, 0.0) + v
        for key, v in (((i, j), lam), ((a, i), -2 * lam), ((a, j), -2 * lam), ((a,), 3 * lam)):
            key = tuple(sorted(key))
            terms[key] = terms.get(key, 0.0) + v

    Q: dict[tuple[int, int], float] = {}
    offset = 0.0
    for key, v in terms.items():
        if len(key) == 0:
            offset += v
        elif len(key) == 1:
            Q[(key[0], key[0])] = Q.get((key[0], key[0]), 0.0) + v
        else:
            Q[key] = Q.get(key, 0.0) + v
    return QuboModel(max(nxt, 1), Q, offset), AncillaMap(p.num_vars, tuple(records))


def _qubo_energies(q: QuboModel) -> np.ndarray:
    idx = np.arange(1 << q.num_vars, dtype=np.int64)
    out = np.full(idx.shape, q.offset)
    for (i, j), v in q.Q.items():
        mask = (1 << i) | (1 << j)
        out += v * ((idx & mask) == mask)
    return out


@dataclass
class ReductionReport:
    passed: bool
    energies_match: bool
    ground_sets_match: bool
    offset: float
    max_deviation: float
    original_ground: list[int]
    reduced_ground: list[int]
    violations: list[str] = field(default_factory=list)


def verify_reduction(
    original: PolyBinary, reduced: QuboModel, amap: AncillaMap, tol: float = 1e-9
) -> ReductionReport:
    """Exhaustively check that ``reduced`` reproduces ``original`` after minimising out ancillas.

    Ground states are reported as bitmasks over the original variables.
    """
    n = original.num_vars
    total = reduced.num_vars
    if n > VERIFY_MAX_ORIGINAL or total > VERIFY_MAX_TOTAL:
        raise CapacityError(f"verification limited to {VERIFY_MAX_ORIGINAL} original / {VERIFY_MAX_TOTAL} total variables")
    if total != n + amap.num_ancillas:
        raise ValidationError("reduced model size does not match original plus ancillas")
    orig = original.evaluate_all()
    full = _qubo_energies(reduced).reshape(1 << (total - n), 1 << n)
    proj = full.min(axis=0)
    diff = proj - orig
    offset = float(diff[0])
    max_dev = float(np.max(np.abs(diff - offset)))
    energies_match = max_dev <= tol * (1 + float(np.max(np.abs(orig))))

    orig_ground = np.flatnonzero(orig <= orig.min() + tol).tolist()
    fmin = full.min()
    red_ground = sorted(set(np.flatnonzero((full <= fmin + tol).any(axis=0)).tolist()))
    ground_match = orig_ground == red_ground
    violations = []
    if not energies_match:
        worst = int(np.argmax(np.abs(diff - offset)))
        violations.append(f"assignment {worst:#b}: reduced minimum deviates by {diff[worst] - offset:.6g}")
    if not ground_match:
        violations.append(f"ground sets differ: original {orig_ground}, reduced {red_ground}")
    return ReductionReport(
        energies_match and ground_match, energies_match, ground_match, offset, max_dev,
        orig_ground, red_ground, violations,
    )


def loads_poly(text: str, num_vars: int | None = None) -> PolyBinary:
    """Parse lines ``coeff i1 i2 ... ik``; a bare ``coeff`` is the constant."""
    items = []
    top = -1
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            c = float(parts[0])
            idx = tuple(int(t) for t in parts[1:])
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from exc
        if any(i < 0 for i in idx):
            raise FormatError(f"line {lineno}: negative index")
        if len(set(idx)) != len(idx):
            raise FormatError(f"line {lineno}: repeated index in monomial (input must be multilinear)")
        top = max([top, *idx])
        items.append((idx, c))
    n = num_vars if num_vars is not None else max(top + 1, 1)
    return PolyBinary.multilinear(n, items)


def dumps_poly(p: PolyBinary) -> str:
    lines = []
    for key, v in p.terms.items():
        lines.append(" ".join([repr(v), *map(str, key)]))
    return "\n".join(lines) + "\n"
