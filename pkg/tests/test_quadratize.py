import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from annealkit.errors import FormatError, ValidationError
from annealkit.model import QuboModel, qubo_energy
from annealkit.quadratize import (
    AncillaMap,
    PenaltyWarning,
    PolyBinary,
    dumps_poly,
    loads_poly,
    penalty_constraint,
    penalty_weight_bound,
    reduce_to_quadratic,
    spin_poly_to_binary,
    verify_reduction,
)

from . import oracles

CUBIC = spin_poly_to_binary({(0, 1, 2): 1.0})


def random_poly(rng, n, degree, terms):
    items = []
    for _ in range(terms):
        k = int(rng.integers(1, degree + 1))
        key = tuple(sorted(rng.choice(n, size=k, replace=False).tolist()))
        items.append((key, float(rng.normal())))
    return PolyBinary.multilinear(n, items)


@st.composite
def polys(draw, n=5, max_degree=4):
    keys = st.lists(st.integers(0, n - 1), min_size=0, max_size=max_degree, unique=True)
    items = draw(st.lists(st.tuples(keys, st.floats(-4, 4, allow_nan=False)), max_size=8))
    return PolyBinary.multilinear(n, items)


# --- spin to binary ---------------------------------------------------------


def test_cubic_spin_monomial_expansion():
    expected = {(): -1.0, (0,): 2.0, (1,): 2.0, (2,): 2.0, (0, 1): -4.0, (0, 2): -4.0, (1, 2): -4.0, (0, 1, 2): 8.0}
    assert CUBIC.terms == expected


def test_linear_spin_monomial():
    assert spin_poly_to_binary({(0,): 1.0}).terms == {(): -1.0, (0,): 2.0}


def test_spin_binary_energies_agree():
    for bits in itertools.product((0, 1), repeat=3):
        s = [2 * b - 1 for b in bits]
        assert CUBIC.evaluate(bits) == s[0] * s[1] * s[2]


def test_spin_poly_rejects_repeats():
    with pytest.raises(ValidationError):
        spin_poly_to_binary({(0, 0): 1.0})


# --- polynomial algebra ----------------------------------------------------------


@given(polys(), polys())
def test_poly_arithmetic_pointwise(p, q):
    vals_p, vals_q = p.evaluate_all(), q.evaluate_all()
    np.testing.assert_allclose((p + q).evaluate_all(), vals_p + vals_q, atol=1e-9)
    np.testing.assert_allclose((p * q).evaluate_all(), vals_p * vals_q, rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose((p - 2.0).evaluate_all(), vals_p - 2.0, atol=1e-9)


@given(polys())
def test_evaluate_all_matches_evaluate(p):
    vals = p.evaluate_all()
    for mask in range(1 << p.num_vars):
        x = [(mask >> i) & 1 for i in range(p.num_vars)]
        assert vals[mask] == pytest.approx(oracles.poly_value(p.terms, x), abs=1e-9)


def test_poly_validation():
    with pytest.raises(ValidationError):
        PolyBinary(3, {(1, 0): 1.0})
    with pytest.raises(ValidationError):
        PolyBinary(2, {(0, 2): 1.0})
    assert PolyBinary(2, {(0,): 0.0}).terms == {}


# --- penalty ------------------------------------------------------------------


def test_penalty_constraint_values():
    assert penalty_constraint(1, 1, 0, 1.0) == 1
    assert penalty_constraint(1, 1, 1, 1.0) == 0
    assert penalty_constraint(0, 0, 1, 1.0) == 3


def test_penalty_positivity_exhaustive():
    for ti, tj, tij in itertools.product((0, 1), repeat=3):
        q = penalty_constraint(ti, tj, tij, 1.0)
        assert q >= 0
        assert (q == 0) == (tij == ti * tj)


def test_penalty_weight_bound_examples():
    assert penalty_weight_bound(PolyBinary(3, {(0, 1, 2): 1.0})) == 3.0
    assert penalty_weight_bound(PolyBinary(3, {(0, 1): 5.0, (2,): -1.0})) == 1.0


# --- reduction ----------------------------------------------------------------


def test_quadratic_input_unchanged():
    p = PolyBinary(3, {(): 0.5, (0,): 1.0, (0, 2): -2.0, (1, 2): 3.0})
    qubo, amap = reduce_to_quadratic(p)
    assert amap.num_ancillas == 0
    assert qubo == QuboModel(3, {(0, 0): 1.0, (0, 2): -2.0, (1, 2): 3.0}, 0.5)


def test_cubic_pipeline_ground_states():
    qubo, amap = reduce_to_quadratic(CUBIC, 8.0)
    assert amap.records == ((3, 0, 1),)
    energies = {}
    for x in itertools.product((0, 1), repeat=4):
        energies[x] = qubo_energy(qubo, x)
    e0 = min(energies.values())
    ground = [x for x, e in energies.items() if e <= e0 + 1e-9]
    assert all(x[3] == x[0] * x[1] for x in ground)
    projected = {x[:3] for x in ground}
    odd = {b for b in itertools.product((0, 1), repeat=3) if np.prod([2 * v - 1 for v in b]) == -1}
    assert projected == odd


def test_verify_identity_reduction():
    p = PolyBinary(2, {(0, 1): 1.0})
    qubo, amap = reduce_to_quadratic(p)
    assert verify_reduction(p, qubo, amap).passed


def test_verify_cubic_strong_penalty():
    qubo, amap = reduce_to_quadratic(CUBIC, 8.0)
    report = verify_reduction(CUBIC, qubo, amap)
    assert report.passed and report.offset == pytest.approx(0.0)


def test_verify_cubic_tiny_penalty_fails():
    qubo, amap = reduce_to_quadratic(CUBIC, 0.1)
    report = verify_reduction(CUBIC, qubo, amap)
    assert not report.passed
    assert report.violations


def test_bound_penalty_passes_random_degree4():
    rng = np.random.default_rng(4)
    for _ in range(30):
        p = random_poly(rng, 6, 4, 10)
        qubo, amap = reduce_to_quadratic(p)
        assert verify_reduction(p, qubo, amap).passed


@settings(max_examples=40, deadline=None)
@given(polys(n=5, max_degree=5))
def test_conditional_exactness(p):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PenaltyWarning)
        qubo, amap = reduce_to_quadratic(p)
    for mask in range(1 << p.num_vars):
        x = [(mask >> i) & 1 for i in range(p.num_vars)]
        assert qubo_energy(qubo, amap.extend(x)) == pytest.approx(p.evaluate(x), abs=1e-9)


@pytest.mark.parametrize("k", [3, 4, 5, 6, 7])
def test_single_monomial_ancilla_count(k):
    _, amap = reduce_to_quadratic(PolyBinary(k, {tuple(range(k)): 1.0}))
    assert amap.num_ancillas == k - 2


def test_large_penalty_warns():
    with pytest.warns(PenaltyWarning):
        reduce_to_quadratic(CUBIC, 1e4)


def test_ancilla_extend():
    amap = AncillaMap(3, ((3, 0, 1), (4, 2, 3)))
    assert amap.extend([1, 1, 1]) == [1, 1, 1, 1, 1]
    assert amap.extend([1, 0, 1]) == [1, 0, 1, 0, 0]


# --- text format ----------------------------------------------------------------


def test_poly_text_round_trip():
    text = "# cubic\n8 0 1 2\n-4 0 1\n2 0\n-1\n"
    p = loads_poly(text)
    assert p.terms[(0, 1, 2)] == 8.0 and p.const == -1.0
    assert loads_poly(dumps_poly(p), p.num_vars) == p


@pytest.mark.parametrize("text", ["1 0 0\n", "x 1\n", "1 -2\n"])
def test_poly_text_rejects(text):
    with pytest.raises(FormatError):
        loads_poly(text)
