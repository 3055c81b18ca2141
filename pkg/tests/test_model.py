import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from annealkit import encode
from annealkit.errors import DimensionError, FormatError, ParameterError, ValidationError
from annealkit.model import (
    IsingModel,
    QuboModel,
    SampleSet,
    ScalingWarning,
    SpinConfig,
    all_energies,
    brute_force_ground,
    dumps_model,
    ising_energy,
    ising_to_qubo,
    loads_model,
    qubo_energy,
    qubo_to_ising,
    random_spin_glass,
    scale_to_range,
)

from . import oracles


def random_model(rng, n, offset=True):
    h = {i: float(rng.normal()) for i in range(n) if rng.random() < 0.7}
    J = {(i, j): float(rng.normal()) for i, j in itertools.combinations(range(n), 2) if rng.random() < 0.5}
    return IsingModel(n, h, J, float(rng.normal()) if offset else 0.0)


@st.composite
def models(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    coef = st.floats(-5, 5, allow_nan=False)
    h = draw(st.dictionaries(st.integers(0, n - 1), coef, max_size=n))
    pairs = list(itertools.combinations(range(n), 2))
    J = draw(st.dictionaries(st.sampled_from(pairs), coef, max_size=len(pairs))) if pairs else {}
    return IsingModel(n, h, J, draw(coef))


# --- energies -------------------------------------------------------------


def test_aligned_pair_energy():
    assert ising_energy(IsingModel(2, {}, {(0, 1): 1.0}), (1, 1)) == 1.0


def test_single_field_energy():
    assert ising_energy(IsingModel(1, {0: 1.0}), (-1,)) == -1.0


def test_fig2_mis_selection_energy():
    m = encode.encode_max_independent_set(encode.fig2_graph())
    spins = [-1] * 5
    for label in ("TL", "TR", "BR"):
        spins[encode.FIG2_LABELS.index(label)] = 1
    assert ising_energy(m, spins) == pytest.approx(-1.0)


def test_energy_dimension_mismatch():
    with pytest.raises(DimensionError):
        ising_energy(IsingModel(2), (1,))


def test_qubo_energy_examples():
    assert qubo_energy(QuboModel(1, {(0, 0): -1.0}), (1,)) == -1.0
    assert qubo_energy(QuboModel(2, {(0, 1): 2.0}), (1, 1)) == 2.0


def test_qubo_matches_ising_on_random_models():
    rng = np.random.default_rng(0)
    for _ in range(100):
        m = random_model(rng, 8)
        s = tuple(int(v) for v in rng.choice([-1, 1], size=8))
        x = tuple((v + 1) // 2 for v in s)
        assert qubo_energy(ising_to_qubo(m), x) == pytest.approx(ising_energy(m, s), abs=1e-9)


@given(models(), st.floats(-3, 3, allow_nan=False))
def test_energy_bilinearity(m, alpha):
    for mask in range(1 << m.num_vars):
        c = SpinConfig(mask, m.num_vars)
        assert ising_energy(m.scaled(alpha), c) == pytest.approx(alpha * ising_energy(m, c), abs=1e-9)


@given(models())
def test_spin_flip_symmetry_without_fields(m):
    m = IsingModel(m.num_vars, {}, m.J, m.offset)
    for mask in range(1 << m.num_vars):
        c = SpinConfig(mask, m.num_vars)
        assert ising_energy(m, c) == pytest.approx(ising_energy(m, -c), abs=1e-12)


@given(models())
def test_vectorised_energies_match_scalar(m):
    e = all_energies(m)
    for mask in range(1 << m.num_vars):
        assert e[mask] == pytest.approx(oracles.energy(m.h, m.J, m.offset, oracles.spins_of(mask, m.num_vars)), abs=1e-9)


# --- conversions ----------------------------------------------------------


def test_ising_to_qubo_single_field():
    q = ising_to_qubo(IsingModel(1, {0: 1.0}))
    assert q.Q == {(0, 0): 2.0}
    assert q.offset == -1.0


def test_zero_model_conversions():
    q = ising_to_qubo(IsingModel(3, {}, {}, 2.5))
    assert not any(q.Q.values()) and q.offset == 2.5
    m = qubo_to_ising(QuboModel(3, {}, 0.0))
    assert not any(m.h.values()) and not any(m.J.values()) and m.offset == 0.0


def test_qubo_to_ising_single_diagonal():
    m = qubo_to_ising(QuboModel(1, {(0, 0): 1.0}))
    assert m.h == {0: 0.5}
    assert m.offset == 0.5


def test_round_trip_energies_exhaustive():
    rng = np.random.default_rng(1)
    m = random_model(rng, 6)
    back = qubo_to_ising(ising_to_qubo(m))
    np.testing.assert_allclose(all_energies(back), all_energies(m), atol=1e-12)
    q = QuboModel(6, {(i, j): float(rng.normal()) for i in range(6) for j in range(i, 6) if rng.random() < 0.6}, 0.3)
    mi = qubo_to_ising(q)
    for mask in range(64):
        c = SpinConfig(mask, 6)
        assert ising_energy(mi, c) == pytest.approx(qubo_energy(q, c.bits), abs=1e-12)


@settings(max_examples=30)
@given(models(max_n=10))
def test_conversion_exactness(m):
    q = ising_to_qubo(m)
    for mask in range(1 << m.num_vars):
        c = SpinConfig(mask, m.num_vars)
        e = ising_energy(m, c)
        assert abs(qubo_energy(q, c.bits) - e) <= 1e-9 * (1 + abs(e))


# --- brute force ----------------------------------------------------------


def test_brute_force_single_spin():
    e, ground = brute_force_ground(IsingModel(1, {0: 1.0}))
    assert e == -1.0
    assert [c.spins for c in ground] == [(-1,)]


def test_brute_force_ferromagnetic_ring():
    m = IsingModel(4, {}, {(0, 1): -1, (1, 2): -1, (2, 3): -1, (0, 3): -1})
    e, ground = brute_force_ground(m)
    assert e == -4.0
    assert sorted(c.spins for c in ground) == [(-1,) * 4, (1,) * 4]


def test_brute_force_fig2():
    m = encode.encode_max_independent_set(encode.fig2_graph())
    e, ground = brute_force_ground(m)
    assert e == pytest.approx(-1.0)
    assert len(ground) == 1
    sel = {encode.FIG2_LABELS[i] for i, s in enumerate(ground[0].spins) if s == 1}
    assert sel == {"TL", "TR", "BR"}


def test_brute_force_matches_independent_enumeration():
    rng = np.random.default_rng(2)
    for _ in range(20):
        m = random_model(rng, 10)
        e, ground = brute_force_ground(m)
        e_ref, ground_ref = oracles.enumerate_ground(m.h, m.J, m.offset, 10)
        assert e == pytest.approx(e_ref, abs=1e-9)
        assert sorted(c.spins for c in ground) == ground_ref


# --- instance generation ---------------------------------------------------


def test_random_glass_deterministic():
    assert random_spin_glass(8, 3) == random_spin_glass(8, 3)
    assert random_spin_glass(8, 3) != random_spin_glass(8, 4)


def test_random_glass_complete_graph_count():
    m = random_spin_glass(5, 0, density=1.0)
    assert len(m.J) == 10
    assert set(m.J.values()) <= {-1.0, 1.0}


def test_random_glass_uniform_law_range():
    m = random_spin_glass(6, 1, "uniform")
    assert all(-1 <= v <= 1 for v in m.J.values())


def test_random_glass_bad_law():
    with pytest.raises(ParameterError):
        random_spin_glass(4, 0, "gauss")


# --- range scaling -------------------------------------------------------


def test_scale_in_range_is_identity():
    m = IsingModel(2, {0: 0.5}, {(0, 1): -0.5})
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        out, factor = scale_to_range(m, (-2, 2), (-1, 1))
    assert factor == 1.0 and out == m


def test_scale_halves_field():
    with pytest.warns(ScalingWarning):
        out, factor = scale_to_range(IsingModel(1, {0: 4.0}), (-2, 2), (-1, 1))
    assert factor == 0.5
    assert out.h == {0: 2.0}


def test_scaling_preserves_argmin():
    rng = np.random.default_rng(3)
    for _ in range(50):
        m = IsingModel(8, {i: float(rng.normal(0, 3)) for i in range(8)},
                       {(i, j): float(rng.normal(0, 3)) for i, j in itertools.combinations(range(8), 2)})
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ScalingWarning)
            scaled, _ = scale_to_range(m, (-2, 2), (-1, 1))
        assert [c.mask for c in brute_force_ground(scaled)[1]] == [c.mask for c in brute_force_ground(m)[1]]


# --- configs, samples, serialisation ---------------------------------------


def test_spin_config_conventions():
    c = SpinConfig.from_spins([1, -1, 1])
    assert c.mask == 0b101
    assert c.bits == (1, 0, 1)
    assert c.bitstring() == "+-+"
    assert SpinConfig.from_bitstring("+-+") == c
    assert (-c).spins == (-1, 1, -1)
    with pytest.raises(ValidationError):
        SpinConfig.from_spins([1, 0])


def test_sample_set_ordering_and_csv():
    m = IsingModel(2, {0: 1.0})
    ss = SampleSet.from_masks(m, [1, 0, 0, 3, 2])
    assert ss.total_reads == 5
    assert list(ss.energies()) == sorted(ss.energies())
    assert ss.lowest.energy == -1.0
    lines = ss.to_csv().splitlines()
    assert lines[0] == "config_bitstring,energy,count"
    assert lines[1:3] == ["-+,-1.0,1", "--,-1.0,2"]
    ss.check(m)
    assert ss.merged(ss).total_reads == 10


def test_model_json_round_trip():
    m = IsingModel(3, {0: 1.5}, {(0, 2): -1.0}, 0.25)
    assert loads_model(dumps_model(m)) == m
    q = QuboModel(2, {(0, 0): 1.0, (0, 1): -2.0}, 1.0)
    assert loads_model(dumps_model(q)) == q


@pytest.mark.parametrize("text", ["{", '{"format": "other"}', "[]"])
def test_model_json_rejects_garbage(text):
    with pytest.raises(FormatError):
        loads_model(text)


@pytest.mark.parametrize(
    "kwargs",
    [dict(num_vars=0), dict(num_vars=2, h={2: 1.0}), dict(num_vars=2, J={(1, 0): 1.0}), dict(num_vars=1, h={0: math.nan})],
)
def test_model_validation(kwargs):
    with pytest.raises(ValidationError):
        IsingModel(**kwargs)
