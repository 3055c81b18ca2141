import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from annealkit.baseline import simulated_annealing
from annealkit.bench.metrics import (
    InstanceMetrics,
    approximation_ratio,
    beta_eff_fit,
    build_report,
    distinct_optimal,
    success_probability,
    time_to_epsilon,
    tts,
)
from annealkit.errors import CapacityError, ParameterError, ValidationError
from annealkit.model import IsingModel, SampleSet, all_energies, brute_force_ground, random_spin_glass

from . import oracles

M2 = IsingModel(2, {0: 1.0})  # energies: mask0 -1, mask1 +1, mask2 -1, mask3 +1


def test_success_all_none_some():
    assert success_probability(SampleSet.from_counts(M2, {0: 4, 2: 1}), -1.0) == 1.0
    assert success_probability(SampleSet.from_counts(M2, {1: 4}), -1.0) == 0.0
    assert success_probability(SampleSet.from_counts(M2, {0: 3, 1: 7}), -1.0) == pytest.approx(0.3)


def test_success_complement():
    ss = SampleSet.from_counts(M2, {0: 3, 1: 5, 3: 2})
    above = sum(e.count for e in ss.entries if e.energy > -1.0 + 1e-9) / ss.total_reads
    assert success_probability(ss, -1.0) == pytest.approx(1 - above)


def test_tts_values():
    assert tts(0.5, 1.0, 0.99) == pytest.approx(math.log(0.01) / math.log(0.5))
    assert tts(0.5, 1.0, 0.99) == pytest.approx(6.6439, abs=1e-3)
    assert tts(1.0, 2.5) == 2.5
    assert tts(0.0, 1.0) == math.inf


def test_tts_rejects():
    with pytest.raises(ParameterError):
        tts(1.5, 1.0)
    with pytest.raises(ParameterError):
        tts(0.5, 1.0, 1.0)
    with pytest.raises(ParameterError):
        tts(0.5, 0.0)


@given(st.floats(1e-6, 1 - 1e-6), st.floats(1e-6, 1 - 1e-6))
def test_tts_strictly_decreasing(a, b):
    if abs(a - b) < 1e-9:
        return
    lo, hi = min(a, b), max(a, b)
    assert tts(hi, 1.0) < tts(lo, 1.0)


def test_time_to_epsilon_limits():
    ss = SampleSet.from_counts(M2, {0: 1, 1: 3})
    assert time_to_epsilon(ss, 2.0, -1.0, 1e9) == 2.0
    assert time_to_epsilon(ss, 2.0, -1.0, 0.0) == tts(0.25, 2.0)
    with pytest.raises(ParameterError):
        time_to_epsilon(ss, 2.0, -1.0, -1.0)


def test_time_to_epsilon_not_above_tts_on_glasses():
    for seed in range(5):
        m = random_spin_glass(16, seed)
        e0, _ = brute_force_ground(m)
        ss = simulated_annealing(m, sweeps=30, restarts=50, seed=seed)
        p_s = success_probability(ss, e0)
        assert time_to_epsilon(ss, 30.0, e0, 0.05 * abs(e0)) <= tts(p_s, 30.0)


def test_approximation_ratio_endpoints():
    assert approximation_ratio(-5.0, -5.0, 3.0) == 1.0
    assert approximation_ratio(3.0, -5.0, 3.0) == 0.0
    assert approximation_ratio(-1.0, -5.0, 3.0) == 0.5
    with pytest.raises(ValidationError):
        approximation_ratio(0.0, 1.0, 1.0)


def test_distinct_optimal():
    assert distinct_optimal(SampleSet.from_counts(M2, {0: 3, 2: 1, 1: 4}), -1.0) == 2


def test_beta_fit_exact_boltzmann():
    m = IsingModel(3, {0: 0.3, 2: -0.2}, {(0, 1): -0.7, (1, 2): 0.4})
    p = oracles.boltzmann(all_energies(m), 1.0)
    counts = np.random.default_rng(0).multinomial(1_000_000, p)
    ss = SampleSet.from_counts(m, {k: int(c) for k, c in enumerate(counts)})
    beta, r2 = beta_eff_fit(ss, m)
    assert 0.97 <= beta <= 1.03
    assert r2 > 0.99


def test_beta_fit_uniform_sampler():
    m = IsingModel(3, {0: 0.3, 2: -0.2}, {(0, 1): -0.7, (1, 2): 0.4})
    counts = np.random.default_rng(1).multinomial(800_000, np.full(8, 1 / 8))
    ss = SampleSet.from_counts(m, {k: int(c) for k, c in enumerate(counts)})
    beta, _ = beta_eff_fit(ss, m)
    assert abs(beta) < 0.02


def test_beta_fit_degenerate_data():
    with pytest.raises(ValidationError):
        beta_eff_fit(SampleSet.from_counts(M2, {1: 10}), M2)
    with pytest.raises(CapacityError):
        beta_eff_fit(SampleSet.from_counts(IsingModel(21), {0: 1}), IsingModel(21))


def _row(solver, p_s, tts_value):
    return InstanceMetrics("x", solver, 4, -1.0, -1.0, p_s, 1.0, tts_value, tts_value, 1.0, 1)


def test_report_has_percentiles():
    rows = [_row("sa", p, tts(p, 1.0)) for p in (0.1, 0.5, 0.9, 0.0)]
    rows += [_row("sim", 0.5, tts(0.5, 1.0))]
    report = build_report(rows, 0.99, 0.05)
    for solver in ("sa", "sim"):
        for key in ("tts_p25", "tts_p50", "tts_p75", "p_s_p25", "p_s_p50", "p_s_p75"):
            assert key in report.percentiles[solver]
    pct = report.percentiles["sa"]
    assert pct["tts_p25"] <= pct["tts_p50"] <= pct["tts_p75"]
    assert pct["p_s_p50"] == 0.1
