"""Singlet statistics and the ideal simulator, checked against the closed
form -cos(theta_a - theta_b) and against scalar replay of the run loop."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellkit.core import observed_correlations
from bellkit.quantum import (
    TAU,
    AngleSet,
    canonical_angles,
    ideal_correlations,
    ideal_s,
    joint_outcome_table,
    sample_run,
    simulate_experiment,
    singlet_correlation,
)
from bellkit.rng import GOLDEN, MASK64, Rng, derive_seed

SQRT2 = math.sqrt(2.0)

angles_st = st.floats(0.0, TAU, exclude_max=True, allow_nan=False)


def test_angle_set_range_checked():
    with pytest.raises(ValueError, match="alpha_prime"):
        AngleSet(0.0, TAU, 1.0, 2.0)
    with pytest.raises(ValueError, match="beta"):
        AngleSet(0.0, 1.0, -0.5, 2.0)


def test_wrapped_normalises():
    a = AngleSet.wrapped(-math.pi / 2.0, TAU + 0.25, 1.0, 2.0)
    assert a.alpha == pytest.approx(3.0 * math.pi / 2.0)
    assert a.alpha_prime == pytest.approx(0.25)


def test_angle_selection():
    a = AngleSet(0.1, 0.2, 0.3, 0.4)
    assert a.a_angle(0) == 0.1 and a.a_angle(1) == 0.2
    assert a.b_angle(0) == 0.3 and a.b_angle(1) == 0.4


def test_equal_angles_anticorrelate():
    # same analyzer direction must give opposite signs
    assert singlet_correlation(1.234, 1.234) == -1.0
    t = joint_outcome_table(0.0)
    assert t.p_pp == 0.0 and t.p_mm == 0.0
    assert t.p_pm == 0.25 * 2.0 and t.expectation == -1.0


@given(angles_st, angles_st)
@settings(max_examples=200)
def test_joint_table_matches_closed_form(ta, tb):
    t = joint_outcome_table(ta - tb)
    assert sum(t.probs) == pytest.approx(1.0, abs=1e-12)
    assert min(t.probs) >= 0.0
    assert t.expectation == pytest.approx(singlet_correlation(ta, tb), abs=1e-12)
    # each wing is a fair coin regardless of the other side's angle
    assert t.marginal_a_plus == pytest.approx(0.5, abs=1e-12)
    assert t.marginal_b_plus == pytest.approx(0.5, abs=1e-12)


def test_joint_table_validation():
    with pytest.raises(ValueError, match="sum to 1"):
        from bellkit.quantum import JointTable

        JointTable(0.5, 0.5, 0.5, 0.5)


def test_canonical_angles_values():
    c = ideal_correlations(canonical_angles())
    expected = (1.0 / SQRT2, 1.0 / SQRT2, 1.0 / SQRT2, -1.0 / SQRT2)
    assert c == pytest.approx(expected, rel=1e-12)
    assert ideal_s(canonical_angles()) == pytest.approx(2.0 * SQRT2, rel=1e-12)


@given(angles_st, angles_st, angles_st, angles_st)
@settings(max_examples=200)
def test_ideal_s_never_exceeds_quantum_limit(a0, a1, b0, b1):
    assert abs(ideal_s(AngleSet(a0, a1, b0, b1))) <= 2.0 * SQRT2 + 1e-9


def test_sample_run_consumes_one_word():
    rng = Rng(99)
    before = rng.state
    sample_run(canonical_angles(), 1, 0, rng)
    assert rng.state == (before + GOLDEN) & MASK64


def test_sample_run_rejects_bad_settings():
    with pytest.raises(ValueError, match="settings"):
        sample_run(canonical_angles(), 2, 0, Rng(0))


def test_sample_run_inverse_cdf_order():
    """Outcome pairs follow the fixed cell order (+,+),(+,-),(-,+),(-,-)
    as the uniform sweeps upward."""
    angles = AngleSet(0.0, math.pi / 2.0, math.pi / 3.0, 0.0)
    t = joint_outcome_table(angles.a_angle(0) - angles.b_angle(0))

    class _Fixed:
        def __init__(self, u):
            self.u = u

        def next_float(self):
            return self.u

    eps = 1e-9
    assert sample_run(angles, 0, 0, _Fixed(t.p_pp - eps)) == (1, 1)
    assert sample_run(angles, 0, 0, _Fixed(t.p_pp + eps)) == (1, -1)
    assert sample_run(angles, 0, 0, _Fixed(t.p_pp + t.p_pm + eps)) == (-1, 1)
    assert sample_run(angles, 0, 0, _Fixed(1.0 - eps)) == (-1, -1)


def test_simulator_matches_scalar_replay():
    """The vectorised simulator is the run loop: same settings stream, one
    outcome uniform per run, bit-identical signs."""
    angles = AngleSet.wrapped(0.3, 1.9, 4.4, 2.6)
    for seed in (0, 7, 123456):
        n = 257
        runs = simulate_experiment(angles, n, seed)
        srng = Rng(derive_seed(seed, 0))
        orng = Rng(derive_seed(seed, 1))
        for i in range(n):
            word = srng.next_u64()
            x, y = word >> 63, (word >> 62) & 1
            a, b = sample_run(angles, x, y, orng)
            assert (runs.x[i], runs.y[i]) == (x, y)
            assert (runs.a[i], runs.b[i]) == (a, b)


def test_simulator_deterministic_and_seed_sensitive():
    r1 = simulate_experiment(canonical_angles(), 500, 42)
    r2 = simulate_experiment(canonical_angles(), 500, 42)
    r3 = simulate_experiment(canonical_angles(), 500, 43)
    assert np.array_equal(r1.a, r2.a) and np.array_equal(r1.b, r2.b)
    assert not (np.array_equal(r1.a, r3.a) and np.array_equal(r1.b, r3.b))


def test_simulator_rejects_empty():
    with pytest.raises(ValueError, match="n must be"):
        simulate_experiment(canonical_angles(), 0, 1)


def test_empirical_correlations_track_closed_form():
    # 40_000 runs put each cell near 10_000; 5 sigma of a +-1 mean is
    # about 0.05 there, so 0.05 is a stable but meaningful tolerance
    angles = AngleSet.wrapped(0.0, 1.1, 2.7, 5.2)
    runs = simulate_experiment(angles, 40_000, 2024)
    summary = observed_correlations(runs)
    ideal = ideal_correlations(angles)
    for k in range(4):
        assert summary.corr[k] == pytest.approx(ideal[k], abs=0.05)


def test_canonical_summary_concentrates_at_quantum_limit():
    runs = simulate_experiment(canonical_angles(), 60_000, 7)
    summary = observed_correlations(runs)
    assert summary.s == pytest.approx(2.0 * SQRT2, abs=4.0 * summary.se)
    assert summary.se == pytest.approx(
        math.sqrt(sum((1.0 - c * c) / k for c, k in zip(summary.corr, summary.counts))),
        rel=1e-12,
    )
