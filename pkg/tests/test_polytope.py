"""Behavior tables and the local polytope: facet values, membership calls,
and the linear-program route cross-checked against the facet route."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellkit.lhv import DeterministicStrategy, enumerate_deterministic
from bellkit.polytope import (
    FACET_PATTERNS,
    Behavior,
    BehaviorClass,
    behavior_from_strategy,
    bit_to_sign,
    chsh_facets,
    classify,
    is_local_mixture,
    local_vertices,
    mixture,
    mixture_weights,
    pr_box,
    quantum_behavior,
    sign_to_bit,
    validate,
)
from bellkit.quantum import AngleSet, canonical_angles

SQRT2 = math.sqrt(2.0)

angle_st = st.floats(0.0, 2.0 * math.pi, exclude_max=True, allow_nan=False)


def test_sign_bit_round_trip():
    assert sign_to_bit(1) == 0 and sign_to_bit(-1) == 1
    assert bit_to_sign(0) == 1 and bit_to_sign(1) == -1
    with pytest.raises(ValueError, match="sign"):
        sign_to_bit(0)


def test_facet_patterns():
    assert len(FACET_PATTERNS) == 8
    assert FACET_PATTERNS[0] == (1, 1, 1, -1)
    for p in FACET_PATTERNS:
        assert p.count(-1) % 2 == 1


def test_behavior_shape_checked():
    with pytest.raises(ValueError, match="shape"):
        Behavior(np.zeros((2, 2, 2)))


def test_correlation_matches_prob_sum():
    q = quantum_behavior(canonical_angles())
    for x, y in itertools.product((0, 1), repeat=2):
        total = sum(
            a * b * q.prob(a, b, x, y)
            for a, b in itertools.product((1, -1), repeat=2)
        )
        assert q.correlation(x, y) == pytest.approx(total, abs=1e-12)


def test_behavior_csv_round_trip_exact():
    q = quantum_behavior(AngleSet.wrapped(0.3, 1.1, 2.9, 4.0))
    back = Behavior.from_csv(q.to_csv())
    # repr floats survive the trip bit for bit
    assert (back.p == q.p).all()
    assert q.to_csv().splitlines()[0] == "x,y,a,b,p"


def test_behavior_csv_errors():
    with pytest.raises(ValueError, match="header"):
        Behavior.from_csv("a,b,c\n")
    good = pr_box().to_csv()
    with pytest.raises(ValueError, match="missing cells"):
        Behavior.from_csv("\n".join(good.splitlines()[:-1]) + "\n")
    broken = good.replace("0,0,1,1,", "0,0,1,", 1)
    with pytest.raises(ValueError, match="expected 5 fields"):
        Behavior.from_csv(broken)


def test_mixture_validation():
    v = local_vertices()[:2]
    with pytest.raises(ValueError, match="one weight per behavior"):
        mixture(v, [1.0])
    with pytest.raises(ValueError, match="sum to 1"):
        mixture(v, [0.6, 0.6])


def test_validate_flags_signalling():
    p = np.zeros((2, 2, 2, 2))
    p[0, 0, 0, 0] = 1.0      # y=0: Alice shows +1
    p[0, 1, 1, 0] = 1.0      # y=1: Alice shows -1, leaking Bob's setting
    p[1, 0, 0, 0] = 1.0
    p[1, 1, 0, 0] = 1.0
    report = validate(Behavior(p))
    assert report.positivity and report.normalization
    assert not report.no_signalling and report.max_signalling == 1.0
    assert not report.ok
    assert classify(Behavior(p)) is BehaviorClass.SIGNALLING


def test_validate_flags_bad_normalization():
    p = np.full((2, 2, 2, 2), 0.25)
    p[1, 1, 0, 0] = 0.3
    report = validate(Behavior(p))
    assert not report.normalization
    assert classify(Behavior(p)) is BehaviorClass.INVALID


def test_classify_negative_entry_invalid():
    p = np.full((2, 2, 2, 2), 0.25)
    p[0, 0, 0, 0] = -0.05
    p[0, 0, 1, 1] = 0.55
    assert classify(Behavior(p)) is BehaviorClass.INVALID


def test_vertices_saturate_facets_at_two():
    """Every deterministic vertex is valid, sits on the polytope boundary
    with |facet value| exactly 2 on all 8 facets, and is its own mixture."""
    for i, v in enumerate(local_vertices()):
        assert validate(v).ok
        facets = chsh_facets(v)
        assert all(abs(val) == 2.0 for val in facets.values)
        assert facets.max_abs == 2.0 and facets.violated == ()
        assert classify(v) is BehaviorClass.LOCAL
        w = mixture_weights(v)
        assert w is not None
        expected = np.zeros(16)
        expected[i] = 1.0
        assert np.abs(w - expected).max() < 1e-8


def test_point_mass_probabilities():
    s = DeterministicStrategy(1, -1, -1, 1)
    beh = behavior_from_strategy(s)
    assert beh.prob(1, -1, 0, 0) == 1.0
    assert beh.prob(-1, 1, 1, 1) == 1.0
    assert beh.correlation(0, 0) == -1.0


def test_canonical_quantum_behavior():
    q = quantum_behavior(canonical_angles())
    assert validate(q).ok
    facets = chsh_facets(q)
    assert facets.max_value == pytest.approx(2.0 * SQRT2, rel=1e-12)
    assert classify(q) is BehaviorClass.QUANTUM_UNKNOWN
    assert not is_local_mixture(q)


@given(angle_st, angle_st, angle_st, angle_st)
@settings(max_examples=150, deadline=None)
def test_quantum_behaviors_respect_quantum_limit(a0, a1, b0, b1):
    q = quantum_behavior(AngleSet(a0, a1, b0, b1))
    assert validate(q).ok
    assert chsh_facets(q).max_abs <= 2.0 * SQRT2 + 1e-9


def test_pr_box_is_superquantum_but_no_signalling():
    box = pr_box()
    assert validate(box).ok
    facets = chsh_facets(box)
    assert facets.max_value == 4.0
    assert facets.violated != ()
    assert classify(box) is BehaviorClass.SUPERQUANTUM
    assert not is_local_mixture(box)


def test_facet_values_are_linear_in_mixing():
    q = quantum_behavior(canonical_angles())
    box = pr_box()
    mixed = mixture([q, box], [0.7, 0.3])
    fq, fb, fm = (chsh_facets(b).values for b in (q, box, mixed))
    for k in range(8):
        assert fm[k] == pytest.approx(0.7 * fq[k] + 0.3 * fb[k], abs=1e-12)


def test_facets_invariant_under_relabellings():
    q = quantum_behavior(AngleSet.wrapped(0.2, 1.4, 3.3, 5.1))
    base = sorted(chsh_facets(q).values)
    flipped = Behavior(q.p[:, :, ::-1, :])       # relabel Alice's outcomes
    swapped = Behavior(q.p[::-1, :, :, :])       # swap Alice's settings
    assert sorted(-v for v in chsh_facets(flipped).values) == pytest.approx(base)
    assert sorted(chsh_facets(swapped).values) == pytest.approx(base)


weights16 = st.lists(st.floats(0.0, 1.0), min_size=16, max_size=16).filter(
    lambda w: sum(w) > 1e-6
)


@given(weights16)
@settings(max_examples=50, deadline=None)
def test_local_mixtures_classify_local_and_stay_feasible(raw):
    w = np.asarray(raw) / sum(raw)
    beh = mixture(local_vertices(), w)
    assert classify(beh) is BehaviorClass.LOCAL
    got = mixture_weights(beh)
    assert got is not None
    vertices = np.stack([v.as_vector() for v in local_vertices()], axis=1)
    assert np.abs(vertices @ got - beh.as_vector()).max() <= 1e-8


def test_feasibility_route_rejects_beyond_facet_two():
    """A mixture pushed past facet value 2 must fail the LP route too: the
    two membership tests agree on both sides of the boundary."""
    box = pr_box()
    aligned = local_vertices()[int(np.argmax(
        [chsh_facets(v).values[0] for v in local_vertices()]
    ))]
    inside = mixture([box, aligned], [0.0, 1.0])
    barely_out = mixture([box, aligned], [0.05, 0.95])
    assert is_local_mixture(inside)
    assert chsh_facets(barely_out).max_value == pytest.approx(2.1, abs=1e-12)
    assert not is_local_mixture(barely_out)
