"""Sign tables, observation, the CHSH statistic, and the success-rate
estimator, checked against exhaustive and exact-rational oracles."""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellkit.core import (
    CounterfactualTable,
    ObservedRun,
    RunSet,
    SettingsStream,
    conjecture1_estimate,
    full_table_chsh,
    observe,
    observed_correlations,
    row_chsh_term,
    sample_settings,
)

signs = st.sampled_from((-1, 1))
sign_rows = st.tuples(signs, signs, signs, signs)


def test_row_term_exhaustive():
    """All 16 sign rows give exactly +2 or -2."""
    for row in itertools.product((-1, 1), repeat=4):
        assert row_chsh_term(row) in (-2, 2)


@given(st.lists(sign_rows, min_size=1, max_size=64))
@settings(max_examples=200)
def test_full_table_in_range(rows):
    value = full_table_chsh(CounterfactualTable.from_rows(rows))
    assert -2.0 <= value <= 2.0


def test_full_table_extremes():
    all_plus = CounterfactualTable.from_rows([(1, 1, 1, -1)] * 5)
    assert full_table_chsh(all_plus) == 2.0
    assert full_table_chsh(CounterfactualTable.from_rows([(1, 1, -1, 1)] * 5)) == -2.0


def test_table_validation():
    with pytest.raises(ValueError, match="empty table"):
        CounterfactualTable(np.zeros((0, 4)))
    with pytest.raises(ValueError, match="\\+1 or -1"):
        CounterfactualTable(np.array([[1, 0, 1, 1]]))
    with pytest.raises(ValueError):
        CounterfactualTable(np.ones((3, 3)))


def test_table_csv_roundtrip():
    table = CounterfactualTable.from_rows([(1, -1, 1, 1), (-1, -1, -1, 1)])
    text = table.to_csv()
    assert text.splitlines()[0] == "A,Ap,B,Bp"
    back = CounterfactualTable.from_csv(text)
    assert (back.values == table.values).all()
    with pytest.raises(ValueError, match="header"):
        CounterfactualTable.from_csv("a,b,c,d\n1,1,1,1\n")


def test_settings_csv_roundtrip():
    s = sample_settings(50, 3)
    back = SettingsStream.from_csv(s.to_csv())
    assert (back.values == s.values).all()


def test_sample_settings_deterministic_and_fair():
    a = sample_settings(200_000, 11)
    b = sample_settings(200_000, 11)
    assert (a.values == b.values).all()
    counts = a.cell_counts()
    assert counts.sum() == 200_000
    # each cell probability 1/4; 6 sigma is about 0.0029
    assert np.abs(counts / 200_000 - 0.25).max() < 0.004
    with pytest.raises(ValueError):
        sample_settings(0, 1)


def test_observe_selects_columns():
    table = CounterfactualTable.from_rows([(1, -1, 1, -1), (1, 1, -1, -1)])
    s = SettingsStream(np.array([[0, 1], [1, 0]]))
    runs = observe(table, s)
    assert runs[0] == ObservedRun(x=0, y=1, a=1, b=-1, row_index=0)
    assert runs[1] == ObservedRun(x=1, y=0, a=1, b=-1, row_index=1)
    with pytest.raises(ValueError, match="match"):
        observe(table, SettingsStream(np.array([[0, 0]])))


def test_constant_table_reproduces_products():
    """Identical rows: every populated cell's correlation is that row's
    product, and s collapses to the row term's value."""
    row = (1, 1, 1, -1)
    table = CounterfactualTable.from_rows([row] * 4000)
    summary = observed_correlations(observe(table, sample_settings(4000, 5)))
    a, ap, b, bp = row
    assert summary.corr == (a * b, a * bp, ap * b, ap * bp)
    assert summary.s == row_chsh_term(row)
    assert summary.se == 0.0


def brute_summary(runs):
    sums = [0] * 4
    counts = [0] * 4
    for r in runs:
        c = 2 * r.x + r.y
        sums[c] += r.a * r.b
        counts[c] += 1
    corr = [si / ci for si, ci in zip(sums, counts)]
    s = corr[0] + corr[1] + corr[2] - corr[3]
    se = math.sqrt(sum((1 - c * c) / n for c, n in zip(corr, counts)))
    return corr, s, se


@given(st.integers(0, 2**32))
@settings(max_examples=30)
def test_summary_matches_bruteforce(seed):
    table = CounterfactualTable.from_rows(
        [tuple(1 if b else -1 for b in np.random.default_rng(seed + i).integers(0, 2, 4))
         for i in range(64)]
    )
    runs = observe(table, sample_settings(64, seed))
    try:
        summary = observed_correlations(runs)
    except ValueError as exc:
        assert "undefined correlation" in str(exc)
        return
    corr, s, se = brute_summary(list(runs))
    assert np.allclose(summary.corr, corr)
    assert math.isclose(summary.s, s, rel_tol=1e-12, abs_tol=1e-12)
    assert math.isclose(summary.se, se, rel_tol=1e-12, abs_tol=1e-12)


def test_empty_cell_is_an_error():
    runs = RunSet([0, 0], [0, 0], [1, 1], [1, -1])
    with pytest.raises(ValueError, match="undefined correlation"):
        observed_correlations(runs)
    with pytest.raises(ValueError, match="undefined correlation"):
        observed_correlations([])


def test_runs_csv_roundtrip():
    runs = RunSet([0, 1], [1, 0], [1, -1], [-1, -1])
    back = RunSet.from_csv(runs.to_csv())
    assert (back.a == runs.a).all() and (back.x == runs.x).all()


# -- success-rate estimator ---------------------------------------------------

def exact_fraction(rows):
    """Exact-rational enumeration over all 4**n settings assignments."""
    n = len(rows)
    prods = [(a * b, a * bp, ap * b, ap * bp) for (a, ap, b, bp) in rows]
    succ = 0
    for assign in itertools.product(range(4), repeat=n):
        sums = [0] * 4
        counts = [0] * 4
        for j, c in enumerate(assign):
            sums[c] += prods[j][c]
            counts[c] += 1
        if all(counts):
            s = (Fraction(sums[0], counts[0]) + Fraction(sums[1], counts[1])
                 + Fraction(sums[2], counts[2]) - Fraction(sums[3], counts[3]))
            if s > 2:
                succ += 1
    return Fraction(succ, 4**n)


IDENTICAL4 = [(1, 1, 1, -1)] * 4
SPECIMEN4 = [(1, 1, 1, 1), (1, 1, 1, 1), (-1, -1, 1, 1), (1, -1, -1, 1)]
MIXED3 = [(1, -1, 1, 1), (1, 1, -1, -1), (-1, 1, 1, -1)]
MIXED5 = [(1, 1, 1, -1), (1, -1, -1, 1), (-1, -1, -1, -1), (1, 1, -1, 1),
          (-1, 1, 1, 1)]


@pytest.mark.parametrize(
    "rows,expected",
    [
        (IDENTICAL4, Fraction(0)),          # constant table can never beat 2
        (SPECIMEN4, Fraction(1, 64)),
        (MIXED3, Fraction(0)),
        (MIXED5, Fraction(25, 1024)),
    ],
)
def test_exhaustive_matches_frozen_oracle(rows, expected):
    assert exact_fraction(rows) == expected  # oracle self-check
    got = conjecture1_estimate(CounterfactualTable.from_rows(rows),
                               mode="exhaustive")
    assert got == float(expected)


def test_single_row_success_impossible():
    """n=1 leaves three cells empty under every assignment."""
    table = CounterfactualTable.from_rows([(1, 1, 1, -1)])
    assert conjecture1_estimate(table, mode="exhaustive") == 0.0


@given(st.lists(sign_rows, min_size=2, max_size=6), st.integers(0, 2**32))
@settings(max_examples=20, deadline=None)
def test_exhaustive_equals_exact_rational(rows, seed):
    table = CounterfactualTable.from_rows(rows)
    assert conjecture1_estimate(table, mode="exhaustive") == float(exact_fraction(rows))


def test_monte_carlo_tracks_exhaustive():
    table = CounterfactualTable.from_rows(MIXED5)
    exact = conjecture1_estimate(table, mode="exhaustive")
    mc = conjecture1_estimate(table, trials=100_000, seed=17, mode="monte-carlo")
    assert abs(mc - exact) < 0.01


def test_exhaustive_cap():
    table = CounterfactualTable.from_rows([(1, 1, 1, 1)] * 13)
    with pytest.raises(ValueError, match="exhaustive"):
        conjecture1_estimate(table, mode="exhaustive")
    with pytest.raises(ValueError, match="mode"):
        conjecture1_estimate(table, mode="bogus")
