"""Counterfactual sign tables and the finite-sample CHSH statistic.

The objects here are deliberately concrete: a table is n rows of four signs
(A, A', B, B'), a settings stream is n fair-coin pairs (x, y), and observing
a run just means reading the selected two columns.  Everything downstream
(simulators, the loophole analyzer, the challenge referee) speaks in terms
of these types and the CSV formats defined on them.

Cell order is fixed everywhere: (x, y) in ((0,0), (0,1), (1,0), (1,1)),
i.e. index 2*x + y.  The CHSH statistic is

    s = corr(0,0) + corr(0,1) + corr(1,0) - corr(1,1)

with each corr the empirical mean of a*b over the runs that landed in that
cell, and the delta-method standard error

    se = sqrt(sum over cells of (1 - corr^2) / count).
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .rng import Rng

CELLS = ((0, 0), (0, 1), (1, 0), (1, 1))
CELL_SIGNS = (1, 1, 1, -1)  # sign of each cell's correlation in s

TABLE_COLUMNS = ("A", "Ap", "B", "Bp")


def cell_index(x: int, y: int) -> int:
    return 2 * x + y


class CounterfactualRow(NamedTuple):
    a: int
    a_prime: int
    b: int
    b_prime: int


def _check_signs(values: np.ndarray, what: str) -> np.ndarray:
    values = np.asarray(values)
    # abs-compare instead of np.isin: same test, far cheaper on hot paths
    if not (np.abs(values) == 1).all():
        raise ValueError(f"{what} entries must be +1 or -1")
    return values.astype(np.int8)


@dataclass(frozen=True)
class CounterfactualTable:
    """n rows of pre-decided signs, columns A, A', B, B'."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 2 or values.shape[1] != 4:
            raise ValueError("table must have shape (n, 4)")
        if values.shape[0] == 0:
            raise ValueError("empty table")
        object.__setattr__(self, "values", _check_signs(values, "table"))

    @classmethod
    def from_rows(cls, rows: Iterable[tuple[int, int, int, int]]) -> "CounterfactualTable":
        return cls(np.array(list(rows), dtype=np.int8))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __len__(self) -> int:
        return self.n

    def row(self, i: int) -> CounterfactualRow:
        return CounterfactualRow(*(int(v) for v in self.values[i]))

    def __iter__(self):
        for i in range(self.n):
            yield self.row(i)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(",".join(TABLE_COLUMNS) + "\n")
        for r in self.values:
            out.write(f"{r[0]},{r[1]},{r[2]},{r[3]}\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CounterfactualTable":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0].strip() != ",".join(TABLE_COLUMNS):
            raise ValueError("table CSV must start with header 'A,Ap,B,Bp'")
        rows = []
        for k, ln in enumerate(lines[1:], start=2):
            parts = ln.strip().split(",")
            if len(parts) != 4:
                raise ValueError(f"table CSV line {k}: expected 4 fields")
            try:
                rows.append([int(p) for p in parts])
            except ValueError:
                raise ValueError(f"table CSV line {k}: non-integer field") from None
        if not rows:
            raise ValueError("empty table")
        return cls(np.array(rows))


def row_chsh_term(row) -> int:
    """A*B + A*B' + A'*B - A'*B' for one row; always +2 or -2."""
    a, ap, b, bp = row
    return a * b + a * bp + ap * b - ap * bp


def full_table_chsh(table: CounterfactualTable) -> float:
    """Average of the per-row term over the whole table; lies in [-2, 2]."""
    v = table.values
    # int8 is safe: each row term is a sum of four signs, so |term| <= 4
    terms = v[:, 0] * v[:, 2] + v[:, 0] * v[:, 3] + v[:, 1] * v[:, 2] - v[:, 1] * v[:, 3]
    return float(terms.mean())


@dataclass(frozen=True)
class SettingsStream:
    """n pairs (x, y) of detector settings, each 0 or 1."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 2 or values.shape[1] != 2:
            raise ValueError("settings must have shape (n, 2)")
        if not np.isin(values, (0, 1)).all():
            raise ValueError("settings entries must be 0 or 1")
        object.__setattr__(self, "values", values.astype(np.uint8))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __len__(self) -> int:
        return self.n

    @property
    def x(self) -> np.ndarray:
        return self.values[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.values[:, 1]

    def cell_counts(self) -> np.ndarray:
        """Counts per cell in the fixed cell order, shape (4,)."""
        codes = 2 * self.x.astype(np.intp) + self.y
        return np.bincount(codes, minlength=4)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("x,y\n")
        for r in self.values:
            out.write(f"{r[0]},{r[1]}\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SettingsStream":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0].strip() != "x,y":
            raise ValueError("settings CSV must start with header 'x,y'")
        rows = []
        for k, ln in enumerate(lines[1:], start=2):
            parts = ln.strip().split(",")
            if len(parts) != 2:
                raise ValueError(f"settings CSV line {k}: expected 2 fields")
            rows.append([int(p) for p in parts])
        return cls(np.array(rows, dtype=np.uint8).reshape(-1, 2))


def sample_settings(n: int, seed: int) -> SettingsStream:
    """n independent fair-coin settings pairs from the given seed.

    One generator word per pair: bit 63 is x, bit 62 is y.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return SettingsStream(Rng(seed).setting_block(n))


@dataclass(frozen=True)
class ObservedRun:
    """One completed run: the settings used and the two observed signs."""

    x: int
    y: int
    a: int
    b: int
    row_index: int


class RunSet:
    """Columnar collection of observed runs (settings and outcomes).

    Stored as parallel numpy arrays so correlation statistics stay
    vectorised; indexing still hands back individual ObservedRun records.
    """

    def __init__(self, x, y, a, b, row_index=None):
        x = np.asarray(x, dtype=np.uint8)
        y = np.asarray(y, dtype=np.uint8)
        a = _check_signs(np.asarray(a), "outcome")
        b = _check_signs(np.asarray(b), "outcome")
        if not (len(x) == len(y) == len(a) == len(b)):
            raise ValueError("runs columns must have equal length")
        if not np.isin(x, (0, 1)).all() or not np.isin(y, (0, 1)).all():
            raise ValueError("settings entries must be 0 or 1")
        if row_index is None:
            row_index = np.arange(len(x), dtype=np.int64)
        self.x = x
        self.y = y
        self.a = a
        self.b = b
        self.row_index = np.asarray(row_index, dtype=np.int64)

    @classmethod
    def from_runs(cls, runs: Iterable[ObservedRun]) -> "RunSet":
        rows = list(runs)
        return cls(
            [r.x for r in rows],
            [r.y for r in rows],
            [r.a for r in rows],
            [r.b for r in rows],
            [r.row_index for r in rows],
        )

    def __len__(self) -> int:
        return len(self.x)

    def __getitem__(self, i: int) -> ObservedRun:
        return ObservedRun(
            int(self.x[i]), int(self.y[i]), int(self.a[i]), int(self.b[i]),
            int(self.row_index[i]),
        )

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("x,y,a,b\n")
        for i in range(len(self)):
            out.write(f"{self.x[i]},{self.y[i]},{self.a[i]},{self.b[i]}\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "RunSet":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0].strip() != "x,y,a,b":
            raise ValueError("runs CSV must start with header 'x,y,a,b'")
        rows = [list(map(int, ln.strip().split(","))) for ln in lines[1:]]
        arr = np.array(rows, dtype=np.int64).reshape(-1, 4)
        return cls(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3])


@dataclass(frozen=True)
class ChshSummary:
    """Per-cell correlations and the combined CHSH statistic."""

    corr: tuple[float, float, float, float]
    counts: tuple[int, int, int, int]
    s: float
    se: float
    n_total: int

    def corr_of(self, x: int, y: int) -> float:
        return self.corr[cell_index(x, y)]

    def count_of(self, x: int, y: int) -> int:
        return self.counts[cell_index(x, y)]


def summary_from_cells(sums: np.ndarray, counts: np.ndarray) -> ChshSummary:
    """Build a ChshSummary from per-cell product sums and counts."""
    counts = np.asarray(counts, dtype=np.int64)
    if (counts == 0).any():
        empty = CELLS[int(np.argmax(counts == 0))]
        raise ValueError(
            f"undefined correlation: no runs in settings cell {empty}"
        )
    corr = np.asarray(sums, dtype=float) / counts
    s = float(corr[0] + corr[1] + corr[2] - corr[3])
    se = float(np.sqrt(((1.0 - corr**2) / counts).sum()))
    return ChshSummary(
        corr=tuple(float(c) for c in corr),
        counts=tuple(int(c) for c in counts),
        s=s,
        se=se,
        n_total=int(counts.sum()),
    )


def observe(table: CounterfactualTable, settings: SettingsStream) -> RunSet:
    """Read out each row's selected columns under the given settings."""
    if settings.n != table.n:
        raise ValueError("settings length must match table length")
    v = table.values
    x = settings.x.astype(np.intp)
    y = settings.y.astype(np.intp)
    idx = np.arange(table.n)
    a = v[idx, x]          # column A for x=0, A' for x=1
    b = v[idx, 2 + y]      # column B for y=0, B' for y=1
    return RunSet(settings.x, settings.y, a, b, idx)


def observed_correlations(runs) -> ChshSummary:
    """CHSH summary of a run collection; every cell must be populated."""
    if not isinstance(runs, RunSet):
        runs = RunSet.from_runs(runs)
    if len(runs) == 0:
        raise ValueError("undefined correlation: no runs")
    codes = (2 * runs.x.astype(np.intp) + runs.y)
    prod = (runs.a.astype(np.int64) * runs.b.astype(np.int64))
    counts = np.bincount(codes, minlength=4)
    sums = np.bincount(codes, weights=prod.astype(float), minlength=4)
    return summary_from_cells(sums, counts)


# -- success rate of s > 2 under random settings ------------------------------

def _products_by_cell(table: CounterfactualTable) -> np.ndarray:
    """Shape (n, 4): row j's observed product if it lands in each cell."""
    v = table.values.astype(np.int64)
    return np.column_stack([
        v[:, 0] * v[:, 2],
        v[:, 0] * v[:, 3],
        v[:, 1] * v[:, 2],
        v[:, 1] * v[:, 3],
    ])


def _success_count(products: np.ndarray, codes: np.ndarray) -> int:
    """Number of assignment rows (codes) with defined s strictly above 2.

    codes has shape (m, n) with entries in 0..3; an assignment leaving any
    cell empty is never a success.
    """
    m, n = codes.shape
    picked = products[np.arange(n)[None, :], codes]
    sums = np.zeros((m, 4))
    counts = np.zeros((m, 4), dtype=np.int64)
    for c in range(4):
        mask = codes == c
        counts[:, c] = mask.sum(axis=1)
        sums[:, c] = np.where(mask, picked, 0).sum(axis=1)
    defined = (counts > 0).all(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = sums / counts
    s = corr[:, 0] + corr[:, 1] + corr[:, 2] - corr[:, 3]
    # attainable s are rationals whose smallest possible excess over 2 is
    # far above 1e-9, while float rounding can push an exact 2 a few ulp
    # high; the guard makes this match the exact strict comparison
    return int(np.count_nonzero(defined & (s > 2.0 + 1e-9)))


def conjecture1_estimate(
    table: CounterfactualTable,
    trials: int = 10_000,
    seed: int = 0,
    mode: str = "monte-carlo",
    max_exhaustive: int = 1 << 24,
) -> float:
    """Fraction of fair-coin settings assignments with s strictly above 2.

    Assignments whose s is undefined (some cell empty) count in the
    denominator and never as successes.  ``mode="exhaustive"`` enumerates
    all 4**n assignments (refused above ``max_exhaustive``);
    ``mode="monte-carlo"`` samples ``trials`` assignments from the seed.
    """
    n = table.n
    products = _products_by_cell(table)

    if mode == "exhaustive":
        total = 4**n
        if total > max_exhaustive:
            raise ValueError(
                f"exhaustive mode needs 4**n <= {max_exhaustive}, got {total}"
            )
        shifts = (2 * np.arange(n, dtype=np.uint64))[None, :]
        successes = 0
        chunk = 1 << 14
        for start in range(0, total, chunk):
            m = np.arange(start, min(start + chunk, total), dtype=np.uint64)
            codes = ((m[:, None] >> shifts) & np.uint64(3)).astype(np.intp)
            successes += _success_count(products, codes)
        return successes / total

    if mode == "monte-carlo":
        if trials < 1:
            raise ValueError("trials must be >= 1")
        rng = Rng(seed)
        successes = 0
        chunk = max(1, (1 << 20) // max(n, 1))
        done = 0
        while done < trials:
            m = min(chunk, trials - done)
            # same word-to-settings convention as sample_settings
            words = rng.u64_block(m * n)
            codes = (words >> np.uint64(62)).astype(np.intp).reshape(m, n)
            successes += _success_count(products, codes)
            done += m
        return successes / trials

    raise ValueError(f"unknown mode: {mode!r}")
