"""Table-backed local models, honest and cheating.

An honest local model here is a mixture over the 16 deterministic
strategies (a0, a1, b0, b1): drawing a strategy per run and writing its
signs down as a row gives a pre-committed counterfactual table, which is
exactly the object the tail bounds apply to.

The cheat lives in the detection step, not the table.  Each emission picks
a desired settings pair uniformly, draws an outcome pair from a target
behavior's corresponding cell, and then each wing reports its sign only
when its actual setting matches the desired one (otherwise: no detection,
encoded 0).  Coincidences survive with probability 1/4, each wing detects
with conditional probability 1/2 given the other did, and the surviving
pairs reproduce the target behavior exactly; with the canonical singlet
target the coincidence-only statistic sits at 2*sqrt(2).  An extra
per-wing thinning knob scales all detections down, which is how the
realistic low-efficiency regime (about one detection in twenty, pairs to
singles to misses near 1 : 38 : 361 per 400 emissions) is reached.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CounterfactualRow, CounterfactualTable, RunSet, SettingsStream
from .polytope import Behavior
from .rng import Rng, derive_seed

NO_DETECTION = 0


@dataclass(frozen=True)
class DeterministicStrategy:
    """Fixed answers for both settings on both wings."""

    a0: int
    a1: int
    b0: int
    b1: int

    def __post_init__(self):
        for v in (self.a0, self.a1, self.b0, self.b1):
            if v not in (-1, 1):
                raise ValueError("strategy entries must be +1 or -1")

    def row(self) -> CounterfactualRow:
        return CounterfactualRow(self.a0, self.a1, self.b0, self.b1)

    def behavior(self) -> Behavior:
        from .polytope import behavior_from_strategy

        return behavior_from_strategy(self)

    @classmethod
    def from_index(cls, i: int) -> "DeterministicStrategy":
        """Strategy i of 16: (a0, a1, b0, b1) as a big-endian 4-bit counter,
        bit 0 mapping to -1 and bit 1 to +1."""
        if not (0 <= i < 16):
            raise ValueError("strategy index must be in 0..15")
        bit = lambda k: 1 if (i >> k) & 1 else -1
        return cls(a0=bit(3), a1=bit(2), b0=bit(1), b1=bit(0))


def enumerate_deterministic() -> list[DeterministicStrategy]:
    """All 16 strategies, in from_index order."""
    return [DeterministicStrategy.from_index(i) for i in range(16)]


_STRATEGY_ROWS = np.array(
    [DeterministicStrategy.from_index(i).row() for i in range(16)], dtype=np.int8
)


@dataclass(frozen=True)
class LhvModel:
    """Mixture over deterministic strategies; weights sum to 1."""

    strategies: tuple[DeterministicStrategy, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.strategies) != len(self.weights) or not self.strategies:
            raise ValueError("one weight per strategy required")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")

    @classmethod
    def deterministic(cls, strategy: DeterministicStrategy) -> "LhvModel":
        return cls(strategies=(strategy,), weights=(1.0,))

    @classmethod
    def mixture(cls, strategies, weights) -> "LhvModel":
        return cls(strategies=tuple(strategies), weights=tuple(float(w) for w in weights))

    @classmethod
    def uniform(cls) -> "LhvModel":
        """Equal weight on all 16 strategies; every correlation vanishes."""
        return cls(strategies=tuple(enumerate_deterministic()),
                   weights=(1.0 / 16.0,) * 16)

    def cumulative_weights(self) -> list[float]:
        # plain left-to-right accumulation; external reimplementations of
        # generate_table must reproduce these partial sums bit for bit
        cum, acc = [], 0.0
        for w in self.weights:
            acc += w
            cum.append(acc)
        return cum


def generate_table(model: LhvModel, n: int, seed: int) -> CounterfactualTable:
    """n-row table drawn from the model; one uniform per row, inverse CDF
    over the cumulative weights (first index whose partial sum exceeds u)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    cum = np.array(model.cumulative_weights())
    u = Rng(seed).float_block(n)
    idx = np.minimum(np.searchsorted(cum, u, side="right"),
                     len(model.strategies) - 1)
    rows = np.array([s.row() for s in model.strategies], dtype=np.int8)[idx]
    return CounterfactualTable(rows)


# -- detection-loophole cheat -------------------------------------------------

@dataclass(frozen=True)
class CheaterConfig:
    """Emission source that detects only on its desired settings pair.

    wing_thinning is an independent survival probability applied per wing
    on top of the setting match; coincidences therefore thin by its square
    (0.1 per wing puts the both:one:neither pattern near 1:38:361 per 400
    emissions and the conditional efficiency near 0.05).
    """

    target: Behavior
    wing_thinning: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.wing_thinning <= 1.0):
            raise ValueError("wing_thinning must be in (0, 1]")

    def cell_cumulative(self, dx: int, dy: int) -> tuple[float, float, float]:
        """Partial sums of the target cell in order (+,+), (+,-), (-,+)."""
        cell = self.target.p[dx, dy]
        c1 = float(cell[0, 0])
        c2 = c1 + float(cell[0, 1])
        c3 = c2 + float(cell[1, 0])
        return c1, c2, c3


def _outcome_from_code(code: int) -> tuple[int, int]:
    return (1 if code < 2 else -1, 1 if code in (0, 2) else -1)


def cheater_run(config: CheaterConfig, x: int, y: int, rng: Rng) -> tuple[int, int]:
    """One emission under actual settings (x, y); ternary outcome pair.

    Stream discipline per emission: one word for the desired pair (bit 63,
    bit 62), one uniform for the outcome pair, and, only when thinning is
    active, one survival uniform per wing.
    """
    if x not in (0, 1) or y not in (0, 1):
        raise ValueError("settings must be 0 or 1")
    word = rng.next_u64()
    dx, dy = word >> 63, (word >> 62) & 1
    u = rng.next_float()
    c1, c2, c3 = config.cell_cumulative(dx, dy)
    code = (u >= c1) + (u >= c2) + (u >= c3)
    a_star, b_star = _outcome_from_code(code)
    detect_a = x == dx
    detect_b = y == dy
    if config.wing_thinning < 1.0:
        # both survival uniforms are always drawn so the word count per
        # emission stays fixed and block replay stays aligned
        ua, ub = rng.next_float(), rng.next_float()
        detect_a = detect_a and ua < config.wing_thinning
        detect_b = detect_b and ub < config.wing_thinning
    return (a_star if detect_a else NO_DETECTION,
            b_star if detect_b else NO_DETECTION)


class TernaryRuns:
    """Columnar run records where 0 marks a missing detection."""

    def __init__(self, x, y, a, b):
        self.x = np.asarray(x, dtype=np.uint8)
        self.y = np.asarray(y, dtype=np.uint8)
        self.a = np.asarray(a, dtype=np.int8)
        self.b = np.asarray(b, dtype=np.int8)
        if not (len(self.x) == len(self.y) == len(self.a) == len(self.b)):
            raise ValueError("runs columns must have equal length")
        for arr in (self.a, self.b):
            if not np.isin(arr, (-1, 0, 1)).all():
                raise ValueError("ternary outcomes must be -1, 0, or +1")

    def __len__(self) -> int:
        return len(self.x)

    @property
    def detected_a(self) -> np.ndarray:
        return self.a != 0

    @property
    def detected_b(self) -> np.ndarray:
        return self.b != 0

    def coincidences(self) -> RunSet:
        m = self.detected_a & self.detected_b
        if not m.any():
            raise ValueError("no coincidences")
        return RunSet(self.x[m], self.y[m], self.a[m], self.b[m],
                      np.flatnonzero(m))

    def conditional_rates(self) -> np.ndarray:
        """The 8 conditional detection rates, shape (2, 4): row 0 is
        P(A detects | B did, settings cell), row 1 the reverse; cells in
        the fixed order."""
        codes = 2 * self.x.astype(np.intp) + self.y
        both = np.bincount(codes[self.detected_a & self.detected_b], minlength=4)
        a_det = np.bincount(codes[self.detected_a], minlength=4)
        b_det = np.bincount(codes[self.detected_b], minlength=4)
        if (a_det == 0).any() or (b_det == 0).any():
            raise ValueError("a settings cell has no detections on one wing")
        return np.vstack([both / b_det, both / a_det])

    def to_csv(self) -> str:
        lines = ["x,y,a,b"]
        for i in range(len(self)):
            lines.append(f"{self.x[i]},{self.y[i]},{self.a[i]},{self.b[i]}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LoopholeResult:
    """Outcome of an emission experiment where detections can be missing."""

    runs: TernaryRuns
    n: int
    both: int
    only_a: int
    only_b: int
    neither: int

    @property
    def coincidence_rate(self) -> float:
        return self.both / self.n


def simulate_loophole_experiment(source, n: int, seed: int) -> LoopholeResult:
    """n emissions from an honest model or a cheater, under fair settings.

    Sub-stream 0 of the seed feeds the source, sub-stream 1 the settings.
    An honest LhvModel always detects on both wings; a CheaterConfig drops
    detections as described on cheater_run, with the identical stream
    order, so scalar replay of any run matches.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    settings = SettingsStream(Rng(derive_seed(seed, 1)).setting_block(n))

    if isinstance(source, LhvModel):
        table = generate_table(source, n, derive_seed(seed, 0))
        from .core import observe

        obs = observe(table, settings)
        runs = TernaryRuns(obs.x, obs.y, obs.a, obs.b)
        return LoopholeResult(runs=runs, n=n, both=n, only_a=0, only_b=0,
                              neither=0)

    if not isinstance(source, CheaterConfig):
        raise TypeError("source must be an LhvModel or a CheaterConfig")

    cfg = source
    thinned = cfg.wing_thinning < 1.0
    per_run = 4 if thinned else 2
    words = Rng(derive_seed(seed, 0)).u64_block(n * per_run).reshape(n, per_run)
    dx = (words[:, 0] >> np.uint64(63)).astype(np.uint8)
    dy = ((words[:, 0] >> np.uint64(62)) & np.uint64(1)).astype(np.uint8)
    u = (words[:, 1] >> np.uint64(11)) * 2.0**-53

    cums = np.array([[cfg.cell_cumulative(i, j) for j in (0, 1)] for i in (0, 1)])
    c = cums[dx, dy]                     # (n, 3)
    code = ((u >= c[:, 0]).astype(np.int8) + (u >= c[:, 1]) + (u >= c[:, 2]))
    a_star = np.where(code < 2, 1, -1).astype(np.int8)
    b_star = np.where((code == 0) | (code == 2), 1, -1).astype(np.int8)

    det_a = settings.x == dx
    det_b = settings.y == dy
    if thinned:
        ua = (words[:, 2] >> np.uint64(11)) * 2.0**-53
        ub = (words[:, 3] >> np.uint64(11)) * 2.0**-53
        det_a &= ua < cfg.wing_thinning
        det_b &= ub < cfg.wing_thinning

    a = np.where(det_a, a_star, NO_DETECTION).astype(np.int8)
    b = np.where(det_b, b_star, NO_DETECTION).astype(np.int8)
    runs = TernaryRuns(settings.x, settings.y, a, b)
    both = int(np.count_nonzero(det_a & det_b))
    only_a = int(np.count_nonzero(det_a & ~det_b))
    only_b = int(np.count_nonzero(~det_a & det_b))
    return LoopholeResult(runs=runs, n=n, both=both, only_a=only_a,
                          only_b=only_b, neither=n - both - only_a - only_b)
