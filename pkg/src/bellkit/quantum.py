"""Singlet-state outcome statistics and the ideal-experiment simulator.

For analyzer angles theta_a, theta_b the two observed signs have joint
distribution

    P(+,+) = P(-,-) = (1 - cos(theta_a - theta_b)) / 4
    P(+,-) = P(-,+) = (1 + cos(theta_a - theta_b)) / 4

so each wing is marginally a fair coin and the product expectation is
-cos(theta_a - theta_b).  The simulator draws fair-coin settings and one
outcome pair per run from this distribution; with the canonical angles the
four cell correlations are (1, 1, 1, -1)/sqrt(2) and s concentrates at
2*sqrt(2).

No sign table exists here, and none could: these runs are generated
per-setting, which is exactly what separates this simulator from every
table-backed model in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import RunSet, SettingsStream
from .rng import Rng, derive_seed

TAU = 2.0 * math.pi


@dataclass(frozen=True)
class AngleSet:
    """Analyzer angles: alpha/alpha_prime for wing A, beta/beta_prime for B."""

    alpha: float
    alpha_prime: float
    beta: float
    beta_prime: float

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not (0.0 <= value < TAU):
                raise ValueError(f"{name} must lie in [0, 2*pi)")

    @classmethod
    def wrapped(cls, alpha, alpha_prime, beta, beta_prime) -> "AngleSet":
        return cls(alpha % TAU, alpha_prime % TAU, beta % TAU, beta_prime % TAU)

    def a_angle(self, x: int) -> float:
        return self.alpha if x == 0 else self.alpha_prime

    def b_angle(self, y: int) -> float:
        return self.beta if y == 0 else self.beta_prime


def canonical_angles() -> AngleSet:
    """The angle choice that maximises s: cell correlations (1,1,1,-1)/sqrt(2)."""
    return AngleSet(0.0, math.pi / 2.0, 5.0 * math.pi / 4.0, 3.0 * math.pi / 4.0)


def singlet_correlation(theta_a: float, theta_b: float) -> float:
    """Product expectation -cos(theta_a - theta_b)."""
    return -math.cos(theta_a - theta_b)


@dataclass(frozen=True)
class JointTable:
    """Joint outcome distribution for one angle pair, cells (+,+),(+,-),(-,+),(-,-)."""

    p_pp: float
    p_pm: float
    p_mp: float
    p_mm: float

    def __post_init__(self):
        probs = (self.p_pp, self.p_pm, self.p_mp, self.p_mm)
        if any(p < -1e-12 for p in probs):
            raise ValueError("joint probabilities must be nonnegative")
        if abs(sum(probs) - 1.0) > 1e-9:
            raise ValueError("joint probabilities must sum to 1")

    @property
    def probs(self) -> tuple[float, float, float, float]:
        return (self.p_pp, self.p_pm, self.p_mp, self.p_mm)

    @property
    def expectation(self) -> float:
        return self.p_pp + self.p_mm - self.p_pm - self.p_mp

    @property
    def marginal_a_plus(self) -> float:
        return self.p_pp + self.p_pm

    @property
    def marginal_b_plus(self) -> float:
        return self.p_pp + self.p_mp


def joint_outcome_table(theta: float) -> JointTable:
    """Two-outcome joint distribution at angle difference theta."""
    same = 0.25 * (1.0 - math.cos(theta))
    diff = 0.25 * (1.0 + math.cos(theta))
    return JointTable(p_pp=same, p_pm=diff, p_mp=diff, p_mm=same)


def sample_run(angles: AngleSet, x: int, y: int, rng: Rng) -> tuple[int, int]:
    """One outcome pair for settings (x, y); consumes exactly one uniform.

    Inverse CDF over the four cells in the fixed order
    (+,+), (+,-), (-,+), (-,-).
    """
    if x not in (0, 1) or y not in (0, 1):
        raise ValueError("settings must be 0 or 1")
    t = joint_outcome_table(angles.a_angle(x) - angles.b_angle(y))
    u = rng.next_float()
    if u < t.p_pp:
        return (1, 1)
    if u < t.p_pp + t.p_pm:
        return (1, -1)
    if u < t.p_pp + t.p_pm + t.p_mp:
        return (-1, 1)
    return (-1, -1)


def ideal_correlations(angles: AngleSet) -> tuple[float, float, float, float]:
    """Exact cell correlations in the fixed cell order."""
    return tuple(
        singlet_correlation(angles.a_angle(x), angles.b_angle(y))
        for x, y in ((0, 0), (0, 1), (1, 0), (1, 1))
    )


def ideal_s(angles: AngleSet) -> float:
    c = ideal_correlations(angles)
    return c[0] + c[1] + c[2] - c[3]


def outcomes_for_settings(
    angles: AngleSet, settings: SettingsStream, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Singlet outcomes for externally chosen settings.

    One uniform per run from Rng(seed), in run order, so the result is
    bit-identical to calling sample_run in a loop over the same stream.
    """
    u = Rng(seed).float_block(settings.n)

    # only four distinct angle pairs exist; build their tables with the same
    # scalar arithmetic sample_run uses, so the two paths agree bit for bit
    tables = [
        joint_outcome_table(angles.a_angle(x) - angles.b_angle(y))
        for x, y in ((0, 0), (0, 1), (1, 0), (1, 1))
    ]
    cells = (2 * settings.x.astype(np.intp) + settings.y)
    cum1 = np.array([t.p_pp for t in tables])[cells]
    cum2 = np.array([t.p_pp + t.p_pm for t in tables])[cells]
    cum3 = np.array([t.p_pp + t.p_pm + t.p_mp for t in tables])[cells]
    code = (u >= cum1).astype(np.int8) + (u >= cum2) + (u >= cum3)
    a = np.where(code < 2, 1, -1).astype(np.int8)
    b = np.where((code == 0) | (code == 2), 1, -1).astype(np.int8)
    return a, b


def simulate_experiment(angles: AngleSet, n: int, seed: int) -> RunSet:
    """n runs: fair-coin settings, singlet outcomes, fully seed-determined.

    Settings use sub-stream 0 of the seed and outcomes sub-stream 1.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    settings = SettingsStream(Rng(derive_seed(seed, 0)).setting_block(n))
    a, b = outcomes_for_settings(angles, settings, derive_seed(seed, 1))
    return RunSet(settings.x, settings.y, a, b)
