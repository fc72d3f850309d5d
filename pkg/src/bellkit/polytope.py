"""Two-setting two-outcome behaviors and the local correlation polytope.

A behavior is the full conditional table p(a, b | x, y) for signs a, b and
settings x, y: 16 numbers.  The local models form a polytope with the 16
deterministic strategies as vertices; its nontrivial faces are the 8 sign
patterns of

    s_00*E(0,0) + s_01*E(0,1) + s_10*E(1,0) + s_11*E(1,1) <= 2

with an odd number of minus signs among the s_xy.  Quantum behaviors stay
at or below 2*sqrt(2) on every facet; no-signalling alone allows up to 4,
reached by the box p(a,b|x,y) = 1/2 iff bit(a) XOR bit(b) = x AND y.

Index convention everywhere: sign +1 is bit 0, sign -1 is bit 1, and the
array layout is p[x, y, bit(a), bit(b)].
"""

from __future__ import annotations

import io
import itertools
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import linprog

from .bounds import TSIRELSON

DEFAULT_TOL = 1e-9


def sign_to_bit(s: int) -> int:
    if s == 1:
        return 0
    if s == -1:
        return 1
    raise ValueError("sign must be +1 or -1")


def bit_to_sign(bit: int) -> int:
    return 1 if bit == 0 else -1


# the 8 facet sign patterns: odd number of -1 entries, lexicographic with
# +1 sorting first, so pattern 0 is (1, 1, 1, -1)
FACET_PATTERNS = tuple(
    p for p in itertools.product((1, -1), repeat=4)
    if p[0] * p[1] * p[2] * p[3] == -1
)


@dataclass(frozen=True)
class Behavior:
    """Conditional outcome table, array shape (2, 2, 2, 2) = (x, y, a, b)."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.shape != (2, 2, 2, 2):
            raise ValueError("behavior must have shape (2, 2, 2, 2)")
        object.__setattr__(self, "p", p)

    def prob(self, a: int, b: int, x: int, y: int) -> float:
        return float(self.p[x, y, sign_to_bit(a), sign_to_bit(b)])

    def correlation(self, x: int, y: int) -> float:
        cell = self.p[x, y]
        return float(cell[0, 0] - cell[0, 1] - cell[1, 0] + cell[1, 1])

    def as_vector(self) -> np.ndarray:
        return self.p.reshape(16).copy()

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("x,y,a,b,p\n")
        for x, y in itertools.product((0, 1), repeat=2):
            for a, b in itertools.product((1, -1), repeat=2):
                out.write(f"{x},{y},{a},{b},{self.prob(a, b, x, y)!r}\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Behavior":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0].strip() != "x,y,a,b,p":
            raise ValueError("behavior CSV must start with header 'x,y,a,b,p'")
        p = np.full((2, 2, 2, 2), np.nan)
        for k, ln in enumerate(lines[1:], start=2):
            parts = ln.strip().split(",")
            if len(parts) != 5:
                raise ValueError(f"behavior CSV line {k}: expected 5 fields")
            x, y, a, b = (int(v) for v in parts[:4])
            p[x, y, sign_to_bit(a), sign_to_bit(b)] = float(parts[4])
        if np.isnan(p).any():
            raise ValueError("behavior CSV is missing cells")
        return cls(p)


def mixture(behaviors: list[Behavior], weights) -> Behavior:
    """Convex combination; weights must be nonnegative and sum to 1."""
    w = np.asarray(weights, dtype=float)
    if len(behaviors) != len(w):
        raise ValueError("one weight per behavior required")
    if (w < 0).any() or abs(w.sum() - 1.0) > 1e-9:
        raise ValueError("weights must be nonnegative and sum to 1")
    p = sum(wi * beh.p for wi, beh in zip(w, behaviors))
    return Behavior(p)


@dataclass(frozen=True)
class ValidationReport:
    positivity: bool
    normalization: bool
    no_signalling: bool
    max_negativity: float
    max_normalization_error: float
    max_signalling: float

    @property
    def ok(self) -> bool:
        return self.positivity and self.normalization and self.no_signalling


def validate(behavior: Behavior, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Positivity, per-cell normalization, and both no-signalling conditions."""
    p = behavior.p
    max_neg = float(max(0.0, -p.min()))
    norm_err = float(np.abs(p.sum(axis=(2, 3)) - 1.0).max())
    # Alice's marginal must not depend on y, Bob's not on x
    marg_a = p.sum(axis=3)           # (x, y, a)
    marg_b = p.sum(axis=2)           # (x, y, b)
    sig_a = float(np.abs(marg_a[:, 0, :] - marg_a[:, 1, :]).max())
    sig_b = float(np.abs(marg_b[0, :, :] - marg_b[1, :, :]).max())
    max_sig = max(sig_a, sig_b)
    return ValidationReport(
        positivity=max_neg <= tol,
        normalization=norm_err <= tol,
        no_signalling=max_sig <= tol,
        max_negativity=max_neg,
        max_normalization_error=norm_err,
        max_signalling=max_sig,
    )


@dataclass(frozen=True)
class FacetReport:
    """Signed values of the 8 facet functionals, in FACET_PATTERNS order."""

    values: tuple[float, ...]
    max_abs: float
    violated: tuple[int, ...]

    @property
    def max_value(self) -> float:
        return max(self.values)


def chsh_facets(behavior: Behavior, tol: float = DEFAULT_TOL) -> FacetReport:
    """Evaluate all 8 facet functionals; 'violated' lists those above 2."""
    e = [behavior.correlation(x, y) for x, y in ((0, 0), (0, 1), (1, 0), (1, 1))]
    values = tuple(
        float(p[0] * e[0] + p[1] * e[1] + p[2] * e[2] + p[3] * e[3])
        for p in FACET_PATTERNS
    )
    violated = tuple(i for i, v in enumerate(values) if v > 2.0 + tol)
    return FacetReport(values=values, max_abs=max(abs(v) for v in values),
                       violated=violated)


def behavior_from_strategy(strategy) -> Behavior:
    """Point-mass behavior of one deterministic strategy (a0,a1,b0,b1)."""
    p = np.zeros((2, 2, 2, 2))
    a = (strategy.a0, strategy.a1)
    b = (strategy.b0, strategy.b1)
    for x, y in itertools.product((0, 1), repeat=2):
        p[x, y, sign_to_bit(a[x]), sign_to_bit(b[y])] = 1.0
    return Behavior(p)


def local_vertices() -> list[Behavior]:
    """The 16 polytope vertices, in deterministic-strategy enumeration order."""
    from . import lhv  # local import: lhv imports Behavior from this module

    return [behavior_from_strategy(s) for s in lhv.enumerate_deterministic()]


def quantum_behavior(angles) -> Behavior:
    """Singlet behavior at the given analyzer angles."""
    from .quantum import joint_outcome_table

    p = np.zeros((2, 2, 2, 2))
    for x, y in itertools.product((0, 1), repeat=2):
        t = joint_outcome_table(angles.a_angle(x) - angles.b_angle(y))
        p[x, y] = [[t.p_pp, t.p_pm], [t.p_mp, t.p_mm]]
    return Behavior(p)


def pr_box() -> Behavior:
    """The no-signalling behavior with facet value 4: bits satisfy
    bit(a) XOR bit(b) = x AND y, each consistent pair with probability 1/2."""
    p = np.zeros((2, 2, 2, 2))
    for x, y, ai, bi in itertools.product((0, 1), repeat=4):
        if ai ^ bi == (x & y):
            p[x, y, ai, bi] = 0.5
    return Behavior(p)


class BehaviorClass(str, Enum):
    LOCAL = "local"
    QUANTUM_UNKNOWN = "quantum-compatible-unknown"
    SUPERQUANTUM = "no-signalling-superquantum"
    SIGNALLING = "signalling"
    INVALID = "invalid"


def classify(behavior: Behavior, tol: float = DEFAULT_TOL) -> BehaviorClass:
    """Coarse location of a behavior relative to the polytope and Tsirelson.

    'local' means every facet value is at most 2 (up to tol); between 2 and
    2*sqrt(2) nothing beyond CHSH membership is checked, hence 'unknown'.
    """
    report = validate(behavior, tol)
    if not (report.positivity and report.normalization):
        return BehaviorClass.INVALID
    if not report.no_signalling:
        return BehaviorClass.SIGNALLING
    facets = chsh_facets(behavior, tol)
    if facets.max_abs <= 2.0 + tol:
        return BehaviorClass.LOCAL
    if facets.max_abs > TSIRELSON + tol:
        return BehaviorClass.SUPERQUANTUM
    return BehaviorClass.QUANTUM_UNKNOWN


def mixture_weights(behavior: Behavior, tol: float = 1e-8):
    """Weights expressing the behavior as a mixture of the 16 vertices.

    Linear feasibility problem over the vertex weights, solved with an LP
    (zero objective).  Returns the weight vector, or None when no convex
    combination reproduces the behavior to within tol.  Independent route
    to the same local/nonlocal call chsh_facets makes via face values.
    """
    vertices = np.stack([v.as_vector() for v in local_vertices()], axis=1)
    a_eq = np.vstack([vertices, np.ones((1, 16))])
    b_eq = np.concatenate([behavior.as_vector(), [1.0]])
    res = linprog(
        c=np.zeros(16), A_eq=a_eq, b_eq=b_eq, bounds=(0.0, None),
        method="highs",
    )
    if not res.success:
        return None
    w = res.x
    if np.abs(vertices @ w - behavior.as_vector()).max() > tol:
        return None
    return w


def is_local_mixture(behavior: Behavior, tol: float = 1e-8) -> bool:
    return mixture_weights(behavior, tol) is not None
