"""Closed-form tail bounds on faking a CHSH violation with sign tables.

The headline bound: for a pre-committed n-row table read out under fair-coin
settings, the chance that the observed statistic lands eta or more above 2
is at most

    8 * exp(-n * (eta/16)**2)                                   (theorem1)

which comes from a two-term Hoeffding argument: a term for the four cell
counts straying from n/4 and a term for the four cell means straying from
the table's column correlations.  The two-term form keeps the split
parameter delta explicit; the canonical delta equalises the two exponents
(8*delta**2 = epsilon**2 with epsilon = eta/8) and collapses the sum to the
headline constant whenever 8*(1/4 - delta) >= 1.

Also here: the detector-efficiency limits.  With conditional detection
efficiency gamma, local models reach 2 + 4*(1/gamma - 1) when every
detection counts, and 2 + 6*(1/gamma - 1) when pairs are selected by
coincidence.  Setting each ceiling equal to 2*sqrt(2) gives the efficiency
below which even a maximal quantum violation proves nothing:
2*(sqrt(2) - 1) (about 0.8284) for the first form and 3*(1 - 1/sqrt(2))
(about 0.8787) for the second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TSIRELSON = 2.0 * math.sqrt(2.0)

# efficiencies at which the ceilings cross 2*sqrt(2): below these, even a
# maximal quantum violation is reachable by a local model
DETECTION_GAMMA_THRESHOLD = 2.0 * (math.sqrt(2.0) - 1.0)
COINCIDENCE_GAMMA_THRESHOLD = 3.0 * (1.0 - 1.0 / math.sqrt(2.0))


def tsirelson_limit() -> float:
    """Largest CHSH value quantum correlations can reach."""
    return TSIRELSON


def hoeffding_tail(n: int, t: float) -> float:
    """exp(-2*n*t**2), clamped to 1; deviation tail for n fair draws.

    Valid for binomial and hypergeometric counts alike, which is what lets
    the settings cells and the within-cell means be handled by one form.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if t < 0:
        raise ValueError("t must be >= 0")
    return min(1.0, math.exp(-2.0 * n * t * t))


@dataclass(frozen=True)
class BoundReport:
    """One evaluated tail bound; delta is set for the two-term methods."""

    n: int
    eta: float
    probability: float
    method: str
    delta: float | None = None


def _check_n_eta(n: int, eta: float) -> None:
    if n < 1:
        raise ValueError("n must be >= 1")
    if eta < 0.0:
        raise ValueError("eta must be >= 0")


def theorem1_bound(n: int, eta: float) -> BoundReport:
    """P(observed s >= 2 + eta) <= 8*exp(-n*(eta/16)**2), clamped to 1."""
    _check_n_eta(n, eta)
    p = min(1.0, 8.0 * math.exp(-n * (eta / 16.0) ** 2))
    return BoundReport(n=n, eta=eta, probability=p, method="theorem1")


def two_term_bound(n: int, eta: float, delta: float) -> BoundReport:
    """The underlying two-term bound with the cell-count slack delta explicit.

    4*exp(-2*n*delta**2) covers the four cell counts leaving
    [(1/4 - delta)*n, (1/4 + delta)*n]; 4*exp(-2*(1/4 - delta)*n*eps**2)
    with eps = eta/8 covers the four cell means, using the smallest cell
    size the first event guarantees.
    """
    _check_n_eta(n, eta)
    if not (0.0 < delta < 0.25):
        raise ValueError("delta must be in (0, 1/4)")
    eps = eta / 8.0
    p = 4.0 * math.exp(-2.0 * n * delta * delta) \
        + 4.0 * math.exp(-2.0 * (0.25 - delta) * n * eps * eps)
    return BoundReport(n=n, eta=eta, probability=min(1.0, p),
                       method="two-term", delta=delta)


def canonical_delta(eta: float) -> float:
    """The delta with 8*delta**2 = (eta/8)**2, i.e. eta / (16*sqrt(2)).

    At this delta the two exponents agree at 2*delta**2 = (eta/16)**2, and
    as long as 8*(1/4 - delta) >= 1 (true for any eta a CHSH excess can
    reach) the sum collapses to the headline 8*exp(-n*(eta/16)**2).
    """
    if eta <= 0.0:
        raise ValueError("eta must be > 0")
    delta = eta / (16.0 * math.sqrt(2.0))
    if delta >= 0.25:
        raise ValueError("eta too large: canonical delta leaves (0, 1/4)")
    return delta


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def two_term_bound_optimized(n: int, eta: float) -> BoundReport:
    """Two-term bound minimised over delta in (0, 1/4).

    1024-point grid scan, then golden-section refinement around the best
    grid point to a relative delta tolerance of 1e-9.  Never larger than
    the canonical-delta bound, which is evaluated explicitly as a floor.
    """
    _check_n_eta(n, eta)
    if eta == 0.0:
        raise ValueError("eta must be > 0")

    def p(d: float) -> float:
        eps = eta / 8.0
        return 4.0 * math.exp(-2.0 * n * d * d) \
            + 4.0 * math.exp(-2.0 * (0.25 - d) * n * eps * eps)

    grid = [0.25 * (k + 1) / 1025.0 for k in range(1024)]
    best = min(range(1024), key=lambda k: p(grid[k]))
    lo = grid[best - 1] if best > 0 else grid[0] / 2.0
    hi = grid[best + 1] if best < 1023 else (grid[1023] + 0.25) / 2.0

    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    while (b - a) > 1e-9 * max(abs(a), abs(b), 1e-12):
        if p(c) < p(d):
            b, d = d, c
            c = b - _INVPHI * (b - a)
        else:
            a, c = c, d
            d = a + _INVPHI * (b - a)
    delta = 0.5 * (a + b)
    try:
        cd = canonical_delta(eta)
        if p(cd) < p(delta):
            delta = cd
    except ValueError:
        pass
    return BoundReport(n=n, eta=eta, probability=min(1.0, p(delta)),
                       method="two-term-optimized", delta=delta)


def min_runs_for(eta: float, alpha: float) -> int:
    """Smallest n whose theorem1 bound is at most alpha.

    Closed-form inversion of the exponential, then a bracketing check so
    the returned n satisfies bound(n) <= alpha < bound(n - 1) exactly
    (n == 1 when even a single run suffices, e.g. alpha = 1 where the
    clamped bound is never above 1).
    """
    if not (0.0 < alpha <= 1.0):
        raise ValueError("alpha must be in (0, 1]")
    if eta <= 0.0:
        raise ValueError("eta must be > 0")
    if theorem1_bound(1, eta).probability <= alpha:
        return 1
    c = (eta / 16.0) ** 2
    n = max(1, math.ceil(math.log(8.0 / alpha) / c))
    while n > 1 and theorem1_bound(n - 1, eta).probability <= alpha:
        n -= 1
    while theorem1_bound(n, eta).probability > alpha:
        n += 1
    return n


@dataclass(frozen=True)
class EfficiencyBound:
    """Local-model CHSH ceiling at conditional detection efficiency gamma."""

    gamma: float
    delta: float
    limit: float
    loophole: str


def _check_gamma(gamma: float) -> None:
    if not (0.0 < gamma <= 1.0):
        raise ValueError("gamma must be in (0, 1]")


def larsson_detection_bound(gamma: float) -> EfficiencyBound:
    """Ceiling 2 + 4*(1/gamma - 1) when all detections count."""
    _check_gamma(gamma)
    delta = 4.0 * (1.0 / gamma - 1.0)
    return EfficiencyBound(gamma=gamma, delta=delta, limit=2.0 + delta,
                           loophole="detection")


def larsson_coincidence_bound(gamma: float) -> EfficiencyBound:
    """Ceiling 2 + 6*(1/gamma - 1) when only coincidences are kept."""
    _check_gamma(gamma)
    delta = 6.0 * (1.0 / gamma - 1.0)
    return EfficiencyBound(gamma=gamma, delta=delta, limit=2.0 + delta,
                           loophole="coincidence")
