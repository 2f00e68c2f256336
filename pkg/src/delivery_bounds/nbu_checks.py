"""Numerical checks of ageing and ordering properties on truncated laws.

For an integer-valued ``T`` the co-CDF is a right-continuous step function,
``S(x) = S(floor(x))``.  Since ``floor(x + y) >= floor(x) + floor(y)`` and
``S`` is non-increasing, the worst NBU margin over real ``x, y`` is attained
at integer pairs; checking integer pairs is therefore exhaustive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from . import distributions as dist
from .errors import InconclusiveError, InvalidParameterError, PreconditionError

DEFAULT_TOL = 1e-12


@dataclass(frozen=True)
class CheckReport:
    property: Literal["nbu", "nwu", "dominance", "min_bound", "ks_exponential", "max_closure"]
    passed: bool
    worst_violation: float
    witness: Optional[tuple]
    tolerance_used: float

    def __post_init__(self):
        expected = self.worst_violation <= self.tolerance_used
        if self.passed != expected:
            raise ValueError("passed must equal worst_violation <= tolerance_used")


def _nbu_margins(s: np.ndarray, sign: float):
    """Largest ``sign * (S(x+y) - S(x) S(y))`` over integer x <= y, x + y <= h."""
    h = s.size - 1
    worst, witness = -math.inf, None
    for x in range(h // 2 + 1):
        ys = np.arange(x, h - x + 1)
        margin = sign * (s[x + ys] - s[x] * s[ys])
        j = int(np.argmax(margin))
        if margin[j] > worst:
            worst, witness = float(margin[j]), (x, int(ys[j]))
    return worst, witness


def check_nbu(d: dist.Pmf, tolerance: float = DEFAULT_TOL,
              variant: Literal["nbu", "nwu"] = "nbu") -> CheckReport:
    """Check ``S(x+y) <= S(x) S(y)`` (or the reverse for NWU) for x + y <= t_max.

    The tolerance must cover the truncation tail mass; otherwise the check
    is reported as inconclusive.
    """
    if tolerance < d.tail_mass:
        raise InconclusiveError(
            f"tolerance {tolerance:.3g} below truncation tail mass {d.tail_mass:.3g}")
    if variant not in ("nbu", "nwu"):
        raise InvalidParameterError(f"unknown variant {variant!r}")
    s = d.survival()
    worst, witness = _nbu_margins(s, 1.0 if variant == "nbu" else -1.0)
    return CheckReport(variant, worst <= tolerance, worst, witness, tolerance)


def _co_cdf_on(obj, t: np.ndarray) -> np.ndarray:
    if isinstance(obj, dist.Pmf):
        s = obj.survival()
        idx = np.clip(t, 0, s.size - 1).astype(np.int64)
        return np.where(t < 0, 1.0, np.where(t >= s.size, obj.tail_mass, s[idx]))
    return np.asarray(obj.co_cdf(t), dtype=np.float64)


def check_dominance(a, b: dist.Pmf, t_grid=None,
                    tolerance: float = DEFAULT_TOL) -> CheckReport:
    """Check that ``a`` stochastically dominates ``b`` on ``t_grid``.

    ``a`` may be a Pmf or any curve with ``co_cdf``.  The default grid is
    ``0..b.t_max``.  Margins are ``co_cdf_b - co_cdf_a``.
    """
    if t_grid is None:
        t_grid = np.arange(b.t_max + 1)
    t_grid = np.asarray(t_grid)
    if isinstance(a, dist.Pmf):
        t_grid = t_grid[t_grid <= min(a.t_max, b.t_max)]
    else:
        t_grid = t_grid[t_grid <= b.t_max]
    margin = _co_cdf_on(b, t_grid) - _co_cdf_on(a, t_grid)
    j = int(np.argmax(margin))
    worst = float(margin[j])
    return CheckReport("dominance", worst <= tolerance, worst,
                       (int(t_grid[j]),), tolerance)


def min_mean(d: dist.Pmf, n: int) -> float:
    """``E[min of n iid copies]`` from ``sum_t S(t)^n`` over the horizon (a lower bound)."""
    return math.fsum(d.survival() ** n)


def check_min_bound(d: dist.Pmf, n: int, tolerance: float = DEFAULT_TOL,
                    nbu_tolerance: float | None = None) -> CheckReport:
    """Check ``E[min(X_1..X_n)] >= E[X] / n`` for an NBU law.

    Both means are truncated lower values; the part of ``E[X]`` beyond the
    horizon is at most ``tail_mass`` times the mean itself (NBU), so the
    comparison uses ``E[X]_lower / (1 - tail_mass)``.
    """
    if n < 2:
        raise InvalidParameterError("n must be >= 2")
    nbu_tol = max(DEFAULT_TOL, 2 * d.tail_mass) if nbu_tolerance is None else nbu_tolerance
    if not check_nbu(d, nbu_tol).passed:
        raise PreconditionError("distribution is not NBU; the min bound does not apply")
    emin = min_mean(d, n)
    ex = dist.mean(d).lower
    if d.tail_mass > 0:
        ex /= (1.0 - d.tail_mass)
    margin = ex / n - emin
    return CheckReport("min_bound", margin <= tolerance, margin, (n,), tolerance)


def ks_to_exponential(d: dist.Pmf, mean_value: float | None = None) -> float:
    """Sup distance between the co-CDF of ``T / E[T]`` and ``exp(-x)``.

    The step co-CDF is compared against the exponential at both ends of each
    unit interval, which gives the exact supremum over real arguments up to
    the horizon.
    """
    mu = dist.mean(d).lower if mean_value is None else mean_value
    if not mu > 0:
        raise InvalidParameterError("mean must be positive")
    s = d.survival()
    t = np.arange(s.size, dtype=np.float64)
    left = np.abs(s - np.exp(-t / mu))
    right = np.abs(s - np.exp(-(t + 1) / mu))
    return float(max(left.max(), right.max(), 0.0))


def random_nbu_pmf(rng: np.random.Generator, t_max: int = 256) -> dist.Pmf:
    """A random law built only from NBU-preserving operations.

    Shifted point mass, plus up to three independent geometrics, optionally
    maximised with another geometric.  Sums and maxima of independent NBU
    variables are NBU.
    """
    d = dist.point_mass(int(rng.integers(0, 4)), t_max)
    for _ in range(int(rng.integers(0, 4))):
        d = dist.convolve(d, dist.geometric_pmf(float(rng.uniform(0.2, 1.0)), t_max))
    if rng.random() < 0.5:
        d = dist.max_of([d, dist.geometric_pmf(float(rng.uniform(0.2, 1.0)), t_max)])
    return d


def closure_under_max_test(count: int, seed: int, t_max: int = 256,
                           tolerance: float = DEFAULT_TOL) -> CheckReport:
    """Draw ``count`` NBU laws and check NBU for pairwise maxima and the overall max."""
    if count < 1:
        raise InvalidParameterError("count must be >= 1")
    rng = np.random.default_rng(seed)
    pool = []
    while len(pool) < count:
        d = random_nbu_pmf(rng, t_max)
        if check_nbu(d, tolerance).passed:
            pool.append(d)
    worst, witness = -math.inf, None
    combos = [((i, i + 1), [pool[i], pool[i + 1]]) for i in range(count - 1)]
    combos.append((("all",), pool))
    for tag, group in combos:
        rep = check_nbu(dist.max_of(group), tolerance)
        if rep.worst_violation > worst:
            worst, witness = rep.worst_violation, tag
    return CheckReport("max_closure", worst <= tolerance, worst, witness, tolerance)
