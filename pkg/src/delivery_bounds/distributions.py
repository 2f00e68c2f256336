"""Truncated discrete distributions over integer timesteps.

A :class:`Pmf` stores the probability masses of a nonnegative integer random
variable up to a horizon ``t_max``; whatever lies beyond the horizon is kept
as a single ``tail_mass``.  Every operation here tracks that residual so that
quantities derived from a truncated law come with an explicit error bar.

Small masses are never computed as a difference of two numbers close to one:
masses are built from sums of nonnegative products and tails from suffix sums
(or ``log1p``/``expm1``), which keeps relative accuracy in the far tail and at
the very start of the support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg
import scipy.signal

from .errors import InvalidParameterError

NORM_EPS = 1e-12

# Block size at which the renewal solver switches to a dense triangular solve.
_RENEWAL_BLOCK = 128


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability mass function on ``support_start, ..., t_max`` plus tail.

    ``masses[i]`` is ``Pr(T = support_start + i)``; ``tail_mass`` is
    ``Pr(T > t_max)``.
    """

    support_start: int
    masses: np.ndarray
    tail_mass: float

    def __post_init__(self):
        m = np.array(self.masses, dtype=np.float64, copy=True).ravel()
        if m.size == 0:
            raise InvalidParameterError("a Pmf needs at least one mass entry")
        if self.support_start < 0:
            raise InvalidParameterError("support_start must be >= 0")
        if np.any(~np.isfinite(m)) or np.any(m < 0.0) or np.any(m > 1.0):
            raise InvalidParameterError("masses must lie in [0, 1]")
        tail = float(self.tail_mass)
        if not (0.0 <= tail <= 1.0):
            raise InvalidParameterError(f"tail_mass {tail} outside [0, 1]")
        total = math.fsum(m) + tail
        if abs(total - 1.0) > NORM_EPS:
            raise InvalidParameterError(
                f"masses + tail_mass = {total!r} is not normalized")
        m.setflags(write=False)
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "tail_mass", tail)
        object.__setattr__(self, "support_start", int(self.support_start))

    @property
    def t_max(self) -> int:
        return self.support_start + self.masses.size - 1

    @classmethod
    def from_dense(cls, dense, tail_mass: float) -> "Pmf":
        """Build from masses indexed from t = 0; leading zeros are dropped."""
        dense = np.clip(np.asarray(dense, dtype=np.float64), 0.0, 1.0)
        nz = np.flatnonzero(dense)
        start = int(nz[0]) if nz.size else dense.size - 1
        return cls(start, dense[start:], tail_mass)

    def dense(self, horizon: int | None = None) -> np.ndarray:
        """Masses indexed from 0 to ``horizon`` (defaults to ``t_max``)."""
        h = self.t_max if horizon is None else horizon
        if h > self.t_max:
            raise InvalidParameterError("horizon beyond t_max")
        out = np.zeros(h + 1)
        hi = h + 1 - self.support_start
        if hi > 0:
            out[self.support_start:] = self.masses[:hi]
        return out

    def survival(self, horizon: int | None = None) -> np.ndarray:
        """Co-CDF ``Pr(T > t)`` for ``t = 0..horizon`` (exact within t_max)."""
        d = self.dense()
        # suffix sums of the masses strictly after t
        suffix = np.cumsum(d[::-1])[::-1]
        s = np.empty_like(d)
        s[:-1] = suffix[1:]
        s[-1] = 0.0
        s += self.tail_mass
        np.clip(s, 0.0, 1.0, out=s)
        h = self.t_max if horizon is None else horizon
        return s[:h + 1]

    def cdf(self) -> np.ndarray:
        return np.minimum(np.cumsum(self.dense()), 1.0)

    def truncate(self, horizon: int) -> "Pmf":
        """Same law with a smaller horizon; mass beyond moves to the tail."""
        if horizon >= self.t_max:
            return self
        if horizon < 0:
            raise InvalidParameterError("horizon must be >= 0")
        surv = self.survival()
        return Pmf.from_dense(self.dense(horizon), float(surv[horizon]))

    def __repr__(self):
        return (f"Pmf(support_start={self.support_start}, t_max={self.t_max}, "
                f"tail_mass={self.tail_mass:.3g})")


@dataclass(frozen=True)
class ExpCurve:
    """Shifted exponential co-CDF: 1 up to ``shift``, then exp(-rate (t - shift))."""

    rate: float
    shift: float = 0.0

    def __post_init__(self):
        if not self.rate > 0:
            raise InvalidParameterError("rate must be positive")
        if self.shift < 0:
            raise InvalidParameterError("shift must be nonnegative")

    def co_cdf(self, t):
        t = np.asarray(t, dtype=np.float64)
        out = np.exp(-self.rate * np.maximum(t - self.shift, 0.0))
        return float(out) if out.ndim == 0 else out

    @property
    def mean(self) -> float:
        return self.shift + 1.0 / self.rate

    def sum_beyond(self, t: int) -> float:
        """Upper bound on sum_{s > t} co_cdf(s) over integers s."""
        first = t + 1
        s0 = max(first, math.ceil(self.shift))
        ones = s0 - first
        return ones + math.exp(-self.rate * (s0 - self.shift)) / -math.expm1(-self.rate)


class MeanInterval(NamedTuple):
    lower: float
    upper: float
    truncated: bool


def _finish(masses: np.ndarray, tail: float) -> Pmf:
    """Clip rounding noise and rescale masses so that masses + tail == 1.

    The tail is computed separately to keep its relative accuracy; the
    rescaling only absorbs floating-point drift (checked to be tiny).
    """
    masses = np.clip(masses, 0.0, 1.0)
    tail = min(max(tail, 0.0), 1.0)
    total = math.fsum(masses)
    drift = total + tail - 1.0
    if abs(drift) > 1e-9:
        raise ArithmeticError(f"normalization drift {drift:.3g} too large")
    if total > 0:
        masses *= (1.0 - tail) / total
    return Pmf.from_dense(masses, tail)


def _check_prob(p, name="p"):
    if not (0.0 < p <= 1.0):
        raise InvalidParameterError(f"{name}={p!r} must lie in (0, 1]")


def geometric_pmf(p: float, t_max: int) -> Pmf:
    """Number of attempts until the first success, truncated at ``t_max``."""
    _check_prob(p)
    if t_max < 1:
        raise InvalidParameterError("t_max must be >= 1")
    t = np.arange(t_max, dtype=np.float64)
    if p == 1.0:
        masses = np.zeros(t_max)
        masses[0] = 1.0
        return Pmf(1, masses, 0.0)
    log_q = math.log1p(-p)
    masses = p * np.exp(log_q * t)
    tail = math.exp(log_q * t_max)
    return Pmf(1, masses, tail)


def point_mass(t0: int, t_max: int | None = None) -> Pmf:
    """Deterministic value ``t0``; the horizon defaults to ``t0``."""
    t_max = t0 if t_max is None else t_max
    if t0 < 0 or t_max < t0:
        raise InvalidParameterError("need 0 <= t0 <= t_max")
    masses = np.zeros(t_max - t0 + 1)
    masses[0] = 1.0
    return Pmf(t0, masses, 0.0)


def mean(d: Pmf, tail=None) -> MeanInterval:
    """Mean of a truncated law as an interval.

    ``lower`` counts every tail outcome as ``t_max + 1``.  When the law is
    truncated, ``upper`` is infinite unless a dominating ``tail`` model is
    given; it must provide ``sum_beyond(t)``, an upper bound on
    ``sum_{s>t} Pr(T > s)`` (``ExpCurve`` and ``bounds.TailCurve`` do).
    """
    surv = d.survival()
    lower = math.fsum(surv)
    if d.tail_mass == 0.0:
        return MeanInterval(lower, lower, False)
    if tail is None:
        return MeanInterval(lower, math.inf, True)
    rest = min(float(tail.sum_beyond(d.t_max)), math.inf)
    return MeanInterval(lower, lower + rest, True)


def co_cdf(d: Pmf, t) -> float:
    """``Pr(T > t)``; beyond ``t_max`` this returns ``tail_mass``, an upper bound."""
    if t < 0:
        return 1.0
    t = int(math.floor(t))
    if t >= d.t_max:
        return d.tail_mass
    return float(d.survival()[t])


def _convolve_cols(x: np.ndarray, kern: np.ndarray) -> np.ndarray:
    """Full linear convolution of every column of ``x`` with ``kern``."""
    if x.ndim == 1:
        return scipy.signal.convolve(x, kern, method="auto")
    return scipy.signal.convolve(x, kern[:, None], method="auto")


def convolve(a: Pmf, b: Pmf) -> Pmf:
    """Law of ``A + B`` for independent ``A`` and ``B``.

    The result's horizon is ``min(a.t_max, b.t_max)``; everything past it is
    folded into the tail.
    """
    h = min(a.t_max, b.t_max)
    da, db = a.dense(h), b.dense(h)
    masses = _convolve_cols(da, db)[:h + 1]
    np.maximum(masses, 0.0, out=masses)
    # Pr(A + B > h) = Pr(A > h) + sum_{s<=h} Pr(A = s) Pr(B > h - s)
    sa, sb = a.survival(h), b.survival(h)
    tail = float(sa[h] + np.dot(da, sb[::-1]))
    return _finish(masses, tail)


def max_of(ds: Sequence[Pmf]) -> Pmf:
    """Law of the maximum of independent variables (CDFs multiply)."""
    ds = list(ds)
    if not ds:
        raise InvalidParameterError("max_of needs at least one Pmf")
    if len(ds) == 1:
        return ds[0]
    h = min(d.t_max for d in ds)
    f = np.stack([d.dense(h) for d in ds])
    F = np.minimum(np.cumsum(f, axis=1), 1.0)
    F_prev = np.zeros_like(F)
    F_prev[:, 1:] = F[:, :-1]
    # Telescoped product rule: every term is a product of nonnegatives.
    k = len(ds)
    prefix = np.ones_like(F)
    for i in range(1, k):
        prefix[i] = prefix[i - 1] * F_prev[i - 1]
    suffix = np.ones_like(F)
    for i in range(k - 2, -1, -1):
        suffix[i] = suffix[i + 1] * F[i + 1]
    masses = np.sum(prefix * f * suffix, axis=0)
    s_h = np.array([d.survival(h)[h] for d in ds])
    with np.errstate(divide="ignore"):
        tail = float(-np.expm1(np.sum(np.log1p(-s_h))))
    return _finish(masses, tail)


def _solve_renewal(c: np.ndarray, kern: np.ndarray, q: float) -> np.ndarray:
    """Solve ``x[t] = c[t] + q * sum_{s<=t} kern[s] x[t-s]`` column-wise.

    Divide and conquer over the time axis: the left half is solved first and
    its influence on the right half is added with one convolution, so the
    total cost is O(n log^2 n).  Blocks at the bottom are solved exactly as
    lower-triangular Toeplitz systems.
    """
    n = c.shape[0]
    x = np.zeros_like(c)
    acc = np.zeros_like(c)
    b = min(_RENEWAL_BLOCK, n)
    col = -q * kern[:b]
    col[0] += 1.0
    L_full = scipy.linalg.toeplitz(col, np.zeros(b))

    def base(lo, hi):
        L = L_full[:hi - lo, :hi - lo]
        x[lo:hi] = scipy.linalg.solve_triangular(
            L, c[lo:hi] + acc[lo:hi], lower=True, check_finite=False)

    def solve(lo, hi):
        if hi - lo <= b:
            base(lo, hi)
            return
        mid = (lo + hi) // 2
        solve(lo, mid)
        contrib = _convolve_cols(x[lo:mid], kern[:hi - lo])
        acc[mid:hi] += q * contrib[mid - lo:hi - lo]
        solve(mid, hi)

    solve(0, n)
    return x


def geometric_compound(m: Pmf, p: float, t_max: int) -> Pmf:
    """Law of ``M_1 + ... + M_K`` with ``K ~ Geometric(p)`` on {1, 2, ...}.

    Masses follow ``f_T = p f_M + (1 - p) f_M * f_T`` and the tail follows the
    matching survival recursion ``S_T = S_M + (1 - p) f_M * S_T``; both are
    solved in one pass.  The horizon is ``min(t_max, m.t_max)``.
    """
    _check_prob(p)
    h = min(t_max, m.t_max)
    if h < 0:
        raise InvalidParameterError("t_max must be >= 0")
    if p == 1.0:
        return m.truncate(h)
    q = 1.0 - p
    fm = m.dense(h)
    if q * fm[0] >= 1.0:
        raise InvalidParameterError("compound sum diverges (no progress per round)")
    c = np.column_stack([p * fm, m.survival(h)])
    x = _solve_renewal(c, fm, q)
    return _finish(x[:, 0], float(x[h, 1]))


def exp_co_cdf(c: ExpCurve, t: float) -> float:
    """Co-CDF of a shifted exponential curve at ``t``."""
    return c.co_cdf(t)
