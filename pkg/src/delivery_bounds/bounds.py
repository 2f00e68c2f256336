"""Closed-form bounds on completion times of restart-until-success protocols.

Everything here is a pure function of a handful of parameters.  Means are in
timesteps; tail bounds are exponential curves ``exp(a - b t)`` packaged as
:class:`TailCurve`.

Notation used throughout:

``mu0``
    mean of an NBU variable dominating a single elementary-link generation
    (``1 - 1/log(1 - p_gen)`` for discrete attempts, ``1/p_gen`` for the
    exponential model).
``nu0``
    mean of the later of two independent link generations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Optional, Sequence

import numpy as np

from .distributions import ExpCurve
from .errors import InvalidParameterError
from .protocol import ProtocolNode, RepeaterSpec


@dataclass(frozen=True)
class TailCurve:
    """Exponential-form bound ``exp(prefactor_log - rate * t)`` on ``Pr(T > t)``.

    Upper curves report ``min(1, .)`` and give no information (value 1)
    before ``valid_from``; lower curves are only asserted from ``valid_from``
    on (value 0 before).
    """

    prefactor_log: float
    rate: float
    valid_from: float = 0.0
    direction: Literal["upper", "lower"] = "upper"

    def __post_init__(self):
        if not self.rate > 0:
            raise InvalidParameterError("rate must be positive")
        if self.direction not in ("upper", "lower"):
            raise InvalidParameterError(f"bad direction {self.direction!r}")

    def raw(self, t):
        """Unclipped curve, for plotting."""
        return np.exp(self.prefactor_log - self.rate * np.asarray(t, dtype=np.float64))

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        v = np.minimum(1.0, self.raw(t))
        inside = t >= self.valid_from
        fill = 1.0 if self.direction == "upper" else 0.0
        v = np.where(inside, v, fill)
        return float(v) if v.ndim == 0 else v

    def sum_beyond(self, t: int) -> float:
        """Upper bound on ``sum_{s > t} Pr(T > s)`` (upper curves only)."""
        if self.direction != "upper":
            raise InvalidParameterError("only an upper curve bounds a tail sum")
        flat_until = max(self.valid_from, self.prefactor_log / self.rate)
        s0 = max(t + 1, math.ceil(flat_until))
        ones = s0 - (t + 1)
        return ones + math.exp(self.prefactor_log - self.rate * s0) / -math.expm1(-self.rate)

    @classmethod
    def from_exp(cls, curve: ExpCurve) -> "TailCurve":
        return cls(curve.rate * curve.shift, curve.rate, 0.0, "upper")


@dataclass
class BoundReport:
    mean_lower: float
    mean_upper: float
    tail_upper: TailCurve
    tail_lower: Optional[TailCurve]
    provenance: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    degenerate: bool = False
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.mean_lower <= self.mean_upper * (1 + 1e-12):
            raise ValueError("mean_lower exceeds mean_upper")
        if not self.provenance:
            raise ValueError("provenance must not be empty")


def _check_p(p, name="p", allow_one=True):
    ok = 0.0 < p <= 1.0 if allow_one else 0.0 < p < 1.0
    if not ok:
        raise InvalidParameterError(f"{name}={p!r} out of range")


def gen_upper_mean(p_gen: float) -> float:
    """Mean of ``1 + Exp`` dominating a geometric(p_gen) generation time.

    Equals ``1 - 1/log(1 - p_gen)``; the limit ``p_gen = 1`` gives 1.
    """
    _check_p(p_gen, "p_gen")
    if p_gen == 1.0:
        return 1.0
    return 1.0 - 1.0 / math.log1p(-p_gen)


def gen_envelope(p_gen: float) -> ExpCurve:
    """Shifted exponential whose co-CDF dominates geometric(p_gen)."""
    _check_p(p_gen, "p_gen", allow_one=False)
    return ExpCurve(rate=-math.log1p(-p_gen), shift=1.0)


def rus_mean(m: float, p: float, bound_mode: bool = False) -> tuple[float, bool]:
    """``m / p``; an upper bound rather than an equality when ``bound_mode``."""
    if not m > 0:
        raise InvalidParameterError("m must be positive")
    _check_p(p)
    return m / p, bool(bound_mode)


def rus_tail(m: float, p: float, bound_mode: bool = False):
    """Two-sided exponential tail for a restart loop with mean round time ``m``.

    Returns ``(upper, lower)``.  ``lower`` is ``None`` in bound mode (only the
    upper form survives a lower-bounded success probability, and then only
    for ``t >= m``) and when ``p == 1``.
    """
    if not m > 0:
        raise InvalidParameterError("m must be positive")
    _check_p(p)
    upper = TailCurve(p, p / m, m if bound_mode else 0.0, "upper")
    if bound_mode or p == 1.0:
        return upper, None
    return upper, TailCurve(0.0, p / (m * (1.0 - p)), 0.0, "lower")


def max_mean_bounds(means: Sequence[float], iid: bool = False,
                    n: int | None = None) -> tuple[float, float]:
    """Bracket ``E[max(T_1..T_n)]`` from the individual means.

    Independent NBU inputs: ``(max, sum)``.  IID NBU inputs with mean ``E``:
    ``(E, (n - 1 + 1/n) E)``.
    """
    means = [float(x) for x in means]
    if not means:
        raise InvalidParameterError("need at least one mean")
    if any(x <= 0 for x in means):
        raise InvalidParameterError("means must be positive")
    if iid:
        if max(means) - min(means) > 1e-12 * max(means):
            raise InvalidParameterError("iid inputs must share one mean")
        n = len(means) if n is None else n
        if n < 1:
            raise InvalidParameterError("n must be >= 1")
        e = means[0]
        return e, (n - 1 + 1.0 / n) * e
    return max(means), math.fsum(means)


def max_mean_iid_closed(p: float, model: Literal["geometric", "exponential"] = "geometric") -> float:
    """``E[max(X1, X2)]`` for two iid geometric / exponential variables of mean 1/p."""
    _check_p(p)
    if model == "geometric":
        return (3.0 - 2.0 * p) / (p * (2.0 - p))
    if model == "exponential":
        return 3.0 / (2.0 * p)
    raise InvalidParameterError(f"unknown model {model!r}")


def r_n_mean(n: int, p_swap: float, nu0: float) -> float:
    """Mean of the 'longest sum' variable that the nested max is compared to."""
    if n < 0:
        raise InvalidParameterError("n must be >= 0")
    _check_p(p_swap, "p_swap")
    return max_mean_iid_closed(p_swap) ** n * nu0


def _mu0(spec: RepeaterSpec) -> tuple[float, str]:
    if spec.gen_model == "discrete":
        return gen_upper_mean(spec.p_gen), "shifted-exponential envelope of geometric"
    return 1.0 / spec.p_gen, "exponential generation mean"


def _nu0(spec: RepeaterSpec) -> float:
    model = "geometric" if spec.gen_model == "discrete" else "exponential"
    return max_mean_iid_closed(spec.p_gen, model)


def repeater_bounds(spec: RepeaterSpec) -> BoundReport:
    """Mean and tail bounds for the symmetric nested repeater chain."""
    n, ps, pg = spec.nesting_levels, spec.p_swap, spec.p_gen
    mu0, mu0_source = _mu0(spec)
    nu0 = _nu0(spec)
    params = dict(n=n, p_swap=ps, p_gen=pg, model=spec.gen_model)
    if n == 0:
        # single link, no swap
        if spec.gen_model == "discrete":
            if pg == 1.0:
                upper = TailCurve(0.0, 1.0, 1.0, "upper")
                lower = None
            else:
                r = -math.log1p(-pg)
                upper = TailCurve(r, r, 0.0, "upper")
                lower = TailCurve(0.0, r, 0.0, "lower")
        else:
            upper = TailCurve(0.0, pg, 0.0, "upper")
            lower = TailCurve(0.0, pg, 0.0, "lower")
        return BoundReport(
            mean_lower=1.0 / pg, mean_upper=mu0, tail_upper=upper, tail_lower=lower,
            provenance=[("mean_lower", "single-link generation mean"),
                        ("mean_upper", mu0_source),
                        ("tail", "single-link generation co-CDF")],
            params=params, degenerate=True,
            extras=dict(mu0=mu0, nu0=nu0, mu0_source=mu0_source))
    f = max_mean_iid_closed(ps)
    mean_upper = (3.0 / (2.0 * ps)) ** n * mu0
    mean_lower = f ** (n - 1) * nu0 / ps
    m_upper = 1.5 * (3.0 / (2.0 * ps)) ** (n - 1) * mu0
    m_lower = f ** (n - 1) * nu0
    tail_upper = TailCurve(ps, ps / m_upper, 0.0, "upper")
    tail_lower = None if ps == 1.0 else TailCurve(0.0, ps / (m_lower * (1.0 - ps)), 0.0, "lower")
    return BoundReport(
        mean_lower=mean_lower, mean_upper=mean_upper,
        tail_upper=tail_upper, tail_lower=tail_lower,
        provenance=[
            ("mean_upper", "iterated 3/2 max bound for NBU inputs, (3/(2 p_swap))^n mu0"),
            ("mean_lower", "max-of-sums vs longest-sum dominance, R_n mean / p_swap"),
            ("tail_upper", "geometric-compound exponential upper tail with m_upper"),
            ("tail_lower", "geometric-compound exponential lower tail with m_lower"),
            ("mu0", mu0_source),
        ],
        params=params,
        extras=dict(mu0=mu0, nu0=nu0, mu0_source=mu0_source,
                    m_upper=m_upper, m_lower=m_lower))


def three_over_two(spec: RepeaterSpec) -> float:
    """The classical ``(3/(2 p_swap))^n / p_gen`` estimate (also the small-p limit)."""
    return (3.0 / (2.0 * spec.p_swap)) ** spec.nesting_levels / spec.p_gen


def markov_baseline(spec: RepeaterSpec, t: int) -> tuple[float, float, float]:
    """Older bounds: max of two means in ``[mu, 2 mu]`` per level, plus Markov.

    Returns ``(mean_lower, mean_upper, Pr(T > t) upper bound clipped to 1)``.
    """
    if t < 0:
        raise InvalidParameterError("t must be >= 0")
    n, ps, pg = spec.nesting_levels, spec.p_swap, spec.p_gen
    lo = (1.0 / ps) ** n / pg
    hi = (2.0 / ps) ** n / pg
    return lo, hi, min(1.0, hi / (t + 1))


def markov_tail(mean_value: float, t):
    """``Pr(T > t) <= E[T] / (t + 1)`` for integer-valued T, clipped at 1."""
    t = np.asarray(t, dtype=np.float64)
    v = np.minimum(1.0, mean_value / (t + 1.0))
    return float(v) if v.ndim == 0 else v


def harmonic(N: int) -> float:
    if N < 1:
        raise InvalidParameterError("N must be >= 1")
    return float(sum(Fraction(1, k) for k in range(1, N + 1)))


def deterministic_swap_bounds(N: int, p_gen: float) -> tuple[float, float]:
    """``(a H_N, 1 + a H_N)`` with ``a = -1/log(1 - p_gen)``, for p_swap = 1.

    ``p_gen = 1`` is the degenerate case ``a = 0``; the result ``(0, 1)``
    still brackets the exact mean 1.
    """
    _check_p(p_gen, "p_gen")
    h = harmonic(N)
    a = 0.0 if p_gen == 1.0 else -1.0 / math.log1p(-p_gen)
    return a * h, 1.0 + a * h


def switch_bounds(k: int, p_fuse: float, arm_mean: float) -> BoundReport:
    """Bounds for a k-armed switch whose arms are iid NBU with mean ``arm_mean``."""
    if k < 2:
        raise InvalidParameterError("k must be >= 2")
    _check_p(p_fuse, "p_fuse")
    if not arm_mean > 0:
        raise InvalidParameterError("arm_mean must be positive")
    factor = k - 1 + 1.0 / k
    m = factor * arm_mean
    return BoundReport(
        mean_lower=arm_mean / p_fuse,
        mean_upper=m / p_fuse,
        tail_upper=TailCurve(p_fuse, p_fuse / m, 0.0, "upper"),
        tail_lower=None,
        provenance=[
            ("mean_upper", "iid NBU max factor (k - 1 + 1/k) divided by p_fuse"),
            ("mean_lower", "max of k arms is at least one arm"),
            ("tail_upper", "geometric-compound exponential upper tail"),
        ],
        params=dict(k=k, p_fuse=p_fuse, arm_mean=arm_mean))


def tree_mean_upper(node: ProtocolNode, _memo=None) -> float:
    """Upper bound on the mean of an NBU variable dominating the tree's time.

    Discrete leaves are replaced by their shifted-exponential envelope; each
    restart node then uses the iid or independent max-mean bound of its
    children, divided by its (floor) success probability.
    """
    memo = {} if _memo is None else _memo
    key = node.structure
    if key in memo:
        return memo[key]
    if node.is_leaf:
        val = gen_upper_mean(node.p)
    else:
        val = _round_mean_upper(node, memo) / node.p
    memo[key] = val
    return val


def _round_mean_upper(node: ProtocolNode, memo) -> float:
    kids = node.children
    ups = [tree_mean_upper(c, memo) for c in kids]
    if len(kids) == 1:
        return ups[0]
    if all(c.structure == kids[0].structure for c in kids):
        return max_mean_bounds([ups[0]], iid=True, n=len(kids))[1]
    return max_mean_bounds(ups)[1]


def tree_mean_lower(node: ProtocolNode) -> float:
    """Lower bound on the mean: a round lasts at least as long as its slowest child.

    A restart node with a lower-bounded (floor) success probability only
    contributes one round, since its true success probability is unknown.
    """
    if node.is_leaf:
        return 1.0 / node.p
    m = max(tree_mean_lower(c) for c in node.children)
    return m if node.bound_mode else m / node.p


def tree_tail_upper(node: ProtocolNode) -> TailCurve:
    """Exponential upper bound on ``Pr(T > t)`` valid for any protocol tree."""
    if node.is_leaf:
        if node.p == 1.0:
            return TailCurve(0.0, 1.0, 1.0, "upper")
        return TailCurve.from_exp(gen_envelope(node.p))
    memo = {}
    m = _round_mean_upper(node, memo)
    upper, _ = rus_tail(m, node.p, bound_mode=node.bound_mode)
    return upper
