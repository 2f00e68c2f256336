"""Exact completion-time distribution of a protocol tree.

Leaves are geometric; a restart node is the geometric compound of the
maximum of its children.  Structurally identical subtrees are evaluated once
per call, so a symmetric chain over ``2**n`` segments costs ``n`` compounding
steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import distributions as dist
from .bounds import tree_mean_upper, tree_tail_upper
from .errors import InvalidParameterError, ResourceLimitError, UnsupportedModelError
from .protocol import ProtocolNode

# Largest horizon mean_of will try (about 128 MiB per working array).
MAX_HORIZON = 1 << 24


@dataclass(frozen=True)
class ExactResult:
    pmf: dist.Pmf
    mean_lower: float
    tail_mass: float
    is_upper_bound_model: bool

    def co_cdf(self):
        return self.pmf.survival()


def _evaluate(node: ProtocolNode, t_max: int, memo: dict) -> dist.Pmf:
    key = node.structure
    hit = memo.get(key)
    if hit is not None:
        return hit
    if node.is_leaf:
        out = dist.geometric_pmf(node.p, t_max)
    else:
        kids = [_evaluate(c, t_max, memo) for c in node.children]
        out = dist.geometric_compound(dist.max_of(kids), node.p, t_max)
    memo[key] = out
    return out


def completion_pmf(tree: ProtocolNode, t_max: int) -> ExactResult:
    """Completion-time law of ``tree`` on ``1..t_max`` with tracked tail."""
    if t_max < 1:
        raise InvalidParameterError("t_max must be >= 1")
    pmf = _evaluate(tree, int(t_max), {})
    return ExactResult(pmf=pmf, mean_lower=dist.mean(pmf).lower,
                       tail_mass=pmf.tail_mass,
                       is_upper_bound_model=tree.has_bound_mode())


def round_pmf(node: ProtocolNode, t_max: int) -> dist.Pmf:
    """Law of one round of a restart node: the max over its children."""
    if node.is_leaf:
        raise InvalidParameterError("a generate node has no rounds")
    memo = {}
    return dist.max_of([_evaluate(c, t_max, memo) for c in node.children])


def initial_horizon(tree: ProtocolNode) -> int:
    return max(16, math.ceil(4 * tree_mean_upper(tree)))


def mean_interval(tree: ProtocolNode, t_max: int) -> dist.MeanInterval:
    """Mean of the truncated law with a provable upper end from the tail envelope."""
    res = completion_pmf(tree, t_max)
    return dist.mean(res.pmf, tree_tail_upper(tree))


def mean_of(tree: ProtocolNode, rel_tol: float = 1e-6,
            max_horizon: int = MAX_HORIZON) -> float:
    """Mean completion time with relative error at most ``rel_tol``.

    The horizon starts at four times an upper bound on the mean and doubles
    until the part of the mean hidden beyond it, bounded through an
    exponential envelope of the tail, is small enough.  The midpoint of the
    resulting interval is returned.
    """
    if not (0.0 < rel_tol < 1.0):
        raise InvalidParameterError("rel_tol must lie in (0, 1)")
    if tree.has_bound_mode():
        raise UnsupportedModelError(
            "tree contains lower-bounded success probabilities; no exact mean")
    t_max = initial_horizon(tree)
    envelope = tree_tail_upper(tree)
    best = None
    while True:
        res = completion_pmf(tree, t_max)
        iv = dist.mean(res.pmf, envelope)
        best = iv
        if iv.upper - iv.lower <= 2 * rel_tol * iv.lower:
            return 0.5 * (iv.lower + iv.upper)
        if 2 * t_max > max_horizon:
            raise ResourceLimitError(
                f"no convergence up to t_max={t_max}", partial=best)
        t_max *= 2


def horizon_for_tail(tree: ProtocolNode, tail_eps: float) -> int:
    """A horizon at which the exact tail mass is guaranteed below ``tail_eps``.

    Read off the exponential envelope, which dominates the exact co-CDF.
    """
    if not (0.0 < tail_eps < 1.0):
        raise InvalidParameterError("tail_eps must lie in (0, 1)")
    env = tree_tail_upper(tree)
    t = (env.prefactor_log - math.log(tail_eps)) / env.rate
    return max(16, math.ceil(max(t, env.valid_from)))
