"""Checking the ageing property on exact delivery-time laws."""

# %%
import numpy as np

from delivery_bounds import check_min_bound, check_nbu, completion_pmf
from delivery_bounds import distributions as dist
from delivery_bounds.exact_engine import horizon_for_tail
from delivery_bounds.nbu_checks import closure_under_max_test, ks_to_exponential
from delivery_bounds.protocol import RepeaterSpec, build_repeater

# %%
tree = build_repeater(RepeaterSpec(2, 0.3, 0.6))
pmf = completion_pmf(tree, horizon_for_tail(tree, 1e-13)).pmf
rep = check_nbu(pmf, max(1e-12, 2 * pmf.tail_mass))
print("repeater law NBU:", rep.passed, "worst margin", f"{rep.worst_violation:.1e}", "at", rep.witness)
for n in (2, 3, 5):
    print(f"  E[min of {n}] >= E[T]/{n}:", check_min_bound(pmf, n).passed)

# %%
# A mixture of a fast and a slow geometric ages the wrong way.
dense = 0.5 * dist.geometric_pmf(0.9, 400).dense() + 0.5 * dist.geometric_pmf(0.05, 400).dense()
mix = dist.Pmf.from_dense(dense, 1 - dense.sum())
bad = check_nbu(mix, 1e-9)
print("mixture NBU:", bad.passed, "worst margin", f"{bad.worst_violation:.3f}", "at", bad.witness)

# %%
print("closure under max, 100 random laws:", closure_under_max_test(100, seed=1).passed)

# %%
# With rarer swaps the normalised delivery time looks more and more exponential.
for p_swap in (0.5, 0.2, 0.1, 0.05):
    t = build_repeater(RepeaterSpec(2, 0.1, p_swap))
    d = completion_pmf(t, horizon_for_tail(t, 1e-12)).pmf
    print(f"p_swap={p_swap:<5} sup distance to Exp(1): {ks_to_exponential(d):.4f}")
