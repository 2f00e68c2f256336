"""Mean delivery time of a 17-node repeater chain, exact versus bounds.

Sweeps the swap success probability for a chain with four nesting levels
and prints the exact mean next to the closed-form bounds and the older
Markov-style baseline.
"""

# %%
import numpy as np

from delivery_bounds import RepeaterSpec, build_repeater, mean_of
from delivery_bounds.bounds import markov_baseline, repeater_bounds, three_over_two

N_LEVELS, P_GEN = 4, 0.5

# %% [markdown]
# Each row shows every estimate divided by the exact mean, so a bound is
# valid when its lower ratio is <= 1 and its upper ratio is >= 1.

# %%
print(f"{'p_swap':>6} {'exact':>10} {'lower':>7} {'upper':>7} {'3/2':>7} {'mk_lo':>7} {'mk_up':>7}")
for p_swap in np.round(np.arange(0.2, 1.01, 0.1), 2):
    spec = RepeaterSpec(N_LEVELS, P_GEN, float(p_swap))
    exact = mean_of(build_repeater(spec), rel_tol=1e-4)
    rep = repeater_bounds(spec)
    mk_lo, mk_up, _ = markov_baseline(spec, 0)
    ratios = np.array([rep.mean_lower, rep.mean_upper, three_over_two(spec), mk_lo, mk_up]) / exact
    print(f"{p_swap:6.1f} {exact:10.3f} " + " ".join(f"{r:7.3f}" for r in ratios))

# %% [markdown]
# The 3-over-2 estimate always sits below the new upper bound. The new
# bounds stay within a factor of about 2.3 of the exact value on this
# sweep, while the Markov upper bound is off by a factor of four to six.
