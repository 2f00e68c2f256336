"""A k-user switch: Monte Carlo means against the analytical upper bound."""

# %%
from delivery_bounds import SwitchSpec, build_switch, estimate, generate, mean_of
from delivery_bounds.bounds import switch_bounds

P_GEN = 0.1

# %%
for p_fuse in (0.5, 1.0):
    for k in (2, 3, 5, 8):
        tree = build_switch(SwitchSpec(k, p_fuse, generate(P_GEN)))
        sim = estimate(tree, 200_000, seed=k)
        exact = mean_of(tree, 1e-6)
        bound = switch_bounds(k, p_fuse, 1 / P_GEN).mean_upper
        print(f"p_fuse={p_fuse:.1f} k={k}: simulated {sim.mean:8.3f} +- {sim.std_error:.3f}"
              f"  exact {exact:8.3f}  bound {bound:8.3f}")

# %% [markdown]
# For two arms the bound is nearly tight; it grows linearly in k while the
# exact mean grows only like a harmonic number.
