"""Acceptance criteria, each checked at its stated tolerance.

Run ``pytest tests/test_acceptance.py -v`` to get one PASS/FAIL line per
criterion in the terminal summary.
"""

import math
import time

import numpy as np
import pytest

from delivery_bounds import bounds as B
from delivery_bounds import distributions as dist
from delivery_bounds.exact_engine import completion_pmf, horizon_for_tail, mean_of, round_pmf
from delivery_bounds.montecarlo import dkw_epsilon, estimate
from delivery_bounds.nbu_checks import (check_min_bound, check_nbu, closure_under_max_test,
                                        ks_to_exponential)
from delivery_bounds.protocol import RepeaterSpec, SwitchSpec, build_switch, generate

from corpus import TREES, random_rus_tree, repeater
from oracles import max_geometric_mean_exact

MC_SAMPLES = 10 ** 6


def exact_survival(tree, eps=1e-12):
    res = completion_pmf(tree, horizon_for_tail(tree, eps))
    return res.pmf.survival(), res


def test_c1_mean_sandwich_and_improvement(verdict):
    start = time.perf_counter()
    problems, spot = [], None
    for p_swap in np.round(np.arange(0.2, 1.0001, 0.1), 10):
        spec = RepeaterSpec(4, 0.5, float(p_swap))
        exact = mean_of(repeater(4, 0.5, float(p_swap)), rel_tol=1e-4)
        rep = B.repeater_bounds(spec)
        m_lo, m_hi, _ = B.markov_baseline(spec, 0)
        if not rep.mean_lower <= exact <= rep.mean_upper:
            problems.append(f"sandwich at p_swap={p_swap}")
        if not (rep.mean_upper <= m_hi and rep.mean_lower >= m_lo):
            problems.append(f"not tighter than baseline at p_swap={p_swap}")
        if p_swap == 0.5:
            spot = exact
    elapsed = time.perf_counter() - start
    ok = not problems and 101.14 < spot < 197.86 and elapsed < 300
    verdict("1 mean sandwich n=4 p_gen=0.5", ok,
            f"exact(0.5)={spot:.4f}, {elapsed:.1f}s, {problems or 'no violations'}")


@pytest.mark.parametrize("p_swap", [0.5, 0.2])
def test_c2_tail_sandwich(verdict, p_swap):
    tree = repeater(4, 0.1, p_swap)
    s, res = exact_survival(tree, 1e-10)
    rep = B.repeater_bounds(RepeaterSpec(4, 0.1, p_swap))
    t = np.arange(s.size)
    sel = s >= 1e-6
    tol = 1e-9
    lower_ok = np.all(rep.tail_lower(t[sel]) <= s[sel] + tol)
    upper_ok = np.all(s[sel] <= np.minimum(1.0, rep.tail_upper(t[sel])) + tol)
    # beyond the first point where the exponential drops below the Markov curve,
    # it stays below; checked well past the computed horizon
    _, markov_mean, _ = B.markov_baseline(RepeaterSpec(4, 0.1, p_swap), 0)
    grid = np.arange(0, 20 * s.size)
    below = rep.tail_upper.raw(grid) < B.markov_tail(markov_mean, grid)
    cross = int(np.argmax(below)) if below.any() else None
    crossing_ok = cross is not None and bool(np.all(below[cross:]))
    ok = bool(lower_ok and upper_ok and crossing_ok and res.tail_mass < 1e-9)
    verdict(f"2 tail sandwich n=4 p_gen=0.1 p_swap={p_swap}", ok,
            f"t_max={res.pmf.t_max}, residual={res.tail_mass:.1e}, crossing t={cross}")


def test_c3_wald_identity(verdict):
    rng = np.random.default_rng(2024)
    worst, checked = 0.0, 0
    for _ in range(20):
        tree = random_rus_tree(rng, depth=3, p_lo=0.2)
        seen = set()
        for node in tree.walk():
            if node.is_leaf or node.structure in seen:
                continue
            seen.add(node.structure)
            env = B.tree_tail_upper(node)  # the round time is dominated by the node time
            h = horizon_for_tail(node, 1e-14)
            whole = dist.mean(completion_pmf(node, h).pmf, env)
            rounds = dist.mean(round_pmf(node, h), env)
            a = 0.5 * (whole.lower + whole.upper)
            b = 0.5 * (rounds.lower + rounds.upper) / node.p
            worst = max(worst, abs(a - b) / a)
            checked += 1
    verdict("3 Wald identity on 20 random trees", worst <= 1e-6,
            f"{checked} restart nodes, worst relative gap {worst:.2e}")


@pytest.mark.parametrize("name", sorted(TREES))
def test_c4_oracle_triangle(verdict, name):
    tree = TREES[name]
    est = estimate(tree, MC_SAMPLES, seed=20241015)
    exact = mean_of(tree, 1e-9)
    s, _ = exact_survival(tree)
    n = max(s.size, est.empirical_co_cdf.size)
    gap = np.max(np.abs(np.pad(s, (0, n - s.size)) - np.pad(est.empirical_co_cdf,
                                                           (0, n - est.empirical_co_cdf.size))))
    if est.std_error > 0:
        z = abs(est.mean - exact) / est.std_error
    else:
        z = 0.0 if est.mean == exact else math.inf
    ok = z <= 4 and gap <= dkw_epsilon(MC_SAMPLES, 0.99)
    verdict(f"4 Monte Carlo vs exact [{name}]", ok,
            f"z={z:.2f}, sup gap={gap:.2e} vs DKW {dkw_epsilon(MC_SAMPLES):.2e}")


def test_c5_generation_envelope(verdict):
    bad = []
    t = np.arange(1001)
    for p in (0.05, 0.1, 0.3, 0.5, 0.9):
        geo = (1 - p) ** t
        env = dist.exp_co_cdf(B.gen_envelope(p), t)
        mu = B.gen_upper_mean(p)
        if np.any(geo > env):
            bad.append(f"dominance p={p}")
        if not 0 <= mu - 1 / p <= 0.5:
            bad.append(f"difference p={p}")
        if not 1 <= mu * p <= 1 + p / 2:
            bad.append(f"ratio p={p}")
    verdict("5 generation envelope and mean bracket", not bad, str(bad or "all grid points"))


def test_c6_harmonic_bracket(verdict):
    bad = []
    for N in (1, 2, 4, 8, 16, 64):
        for p in (0.1, 0.5, 0.9):
            lo, hi = B.deterministic_swap_bounds(N, p)
            exact = float(max_geometric_mean_exact(N, p))
            if not lo <= exact <= hi:
                bad.append((N, p))
    spot = float(max_geometric_mean_exact(4, 0.5))
    lo, hi = B.deterministic_swap_bounds(4, 0.5)
    ok = not bad and abs(spot - 3.5048) < 1e-4 and abs(lo - 3.0056) < 1e-4 and abs(hi - 4.0056) < 1e-4
    verdict("6 harmonic-number bracket", ok, f"N=4 p=0.5: {lo:.4f} <= {spot:.4f} <= {hi:.4f}")


def test_c7_nbu_suite(verdict):
    failures = []
    for p in np.linspace(0.05, 1.0, 20):
        d = dist.geometric_pmf(float(p), 256)
        if not check_nbu(d, max(1e-12, 2 * d.tail_mass)).passed:
            failures.append(f"geometric {p:.2f}")
    for t0 in (0, 1, 7):
        if not check_nbu(dist.point_mass(t0, 32)).passed:
            failures.append(f"point mass {t0}")
    for name, tree in sorted(TREES.items()):
        d = completion_pmf(tree, horizon_for_tail(tree, 1e-13)).pmf
        tol = max(1e-12, 2 * d.tail_mass)
        if not check_nbu(d, tol).passed:
            failures.append(f"nbu {name}")
            continue
        for n in (2, 3, 5):
            if not check_min_bound(d, n, tol).passed:
                failures.append(f"min bound {name} n={n}")
    closure = closure_under_max_test(100, seed=7)
    if not closure.passed:
        failures.append("closure under max")
    verdict("7 NBU suite", not failures,
            f"closure worst {closure.worst_violation:.1e}; {failures or 'no failures'}")


def test_c8_exponential_limit(verdict):
    vals = []
    for p_swap in (0.5, 0.2, 0.1, 0.05):
        tree = repeater(2, 0.1, p_swap)
        d = completion_pmf(tree, horizon_for_tail(tree, 1e-12)).pmf
        vals.append(ks_to_exponential(d))
    ok = all(b < a - 1e-3 for a, b in zip(vals, vals[1:]))
    verdict("8 distance to exponential decreases", ok, ", ".join(f"{v:.4f}" for v in vals))


@pytest.mark.parametrize("k", [2, 3, 5])
@pytest.mark.parametrize("p_fuse", [0.5, 1.0])
def test_c9_switch(verdict, k, p_fuse):
    tree = build_switch(SwitchSpec(k, p_fuse, generate(0.1)))
    rep = B.switch_bounds(k, p_fuse, 1 / 0.1)
    est = estimate(tree, MC_SAMPLES, seed=31 + k)
    mean_ok = est.mean <= rep.mean_upper + 4 * est.std_error
    t = np.arange(est.empirical_co_cdf.size)
    excess = float(np.max(est.empirical_co_cdf - rep.tail_upper(t)))
    tail_ok = excess <= dkw_epsilon(MC_SAMPLES)
    verdict(f"9 switch k={k} p_fuse={p_fuse}", mean_ok and tail_ok,
            f"mean {est.mean:.3f} vs bound {rep.mean_upper:.3f}, tail excess {excess:.1e}")
