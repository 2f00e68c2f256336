"""Command-line front end.

Every command writes CSV: one metadata comment line starting with ``#``,
a header row, then data rows.  Exit codes: 0 success, 2 input error,
3 partial output after hitting a resource limit.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import itertools
import json
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from . import bounds as bd
from . import exact_engine as ex
from . import montecarlo as mc
from . import nbu_checks as nc
from .errors import (InconclusiveError, InvalidParameterError, PreconditionError,
                     ProtocolParseError, ResourceLimitError, UnsupportedModelError)
from .protocol import (ProtocolNode, RepeaterSpec, SwitchSpec, build_repeater,
                       build_switch, generate, parse_protocol, rus)

EXIT_OK, EXIT_INPUT, EXIT_PARTIAL = 0, 2, 3


@dataclass
class Target:
    """A resolved ``--input``: the tree plus the closed-form spec, if any."""

    kind: str  # repeater | switch | chain | tree
    tree: ProtocolNode
    spec: object = None


def _parse_kv(body: str) -> dict:
    out = {}
    for item in filter(None, body.split(",")):
        if "=" not in item:
            raise InvalidParameterError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _num(d, key, cast=float, default=None):
    if key not in d:
        if default is None:
            raise InvalidParameterError(f"missing parameter {key!r}")
        return default
    try:
        return cast(d[key])
    except ValueError:
        raise InvalidParameterError(f"bad value for {key!r}: {d[key]!r}") from None


def resolve_input(text: str, model: str = "discrete") -> Target:
    """Interpret ``--input``: inline spec, inline JSON, or a path to a JSON file.

    Inline forms::

        repeater:n=4,p_gen=0.5,p_swap=0.5
        switch:k=3,p_fuse=0.5,p_gen=0.1[,arm_n=2,arm_p_swap=0.5]
        chain:N=4,p_gen=0.5
    """
    head, _, body = text.partition(":")
    if head == "repeater":
        kv = _parse_kv(body)
        spec = RepeaterSpec(_num(kv, "n", int), _num(kv, "p_gen"), _num(kv, "p_swap"), model)
        return Target("repeater", build_repeater(spec), spec)
    if head == "switch":
        kv = _parse_kv(body)
        arm_spec = RepeaterSpec(_num(kv, "arm_n", int, 0), _num(kv, "p_gen"),
                                _num(kv, "arm_p_swap", float, 1.0), model)
        spec = SwitchSpec(_num(kv, "k", int), _num(kv, "p_fuse"), build_repeater(arm_spec))
        return Target("switch", build_switch(spec), (spec, arm_spec))
    if head == "chain":
        kv = _parse_kv(body)
        N, pg = _num(kv, "N", int), _num(kv, "p_gen")
        if N < 1:
            raise InvalidParameterError("N must be >= 1")
        leaves = [generate(pg, label="link")] * N
        tree = leaves[0] if N == 1 else rus(1.0, leaves, label="deterministic-swaps")
        return Target("chain", tree, (N, pg))
    if text.lstrip().startswith("{"):
        return Target("tree", parse_protocol(text))
    path = Path(text)
    if not path.exists():
        raise InvalidParameterError(f"input {text!r} is neither an inline spec nor a file")
    return Target("tree", parse_protocol(path.read_text(encoding="utf-8")))


def parse_grid(items) -> list[dict]:
    """``['p_swap=0.2:1.0:0.1', ...]`` -> cartesian product of inclusive ranges."""
    axes = []
    for item in items or []:
        if "=" not in item:
            raise InvalidParameterError(f"grid entry {item!r} must be param=start:stop:step")
        name, rng = item.split("=", 1)
        parts = rng.split(":")
        if len(parts) != 3:
            raise InvalidParameterError(f"grid entry {item!r} must be param=start:stop:step")
        start, stop, step = map(float, parts)
        if step <= 0 or stop < start:
            raise InvalidParameterError(f"empty or backwards grid {item!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        axes.append([(name.strip(), round(start + i * step, 12)) for i in range(count)])
    return [dict(combo) for combo in itertools.product(*axes)]


def _config_hash(args) -> str:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")}
    return hashlib.sha256(json.dumps(cfg, sort_keys=True, default=str).encode()).hexdigest()[:12]


class _Writer:
    def __init__(self, args, **meta):
        self.buf = io.StringIO()
        self.args = args
        self.meta = meta
        self.rows = []
        self.header = None

    def write(self, header, rows):
        self.header = header
        self.rows = rows

    def finish(self):
        extra = " ".join(f"{k}={_fmt(v)}" for k, v in self.meta.items())
        self.buf.write(f"# delivery_bounds {__version__} command={self.args.command} "
                       f"config={_config_hash(self.args)} {extra}".rstrip() + "\n")
        w = csv.writer(self.buf, lineterminator="\n")
        if self.header:
            w.writerow(self.header)
        for r in self.rows:
            w.writerow([_fmt(x) for x in r])
        text = self.buf.getvalue()
        if self.args.out:
            Path(self.args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)


def _fmt(x):
    if isinstance(x, float):
        return "" if math.isnan(x) else repr(x)
    if x is None:
        return ""
    return x


def _repeater_row(spec: RepeaterSpec):
    rep = bd.repeater_bounds(spec)
    m_lo, m_hi, _ = bd.markov_baseline(spec, 0)
    return rep, {
        "n": spec.nesting_levels, "p_gen": spec.p_gen, "p_swap": spec.p_swap,
        "model": spec.gen_model,
        "mean_lower": rep.mean_lower, "mean_upper": rep.mean_upper,
        "three_over_two": bd.three_over_two(spec),
        "markov_lower": m_lo, "markov_upper": m_hi,
        "tail_upper_log_prefactor": rep.tail_upper.prefactor_log,
        "tail_upper_rate": rep.tail_upper.rate,
        "tail_lower_rate": rep.tail_lower.rate if rep.tail_lower else None,
        "degenerate": rep.degenerate,
        "provenance": "; ".join(f"{q}: {s}" for q, s in rep.provenance),
    }


def _switch_arm_mean(arm_spec: RepeaterSpec) -> float:
    if arm_spec.nesting_levels == 0:
        return 1.0 / arm_spec.p_gen
    return bd.repeater_bounds(arm_spec).mean_upper


def cmd_bounds(args) -> int:
    target = resolve_input(args.input, args.model)
    if target.kind == "repeater":
        _, row = _repeater_row(target.spec)
    elif target.kind == "switch":
        spec, arm_spec = target.spec
        arm_mean = _switch_arm_mean(arm_spec)
        rep = bd.switch_bounds(spec.k, spec.p_fuse, arm_mean)
        row = {"k": spec.k, "p_fuse": spec.p_fuse, "arm_mean": arm_mean,
               "mean_lower": rep.mean_lower, "mean_upper": rep.mean_upper,
               "tail_upper_log_prefactor": rep.tail_upper.prefactor_log,
               "tail_upper_rate": rep.tail_upper.rate,
               "provenance": "; ".join(f"{q}: {s}" for q, s in rep.provenance)}
    elif target.kind == "chain":
        N, pg = target.spec
        lo, hi = bd.deterministic_swap_bounds(N, pg)
        row = {"N": N, "p_gen": pg, "harmonic_number": bd.harmonic(N),
               "mean_lower": lo, "mean_upper": hi,
               "provenance": "mean: harmonic-number bracket for deterministic swaps"}
    else:
        tree = target.tree
        tail = bd.tree_tail_upper(tree)
        row = {"leaves": tree.leaf_count(), "depth": tree.depth(),
               "mean_lower": bd.tree_mean_lower(tree),
               "mean_upper": bd.tree_mean_upper(tree),
               "tail_upper_log_prefactor": tail.prefactor_log,
               "tail_upper_rate": tail.rate, "tail_upper_valid_from": tail.valid_from,
               "upper_bound_model": tree.has_bound_mode(),
               "provenance": "mean_upper: recursive max-mean bounds over NBU envelopes; "
                             "mean_lower: slowest child per round"}
    if args.format == "table":
        width = max(len(k) for k in row)
        for k, v in row.items():
            sys.stdout.write(f"{k:<{width}}  {_fmt(v)}\n")
        return EXIT_OK
    w = _Writer(args)
    w.write(list(row), [list(row.values())])
    w.finish()
    return EXIT_OK


def _exact_tree(target: Target):
    if target.tree.has_bound_mode():
        sys.stderr.write("note: tree has lower-bounded success probabilities; "
                         "results describe an upper-bound model\n")
    return target.tree


def cmd_exact(args) -> int:
    target = resolve_input(args.input, args.model)
    if args.model != "discrete":
        raise UnsupportedModelError("exact computation needs discrete generation attempts")
    tree = _exact_tree(target)
    t_max = args.t_max or ex.initial_horizon(tree)
    res = ex.completion_pmf(tree, t_max)
    pmf = res.pmf
    w = _Writer(args, t_max=t_max, tail_mass=res.tail_mass, mean_lower=res.mean_lower,
                upper_bound_model=res.is_upper_bound_model)
    rows = [(pmf.support_start + i, float(m)) for i, m in enumerate(pmf.masses)]
    rows.append(("tail_mass", res.tail_mass))
    w.write(["t", "mass"], rows)
    w.finish()
    return EXIT_OK


def cmd_simulate(args) -> int:
    target = resolve_input(args.input, args.model)
    if args.model != "discrete":
        raise UnsupportedModelError("simulation samples discrete generation attempts")
    est = mc.estimate(target.tree, args.samples, args.seed)
    w = _Writer(args, upper_bound_model=est.is_upper_bound_model)
    rows = [(t, float(v)) for t, v in enumerate(est.empirical_co_cdf)]
    rows += [("mean", est.mean), ("std_error", est.std_error),
             ("n_samples", est.n_samples), ("seed", est.seed)]
    w.write(["t", "empirical_co_cdf"], rows)
    w.finish()
    return EXIT_OK


def cmd_check_nbu(args) -> int:
    target = resolve_input(args.input, args.model)
    tree = _exact_tree(target)
    t_max = args.t_max or ex.horizon_for_tail(tree, 1e-12)
    pmf = ex.completion_pmf(tree, t_max).pmf
    tol = args.tolerance if args.tolerance is not None else max(nc.DEFAULT_TOL, 2 * pmf.tail_mass)
    reports = [nc.check_nbu(pmf, tol)]
    if reports[0].passed:
        reports += [nc.check_min_bound(pmf, n, tol) for n in (2, 3, 5)]
    w = _Writer(args, t_max=t_max, tail_mass=pmf.tail_mass)
    rows = [(r.property, str(r.passed).lower(), r.worst_violation,
             " ".join(map(str, r.witness or ())), r.tolerance_used) for r in reports]
    w.write(["property", "passed", "worst_violation", "witness", "tolerance_used"], rows)
    w.finish()
    return EXIT_OK


def _grid_specs(target: Target, grid) -> list[RepeaterSpec]:
    if target.kind != "repeater":
        raise InvalidParameterError("compare needs a repeater input (repeater:n=..,p_gen=..,p_swap=..)")
    base = target.spec
    fields = {"n": "nesting_levels", "p_gen": "p_gen", "p_swap": "p_swap"}
    specs = []
    for point in parse_grid(grid) or [{}]:
        changes = {}
        for k, v in point.items():
            if k not in fields:
                raise InvalidParameterError(f"cannot sweep {k!r}; use n, p_gen or p_swap")
            changes[fields[k]] = int(v) if k == "n" else v
        specs.append(replace(base, **changes))
    return specs


def cmd_compare(args) -> int:
    target = resolve_input(args.input, args.model)
    if args.model != "discrete":
        raise UnsupportedModelError("compare needs the exact engine (discrete model)")
    specs = _grid_specs(target, args.grid)
    if args.tail:
        return _compare_tail(args, specs)
    status = EXIT_OK
    rows = []
    for spec in specs:
        rep, row = _repeater_row(spec)
        try:
            exact = ex.mean_of(build_repeater(spec), args.rel_tol)
            flag = "ok"
        except ResourceLimitError as err:
            iv = err.partial
            exact = iv.lower if iv is not None else math.nan
            flag = "partial"
            status = EXIT_PARTIAL
        rows.append([spec.nesting_levels, spec.p_gen, spec.p_swap, exact,
                     row["mean_lower"], row["mean_upper"],
                     row["markov_lower"], row["markov_upper"], row["three_over_two"],
                     row["mean_lower"] / exact, row["mean_upper"] / exact,
                     row["markov_lower"] / exact, row["markov_upper"] / exact,
                     row["three_over_two"] / exact, flag])
    w = _Writer(args, rel_tol=args.rel_tol)
    w.write(["n", "p_gen", "p_swap", "exact_mean", "mean_lower", "mean_upper",
             "markov_lower", "markov_upper", "three_over_two",
             "ratio_lower_to_exact", "ratio_upper_to_exact",
             "ratio_markov_lower_to_exact", "ratio_markov_upper_to_exact",
             "ratio_three_over_two_to_exact", "status"], rows)
    w.finish()
    return status


def tail_table(spec: RepeaterSpec, t_max: int, t_step: int = 1):
    """Rows ``t, exact, markov, markov_improved, upper, lower`` for one chain."""
    res = ex.completion_pmf(build_repeater(spec), t_max)
    s = res.pmf.survival()
    t = np.arange(0, s.size, t_step)
    rep = bd.repeater_bounds(spec)
    _, markov_mean, _ = bd.markov_baseline(spec, 0)
    cols = {
        "t": t,
        "exact_co_cdf": s[t],
        "markov_bound": bd.markov_tail(markov_mean, t),
        "markov_improved_bound": bd.markov_tail(rep.mean_upper, t),
        "tail_upper_bound": rep.tail_upper(t),
        "tail_lower_bound": rep.tail_lower(t) if rep.tail_lower else np.full(t.size, np.nan),
    }
    return res, cols


def _compare_tail(args, specs) -> int:
    rows = []
    residuals = []
    for spec in specs:
        t_max = args.t_max or ex.horizon_for_tail(build_repeater(spec), 1e-10)
        res, cols = tail_table(spec, t_max, args.t_step)
        residuals.append(res.tail_mass)
        for i in range(cols["t"].size):
            rows.append([spec.nesting_levels, spec.p_gen, spec.p_swap, int(cols["t"][i])]
                        + [float(cols[k][i]) for k in list(cols)[1:]])
    w = _Writer(args, max_tail_mass=max(residuals))
    w.write(["n", "p_gen", "p_swap", "t", "exact_co_cdf", "markov_bound",
             "markov_improved_bound", "tail_upper_bound", "tail_lower_bound"], rows)
    w.finish()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="delivery-bounds",
        description="Completion-time distributions and bounds for entanglement-distribution protocols.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--input", required=True,
                       help="protocol JSON file, inline JSON, or repeater:/switch:/chain: spec")
        p.add_argument("--model", choices=["discrete", "exponential"], default="discrete")
        p.add_argument("--out", help="output path (default: stdout)")

    p = sub.add_parser("bounds", help="closed-form mean and tail bounds")
    common(p)
    p.add_argument("--format", choices=["csv", "table"], default="csv")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("exact", help="exact completion-time PMF")
    common(p)
    p.add_argument("--t-max", type=int)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("simulate", help="Monte Carlo estimate")
    common(p)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="bounds against exact values over a sweep")
    common(p)
    p.add_argument("--grid", action="append", help="param=start:stop:step (repeatable)")
    p.add_argument("--rel-tol", type=float, default=1e-4)
    p.add_argument("--tail", action="store_true", help="emit co-CDF curves instead of means")
    p.add_argument("--t-max", type=int)
    p.add_argument("--t-step", type=int, default=1)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("check-nbu", help="NBU and min-mean checks on the exact law")
    common(p)
    p.add_argument("--t-max", type=int)
    p.add_argument("--tolerance", type=float)
    p.set_defaults(func=cmd_check_nbu)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ProtocolParseError, InvalidParameterError, UnsupportedModelError,
            InconclusiveError, PreconditionError, OSError) as err:
        sys.stderr.write(f"error: {err}\n")
        return EXIT_INPUT
    except ResourceLimitError as err:
        sys.stderr.write(f"resource limit: {err}\n")
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
