"""Command line entry point: ``python -m randcomplex <command> ...``."""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import poisson_tree as pt
from .collapse import c_shadow, collapse_phases, collapse_to_core
from .faces import Complex, load_complex
from .homology import betti_details, r_shadow
from .linalg import FieldChoice
from .sampling import MODELS, SampleConfig, sample
from .sweep import STATISTICS, SweepConfig, emit, read_config_file, run_sweep
from .thresholds import regime_densities, t_sequence, threshold_table


def _add_common(p: argparse.ArgumentParser, suppress: bool) -> None:
    dflt = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=dflt(0))
    p.add_argument("--threads", type=int, default=dflt(1))
    p.add_argument("--out", default=dflt(None), help="output path (stdout if omitted)")
    p.add_argument("--format", choices=("csv", "json"), default=dflt(None))


def _int_list(s: str) -> list[int]:
    return [int(x) for x in s.split(",") if x.strip()]


def _field(args) -> FieldChoice:
    if args.field == "prime":
        return FieldChoice("prime", args.q)
    return FieldChoice("rational")


def _write(args, text: str) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(args, obj) -> None:
    _write(args, json.dumps(obj, indent=1) + "\n")


def _table(args, header: list[str], rows: list[list]) -> None:
    if (args.format or "csv") == "json":
        _dump(args, [dict(zip(header, r)) for r in rows])
        return
    lines = [",".join(header)] + [",".join(repr(v) if isinstance(v, float) else str(v) for v in r) for r in rows]
    _write(args, "\n".join(lines) + "\n")


# commands --------------------------------------------------------------------

def cmd_sample(args) -> None:
    cfg = SampleConfig(n=args.n, d=args.d, p=args.p, c=args.c, seed=args.seed,
                       model=args.model, trial=args.trial)
    Y = sample(cfg, args.m)
    _write(args, Y.to_text() if args.format == "csv" else Y.to_json() + "\n")


def cmd_collapse(args) -> None:
    Y = load_complex(args.input)
    if args.k is not None:
        R = collapse_phases(Y, args.k)
        out = {"phases": args.k, "f_d": R.f_d, "f_dminus1": R.f_dminus1}
        core = R
    else:
        res = collapse_to_core(Y)
        core = res.core
        out = {"phases": res.phases_used, "f_d": core.f_d, "f_dminus1": res.core_dminus1_count,
               "collapsible": res.is_collapsible, "gravel": res.is_gravel,
               "gravel_components": len(res.gravel)}
    if args.core_out:
        with open(args.core_out, "w") as fh:
            fh.write(core.to_json())
    _dump(args, out)


def cmd_betti(args) -> None:
    Y = load_complex(args.input)
    _dump(args, betti_details(Y, _field(args), via_core=args.via_core))


def cmd_rshadow(args) -> None:
    Y = load_complex(args.input)
    info = betti_details(Y, _field(args), via_core=True)
    sh = r_shadow(Y, _field(args), seed=args.seed)
    info["shadow_size"] = int(sh.size)
    info["shadow_density"] = sh.size / math.comb(Y.n, Y.d + 1)
    if args.c_shadow:
        info["c_shadow_size"] = int(c_shadow(Y).size)
    _dump(args, info)


def cmd_thresholds(args) -> None:
    header = ["d", "gamma_d", "c_d", "x_star", "log10_gap"]
    rows = []
    for d in _int_list(args.d):
        tb = threshold_table(d)
        rows.append([d, tb.gamma_d, tb.c_d, tb.x_star, tb.log10_gap])
    _table(args, header, rows)


def _curve_row(c: float, d: int) -> list:
    r = regime_densities(c, d)
    return [d, c, r.t, r.core_dminus1_density, r.core_d_density, r.betti_density,
            r.shadow_density, r.r_shadow_density, r.avg_core_degree, int(r.boundary_point)]


def cmd_curves(args) -> None:
    header = ["d", "c", "t", "core_f1", "core_f2", "betti", "c_shadow", "r_shadow",
              "avg_core_degree", "boundary_point"]
    steps = int(math.floor((args.c_max - args.c_min) / args.c_step + 1e-9))
    cs = [round(args.c_min + i * args.c_step, 10) for i in range(steps + 1)]
    tb = threshold_table(args.d)
    if args.boundary_points:
        # the exact thresholds, where the limiting curves change form
        cs = sorted(set(cs) | {tb.gamma_d, tb.c_d})
    _table(args, header, [_curve_row(c, args.d) for c in cs])


def cmd_tree(args) -> None:
    out = {"c": args.c, "d": args.d, "stat": args.stat, "trials": args.trials}
    if args.stat == "delta_k":
        k = args.depth - 1
        x = pt.delta_k_samples(args.c, args.d, k, args.trials, args.seed)
        lam = args.c * (1.0 - (t_sequence(args.c, args.d, k - 1)[-1] if k >= 1 else 0.0)) ** args.d
        out.update(k=k, mean=float(x.mean()), stderr=float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0,
                   theory=lam, histogram=np.bincount(x).tolist())
    elif args.stat == "collapse_prob":
        k = args.depth - 1
        p = pt.collapse_probability_empirical(args.c, args.d, k, args.trials, args.seed)
        out.update(k=k, mean=p, stderr=math.sqrt(p * (1 - p) / args.trials),
                   theory=float(t_sequence(args.c, args.d, k)[-1]))
    else:
        r = pt.population_dynamics_x(args.c, args.d, args.trials, args.iterations, args.seed)
        out.update(mean=r.mean_x, stderr=r.mean_stderr, p_positive=r.p_positive,
                   p_positive_stderr=r.positive_stderr, generations=args.iterations)
    _dump(args, out)


def cmd_sweep(args) -> None:
    values = read_config_file(args.config) if args.config else {}
    overrides = {"d": args.d, "n": args.n, "c_min": args.c_min, "c_max": args.c_max,
                 "c_step": args.c_step, "trials": args.trials, "stats": args.stats,
                 "field_kind": args.field, "q": args.q, "k": args.k,
                 "seed": getattr(args, "seed_given", None), "threads": getattr(args, "threads_given", None),
                 "out": args.out, "format": args.format, "force": True if args.force else None}
    values.update({k: v for k, v in overrides.items() if v is not None})
    cfg = SweepConfig.from_mapping(values)
    text = emit(run_sweep(cfg), cfg.format, cfg.out)
    if not cfg.out:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="randcomplex", description="Random simplicial complexes toolkit")
    _add_common(ap, suppress=False)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        _add_common(p, suppress=True)
        p.set_defaults(func=fn)
        return p

    def field_opts(p, default):
        p.add_argument("--field", choices=("rational", "prime"), default=default)
        p.add_argument("--q", type=int, default=2147483647, help="prime modulus for --field prime")

    p = add("sample", cmd_sample, "draw a random complex")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=2)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--c", type=float)
    g.add_argument("--p", type=float)
    p.add_argument("--model", choices=MODELS, default="binomial")
    p.add_argument("--m", type=int, default=None, help="face count for uniform_m / evolution")
    p.add_argument("--trial", type=int, default=0)

    p = add("collapse", cmd_collapse, "collapse phases or the full core")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--k", type=int, default=None, help="number of phases (default: to the core)")
    p.add_argument("--core-out", default=None)

    p = add("betti", cmd_betti, "top Betti number")
    p.add_argument("--in", dest="input", required=True)
    field_opts(p, "rational")
    p.add_argument("--via-core", action="store_true")

    p = add("rshadow", cmd_rshadow, "R-shadow size")
    p.add_argument("--in", dest="input", required=True)
    field_opts(p, "prime")
    p.add_argument("--c-shadow", action="store_true", help="also report the C-shadow size")

    p = add("thresholds", cmd_thresholds, "threshold constants")
    p.add_argument("--d", default="2,3,4,5,10,100,1000")

    p = add("curves", cmd_curves, "limiting density curves")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--c-min", type=float, default=0.5)
    p.add_argument("--c-max", type=float, default=4.0)
    p.add_argument("--c-step", type=float, default=0.05)
    p.add_argument("--boundary-points", action="store_true",
                   help="add the two thresholds themselves to the grid")

    p = add("tree", cmd_tree, "Poisson d-tree statistics")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--depth", type=int, default=7, help="generations drawn; delta uses k = depth - 1")
    p.add_argument("--trials", type=int, default=100_000, help="trees, or pool size for x_population")
    p.add_argument("--iterations", type=int, default=200)
    p.add_argument("--stat", choices=("delta_k", "collapse_prob", "x_population"), default="delta_k")

    p = add("sweep", cmd_sweep, "Monte Carlo sweep against theory")
    p.add_argument("--config", default=None, help="key = value file; flags override it")
    p.add_argument("--d", type=int)
    p.add_argument("--n", type=str, help="comma separated")
    p.add_argument("--c-min", type=float)
    p.add_argument("--c-max", type=float)
    p.add_argument("--c-step", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--stats", type=str, help=f"comma separated subset of {','.join(STATISTICS)}")
    p.add_argument("--field", choices=("rational", "prime"))
    p.add_argument("--q", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--force", action="store_true", help="run r_shadow above its size cap")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = ap.parse_args(argv)
    # remember which global flags were given explicitly, for config overrides
    args.seed_given = args.seed if any(a.startswith("--seed") for a in argv) else None
    args.threads_given = args.threads if any(a.startswith("--threads") for a in argv) else None
    args.func(args)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
