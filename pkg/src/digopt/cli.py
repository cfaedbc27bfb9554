"""Command-line interface: metrics, pushsum, diging, mgdiging, lowerbound, sweep."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import harness, spectral
from .errors import ConfigError, DigoptError
from .graph import build_skewed_family
from .harness import ExperimentConfig, MatrixSpec
from .lowerbound import build_hard_instance, progress_trace
from .traces import OPTIMIZER_HEADER, PUSHSUM_HEADER, write_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3


def _add_matrix_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("matrix source")
    g.add_argument("--matrix-file", help="dense matrix CSV, row i = receiving node")
    g.add_argument("--edge-file", help="edge list, one 'j i' pair per line (j sends to i)")
    g.add_argument("--builder", choices=["skewed", "ring", "grid", "hub-cycle"])
    g.add_argument("--n", type=int, help="node count for builders")
    g.add_argument("--eps", type=float, default=0.0, help="skewed-family parameter in (-1,1)")
    g.add_argument("--rows", type=int, help="grid rows")
    g.add_argument("--cols", type=int, help="grid cols")
    g.add_argument("--kappa", type=float, help="hub-cycle skewness target")
    g.add_argument("--inv-gap", type=float, help="hub-cycle 1/(1-beta) target")
    g.add_argument("--perturb-seed", type=int, default=0)
    g.add_argument("--perturb-strength", type=float, default=0.0)


def _matrix_spec(args) -> MatrixSpec:
    perturb = {}
    if args.perturb_strength:
        perturb = {"perturb_seed": args.perturb_seed, "perturb_strength": args.perturb_strength}
    if args.matrix_file:
        return MatrixSpec("file", {"path": args.matrix_file, **perturb})
    if args.edge_file:
        return MatrixSpec("edges", {"path": args.edge_file, **perturb})
    if args.builder == "skewed":
        return MatrixSpec("skewed", {"n": args.n, "eps": args.eps, **perturb})
    if args.builder == "ring":
        return MatrixSpec("ring", {"n": args.n, **perturb})
    if args.builder == "grid":
        return MatrixSpec("grid", {"rows": args.rows, "cols": args.cols, **perturb})
    if args.builder == "hub-cycle":
        return MatrixSpec("hub-cycle", {"n": args.n, "kappa": args.kappa, "inv_gap": args.inv_gap, **perturb})
    raise ConfigError("no matrix source given (use --matrix-file, --edge-file, or --builder)")


def _out_stream(path):
    return open(path, "w", newline="\n") if path else sys.stdout


def cmd_metrics(args) -> int:
    W = _matrix_spec(args).build()
    prof = spectral.equilibrium_profile(W)
    pd, mg, _ = harness.transient_report(prof.beta_pi, prof.kappa_pi, W.n)
    header = ("n", "beta_pi", "kappa_pi", "ln_kappa_pi", "two_norm_dev", "transient_pd", "transient_mg")
    row = (W.n, prof.beta_pi, prof.kappa_pi, prof.ln_kappa_pi, prof.two_norm_dev, pd, mg)
    write_csv(sys.stdout, header, [row])
    return EXIT_OK


def cmd_pushsum(args) -> int:
    cfg = ExperimentConfig(
        algorithm="pushsum", matrix=_matrix_spec(args), K=args.k, seeds=(args.seed,), d=args.d, label="pushsum"
    )
    trace = harness.run_experiment(cfg)[0]
    with _out_stream(args.out) as fh:
        write_csv(fh, PUSHSUM_HEADER, trace.rows, trace.meta)
    return EXIT_OK


def cmd_optimizer(args, algorithm: str) -> int:
    gamma = "auto" if args.gamma == "auto" else float(args.gamma)
    r = "auto" if getattr(args, "r", 1) == "auto" else int(getattr(args, "r", 1))
    cfg = ExperimentConfig(
        algorithm=algorithm,
        matrix=_matrix_spec(args),
        problem=args.problem,
        gamma=gamma,
        r=r,
        K=args.k,
        seeds=(args.seed,),
        data_seed=args.data_seed,
        label=algorithm,
    )
    trace = harness.run_experiment(cfg)[0]
    with _out_stream(args.out) as fh:
        meta = dict(trace.meta)
        meta["diverged"] = trace.diverged
        write_csv(fh, OPTIMIZER_HEADER, trace.rows, meta)
    return EXIT_DIVERGED if trace.diverged else EXIT_OK


def cmd_lowerbound(args) -> int:
    inst, problem = build_hard_instance(args.n, args.l, args.delta, K=args.k)
    W = build_skewed_family(args.n, args.eps)
    R = args.r if args.algorithm == "mgdiging" else 1
    rows = progress_trace(problem, W, args.gamma, args.k, args.seed, R=R)
    with _out_stream(args.out) as fh:
        meta = {
            "n": args.n,
            "d": inst.d,
            "lam": inst.lam,
            "grad_floor": inst.gradient_norm_floor,
            "gamma": args.gamma,
            "R": R,
            "seed": args.seed,
        }
        write_csv(fh, ("k", "rounds", "prog_xbar", "grad_norm"), rows, meta)
    max_prog = max(r[2] for r in rows)
    min_grad = min(r[3] for r in rows)
    ceiling = 3.0 * rows[-1][0] / args.n + 1.0
    print(
        f"# progress {max_prog} (ceiling {ceiling:.1f}); "
        f"min grad norm {min_grad:.6e} vs floor {inst.gradient_norm_floor:.6e}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_sweep(args) -> int:
    seeds = [int(s) for s in args.seeds.split(",") if s.strip()] if args.seeds else None
    if args.config:
        cfg = harness.parse_config(args.config)
        if seeds:
            from dataclasses import replace

            cfg = replace(cfg, seeds=tuple(seeds))
        traces = harness.run_experiment(cfg, threads=args.threads)
        results = {cfg.label: traces}
    else:
        if not args.preset:
            raise ConfigError("sweep needs --preset or --config")
        results = harness.run_preset(args.preset, out_dir=args.out, seeds=seeds, threads=args.threads)
    if args.out and args.config:
        import os

        os.makedirs(args.out, exist_ok=True)
        for label, traces in results.items():
            for trace in traces:
                harness.write_trace_csv(trace, os.path.join(args.out, f"{label}-seed{trace.meta['seed']}.csv"))
    optimizer_traces = [
        t for traces in results.values() for t in traces if t.meta.get("algorithm") != "pushsum"
    ]
    if optimizer_traces and all(t.diverged for t in optimizer_traces):
        return EXIT_DIVERGED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="digopt",
        description="Simulate decentralized consensus and optimization over directed graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metrics", help="print equilibrium metrics and transient times for a matrix")
    _add_matrix_flags(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("pushsum", help="run push-sum averaging and emit the error trace")
    _add_matrix_flags(p)
    p.add_argument("--k", type=int, default=200)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--d", type=int, default=5, help="payload dimension")
    p.add_argument("--out")
    p.set_defaults(func=cmd_pushsum)

    for name in ("diging", "mgdiging"):
        p = sub.add_parser(name, help=f"run {name} on a problem preset")
        _add_matrix_flags(p)
        p.add_argument("--problem", default="logreg-sec5", choices=list(harness.PROBLEM_PRESETS))
        p.add_argument("--gamma", default="0.01", help="step size, or 'auto' for the schedule")
        if name == "mgdiging":
            p.add_argument("--r", default="auto", help="gossip rounds per iteration, or 'auto'")
        p.add_argument("--k", type=int, default=1000)
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--data-seed", type=int, default=0)
        p.add_argument("--out")
        p.set_defaults(func=lambda a, _name=name: cmd_optimizer(a, _name))

    p = sub.add_parser("lowerbound", help="run an optimizer against the hard instance")
    p.add_argument("--n", type=int, default=9, help="node count (multiple of 3)")
    p.add_argument("--k", type=int, default=300)
    p.add_argument("--l", type=float, default=1.0, help="smoothness budget")
    p.add_argument("--delta", type=float, default=1.0, help="initial gap budget")
    p.add_argument("--eps", type=float, default=0.0, help="skewed-matrix parameter")
    p.add_argument("--gamma", type=float, default=0.01)
    p.add_argument("--algorithm", default="diging", choices=["diging", "mgdiging"])
    p.add_argument("--r", type=int, default=4)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_lowerbound)

    p = sub.add_parser("sweep", help="run a preset or config-file experiment sweep")
    p.add_argument("--preset", choices=list(harness.PRESETS))
    p.add_argument("--config", help="experiment config file (key=value sections)")
    p.add_argument("--out", help="directory for per-seed CSV traces")
    p.add_argument("--seeds", help="comma-separated seed overrides")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DigoptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
