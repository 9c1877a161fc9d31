"""Command-line interface: levy-exit <subcommand> [options]."""

import argparse
import sys
from pathlib import Path

import numpy as np

from .cadlag import load_path
from .config import build_domain, build_simulation, load_config
from .entrance import classify_gamma, entrance_record
from .errors import ConfigError, LevyExitError
from .experiments import experiment_names, run_experiment
from .nonlocal_op import QuadratureSpec, candidate, eval_I_split
from .sde import batch_simulate
from .skorohod import metric_finite, metric_infinite
from .value import continuity_scan, estimate, resolve_cost


def _add_common(p):
    p.add_argument("--config", help="config file (key = value sections)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None, help="output directory")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="levy-exit",
        description="Exit-time machinery for Levy-driven SDEs: path "
                    "metrics, entrance times, simulation, values, "
                    "nonlocal residuals, and named experiments.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metric", help="Skorohod distance between two paths")
    p.add_argument("path_x")
    p.add_argument("path_y")
    p.add_argument("--t", type=float, default=None,
                   help="finite horizon; omit with --infinite")
    p.add_argument("--infinite", action="store_true")
    p.add_argument("--tol", type=float, default=1e-6)
    _add_common(p)

    p = sub.add_parser("entrance", help="entrance record of a path")
    p.add_argument("path_file",
                   help="path literal file, or a directory of *.path "
                        "files with --census")
    p.add_argument("--cap", type=float, default=None)
    p.add_argument("--classify", action="store_true")
    p.add_argument("--census", action="store_true",
                   help="classify every *.path file in a directory")
    _add_common(p)

    p = sub.add_parser("simulate", help="simulate an exit-time batch")
    p.add_argument("--x0", required=True, help="start point, comma-separated")
    p.add_argument("--n", type=int, default=None,
                   help="trajectories (default: [run] n, else 1000)")
    _add_common(p)

    p = sub.add_parser("value", help="Monte Carlo value estimate / scan")
    p.add_argument("--x", required=True)
    p.add_argument("--scan-to", default=None)
    p.add_argument("--points", type=int, default=5)
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--ell", default="one")
    p.add_argument("--g", default="zero")
    _add_common(p)

    p = sub.add_parser("residual", help="nonlocal operator split at points")
    p.add_argument("--candidate", default="gaussian")
    p.add_argument("--points", required=True,
                   help="semicolon-separated points, components by comma")
    p.add_argument("--r", type=float, default=1.0)
    _add_common(p)

    p = sub.add_parser("experiment", help="run a named experiment")
    p.add_argument("name", help=f"one of: {', '.join(experiment_names())}")
    _add_common(p)
    return ap


def _cfg(args):
    return load_config(args.config) if args.config else {}


def _points(s):
    return [tuple(float(c) for c in part.split(","))
            for part in s.split(";") if part.strip()]


def _write_or_print(args, name, text):
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / name).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_metric(args):
    x = load_path(Path(args.path_x).read_text())
    y = load_path(Path(args.path_y).read_text())
    if args.infinite:
        res = metric_infinite(x, y, tol=args.tol)
    else:
        res = metric_finite(x, y, t=args.t)
    _write_or_print(args, "metric.txt", res.to_text())
    return 0


def cmd_entrance(args):
    domain = build_domain(_cfg(args))
    if domain is None:
        raise ConfigError("entrance needs a [domain] section")
    if args.census:
        files = sorted(Path(args.path_file).glob("*.path"))
        if not files:
            raise ConfigError(f"no *.path files under {args.path_file}")
        lines = ["file,determined,in_gamma,in_gamma_hat,t_exit"]
        tallies = [0, 0, 0]
        for f in files:
            g = classify_gamma(load_path(f.read_text()), domain)
            t = "inf" if g.t_exit == float("inf") else str(g.t_exit)
            lines.append(f"{f.name},{int(g.determined)},{int(g.in_gamma)},"
                         f"{int(g.in_gamma_hat)},{t}")
            tallies[0] += g.determined
            tallies[1] += g.in_gamma
            tallies[2] += g.in_gamma_hat
        lines.append(f"# determined={tallies[0]} in_gamma={tallies[1]} "
                     f"in_gamma_hat={tallies[2]} of {len(files)}")
        _write_or_print(args, "gamma-census.csv", "\n".join(lines) + "\n")
        return 0
    path = load_path(Path(args.path_file).read_text())
    rec = entrance_record(path, domain, cap=args.cap)
    text = rec.to_text()
    if args.classify:
        g = classify_gamma(path, domain)
        text += (f"in_gamma = {g.in_gamma}\n"
                 f"in_gamma_hat = {g.in_gamma_hat}\n"
                 f"determined = {g.determined}\n")
    _write_or_print(args, "entrance.txt", text)
    return 0


def cmd_simulate(args):
    cfg = _cfg(args)
    spec = build_simulation(cfg)
    x0 = tuple(float(c) for c in args.x0.split(","))
    seed = 0 if args.seed is None else args.seed
    n = args.n
    if n is None:
        n = int(cfg.get("run", {}).get("n", 1000))
    arch = batch_simulate(spec, x0, n, seed, threads=args.threads)
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        with open(outdir / "archive.txt", "w") as fh:
            arch.save_text(fh)
    else:
        arch.save_text(sys.stdout)
    return 0


def cmd_value(args):
    cfg = _cfg(args)
    spec = build_simulation(cfg)
    ell = resolve_cost(cfg.get("cost", {}).get("ell", args.ell))
    g = resolve_cost(cfg.get("cost", {}).get("g", args.g))
    seed = 0 if args.seed is None else args.seed
    x = tuple(float(c) for c in args.x.split(","))
    lines = ["x,mean,std_error,n,censored_fraction"]
    if args.scan_to:
        xb = tuple(float(c) for c in args.scan_to.split(","))
        rows = continuity_scan(spec, x, xb, args.points, ell, g, args.n,
                               seed, threads=args.threads)
        for r in rows:
            xs = " ".join(repr(float(c)) for c in r.x)
            lines.append(f"{xs},{r.mean!r},{r.std_error!r},{r.n},"
                         f"{r.censored_fraction!r}")
    else:
        est = estimate(spec, x, ell, g, args.n, seed, threads=args.threads)
        xs = " ".join(repr(float(c)) for c in x)
        lines.append(f"{xs},{est.mean!r},{est.std_error!r},{est.n},"
                     f"{est.censored_fraction!r}")
    _write_or_print(args, "value.csv", "\n".join(lines) + "\n")
    return 0


def cmd_residual(args):
    cfg = _cfg(args)
    from .config import build_levy

    model = build_levy(cfg)
    pts = _points(args.points)
    cand = candidate(args.candidate, getattr(model, "dim", len(pts[0])))
    lines = ["x,br_term,i1,i2,total,error"]
    for pt in pts:
        s = eval_I_split(cand, np.asarray(pt), model, r=args.r,
                         spec=QuadratureSpec())
        xs = " ".join(repr(c) for c in pt)
        lines.append(f"{xs},{s.br_term!r},{s.i1!r},{s.i2!r},{s.total!r},"
                     f"{s.error!r}")
    _write_or_print(args, "residual.csv", "\n".join(lines) + "\n")
    return 0


def cmd_experiment(args):
    cfg = _cfg(args)
    flat = {}
    for sec, kv in cfg.items():
        for k, v in kv.items():
            flat[k if sec == "experiment" else f"{sec}.{k}"] = v
    summary = run_experiment(args.name, flat, outdir=args.out,
                             seed=args.seed, threads=args.threads)
    status = "PASS" if summary.get("ok") else "FAIL"
    sys.stdout.write(f"{args.name}: {status} "
                     f"({summary['runtime_s']:.2f}s)\n")
    for k in sorted(summary):
        if k not in ("ok", "runtime_s"):
            sys.stdout.write(f"  {k} = {summary[k]}\n")
    return 0 if summary.get("ok") else 1


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    handlers = {
        "metric": cmd_metric,
        "entrance": cmd_entrance,
        "simulate": cmd_simulate,
        "value": cmd_value,
        "residual": cmd_residual,
        "experiment": cmd_experiment,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2
    except LevyExitError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
