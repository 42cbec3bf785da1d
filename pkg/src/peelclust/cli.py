"""Command-line front end.

Subcommands: ``generate`` (write an instance file), ``solve`` (one solve
with diagnostics and heatmaps), ``peel`` (full peeling run), ``certcheck``
(build and check the optimality certificate), and ``experiment`` (the
bundled benchmark runs).  Options come from an optional flat
``key = value`` config file plus command-line flags; flags win.  All
outputs are pure functions of (config, seed): re-running a command
reproduces its artifacts byte for byte.

Exit codes: 0 success, 2 non-recovery (a peel run recovered nothing),
1 runtime error, 64 usage error.
"""

import argparse
import multiprocessing
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import certificate as cert
from . import detect, peeling, planted, solver
from .experiments import EXPERIMENTS, run_experiment
from .figures import save_heatmap_png, save_peel_png, write_pgm

USAGE_ERROR = 64

_CONFIG_KEYS = {
    "sizes": lambda s: tuple(int(v) for v in s.replace(",", " ").split()),
    "p": float,
    "q": float,
    "mode": str,                 # full | partial
    "rate": float,               # sampling rate (generate/solve/fixed-rate peel)
    "rate_step": float,
    "scale": float,              # weight-scale knob for single solves / certcheck
    "scale_growth": float,
    "schedule": str,             # simplified | theoretical
    "k0": int,
    "instance": str,             # path to a saved instance file
    "weight_const": float,       # multiplier on the entrywise weights
    "big_const": float,          # multiplier on the big-cluster cutoff
    "small_const": float,        # multiplier on the small-cluster cutoff
    "mix_const": float,          # partial mode: sampling-rate-to-mix factor
    "sound_k_const": float,
    "sound_spec_const": float,
    "tol": float,
    "max_iter": int,
    "stall_window": int,
    "penalty_growth": float,
    "detect_tol": float,
    "probe_trials": int,
}


class CliError(Exception):
    def __init__(self, message, code=1):
        super().__init__(message)
        self.code = code


def read_config(path):
    """Parse a flat ``key = value`` config file."""
    config = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or key not in _CONFIG_KEYS:
            raise CliError(f"{path}:{lineno}: bad config line {raw!r}", USAGE_ERROR)
        try:
            config[key] = _CONFIG_KEYS[key](value.strip())
        except ValueError as exc:
            raise CliError(f"{path}:{lineno}: {exc}", USAGE_ERROR)
    return config


def _merge_config(args):
    config = read_config(args.config) if args.config else {}
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            config[key] = flag
    return config


def _consts(config):
    return solver.Consts(
        w_scale=config.get("weight_const", 1.0),
        big_scale=config.get("big_const", 1.0),
        small_scale=config.get("small_const", 1.0),
    )


def _partial_consts(config, p, q):
    base = solver.PartialConsts.from_probs(p, q, _consts(config))
    if "mix_const" in config:
        base = solver.PartialConsts(
            base.w_scale, base.big_scale, base.small_scale, config["mix_const"]
        )
    return base


def _solve_opts(config):
    opts = solver.SolveOpts()
    fields = {}
    if "tol" in config:
        fields["tol"] = config["tol"]
    if "max_iter" in config:
        fields["max_iter"] = config["max_iter"]
    if "stall_window" in config:
        fields["stall_window"] = config["stall_window"]
    if "penalty_growth" in config:
        fields["penalty_growth"] = config["penalty_growth"]
    return replace(opts, **fields)


def _require(config, keys, command):
    missing = [k for k in keys if k not in config]
    if missing:
        raise CliError(
            f"{command}: missing required config keys {missing}", USAGE_ERROR
        )


def _outdir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_or_generate(config, seed, command):
    """Instance matrix + metadata from a saved file or a fresh draw."""
    if "instance" in config:
        gt, state, p, q, file_seed = planted.read_instance(config["instance"])
        return gt, state, p, q
    _require(config, ["sizes", "p", "q"], command)
    gt = planted.make_ground_truth(config["sizes"])
    p, q = config["p"], config["q"]
    if config.get("mode", "full") == "partial":
        _require(config, ["rate"], command)
        oracle = planted.make_oracle(gt, p, q, seed)
        po = oracle.sample_to_rate(config["rate"])
        return gt, po.state, p, q
    A = planted.sample_full(gt, p, q, seed)
    return gt, A.astype(np.int8), p, q


def cmd_generate(args):
    config = _merge_config(args)
    out = _outdir(args)
    gt, state, p, q = _load_or_generate(config, args.seed_value, "generate")
    planted.write_instance(out / "instance.txt", gt, state, p, q, args.seed_value)
    print(f"wrote {out / 'instance.txt'}")
    return 0


def cmd_solve(args):
    config = _merge_config(args)
    out = _outdir(args)
    gt, state, p, q = _load_or_generate(config, args.seed_value, "solve")
    state = np.asarray(state)
    partial = bool((state == planted.UNOBSERVED).any()) or config.get("mode") == "partial"
    A = (state == planted.ONE).astype(float)
    np.fill_diagonal(A, 1.0)
    edge_mask = A.astype(bool)

    if partial:
        rate = config.get("rate")
        if rate is None:
            off = ~np.eye(gt.n, dtype=bool)
            rate = float((state[off] != planted.UNOBSERVED).mean())
        params = solver.params_partial(gt.n, rate, p, q, _partial_consts(config, p, q))
    else:
        params = solver.params_full(
            gt.n, p, q, scale=config.get("scale", 1.0), consts=_consts(config)
        )

    opts = _solve_opts(config)
    sol = solver.solve(A, edge_mask, params, replace(opts, track=True))
    write_pgm(sol.K, out / "khat.pgm")
    save_heatmap_png(sol.K, out / "khat.png")
    (out / "diagnostics.csv").write_text(solver.diagnostics_csv(sol.diagnostics))
    summary = (
        f"objective={sol.objective!r}\n"
        f"iterations={sol.iterations}\n"
        f"converged={'true' if sol.converged else 'false'}\n"
        f"primal_residual={sol.primal_residual!r}\n"
        f"dual_residual={sol.dual_residual!r}\n"
    )
    (out / "solution.txt").write_text(summary)
    pc = detect.detect_partial_clustering(sol.K, config.get("detect_tol", 0.1))
    if pc is not None:
        (out / "clusters.txt").write_text(detect.clustering_lines(pc))
    print(f"solved n={gt.n}: iterations={sol.iterations} converged={sol.converged}")
    return 0


def _peel_options(config, p, q):
    schedule = peeling.Schedule(config.get("schedule", "simplified"))
    return peeling.PeelOptions(
        schedule=schedule,
        scale_growth=config.get("scale_growth", 1.1),
        rate_step=config.get("rate_step", 0.025),
        rate_fixed=config.get("rate") if config.get("mode") == "partial-fixed" else None,
        k0=config.get("k0"),
        consts=_consts(config),
        partial_consts=_partial_consts(config, p, q) if p is not None else None,
        sound_k=config.get("sound_k_const", 1.0),
        sound_spec=config.get("sound_spec_const", 1.0),
        detect_tol=config.get("detect_tol", 0.1),
        solver=_solve_opts(config),
    )


def cmd_peel(args):
    config = _merge_config(args)
    out = _outdir(args)
    _require(config, ["sizes", "p", "q"], "peel")
    gt = planted.make_ground_truth(config["sizes"])
    p, q = config["p"], config["q"]
    mode = config.get("mode", "full")
    from .experiments import cluster_names, table_csv

    if mode == "full":
        A = planted.sample_full(gt, p, q, args.seed_value)
        clusters, report = peeling.recover_full(
            A, p, q, _peel_options(config, p, q)
        )
    elif mode in ("partial", "partial-fixed", "partial-incremental"):
        _require(config, ["k0"], "peel")
        if mode in ("partial", "partial-fixed"):
            _require(config, ["rate"], "peel")
            config = dict(config, mode="partial-fixed")
        oracle = planted.make_oracle(gt, p, q, args.seed_value)
        clusters, report = peeling.recover_partial(
            oracle, config["k0"], _peel_options(config, p, q)
        )
    else:
        raise CliError(f"peel: unknown mode {mode!r}", USAGE_ERROR)

    (out / "report.csv").write_text(table_csv(report, gt))
    (out / "rounds.csv").write_text(peeling.report_csv(report, cluster_names(gt)))
    save_peel_png(report, out / "peel.png")
    if clusters:
        pc = detect.PartialClustering(n=gt.n, clusters=tuple(clusters))
        (out / "clusters.txt").write_text(detect.clustering_lines(pc))
    print(f"peeled {len(report.rounds)} rounds, {len(clusters)} clusters, "
          f"{len(report.leftover)} nodes left over")
    return 0 if clusters else 2


def cmd_certcheck(args):
    config = _merge_config(args)
    out = _outdir(args)
    _require(config, ["sizes", "p", "q"], "certcheck")
    gt = planted.make_ground_truth(config["sizes"])
    p, q = config["p"], config["q"]
    A = planted.sample_full(gt, p, q, args.seed_value)
    params = solver.params_full(
        gt.n, p, q, scale=config.get("scale", 1.0), consts=_consts(config)
    )
    ctx = cert.build_context(gt, A, params)
    Q = cert.build_certificate(ctx, args.seed_value)
    report = cert.check_certificate(Q, ctx)
    (out / "certificate.txt").write_text(cert.report_lines(report))
    print(
        f"certificate: norm={report.norm:.4f} "
        f"construction_checks={'pass' if report.all_construction_checks else 'FAIL'}"
    )
    return 0


def cmd_experiment(args):
    exp_id = args.id
    if exp_id not in EXPERIMENTS:
        raise CliError(f"unknown experiment {exp_id!r}", USAGE_ERROR)
    if EXPERIMENTS[exp_id].slow and not args.slow:
        raise CliError(
            f"experiment {exp_id} is long-running; pass --slow to confirm",
            USAGE_ERROR,
        )
    out = _outdir(args)
    result = run_experiment(exp_id, args.seed_value, out)
    report = result.get("report")
    if report is not None and not report.rounds:
        print("no clusters recovered")
        return 2
    print(f"experiment {exp_id} done; artifacts in {out}")
    return 0


def _add_common(sub):
    sub.add_argument("--config", help="flat key = value config file")
    sub.add_argument("--seed", required=True, help="RNG seed, or comma list of seeds")
    sub.add_argument("--out", required=True, help="output directory")
    sub.add_argument("--slow", action="store_true", help="allow long experiments")
    sub.add_argument("--jobs", type=int, default=1,
                     help="parallel workers across seeds")
    for key, parse in _CONFIG_KEYS.items():
        if key == "sizes":
            sub.add_argument("--sizes", type=_CONFIG_KEYS["sizes"], default=None)
        elif key == "instance":
            sub.add_argument("--instance", default=None)
        else:
            sub.add_argument(f"--{key.replace('_', '-')}", dest=key,
                             type=parse, default=None)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="peelclust",
        description="Planted-cluster recovery by convex splitting and peeling",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    for name, fn in [
        ("generate", cmd_generate),
        ("solve", cmd_solve),
        ("peel", cmd_peel),
        ("certcheck", cmd_certcheck),
    ]:
        sub = commands.add_parser(name)
        _add_common(sub)
        sub.set_defaults(handler=fn)
    sub = commands.add_parser("experiment")
    sub.add_argument("id", help="experiment id: 1, 2, 3, 3a, or 4")
    _add_common(sub)
    sub.set_defaults(handler=cmd_experiment)
    return parser


def _parse_seeds(raw):
    try:
        return [int(v) for v in str(raw).split(",") if v != ""]
    except ValueError:
        raise CliError(f"bad seed list {raw!r}", USAGE_ERROR)


def _run_one(args, seed, outdir):
    args.seed_value = seed
    args.out = str(outdir)
    return args.handler(args)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0, None) else 0
    try:
        seeds = _parse_seeds(args.seed)
        if not seeds:
            raise CliError("at least one seed is required", USAGE_ERROR)
        if len(seeds) == 1:
            return _run_one(args, seeds[0], args.out)
        base = Path(args.out)
        jobs = max(1, args.jobs)
        tasks = [(args, s, base / f"seed{s}") for s in seeds]
        if jobs == 1:
            codes = [_run_one(*t) for t in tasks]
        else:
            with multiprocessing.Pool(jobs) as pool:
                codes = pool.starmap(_run_one, tasks)
        return max(codes)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ValueError, OSError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
