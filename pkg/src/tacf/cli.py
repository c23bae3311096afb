"""Command-line interface: track, bench, synth, ablate, sweep."""

import argparse
import csv
import os
import sys
from importlib import metadata

import numpy as np

from .bench import runner
from .bench.sequence import load_sequence, write_sequence
from .bench.synth import load_scenario, synth_sequence
from .features import CN_TABLE_ENV
from .tracker import TACFTracker
from .validation import ConfigError, InvalidInputError, SequenceFormatError

SCENARIO_EXTS = (".yaml", ".yml", ".json")
ABLATION_ROWS = (
    ("KCC", dict(use_ca=False, use_da=False, use_sa=False)),
    ("+SA", dict(use_ca=False, use_da=False, use_sa=True)),
    ("+DA", dict(use_ca=False, use_da=True, use_sa=False)),
    ("+CA", dict(use_ca=True, use_da=False, use_sa=False)),
    ("TACF", dict(use_ca=True, use_da=True, use_sa=True)),
)
# tracker parameters settable by flag (``--beta-t`` -> ``beta_t``)
TRACKER_FLAGS = ("lambda1", "lambda2", "fc", "context_patches", "beta_t", "gamma",
                 "eta", "padding", "cell_size", "kernel_sigma")


def version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def tracker_params(args):
    """Tracker keyword arguments from parsed flags (unset flags keep defaults)."""
    params = {}
    for name in TRACKER_FLAGS:
        val = getattr(args, name, None)
        if val is not None:
            params[name] = val
    params["use_ca"] = not args.no_ca
    params["use_da"] = not args.no_da
    params["use_sa"] = not args.no_sa
    if args.cn_table:
        params["cn_table"] = args.cn_table
    return params


def mode_name(params):
    flags = [k for k in ("use_ca", "use_da", "use_sa") if params.get(k, True)]
    if not flags:
        return "baseline"
    if len(flags) == 3:
        return "full"
    return "+" + "+".join(f[4:].upper() for f in flags)


def load_input(path, seed=None):
    """A sequence directory, or a scenario file rendered synthetically."""
    if os.path.isfile(path) and path.lower().endswith(SCENARIO_EXTS):
        sc = load_scenario(path)
        if seed is not None:
            sc["seed"] = seed
        return synth_sequence(sc)
    return load_sequence(path)


def write_manifest(out_dir, args, params, inputs):
    config = TACFTracker(**params).get_params()
    runner.write_json(os.path.join(out_dir, "manifest.json"), {
        "command": args.command,
        "argv": list(args.argv),
        "config": config,
        "mode": mode_name(config),
        "inputs": [os.path.abspath(p) for p in inputs],
        "out": os.path.abspath(out_dir),
        "seed": args.seed,
        "cn_table": config["cn_table"] or os.environ.get(CN_TABLE_ENV),
        "version": version(),
    })


def cmd_track(args):
    params = tracker_params(args)
    seq = load_input(args.input, args.seed)
    tracker = TACFTracker(**params)
    res = runner.evaluate(tracker, seq)
    os.makedirs(args.out, exist_ok=True)
    runner.write_results_csv(os.path.join(args.out, "results.csv"), res["boxes"])
    runner.write_telemetry_csv(os.path.join(args.out, "telemetry.csv"), res["telemetry"],
                               verbose=args.verbose)
    runner.write_curve_csv(os.path.join(args.out, "curve.csv"), res["curve"])
    runner.write_json(os.path.join(args.out, "metrics.json"), res["metrics"])
    write_manifest(args.out, args, params, [args.input])
    m = res["metrics"]
    print(f"{seq.name}: auc={m['auc']:.3f} mean_iou={m['mean_iou']:.3f} fps={m['fps']:.1f}")
    return 0


def cmd_bench(args):
    params = tracker_params(args)
    if not os.path.isdir(args.root):
        raise SequenceFormatError(f"{args.root}: not a directory")
    dirs = runner.find_sequences(args.root)
    agg = runner.bench(dirs, lambda: TACFTracker(**params), args.out, args.workers)
    write_manifest(args.out, args, params, dirs)
    for name, r in agg["sequences"].items():
        if "error" in r:
            print(f"{name}: FAILED {r['error']}", file=sys.stderr)
        else:
            print(f"{name}: auc={r['auc']:.3f} mean_iou={r['mean_iou']:.3f}")
    if not agg["n_succeeded"]:
        print("error: no sequence could be evaluated", file=sys.stderr)
        return 1
    print(f"aggregate ({agg['n_succeeded']}/{agg['n_sequences']}): auc={agg['auc']:.3f}")
    return 0


def cmd_synth(args):
    sc = load_scenario(args.scenario)
    if args.seed is not None:
        sc["seed"] = args.seed
    seq = synth_sequence(sc)
    write_sequence(seq, args.out)
    print(f"wrote {len(seq)} frames to {args.out}")
    return 0


def _ablation_inputs(args):
    if os.path.isfile(args.input) and args.input.lower().endswith(SCENARIO_EXTS):
        sc = load_scenario(args.input)
        base = sc["seed"] if args.seed is None else args.seed
        return [synth_sequence(dict(sc, seed=base + i)) for i in range(args.seeds)]
    return [load_sequence(args.input)]


def run_ablation(seqs, params):
    """Score the five module configurations; one row dict per configuration."""
    rows = []
    for name, flags in ABLATION_ROWS:
        aucs, ious, frames, wall, stage = [], [], 0, 0.0, 0.0
        for seq in seqs:
            tracker = TACFTracker(**dict(params, **flags))
            res = runner.evaluate(tracker, seq)
            aucs.append(res["metrics"]["auc"])
            ious.append(res["metrics"]["mean_iou"])
            frames += len(seq)
            wall += res["seconds"]
            stage += sum(t.ms_total for t in res["telemetry"])
        rows.append({"config": name, "auc": float(np.mean(aucs)),
                     "mean_iou": float(np.mean(ious)), "mspf": 1e3 * wall / frames,
                     "mspf_stages": stage / frames})
    return rows


def cmd_ablate(args):
    params = tracker_params(args)
    params.update(use_ca=True, use_da=True, use_sa=True)
    seqs = _ablation_inputs(args)
    rows = run_ablation(seqs, params)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "ablation.csv"), "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.4f}" if isinstance(v, float) else v) for k, v in r.items()})
    runner.write_json(os.path.join(args.out, "ablation.json"), rows)
    write_manifest(args.out, args, params, [args.input])
    print(f"{'config':<6} {'auc':>6} {'iou':>6} {'mspf':>7}")
    for r in rows:
        print(f"{r['config']:<6} {r['auc']:6.3f} {r['mean_iou']:6.3f} {r['mspf']:7.2f}")
    return 0


def _parse_values(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--values must be comma-separated numbers, got {text!r}") from None


def cmd_sweep(args):
    if args.param not in TACFTracker().get_params():
        raise ConfigError(f"unknown tracker parameter {args.param!r}")
    params = tracker_params(args)
    seqs = _ablation_inputs(args)
    os.makedirs(args.out, exist_ok=True)
    rows = []
    for v in _parse_values(args.values):
        if args.param in ("fc", "context_patches", "cell_size"):
            v = int(v)
        res = [runner.evaluate(TACFTracker(**dict(params, **{args.param: v})), s) for s in seqs]
        rows.append({args.param: v,
                     "auc": float(np.mean([r["metrics"]["auc"] for r in res])),
                     "mean_iou": float(np.mean([r["metrics"]["mean_iou"] for r in res]))})
        print(f"{args.param}={v:g}: auc={rows[-1]['auc']:.3f} mean_iou={rows[-1]['mean_iou']:.3f}")
    with open(os.path.join(args.out, "sweep.csv"), "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    write_manifest(args.out, args, params, [args.input])
    return 0


def _add_tracker_flags(p):
    g = p.add_argument_group("tracker")
    g.add_argument("--lambda1", type=float)
    g.add_argument("--lambda2", type=float)
    g.add_argument("--fc", type=int, help="context-learning interval (frames)")
    g.add_argument("--context-patches", type=int)
    g.add_argument("--beta-t", type=float, help="channel gate floor")
    g.add_argument("--gamma", type=float, help="motion gain")
    g.add_argument("--eta", type=float, help="model learning rate")
    g.add_argument("--padding", type=float)
    g.add_argument("--cell-size", type=int)
    g.add_argument("--kernel-sigma", type=float)
    g.add_argument("--no-ca", action="store_true", help="disable contextual attention")
    g.add_argument("--no-da", action="store_true", help="disable dimensional attention")
    g.add_argument("--no-sa", action="store_true", help="disable spatiotemporal attention")
    g.add_argument("--cn-table", help=f"color-name table (default: ${CN_TABLE_ENV} or bundled)")
    p.add_argument("--seed", type=int, help="scenario seed override")
    p.add_argument("--out", required=True, help="output directory")


def build_parser():
    parser = argparse.ArgumentParser(prog="tacf", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {version()}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("track", help="track one sequence directory or scenario file")
    p.add_argument("input")
    p.add_argument("--verbose", action="store_true", help="add channel weights to telemetry")
    _add_tracker_flags(p)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("bench", help="evaluate every sequence under a root directory")
    p.add_argument("root")
    p.add_argument("--workers", type=int, default=1)
    _add_tracker_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", help="render a scenario file to a sequence directory")
    p.add_argument("scenario")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ablate", help="compare KCC, +SA, +DA, +CA and full TACF")
    p.add_argument("input", help="sequence directory or scenario file")
    p.add_argument("--seeds", type=int, default=1, help="scenario seeds to average over")
    _add_tracker_flags(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("sweep", help="score one tracker parameter over several values")
    p.add_argument("input", help="sequence directory or scenario file")
    p.add_argument("--param", required=True)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--seeds", type=int, default=1)
    _add_tracker_flags(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    args.argv = argv
    if getattr(args, "workers", 1) < 1 or getattr(args, "seeds", 1) < 1:
        parser.error("--workers and --seeds must be >= 1")
    try:
        return args.func(args)
    except (ConfigError, InvalidInputError, SequenceFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
