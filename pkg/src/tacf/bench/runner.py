"""Run trackers over sequences and write OPE reports."""

import csv
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .metrics import THRESHOLDS, SuccessCurve, sequence_metrics
from .sequence import load_sequence

RESULT_FIELDS = ("frame", "x", "y", "w", "h")
TELEMETRY_FIELDS = ("frame", "x", "y", "w", "h", "peak", "pme_object", "gamma_t",
                    "context", "held", "ms_detect", "ms_attention", "ms_train", "ms_total")


def run_tracker(tracker, seq):
    """Track ``seq`` from its first ground-truth box.

    Frames are decoded up front so the reported wall time covers the
    tracking loop only. Returns ``(boxes, seconds)``.
    """
    frames = [seq.frame(i) for i in range(len(seq))]
    t0 = time.perf_counter()
    boxes = tracker.track(frames, seq.ground_truth[0])
    return boxes, time.perf_counter() - t0


def evaluate(tracker, seq):
    """Track one sequence and score it; returns a result dict."""
    boxes, seconds = run_tracker(tracker, seq)
    metrics, curve, ious = sequence_metrics(boxes, seq.ground_truth, len(seq), seconds)
    return {
        "name": seq.name,
        "boxes": boxes,
        "metrics": metrics,
        "curve": curve,
        "telemetry": list(getattr(tracker, "telemetry_", [])),
        "seconds": seconds,
    }


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, float):
        return f"{v:.6g}"
    return v


def write_results_csv(path, boxes):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RESULT_FIELDS)
        for i, b in enumerate(boxes, 1):
            w.writerow([i] + [repr(float(v)) for v in b])  # round-trips exactly


def write_telemetry_csv(path, telemetry, verbose=False):
    fields = list(TELEMETRY_FIELDS)
    if verbose:
        fields += ["dim_z", "dim_s", "penalties"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(fields)
        for t in telemetry:
            x, y, bw, bh = t.box.to_xywh()
            row = [t.frame, x, y, bw, bh, t.peak, t.pme_object, t.gamma_t,
                   t.context_trained, t.held, t.ms_detect, t.ms_attention,
                   t.ms_train, t.ms_total]
            if verbose:
                for arr in (t.dim_z, t.dim_s, t.penalties):
                    row.append("" if arr is None else " ".join(f"{v:.6g}" for v in arr))
            w.writerow([_fmt(v) for v in row])


def write_curve_csv(path, curve):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("threshold", "value"))
        for t, v in zip(curve.thresholds, curve.values):
            w.writerow((f"{t:.2f}", f"{v:.6f}"))


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def find_sequences(root):
    """Immediate subdirectories of ``root`` (sorted), or ``root`` itself if
    it directly holds a sequence."""
    root = os.fspath(root)
    subdirs = sorted(os.path.join(root, d) for d in os.listdir(root)
                     if os.path.isdir(os.path.join(root, d)) and d != "img")
    if not subdirs or os.path.isdir(os.path.join(root, "img")):
        return [root]
    return subdirs


def aggregate(per_sequence):
    """Equal-weight mean of per-sequence scores (each sequence counts once
    regardless of its length). Timing is excluded so the report is
    reproducible run to run."""
    ok = [r for r in per_sequence if "error" not in r]
    out = {
        "n_sequences": len(per_sequence),
        "n_succeeded": len(ok),
        "sequences": {r["name"]: ({"error": r["error"]} if "error" in r else
                                  {k: r["metrics"][k] for k in ("auc", "sr@0.5", "mean_iou", "n_frames")})
                      for r in per_sequence},
    }
    if ok:
        for key in ("auc", "sr@0.5", "mean_iou"):
            out[key] = float(np.mean([r["metrics"][key] for r in ok]))
        out["curve"] = [float(v) for v in np.mean([r["curve"].values for r in ok], axis=0)]
    return out


def bench(seq_dirs, make_tracker, out_dir, workers=1):
    """Evaluate every sequence directory and write reports under ``out_dir``.

    ``make_tracker`` builds a fresh tracker per sequence, so workers never
    share state. All files are written here, after the workers finish.
    Returns the aggregate dict.
    """
    def job(path):
        name = os.path.basename(os.path.normpath(path))
        try:
            res = evaluate(make_tracker(), load_sequence(path))
            res["name"] = name
            return res
        except Exception as exc:  # recorded per sequence, the bench carries on
            return {"name": name, "error": f"{type(exc).__name__}: {exc}"}

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, seq_dirs))
    else:
        results = [job(p) for p in seq_dirs]
    results.sort(key=lambda r: r["name"])

    os.makedirs(out_dir, exist_ok=True)
    timing = {}
    for r in results:
        if "error" in r:
            continue
        d = os.path.join(out_dir, r["name"])
        os.makedirs(d, exist_ok=True)
        write_results_csv(os.path.join(d, "results.csv"), r["boxes"])
        write_telemetry_csv(os.path.join(d, "telemetry.csv"), r["telemetry"])
        write_curve_csv(os.path.join(d, "curve.csv"), r["curve"])
        write_json(os.path.join(d, "metrics.json"), r["metrics"])
        timing[r["name"]] = {"fps": r["metrics"]["fps"], "seconds": r["seconds"]}
    agg = aggregate(results)
    write_json(os.path.join(out_dir, "aggregate.json"), agg)
    write_json(os.path.join(out_dir, "timing.json"), timing)
    if "curve" in agg:
        write_curve_csv(os.path.join(out_dir, "curve.csv"),
                        SuccessCurve(THRESHOLDS, np.array(agg["curve"])))
    return agg
