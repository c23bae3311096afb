"""One-pass evaluation metrics."""

from dataclasses import dataclass

import numpy as np

from ..imaging import BoundingBox
from ..validation import InvalidInputError

THRESHOLDS = np.linspace(0.0, 1.0, 101)


def _xywh(box):
    if isinstance(box, BoundingBox):
        return box.to_xywh()
    return tuple(box)


def iou(a, b):
    """Intersection over union of two boxes (``BoundingBox`` or top-left
    ``(x, y, w, h)``)."""
    ax, ay, aw, ah = _xywh(a)
    bx, by, bw, bh = _xywh(b)
    iw = max(0.0, min(ax + aw, bx + bw) - max(ax, bx))
    ih = max(0.0, min(ay + ah, by + bh) - max(ay, by))
    inter = iw * ih
    union = aw * ah + bw * bh - inter
    return float(inter / union) if union > 0 else 0.0


def iou_many(pred, gt):
    """Row-wise IoU of two ``(N, 4)`` top-left box arrays."""
    pred = np.asarray(pred, dtype=float).reshape(-1, 4)
    gt = np.asarray(gt, dtype=float).reshape(-1, 4)
    x1 = np.maximum(pred[:, 0], gt[:, 0])
    y1 = np.maximum(pred[:, 1], gt[:, 1])
    x2 = np.minimum(pred[:, 0] + pred[:, 2], gt[:, 0] + gt[:, 2])
    y2 = np.minimum(pred[:, 1] + pred[:, 3], gt[:, 1] + gt[:, 3])
    inter = np.clip(x2 - x1, 0, None) * np.clip(y2 - y1, 0, None)
    union = pred[:, 2] * pred[:, 3] + gt[:, 2] * gt[:, 3] - inter
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(union > 0, inter / union, 0.0)


@dataclass(frozen=True)
class SuccessCurve:
    thresholds: np.ndarray
    values: np.ndarray


def success_auc(ious):
    """Success curve (fraction with IoU strictly above each threshold on a
    0:0.01:1 grid) and its AUC, the mean of the curve values."""
    ious = np.asarray(ious, dtype=float).ravel()
    if ious.size == 0:
        raise InvalidInputError("no IoU values")
    values = (ious[None, :] > THRESHOLDS[:, None]).mean(axis=1)
    return SuccessCurve(THRESHOLDS.copy(), values), float(values.mean())


def sequence_metrics(pred, gt, n_frames=None, seconds=None):
    """AUC, success rate at 0.5 and mean IoU over frames with ground truth."""
    gt = np.asarray(gt, dtype=float)
    present = np.all(np.isfinite(gt), axis=1)
    ious = iou_many(np.asarray(pred)[present], gt[present])
    curve, auc = success_auc(ious)
    out = {
        "auc": auc,
        "sr@0.5": float(np.mean(ious > 0.5)),
        "mean_iou": float(ious.mean()),
        "n_frames": int(len(gt)),
    }
    if seconds is not None:
        out["fps"] = float(n_frames / seconds) if seconds > 0 else float("inf")
    return out, curve, ious
