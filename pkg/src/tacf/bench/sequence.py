"""Benchmark sequences on disk (OTB / UAV123 / UAVDT style layouts)."""

import os
import re
from dataclasses import dataclass, field

import cv2
import numpy as np

from ..validation import SequenceFormatError

IMAGE_EXTS = (".jpg", ".jpeg", ".png", ".bmp")
_GT_NAMES = ("groundtruth_rect.txt", "groundtruth.txt")


@dataclass
class Sequence:
    """Frames plus per-frame ground truth.

    ``frames`` holds file paths or already-decoded arrays. ``ground_truth``
    is ``(N, 4)`` top-left ``(x, y, w, h)``; rows of NaN mark frames where
    the target is absent.
    """

    name: str
    frames: list
    ground_truth: np.ndarray
    attributes: dict = field(default_factory=dict)

    def __post_init__(self):
        self.ground_truth = np.asarray(self.ground_truth, dtype=float).reshape(-1, 4)
        if len(self.ground_truth) != len(self.frames):
            raise SequenceFormatError(
                f"{self.name}: {len(self.frames)} frames but "
                f"{len(self.ground_truth)} ground-truth boxes")
        if len(self.frames) == 0:
            raise SequenceFormatError(f"{self.name}: empty sequence")
        first = self.ground_truth[0]
        if not (np.all(np.isfinite(first)) and first[2] > 0 and first[3] > 0):
            raise SequenceFormatError(f"{self.name}: first ground-truth box is invalid")

    def __len__(self):
        return len(self.frames)

    @property
    def present(self):
        """Mask of frames with a valid (non-NaN) ground-truth box."""
        return np.all(np.isfinite(self.ground_truth), axis=1)

    def frame(self, i):
        f = self.frames[i]
        if isinstance(f, np.ndarray):
            return f
        return read_image(f)

    def iter_frames(self):
        for i in range(len(self)):
            yield self.frame(i)


def read_image(path):
    """Decode an image file to RGB (or grayscale) uint8."""
    img = cv2.imread(os.fspath(path), cv2.IMREAD_UNCHANGED)
    if img is None:
        raise OSError(f"cannot read image {path}")
    if img.dtype != np.uint8:
        img = cv2.convertScaleAbs(img, alpha=255.0 / max(1, img.max()))
    if img.ndim == 3:
        if img.shape[2] == 4:
            img = img[:, :, :3]
        b, g, r = img[..., 0], img[..., 1], img[..., 2]
        if np.array_equal(b, g) and np.array_equal(g, r):
            return np.ascontiguousarray(b)
        img = cv2.cvtColor(img, cv2.COLOR_BGR2RGB)
    return img


def parse_ground_truth(path):
    """One ``x,y,w,h`` box per line, comma/tab/space separated."""
    boxes = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            parts = [p for p in re.split(r"[,\t ]+", line) if p]
            if len(parts) < 4:
                raise SequenceFormatError(f"{path}:{lineno}: expected 4 values, got {line!r}")
            try:
                vals = [float(p) for p in parts[:4]]
            except ValueError:
                raise SequenceFormatError(f"{path}:{lineno}: non-numeric box {line!r}") from None
            if not all(np.isfinite(vals)) or vals[2] <= 0 or vals[3] <= 0:
                vals = [np.nan] * 4
            boxes.append(vals)
    return np.array(boxes, dtype=float).reshape(-1, 4)


def _find_images(directory):
    for cand in (os.path.join(directory, "img"), directory):
        if os.path.isdir(cand):
            files = sorted(f for f in os.listdir(cand) if f.lower().endswith(IMAGE_EXTS))
            if files:
                return [os.path.join(cand, f) for f in files]
    return []


def _find_ground_truth(directory):
    for name in _GT_NAMES:
        p = os.path.join(directory, name)
        if os.path.isfile(p):
            return p
    txts = sorted(f for f in os.listdir(directory) if f.endswith(".txt")
                  and ("gt" in f.lower() or "groundtruth" in f.lower()))
    if not txts:
        txts = sorted(f for f in os.listdir(directory) if f.endswith(".txt"))
    if len(txts) == 1 or (txts and "gt" in txts[0].lower()):
        return os.path.join(directory, txts[0])
    return None


def load_sequence(directory):
    """Load a sequence directory with images (optionally under ``img/``)
    and a ground-truth text file. Frames are ordered lexicographically."""
    directory = os.fspath(directory)
    if not os.path.isdir(directory):
        raise SequenceFormatError(f"{directory}: not a directory")
    frames = _find_images(directory)
    if not frames:
        raise SequenceFormatError(f"{directory}: no image files found")
    gt_path = _find_ground_truth(directory)
    if gt_path is None:
        raise SequenceFormatError(f"{directory}: no ground-truth file found")
    gt = parse_ground_truth(gt_path)
    if len(gt) != len(frames):
        raise SequenceFormatError(
            f"{gt_path}:{min(len(gt), len(frames)) + 1}: {len(gt)} boxes for "
            f"{len(frames)} frames")
    attrs = {}
    attr_path = os.path.join(directory, "attributes.txt")
    if os.path.isfile(attr_path):
        with open(attr_path) as fh:
            attrs["tags"] = [t for t in re.split(r"[,\s]+", fh.read()) if t]
    return Sequence(os.path.basename(os.path.normpath(directory)), frames, gt, attrs)


def write_sequence(seq, directory):
    """Write frames as PNG under ``img/`` plus ``groundtruth.txt``."""
    img_dir = os.path.join(directory, "img")
    os.makedirs(img_dir, exist_ok=True)
    for i in range(len(seq)):
        f = seq.frame(i)
        if f.ndim == 3:
            f = cv2.cvtColor(f, cv2.COLOR_RGB2BGR)
        cv2.imwrite(os.path.join(img_dir, f"{i + 1:05d}.png"), f)
    with open(os.path.join(directory, "groundtruth.txt"), "w") as fh:
        for row in seq.ground_truth:
            fh.write(",".join("NaN" if not np.isfinite(v) else f"{v:g}" for v in row) + "\n")
    return directory
