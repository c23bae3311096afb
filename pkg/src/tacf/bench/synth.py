"""Deterministic synthetic sequences for stress-testing trackers.

A scenario is a plain mapping (usually loaded from YAML or JSON)::

    name: occlusion
    n_frames: 100
    frame_size: [640, 360]          # width, height
    color: true
    seed: 0
    noise: 4.0                      # Gaussian std in 8-bit levels
    target:
      size: [48, 48]
      start: [160, 180]             # center
      velocity: [3.0, 0.5]          # px / frame
      wobble: 0.0                   # sinusoidal vertical amplitude, px
    clutter:
      distractors: 2
      similarity: 0.8               # 1 = exact copies of the target texture
    occlusions:
      - {start: 40, end: 59}        # 1-based inclusive frame range
"""

import copy

import cv2
import numpy as np
import yaml

from ..validation import ConfigError
from .sequence import Sequence

DEFAULT_SCENARIO = {
    "name": "synthetic",
    "n_frames": 100,
    "frame_size": [640, 360],
    "color": True,
    "seed": 0,
    "noise": 4.0,
    "target": {"size": [48, 48], "start": None, "velocity": [3.0, 0.0], "wobble": 0.0},
    "clutter": {"distractors": 0, "similarity": 0.8},
    "occlusions": [],
}


def _merge(base, override):
    out = copy.deepcopy(base)
    for key, val in (override or {}).items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = val
    return out


def load_scenario(path):
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: scenario must be a mapping")
    return normalize_scenario(data)


def normalize_scenario(scenario):
    """Fill defaults and validate a scenario mapping."""
    unknown = set(scenario or {}) - set(DEFAULT_SCENARIO)
    if unknown:
        raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
    sc = _merge(DEFAULT_SCENARIO, scenario)
    n = int(sc["n_frames"])
    if n < 1:
        raise ConfigError("n_frames must be >= 1")
    W, H = (int(v) for v in sc["frame_size"])
    tw, th = (float(v) for v in sc["target"]["size"])
    if W < 8 or H < 8 or tw < 4 or th < 4:
        raise ConfigError("frame and target must be at least 8x8 and 4x4 pixels")
    if sc["target"]["start"] is None:
        sc["target"]["start"] = [W / 4.0, H / 2.0]
    for occ in sc["occlusions"]:
        s, e = int(occ["start"]), int(occ["end"])
        if not 1 <= s <= e <= n:
            raise ConfigError(f"occlusion range {s}-{e} outside frames 1-{n}")
    if int(sc["clutter"]["distractors"]) < 0:
        raise ConfigError("distractor count must be >= 0")
    if float(sc["noise"]) < 0:
        raise ConfigError("noise must be >= 0")
    return sc


def _smooth_texture(rng, h, w, grain, channels):
    low = rng.random((max(2, h // grain), max(2, w // grain), channels)).astype(np.float32)
    tex = cv2.resize(low, (w, h), interpolation=cv2.INTER_CUBIC)
    return tex.reshape(h, w, channels)


def _target_texture(rng, h, w, channels):
    # blocky high-contrast pattern so it stands out from the smooth background
    blocks = rng.random((4, 4, channels)).astype(np.float32)
    tex = cv2.resize(blocks, (w, h), interpolation=cv2.INTER_NEAREST).reshape(h, w, channels)
    detail = _smooth_texture(rng, h, w, 4, channels)
    return np.clip(0.75 * tex + 0.25 * detail, 0, 1)


def _paste(canvas, tex, cx, cy):
    """Paste ``tex`` centered at integer-rounded (cx, cy); returns top-left."""
    h, w = tex.shape[:2]
    x0 = int(np.floor(cx - w / 2.0 + 0.5))
    y0 = int(np.floor(cy - h / 2.0 + 0.5))
    H, W = canvas.shape[:2]
    xa, ya = max(x0, 0), max(y0, 0)
    xb, yb = min(x0 + w, W), min(y0 + h, H)
    if xa < xb and ya < yb:
        canvas[ya:yb, xa:xb] = tex[ya - y0:yb - y0, xa - x0:xb - x0]
    return x0, y0


def synth_sequence(scenario=None):
    """Generate a :class:`Sequence` with in-memory frames and exact boxes."""
    sc = normalize_scenario(scenario or {})
    rng = np.random.default_rng(int(sc["seed"]))
    n = int(sc["n_frames"])
    W, H = (int(v) for v in sc["frame_size"])
    ch = 3 if sc["color"] else 1
    tw, th = (int(round(float(v))) for v in sc["target"]["size"])

    background = 0.15 + 0.7 * _smooth_texture(rng, H, W, 24, ch)
    background += 0.1 * _smooth_texture(rng, H, W, 6, ch) - 0.05
    target = _target_texture(rng, th, tw, ch)

    sim = float(sc["clutter"]["similarity"])
    distractors = []
    for _ in range(int(sc["clutter"]["distractors"])):
        tex = np.clip(sim * target + (1 - sim) * _target_texture(rng, th, tw, ch), 0, 1)
        pos = rng.uniform([tw, th], [W - tw, H - th])
        vel = rng.uniform(-1.5, 1.5, size=2)
        distractors.append((tex, pos, vel))

    sx, sy = (float(v) for v in sc["target"]["start"])
    vx, vy = (float(v) for v in sc["target"]["velocity"])
    wobble = float(sc["target"]["wobble"])
    occluder = np.clip(0.5 + 0.5 * _smooth_texture(rng, int(th * 1.4), int(tw * 0.9), 6, ch)
                       - 0.25, 0, 1)
    noise = float(sc["noise"]) / 255.0

    frames, boxes = [], []
    for k in range(n):
        canvas = background.copy()
        for tex, pos, vel in distractors:
            _paste(canvas, tex, *(pos + (k + 1) * vel))
        # ``start`` is the position at time 0; frame k (1-based) is at start + k * velocity
        t = k + 1
        cx = sx + t * vx
        cy = sy + t * vy + wobble * np.sin(2 * np.pi * t / 50.0)
        x0, y0 = _paste(canvas, target, cx, cy)
        for occ in sc["occlusions"]:
            s, e = int(occ["start"]), int(occ["end"])
            if s <= k + 1 <= e:
                # sweep from left of the target to its right over the window
                frac = (k + 1 - s + 0.5) / (e - s + 1)
                ox = x0 - tw + frac * 3 * tw
                _paste(canvas, occluder, ox, y0 + th / 2.0)
        if noise > 0:
            canvas = canvas + rng.normal(0.0, noise, canvas.shape).astype(canvas.dtype)
        frame = np.clip(canvas * 255.0 + 0.5, 0, 255).astype(np.uint8)
        frames.append(frame[:, :, 0] if ch == 1 else frame)
        boxes.append((x0, y0, tw, th))
    attrs = {"scenario": sc}
    if sc["occlusions"]:
        attrs["tags"] = ["occlusion"]
    if distractors:
        attrs.setdefault("tags", []).append("clutter")
    return Sequence(sc["name"], frames, np.array(boxes, dtype=float), attrs)
