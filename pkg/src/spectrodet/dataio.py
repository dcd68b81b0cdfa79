"""Dataset geometry and on-disk formats.

Layout under a dataset root:
    images/{scene_id}.png       8-bit grayscale 512x512
    labels/{scene_id}.txt       one `class cx cy w h` line per box ([0,1] units)
    predictions/{scene_id}.txt  label format plus a trailing score column
    provenance/{scene_id}.txt   key = value echo of the scene's metadata
    manifest.txt                one scene id per line
    split.txt                   [train] / [test] sections of scene ids

All text files are UTF-8 with LF line endings.
"""

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .signals import (CAPTURE_DURATION, CAPTURE_SAMPLE_RATE, SceneConfig,
                      SignalClass, SignalSpec)
from .spectrogram import IMAGE_SIZE, SpectrogramImage

CLASS_NAMES = [c.name for c in SignalClass]


@dataclass(frozen=True)
class BoundingBox:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("degenerate bounding box")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height


@dataclass(frozen=True)
class Annotation:
    class_id: int
    box: BoundingBox

    def __post_init__(self):
        if not 0 <= self.class_id < len(CLASS_NAMES):
            raise ValueError(f"class_id {self.class_id} out of range")


@dataclass(frozen=True)
class Detection:
    class_id: int
    box: BoundingBox
    score: float

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0,1]")


def bbox_from_spec(spec: SignalSpec) -> BoundingBox:
    """Pixel-space box from signal metadata; clamped to the image bounds."""
    fs = CAPTURE_SAMPLE_RATE
    x_min = (spec.center_freq_hz - spec.bandwidth_hz / 2 + fs / 2) / fs * IMAGE_SIZE
    x_max = (spec.center_freq_hz + spec.bandwidth_hz / 2 + fs / 2) / fs * IMAGE_SIZE
    y_min = spec.arrival_s / CAPTURE_DURATION * IMAGE_SIZE
    y_max = (spec.arrival_s + spec.duration_s) / CAPTURE_DURATION * IMAGE_SIZE
    return BoundingBox(
        max(0.0, min(x_min, IMAGE_SIZE)),
        max(0.0, min(y_min, IMAGE_SIZE)),
        max(0.0, min(x_max, IMAGE_SIZE)),
        max(0.0, min(y_max, IMAGE_SIZE)),
    )


def annotations_for(config: SceneConfig) -> list:
    return [Annotation(int(s.signal_class), bbox_from_spec(s)) for s in config.specs]


# ----------------------------------------------------------------------
# label / prediction text files


def _box_to_fields(box: BoundingBox):
    cx = (box.x_min + box.x_max) / 2 / IMAGE_SIZE
    cy = (box.y_min + box.y_max) / 2 / IMAGE_SIZE
    w = box.width / IMAGE_SIZE
    h = box.height / IMAGE_SIZE
    return cx, cy, w, h


def _fields_to_box(cx, cy, w, h) -> BoundingBox:
    return BoundingBox(
        (cx - w / 2) * IMAGE_SIZE,
        (cy - h / 2) * IMAGE_SIZE,
        (cx + w / 2) * IMAGE_SIZE,
        (cy + h / 2) * IMAGE_SIZE,
    )


def write_label_file(annotations, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for a in annotations:
            cx, cy, w, h = _box_to_fields(a.box)
            f.write(f"{a.class_id} {cx:.6f} {cy:.6f} {w:.6f} {h:.6f}\n")


class LabelParseError(ValueError):
    pass


def _parse_line(line, path, lineno, n_fields):
    parts = line.split()
    if len(parts) != n_fields:
        raise LabelParseError(
            f"{path}:{lineno}: expected {n_fields} fields, got {len(parts)}")
    try:
        cls = int(parts[0])
        vals = [float(p) for p in parts[1:]]
    except ValueError as e:
        raise LabelParseError(f"{path}:{lineno}: {e}") from None
    return cls, vals


def read_label_file(path) -> list:
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            cls, vals = _parse_line(line, path, lineno, 5)
            out.append(Annotation(cls, _fields_to_box(*vals)))
    return out


def write_prediction_file(detections, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for d in detections:
            cx, cy, w, h = _box_to_fields(d.box)
            f.write(f"{d.class_id} {cx:.6f} {cy:.6f} {w:.6f} {h:.6f} {d.score:.6f}\n")


def read_prediction_file(path) -> list:
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            cls, vals = _parse_line(line, path, lineno, 6)
            score = vals[4]
            if not 0.0 <= score <= 1.0:
                raise LabelParseError(f"{path}:{lineno}: score {score} outside [0,1]")
            out.append(Detection(cls, _fields_to_box(*vals[:4]), score))
    return out


def read_predictions(directory) -> dict:
    """Per-scene detection lists, keyed by scene id, from a predictions dir."""
    out = {}
    for name in sorted(os.listdir(directory)):
        if name.endswith(".txt"):
            out[name[:-4]] = read_prediction_file(os.path.join(directory, name))
    return out


# ----------------------------------------------------------------------
# images


def write_png(image: SpectrogramImage, path):
    """8-bit grayscale PNG; pixel = round-half-up(p * 255)."""
    q = np.floor(np.asarray(image.pixels) * 255.0 + 0.5).astype(np.uint8)
    Image.fromarray(q, mode="L").save(path, format="PNG")


def read_png(path) -> np.ndarray:
    """Pixels back in [0,1] (quantized to 8 bits)."""
    with Image.open(path) as im:
        q = np.asarray(im.convert("L"), dtype=np.float64)
    return q / 255.0


# ----------------------------------------------------------------------
# manifests, splits, provenance


def write_manifest(scene_ids, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for sid in scene_ids:
            f.write(sid + "\n")


def read_manifest(path) -> list:
    with open(path, encoding="utf-8") as f:
        return [line.strip() for line in f if line.strip()]


def write_provenance(config: SceneConfig, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"scene_id = {config.scene_id}\n")
        f.write(f"combo = {','.join(SignalClass(c).name for c in config.combo)}\n")
        for i, s in enumerate(config.specs):
            p = f"signal{i}"
            f.write(f"{p}.class = {s.signal_class.name}\n")
            f.write(f"{p}.center_freq_hz = {s.center_freq_hz!r}\n")
            f.write(f"{p}.bandwidth_hz = {s.bandwidth_hz!r}\n")
            f.write(f"{p}.snr_db = {s.snr_db!r}\n")
            f.write(f"{p}.arrival_s = {s.arrival_s!r}\n")
            f.write(f"{p}.duration_s = {s.duration_s!r}\n")


def read_provenance(path) -> SceneConfig:
    kv = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            if "=" in line:
                k, v = line.split("=", 1)
                kv[k.strip()] = v.strip()
    combo = tuple(SignalClass[name] for name in kv["combo"].split(","))
    specs = []
    i = 0
    while f"signal{i}.class" in kv:
        p = f"signal{i}"
        specs.append(SignalSpec(
            SignalClass[kv[f"{p}.class"]],
            float(kv[f"{p}.center_freq_hz"]),
            float(kv[f"{p}.bandwidth_hz"]),
            float(kv[f"{p}.snr_db"]),
            float(kv[f"{p}.arrival_s"]),
            float(kv[f"{p}.duration_s"]),
        ))
        i += 1
    ci, cj, cr = (int(x) for x in kv["scene_id"].split("_"))
    return SceneConfig(combo, tuple(specs), ci, cj, cr)


def load_labels(root) -> dict:
    """Annotations for every scene in the manifest, keyed by scene id."""
    ids = read_manifest(os.path.join(root, "manifest.txt"))
    out = {}
    for sid in ids:
        path = os.path.join(root, "labels", f"{sid}.txt")
        if not os.path.exists(path):
            raise FileNotFoundError(f"missing label file for scene {sid}: {path}")
        out[sid] = read_label_file(path)
    return out
