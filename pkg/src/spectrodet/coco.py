"""MSCOCO-style detection metrics.

Average precision uses 101-point interpolation over IoU thresholds
0.50:0.05:0.95, averaged per class; average recall keeps the top 100
scored detections per image.  Score ties break by input order, and classes
with no ground truth are excluded from the means.
"""

from dataclasses import dataclass, field

import numpy as np

from .dataio import BoundingBox

IOU_THRESHOLDS = tuple(np.round(np.arange(0.50, 0.96, 0.05), 2))
RECALL_POINTS = np.linspace(0.0, 1.0, 101)
MAX_DETS = 100


@dataclass
class MatchResult:
    """Per-detection TP flags and per-GT matched flags for one image/class/threshold."""

    tp: np.ndarray        # bool per detection, in score order
    gt_matched: np.ndarray

    @property
    def n_tp(self) -> int:
        return int(self.tp.sum())


@dataclass
class EvalSummary:
    map_50_95: float
    ap_50: float
    ap_75: float
    ar_100: float
    per_class_ap: dict = field(default_factory=dict)     # class -> AP over thresholds
    per_threshold_ap: dict = field(default_factory=dict)  # tau -> AP over classes

    def as_rows(self):
        rows = [("map_50_95", self.map_50_95), ("ap_50", self.ap_50),
                ("ap_75", self.ap_75), ("ar_100", self.ar_100)]
        rows += [(f"ap_class_{c}", v) for c, v in sorted(self.per_class_ap.items())]
        rows += [(f"ap_iou_{t:.2f}", v) for t, v in sorted(self.per_threshold_ap.items())]
        return rows


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes; 0 when disjoint."""
    ix = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    iy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


def sort_detections(dets) -> list:
    """Descending score, input order breaking ties (stable)."""
    return sorted(dets, key=lambda d: -d.score)


def match(dets, gts, iou_threshold: float) -> MatchResult:
    """Greedy one-to-one matching: each detection (in score order) takes the
    unmatched ground truth of its class with the highest IoU >= threshold.

    `dets` must already be sorted by descending score.
    """
    tp = np.zeros(len(dets), dtype=bool)
    gt_matched = np.zeros(len(gts), dtype=bool)
    for di, d in enumerate(dets):
        best_iou = 0.0
        best_gi = -1
        for gi, g in enumerate(gts):
            if gt_matched[gi] or g.class_id != d.class_id:
                continue
            v = iou(d.box, g.box)
            if v >= iou_threshold and v > best_iou:
                best_iou = v
                best_gi = gi
        if best_gi >= 0:
            tp[di] = True
            gt_matched[best_gi] = True
    return MatchResult(tp, gt_matched)


def average_precision(tp_flags: np.ndarray, scores: np.ndarray, n_gt: int) -> float:
    """101-point interpolated AP from globally score-sorted TP/FP flags.

    `tp_flags`/`scores` must already be in descending-score order across the
    whole dataset.
    """
    if n_gt == 0:
        return float("nan")
    if len(tp_flags) == 0:
        return 0.0
    tp_cum = np.cumsum(tp_flags)
    fp_cum = np.cumsum(~np.asarray(tp_flags, dtype=bool))
    recalls = tp_cum / n_gt
    precisions = tp_cum / np.maximum(tp_cum + fp_cum, 1)
    # monotone non-increasing precision envelope
    envelope = np.maximum.accumulate(precisions[::-1])[::-1]
    idx = np.searchsorted(recalls, RECALL_POINTS, side="left")
    sampled = np.where(idx < len(envelope), envelope[np.minimum(idx, len(envelope) - 1)], 0.0)
    return float(sampled.mean())


def _limit_top_k(dets, k: int = MAX_DETS) -> list:
    return sort_detections(dets)[:k]


def evaluate(gt_by_scene: dict, dets_by_scene: dict,
             class_agnostic: bool = False) -> EvalSummary:
    """Score predictions against ground truth over a dataset.

    `gt_by_scene` maps scene id to Annotation lists; `dets_by_scene` maps
    scene id to Detection lists (scenes absent from it count as empty).
    """
    unknown = set(dets_by_scene) - set(gt_by_scene)
    if unknown:
        raise ValueError(f"predictions reference unknown scene ids: {sorted(unknown)}")

    scene_ids = list(gt_by_scene.keys())
    from .dataio import Annotation, Detection  # local to avoid cycle at import

    gts = {}
    dets = {}
    for sid in scene_ids:
        g = gt_by_scene[sid]
        d = _limit_top_k(dets_by_scene.get(sid, []))
        if class_agnostic:
            g = [Annotation(0, a.box) for a in g]
            d = [Detection(0, x.box, x.score) for x in d]
        gts[sid] = g
        dets[sid] = d

    classes = sorted({a.class_id for g in gts.values() for a in g})
    ap = {}       # (class, tau) -> AP
    recall = {}   # (class, tau) -> matched fraction
    for tau in IOU_THRESHOLDS:
        for cls in classes:
            flags = []
            n_gt = 0
            n_matched = 0
            for img_idx, sid in enumerate(scene_ids):
                g = [a for a in gts[sid] if a.class_id == cls]
                d = [x for x in dets[sid] if x.class_id == cls]
                n_gt += len(g)
                if not d:
                    continue
                res = match(d, g, tau)
                n_matched += res.n_tp
                for det_idx, (x, t) in enumerate(zip(d, res.tp)):
                    flags.append((-x.score, img_idx, det_idx, bool(t)))
            flags.sort()
            tp_sorted = np.array([f[3] for f in flags], dtype=bool)
            scores = np.array([-f[0] for f in flags])
            ap[(cls, tau)] = average_precision(tp_sorted, scores, n_gt)
            recall[(cls, tau)] = (n_matched / n_gt) if n_gt else float("nan")

    def _mean(vals):
        vals = [v for v in vals if not np.isnan(v)]
        return float(np.mean(vals)) if vals else 0.0

    per_threshold = {tau: _mean([ap[(c, tau)] for c in classes]) for tau in IOU_THRESHOLDS}
    per_class = {c: _mean([ap[(c, tau)] for tau in IOU_THRESHOLDS]) for c in classes}
    map_50_95 = _mean(per_threshold.values())
    ar_100 = _mean([recall[(c, tau)] for c in classes for tau in IOU_THRESHOLDS])
    return EvalSummary(
        map_50_95=map_50_95,
        ap_50=per_threshold.get(0.5, 0.0),
        ap_75=per_threshold.get(0.75, 0.0),
        ar_100=ar_100,
        per_class_ap=per_class,
        per_threshold_ap=per_threshold,
    )


def write_summary_csv(summary: EvalSummary, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("metric,value\n")
        for k, v in summary.as_rows():
            f.write(f"{k},{v:.6f}\n")


def write_summary_text(summary: EvalSummary, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for k, v in summary.as_rows():
            f.write(f"{k} = {v:.6f}\n")
