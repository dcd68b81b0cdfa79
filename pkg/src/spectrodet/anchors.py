"""Box-geometry analysis and anchor tooling.

Computes the dataset's aspect-ratio and side-length distributions, builds
the standard five-level anchor pyramid, measures how many ground-truth
boxes any grid-placed anchor covers at an IoU threshold (the label-encoding
match rate), and fits anchors with IoU k-means plus the ratio-test
best-possible-recall used by autoanchor tooling.
"""

from dataclasses import dataclass, field

import numpy as np

from .spectrogram import IMAGE_SIZE

RATIO_HIST_RANGE = (2.0**-6, 2.0**6)
HIST_BINS = 64

DEFAULT_STRIDES = (8, 16, 32, 64, 128)
DEFAULT_SIZES = (32, 64, 128, 256, 512)
DEFAULT_SCALES = (1.0, 2.0 ** (1 / 3), 2.0 ** (2 / 3))
DEFAULT_RATIOS = (0.5, 1.0, 2.0)


@dataclass
class BoxStats:
    aspect_ratios: np.ndarray
    widths: np.ndarray
    heights: np.ndarray
    ratio_edges: np.ndarray
    ratio_counts: np.ndarray
    side_edges: np.ndarray
    side_counts: np.ndarray  # widths and heights pooled

    @property
    def geomean_ratio(self) -> float:
        return float(np.exp(np.mean(np.log(self.aspect_ratios))))


@dataclass
class AnchorSet:
    anchors: np.ndarray  # (k, 2) of (width, height) in pixels
    provenance: str  # "default-pyramid" | "kmeans"

    def __post_init__(self):
        self.anchors = np.atleast_2d(np.asarray(self.anchors, dtype=np.float64))
        if len(self.anchors) == 0 or np.any(self.anchors <= 0):
            raise ValueError("anchors must be non-empty with positive dimensions")


@dataclass
class MatchReport:
    iou_threshold: float
    matched_fraction: float
    max_ious: np.ndarray
    best_possible_recall: float = float("nan")


def boxes_to_wh(boxes) -> np.ndarray:
    """(N,2) width/height array from Annotation lists or (N,4) xyxy arrays."""
    if hasattr(boxes, "shape"):
        b = np.asarray(boxes, dtype=np.float64)
        return np.stack([b[:, 2] - b[:, 0], b[:, 3] - b[:, 1]], axis=1)
    return np.array([[a.box.width, a.box.height] for a in boxes], dtype=np.float64)


def boxes_to_xyxy(annotations) -> np.ndarray:
    return np.array([[a.box.x_min, a.box.y_min, a.box.x_max, a.box.y_max]
                     for a in annotations], dtype=np.float64)


def box_stats(annotations_by_scene) -> BoxStats:
    """Aspect-ratio and side-length statistics over a whole dataset.

    Accepts a dict of per-scene annotation lists or one flat list.
    Ratios are clipped into the histogram range so counts always sum to
    the box count.
    """
    if isinstance(annotations_by_scene, dict):
        anns = [a for lst in annotations_by_scene.values() for a in lst]
    else:
        anns = list(annotations_by_scene)
    if not anns:
        raise ValueError("no annotations")
    wh = boxes_to_wh(anns)
    ratios = wh[:, 0] / wh[:, 1]
    ratio_edges = np.geomspace(*RATIO_HIST_RANGE, HIST_BINS + 1)
    ratio_counts, _ = np.histogram(np.clip(ratios, *RATIO_HIST_RANGE), bins=ratio_edges)
    side_edges = np.linspace(0, IMAGE_SIZE, HIST_BINS + 1)
    sides = np.clip(np.concatenate([wh[:, 0], wh[:, 1]]), 0, IMAGE_SIZE)
    side_counts, _ = np.histogram(sides, bins=side_edges)
    return BoxStats(ratios, wh[:, 0], wh[:, 1], ratio_edges, ratio_counts,
                    side_edges, side_counts)


def anchor_shapes(sizes=DEFAULT_SIZES, scales=DEFAULT_SCALES,
                  ratios=DEFAULT_RATIOS) -> np.ndarray:
    """(len(sizes), len(scales)*len(ratios), 2) anchor (w,h) per level:
    w = size*scale*sqrt(r), h = size*scale/sqrt(r)."""
    out = []
    for size in sizes:
        level = []
        for scale in scales:
            for r in ratios:
                level.append((size * scale * np.sqrt(r), size * scale / np.sqrt(r)))
        out.append(level)
    return np.asarray(out, dtype=np.float64)


def default_anchor_pyramid(strides=DEFAULT_STRIDES, sizes=DEFAULT_SIZES,
                           scales=DEFAULT_SCALES, ratios=DEFAULT_RATIOS,
                           image_size: int = IMAGE_SIZE):
    """All grid-placed anchors of the standard pyramid for a square image.

    Returns (AnchorSet of unique shapes, (N,4) xyxy array of every placed
    anchor over all levels and grid locations).
    """
    if not (len(strides) and len(sizes) and len(scales) and len(ratios)):
        raise ValueError("empty anchor parameter list")
    if len(strides) != len(sizes):
        raise ValueError("strides and sizes must pair up per level")
    shapes = anchor_shapes(sizes, scales, ratios)
    placed = []
    for stride, level_shapes in zip(strides, shapes):
        n = image_size // stride
        centers = (np.arange(n) + 0.5) * stride
        cx, cy = np.meshgrid(centers, centers)
        c = np.stack([cx.ravel(), cy.ravel()], axis=1)  # (n*n, 2)
        wh = np.asarray(level_shapes)  # (A, 2)
        half = wh / 2
        boxes = np.concatenate([
            c[:, None, :] - half[None, :, :],
            c[:, None, :] + half[None, :, :],
        ], axis=2).reshape(-1, 4)
        placed.append(boxes)
    return AnchorSet(shapes.reshape(-1, 2), "default-pyramid"), np.concatenate(placed)


def iou_xyxy(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise IoU of (N,4) and (M,4) xyxy boxes -> (N,M)."""
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    ix = np.maximum(0.0, np.minimum(a[:, None, 2], b[None, :, 2])
                    - np.maximum(a[:, None, 0], b[None, :, 0]))
    iy = np.maximum(0.0, np.minimum(a[:, None, 3], b[None, :, 3])
                    - np.maximum(a[:, None, 1], b[None, :, 1]))
    inter = ix * iy
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    return np.where(union > 0, inter / np.maximum(union, 1e-300), 0.0)


def match_rate(gt_boxes: np.ndarray, anchor_boxes: np.ndarray,
               iou_threshold: float = 0.5) -> MatchReport:
    """Fraction of ground-truth boxes whose best grid-placed anchor reaches
    the IoU threshold (label-encoding coverage)."""
    gt = np.atleast_2d(np.asarray(gt_boxes, dtype=np.float64))
    anchors = np.atleast_2d(np.asarray(anchor_boxes, dtype=np.float64))
    if len(gt) == 0 or len(anchors) == 0:
        raise ValueError("need at least one box and one anchor")
    max_ious = np.zeros(len(gt))
    chunk = max(1, 4_000_000 // max(1, len(gt)))
    for i in range(0, len(anchors), chunk):
        max_ious = np.maximum(max_ious, iou_xyxy(gt, anchors[i : i + chunk]).max(axis=1))
    frac = float(np.mean(max_ious >= iou_threshold))
    return MatchReport(iou_threshold, frac, max_ious)


def _iou_wh(wh: np.ndarray, anchors: np.ndarray) -> np.ndarray:
    """Co-centered IoU of (N,2) boxes vs (K,2) anchors -> (N,K)."""
    inter = (np.minimum(wh[:, None, 0], anchors[None, :, 0])
             * np.minimum(wh[:, None, 1], anchors[None, :, 1]))
    union = wh[:, 0:1] * wh[:, 1:2] + anchors[None, :, 0] * anchors[None, :, 1] - inter
    return inter / np.maximum(union, 1e-300)


def ratio_metric(wh: np.ndarray, anchors: np.ndarray) -> np.ndarray:
    """(N,K) max side-ratio distortion max(w/wa, wa/w, h/ha, ha/h)."""
    rw = wh[:, None, 0] / anchors[None, :, 0]
    rh = wh[:, None, 1] / anchors[None, :, 1]
    return np.maximum(np.maximum(rw, 1 / rw), np.maximum(rh, 1 / rh))


def best_possible_recall(wh: np.ndarray, anchors: np.ndarray,
                         ratio_threshold: float = 4.0) -> float:
    """Fraction of boxes whose best anchor passes the side-ratio test."""
    return float(np.mean(ratio_metric(wh, anchors).min(axis=1) <= ratio_threshold))


def kmeans_anchors(wh: np.ndarray, k: int = 9, seed: int = 0,
                   max_iters: int = 100, ratio_threshold: float = 4.0):
    """IoU k-means over box (w,h) with seeded k-means++ init.

    Distance is 1 - IoU of co-centered boxes; centroids update to the
    cluster mean.  Iteration stops when assignments stabilize or the
    objective would increase (previous centroids are kept), so the
    objective trace is non-increasing.  Returns (AnchorSet, BPR).
    """
    wh = np.atleast_2d(np.asarray(wh, dtype=np.float64))
    if len(wh) < k:
        raise ValueError(f"need at least k={k} boxes, got {len(wh)}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))

    # k-means++ style init on the 1-IoU distance
    centroids = np.empty((k, 2))
    centroids[0] = wh[rng.integers(len(wh))]
    d = 1.0 - _iou_wh(wh, centroids[:1]).ravel()
    for i in range(1, k):
        probs = d / d.sum() if d.sum() > 0 else np.full(len(wh), 1.0 / len(wh))
        centroids[i] = wh[rng.choice(len(wh), p=probs)]
        d = np.minimum(d, 1.0 - _iou_wh(wh, centroids[i : i + 1]).ravel())

    best_obj = np.inf
    best_centroids = centroids
    prev_assign = np.full(len(wh), -1)
    for _ in range(max_iters):
        dist = 1.0 - _iou_wh(wh, centroids)
        assign = dist.argmin(axis=1)
        obj = float(dist[np.arange(len(wh)), assign].mean())
        if obj < best_obj - 1e-12:
            best_obj = obj
            best_centroids = centroids
        elif obj > best_obj + 1e-12:
            break  # mean update worsened the IoU objective; keep the best
        if np.array_equal(assign, prev_assign):
            break
        prev_assign = assign
        new_centroids = centroids.copy()
        for i in range(k):
            members = wh[assign == i]
            if len(members):
                new_centroids[i] = members.mean(axis=0)
        centroids = new_centroids

    order = np.argsort(best_centroids[:, 0] * best_centroids[:, 1])
    anchors = AnchorSet(best_centroids[order], "kmeans")
    return anchors, best_possible_recall(wh, anchors.anchors, ratio_threshold)


# ----------------------------------------------------------------------
# serialization


def write_anchor_file(anchor_set: AnchorSet, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for w, h in anchor_set.anchors:
            f.write(f"{w:.4f} {h:.4f}\n")


def read_anchor_file(path, provenance: str = "file") -> AnchorSet:
    rows = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                w, h = (float(x) for x in line.split())
                rows.append((w, h))
    return AnchorSet(np.asarray(rows), provenance)


def write_histogram_csv(edges: np.ndarray, counts: np.ndarray, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("bin_lo,bin_hi,count\n")
        for lo, hi, c in zip(edges[:-1], edges[1:], counts):
            f.write(f"{lo:.6g},{hi:.6g},{int(c)}\n")


def write_histogram_svg(edges: np.ndarray, counts: np.ndarray, path,
                        title: str = "", log_x: bool = False):
    """Minimal standalone SVG bar chart for a histogram."""
    width, height, pad = 640, 360, 40
    n = len(counts)
    cmax = max(1, int(max(counts)))
    bar_w = (width - 2 * pad) / n
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width/2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
    ]
    for i, c in enumerate(counts):
        h = (height - 2 * pad) * (int(c) / cmax)
        x = pad + i * bar_w
        y = height - pad - h
        parts.append(f'<rect x="{x:.1f}" y="{y:.1f}" width="{bar_w:.2f}" '
                     f'height="{h:.1f}" fill="steelblue"/>')
    lo, hi = edges[0], edges[-1]
    fmt = "{:.3g}"
    parts.append(f'<text x="{pad}" y="{height-10}" font-size="11">{fmt.format(lo)}</text>')
    parts.append(f'<text x="{width-pad}" y="{height-10}" text-anchor="end" '
                 f'font-size="11">{fmt.format(hi)}</text>')
    parts.append(f'<text x="10" y="{pad}" font-size="11">{cmax}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(parts) + "\n")
