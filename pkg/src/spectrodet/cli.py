"""Command-line entry points.

Subcommands:
    generate         synthesize scenes and write the dataset to disk
    stats            aspect-ratio / side-length histograms for a dataset
    anchors          default-pyramid match report or k-means anchor fit
    detect-baseline  run the energy detector over a dataset's images
    evaluate         score a predictions directory against a dataset

All randomness flows from --seed; re-running any command with the same
configuration reproduces its outputs byte for byte.
"""

import argparse
import os
import sys
from dataclasses import dataclass, field, replace

from . import anchors as anchor_mod
from . import baseline, coco, dataio, sampler, signals, spectrogram
from .streams import TAG_SCENE, stable_hash64


@dataclass
class RunConfig:
    seed: int = 0
    out: str = "dataset"
    jobs: int = 0  # 0 = os.cpu_count()
    configs_per_combo: int = 20
    realizations: int = 5
    max_combos: int = 0
    test_fraction: float = 0.1765
    noise_psd: float = 1e-8
    snr_lo: float = -5.0
    snr_hi: float = 30.0
    bw_lo_hz: float = 1e6
    bw_hi_hz: float = 40e6
    duration_min_s: float = 5e-4
    detector_k: float = 4.0
    detector_min_area: int = 16

    def ranges(self) -> sampler.MetadataRanges:
        return sampler.MetadataRanges(
            bandwidth_hz=(self.bw_lo_hz, self.bw_hi_hz),
            bandwidth_overrides=(
                (signals.SignalClass.BLE, (min(1e6, self.bw_hi_hz), min(2e6, self.bw_hi_hz))),
                (signals.SignalClass.WIFI, (max(10e6, self.bw_lo_hz), max(10e6, self.bw_hi_hz))),
            ),
            snr_db=(self.snr_lo, self.snr_hi),
            duration_min_s=self.duration_min_s,
        )

    def plan(self) -> sampler.DatasetPlan:
        return sampler.DatasetPlan(
            master_seed=self.seed,
            configs_per_combo=self.configs_per_combo,
            realizations_per_config=self.realizations,
            ranges=self.ranges(),
            max_combos=self.max_combos,
        )


def load_config_file(path) -> dict:
    """Line-oriented `key = value` config; keys match RunConfig field names."""
    out = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected `key = value`")
            k, v = (part.strip() for part in line.split("=", 1))
            out[k] = v
    return out


def build_run_config(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        fields = {f: type(getattr(cfg, f)) for f in cfg.__dataclass_fields__}
        for k, v in load_config_file(args.config).items():
            if k not in fields:
                raise SystemExit(f"unknown config key: {k}")
            cfg = replace(cfg, **{k: fields[k](v)})
    for f in cfg.__dataclass_fields__:
        v = getattr(args, f, None)
        if v is not None:
            cfg = replace(cfg, **{f: v})
    return cfg


def print_config(cfg: RunConfig):
    for f in cfg.__dataclass_fields__:
        print(f"{f} = {getattr(cfg, f)}")


# ----------------------------------------------------------------------
# generate


def generate_scene(scene: signals.SceneConfig, noise: signals.NoiseModel,
                   master_seed: int, out_dir: str):
    """Synthesize one scene and write its image, label, and provenance."""
    ci, cj, cr = scene.combo_index, scene.config_index, scene.realization_index
    capture = signals.compose_scene(scene, noise, _scene_seed(master_seed, ci, cj, cr))
    image = spectrogram.spectrogram_image(capture)
    sid = scene.scene_id
    dataio.write_png(image, os.path.join(out_dir, "images", f"{sid}.png"))
    dataio.write_label_file(dataio.annotations_for(scene),
                            os.path.join(out_dir, "labels", f"{sid}.txt"))
    dataio.write_provenance(scene, os.path.join(out_dir, "provenance", f"{sid}.txt"))
    return sid


def _scene_seed(master_seed: int, ci: int, cj: int, cr: int) -> int:
    # Stable scalar seed for a scene; compose_scene derives per-signal and
    # noise streams beneath it.
    return stable_hash64(master_seed, TAG_SCENE, ci, cj, cr)


def _generate_worker(payload):
    scene, psd, master_seed, out_dir = payload
    return generate_scene(scene, signals.NoiseModel(psd), master_seed, out_dir)


def cmd_generate(cfg: RunConfig) -> int:
    plan = cfg.plan()
    scenes = sampler.plan_dataset(plan)
    out_dir = cfg.out
    for sub in ("images", "labels", "provenance"):
        os.makedirs(os.path.join(out_dir, sub), exist_ok=True)

    jobs = cfg.jobs or os.cpu_count() or 1
    payloads = [(s, cfg.noise_psd, cfg.seed, out_dir) for s in scenes]
    if jobs > 1 and len(scenes) > 1:
        import concurrent.futures
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as ex:
            list(ex.map(_generate_worker, payloads, chunksize=1))
    else:
        for p in payloads:
            _generate_worker(p)

    ids = [s.scene_id for s in scenes]
    dataio.write_manifest(ids, os.path.join(out_dir, "manifest.txt"))
    split = sampler.split_train_test(ids, cfg.test_fraction, cfg.seed)
    sampler.write_split(split, os.path.join(out_dir, "split.txt"))
    print(f"generated {len(ids)} scenes in {out_dir}")
    return 0


# ----------------------------------------------------------------------
# stats / anchors


def cmd_stats(cfg: RunConfig, dataset: str, svg: bool = False) -> int:
    labels = dataio.load_labels(dataset)
    if not any(labels.values()):
        raise SystemExit("no annotations in dataset")
    stats = anchor_mod.box_stats(labels)
    out = cfg.out
    os.makedirs(out, exist_ok=True)
    anchor_mod.write_histogram_csv(stats.ratio_edges, stats.ratio_counts,
                                   os.path.join(out, "aspect_ratio_hist.csv"))
    anchor_mod.write_histogram_csv(stats.side_edges, stats.side_counts,
                                   os.path.join(out, "side_length_hist.csv"))
    if svg:
        anchor_mod.write_histogram_svg(stats.ratio_edges, stats.ratio_counts,
                                       os.path.join(out, "aspect_ratio_hist.svg"),
                                       "Aspect ratio (log bins)", log_x=True)
        anchor_mod.write_histogram_svg(stats.side_edges, stats.side_counts,
                                       os.path.join(out, "side_length_hist.svg"),
                                       "Side length (px)")
    summary = (f"boxes = {len(stats.aspect_ratios)}  "
               f"ratio_min = {stats.aspect_ratios.min():.4f}  "
               f"ratio_max = {stats.aspect_ratios.max():.4f}  "
               f"ratio_geomean = {stats.geomean_ratio:.4f}")
    with open(os.path.join(out, "summary.txt"), "w", encoding="utf-8", newline="\n") as f:
        f.write(summary + "\n")
    print(summary)
    return 0


def cmd_anchors(cfg: RunConfig, dataset: str, mode: str, k: int = 9,
                iou_threshold: float = 0.5) -> int:
    labels = dataio.load_labels(dataset)
    anns = [a for lst in labels.values() for a in lst]
    if not anns:
        raise SystemExit("no annotations in dataset")
    out = cfg.out
    os.makedirs(out, exist_ok=True)
    report_path = os.path.join(out, "match_report.txt")
    if mode == "kmeans":
        wh = anchor_mod.boxes_to_wh(anns)
        if len(wh) < k:
            raise SystemExit(f"k={k} exceeds box count {len(wh)}")
        anchor_set, bpr = anchor_mod.kmeans_anchors(wh, k=k, seed=cfg.seed)
        anchor_mod.write_anchor_file(anchor_set, os.path.join(out, "anchors.txt"))
        with open(report_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(f"mode = kmeans\nk = {k}\nbest_possible_recall = {bpr:.6f}\n")
        print(f"kmeans anchors written; best_possible_recall = {bpr:.6f}")
    elif mode == "default-report":
        anchor_set, placed = anchor_mod.default_anchor_pyramid()
        anchor_mod.write_anchor_file(anchor_set, os.path.join(out, "anchors.txt"))
        report = anchor_mod.match_rate(anchor_mod.boxes_to_xyxy(anns), placed,
                                       iou_threshold)
        with open(report_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(f"mode = default-report\niou_threshold = {iou_threshold}\n"
                    f"matched_fraction = {report.matched_fraction:.6f}\n")
        print(f"default pyramid matched_fraction = {report.matched_fraction:.6f}")
    else:
        raise SystemExit(f"unknown anchors mode: {mode}")
    return 0


# ----------------------------------------------------------------------
# baseline / evaluate


def cmd_detect_baseline(cfg: RunConfig, dataset: str) -> int:
    ids = dataio.read_manifest(os.path.join(dataset, "manifest.txt"))
    out = os.path.join(cfg.out, "predictions")
    os.makedirs(out, exist_ok=True)
    det_cfg = baseline.EnergyDetectorConfig(k=cfg.detector_k,
                                            min_area=cfg.detector_min_area)
    for sid in ids:
        pixels = dataio.read_png(os.path.join(dataset, "images", f"{sid}.png"))
        dets = baseline.detect(pixels, det_cfg)
        dataio.write_prediction_file(dets, os.path.join(out, f"{sid}.txt"))
    print(f"wrote predictions for {len(ids)} scenes to {out}")
    return 0


def cmd_evaluate(cfg: RunConfig, dataset: str, predictions: str,
                 class_agnostic: bool = False, scene_ids_file: str = "") -> int:
    gts = dataio.load_labels(dataset)
    if scene_ids_file:
        keep = set(dataio.read_manifest(scene_ids_file))
        gts = {sid: g for sid, g in gts.items() if sid in keep}
    preds = dataio.read_predictions(predictions) if os.path.isdir(predictions) else {}
    preds = {sid: d for sid, d in preds.items() if sid in gts} if scene_ids_file else preds
    summary = coco.evaluate(gts, preds, class_agnostic=class_agnostic)
    os.makedirs(cfg.out, exist_ok=True)
    coco.write_summary_csv(summary, os.path.join(cfg.out, "summary.csv"))
    coco.write_summary_text(summary, os.path.join(cfg.out, "report.txt"))
    n_gt = sum(len(g) for g in gts.values())
    n_det = sum(len(d) for d in preds.values())
    print(f"map_50_95 = {summary.map_50_95:.6f}  ar_100 = {summary.ar_100:.6f}  "
          f"gt_boxes = {n_gt}  detections = {n_det}")
    return 0


# ----------------------------------------------------------------------


def _add_common(p):
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--config", type=str, default=None)
    p.add_argument("--print-config", action="store_true")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spectrodet",
                                     description="EM-spectrogram detection dataset toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="synthesize the dataset")
    _add_common(g)
    g.add_argument("--configs", dest="configs_per_combo", type=int, default=None)
    g.add_argument("--realizations", type=int, default=None)
    g.add_argument("--max-combos", dest="max_combos", type=int, default=None)
    g.add_argument("--test-fraction", dest="test_fraction", type=float, default=None)
    g.add_argument("--snr-lo", dest="snr_lo", type=float, default=None)
    g.add_argument("--snr-hi", dest="snr_hi", type=float, default=None)

    s = sub.add_parser("stats", help="box geometry histograms")
    _add_common(s)
    s.add_argument("dataset")
    s.add_argument("--svg", action="store_true")

    a = sub.add_parser("anchors", help="anchor analysis")
    _add_common(a)
    a.add_argument("dataset")
    a.add_argument("--mode", choices=["default-report", "kmeans"], default="kmeans")
    a.add_argument("--k", type=int, default=9)
    a.add_argument("--iou-threshold", dest="iou_threshold", type=float, default=0.5)

    d = sub.add_parser("detect-baseline", help="run the energy detector")
    _add_common(d)
    d.add_argument("dataset")
    d.add_argument("--detector-k", dest="detector_k", type=float, default=None)
    d.add_argument("--min-area", dest="detector_min_area", type=int, default=None)

    e = sub.add_parser("evaluate", help="score predictions against labels")
    _add_common(e)
    e.add_argument("dataset")
    e.add_argument("predictions")
    e.add_argument("--class-agnostic", action="store_true")
    e.add_argument("--scene-ids", dest="scene_ids_file", type=str, default="")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    cfg = build_run_config(args)
    if getattr(args, "print_config", False):
        print_config(cfg)
        return 0
    try:
        if args.command == "generate":
            return cmd_generate(cfg)
        if args.command == "stats":
            return cmd_stats(cfg, args.dataset, svg=args.svg)
        if args.command == "anchors":
            return cmd_anchors(cfg, args.dataset, args.mode, k=args.k,
                               iou_threshold=args.iou_threshold)
        if args.command == "detect-baseline":
            return cmd_detect_baseline(cfg, args.dataset)
        if args.command == "evaluate":
            return cmd_evaluate(cfg, args.dataset, args.predictions,
                                class_agnostic=args.class_agnostic,
                                scene_ids_file=args.scene_ids_file)
    except (ValueError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
