"""Synthetic EM-spectrogram object-detection dataset toolkit."""

from .signals import (IQBuffer, NoiseModel, SceneConfig, SignalClass,
                      SignalSpec, compose_scene, place_in_capture,
                      scale_to_snr, synthesize_baseband)
from .spectrogram import (SpectrogramImage, StftConfig, normalize01, power_db,
                          resize_bicubic, spectrogram_image, stft)
from .dataio import (Annotation, BoundingBox, Detection, bbox_from_spec,
                     read_label_file, read_predictions, write_label_file,
                     write_png)
from .sampler import (DatasetPlan, MetadataRanges, SplitManifest,
                      enumerate_combinations, plan_dataset, realize,
                      sample_config, split_train_test)
from .anchors import (AnchorSet, BoxStats, MatchReport, box_stats,
                      default_anchor_pyramid, kmeans_anchors, match_rate)
from .baseline import EnergyDetectorConfig, detect, estimate_noise_floor
from .coco import EvalSummary, average_precision, evaluate, iou, match

__version__ = "0.1.0"
