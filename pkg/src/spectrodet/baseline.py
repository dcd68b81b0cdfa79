"""Traditional energy-threshold detector.

Smooths the spectrogram with a box filter, thresholds at a robust noise
floor plus k spreads, extracts connected components, and reports each
surviving component's tight bounding rect as a class-agnostic detection.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .dataio import BoundingBox, Detection
from .spectrogram import SpectrogramImage


@dataclass(frozen=True)
class EnergyDetectorConfig:
    time_halfwidth: int = 1   # rows
    freq_halfwidth: int = 4   # columns
    k: float = 4.0            # threshold = floor + k * spread
    connectivity: int = 8
    min_area: int = 16        # px^2

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError("k must be positive")
        if self.min_area < 1:
            raise ValueError("min_area must be >= 1")
        if self.connectivity not in (4, 8):
            raise ValueError("connectivity must be 4 or 8")


def _lower_median(values: np.ndarray) -> float:
    # Lower median: element at index (n-1)//2 of the sorted sample.  Keeps
    # the even-count tie rule documented and deterministic.
    v = np.partition(np.asarray(values).ravel(), (len(values.ravel()) - 1) // 2)
    return float(v[(v.size - 1) // 2])


def estimate_noise_floor(image) -> tuple:
    """(floor, spread): lower-median pixel and 1.4826 * MAD about it."""
    pixels = image.pixels if isinstance(image, SpectrogramImage) else np.asarray(image)
    floor = _lower_median(pixels)
    spread = 1.4826 * _lower_median(np.abs(pixels - floor))
    return floor, spread


def threshold_mask(pixels: np.ndarray,
                   cfg: EnergyDetectorConfig = EnergyDetectorConfig()) -> np.ndarray:
    """Binary foreground mask: box-smoothed image above floor + k*spread.

    The floor and spread come from the raw pixels, so sub-threshold signals
    below the raw noise spread stay invisible after smoothing.
    """
    size = (2 * cfg.time_halfwidth + 1, 2 * cfg.freq_halfwidth + 1)
    smoothed = ndimage.uniform_filter(pixels.astype(np.float64), size=size, mode="nearest")
    floor, spread = estimate_noise_floor(pixels)
    return smoothed > floor + cfg.k * spread


def detect(image, cfg: EnergyDetectorConfig = EnergyDetectorConfig()) -> list:
    """Energy detections for one spectrogram image."""
    pixels = image.pixels if isinstance(image, SpectrogramImage) else np.asarray(image)
    mask = threshold_mask(pixels, cfg)

    structure = (np.ones((3, 3), dtype=int) if cfg.connectivity == 8
                 else ndimage.generate_binary_structure(2, 1))
    labels, n = ndimage.label(mask, structure=structure)
    detections = []
    for lbl, sl in enumerate(ndimage.find_objects(labels), start=1):
        if sl is None:
            continue
        component = labels[sl] == lbl
        if int(component.sum()) < cfg.min_area:
            continue
        y0, y1 = sl[0].start, sl[0].stop
        x0, x1 = sl[1].start, sl[1].stop
        score = float(np.clip(pixels[sl][component].mean(), 0.0, 1.0))
        detections.append(Detection(0, BoundingBox(float(x0), float(y0),
                                                   float(x1), float(y1)), score))
    return detections
