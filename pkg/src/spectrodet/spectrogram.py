"""Capture-to-image pipeline: STFT, log power, bicubic resize, normalization.

Constants mirror the dataset recipe: 1024-point DFTs of periodic-Hann
windowed length-256 segments with hop 128, fftshifted so DC sits at the
center column, rendered in dB and resized to 512x512 with a Catmull-Rom
(a = -0.5) bicubic kernel before per-image min-max normalization.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .signals import CAPTURE_DURATION, CAPTURE_SAMPLE_RATE, IQBuffer

DB_EPS = 1e-12
IMAGE_SIZE = 512


def _periodic_hann(n: int) -> np.ndarray:
    return 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n) / n)


@dataclass(frozen=True)
class StftConfig:
    nfft: int = 1024
    win_length: int = 256
    hop: int = 128

    def __post_init__(self):
        if not self.hop <= self.win_length <= self.nfft:
            raise ValueError("require hop <= win_length <= nfft")

    def window(self) -> np.ndarray:
        return _periodic_hann(self.win_length)

    def frame_count(self, n_samples: int) -> int:
        return (n_samples - self.win_length) // self.hop + 1


@dataclass
class SpectrogramImage:
    """512x512 grayscale intensity grid in [0,1] with axis calibration.

    Column 0 is -50 MHz, column 511 approaches +50 MHz; row 0 is t=0,
    row 511 approaches 50 ms.
    """

    pixels: np.ndarray
    freq_span_hz: float = CAPTURE_SAMPLE_RATE
    time_span_s: float = CAPTURE_DURATION

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels)
        if self.pixels.shape != (IMAGE_SIZE, IMAGE_SIZE):
            raise ValueError(f"expected {IMAGE_SIZE}x{IMAGE_SIZE} pixels")

    @property
    def hz_per_px(self) -> float:
        return self.freq_span_hz / IMAGE_SIZE

    @property
    def s_per_px(self) -> float:
        return self.time_span_s / IMAGE_SIZE


def _frames(x: np.ndarray, cfg: StftConfig) -> np.ndarray:
    n = cfg.frame_count(len(x))
    return np.lib.stride_tricks.sliding_window_view(x, cfg.win_length)[:: cfg.hop][:n]


def stft(iq: IQBuffer, cfg: StftConfig = StftConfig()) -> np.ndarray:
    """Windowed, zero-padded, fftshifted STFT: one row per frame.

    Computation dtype follows the input (complex64 stays complex64).
    """
    x = np.asarray(iq.samples)
    if len(x) < cfg.win_length:
        raise ValueError("buffer shorter than one analysis window")
    win = cfg.window()
    if x.dtype == np.complex64:
        win = win.astype(np.float32)
    seg = _frames(x, cfg) * win
    return sfft.fftshift(sfft.fft(seg, n=cfg.nfft, axis=1), axes=1)


def power_db(matrix: np.ndarray) -> np.ndarray:
    """10*log10(|X|^2 + eps) with a fixed eps floor of 1e-12 (-120 dB)."""
    return 10.0 * np.log10(np.abs(matrix) ** 2 + DB_EPS)


def _cubic_kernel(x: np.ndarray) -> np.ndarray:
    # Catmull-Rom: the a = -0.5 member of the Keys bicubic family.
    ax = np.abs(x)
    ax2 = ax * ax
    ax3 = ax2 * ax
    out = np.where(ax < 1.0, 1.5 * ax3 - 2.5 * ax2 + 1.0,
                   np.where(ax < 2.0, -0.5 * ax3 + 2.5 * ax2 - 4.0 * ax + 2.0, 0.0))
    return out


def _resize_axis(a: np.ndarray, out_n: int) -> np.ndarray:
    """Resize along axis 0 with an (anti-aliased on downsample) Catmull-Rom
    kernel, edge-clamped, weights normalized to unit sum."""
    in_n = a.shape[0]
    if in_n < 4:
        raise ValueError("need at least 4 samples along each resized axis")
    scale = in_n / out_n
    support = max(scale, 1.0)  # widen the kernel when decimating
    centers = (np.arange(out_n) + 0.5) * scale - 0.5
    half = 2.0 * support
    first = np.floor(centers - half).astype(np.int64) + 1
    ntaps = int(np.ceil(2 * half)) + 1
    offs = np.arange(ntaps)
    idx = first[:, None] + offs[None, :]
    w = _cubic_kernel((idx - centers[:, None]) / support)
    w /= w.sum(axis=1, keepdims=True)
    idx = np.clip(idx, 0, in_n - 1)

    out = np.empty((out_n,) + a.shape[1:], dtype=np.result_type(a.dtype, np.float64))
    chunk = max(1, int(2_000_000 // max(1, ntaps * int(np.prod(a.shape[1:], dtype=np.int64)))))
    for i in range(0, out_n, chunk):
        g = a[idx[i : i + chunk]]  # (chunk, ntaps, ...)
        ww = w[i : i + chunk].reshape(w[i : i + chunk].shape + (1,) * (a.ndim - 1))
        out[i : i + chunk] = (g * ww).sum(axis=1)
    return out


def resize_bicubic(matrix: np.ndarray, out_shape=(IMAGE_SIZE, IMAGE_SIZE)) -> np.ndarray:
    """Separable Catmull-Rom resize to out_shape (rows then columns)."""
    m = np.asarray(matrix, dtype=np.float64)
    m = _resize_axis(m, out_shape[0])
    m = _resize_axis(m.T, out_shape[1]).T
    return m


def normalize01(matrix: np.ndarray) -> SpectrogramImage:
    """Min-max normalize to [0,1]; a constant input maps to all zeros."""
    m = np.asarray(matrix, dtype=np.float64)
    lo = m.min()
    hi = m.max()
    if hi - lo <= 0:
        return SpectrogramImage(np.zeros(m.shape))
    return SpectrogramImage((m - lo) / (hi - lo))


def spectrogram_image(iq: IQBuffer, cfg: StftConfig = StftConfig()) -> SpectrogramImage:
    """Full pipeline: STFT -> dB power -> 512x512 resize -> [0,1] normalize.

    Works frame-chunked so a 5M-sample capture never holds the full complex
    STFT matrix in memory.
    """
    x = np.asarray(iq.samples)
    if len(x) < cfg.win_length:
        raise ValueError("buffer shorter than one analysis window")
    win = cfg.window()
    if x.dtype == np.complex64:
        win = win.astype(np.float32)
    seg_view = _frames(x, cfg)
    n_frames = seg_view.shape[0]
    db = np.empty((n_frames, cfg.nfft), dtype=np.float64)
    step = 4096
    for i in range(0, n_frames, step):
        seg = seg_view[i : i + step] * win
        X = sfft.fftshift(sfft.fft(seg, n=cfg.nfft, axis=1), axes=1)
        db[i : i + step] = power_db(X)
    return normalize01(resize_bicubic(db))


def tone_column(freq_hz: float) -> float:
    """Predicted image column for a pure tone at freq_hz (annotation mapping)."""
    return (freq_hz + CAPTURE_SAMPLE_RATE / 2) / CAPTURE_SAMPLE_RATE * IMAGE_SIZE
