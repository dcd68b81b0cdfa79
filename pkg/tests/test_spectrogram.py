import numpy as np
import pytest

from spectrodet.signals import CAPTURE_LEN, CAPTURE_SAMPLE_RATE, IQBuffer
from spectrodet.spectrogram import (IMAGE_SIZE, SpectrogramImage, StftConfig,
                                    normalize01, power_db, resize_bicubic,
                                    spectrogram_image, stft, tone_column)
from spectrodet.streams import derive_rng

FS = CAPTURE_SAMPLE_RATE
CFG = StftConfig()


def test_frame_count_for_full_capture():
    assert CFG.frame_count(CAPTURE_LEN) == 39_061


def test_frame_count_matches_stft():
    n = 100_000
    buf = IQBuffer(np.zeros(n, np.complex128), FS)
    X = stft(buf, CFG)
    assert X.shape == (CFG.frame_count(n), 1024)
    assert np.all(X == 0)


def test_tone_bin_location():
    n = 50_000
    t = np.arange(n) / FS
    buf = IQBuffer(np.exp(2j * np.pi * 25e6 * t), FS)
    X = stft(buf, CFG)
    cols = np.argmax(np.abs(X), axis=1)
    # bin = (25e6/1e8)*1024 + 512
    assert np.all(cols == 768)


def test_short_buffer_rejected():
    with pytest.raises(ValueError):
        stft(IQBuffer(np.zeros(100, np.complex128), FS), CFG)


def test_parseval_energy():
    rng = derive_rng(0, 0)
    x = rng.standard_normal(100_000) + 1j * rng.standard_normal(100_000)
    buf = IQBuffer(x, FS)
    X = stft(buf, CFG)
    win = CFG.window()
    n = CFG.frame_count(len(x))
    seg = np.lib.stride_tricks.sliding_window_view(x, 256)[::128][:n] * win
    lhs = np.sum(np.abs(X) ** 2) / CFG.nfft
    rhs = np.sum(np.abs(seg) ** 2)
    assert abs(lhs - rhs) / rhs < 1e-9


def test_power_db_values():
    assert power_db(np.array([1.0]))[0] == pytest.approx(0.0, abs=1e-10)
    assert power_db(np.array([0.0]))[0] == pytest.approx(-120.0)
    assert power_db(np.array([10.0]))[0] == pytest.approx(20.0, abs=1e-10)


class TestResize:
    def test_constant_preserved(self):
        out = resize_bicubic(np.full((777, 1024), 3.25))
        assert np.allclose(out, 3.25, atol=1e-12)

    def test_linear_ramp_preserved(self):
        col = np.arange(1024, dtype=np.float64)
        m = np.tile(col, (512, 1))
        out = resize_bicubic(m)
        # interior columns follow the analytic ramp; edges are clamped
        expected = (np.arange(512) + 0.5) * 2 - 0.5
        assert np.max(np.abs(out[:, 4:-4] - expected[4:-4])) < 1e-6

    def test_checkerboard_bounded_overshoot(self):
        idx = np.arange(1024)
        board = ((idx[:, None] + idx[None, :]) % 2).astype(np.float64)
        out = resize_bicubic(board)
        assert out.min() >= -0.1
        assert out.max() <= 1.1

    def test_too_few_rows_rejected(self):
        with pytest.raises(ValueError):
            resize_bicubic(np.zeros((3, 1024)))


class TestNormalize:
    def test_range_mapped_to_unit(self):
        m = np.linspace(-120, -20, 512 * 512).reshape(512, 512)
        img = normalize01(m)
        assert img.pixels.min() == 0.0
        assert img.pixels.max() == 1.0

    def test_constant_maps_to_zero(self):
        img = normalize01(np.full((512, 512), -37.0))
        assert np.all(img.pixels == 0)

    def test_order_preserved(self):
        rng = derive_rng(1, 1)
        m = rng.standard_normal((512, 512))
        img = normalize01(m)
        flat_in = m.ravel()
        flat_out = img.pixels.ravel()
        order = np.argsort(flat_in)
        assert np.all(np.diff(flat_out[order]) >= 0)

    def test_affine_invariance(self):
        rng = derive_rng(2, 2)
        m = rng.standard_normal((512, 512))
        a = normalize01(m).pixels
        b = normalize01(3.0 * m + 17.0).pixels
        assert np.max(np.abs(a - b)) < 1e-12


@pytest.mark.parametrize("freq", [-40e6, -25e6, 0.0, 25e6, 40e6])
def test_single_tone_localization(freq):
    t = np.arange(CAPTURE_LEN) / FS
    buf = IQBuffer(np.exp(2j * np.pi * freq * t).astype(np.complex64), FS)
    img = spectrogram_image(buf)
    col = int(np.argmax(img.pixels.sum(axis=0)))
    assert abs(col - tone_column(freq)) <= 1.0 + 0.5  # +-1 px on pixel centers


def test_pipeline_deterministic():
    rng = derive_rng(3, 3)
    x = (rng.standard_normal(300_000) + 1j * rng.standard_normal(300_000))
    buf = IQBuffer(x.astype(np.complex64), FS)
    a = spectrogram_image(buf)
    b = spectrogram_image(buf)
    assert np.array_equal(a.pixels, b.pixels)
    assert a.pixels.shape == (IMAGE_SIZE, IMAGE_SIZE)


def test_axis_calibration():
    img = SpectrogramImage(np.zeros((512, 512)))
    assert img.hz_per_px == pytest.approx(1e8 / 512)
    assert img.s_per_px == pytest.approx(0.05 / 512)
