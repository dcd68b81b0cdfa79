"""Complex-baseband I/Q synthesis for the six signal classes.

Captures are 50 ms at 100 MS/s (5,000,000 complex samples).  Each signal is
synthesized at a reduced internal rate sized to its bandwidth, polyphase
upsampled to the capture rate, power-normalized, scaled to its in-band SNR,
frequency shifted to its center frequency, and summed into the capture
together with white Gaussian noise.
"""

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np
from scipy import signal as sps

from .streams import TAG_NOISE, derive_rng, derive_seedseq, stable_hash64

CAPTURE_SAMPLE_RATE = 1e8
CAPTURE_DURATION = 0.05
CAPTURE_LEN = 5_000_000


class SignalClass(IntEnum):
    DSSS = 0
    BLE = 1
    QAM = 2
    AM = 3
    FM = 4
    WIFI = 5


@dataclass
class IQBuffer:
    """A complex baseband sample sequence with its sample rate."""

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        self.samples = np.asarray(self.samples)
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")

    def __len__(self):
        return len(self.samples)

    def mean_power(self) -> float:
        if len(self.samples) == 0:
            return 0.0
        return float(np.mean(np.abs(self.samples.astype(np.complex128)) ** 2))


@dataclass(frozen=True)
class SignalSpec:
    signal_class: SignalClass
    center_freq_hz: float
    bandwidth_hz: float
    snr_db: float
    arrival_s: float = 0.0
    duration_s: float = 0.0

    def validate(self):
        half_fs = CAPTURE_SAMPLE_RATE / 2
        if not self.bandwidth_hz > 0:
            raise ValueError("bandwidth must be positive")
        if self.bandwidth_hz > CAPTURE_SAMPLE_RATE:
            raise ValueError("bandwidth exceeds capture rate")
        if abs(self.center_freq_hz) + self.bandwidth_hz / 2 > half_fs + 1e-6:
            raise ValueError("signal band falls outside the +/-50 MHz capture")
        if self.arrival_s < 0:
            raise ValueError("arrival must be non-negative")
        if self.duration_s <= 0:
            raise ValueError("duration must be positive")
        if self.arrival_s + self.duration_s > CAPTURE_DURATION + 1e-12:
            raise ValueError("signal extends past the 50 ms capture")

    def content_hash(self) -> int:
        return stable_hash64(
            int(self.signal_class),
            self.center_freq_hz,
            self.bandwidth_hz,
            self.snr_db,
            self.arrival_s,
            self.duration_s,
        )


@dataclass(frozen=True)
class NoiseModel:
    """White Gaussian noise, constant PSD across the 100 MHz band.

    The default gives unit total noise power over the capture band
    (psd * 1e8 = 1.0), i.e. unit per-sample variance.
    """

    psd: float = 1e-8

    def __post_init__(self):
        if self.psd <= 0:
            raise ValueError("noise psd must be positive")


@dataclass(frozen=True)
class SceneConfig:
    """A scene's full randomized state: class combo plus per-signal metadata."""

    combo: tuple
    specs: tuple
    combo_index: int = 0
    config_index: int = 0
    realization_index: int = 0

    @property
    def scene_id(self) -> str:
        return f"{self.combo_index:02d}_{self.config_index:02d}_{self.realization_index:02d}"


# ----------------------------------------------------------------------
# waveform building blocks


def _rrc_taps(beta: float, sps_: int, span: int) -> np.ndarray:
    """Root-raised-cosine impulse response, unit energy."""
    n = span * sps_
    t = (np.arange(-n, n + 1, dtype=np.float64)) / sps_
    taps = np.zeros_like(t)
    for i, ti in enumerate(t):
        if abs(ti) < 1e-12:
            taps[i] = 1.0 - beta + 4 * beta / np.pi
        elif beta > 0 and abs(abs(4 * beta * ti) - 1.0) < 1e-9:
            taps[i] = (beta / np.sqrt(2)) * (
                (1 + 2 / np.pi) * np.sin(np.pi / (4 * beta))
                + (1 - 2 / np.pi) * np.cos(np.pi / (4 * beta))
            )
        else:
            num = np.sin(np.pi * ti * (1 - beta)) + 4 * beta * ti * np.cos(np.pi * ti * (1 + beta))
            den = np.pi * ti * (1 - (4 * beta * ti) ** 2)
            taps[i] = num / den
    return taps / np.sqrt(np.sum(taps**2))


def _pulse_shape(symbols: np.ndarray, sps_: int, taps: np.ndarray) -> np.ndarray:
    up = np.zeros(len(symbols) * sps_, dtype=np.complex128)
    up[::sps_] = symbols
    return sps.fftconvolve(up, taps, mode="same")


def _bandlimited_noise(n: int, cutoff_frac: float, rng) -> np.ndarray:
    """Real Gaussian noise low-passed to cutoff_frac (fraction of Nyquist)."""
    cutoff_frac = min(max(cutoff_frac, 1e-4), 0.999)
    taps = sps.firwin(129, cutoff_frac)
    g = rng.standard_normal(n + 256)
    return sps.fftconvolve(g, taps, mode="same")[128 : 128 + n]


def _msequence(length: int = 127) -> np.ndarray:
    """Length-127 m-sequence from the x^7 + x^6 + 1 LFSR, values in {-1,+1}."""
    assert length == 127
    state = [1] * 7
    out = np.empty(length, dtype=np.float64)
    for i in range(length):
        out[i] = 1.0 - 2.0 * state[-1]
        fb = state[6] ^ state[5]
        state = [fb] + state[:-1]
    return out


_QAM16_LEVELS = np.array([-3.0, -1.0, 1.0, 3.0]) / np.sqrt(10.0)


def _gen_am(n: int, fs: float, bw: float, rng) -> np.ndarray:
    # DSB with carrier, modulation index 0.5, unit-RMS band-limited message.
    m = _bandlimited_noise(n, (bw / 2) / (fs / 2), rng)
    m /= np.sqrt(np.mean(m**2)) + 1e-30
    return (1.0 + 0.5 * m).astype(np.complex128)


def _gen_fm(n: int, fs: float, bw: float, rng) -> np.ndarray:
    # Peak deviation bw/2 on a band-limited message clipped at 2.5 sigma, so
    # the instantaneous frequency stays within the nominal band.
    m = _bandlimited_noise(n, (bw / 8) / (fs / 2), rng)
    m /= np.sqrt(np.mean(m**2)) + 1e-30
    m = np.clip(m, -2.5, 2.5) / 2.5
    dphi = 2 * np.pi * (bw / 2) * m / fs
    return np.exp(1j * np.cumsum(dphi))


def _gen_qam(n: int, fs: float, bw: float, rng) -> np.ndarray:
    beta = 0.35
    rs = bw / (1 + beta)
    sps_ = max(2, int(round(fs / rs)))
    nsym = max(1, int(np.ceil(n / sps_)) + 1)
    idx = rng.integers(0, 4, size=(nsym, 2))
    symbols = _QAM16_LEVELS[idx[:, 0]] + 1j * _QAM16_LEVELS[idx[:, 1]]
    x = _pulse_shape(symbols, sps_, _rrc_taps(beta, sps_, 8))
    return x[:n]


def _gen_dsss(n: int, fs: float, bw: float, rng) -> np.ndarray:
    # BPSK data spread by a length-127 m-sequence; chip rate bw/2 with
    # full-rolloff RRC shaping keeps the occupied bandwidth near bw.
    beta = 1.0
    chip_rate = bw / 2
    sps_ = max(2, int(round(fs / chip_rate)))
    nchips = max(127, int(np.ceil(n / sps_)) + 1)
    mseq = _msequence()
    nbits = int(np.ceil(nchips / 127))
    bits = 1.0 - 2.0 * rng.integers(0, 2, size=nbits)
    chips = (bits[:, None] * mseq[None, :]).ravel()[:nchips]
    x = _pulse_shape(chips.astype(np.complex128), sps_, _rrc_taps(beta, sps_, 8))
    return x[:n]


def _gen_ble(n: int, fs: float, bw: float, rng) -> np.ndarray:
    # GFSK, BT=0.5, modulation index 0.5.  Symbol rate bw/1.2 puts the
    # measured 99%-power bandwidth near the nominal bandwidth.
    bt = 0.5
    h = 0.5
    rs = bw / 1.2
    sps_ = max(2, int(round(fs / rs)))
    nsym = max(2, int(np.ceil(n / sps_)) + 4)
    bits = 1.0 - 2.0 * rng.integers(0, 2, size=nsym)
    nrz = np.repeat(bits, sps_)
    sigma = sps_ * np.sqrt(np.log(2)) / (2 * np.pi * bt)
    span = int(np.ceil(4 * sigma))
    g = np.exp(-0.5 * (np.arange(-span, span + 1) / sigma) ** 2)
    g /= g.sum()
    freq = sps.fftconvolve(nrz, g, mode="same")
    dphi = np.pi * h * freq / sps_
    return np.exp(1j * np.cumsum(dphi))[:n]


def _gen_wifi(n: int, fs: float, bw: float, rng) -> np.ndarray:
    # OFDM: 64 subcarriers at spacing bw/64 (52 active, QPSK), CP ratio 1/4.
    spacing = bw / 64
    nfft = max(8, int(round(fs / spacing)))
    cp = nfft // 4
    sym_len = nfft + cp
    nsym = max(1, int(np.ceil(n / sym_len)))
    active = np.concatenate([np.arange(1, 27), np.arange(-26, 0)])
    qpsk = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2)
    out = np.empty(nsym * sym_len, dtype=np.complex128)
    data = qpsk[rng.integers(0, 4, size=(nsym, len(active)))]
    for s in range(nsym):
        bins = np.zeros(nfft, dtype=np.complex128)
        bins[active % nfft] = data[s]
        td = np.fft.ifft(bins) * nfft
        out[s * sym_len : (s + 1) * sym_len] = np.concatenate([td[-cp:], td])
    return out[:n]


_GENERATORS = {
    SignalClass.AM: _gen_am,
    SignalClass.FM: _gen_fm,
    SignalClass.QAM: _gen_qam,
    SignalClass.DSSS: _gen_dsss,
    SignalClass.BLE: _gen_ble,
    SignalClass.WIFI: _gen_wifi,
}

# Minimum symbol/chip counts below which a waveform is degenerate, as
# (symbol-rate multiplier of bandwidth, minimum symbols) per class.
_MIN_SYMBOLS = {
    SignalClass.AM: (0.5, 4),
    SignalClass.FM: (0.125, 2),
    SignalClass.QAM: (1 / 1.35, 8),
    SignalClass.DSSS: (0.5, 127),
    SignalClass.BLE: (1 / 1.2, 8),
    SignalClass.WIFI: (1 / 80.0, 1),  # one OFDM symbol incl. cyclic prefix
}


def synthesize_baseband(spec: SignalSpec, rng) -> IQBuffer:
    """Generate power-normalized baseband I/Q at the capture rate.

    The waveform is synthesized at a reduced internal rate (>= 4x the
    bandwidth), polyphase upsampled to 100 MS/s, truncated to the exact
    sample count, and normalized to unit mean power.
    """
    spec.validate()
    rate_mult, min_syms = _MIN_SYMBOLS[spec.signal_class]
    if spec.duration_s * spec.bandwidth_hz * rate_mult < min_syms:
        raise ValueError("degenerate bandwidth: too few symbols for "
                         f"{spec.signal_class.name} at {spec.bandwidth_hz:g} Hz")

    fs = CAPTURE_SAMPLE_RATE
    n_out = int(round(spec.duration_s * fs))
    up = max(1, min(int(fs // (4 * spec.bandwidth_hz)), 256))
    fs_int = fs / up
    n_int = int(np.ceil(n_out / up))

    x = _GENERATORS[spec.signal_class](n_int, fs_int, spec.bandwidth_hz, rng)
    if up > 1:
        x = sps.resample_poly(x, up, 1)
    x = x[:n_out]
    x = x / np.sqrt(np.mean(np.abs(x) ** 2))
    return IQBuffer(x.astype(np.complex64), fs)


def scale_to_snr(signal: IQBuffer, spec: SignalSpec, noise: NoiseModel) -> IQBuffer:
    """Scale a unit-power signal so P = 10^(snr/10) * psd * bandwidth (in-band SNR)."""
    target = 10.0 ** (spec.snr_db / 10.0) * noise.psd * spec.bandwidth_hz
    current = signal.mean_power()
    if current <= 0:
        raise ValueError("cannot scale an empty or all-zero signal")
    gain = np.sqrt(target / current)
    return IQBuffer((signal.samples * np.float32(gain)).astype(np.complex64),
                    signal.sample_rate_hz)


def place_in_capture(capture: IQBuffer, signal: IQBuffer, spec: SignalSpec) -> IQBuffer:
    """Frequency-shift a baseband signal to its center frequency and add it
    into the capture at its arrival time.  Returns a new buffer."""
    fs = capture.sample_rate_hz
    start = int(round(spec.arrival_s * fs))
    n = len(signal.samples)
    if start + n > len(capture.samples):
        raise ValueError("signal extends past the end of the capture")
    out = capture.samples.astype(np.complex128, copy=True)
    k = np.arange(start, start + n, dtype=np.float64)
    shift = np.exp(2j * np.pi * spec.center_freq_hz * k / fs)
    out[start : start + n] += signal.samples.astype(np.complex128) * shift
    return IQBuffer(out.astype(capture.samples.dtype), fs)


def _shifted(signal: IQBuffer, spec: SignalSpec, fs: float, start: int) -> np.ndarray:
    k = np.arange(start, start + len(signal.samples), dtype=np.float64)
    return signal.samples.astype(np.complex128) * np.exp(
        2j * np.pi * spec.center_freq_hz * k / fs)


def compose_scene(config: SceneConfig, noise: NoiseModel, seed) -> IQBuffer:
    """Build the full 5,000,000-sample capture: placed signals plus AWGN.

    `seed` is the scene's master seed (int or SeedSequence entropy).  Each
    signal's waveform stream is derived from the seed and a content hash of
    its spec, so composing a union of signal sets decomposes linearly.
    """
    fs = CAPTURE_SAMPLE_RATE
    acc = np.zeros(CAPTURE_LEN, dtype=np.complex128)
    for spec in config.specs:
        spec.validate()
        rng = derive_rng(seed, spec.content_hash())
        sig = synthesize_baseband(spec, rng)
        sig = scale_to_snr(sig, spec, noise)
        start = int(round(spec.arrival_s * fs))
        acc[start : start + len(sig.samples)] += _shifted(sig, spec, fs, start)

    noise_rng = derive_rng(seed, TAG_NOISE)
    sigma = np.sqrt(noise.psd * fs / 2.0)
    w = noise_rng.standard_normal(2 * CAPTURE_LEN, dtype=np.float32)
    acc += sigma * (w[0::2].astype(np.float64) + 1j * w[1::2].astype(np.float64))
    return IQBuffer(acc.astype(np.complex64), fs)
