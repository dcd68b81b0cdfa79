"""Dataset randomization protocol.

Enumerate class combinations (sizes 1-4), draw per-combo metadata
configurations, expand each configuration into realizations with fresh
arrival times and durations, and split scene ids into train/test.
Defaults: 20 configurations per combo, 5 realizations each, so every combo
contributes exactly 100 realizations of signal-level metadata.
"""

import itertools
from dataclasses import dataclass, field

from .signals import (CAPTURE_DURATION, CAPTURE_SAMPLE_RATE, SceneConfig,
                      SignalClass, SignalSpec)
from .streams import TAG_CONFIG, TAG_REALIZE, TAG_SPLIT, derive_rng


@dataclass(frozen=True)
class MetadataRanges:
    """Uniform draw ranges for per-signal metadata.

    BLE is capped at 2 MHz and WiFi floors at 10 MHz to keep each class's
    bandwidth in a plausible regime; the wide default range combined with
    the short minimum duration is what produces the dataset's extreme
    aspect-ratio spread.
    """

    bandwidth_hz: tuple = (1e6, 40e6)
    bandwidth_overrides: tuple = (
        (SignalClass.BLE, (1e6, 2e6)),
        (SignalClass.WIFI, (10e6, 40e6)),
    )
    snr_db: tuple = (-5.0, 30.0)
    arrival_s: tuple = (0.0, 0.04)
    duration_min_s: float = 5e-4

    def bandwidth_range(self, cls: SignalClass) -> tuple:
        for c, rng in self.bandwidth_overrides:
            if c == cls:
                return rng
        return self.bandwidth_hz

    def validate(self):
        for cls in SignalClass:
            lo, hi = self.bandwidth_range(cls)
            if not 0 < lo <= hi:
                raise ValueError("bandwidth range must satisfy 0 < lo <= hi")
            if hi > CAPTURE_SAMPLE_RATE:
                raise ValueError("bandwidth range exceeds the 100 MHz capture band")
        if self.snr_db[0] > self.snr_db[1]:
            raise ValueError("snr range reversed")
        if not 0 <= self.arrival_s[0] <= self.arrival_s[1] < CAPTURE_DURATION:
            raise ValueError("arrival range outside the capture")
        if self.duration_min_s <= 0:
            raise ValueError("duration_min_s must be positive")
        if self.arrival_s[1] + self.duration_min_s > CAPTURE_DURATION:
            raise ValueError("max arrival leaves no room for the minimum duration")


@dataclass(frozen=True)
class DatasetPlan:
    master_seed: int = 0
    configs_per_combo: int = 20
    realizations_per_config: int = 5
    ranges: MetadataRanges = field(default_factory=MetadataRanges)
    classes: tuple = tuple(SignalClass)
    min_combo: int = 1
    max_combo: int = 4
    max_combos: int = 0  # 0 = no limit; otherwise keep the first N combos

    def combos(self) -> list:
        combos = enumerate_combinations(self.classes, self.min_combo, self.max_combo)
        if self.max_combos:
            combos = combos[: self.max_combos]
        return combos

    def total_scenes(self) -> int:
        return len(self.combos()) * self.configs_per_combo * self.realizations_per_config


@dataclass(frozen=True)
class SplitManifest:
    train: tuple
    test: tuple
    seed: int


def enumerate_combinations(classes, min_k: int = 1, max_k: int = 4) -> list:
    """All class combinations of sizes min_k..max_k, lexicographic order."""
    classes = tuple(classes)
    if not classes:
        raise ValueError("empty class set")
    if not 1 <= min_k <= max_k <= len(classes):
        raise ValueError("require 1 <= min_k <= max_k <= |classes|")
    out = []
    for k in range(min_k, max_k + 1):
        out.extend(itertools.combinations(classes, k))
    return out


def sample_config(combo, ranges: MetadataRanges, rng,
                  combo_index: int = 0, config_index: int = 0) -> SceneConfig:
    """Draw fc/bw/snr for each class in the combo (timing left unset).

    Center frequency is rejection-sampled uniformly over the full band
    until the signal fits within +/-50 MHz.
    """
    ranges.validate()
    half_fs = CAPTURE_SAMPLE_RATE / 2
    specs = []
    for cls in combo:
        lo, hi = ranges.bandwidth_range(cls)
        bw = rng.uniform(lo, hi)
        while True:
            fc = rng.uniform(-half_fs, half_fs)
            if abs(fc) + bw / 2 <= half_fs:
                break
        snr = rng.uniform(*ranges.snr_db)
        specs.append(SignalSpec(cls, fc, bw, snr))
    return SceneConfig(tuple(combo), tuple(specs), combo_index, config_index, 0)


def realize(config: SceneConfig, rng, ranges: MetadataRanges = MetadataRanges(),
            realization_index: int = 0) -> SceneConfig:
    """Draw arrival and duration for each signal; arrival+duration <= 50 ms
    holds by construction."""
    specs = []
    for s in config.specs:
        arrival = rng.uniform(*ranges.arrival_s)
        duration = rng.uniform(ranges.duration_min_s, CAPTURE_DURATION - arrival)
        specs.append(SignalSpec(s.signal_class, s.center_freq_hz, s.bandwidth_hz,
                                s.snr_db, arrival, duration))
    return SceneConfig(config.combo, tuple(specs), config.combo_index,
                       config.config_index, realization_index)


def plan_dataset(plan: DatasetPlan) -> list:
    """Ordered list of fully realized SceneConfigs for the plan."""
    scenes = []
    for ci, combo in enumerate(plan.combos()):
        for j in range(plan.configs_per_combo):
            cfg_rng = derive_rng(plan.master_seed, TAG_CONFIG, ci, j)
            base = sample_config(combo, plan.ranges, cfg_rng, ci, j)
            for r in range(plan.realizations_per_config):
                real_rng = derive_rng(plan.master_seed, TAG_REALIZE, ci, j, r)
                scenes.append(realize(base, real_rng, plan.ranges, r))
    return scenes


def split_train_test(scene_ids, test_fraction: float, seed: int) -> SplitManifest:
    """Deterministic shuffled split with |test| = round(fraction * N)."""
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must be in (0,1)")
    ids = list(scene_ids)
    rng = derive_rng(seed, TAG_SPLIT)
    perm = rng.permutation(len(ids))
    n_test = int(round(test_fraction * len(ids)))
    test = tuple(ids[i] for i in sorted(perm[:n_test]))
    train = tuple(ids[i] for i in sorted(perm[n_test:]))
    return SplitManifest(train, test, seed)


def write_split(split: SplitManifest, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("[train]\n")
        for sid in split.train:
            f.write(sid + "\n")
        f.write("[test]\n")
        for sid in split.test:
            f.write(sid + "\n")


def read_split(path, seed: int = 0) -> SplitManifest:
    train, test = [], []
    current = None
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line == "[train]":
                current = train
            elif line == "[test]":
                current = test
            elif line:
                if current is None:
                    raise ValueError(f"split file {path} has ids before a section header")
                current.append(line)
    return SplitManifest(tuple(train), tuple(test), seed)
