import math

import numpy as np
import pytest

from spectrodet.sampler import (DatasetPlan, MetadataRanges, SplitManifest,
                                enumerate_combinations, plan_dataset, realize,
                                read_split, sample_config, split_train_test,
                                write_split)
from spectrodet.signals import CAPTURE_DURATION, SignalClass
from spectrodet.streams import derive_rng


def test_combination_count_six_classes():
    combos = enumerate_combinations(SignalClass, 1, 4)
    expected = sum(math.comb(6, k) for k in range(1, 5))
    assert len(combos) == expected == 56


def test_combination_tiny_case():
    combos = enumerate_combinations(["A", "B"], 1, 2)
    assert combos == [("A",), ("B",), ("A", "B")]


def test_combination_order_deterministic():
    assert enumerate_combinations(SignalClass) == enumerate_combinations(SignalClass)


def test_empty_class_set_rejected():
    with pytest.raises(ValueError):
        enumerate_combinations([])


def test_degenerate_ranges_give_constants():
    ranges = MetadataRanges(bandwidth_hz=(5e6, 5e6), bandwidth_overrides=(),
                            snr_db=(7.0, 7.0))
    cfg = sample_config((SignalClass.QAM,), ranges, derive_rng(0, 0))
    (s,) = cfg.specs
    assert s.bandwidth_hz == 5e6
    assert s.snr_db == 7.0


def test_snr_uniformity_monte_carlo():
    ranges = MetadataRanges(snr_db=(0.0, 30.0))
    rng = derive_rng(1, 1)
    draws = [sample_config((SignalClass.AM,), ranges, rng).specs[0].snr_db
             for _ in range(10_000)]
    assert np.mean(draws) == pytest.approx(15.0, abs=0.5)


def test_wide_band_constrains_center_freq():
    ranges = MetadataRanges(bandwidth_hz=(40e6, 40e6), bandwidth_overrides=())
    rng = derive_rng(2, 2)
    for _ in range(200):
        (s,) = sample_config((SignalClass.FM,), ranges, rng).specs
        assert abs(s.center_freq_hz) <= 30e6 + 1e-6


def test_infeasible_ranges_rejected():
    with pytest.raises(ValueError):
        MetadataRanges(bandwidth_hz=(1e6, 2e8), bandwidth_overrides=()).validate()


def test_realize_respects_capture_bound():
    ranges = MetadataRanges()
    base = sample_config((SignalClass.QAM, SignalClass.FM), ranges, derive_rng(3, 3))
    rng = derive_rng(4, 4)
    for _ in range(5000):
        scene = realize(base, rng, ranges)
        for s in scene.specs:
            assert s.arrival_s + s.duration_s <= CAPTURE_DURATION + 1e-12
            assert s.duration_s >= ranges.duration_min_s


def test_realize_deterministic():
    base = sample_config((SignalClass.BLE,), MetadataRanges(), derive_rng(5, 5))
    a = realize(base, derive_rng(6, 6))
    b = realize(base, derive_rng(6, 6))
    assert a == b


def test_default_plan_is_5600_scenes():
    plan = DatasetPlan(master_seed=0)
    scenes = plan_dataset(plan)
    assert len(scenes) == 56 * 20 * 5 == 5600
    assert plan.total_scenes() == 5600
    # every combo contributes exactly 100 realizations of metadata
    per_combo = {}
    for s in scenes:
        per_combo[s.combo_index] = per_combo.get(s.combo_index, 0) + 1
    assert set(per_combo.values()) == {100}


def test_tiny_plan():
    plan = DatasetPlan(master_seed=0, configs_per_combo=1,
                       realizations_per_config=1, max_combo=1)
    assert len(plan_dataset(plan)) == 6


def test_plan_deterministic():
    plan = DatasetPlan(master_seed=99, configs_per_combo=2,
                       realizations_per_config=2, max_combos=5)
    assert plan_dataset(plan) == plan_dataset(plan)


def test_plan_metadata_within_ranges():
    plan = DatasetPlan(master_seed=3, configs_per_combo=2,
                       realizations_per_config=2, max_combos=20)
    for scene in plan_dataset(plan):
        for s in scene.specs:
            lo, hi = plan.ranges.bandwidth_range(s.signal_class)
            assert lo <= s.bandwidth_hz <= hi
            assert plan.ranges.snr_db[0] <= s.snr_db <= plan.ranges.snr_db[1]
            s.validate()


def test_split_matches_reported_counts():
    ids = [f"s{i}" for i in range(4686)]
    split = split_train_test(ids, 0.1765, seed=0)
    assert len(split.test) == 827
    assert len(split.train) == 3859


def test_split_small_case():
    split = split_train_test([f"s{i}" for i in range(10)], 0.2, seed=1)
    assert len(split.test) == 2
    assert sorted(split.train + split.test) == sorted(f"s{i}" for i in range(10))
    assert not set(split.train) & set(split.test)


def test_split_deterministic_and_roundtrips(tmp_path):
    ids = [f"{i:03d}" for i in range(50)]
    a = split_train_test(ids, 0.3, seed=12)
    b = split_train_test(ids, 0.3, seed=12)
    assert a == b
    path = tmp_path / "split.txt"
    write_split(a, path)
    back = read_split(path, seed=12)
    assert back == a
