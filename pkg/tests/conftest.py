"""Session-scoped dataset fixtures shared by the acceptance tests.

Each fixture generates a 100-scene dataset through the CLI entry point; the
reduced plans keep end-to-end runtime manageable while covering every class
combination size.
"""

import pytest

from spectrodet.cli import main

REDUCED = ["--max-combos", "10", "--configs", "2", "--realizations", "5",
           "--jobs", "1"]


def _generate(out, seed, extra=()):
    rc = main(["generate", "--seed", str(seed), "--out", str(out),
               *REDUCED, *extra])
    assert rc == 0
    return str(out)


@pytest.fixture(scope="session")
def dataset100(tmp_path_factory):
    return _generate(tmp_path_factory.mktemp("ds100") / "ds", 7)


@pytest.fixture(scope="session")
def dataset100_b(tmp_path_factory):
    return _generate(tmp_path_factory.mktemp("ds100b") / "ds", 7)


@pytest.fixture(scope="session")
def dataset_snr10(tmp_path_factory):
    return _generate(tmp_path_factory.mktemp("ds_snr10") / "ds", 11,
                     ["--snr-lo", "10"])
