from pathlib import Path

import pytest

from surprise_rr import (
    read_assumptions_yaml,
    read_cluster_yaml,
    read_onomasticon_csv,
    validate,
)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def onom_a():
    return read_onomasticon_csv(FIXTURES / "onom_a.csv")


@pytest.fixture(scope="session")
def onom_b():
    return read_onomasticon_csv(FIXTURES / "onom_b.csv")


@pytest.fixture(scope="session")
def onom_sweep():
    return read_onomasticon_csv(FIXTURES / "onom_sweep.csv")


@pytest.fixture(scope="session")
def talpiyot_assumptions():
    return read_assumptions_yaml(FIXTURES / "assumptions_talpiyot_like.yaml")


@pytest.fixture(scope="session")
def talpiyot_cluster():
    return read_cluster_yaml(FIXTURES / "cluster_talpiyot_like.yaml")


@pytest.fixture(scope="session")
def onom_b_assumptions():
    return read_assumptions_yaml(FIXTURES / "assumptions_onom_b.yaml")


@pytest.fixture(scope="session")
def onom_b_cluster():
    return read_cluster_yaml(FIXTURES / "cluster_onom_b.yaml")


@pytest.fixture(scope="session")
def sweep_assumptions():
    return read_assumptions_yaml(FIXTURES / "assumptions_sweep.yaml")


@pytest.fixture(scope="session")
def sweep_cluster():
    return read_cluster_yaml(FIXTURES / "cluster_sweep.yaml")


@pytest.fixture(scope="session")
def talpiyot_effective(talpiyot_assumptions, onom_a):
    report = validate(talpiyot_assumptions, onom_a)
    assert report.ok
    return report.onomasticon
