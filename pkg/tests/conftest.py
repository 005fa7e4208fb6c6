import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from uwofdm_lab.harness import build_cp_reference, designed_generators  # noqa: E402
from uwofdm_lab.sysmodel import SystemConfig, build_carrier_maps, cp_config  # noqa: E402


@pytest.fixture(scope="session")
def cfg():
    return SystemConfig()


@pytest.fixture(scope="session")
def maps(cfg):
    return build_carrier_maps(cfg)


@pytest.fixture(scope="session")
def gens_perm(cfg):
    return designed_generators(cfg, init="perm")


@pytest.fixture(scope="session")
def gens_random(cfg):
    return designed_generators(cfg, init="random")


@pytest.fixture(scope="session")
def cp_cfg(cfg):
    return cp_config(cfg)


@pytest.fixture(scope="session")
def cp_maps(cp_cfg):
    return build_carrier_maps(cp_cfg)


@pytest.fixture(scope="session")
def cp_gens(cp_cfg, gens_perm):
    return build_cp_reference(cp_cfg, gens_perm.p)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
