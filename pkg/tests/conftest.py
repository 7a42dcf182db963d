import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nnreach import CellBox, fixture_path, load_narma, load_network, load_scenario  # noqa: E402


@pytest.fixture(scope="session")
def ex1_net():
    return load_network(fixture_path("example1_mlp"))


@pytest.fixture(scope="session")
def unit_box():
    return CellBox.from_pairs([[-1.0, 1.0], [-1.0, 1.0]])


@pytest.fixture(scope="session")
def ex2_model():
    return load_narma(fixture_path("example2_narma"))


@pytest.fixture(scope="session")
def ex2_scenario(ex2_model):
    return load_scenario(fixture_path("example2_narma", "scenario"), ex2_model)


@pytest.fixture(scope="session")
def maglev_model():
    return load_narma(fixture_path("maglev_narma"))


@pytest.fixture(scope="session")
def maglev_scenario(maglev_model):
    return load_scenario(fixture_path("maglev_narma", "scenario"), maglev_model)


@pytest.fixture
def rng():
    return np.random.default_rng(20180807)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(mod.RESULTS, key=lambda k: (int(k.split("-")[0]), k)):
        ok, detail = mod.RESULTS[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'} - {detail}")
