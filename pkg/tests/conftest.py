import numpy as np
import pytest

from cgtst.sweep import SweepConfig, prepare_contexts, prepare_saddle, run_sweep


@pytest.fixture(scope="session")
def default_config():
    return SweepConfig()


@pytest.fixture(scope="session")
def contexts(default_config):
    return prepare_contexts(default_config)


@pytest.fixture(scope="session")
def sweep_rows(default_config, contexts):
    return run_sweep(default_config, contexts=contexts)


@pytest.fixture(scope="session")
def small_context():
    """8-atom chain; it only has a fracture saddle for strains above ~1.225."""
    return prepare_saddle(8, 1.3, "both")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import VERDICTS

    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[key])
