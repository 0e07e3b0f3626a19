import numpy as np
import pytest

from corrkit.learn import LearnConfig, learn_bundle
from corrkit.synth import dual_structure_task, generate, single_coordination_task

_acceptance: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        _acceptance[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for nodeid in sorted(_acceptance):
        name = nodeid.split("::")[-1]
        outcome = _acceptance[nodeid].upper()
        mark = "PASS" if outcome == "PASSED" else outcome
        terminalreporter.write_line(f"{mark}  {name}")


@pytest.fixture(scope="session")
def single_task():
    spec = single_coordination_task(seed=3)
    demos, truth = generate(spec)
    return spec, demos, truth


@pytest.fixture(scope="session")
def dual_task():
    spec = dual_structure_task(seed=11)
    demos, truth = generate(spec)
    return spec, demos, truth


@pytest.fixture(scope="session")
def single_bundle(single_task):
    spec, demos, _ = single_task
    return learn_bundle(demos, spec.surface, LearnConfig())


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(0)
