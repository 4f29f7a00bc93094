import numpy as np
import pytest

from movact import simgen
from movact.dynamics import fit_dynamics


@pytest.fixture(scope="session")
def reach_data():
    """Noise-free reaching set, 100 trajectories per label."""
    return simgen.generate_dataset(simgen.DatasetSpec(n_per_label=100, seed=0))


@pytest.fixture(scope="session")
def reach_models(reach_data):
    train, _ = simgen.split_indices(100)
    return {
        lab: fit_dynamics([reach_data.trajectories[lab][i] for i in train], label=lab, dataset="D0")
        for lab in simgen.LABELS
    }


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.fixture
def report(request):
    """Record and print one PASS/FAIL line for an acceptance criterion."""
    lines = request.config.__dict__.setdefault("_acceptance_lines", [])

    def emit(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        lines.append(line)

    return emit
