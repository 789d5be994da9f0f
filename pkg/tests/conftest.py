import numpy as np
import pytest

from swipeguard import synth


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    rows = []
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            if getattr(rep, "when", None) == "call" and "test_acceptance" in rep.nodeid:
                rows.append((rep.nodeid.split("::")[-1], status))
    if rows:
        terminalreporter.write_sep("=", "acceptance criteria")
        for name, status in sorted(rows):
            label = "PASS" if status == "passed" else "FAIL"
            terminalreporter.write_line(f"[{label}] {name}")


@pytest.fixture(scope="session")
def small_population():
    """8 users, homogeneous noise, both attacker types; cached per session."""
    return synth.gen_population(
        synth.PopulationConfig(
            n_users=8, n_genuine=16, n_attacker=8, seed=1234,
            multi_behaviour=False, uniform_jitter_std=0.008,
        )
    )


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
