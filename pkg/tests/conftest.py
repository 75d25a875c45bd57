import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("suite", deadline=None, max_examples=50)
settings.load_profile("suite")

# (criterion name, passed, detail) rows appended by tests/test_acceptance.py
ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture(scope="session", autouse=True)
def warm_tree_kernels():
    """Compile (or load from cache) the numba kernels once, so timed tests
    measure algorithmic work rather than one-off compilation."""
    from hallumeta.meta.tree import fit_tree

    tree = fit_tree(np.array([[0.0], [1.0]]), np.array([0.0, 1.0]))
    tree.predict(np.array([[0.5]]))
    yield


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] {name}: {detail}")
