import pytest
from hypothesis import settings

# single-core box: generous deadlines, moderate example counts
settings.register_profile("repo", deadline=None, max_examples=60)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def tightness_report():
    """One shared run of the Laplace tightness demo (it takes a few seconds)."""
    from ttpa.sanitize import laplace_tightness_demo

    return laplace_tightness_demo(0)

# criterion number -> list of (passed, detail), printed after the run
_ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}


@pytest.fixture
def acceptance():
    """Record a pass/fail verdict for one acceptance criterion, then assert it."""

    def record(criterion: int, passed: bool, detail: str):
        _ACCEPTANCE.setdefault(criterion, []).append((bool(passed), detail))
        assert passed, f"criterion {criterion}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_ACCEPTANCE):
        parts = _ACCEPTANCE[crit]
        ok = all(p for p, _ in parts)
        detail = "; ".join(d for _, d in parts)
        terminalreporter.write_line(
            f"[criterion {crit}] {'PASS' if ok else 'FAIL'}: {detail}"
        )
