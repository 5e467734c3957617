import os

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=100)
settings.register_profile("ci", deadline=None, max_examples=300)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def acceptance_checks():
    """Every reproduce check, computed once per session."""
    if "checks" not in _ACCEPTANCE:
        from hmrr.cli_io import reproduce
        _ACCEPTANCE["checks"] = reproduce.run(list(reproduce.FIGURES))
    return _ACCEPTANCE["checks"]


def pytest_terminal_summary(terminalreporter):
    checks = _ACCEPTANCE.get("checks")
    if not checks:
        return
    tr = terminalreporter
    tr.section("acceptance checks")
    for c in sorted(checks, key=lambda c: c.criterion):
        tr.write_line(c.line())
    by_crit = {}
    for c in checks:
        by_crit.setdefault(c.criterion, []).append(c.passed)
    tr.write_line("")
    for crit in sorted(by_crit):
        tr.write_line(f"criterion {crit:>2}: {'PASS' if all(by_crit[crit]) else 'FAIL'}")
