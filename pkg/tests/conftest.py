import json

import pytest

from cohort_sieve import fixtures

_ACCEPTANCE: list[tuple[str, str]] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    name = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        status = "SKIP" if rep.skipped else ("PASS" if rep.passed else "FAIL")
        _ACCEPTANCE.append((status, name))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for status, name in _ACCEPTANCE:
        terminalreporter.write_line(f"[{status}] {name}")


@pytest.fixture(scope="session")
def fixture_corpus(tmp_path_factory):
    """A generated 16-patient corpus shared by the slower tests. Treat as read-only."""
    root = tmp_path_factory.mktemp("corpus")
    fixtures.generate(root, n_patients=16, seed=7)
    manifest = json.loads((root / "manifest.json").read_text())
    return root, manifest
