"""Shared fixtures: lazily-run experiment reports and an acceptance
verdict summary printed at the end of the session."""

import time

import pytest

from umsrd.experiments import experiment_spec, run_experiment

ACCEPTANCE = []


def record_verdict(name: str, ok: bool, detail: str = "") -> bool:
    ACCEPTANCE.append((name, bool(ok), detail))
    return bool(ok)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        line = f"{'PASS' if ok else 'FAIL'}  {name}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)


class ReportStore:
    """Runs each registered experiment at most once per session and
    caches the report, its wall-clock time and its written CSV dir."""

    def __init__(self, root):
        self.root = root
        self._reports = {}
        self.walls = {}
        self._written = set()

    def report(self, k: int):
        if k not in self._reports:
            t0 = time.perf_counter()
            self._reports[k] = run_experiment(experiment_spec(k))
            self.walls[k] = time.perf_counter() - t0
        return self._reports[k]

    def csv_dir(self, k: int):
        if k not in self._written:
            self.report(k).write(self.root)
            self._written.add(k)
        return self.root


@pytest.fixture(scope="session")
def store(tmp_path_factory):
    return ReportStore(tmp_path_factory.mktemp("reports"))
