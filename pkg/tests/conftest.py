"""Shared fixtures: the bundled reference scene, codebook, and small tensors."""

import re

import pytest

from beamscan import (
    load_environment,
    load_orientation_cases,
    oriented_pose,
    synth_codebook,
    trace_paths,
    visible_paths,
)
from beamscan.cli import _orientation_cases, _resolve_scene, RunConfig

TX_POWER_DBM = 12.5


@pytest.fixture(scope="session")
def ref_scene():
    return _resolve_scene(RunConfig())


@pytest.fixture(scope="session")
def orientation_cases():
    return _orientation_cases()


@pytest.fixture(scope="session")
def tables():
    t = synth_codebook(el_hpbw_deg=70.0, el_span_deg=60.0)
    return (t, t)


@pytest.fixture(scope="session")
def traced_paths(ref_scene, orientation_cases):
    """factory: case id -> every ray-traced path (what the sounder receives)"""

    def make(case_id: int):
        c = orientation_cases[case_id]
        tx = oriented_pose(ref_scene.tx, c.phi_tx_deg, c.theta_tx_deg)
        rx = oriented_pose(ref_scene.rx, c.phi_rx_deg, c.theta_rx_deg)
        return trace_paths(ref_scene.environment, tx, rx, TX_POWER_DBM)

    return make


@pytest.fixture(scope="session")
def case_paths(traced_paths, tables):
    """factory: case id -> the sounder-visible subset (what matching sees)"""

    def make(case_id: int):
        return visible_paths(traced_paths(case_id), tables)

    return make


_CRITERION = re.compile(r"test_c(\d+)_")


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    lines = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance" not in nodeid:
                continue
            m = _CRITERION.search(nodeid)
            if not m:
                continue
            n = int(m.group(1))
            verdict = "PASS" if outcome == "passed" else "FAIL"
            if lines.get(n) != "FAIL":
                lines[n] = verdict
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(f"criterion {n}: {lines[n]}")
