import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

CRITERIA = {
    1: "exact helical branch residual < 1e-10 on 81^2, under 1 s",
    2: "bifurcation-point values and lambda0 + 0.01 nu2",
    3: "nu2 quadrature matches the symbolic oracle (-1, -1.25)",
    4: "mu- >= -1e-12 over 200 admissible samples, zero on |w| = 1",
    5: "C~ quadrature equals (A^2-3)/(A^2+1), sign flip at 4 kappa/sqrt3",
    6: "hexagonal witness equals -alpha(2A^2+3)/(3(A^2+1)) and is negative",
    7: "energy law residual < 1e-9 and monotone energy over 500 steps",
    8: "desk-scale vortex-antivortex and homogeneous reproductions",
    9: "helix ground state energy within 1e-4 of -0.25",
    10: "residual scaling slope in [2.8, 3.2]",
    11: "admissible region with strict/non-strict boundaries",
}

_outcomes: dict[int, list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(num): acceptance criterion number")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if call.when == "call" or (call.when == "setup" and call.excinfo is not None):
        _outcomes.setdefault(marker.args[0], []).append(call.excinfo is None)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(CRITERIA):
        if num not in _outcomes:
            continue
        status = "PASS" if all(_outcomes[num]) else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {num:2d}: {CRITERIA[num]}")
