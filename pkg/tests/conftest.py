from __future__ import annotations

import numpy as np
import pytest

from vinedist.experiments import euro_stoxx4, single_family_vine, t_vine
from vinedist.vine import VineSpec


def three_dim_mixed() -> VineSpec:
    """Clayton, Gumbel and t pairs on the structure with columns (1,3,2), (2,3), (3)."""
    m = np.array([[1, 0, 0], [3, 2, 0], [2, 3, 3]])
    fam = [["0", "0", "0"], ["C", "0", "0"], ["G", "t", "0"]]
    p1 = np.array([[0, 0, 0], [1.5, 0, 0], [2.0, 0.4, 0]])
    p2 = np.array([[0, 0, 0], [0, 0, 0], [0, 5.0, 0]])
    return VineSpec.from_matrices(m, fam, p1, p2)


def fixture_vines() -> dict[str, VineSpec]:
    return {
        "mixed3": three_dim_mixed(),
        "euro4": euro_stoxx4(),
        "t5": t_vine(5, 0.5, 3),
        "gumbel5": single_family_vine(5, "G", False, 0.5),
        "sjoe4": single_family_vine(4, "J", True, 0.4),
    }


@pytest.fixture(params=list(fixture_vines()))
def fixture_vine(request) -> VineSpec:
    return fixture_vines()[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(20181015)


_ACCEPTANCE: list[str] = []


@pytest.fixture
def verdict(request):
    """Record and assert one acceptance line: ``verdict(ok, "detail")``."""
    name = request.node.name.removeprefix("test_")

    def record(ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
