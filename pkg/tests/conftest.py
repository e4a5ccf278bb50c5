import pytest

from fogcache.topology import Hotspot, Node, Scenario, assign_edge_nodes


def make_scenario(relays, centers, bs=(0.0, 0.0), region=(400.0, 400.0), radius=5.0):
    """Scenario with relays numbered 1.. in the given order and hotspots 0.."""
    nodes = tuple(Node(i + 1, "Relay", tuple(map(float, p))) for i, p in enumerate(relays))
    hs = assign_edge_nodes([Hotspot(i, tuple(map(float, c)), radius) for i, c in enumerate(centers)], nodes)
    return Scenario(region, Node(0, "BS", tuple(map(float, bs))), nodes, hs)


@pytest.fixture
def scenario_factory():
    return make_scenario


# one summary line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, ok: bool, text: str) -> None:
    ACCEPTANCE_LINES[number] = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {text}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
