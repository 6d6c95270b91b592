import sys
from pathlib import Path

import pytest

from rpmlink.temporal_graph import TemporalNetwork, make_frame

sys.path.insert(0, str(Path(__file__).parent))

# small graph a-b, a-c, b-c, b-d with a=0, b=1, c=2, d=3
A, B, C, D = 0, 1, 2, 3
G1_EDGES = [(A, B), (A, C), (B, C), (B, D)]


def single_frame(edges, num_nodes, directed=False, neighbor_mode="union"):
    net = TemporalNetwork.from_edges(num_nodes, [edges], directed=directed)
    return make_frame(net, 1, 1, neighbor_mode)


@pytest.fixture
def g1():
    return single_frame(G1_EDGES, 5)  # node 4 is isolated


@pytest.fixture
def write_edges(tmp_path):
    def _write(text, name="net.txt"):
        path = tmp_path / name
        path.write_text(text)
        return path
    return _write


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
