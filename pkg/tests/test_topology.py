import pytest

from qroute import topology
from qroute.topology import Topology, build_topology, neighbors, snake_order


def test_hypercube_8():
    t = build_topology("hypercube", 8)
    assert t.n == 8
    assert len(t.edges) == 12
    assert t.valency() == 3
    deg = [len(neighbors(t, v)) for v in range(8)]
    assert deg == [3] * 8


def test_line_4_edges():
    t = build_topology("line", 4)
    assert t.edges == frozenset({(0, 1), (1, 2), (2, 3)})
    assert t.valency() <= 2


def test_complete_5_edge_count():
    t = build_topology("complete", 5)
    assert len(t.edges) == 10


def test_neighbors_examples():
    assert neighbors(build_topology("hypercube", 8), 0) == [1, 2, 4]
    assert neighbors(build_topology("line", 4), 3) == [2]
    assert neighbors(build_topology("complete", 3), 1) == [0, 2]


def test_neighbors_out_of_range():
    with pytest.raises(IndexError):
        neighbors(build_topology("line", 4), 4)


def test_rejects_bad_sizes():
    with pytest.raises(ValueError):
        build_topology("hypercube", 6)
    with pytest.raises(ValueError):
        build_topology("line", 0)
    with pytest.raises(ValueError):
        build_topology("complete", 0)


def test_grid_shape():
    t = build_topology("grid2d", (2, 3))
    assert t.n == 6
    assert len(t.edges) == 7  # 2*2 horizontal + 3 vertical


@pytest.mark.parametrize("family,size", [
    ("line", 7), ("hypercube", 16), ("complete", 6), ("grid2d", (3, 4)),
])
def test_every_family_connected(family, size):
    t = build_topology(family, size)
    assert t._connected()


def test_hypercube_valency_exact():
    for dim in range(1, 6):
        t = build_topology("hypercube", 1 << dim)
        assert all(len(neighbors(t, v)) == dim for v in range(t.n))


def test_disconnected_rejected():
    with pytest.raises(ValueError):
        Topology(4, frozenset({(0, 1), (2, 3)}))


def test_snake_order():
    assert snake_order(2, 3) == [0, 1, 2, 5, 4, 3]
    assert snake_order(1, 4) == [0, 1, 2, 3]


def test_json_roundtrip():
    t = build_topology("hypercube", 16)
    back = topology.from_json(topology.to_json(t))
    assert back == t
