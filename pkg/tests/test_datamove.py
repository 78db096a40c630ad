import numpy as np
import pytest

from qroute.datamove import (apply_schedule, build_data_mover,
                             compile_fixed_permutation, describe_layout,
                             route_complete_permutation, schedule_to_circuit)
from qroute.revcirc import (ancilla_mask, decode_register_batch, encode_state,
                            metrics, simulate_ints)
from qroute.sortnet import bitonic_network, oets_network


def run_mover(circ, n, xs, dest=None):
    values = {f"x{i}": xs[i] for i in range(n)}
    if dest is not None:
        values.update({f"j{i}": dest[i] for i in range(n)})
    st = encode_state(circ, values)
    out = simulate_ints(circ, [st])[0]
    assert out & ancilla_mask(circ) == 0, "ancillas must return to zero"
    return [decode_register_batch(circ, [out], f"x{i}")[0] for i in range(n)]


def test_two_node_swap():
    circ = build_data_mover(2, 1, bitonic_network(2), destinations=[1, 0])
    assert run_mover(circ, 2, [0, 1]) == [1, 0]


def test_identity_permutation():
    circ = build_data_mover(4, 2, bitonic_network(3), destinations=[0, 1, 2, 3])
    xs = [3, 0, 2, 1]
    assert run_mover(circ, 4, xs) == xs


def test_fixed_permutations_match_oracle():
    rng = np.random.default_rng(21)
    net = bitonic_network(4)
    for _ in range(60):
        dest = list(rng.permutation(8))
        xs = [int(rng.integers(0, 8)) for _ in range(8)]
        circ = build_data_mover(8, 3, net, destinations=[int(v) for v in dest])
        assert run_mover(circ, 8, xs) == [xs[v] for v in dest]


def test_quantum_destinations_batch():
    rng = np.random.default_rng(22)
    net = bitonic_network(4)
    circ = build_data_mover(8, 3, net, destinations_as_data=True)
    amask = ancilla_mask(circ)
    states, expect = [], []
    for _ in range(500):
        dest = [int(v) for v in rng.permutation(8)]
        xs = [int(rng.integers(0, 8)) for _ in range(8)]
        vals = {f"x{i}": xs[i] for i in range(8)}
        vals.update({f"j{i}": dest[i] for i in range(8)})
        states.append(encode_state(circ, vals))
        expect.append((dest, xs))
    outs = simulate_ints(circ, states)
    for out, (dest, xs) in zip(outs, expect):
        assert out & amask == 0
    for i in range(8):
        got = decode_register_batch(circ, outs, f"x{i}")
        assert got == [xs[dest[i]] for dest, xs in expect]
        backj = decode_register_batch(circ, outs, f"j{i}")
        assert backj == [dest[i] for dest, _ in expect]


def test_rejects_bad_inputs():
    net = bitonic_network(2)
    with pytest.raises(ValueError):
        build_data_mover(2, 1, net, destinations=[0, 0])
    with pytest.raises(ValueError):
        build_data_mover(4, 1, net, destinations=[0, 1, 2, 3])  # wrong wire count
    with pytest.raises(ValueError):
        build_data_mover(2, 1, net, destinations=[1, 0], destinations_as_data=True)


def test_stage_depth_formula():
    net = bitonic_network(3)
    circ = build_data_mover(4, 1, net, destinations=[2, 3, 0, 1])
    m = metrics(circ)
    assert m.stage_depth == 2 * net.depth + 3


def test_layout_two_packets_per_node():
    lay = describe_layout(4, 2, bitonic_network(3))
    for v in range(4):
        a, q = lay.node_packets(v)
        assert (a, q) == (2 * v, 2 * v + 1)
    budgets = lay.per_node_bits()
    assert len(set(budgets)) == 1  # uniform per-node footprint


# -- precomputed schedules ----------------------------------------------------

def test_schedule_reversal_on_line():
    s = compile_fixed_permutation([3, 2, 1, 0], oets_network(4), d=2)
    assert s.depth <= 4
    assert all(b - a == 1 for layer in s.layers for a, b in layer)
    assert apply_schedule(s, [10, 11, 12, 13]) == [13, 12, 11, 10]


def test_schedule_identity_is_empty():
    s = compile_fixed_permutation([0, 1, 2, 3], oets_network(4), d=1)
    assert s.layers == []


def test_schedule_random_perms_on_hypercube():
    rng = np.random.default_rng(33)
    net = bitonic_network(3)
    for _ in range(100):
        perm = [int(v) for v in rng.permutation(8)]
        s = compile_fixed_permutation(perm, net, d=1)
        assert s.depth <= net.depth == 6
        vals = list(rng.integers(0, 100, size=8))
        assert apply_schedule(s, vals) == [vals[perm[v]] for v in range(8)]


def test_schedule_rejects_non_permutation():
    with pytest.raises(ValueError):
        compile_fixed_permutation([0, 0, 1, 2], oets_network(4), d=1)


def test_schedule_circuit_matches_replay():
    rng = np.random.default_rng(35)
    net = oets_network(6)
    perm = [int(v) for v in rng.permutation(6)]
    s = compile_fixed_permutation(perm, net, d=3)
    circ = schedule_to_circuit(s)
    vals = [int(rng.integers(0, 8)) for _ in range(6)]
    st = encode_state(circ, {f"r{i}": vals[i] for i in range(6)})
    out = simulate_ints(circ, [st])[0]
    got = [decode_register_batch(circ, [out], f"r{i}")[0] for i in range(6)]
    assert got == apply_schedule(s, vals)


def test_complete_graph_routing_two_layers():
    rng = np.random.default_rng(37)
    for n in (4, 8, 16):
        for _ in range(50):
            perm = [int(v) for v in rng.permutation(n)]
            s = route_complete_permutation(perm, d=1)
            assert s.depth <= 2
            vals = list(range(100, 100 + n))
            assert apply_schedule(s, vals) == [vals[perm[v]] for v in range(n)]
            for layer in s.layers:  # disjointness
                touched = [x for pair in layer for x in pair]
                assert len(touched) == len(set(touched))
