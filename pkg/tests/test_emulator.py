import numpy as np
import pytest

from qroute.emulator import (LogicalCircuit, assign_gates, circuit_is_local,
                             emulate, far_pair_circuit, from_json,
                             one_gate_per_processor, overhead_report,
                             random_logical_circuit, to_json, verify_emulation)
from qroute.topology import build_topology


def test_assign_single_far_gate():
    gates = [("CNOT", 0, 3)]
    assignment, perm = assign_gates(gates, 4)
    assert assignment == {("CNOT", 0, 3): 0}
    assert perm[0] == 3
    assert sorted(perm) == [0, 1, 2, 3]
    # nodes not involved stay put
    assert perm[1] == 1 and perm[2] == 2


def test_assign_empty_slice_identity():
    _, perm = assign_gates([], 5)
    assert perm == [0, 1, 2, 3, 4]


def test_assign_half_filled_slices_bijective():
    rng = np.random.default_rng(71)
    for _ in range(50):
        n = 8
        qubits = list(rng.permutation(n))
        gates = [("CNOT", int(qubits[2 * i]), int(qubits[2 * i + 1]))
                 for i in range(n // 2)]
        _, perm = assign_gates(gates, n)
        assert sorted(perm) == list(range(n))
        for g in gates:
            assert perm[g[1]] == g[2]


def test_single_cnot_on_complete_graph_runs_direct():
    topo = build_topology("complete", 8)
    circ = LogicalCircuit(8, [[("CNOT", 0, 7)]])
    plan, emu, rep = emulate(circ, topo)
    assert rep["per_slice_stage_depth"] == 1  # every pair is an edge
    assert circuit_is_local(emu, topo)
    assert verify_emulation(circ, emu)


def test_mirror_pairs_on_line_cost_linear():
    n = 8
    topo = build_topology("line", n)
    circ = far_pair_circuit(n, 2)
    plan, emu, rep = emulate(circ, topo)
    assert circuit_is_local(emu, topo)
    assert rep["per_slice_stage_depth"] <= 2 * n + 3
    assert verify_emulation(circ, emu)


def test_hypercube_movement_layer_bound():
    n = 16
    topo = build_topology("hypercube", n)
    circ = far_pair_circuit(n, 1)
    plan, emu, rep = emulate(circ, topo)
    t = 5  # two packets per node would sort 32 elements
    assert rep["per_slice_stage_depth"] <= 2 * (t * (t + 1) // 2) + 3
    assert circuit_is_local(emu, topo)


def test_plan_invariants():
    rng = np.random.default_rng(73)
    topo = build_topology("hypercube", 8)
    circ = random_logical_circuit(8, 6, rng)
    plan, emu, rep = emulate(circ, topo)
    assert one_gate_per_processor(plan)
    assert circuit_is_local(emu, topo)
    assert rep["emulated_stage_depth"] == sum(p.emitted_slices for p in plan.slices)


@pytest.mark.parametrize("family", ["line", "hypercube", "complete"])
def test_end_to_end_statevector_equivalence(family):
    rng = np.random.default_rng(79)
    topo = build_topology(family, 8)
    for _ in range(6):
        w = int(rng.integers(4, 9))
        circ = random_logical_circuit(w, int(rng.integers(3, 8)), rng)
        plan, emu, rep = emulate(circ, topo)
        assert circuit_is_local(emu, topo)
        assert verify_emulation(circ, emu, rng=rng, states=2, tol=1e-10)


def test_width_larger_than_nodes_rejected():
    topo = build_topology("line", 4)
    with pytest.raises(ValueError):
        emulate(LogicalCircuit(5, [[("H", 4)]]), topo)


def test_unknown_gate_tag_rejected():
    topo = build_topology("line", 4)
    with pytest.raises(ValueError):
        emulate(LogicalCircuit(4, [[("RX", 0)]]), topo)


def test_overhead_report_families():
    rows = overhead_report(sizes=(8, 16), depth=2)
    by_family = {}
    for r in rows:
        by_family.setdefault(r["family"], []).append(r)
    assert set(by_family) == {"line", "hypercube", "complete"}
    for rows_f in by_family.values():
        for r in rows_f:
            assert r["per_slice_stage_depth"] >= 1
            assert r["ref_floor"] > 0


def test_logical_circuit_json_roundtrip():
    rng = np.random.default_rng(83)
    circ = random_logical_circuit(6, 5, rng)
    back = from_json(to_json(circ))
    assert back.width == circ.width
    assert back.slices == circ.slices
