import numpy as np
import pytest

from qroute.pram import (build_cascade, build_copy, build_parallel_lookup,
                         build_single_lookup, gather_oracle)
from qroute.revcirc import (ancilla_mask, decode_register_batch, decode_state,
                            encode_state, metrics, simulate_ints)
from qroute.sortnet import bitonic_network


def run_lookup(circ, n, js, ys, xs):
    vals = {}
    for i in range(n):
        vals[f"j{i}"] = js[i]
        vals[f"y{i}"] = ys[i]
        vals[f"x{i}"] = xs[i]
    st = encode_state(circ, vals)
    out = simulate_ints(circ, [st])[0]
    assert out & ancilla_mask(circ) == 0, "ancillas must return to zero"
    res = decode_state(circ, out, [f"{r}{i}" for r in "jyx" for i in range(n)])
    assert [res[f"j{i}"] for i in range(n)] == list(js)
    assert [res[f"x{i}"] for i in range(n)] == list(xs)
    return [res[f"y{i}"] for i in range(n)]


# -- gather oracle -------------------------------------------------------------

def test_gather_oracle_basics():
    assert gather_oracle([1, 1], [0, 0], [5, 9]) == [9, 9]
    assert gather_oracle([0, 1, 2], [1, 2, 3], [4, 5, 6]) == [5, 7, 5]
    with pytest.raises(IndexError):
        gather_oracle([3, 0], [0, 0], [1, 2])


# -- single lookup -------------------------------------------------------------

def test_single_lookup_two_cells():
    c = build_single_lookup(2, 1)
    st = encode_state(c, {"j": 1, "y": 0, "x0": 0, "x1": 1})
    out = simulate_ints(c, [st])[0]
    vals = decode_state(c, out)
    assert vals["y"] == 1 and vals["tree"] == 0
    assert vals["x0"] == 0 and vals["x1"] == 1 and vals["j"] == 1


def test_single_lookup_zero_entry():
    c = build_single_lookup(4, 2)
    st = encode_state(c, {"j": 2, "y": 0, "x0": 3, "x1": 1, "x2": 0, "x3": 2})
    out = simulate_ints(c, [st])[0]
    assert decode_state(c, out)["y"] == 0


def test_single_lookup_degenerate_n1():
    c = build_single_lookup(1, 3)
    st = encode_state(c, {"y": 5, "x0": 6})
    out = simulate_ints(c, [st])[0]
    assert decode_state(c, out)["y"] == 5 ^ 6


def test_single_lookup_exhaustive_vs_oracle():
    rng = np.random.default_rng(41)
    n, d = 8, 4
    c = build_single_lookup(n, d)
    amask = ancilla_mask(c)
    states, expect = [], []
    for j in range(n):
        for _ in range(25):
            xs = [int(rng.integers(0, 1 << d)) for _ in range(n)]
            y = int(rng.integers(0, 1 << d))
            vals = {"j": j, "y": y}
            vals.update({f"x{i}": xs[i] for i in range(n)})
            states.append(encode_state(c, vals))
            expect.append(y ^ xs[j])
    outs = simulate_ints(c, states)
    assert all(o & amask == 0 for o in outs)
    assert decode_register_batch(c, outs, "y") == expect


# -- cascade in isolation -------------------------------------------------------

def cascade_model(packets, n_phases):
    """Pure-Python propagation model used as the hand oracle."""
    packets = [dict(p) for p in packets]
    phase = [0] * len(packets)
    for k in range(n_phases):
        step = 1 << k
        receivers = []
        for l in range(len(packets) - step):
            r = l + step
            if (packets[l]["addr"] == packets[r]["addr"]
                    and packets[l]["flag"] == 0 and phase[l] == 0
                    and (packets[r]["flag"] == 1 or phase[r] != 0)):
                receivers.append((l, r))
        for l, r in receivers:
            packets[l]["mem"] ^= packets[r]["mem"]
            phase[l] = k + 1
    return packets, phase


def run_cascade(circ, packets, n):
    vals = {}
    for l, p in enumerate(packets):
        vals[f"p{l}_addr"] = p["addr"]
        vals[f"p{l}_flag"] = p["flag"]
        vals[f"p{l}_tgt"] = p["tgt"]
        vals[f"p{l}_mem"] = p["mem"]
    st = encode_state(circ, vals)
    out = simulate_ints(circ, [st])[0]
    res = decode_state(circ, out)
    assert res["cascade_scratch"] == 0
    assert all(res[f"action{l}"] == 0 for l in range(2 * n))
    return res


def test_cascade_fills_question_run():
    n, d = 2, 3
    circ = build_cascade(n, d)
    # sorted state for j = (1, 1): answer 0 alone, two questions then answer 1
    packets = [
        {"addr": 0, "flag": 1, "tgt": 0, "mem": 5},
        {"addr": 1, "flag": 0, "tgt": 2, "mem": 0},
        {"addr": 1, "flag": 0, "tgt": 3, "mem": 0},
        {"addr": 1, "flag": 1, "tgt": 0, "mem": 6},
    ]
    want, want_phase = cascade_model(packets, 2)
    res = run_cascade(circ, packets, n)
    for l in range(4):
        assert res[f"p{l}_mem"] == want[l]["mem"]
        assert res[f"p{l}_tgt"] == packets[l]["tgt"]
        assert res[f"phase{l}"] == want_phase[l]
    # the run fills at distances 1 and 2: pass ids recorded accordingly
    assert res["phase2"] == 1 and res["phase1"] == 2


def test_cascade_no_questions_is_identity():
    n, d = 2, 2
    circ = build_cascade(n, d)
    packets = [{"addr": l // 2, "flag": 1, "tgt": 0, "mem": (l + 1) % 4} for l in range(4)]
    res = run_cascade(circ, packets, n)
    for l in range(4):
        assert res[f"p{l}_mem"] == packets[l]["mem"]
        assert res[f"phase{l}"] == 0


def test_cascade_worst_case_single_target():
    n, d = 4, 2
    circ = build_cascade(n, d)
    # all seven leading packets query address 3; data propagates 2n-1 slots
    packets = [{"addr": 3, "flag": 0, "tgt": l % 4, "mem": 0} for l in range(7)]
    packets.append({"addr": 3, "flag": 1, "tgt": 0, "mem": 3})
    want, want_phase = cascade_model(packets, 3)
    res = run_cascade(circ, packets, n)
    for l in range(7):
        assert res[f"p{l}_mem"] == 3
        assert res[f"phase{l}"] == want_phase[l]


def test_cascade_random_sorted_states_match_model():
    rng = np.random.default_rng(47)
    n, d = 4, 2
    circ = build_cascade(n, d)
    for _ in range(50):
        js = sorted(int(rng.integers(0, n)) for _ in range(n))
        packets = []
        keys = sorted([(j, 0) for j in js] + [(i, 1) for i in range(n)])
        for a, f in keys:
            packets.append({"addr": a, "flag": f,
                            "tgt": int(rng.integers(0, 1 << d)) if f == 0 else 0,
                            "mem": int(rng.integers(0, 1 << d)) if f == 1 else 0})
        want, want_phase = cascade_model(packets, 3)
        res = run_cascade(circ, packets, n)
        for l in range(2 * n):
            assert res[f"p{l}_mem"] == want[l]["mem"]
            assert res[f"phase{l}"] == want_phase[l]


def test_copy_stage():
    circ = build_copy(2, 2)
    vals = {"p0_addr": 0, "p0_flag": 1, "p0_tgt": 0, "p0_mem": 3}
    st = encode_state(circ, vals)
    out = simulate_ints(circ, [st])[0]
    res = decode_state(circ, out)
    assert res["p0_tgt"] == 3 and res["p0_mem"] == 3
    # involution
    back = simulate_ints(circ, [out])[0]
    assert decode_state(circ, back)["p0_tgt"] == 0
    assert metrics(circ).stage_depth == 1


# -- full parallel lookup --------------------------------------------------------

def test_parallel_lookup_all_query_one_node():
    c = build_parallel_lookup(4, 2)
    xs = [2, 3, 1, 0]
    got = run_lookup(c, 4, [1, 1, 1, 1], [0, 0, 0, 0], xs)
    assert got == [3, 3, 3, 3]


def test_parallel_lookup_identity_indices():
    rng = np.random.default_rng(51)
    c = build_parallel_lookup(4, 2)
    ys = [int(rng.integers(0, 4)) for _ in range(4)]
    xs = [int(rng.integers(0, 4)) for _ in range(4)]
    got = run_lookup(c, 4, [0, 1, 2, 3], ys, xs)
    assert got == [y ^ x for y, x in zip(ys, xs)]


def test_parallel_lookup_random_batch():
    rng = np.random.default_rng(53)
    n, d = 8, 3
    c = build_parallel_lookup(n, d)
    amask = ancilla_mask(c)
    states, expect = [], []
    for _ in range(1000):
        js = [int(rng.integers(0, n)) for _ in range(n)]
        ys = [int(rng.integers(0, 1 << d)) for _ in range(n)]
        xs = [int(rng.integers(0, 1 << d)) for _ in range(n)]
        vals = {}
        for i in range(n):
            vals[f"j{i}"] = js[i]
            vals[f"y{i}"] = ys[i]
            vals[f"x{i}"] = xs[i]
        states.append(encode_state(c, vals))
        expect.append(gather_oracle(js, ys, xs))
    outs = simulate_ints(c, states)
    assert all(o & amask == 0 for o in outs)
    for i in range(n):
        got = decode_register_batch(c, outs, f"y{i}")
        assert got == [e[i] for e in expect]


def test_parallel_lookup_is_involution_on_targets():
    rng = np.random.default_rng(59)
    c = build_parallel_lookup(4, 3)
    js = [2, 0, 2, 1]
    ys = [int(rng.integers(0, 8)) for _ in range(4)]
    xs = [int(rng.integers(0, 8)) for _ in range(4)]
    once = run_lookup(c, 4, js, ys, xs)
    twice = run_lookup(c, 4, js, once, xs)
    assert twice == ys


def test_parallel_lookup_rejects_bad_net():
    with pytest.raises(ValueError):
        build_parallel_lookup(4, 1, bitonic_network(2))


def test_stage_structure():
    # format, sort layers, cascade passes, copy, mirror passes and layers,
    # two unformat steps
    for n in (4, 8):
        net = bitonic_network(int(np.log2(2 * n)))
        passes = int(np.ceil(np.log2(2 * n)))
        m = metrics(build_parallel_lookup(n, 2, net))
        assert m.stage_depth == 2 * net.depth + 2 * passes + 4


def test_width_scales_linearly_with_data():
    m4 = metrics(build_parallel_lookup(4, 4)).width
    m1 = metrics(build_parallel_lookup(4, 1)).width
    # y and x registers plus the two packet data fields grow with d
    assert m4 - m1 == 4 * 2 * 3 + 2 * 4 * 2 * 3
