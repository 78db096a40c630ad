"""End-to-end acceptance checks, one test per criterion.

Each test pins its tolerances and prints a single pass line with timing;
independent oracles (network replay, array permutation, gather, closed
forms) supply every expected value.
"""
import math
import time

import numpy as np

from qroute import algorithms, datamove, emulator, pram, qsim, sortnet
from qroute.revcirc import (ancilla_mask, decode_register_batch, encode_state,
                            metrics, simulate_ints)
from qroute.sortnet import bitonic_network, oets_network
from qroute.topology import build_topology


class Clock:
    def __init__(self, budget):
        self.budget = budget
        self.t0 = time.monotonic()

    def done(self, label):
        dt = time.monotonic() - self.t0
        assert dt < self.budget, f"{label} exceeded {self.budget}s ({dt:.1f}s)"
        print(f"{label}: PASS ({dt:.1f}s)")


def test_criterion_1_sorting_networks():
    clock = Clock(10.0)
    for t in range(1, 7):
        net = bitonic_network(t)
        assert net.depth == t * (t + 1) // 2
        ok, cex = sortnet.verify_network(net)
        assert ok, f"bitonic({t}) failed on {cex}"
    for n in range(2, 21):
        ok, cex = sortnet.verify_network(oets_network(n))
        assert ok, f"oets({n}) failed on {cex}"
    clock.done("criterion 1 (network correctness)")


def _mover_case_batch(circ, n, cases):
    states = []
    for dest, xs in cases:
        vals = {f"x{i}": xs[i] for i in range(n)}
        vals.update({f"j{i}": dest[i] for i in range(n)})
        states.append(encode_state(circ, vals))
    return states


def test_criterion_2_data_mover_oracle():
    clock = Clock(60.0)
    rng = np.random.default_rng(2024)
    for n in (4, 8, 16):
        net = bitonic_network(int(math.log2(2 * n)))
        for d in (1, 4):
            quantum = datamove.build_data_mover(n, d, net,
                                                destinations_as_data=True)
            amask = ancilla_mask(quantum)
            cases = [([int(v) for v in rng.permutation(n)],
                      [int(rng.integers(0, 1 << d)) for _ in range(n)])
                     for _ in range(500)]
            outs = simulate_ints(quantum, _mover_case_batch(quantum, n, cases))
            assert all(o & amask == 0 for o in outs)
            for i in range(n):
                got = decode_register_batch(quantum, outs, f"x{i}")
                assert got == [xs[dest[i]] for dest, xs in cases]
            # fixed-permutation variant on a subset of the same cases
            for dest, xs in cases[:40]:
                circ = datamove.build_data_mover(n, d, net, destinations=dest)
                st = encode_state(circ, {f"x{i}": xs[i] for i in range(n)})
                out = simulate_ints(circ, [st])[0]
                assert out & ancilla_mask(circ) == 0
                got = [decode_register_batch(circ, [out], f"x{i}")[0]
                       for i in range(n)]
                assert got == [xs[dest[i]] for i in range(n)]
    clock.done("criterion 2 (data mover vs permutation oracle)")


def test_criterion_3_parallel_lookup_oracle():
    clock = Clock(120.0)
    rng = np.random.default_rng(3033)
    for n in (4, 8, 16):
        for d in (1, 3):
            circ = pram.build_parallel_lookup(n, d)
            amask = ancilla_mask(circ)
            cases = [([0] * n, "all-same"),
                     (list(range(n)), "identity"),
                     ([0] * (n // 2) + [n - 1] * (n - n // 2), "two-hot")]
            cases = [(js, [int(rng.integers(0, 1 << d)) for _ in range(n)],
                      [int(rng.integers(0, 1 << d)) for _ in range(n)])
                     for js, _ in cases]
            for _ in range(1000):
                cases.append(([int(rng.integers(0, n)) for _ in range(n)],
                              [int(rng.integers(0, 1 << d)) for _ in range(n)],
                              [int(rng.integers(0, 1 << d)) for _ in range(n)]))
            states, expect = [], []
            for js, ys, xs in cases:
                vals = {}
                for i in range(n):
                    vals[f"j{i}"] = js[i]
                    vals[f"y{i}"] = ys[i]
                    vals[f"x{i}"] = xs[i]
                states.append(encode_state(circ, vals))
                expect.append(pram.gather_oracle(js, ys, xs))
            outs = simulate_ints(circ, states)
            assert all(o & amask == 0 for o in outs)
            for i in range(n):
                got = decode_register_batch(circ, outs, f"y{i}")
                assert got == [e[i] for e in expect]
                backj = decode_register_batch(circ, outs, f"j{i}")
                assert backj == [c[0][i] for c in cases]
    clock.done("criterion 3 (parallel lookup vs gather oracle)")


def test_criterion_4_lookup_resource_scaling():
    clock = Clock(120.0)
    d = 4
    sizes = (4, 8, 16, 32, 64)
    widths, stages = [], []
    for n in sizes:
        m = metrics(pram.build_parallel_lookup(n, d))
        widths.append(m.width / (n * (math.log2(n) + d)))
        stages.append(m.stage_depth / (math.log2(n) * math.log2(d * math.log2(n))))
    for ratios, label in ((widths, "width"), (stages, "stage depth")):
        c = math.sqrt(max(ratios) * min(ratios))  # minimax constant in log space
        worst = max(abs(math.log(r / c)) for r in ratios)
        assert math.exp(worst) - 1.0 <= 0.25, f"{label} fit off by {worst}"
        assert all(r <= c * 1.25 for r in ratios)
    clock.done("criterion 4 (lookup width and depth scaling)")


def test_criterion_5_emulation_equivalence():
    clock = Clock(300.0)
    rng = np.random.default_rng(5055)
    topos = [build_topology(f, 8) for f in ("line", "hypercube", "complete")]
    for _ in range(50):
        w = int(rng.integers(4, 9))
        depth = int(rng.integers(4, 13))
        circ = emulator.random_logical_circuit(w, depth, rng)
        for topo in topos:
            plan, emu, rep = emulator.emulate(circ, topo)
            assert emulator.circuit_is_local(emu, topo)
            assert emulator.verify_emulation(circ, emu, rng=rng, states=2,
                                             tol=1e-10)
    clock.done("criterion 5 (emulation statevector equivalence)")


def test_criterion_6_overhead_scaling():
    clock = Clock(120.0)
    sizes = (8, 16, 32, 64)
    models = {
        "line": lambda n: n,
        "hypercube": lambda n: math.log2(n) ** 2,
        "complete": lambda n: math.log2(n),
    }
    rows = emulator.overhead_report(sizes=sizes, depth=2)
    for family, model in models.items():
        ratios = [r["per_slice_stage_depth"] / model(r["n"])
                  for r in sorted((r for r in rows if r["family"] == family),
                                  key=lambda r: r["n"])]
        for a, b in zip(ratios, ratios[1:]):
            assert b <= a * 1.01, f"{family} overhead ratio grew: {ratios}"
    clock.done("criterion 6 (overhead growth per family)")


def test_criterion_7_grover_closed_form():
    clock = Clock(30.0)
    for n in (4, 16, 64):
        for m in (1, 2):
            k = int(math.floor((math.pi / 4) * math.sqrt(n / m)))
            res = qsim.grover_dynamics(lambda x: x < m, n, k)
            want = math.sin((2 * k + 1) * math.asin(math.sqrt(m / n))) ** 2
            assert abs(res.success_probability - want) <= 1e-9
    clock.done("criterion 7 (search dynamics closed form)")


def test_criterion_8_oracle_composition():
    clock = Clock(120.0)
    rng = np.random.default_rng(8088)
    d = 3
    for n in (8, 64):
        entries = [int(v) for v in rng.integers(0, 1 << d, size=n)]
        alpha1 = algorithms.predicate_equals_constant(d, entries[n // 2])
        oracle1 = algorithms.compose_oracle(alpha1, n, d, r=1)
        assert algorithms.verify_oracle(oracle1, alpha1, entries, d, 1)
        alpha2 = algorithms.predicate_entries_equal(d)
        oracle2 = algorithms.compose_oracle(alpha2, n, d, r=2)
        assert algorithms.verify_oracle(oracle2, alpha2, entries, d, 2)
    clock.done("criterion 8 (oracle composition exhaustive)")


def test_criterion_9_element_distinctness_grid():
    clock = Clock(300.0)
    for n in (16, 32, 64):
        for s in (2, 4, 8):
            inst_rng = np.random.default_rng(9000 + n + s)
            f, _ = algorithms.planted_collision_table(n, inst_rng)
            wins, products = 0, []
            for t in range(200):
                seed = 9_000_000 + 1000 * n + 10 * s + t
                out = algorithms.element_distinctness(
                    f, s, rng=np.random.default_rng(seed), seed=seed)
                if out.kind == "pair":
                    i, j = out.pair
                    assert f[i] == f[j] and i != j
                    wins += 1
                products.append(s * out.ledger.amp_rounds
                                * out.ledger.per_round_stage_depth)
            assert wins / 200 >= 2 / 3, f"cell N={n} S={s}: {wins}/200"
            band = math.log2(n) ** 3
            median = sorted(products)[len(products) // 2]
            assert n / band <= median <= n * band, \
                f"cell N={n} S={s}: product {median} outside band"
    clock.done("criterion 9 (distinctness success and cost band)")


def test_criterion_10_collision_finding():
    clock = Clock(300.0)
    for n in (16, 32):
        wins = 0
        for t in range(200):
            seed = 10_000_000 + 1000 * n + t
            rng = np.random.default_rng(seed)
            f = algorithms.two_to_one_table(n, rng)
            out = algorithms.collision_finding(f, 4, rng=rng, seed=seed)
            if out.kind == "pair":
                i, j = out.pair
                assert f[i] == f[j] and i != j
                wins += 1
        assert wins / 200 >= 2 / 3, f"N={n}: {wins}/200"
        for t in range(50):
            rng = np.random.default_rng(20_000_000 + 1000 * n + t)
            f = algorithms.injective_table(n, rng)
            out = algorithms.collision_finding(f, 4, rng=rng)
            assert out.kind == "one-to-one"
    clock.done("criterion 10 (collision finding)")


def _random_reversible(width, n_gates, rng):
    from qroute.revcirc import CircuitBuilder
    b = CircuitBuilder()
    b.add_register("w", width)
    for _ in range(n_gates):
        kind = rng.integers(0, 5)
        bits = [int(v) for v in rng.choice(width, size=3, replace=False)]
        [b.x(bits[0]), b.cnot(bits[0], bits[1]), b.toffoli(*bits),
         b.swap(bits[0], bits[1]), b.fredkin(*bits)][kind]
    return b.build()


def test_criterion_11_cross_simulator_agreement():
    clock = Clock(120.0)
    rng = np.random.default_rng(1111)
    circuits = [
        _random_reversible(4, 30, rng),
        _random_reversible(8, 40, rng),
        _random_reversible(12, 40, rng),
        sortnet.compile_reversible_sort(bitonic_network(1), key_bits=2,
                                        payload_bits=1, shared_scratch=True),
        pram.build_single_lookup(2, 1),
    ]
    for circ in circuits:
        assert circ.width <= 12
        perm = simulate_ints(circ, list(range(1 << circ.width)))
        assert sorted(perm) == list(range(1 << circ.width))
        if circ.width <= 8:
            for x in range(1 << circ.width):
                psi = qsim.apply(circ, qsim.basis_state(circ.width, x))
                assert abs(psi[perm[x]] - 1.0) < 1e-12
        else:
            # one pass with distinct amplitudes pins the whole permutation
            amps = np.arange(1, (1 << circ.width) + 1, dtype=float)
            amps /= np.linalg.norm(amps)
            out = qsim.apply(circ, amps.astype(complex))
            want = np.zeros_like(out)
            want[perm] = amps
            assert np.max(np.abs(out - want)) < 1e-12
    clock.done("criterion 11 (classical and statevector simulators agree)")
