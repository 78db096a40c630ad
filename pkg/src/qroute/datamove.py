"""Reversible data movement across a host graph.

Builds the permutation circuit: format the inputs into (address, flag,
data) packets, two per node, sort the 2N packets by (address, flag) with
a graph-local comparator network while recording which-way bits, exchange
data between the question/answer pair now colocated at each node, unsort,
and format back.  Every ancilla (packets, record, scratch) returns to
zero, so the circuit lifts to the permutation unitary exactly.

When the permutation is classical data, the whole sort collapses to a
precomputed schedule of SWAP layers needing only O(d) extra bits per node.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import sortnet
from .revcirc import CircuitBuilder, Register, ReversibleCircuit, compose, invert, relabel_stages
from .sortnet import ComparatorNetwork


def _address_bits(n: int) -> int:
    return max(1, math.ceil(math.log2(n))) if n > 1 else 1


@dataclass
class PacketLayout:
    """Wire assignment of packet fields, two packets per node."""

    n_items: int
    data_bits: int
    address_bits: int
    quantum_destinations: bool
    registers: dict[str, Register] = field(repr=False)
    width: int = 0

    def packet(self, l: int) -> dict[str, Register]:
        names = ("addr", "flag", "data") if f"p{l}_tgt" not in self.registers else \
                ("addr", "flag", "tgt", "mem")
        return {f: self.registers[f"p{l}_{f}"] for f in names}

    def node_packets(self, v: int) -> tuple[int, int]:
        return 2 * v, 2 * v + 1

    def per_node_bits(self) -> list[int]:
        """Bits hosted by each node: io registers, two packets, scratch share."""
        counts = [0] * self.n_items
        for name, reg in self.registers.items():
            if name.startswith("p") and "_" in name:
                l = int(name[1:name.index("_")])
                counts[l // 2] += reg.size
            elif name[0] in "jxy" and name[1:].isdigit():
                counts[int(name[1:])] += reg.size
        return counts


def _build_layout(n: int, d: int, net: ComparatorNetwork, quantum: bool,
                  shared_scratch: bool):
    if net.wires != 2 * n:
        raise ValueError(f"network sorts {net.wires} elements, need {2 * n}")
    m = _address_bits(n)
    key = m + 1
    b = CircuitBuilder()
    if quantum:
        for i in range(n):
            b.add_register(f"j{i}", m)
    for i in range(n):
        b.add_register(f"x{i}", d)
    for l in range(2 * n):
        b.add_register(f"p{l}_addr", m, role="ancilla")
        b.add_register(f"p{l}_flag", 1, role="ancilla")
        b.add_register(f"p{l}_data", d, role="ancilla")
    b.add_register("record", net.size, role="ancilla")
    if shared_scratch:
        b.add_register("scratch", key, role="ancilla")
    else:
        b.add_register("scratch", key * 2 * n, role="ancilla")
    layout = PacketLayout(n, d, m, quantum, b.registers, b.width)
    return b, layout, m, key


def _elements(regs, n: int):
    out = []
    for l in range(2 * n):
        out.append(regs[f"p{l}_addr"].bits() + regs[f"p{l}_flag"].bits()
                   + regs[f"p{l}_data"].bits())
    return out


def _scratch_fn(regs, key: int, shared: bool):
    pool = regs["scratch"].bits()
    if shared:
        return lambda w: pool
    return lambda w: pool[w * key:(w + 1) * key]


def _format_stage(regs, width, n, destinations, quantum, final=False):
    b = CircuitBuilder.from_layout(regs, width)
    b.begin_stage("unformat" if final else "format")
    for i in range(n):
        answer, question = regs[f"p{2 * i}_addr"], regs[f"p{2 * i + 1}_addr"]
        b.write_constant(answer, i)
        b.x(regs[f"p{2 * i}_flag"][0])
        if quantum:
            b.swap_registers(regs[f"j{i}"], question)
        else:
            b.write_constant(question, destinations[i])
        if final:
            b.swap_registers(regs[f"p{2 * i + 1}_data"], regs[f"x{i}"])
        else:
            b.swap_registers(regs[f"x{i}"], regs[f"p{2 * i}_data"])
    return b.build()


def _sort_stage(regs, width, n, net, key, shared):
    b = CircuitBuilder.from_layout(regs, width)
    sortnet.emit_sorting_network(b, net, _elements(regs, n), key,
                                 regs["record"], _scratch_fn(regs, key, shared))
    return b.build()


def _exchange_stage(regs, width, n, net):
    b = CircuitBuilder.from_layout(regs, width)
    b.begin_stage("exchange")
    pos = net.positions()
    for i in range(n):
        b.swap_registers(regs[f"p{pos[2 * i]}_data"], regs[f"p{pos[2 * i + 1]}_data"])
    return b.build()


_middle_cache: dict = {}


def _middle_section(n, d, net, key, shared, quantum):
    ck = (n, d, net.cache_key(), shared, quantum)
    if ck not in _middle_cache:
        b, _, _, _ = _build_layout(n, d, net, quantum=quantum, shared_scratch=shared)
        base = b.build()
        regs, width = base.registers, base.width
        srt = _sort_stage(regs, width, n, net, key, shared)
        exch = _exchange_stage(regs, width, n, net)
        unsrt = relabel_stages(invert(srt), lambda s: s.replace("sort:", "unsort:"))
        _middle_cache[ck] = compose(compose(srt, exch), unsrt)
    return _middle_cache[ck]


def build_data_mover(n: int, d: int, net: ComparatorNetwork,
                     destinations=None, destinations_as_data: bool = False,
                     shared_scratch: bool = False) -> ReversibleCircuit:
    """Circuit sending the data register of node j_i into node i.

    With `destinations_as_data` the indices live in input registers j0..;
    otherwise `destinations` is a fixed permutation baked in with X gates.
    Output register x_i holds the input x[destinations[i]]; everything
    else returns to zero.
    """
    if n < 2 or d < 1:
        raise ValueError("need n >= 2 and d >= 1")
    if destinations_as_data:
        if destinations is not None:
            raise ValueError("quantum-destination circuits take no fixed permutation")
    else:
        destinations = list(destinations or [])
        if sorted(destinations) != list(range(n)):
            raise ValueError("destinations must form a permutation (duplicates rejected)")
    m = _address_bits(n)
    key = m + 1
    b, _, _, _ = _build_layout(n, d, net, quantum=destinations_as_data,
                               shared_scratch=shared_scratch)
    base = b.build()
    regs, width = base.registers, base.width
    fmt = _format_stage(regs, width, n, destinations, destinations_as_data)
    unfmt = _format_stage(regs, width, n, destinations, destinations_as_data,
                          final=True)
    # the sort/exchange/unsort block is permutation-independent, so it is
    # built once per (n, d, net) and shared between calls
    middle = _middle_section(n, d, net, key, shared_scratch, destinations_as_data)
    return compose(compose(fmt, middle), unfmt)


def describe_layout(n: int, d: int, net: ComparatorNetwork,
                    quantum: bool = True) -> PacketLayout:
    b, layout, _, _ = _build_layout(n, d, net, quantum, shared_scratch=False)
    return layout


# -- precomputed swap schedules ------------------------------------------------

@dataclass
class SwapSchedule:
    """Layers of disjoint register swaps realising a fixed permutation."""

    n: int
    d: int
    layers: list[list[tuple[int, int]]]

    @property
    def depth(self) -> int:
        return len(self.layers)


def compile_fixed_permutation(perm, net: ComparatorNetwork, d: int) -> SwapSchedule:
    """Replay the network on rank keys and keep only the swaps that fired.

    The resulting schedule moves whole d-bit registers along network
    edges; its depth never exceeds the network's and it needs no
    which-way storage at all.
    """
    perm = list(perm)
    n = net.wires
    if sorted(perm) != list(range(n)):
        raise ValueError("perm must be a permutation")
    pos_of = [0] * n
    for p, w in enumerate(net.positions()):
        pos_of[w] = p
    inv = [0] * n
    for v, w in enumerate(perm):
        inv[w] = v
    keys = [pos_of[inv[w]] for w in range(n)]
    layers = []
    for layer in net.layers:
        fired = []
        for a, b in layer:
            if keys[a] > keys[b]:
                keys[a], keys[b] = keys[b], keys[a]
                fired.append((a, b))
        if fired:
            layers.append(fired)
    return SwapSchedule(n, d, layers)


def route_complete_permutation(perm, d: int) -> SwapSchedule:
    """Any permutation as at most two layers of disjoint transpositions.

    Valid whenever every node pair is an edge; each cycle is split into
    two reflections.
    """
    perm = list(perm)
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise ValueError("perm must be a permutation")
    seen = [False] * n
    first: list[tuple[int, int]] = []
    second: list[tuple[int, int]] = []
    for start in range(n):
        if seen[start]:
            continue
        cycle = [start]
        seen[start] = True
        v = perm[start]
        while v != start:
            cycle.append(v)
            seen[v] = True
            v = perm[v]
        m = len(cycle)
        if m == 1:
            continue
        # perm acts as j -> j+1 along the cycle; that rotation is the
        # reflection j -> 1-j followed by j -> -j (both involutions)
        for j in range(m):
            k = (1 - j) % m
            if j < k:
                first.append((cycle[j], cycle[k]))
            k = (-j) % m
            if j < k:
                second.append((cycle[j], cycle[k]))
    layers = [l for l in (first, second) if l]
    return SwapSchedule(n, d, layers)


def apply_schedule(s: SwapSchedule, values):
    """Classical replay of the schedule on a value array."""
    vals = list(values)
    if len(vals) != s.n:
        raise ValueError("value count mismatch")
    for layer in s.layers:
        for a, b in layer:
            vals[a], vals[b] = vals[b], vals[a]
    return vals


def schedule_to_circuit(s: SwapSchedule) -> ReversibleCircuit:
    b = CircuitBuilder()
    regs = [b.add_register(f"r{i}", s.d) for i in range(s.n)]
    for li, layer in enumerate(s.layers):
        b.begin_stage(f"move:layer{li}")
        for u, v in layer:
            b.swap_registers(regs[u], regs[v])
    return b.build()
