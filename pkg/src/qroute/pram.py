"""Shared-memory lookup circuits: one query, or all nodes querying at once.

The parallel form handles arbitrary index patterns, duplicates included.
Packets (address, flag, target-data, memory-data) are sorted by (address,
flag) with q=0 < a=1, so every run of questions ends at the answer packet
holding the requested entry.  A doubling cascade then copies the entry
left through the run: pass k pairs positions at separation 2^k, an action
bit marks receiving packets, and a phase register remembers which pass
filled each packet so the whole thing can be undone after the copy step.
No early exit: every pass runs, keeping the circuit input-independent.
"""
from __future__ import annotations

import math

from . import sortnet
from .datamove import PacketLayout, _address_bits
from .revcirc import (CircuitBuilder, ReversibleCircuit, compose, flip_if_all,
                      int_to_bits, invert, relabel_stages)
from .sortnet import ComparatorNetwork


def gather_oracle(js, ys, xs):
    """Reference semantics: y_i ^= x[j_i]; js and xs pass through."""
    if not (len(js) == len(ys) == len(xs)):
        raise ValueError("register counts must agree")
    for j in js:
        if not (0 <= j < len(xs)):
            raise IndexError(f"index {j} out of range")
    return [y ^ xs[j] for j, y in zip(js, ys)]


# -- single lookup -------------------------------------------------------------

def build_single_lookup(n: int, d: int) -> ReversibleCircuit:
    """y ^= x[j] via a binary fan-out of j into one-hot leaf flags.

    Width O(n d); the tree is uncomputed so only j, y, x are live at the
    end.  n = 1 needs no tree at all.
    """
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    m = math.ceil(math.log2(n)) if n > 1 else 0
    b = CircuitBuilder()
    j = b.add_register("j", m)
    y = b.add_register("y", d)
    xs = [b.add_register(f"x{c}", d) for c in range(n)]
    if m == 0:
        b.begin_stage("fan")
        b.cnot_registers(xs[0], y)
        return b.build()
    tree = b.add_register("tree", (1 << (m + 1)) - 2, role="ancilla")

    def node(level, c):
        return tree[(1 << level) - 2 + c]

    decode = []

    def emit(g):
        b.extend([g])
        decode.append(g)

    b.begin_stage("decode")
    emit(("X", node(1, 0)))
    emit(("CNOT", j[0], node(1, 0)))
    emit(("CNOT", j[0], node(1, 1)))
    for level in range(2, m + 1):
        for c in range(1 << (level - 1)):
            parent = node(level - 1, c)
            left, right = node(level, 2 * c), node(level, 2 * c + 1)
            emit(("TOFFOLI", parent, j[level - 1], right))
            emit(("CNOT", parent, left))
            emit(("CNOT", right, left))
    b.begin_stage("fan")
    for c in range(n):
        for i in range(d):
            b.toffoli(node(m, c), xs[c][i], y[i])
    b.begin_stage("undecode")
    for g in reversed(decode):
        b.extend([g])
    return b.build()


# -- parallel lookup -----------------------------------------------------------

def _lookup_dims(n: int):
    m = _address_bits(n)
    key = m + 1
    n_phases = math.ceil(math.log2(2 * n))
    pp = math.ceil(math.log2(n_phases + 1))
    return m, key, n_phases, pp


def _lookup_layout(n: int, d: int, net: ComparatorNetwork, shared_scratch=False):
    if net.wires != 2 * n:
        raise ValueError(f"network sorts {net.wires} elements, need {2 * n}")
    m, key, n_phases, pp = _lookup_dims(n)
    b = CircuitBuilder()
    for i in range(n):
        b.add_register(f"j{i}", m)
    for i in range(n):
        b.add_register(f"y{i}", d)
    for i in range(n):
        b.add_register(f"x{i}", d)
    _packet_block(b, 2 * n, m, d, pp)
    b.add_register("record", net.size, role="ancilla")
    if shared_scratch:
        b.add_register("scratch", key, role="ancilla")
    else:
        b.add_register("scratch", key * 2 * n, role="ancilla")
    return b


def _packet_block(b: CircuitBuilder, count: int, m: int, d: int, pp: int):
    for l in range(count):
        b.add_register(f"p{l}_addr", m, role="ancilla")
        b.add_register(f"p{l}_flag", 1, role="ancilla")
        b.add_register(f"p{l}_tgt", d, role="ancilla")
        b.add_register(f"p{l}_mem", d, role="ancilla")
    for l in range(count):
        b.add_register(f"phase{l}", pp, role="ancilla")
        b.add_register(f"action{l}", 1, role="ancilla")
    per_packet = 2 * m + pp + 1
    b.add_register("cascade_scratch", count * per_packet, role="ancilla")


def _packet_elements(regs, count: int):
    return [regs[f"p{l}_addr"].bits() + regs[f"p{l}_flag"].bits()
            + regs[f"p{l}_tgt"].bits() + regs[f"p{l}_mem"].bits()
            for l in range(count)]


def _emit_cascade(b: CircuitBuilder, regs, n_packets: int, d: int, m: int,
                  pp: int, n_phases: int, order):
    """Doubling passes 0..n_phases-1 over sorted packet positions."""
    pool = regs["cascade_scratch"].bits()
    per_packet = 2 * m + pp + 1

    def scratch(pos):
        base = pos * per_packet
        block = pool[base:base + per_packet]
        return block[:m], block[m], block[m + 1:]  # xor, rnz, ladder

    def fields(pos):
        w = order[pos]
        return (regs[f"p{w}_addr"], regs[f"p{w}_flag"],
                regs[f"p{w}_mem"], regs[f"phase{pos}"], regs[f"action{pos}"])

    def set_action(l, r):
        addr_l, flag_l, _, phase_l, action_l = fields(l)
        addr_r, flag_r, _, phase_r, _ = fields(r)
        xor, rnz, ladder = scratch(l)
        for i in range(m):
            b.cnot(addr_l[i], xor[i])
            b.cnot(addr_r[i], xor[i])
        # rnz = "right side holds data": answer flag, or filled in an
        # earlier pass (non-zero phase)
        rnz_lits = [(flag_r[0], False)] + [(phase_r[i], False) for i in range(pp)]
        flip_if_all(b, rnz_lits, rnz, ladder)
        b.x(rnz)
        lits = ([(xor[i], False) for i in range(m)] + [(flag_l[0], False)]
                + [(phase_l[i], False) for i in range(pp)] + [(rnz, True)])
        flip_if_all(b, lits, action_l[0], ladder)
        b.x(rnz)
        flip_if_all(b, rnz_lits, rnz, ladder)
        for i in range(m):
            b.cnot(addr_l[i], xor[i])
            b.cnot(addr_r[i], xor[i])

    def copy_data(l, r, k):
        _, _, mem_l, phase_l, action_l = fields(l)
        mem_r = fields(r)[2]
        for i in range(d):
            b.toffoli(action_l[0], mem_r[i], mem_l[i])
        for i, bit in enumerate(int_to_bits(k + 1, pp)):
            if bit:
                b.cnot(action_l[0], phase_l[i])

    def reset_action(l, k):
        _, _, _, phase_l, action_l = fields(l)
        _, _, ladder = scratch(l)
        lits = [(phase_l[i], bit == 1)
                for i, bit in enumerate(int_to_bits(k + 1, pp))]
        flip_if_all(b, lits, action_l[0], ladder)

    for k in range(n_phases):
        b.begin_stage(f"cascade:phase{k}")
        step = 1 << k
        pairs = [(l, l + step) for l in range(n_packets - step)]
        even = [p for p in pairs if (p[0] >> k) & 1 == 0]
        odd = [p for p in pairs if (p[0] >> k) & 1 == 1]
        for l, r in even:
            set_action(l, r)
        for l, r in odd:
            set_action(l, r)
        for l, r in even:
            copy_data(l, r, k)
        for l, r in odd:
            copy_data(l, r, k)
        for l in range(n_packets):
            reset_action(l, k)
        b.end_stage()


def build_cascade(n: int, d: int, net: ComparatorNetwork | None = None) -> ReversibleCircuit:
    """Standalone cascade over 2n already-sorted packets (identity layout)."""
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    m, _, n_phases, pp = _lookup_dims(n)
    b = CircuitBuilder()
    _packet_block(b, 2 * n, m, d, pp)
    order = net.positions() if net is not None else list(range(2 * n))
    _emit_cascade(b, b.registers, 2 * n, d, m, pp, n_phases, order)
    return b.build()


def build_copy(n: int, d: int) -> ReversibleCircuit:
    """Depth-1 stage: every packet XORs its memory-data into its target-data."""
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    m, _, n_phases, pp = _lookup_dims(n)
    b = CircuitBuilder()
    _packet_block(b, 2 * n, m, d, pp)
    b.begin_stage("copy")
    for l in range(2 * n):
        b.cnot_registers(b.registers[f"p{l}_mem"], b.registers[f"p{l}_tgt"])
    return b.build()


def _pram_format(regs, width, n, final=False):
    b = CircuitBuilder.from_layout(regs, width)
    if not final:
        b.begin_stage("format")
        for i in range(n):
            b.write_constant(regs[f"p{2 * i}_addr"], i)
            b.x(regs[f"p{2 * i}_flag"][0])
            b.swap_registers(regs[f"x{i}"], regs[f"p{2 * i}_mem"])
            b.swap_registers(regs[f"j{i}"], regs[f"p{2 * i + 1}_addr"])
            b.swap_registers(regs[f"y{i}"], regs[f"p{2 * i + 1}_tgt"])
        return b.build()
    # data ends up duplicated across the answer packet's two data fields,
    # so the write-back takes two steps: relocate, then cancel the copy
    b.begin_stage("unformat:move")
    for i in range(n):
        b.swap_registers(regs[f"p{2 * i}_mem"], regs[f"x{i}"])
        b.swap_registers(regs[f"p{2 * i + 1}_addr"], regs[f"j{i}"])
        b.swap_registers(regs[f"p{2 * i + 1}_tgt"], regs[f"y{i}"])
    b.begin_stage("unformat:clear")
    for i in range(n):
        b.cnot_registers(regs[f"x{i}"], regs[f"p{2 * i}_tgt"])
        b.write_constant(regs[f"p{2 * i}_addr"], i)
        b.x(regs[f"p{2 * i}_flag"][0])
    return b.build()


def build_parallel_lookup(n: int, d: int, net: ComparatorNetwork | None = None,
                          shared_scratch: bool = False) -> ReversibleCircuit:
    """All n nodes query the shared array at once: y_i ^= x[j_i].

    Works for every basis input, duplicate indices included; every
    ancilla (packets, record, phase, action, scratch) ends at zero.
    """
    if n < 2 or d < 1:
        raise ValueError("need n >= 2 and d >= 1")
    if net is None:
        t = math.log2(2 * n)
        if t != int(t):
            raise ValueError("default network needs n to be a power of two")
        net = sortnet.bitonic_network(int(t))
    m, key, n_phases, pp = _lookup_dims(n)
    base = _lookup_layout(n, d, net, shared_scratch).build()
    regs, width = base.registers, base.width

    fmt = _pram_format(regs, width, n)
    unfmt = _pram_format(regs, width, n, final=True)

    b = CircuitBuilder.from_layout(regs, width)
    sortnet.emit_sorting_network(b, net, _packet_elements(regs, 2 * n), key,
                                 regs["record"],
                                 _scratch_fn(regs, key, shared_scratch))
    srt = b.build()
    unsrt = relabel_stages(invert(srt), lambda s: s.replace("sort:", "unsort:"))

    b = CircuitBuilder.from_layout(regs, width)
    _emit_cascade(b, regs, 2 * n, d, m, pp, n_phases, net.positions())
    casc = b.build()
    uncasc = relabel_stages(invert(casc), lambda s: s.replace("cascade:", "uncascade:"))

    b = CircuitBuilder.from_layout(regs, width)
    b.begin_stage("copy")
    for w in range(2 * n):
        b.cnot_registers(regs[f"p{w}_mem"], regs[f"p{w}_tgt"])
    cp = b.build()

    out = fmt
    for part in (srt, casc, cp, uncasc, unsrt, unfmt):
        out = compose(out, part)
    return out


def _scratch_fn(regs, key: int, shared: bool):
    pool = regs["scratch"].bits()
    if shared:
        return lambda w: pool
    return lambda w: pool[w * key:(w + 1) * key]


def describe_layout(n: int, d: int, net: ComparatorNetwork | None = None) -> PacketLayout:
    if net is None:
        net = sortnet.bitonic_network(int(math.log2(2 * n)))
    base = _lookup_layout(n, d, net).build()
    m = _lookup_dims(n)[0]
    return PacketLayout(n, d, m, True, base.registers, base.width)
