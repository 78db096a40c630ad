"""Comparator networks, 0-1 verification, and reversible compilation.

A comparator is an ordered wire pair (a, b): after it fires, the smaller
element sits on wire a.  Ascending comparators have a < b; the bitonic
construction also needs descending ones (a > b), which is what keeps every
comparator on a hypercube edge.  `order` lists the wire holding each rank
once sorting finishes (identity unless the network sorts into snake order).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .revcirc import CircuitBuilder, Register, ReversibleCircuit
from .topology import Topology, snake_order


@dataclass
class ComparatorNetwork:
    wires: int
    layers: list[list[tuple[int, int]]]
    order: list[int] | None = None  # wire at each sorted position

    def __post_init__(self):
        if self.wires <= 0:
            raise ValueError("need at least one wire")
        for layer in self.layers:
            touched = set()
            for a, b in layer:
                if a == b or not (0 <= a < self.wires and 0 <= b < self.wires):
                    raise ValueError(f"bad comparator ({a},{b})")
                if a in touched or b in touched:
                    raise ValueError("comparators within a layer must be disjoint")
                touched.update((a, b))
        if self.order is not None and sorted(self.order) != list(range(self.wires)):
            raise ValueError("order must be a permutation of the wires")

    @property
    def depth(self) -> int:
        return len(self.layers)

    def comparators(self) -> list[tuple[int, int]]:
        return [c for layer in self.layers for c in layer]

    @property
    def size(self) -> int:
        return sum(len(layer) for layer in self.layers)

    def positions(self) -> list[int]:
        return self.order if self.order is not None else list(range(self.wires))

    def cache_key(self):
        return (self.wires, tuple(tuple(layer) for layer in self.layers),
                tuple(self.order) if self.order else None)


@dataclass
class SortRecord:
    """Which-way bits, one per comparator in network order."""

    swap_bits: list[int] = field(default_factory=list)

    def __len__(self):
        return len(self.swap_bits)


def bitonic_network(t: int) -> ComparatorNetwork:
    """Merge-based network on 2^t wires; every comparator joins wires
    differing in exactly one bit, so it sits on hypercube edges."""
    if t < 1:
        raise ValueError("t must be >= 1")
    n = 1 << t
    layers = []
    for s in range(1, t + 1):
        for j in range(s - 1, -1, -1):
            layer = []
            for x in range(n):
                if x & (1 << j):
                    continue
                y = x | (1 << j)
                if x & (1 << s):
                    layer.append((y, x))  # descending half of the merge
                else:
                    layer.append((x, y))
            layers.append(layer)
    return ComparatorNetwork(n, layers)


def oets_network(n: int) -> ComparatorNetwork:
    """Odd-even transposition sort: n alternating layers of adjacent swaps."""
    if n < 2:
        raise ValueError("n must be >= 2")
    layers = []
    for step in range(n):
        layer = [(c, c + 1) for c in range(step % 2, n - 1, 2)]
        layers.append(layer)
    return ComparatorNetwork(n, layers)


def grid_network(rows: int, cols: int) -> ComparatorNetwork:
    """Shear sort on a rows x cols mesh, output in snake order.

    Alternates full row sorts (direction following the snake) and column
    sorts for ceil(log2 rows) rounds, then one final row phase.  Depth is
    O(sqrt(N) log N) for square meshes, one log factor above the best
    known mesh sorters.
    """
    if rows <= 0 or cols <= 0 or rows * cols < 2:
        raise ValueError("grid must hold at least two wires")
    if rows == 1:
        return oets_network(cols)
    if cols == 1:
        return oets_network(rows)

    def idx(r, c):
        return r * cols + c

    layers: list[list[tuple[int, int]]] = []

    def row_phase():
        for step in range(cols):
            layer = []
            for r in range(rows):
                for c in range(step % 2, cols - 1, 2):
                    if r % 2 == 0:
                        layer.append((idx(r, c), idx(r, c + 1)))
                    else:
                        layer.append((idx(r, c + 1), idx(r, c)))
            if layer:
                layers.append(layer)

    def col_phase():
        for step in range(rows):
            layer = []
            for c in range(cols):
                for r in range(step % 2, rows - 1, 2):
                    layer.append((idx(r, c), idx(r + 1, c)))
            if layer:
                layers.append(layer)

    for _ in range(max(1, math.ceil(math.log2(rows)))):
        row_phase()
        col_phase()
    row_phase()
    return ComparatorNetwork(rows * cols, layers, order=snake_order(rows, cols))


# -- classical replay (the independent oracle) -------------------------------

def replay(net: ComparatorNetwork, values, key=None):
    """Run the network on a Python list; returns (output, swap_bits).

    Strict comparison: equal keys never swap, so the swap record is a
    deterministic function of the input.
    """
    if len(values) != net.wires:
        raise ValueError("value count must match wire count")
    vals = list(values)
    keyf = key if key is not None else (lambda v: v)
    swaps = []
    for layer in net.layers:
        for a, b in layer:
            if keyf(vals[a]) > keyf(vals[b]):
                vals[a], vals[b] = vals[b], vals[a]
                swaps.append(1)
            else:
                swaps.append(0)
    return vals, SortRecord(swaps)


# -- 0-1 verification ---------------------------------------------------------

def _exhaustive_planes(wires: int):
    count = 1 << wires
    full = (1 << count) - 1
    planes = []
    for w in range(wires):
        block = 1 << w
        planes.append((full // ((1 << block) + 1)) << block)
    return planes, count


def _pack_vectors(vectors, wires):
    planes = [0] * wires
    for i, vec in enumerate(vectors):
        for w in range(wires):
            if (vec >> w) & 1:
                planes[w] |= 1 << i
    return planes, len(vectors)


def verify_network(net: ComparatorNetwork, rng=None):
    """0-1 check: exhaustive for <= 20 wires, directed plus random above.

    Returns (ok, counterexample) where the counterexample is a binary
    input list the network fails to sort, or None.
    """
    T = net.wires
    if T == 1:
        return True, None
    if T <= 20:
        planes, count = _exhaustive_planes(T)
        vectors = None
    else:
        mask = (1 << T) - 1
        vectors = []
        for ones in range(T + 1):  # block patterns, both orientations
            vectors.append(((1 << ones) - 1) << (T - ones))
            vectors.append((1 << ones) - 1)
        alt = sum(1 << i for i in range(0, T, 2))
        vectors += [alt, alt ^ mask]
        if rng is None:
            rng = np.random.default_rng(0)
        chunks = (T + 29) // 30
        for _ in range(4096):
            v = 0
            for c in range(chunks):
                v |= int(rng.integers(0, 1 << 30)) << (30 * c)
            vectors.append(v & mask)
        planes, count = _pack_vectors(vectors, T)

    for layer in net.layers:
        for a, b in layer:
            lo = planes[a] & planes[b]
            hi = planes[a] | planes[b]
            planes[a], planes[b] = lo, hi
    pos = net.positions()
    for p in range(T - 1):
        bad = planes[pos[p]] & ~planes[pos[p + 1]]
        if bad:
            i = (bad & -bad).bit_length() - 1
            if vectors is None:
                vec = i
            else:
                vec = vectors[i]
            return False, [(vec >> w) & 1 for w in range(T)]
    return True, None


# -- graph locality -----------------------------------------------------------

def default_assignment(wires: int, topo: Topology) -> list[int]:
    """Wire i lives at node i // w when each node hosts w consecutive wires."""
    if wires % topo.n:
        raise ValueError("wires must divide evenly across nodes")
    w = wires // topo.n
    return [i // w for i in range(wires)]


def locality_check(net: ComparatorNetwork, topo: Topology, assign=None) -> bool:
    """True iff every comparator joins wires on equal or adjacent nodes."""
    if assign is None:
        assign = default_assignment(net.wires, topo)
    if callable(assign):
        assign = [assign(i) for i in range(net.wires)]
    if len(assign) != net.wires:
        raise ValueError("assignment must cover every wire")
    for a, b in net.comparators():
        na, nb = assign[a], assign[b]
        if na != nb and not topo.has_edge(na, nb):
            return False
    return True


# -- reversible compilation ---------------------------------------------------

def emit_greater_than(b: CircuitBuilder, a_bits, b_bits, out: int, scratch):
    """out ^= (A > B) for MSB-first unsigned keys; scratch returns to zero.

    Ripple scan from the most significant bit: linear gate count, depth
    O(k).  Temporarily XORs A into B and restores it.
    """
    k = len(a_bits)
    if k != len(b_bits):
        raise ValueError("key width mismatch")
    for i in range(k):
        b.cnot(a_bits[i], b_bits[i])  # b now holds the difference bits
    b.toffoli(a_bits[0], b_bits[0], out)
    if k > 1:
        if len(scratch) < k:
            raise ValueError(f"need {k} scratch bits")
        s = scratch[:k - 1]
        t = scratch[k - 1]
        ladder = []

        def emit(g):
            b.extend([g])
            ladder.append(g)

        emit(("CNOT", b_bits[0], s[0]))
        emit(("X", s[0]))
        for m in range(1, k):
            b.toffoli(a_bits[m], b_bits[m], t)
            b.toffoli(s[m - 1], t, out)
            b.toffoli(a_bits[m], b_bits[m], t)
            if m < k - 1:
                emit(("X", b_bits[m]))
                emit(("TOFFOLI", s[m - 1], b_bits[m], s[m]))
                emit(("X", b_bits[m]))
        for g in reversed(ladder):
            b.extend([g])
    for i in range(k):
        b.cnot(a_bits[i], b_bits[i])


def emit_comparator(b: CircuitBuilder, elem_a, elem_b, key_bits: int,
                    record_bit: int, scratch):
    """Strict comparator: record := (key_a > key_b), swap elements on it."""
    emit_greater_than(b, elem_a[:key_bits], elem_b[:key_bits], record_bit, scratch)
    for i in range(len(elem_a)):
        b.fredkin(record_bit, elem_a[i], elem_b[i])


def emit_sorting_network(b: CircuitBuilder, net: ComparatorNetwork, elements,
                         key_bits: int, record: Register, scratch_for_wire,
                         stage_prefix: str = "sort"):
    """Emit the whole network over per-wire element bit lists.

    `elements[w]` is the bit list of wire w (key bits first), `record`
    supplies one fresh bit per comparator, `scratch_for_wire(w)` yields the
    scratch pool owned by wire w (disjoint within a layer because
    comparators are).
    """
    idx = 0
    for li, layer in enumerate(net.layers):
        b.begin_stage(f"{stage_prefix}:layer{li}")
        for a, bb in layer:
            emit_comparator(b, elements[a], elements[bb], key_bits,
                            record[idx], scratch_for_wire(min(a, bb)))
            idx += 1
        b.end_stage()
    return idx


def compile_reversible_sort(net: ComparatorNetwork, key_bits: int,
                            payload_bits: int = 0,
                            shared_scratch: bool = False) -> ReversibleCircuit:
    """Compile the network into a reversible circuit over full elements.

    Elements are key_bits+payload_bits wide (key first, MSB-first).  Each
    comparator writes one record bit: 1 iff it exchanged its inputs.
    `shared_scratch` trades comparator parallelism for minimal width.
    """
    if key_bits < 1:
        raise ValueError("key_bits must be >= 1")
    if payload_bits < 0:
        raise ValueError("payload_bits must be >= 0")
    b = CircuitBuilder()
    width = key_bits + payload_bits
    elems = [b.add_register(f"elem{w}", width) for w in range(net.wires)]
    record = b.add_register("record", net.size, role="ancilla")
    if shared_scratch:
        pool = b.add_register("scratch", key_bits, role="ancilla")
        scratch_for = lambda w: pool.bits()
    else:
        pool = b.add_register("scratch", key_bits * net.wires, role="ancilla")
        scratch_for = lambda w: pool.bits()[w * key_bits:(w + 1) * key_bits]
    elements = [e.bits() for e in elems]
    emit_sorting_network(b, net, elements, key_bits, record, scratch_for)
    return b.build()


def extract_record(c: ReversibleCircuit, output_state: int) -> SortRecord:
    reg = c.registers["record"]
    return SortRecord([(output_state >> reg[i]) & 1 for i in range(reg.size)])


# -- serialisation -------------------------------------------------------------

def to_json(net: ComparatorNetwork) -> str:
    obj = {"wires": net.wires, "layers": [[list(c) for c in layer] for layer in net.layers]}
    if net.order is not None:
        obj["order"] = net.order
    return json.dumps(obj)


def from_json(text: str) -> ComparatorNetwork:
    obj = json.loads(text)
    layers = [[(int(a), int(b)) for a, b in layer] for layer in obj["layers"]]
    return ComparatorNetwork(int(obj["wires"]), layers, obj.get("order"))
