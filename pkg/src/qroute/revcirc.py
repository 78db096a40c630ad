"""Reversible circuit IR, bit-parallel simulation, and cost metrics.

Gates are flat tuples ("CNOT", control, target) over the self-inverse set
{X, CNOT, TOFFOLI, SWAP, FREDKIN}.  Simulation packs independent inputs
into per-wire Python-int bit planes, so a single pass over the gate list
runs an arbitrarily large batch; a million-gate circuit over a thousand
inputs takes well under a second.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

GATE_ARITY = {"X": 1, "CNOT": 2, "TOFFOLI": 3, "SWAP": 2, "FREDKIN": 3}


@dataclass(frozen=True)
class Register:
    """Named contiguous bit range.  Bit 0 is the most significant."""

    name: str
    start: int
    size: int
    role: str = "io"  # "io" or "ancilla"

    def __getitem__(self, i: int) -> int:
        if not (0 <= i < self.size):
            raise IndexError(f"bit {i} out of register {self.name}")
        return self.start + i

    def __len__(self) -> int:
        return self.size

    def bits(self) -> list[int]:
        return list(range(self.start, self.start + self.size))


def int_to_bits(value: int, size: int) -> list[int]:
    """MSB-first bit list of a nonnegative value."""
    if value < 0 or value >> size:
        raise ValueError(f"value {value} does not fit in {size} bits")
    return [(value >> (size - 1 - i)) & 1 for i in range(size)]


def bits_to_int(bits) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | (b & 1)
    return out


@dataclass
class Metrics:
    depth: int
    size: int
    width: int
    stage_depth: int = 0
    stages: list[tuple[str, int, int]] = field(default_factory=list)  # (name, gates, depth)


class ReversibleCircuit:
    """Immutable-by-convention gate list with timeslice levels and stages.

    `levels[i]` is the timeslice of gate i; gates sharing a level always
    have disjoint support.  `stages` are coarse named spans (comparator
    layers, cascade phases, formatting steps) used for stage-depth
    accounting.
    """

    def __init__(self, width, gates, levels=None, stages=None, registers=None):
        self.width = width
        self.gates = gates
        self.levels = levels if levels is not None else _asap_levels(width, gates)
        self.stages = stages or []
        self.registers: dict[str, Register] = registers or {}

    @property
    def depth(self) -> int:
        return (max(self.levels) + 1) if self.levels else 0

    @property
    def size(self) -> int:
        return len(self.gates)

    def register(self, name: str) -> Register:
        return self.registers[name]

    def io_registers(self) -> list[Register]:
        return [r for r in self.registers.values() if r.role == "io"]

    def ancilla_registers(self) -> list[Register]:
        return [r for r in self.registers.values() if r.role == "ancilla"]

    def timeslices(self) -> list[list[int]]:
        """Gate indices grouped by level."""
        out: list[list[int]] = [[] for _ in range(self.depth)]
        for i, lv in enumerate(self.levels):
            out[lv].append(i)
        return out


def _asap_levels(width: int, gates) -> list[int]:
    depth_at = [0] * width
    levels = []
    for g in gates:
        bits = g[1:]
        lv = max(depth_at[b] for b in bits)
        levels.append(lv)
        nxt = lv + 1
        for b in bits:
            depth_at[b] = nxt
    return levels


class CircuitBuilder:
    """Accumulates registers and gates, then freezes into a circuit."""

    def __init__(self):
        self._width = 0
        self._gates: list[tuple] = []
        self._registers: dict[str, Register] = {}
        self._stages: list[tuple[str, int, int]] = []
        self._stage_name: str | None = None
        self._stage_start = 0

    @classmethod
    def from_layout(cls, registers: dict[str, Register], width: int) -> "CircuitBuilder":
        b = cls()
        b._registers = dict(registers)
        b._width = width
        return b

    @property
    def width(self) -> int:
        return self._width

    @property
    def registers(self) -> dict[str, Register]:
        return self._registers

    def add_register(self, name: str, size: int, role: str = "io") -> Register:
        if name in self._registers:
            raise ValueError(f"duplicate register {name!r}")
        if size < 0:
            raise ValueError("register size must be nonnegative")
        reg = Register(name, self._width, size, role)
        self._registers[name] = reg
        self._width += size
        return reg

    # -- stages ----------------------------------------------------------

    def begin_stage(self, name: str):
        self.end_stage()
        self._stage_name = name
        self._stage_start = len(self._gates)

    def end_stage(self):
        if self._stage_name is not None:
            if len(self._gates) > self._stage_start:
                self._stages.append((self._stage_name, self._stage_start, len(self._gates)))
            self._stage_name = None

    # -- gates -----------------------------------------------------------

    def _check(self, *bits):
        for b in bits:
            if not (0 <= b < self._width):
                raise ValueError(f"bit {b} out of range (width {self._width})")
        if len(set(bits)) != len(bits):
            raise ValueError(f"gate bits must be distinct, got {bits}")

    def x(self, a):
        self._check(a)
        self._gates.append(("X", a))

    def cnot(self, c, t):
        self._check(c, t)
        self._gates.append(("CNOT", c, t))

    def toffoli(self, c1, c2, t):
        self._check(c1, c2, t)
        self._gates.append(("TOFFOLI", c1, c2, t))

    def swap(self, a, b):
        self._check(a, b)
        self._gates.append(("SWAP", a, b))

    def fredkin(self, c, a, b):
        self._check(c, a, b)
        self._gates.append(("FREDKIN", c, a, b))

    def swap_registers(self, ra: Register, rb: Register):
        if ra.size != rb.size:
            raise ValueError("register size mismatch")
        for i in range(ra.size):
            self.swap(ra[i], rb[i])

    def cnot_registers(self, src: Register, dst: Register):
        if src.size != dst.size:
            raise ValueError("register size mismatch")
        for i in range(src.size):
            self.cnot(src[i], dst[i])

    def write_constant(self, reg: Register, value: int):
        """X gates realising |0..0> -> |value>; self-inverse."""
        for i, bit in enumerate(int_to_bits(value, reg.size)):
            if bit:
                self.x(reg[i])

    def extend(self, gates):
        for g in gates:
            self._check(*g[1:])
            self._gates.append(g)

    def build(self) -> ReversibleCircuit:
        self.end_stage()
        return ReversibleCircuit(self._width, self._gates,
                                 _asap_levels(self._width, self._gates),
                                 self._stages, self._registers)


# -- predicate gadget ------------------------------------------------------

def flip_if_all(b: CircuitBuilder, literals, target: int, scratch) -> None:
    """Flip `target` iff every literal holds; scratch returns to zero.

    `literals` is a list of (bit, wanted) pairs; wanted False tests for the
    bit being 0.  Needs len(literals)-2 scratch bits (none for <= 2
    literals).  Scratch must be zero on entry.
    """
    if not literals:
        raise ValueError("need at least one literal")
    neg = [bit for bit, wanted in literals if not wanted]

    def core():
        bits = [bit for bit, _ in literals]
        if len(bits) == 1:
            b.cnot(bits[0], target)
            return
        if len(bits) == 2:
            b.toffoli(bits[0], bits[1], target)
            return
        need = len(bits) - 2
        if len(scratch) < need:
            raise ValueError(f"need {need} scratch bits, have {len(scratch)}")
        chain = []
        b.toffoli(bits[0], bits[1], scratch[0])
        chain.append(("TOFFOLI", bits[0], bits[1], scratch[0]))
        acc = scratch[0]
        for i, bit in enumerate(bits[2:-1], start=1):
            b.toffoli(acc, bit, scratch[i])
            chain.append(("TOFFOLI", acc, bit, scratch[i]))
            acc = scratch[i]
        b.toffoli(acc, bits[-1], target)
        for g in reversed(chain):
            b.extend([g])

    for bit in neg:
        b.x(bit)
    core()
    for bit in neg:
        b.x(bit)


# -- simulation ------------------------------------------------------------

def _run_planes(gates, planes, mask):
    p = planes
    for g in gates:
        tag = g[0]
        if tag == "TOFFOLI":
            p[g[3]] ^= p[g[1]] & p[g[2]]
        elif tag == "CNOT":
            p[g[2]] ^= p[g[1]]
        elif tag == "FREDKIN":
            c, a, b = g[1], g[2], g[3]
            t = (p[a] ^ p[b]) & p[c]
            p[a] ^= t
            p[b] ^= t
        elif tag == "X":
            p[g[1]] ^= mask
        else:  # SWAP
            a, b = g[1], g[2]
            p[a], p[b] = p[b], p[a]
    return p


def _ints_to_planes(inputs: list[int], width: int) -> list[int]:
    nbytes = (width + 7) // 8
    buf = b"".join(x.to_bytes(nbytes, "little") for x in inputs)
    mat = np.frombuffer(buf, dtype=np.uint8).reshape(len(inputs), nbytes)
    bits = np.unpackbits(mat, axis=1, bitorder="little")[:, :width]
    cols = np.packbits(bits.T, axis=1, bitorder="little")
    return [int.from_bytes(col.tobytes(), "little") for col in cols]


def _planes_to_ints(planes: list[int], count: int) -> list[int]:
    nbytes = (count + 7) // 8
    buf = b"".join(p.to_bytes(nbytes, "little") for p in planes)
    mat = np.frombuffer(buf, dtype=np.uint8).reshape(len(planes), nbytes)
    bits = np.unpackbits(mat, axis=1, bitorder="little")[:, :count]
    rows = np.packbits(bits.T, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in rows]


def simulate_ints(c: ReversibleCircuit, inputs: list[int]) -> list[int]:
    """Run a batch; each input/output integer has bit i = wire i."""
    if not inputs:
        return []
    for x in inputs:
        if x < 0 or x >> c.width:
            raise ValueError("input does not fit circuit width")
    planes = _ints_to_planes(inputs, c.width)
    mask = (1 << len(inputs)) - 1
    _run_planes(c.gates, planes, mask)
    return _planes_to_ints(planes, len(inputs))


def simulate(c: ReversibleCircuit, input_bits) -> list[int]:
    """Apply the circuit to one basis input given as a bit list (wire order)."""
    bits = list(input_bits)
    if len(bits) != c.width:
        raise ValueError(f"expected {c.width} bits, got {len(bits)}")
    x = sum((b & 1) << i for i, b in enumerate(bits))
    y = simulate_ints(c, [x])[0]
    return [(y >> i) & 1 for i in range(c.width)]


def encode_state(c: ReversibleCircuit, values: dict[str, int]) -> int:
    """Pack register values (MSB-first fields) into a wire bitmask."""
    state = 0
    for name, value in values.items():
        reg = c.registers[name]
        for i, bit in enumerate(int_to_bits(value, reg.size)):
            if bit:
                state |= 1 << reg[i]
    return state


def decode_state(c: ReversibleCircuit, state: int, names=None) -> dict[str, int]:
    out = {}
    for name in (names if names is not None else c.registers):
        reg = c.registers[name]
        out[name] = bits_to_int((state >> reg[i]) & 1 for i in range(reg.size))
    return out


def encode_batch(c: ReversibleCircuit, assignments: list[dict[str, int]]) -> list[int]:
    return [encode_state(c, a) for a in assignments]


def decode_register_batch(c: ReversibleCircuit, outputs: list[int], name: str) -> list[int]:
    reg = c.registers[name]
    return [bits_to_int((y >> reg[i]) & 1 for i in range(reg.size)) for y in outputs]


def ancilla_mask(c: ReversibleCircuit) -> int:
    """Bitmask of every wire not belonging to an io register."""
    io = 0
    for reg in c.io_registers():
        for b in reg.bits():
            io |= 1 << b
    return ((1 << c.width) - 1) & ~io


# -- structural operations ---------------------------------------------------

def invert(c: ReversibleCircuit) -> ReversibleCircuit:
    """Reverse the gate list; every gate in the set is self-inverse."""
    d = c.depth
    gates = list(reversed(c.gates))
    levels = [d - 1 - lv for lv in reversed(c.levels)]
    n = len(c.gates)
    stages = [(name, n - hi, n - lo) for name, lo, hi in reversed(c.stages)]
    return ReversibleCircuit(c.width, gates, levels, stages, dict(c.registers))


def compose(a: ReversibleCircuit, b: ReversibleCircuit, wire_map=None,
            width: int | None = None) -> ReversibleCircuit:
    """Circuit running a then b, with b's wires relocated via wire_map.

    Timeslices are concatenated without repacking across the boundary.
    """
    if wire_map is None:
        wire_map = list(range(b.width))
    wire_map = list(wire_map)
    if len(wire_map) != b.width:
        raise ValueError("wire map must cover every wire of b")
    if len(set(wire_map)) != len(wire_map):
        raise ValueError("wire map must be injective")
    total = width if width is not None else max([a.width] + [w + 1 for w in wire_map])
    if total < a.width or any(w >= total for w in wire_map):
        raise ValueError("composite width overflow")

    gates = list(a.gates)
    for g in b.gates:
        gates.append((g[0], *(wire_map[x] for x in g[1:])))
    da = a.depth
    levels = list(a.levels) + [lv + da for lv in b.levels]
    na = len(a.gates)
    stages = list(a.stages) + [(name, lo + na, hi + na) for name, lo, hi in b.stages]
    registers = dict(a.registers)
    for name, reg in b.registers.items():
        if name in registers:
            continue
        mapped = [wire_map[bit] for bit in reg.bits()]
        # keep only registers that remain contiguous under the map
        if mapped and mapped == list(range(mapped[0], mapped[0] + reg.size)):
            registers[name] = Register(name, mapped[0], reg.size, reg.role)
    return ReversibleCircuit(total, gates, levels, stages, registers)


def repack(c: ReversibleCircuit) -> ReversibleCircuit:
    """Greedy re-levelling; never increases depth, preserves semantics."""
    return ReversibleCircuit(c.width, list(c.gates), _asap_levels(c.width, c.gates),
                             list(c.stages), dict(c.registers))


def relabel_stages(c: ReversibleCircuit, fn) -> ReversibleCircuit:
    stages = [(fn(name), lo, hi) for name, lo, hi in c.stages]
    return ReversibleCircuit(c.width, c.gates, c.levels, stages, c.registers)


def metrics(c: ReversibleCircuit) -> Metrics:
    """Exact depth/size/width plus per-stage breakdown when stages exist."""
    stages = []
    for name, lo, hi in c.stages:
        span = c.levels[lo:hi]
        stages.append((name, hi - lo, max(span) - min(span) + 1 if span else 0))
    return Metrics(depth=c.depth, size=c.size, width=c.width,
                   stage_depth=len(c.stages), stages=stages)


# -- serialisation -----------------------------------------------------------

def to_json(c: ReversibleCircuit) -> str:
    return json.dumps({
        "width": c.width,
        "gates": [{"g": g[0], "bits": list(g[1:])} for g in c.gates],
        "labels": {name: [r.start, r.size, r.role] for name, r in c.registers.items()},
        "stages": [[name, lo, hi] for name, lo, hi in c.stages],
    })


def from_json(text: str) -> ReversibleCircuit:
    obj = json.loads(text)
    width = int(obj["width"])
    gates = []
    for item in obj["gates"]:
        tag = item["g"]
        bits = tuple(int(x) for x in item["bits"])
        if tag not in GATE_ARITY or len(bits) != GATE_ARITY[tag]:
            raise ValueError(f"bad gate record {item}")
        gates.append((tag, *bits))
    registers = {name: Register(name, int(s), int(n), role)
                 for name, (s, n, role) in obj.get("labels", {}).items()}
    stages = [(name, int(lo), int(hi)) for name, lo, hi in obj.get("stages", [])]
    return ReversibleCircuit(width, gates, None, stages, registers)
