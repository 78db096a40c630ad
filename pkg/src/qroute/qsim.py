"""Dense statevector simulation for small widths, plus search dynamics.

Basis index convention matches the classical simulator: bit i of the flat
amplitude index is wire i.  All reversible-set gates are permutations, so
a circuit that is correct on every basis input is correct as a unitary;
this module supplies the quantum-side cross-checks and the Grover engine.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_CAP = 26

_SQ2 = 1.0 / math.sqrt(2.0)
_T_PHASE = np.exp(1j * math.pi / 4)


def zero_state(width: int) -> np.ndarray:
    psi = np.zeros(1 << width, dtype=complex)
    psi[0] = 1.0
    return psi


def basis_state(width: int, index: int) -> np.ndarray:
    psi = np.zeros(1 << width, dtype=complex)
    psi[index] = 1.0
    return psi


def _axis(width: int, q: int) -> int:
    # flat index is row-major over [2]*width with wire 0 as the lowest bit
    return width - 1 - q


def _idx(width: int, **fixed):
    sl = [slice(None)] * width
    for q, v in fixed.items():
        sl[_axis(width, int(q[1:]))] = v
    return tuple(sl)


def apply_gate(psi: np.ndarray, gate, width: int) -> np.ndarray:
    tag = gate[0]
    t = psi.reshape([2] * width)
    if tag == "X":
        a = _axis(width, gate[1])
        t = np.flip(t, axis=a)
    elif tag == "H":
        a = _axis(width, gate[1])
        lo = np.take(t, 0, axis=a)
        hi = np.take(t, 1, axis=a)
        t = np.stack(((lo + hi) * _SQ2, (lo - hi) * _SQ2), axis=a)
    elif tag in ("T", "S"):
        sl = _idx(width, **{f"q{gate[1]}": 1})
        t = t.copy()
        t[sl] = t[sl] * (_T_PHASE if tag == "T" else 1j)
    elif tag == "CZ":
        sl = _idx(width, **{f"q{gate[1]}": 1, f"q{gate[2]}": 1})
        t = t.copy()
        t[sl] = -t[sl]
    elif tag == "CNOT":
        c, x = gate[1], gate[2]
        t = t.copy()
        sl = _idx(width, **{f"q{c}": 1})
        t[sl] = np.flip(t[sl], axis=_axis(width - 1, x if x < c else x - 1)).copy()
    elif tag == "SWAP":
        a, b = _axis(width, gate[1]), _axis(width, gate[2])
        t = np.swapaxes(t, a, b).copy()
    elif tag == "TOFFOLI":
        c1, c2, x = gate[1], gate[2], gate[3]
        t = t.copy()
        sl = _idx(width, **{f"q{c1}": 1, f"q{c2}": 1})
        rest = sorted((c1, c2), reverse=True)
        ax = x - sum(1 for r in rest if r < x)
        t[sl] = np.flip(t[sl], axis=_axis(width - 2, ax)).copy()
    elif tag == "FREDKIN":
        c, a, b = gate[1], gate[2], gate[3]
        t = t.copy()
        sl = _idx(width, **{f"q{c}": 1})
        aa = a - (1 if c < a else 0)
        bb = b - (1 if c < b else 0)
        t[sl] = np.swapaxes(t[sl], _axis(width - 1, aa),
                            _axis(width - 1, bb)).copy()
    elif tag == "PHASEFLIP":
        bits, predicate = gate[1], gate[2]
        flat = t.reshape(-1).copy()
        idx = np.arange(flat.size)
        keys = np.zeros(flat.size, dtype=np.int64)
        for pos, b in enumerate(bits):
            keys |= ((idx >> b) & 1) << pos
        mask = np.fromiter((predicate(int(k)) for k in range(1 << len(bits))),
                           dtype=bool, count=1 << len(bits))
        flat[mask[keys]] *= -1
        return flat
    else:
        raise ValueError(f"unsupported gate {tag!r}")
    return t.reshape(-1)


def _gate_iter(circuit):
    if hasattr(circuit, "gates"):
        return circuit.width, list(circuit.gates)
    width, gates = circuit
    return width, list(gates)


def apply(circuit, psi: np.ndarray | None = None, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Apply a circuit (anything with .width and .gates) to a state."""
    width, gates = _gate_iter(circuit)
    if width > cap:
        raise ValueError(f"width {width} exceeds statevector cap {cap}")
    if psi is None:
        psi = zero_state(width)
    if psi.shape != (1 << width,):
        raise ValueError("state length does not match circuit width")
    for g in gates:
        psi = apply_gate(psi, g, width)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-12:
        raise AssertionError(f"norm drifted to {norm}")
    return psi


def _random_state(width: int, rng) -> np.ndarray:
    v = rng.normal(size=1 << width) + 1j * rng.normal(size=1 << width)
    return v / np.linalg.norm(v)


def equivalent(a, b, wire_permutation=None, tol: float = 1e-10,
               rng=None, samples: int = 5) -> bool:
    """True iff the two circuits agree as unitaries up to wire relabelling.

    Exhaustive over basis columns for width <= 10, randomized states above.
    `wire_permutation[i]` names b's wire carrying a's wire i.
    """
    wa, _ = _gate_iter(a)
    wb, _ = _gate_iter(b)
    if wire_permutation is None:
        wire_permutation = list(range(wa))
    if wb != wa or sorted(wire_permutation) != list(range(wa)):
        raise ValueError("widths must match after permutation")

    def relabel(x: int) -> int:
        out = 0
        for i in range(wa):
            if (x >> i) & 1:
                out |= 1 << wire_permutation[i]
        return out

    if wa <= 10:
        columns = [basis_state(wa, x) for x in range(1 << wa)]
        ins = list(range(1 << wa))
    else:
        if rng is None:
            rng = np.random.default_rng(0)
        columns = [_random_state(wa, rng) for _ in range(samples)]
        ins = None

    perm_idx = np.array([relabel(x) for x in range(1 << wa)])
    for i, col in enumerate(columns):
        out_a = apply(a, col.copy())
        col_b = np.zeros_like(col)
        col_b[perm_idx] = col  # same state on b's wire labels
        out_b = apply(b, col_b)
        back = out_b[perm_idx]
        if np.max(np.abs(out_a - back)) > tol:
            return False
    return True


@dataclass
class GroverResult:
    success_probability: float
    iterations: int
    n_items: int
    n_solutions: int
    no_solutions: bool = False


def grover_iterations(n_items: int, n_solutions: int) -> int:
    """Standard iteration count floor((pi/4) sqrt(N/M))."""
    if n_solutions <= 0:
        raise ValueError("need at least one solution")
    return int(math.floor((math.pi / 4) * math.sqrt(n_items / n_solutions)))


def grover_dynamics(predicate, n_items: int, iterations: int) -> GroverResult:
    """Run phase-oracle plus diffusion on the index register.

    Exact reflection dynamics: after k rounds the solution mass is
    sin^2((2k+1) asin(sqrt(M/N))).  With no solutions the state stays
    uniform and the result is flagged.
    """
    if n_items < 1 or n_items & (n_items - 1):
        raise ValueError("domain size must be a power of two")
    marked = np.fromiter((bool(predicate(x)) for x in range(n_items)),
                         dtype=bool, count=n_items)
    m = int(marked.sum())
    psi = np.full(n_items, 1.0 / math.sqrt(n_items))
    if m == 0:
        return GroverResult(0.0, iterations, n_items, 0, no_solutions=True)
    for _ in range(iterations):
        psi[marked] *= -1.0
        psi = 2.0 * psi.mean() - psi
    p = float(np.sum(psi[marked] ** 2))
    return GroverResult(p, iterations, n_items, m)


def grover_success_probability(n_items: int, n_solutions: int, iterations: int) -> float:
    """Closed form sin^2((2k+1) theta), sin^2 theta = M/N."""
    theta = math.asin(math.sqrt(n_solutions / n_items))
    return math.sin((2 * iterations + 1) * theta) ** 2
