"""Search applications built on the lookup circuits, desk scale.

Oracles are real reversible circuits (lookup, predicate, lookup again) and
are verified exhaustively against the abstract predicate before any search
dynamics run; that check is what licenses replacing the full register-level
simulation with exact success-probability dynamics on the two-dimensional
span of the flat state and the solution subspace.  Costs are tracked in
stage-depth units (comparator layers, doubling passes, oracle calls), not
wall clock.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import pram, qsim, sortnet
from .revcirc import (CircuitBuilder, ReversibleCircuit, ancilla_mask, compose,
                      decode_register_batch, encode_state, flip_if_all,
                      int_to_bits, metrics, simulate_ints)


def _bits_for(n: int) -> int:
    return max(1, math.ceil(math.log2(n))) if n > 1 else 1


@dataclass
class DatabaseInstance:
    """N entries of d bits each, optionally with a function table for
    collision problems (promised 1-1 or 2-1)."""

    entries: list[int]
    d: int
    f_table: list[int] | None = None

    def __post_init__(self):
        for v in self.entries:
            if v < 0 or v >> self.d:
                raise ValueError("entry does not fit d bits")
        if self.f_table is not None and len(self.f_table) != len(self.entries):
            raise ValueError("function table length mismatch")

    @property
    def n(self) -> int:
        return len(self.entries)


@dataclass
class CostLedger:
    """Monotone counters accumulated over one run."""

    oracle_calls: int = 0
    pram_calls: int = 0
    stage_depth: int = 0
    width: int = 0
    amp_rounds: int = 0
    per_round_stage_depth: int = 0
    grover_iterations: int = 0
    padded_iterations: int = 0


@dataclass
class SearchOutcome:
    kind: str                      # "pair" | "distinct" | "one-to-one"
    pair: tuple[int, int] | None
    ledger: CostLedger
    seed: int | None = None


# -- predicate circuits ---------------------------------------------------------

def predicate_equals_constant(d: int, value: int) -> ReversibleCircuit:
    """out ^= (entry == value) for a single d-bit entry."""
    b = CircuitBuilder()
    inp = b.add_register("in", d)
    out = b.add_register("out", 1)
    scr = b.add_register("pscratch", max(0, d - 2), role="ancilla")
    lits = [(inp[i], bit == 1) for i, bit in enumerate(int_to_bits(value, d))]
    flip_if_all(b, lits, out[0], scr.bits())
    return b.build()


def predicate_entries_equal(d: int) -> ReversibleCircuit:
    """out ^= (first entry == second entry) for a pair of d-bit entries."""
    b = CircuitBuilder()
    inp = b.add_register("in", 2 * d)
    out = b.add_register("out", 1)
    scr = b.add_register("pscratch", max(0, d - 2), role="ancilla")
    for i in range(d):
        b.cnot(inp[i], inp[d + i])
    flip_if_all(b, [(inp[d + i], False) for i in range(d)], out[0], scr.bits())
    for i in range(d):
        b.cnot(inp[i], inp[d + i])
    return b.build()


def predicate_constant(r_times_d: int, value: bool) -> ReversibleCircuit:
    b = CircuitBuilder()
    b.add_register("in", r_times_d)
    out = b.add_register("out", 1)
    if value:
        b.x(out[0])
    return b.build()


def evaluate_predicate(alpha: ReversibleCircuit, values: list[int], d: int, r: int) -> list[int]:
    """Truth values of the predicate circuit on a batch of entry tuples,
    each given as a packed r*d-bit integer."""
    states = [encode_state(alpha, {"in": v}) for v in values]
    outs = simulate_ints(alpha, states)
    return decode_register_batch(alpha, outs, "out")


def pack_tuple(entry_values, d: int) -> int:
    out = 0
    for v in entry_values:
        out = (out << d) | v
    return out


# -- oracle composition ----------------------------------------------------------

def compose_oracle(alpha: ReversibleCircuit, n: int, d: int, r: int = 1) -> ReversibleCircuit:
    """Load r entries by index, test them, unload: the verified search oracle.

    Layout: index registers j0..j{r-1}, zero-initialised load registers,
    one target bit, the n-entry array, shared decode-tree scratch.  Load
    registers and scratch return to zero on every basis input.
    """
    if r < 1 or n < 2 or d < 1:
        raise ValueError("need r >= 1, n >= 2, d >= 1")
    if "in" not in alpha.registers or alpha.registers["in"].size != r * d:
        raise ValueError("predicate width mismatch: expected r*d input bits")
    if "out" not in alpha.registers or alpha.registers["out"].size != 1:
        raise ValueError("predicate must expose a single target bit")
    m = _bits_for(n)
    b = CircuitBuilder()
    for rho in range(r):
        b.add_register(f"j{rho}", m)
    loads = [b.add_register(f"load{rho}", d, role="ancilla") for rho in range(r)]
    target = b.add_register("target", 1)
    for c in range(n):
        b.add_register(f"x{c}", d)
    tree = b.add_register("tree", (1 << (m + 1)) - 2, role="ancilla")
    extra = alpha.width - (r * d + 1)
    ascratch = b.add_register("alpha_scratch", max(0, extra), role="ancilla")
    base = b.build()

    lookup = pram.build_single_lookup(n, d)

    def lookup_map(rho):
        wm = [0] * lookup.width
        lr = lookup.registers
        for i, bit in enumerate(lr["j"].bits()):
            wm[bit] = base.registers[f"j{rho}"][i]
        for i, bit in enumerate(lr["y"].bits()):
            wm[bit] = loads[rho][i]
        for c in range(n):
            for i, bit in enumerate(lr[f"x{c}"].bits()):
                wm[bit] = base.registers[f"x{c}"][i]
        for i, bit in enumerate(lr["tree"].bits()):
            wm[bit] = tree[i]
        return wm

    def alpha_map():
        wm = [0] * alpha.width
        ar = alpha.registers
        in_bits = [bit for reg in loads for bit in reg.bits()]
        for i, bit in enumerate(ar["in"].bits()):
            wm[bit] = in_bits[i]
        wm[ar["out"][0]] = target[0]
        at = 0
        for name, reg in ar.items():
            if name in ("in", "out"):
                continue
            for bit in reg.bits():
                wm[bit] = ascratch[at]
                at += 1
        return wm

    oracle = base
    for rho in range(r):
        oracle = compose(oracle, lookup, lookup_map(rho), width=base.width)
    oracle = compose(oracle, alpha, alpha_map(), width=base.width)
    for rho in range(r):
        oracle = compose(oracle, lookup, lookup_map(rho), width=base.width)
    return oracle


def verify_oracle(oracle: ReversibleCircuit, alpha: ReversibleCircuit,
                  entries: list[int], d: int, r: int = 1) -> bool:
    """Exhaustive check over every index tuple and both target values."""
    n = len(entries)
    amask = ancilla_mask(oracle)
    base_vals = {f"x{c}": entries[c] for c in range(n)}
    states, tuples = [], []
    for packed in range(n ** r):
        js = []
        rem = packed
        for _ in range(r):
            js.append(rem % n)
            rem //= n
        for bval in (0, 1):
            vals = dict(base_vals)
            vals["target"] = bval
            for rho, j in enumerate(js):
                vals[f"j{rho}"] = j
            states.append(encode_state(oracle, vals))
            tuples.append((tuple(js), bval))
    truth = evaluate_predicate(
        alpha, [pack_tuple([entries[j] for j in js], d) for js, _ in tuples], d, r)
    outs = simulate_ints(oracle, states)
    got = decode_register_batch(oracle, outs, "target")
    for (js, bval), t, g, out, st in zip(tuples, truth, got, outs, states):
        if g != (bval ^ t):
            return False
        if out & amask:
            return False
        if (out & ~amask) ^ (st & ~amask) != (g ^ bval) << oracle.registers["target"][0]:
            return False  # only the target may change
    return True


# -- multi-search -----------------------------------------------------------------

_lookup_cost_cache: dict = {}


def _parallel_lookup_cost(s: int, d: int):
    """Measured stage depth and width of the parallel lookup for s nodes."""
    s_pow = 1 << max(1, (s - 1).bit_length()) if s > 1 else 2
    key = (s_pow, d)
    if key not in _lookup_cost_cache:
        m = metrics(pram.build_parallel_lookup(s_pow, d))
        _lookup_cost_cache[key] = (m.stage_depth, m.width)
    return _lookup_cost_cache[key]


def multi_grover(alphas: list[ReversibleCircuit], instance: DatabaseInstance,
                 r: int = 1, rng=None, attempts: int = 2):
    """Independent searches, one per predicate, sharing the stored array.

    Every composed oracle is verified exhaustively first.  Returns
    (results, ledger) where results[i] is a solution index tuple or None.
    Iteration counts are padded to the slowest search; searches whose
    predicate is satisfied everywhere finish in zero iterations.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    n, d = instance.n, instance.d
    domain = n ** r
    sols: list[list[tuple]] = []
    for alpha in alphas:
        oracle = compose_oracle(alpha, n, d, r)
        if not verify_oracle(oracle, alpha, instance.entries, d, r):
            raise AssertionError("composed oracle disagrees with its predicate")
        found = []
        for packed in range(domain):
            js, rem = [], packed
            for _ in range(r):
                js.append(rem % n)
                rem //= n
            val = pack_tuple([instance.entries[j] for j in js], d)
            if evaluate_predicate(alpha, [val], d, r)[0]:
                found.append(tuple(js))
        sols.append(found)

    ledger = CostLedger()
    lookup_stage, lookup_width = _parallel_lookup_cost(n, d)
    ledger.width = lookup_width
    ks = [qsim.grover_iterations(domain, len(s)) if s else None for s in sols]
    k_max = max((k for k in ks if k is not None), default=0)
    results: list[tuple | None] = [None] * len(alphas)
    for i, (found, k) in enumerate(zip(sols, ks)):
        if k is not None:
            ledger.padded_iterations += k_max - k
        p = (qsim.grover_success_probability(domain, len(found), k)
             if found else 0.0)
        for _ in range(attempts):
            ledger.amp_rounds += 1
            ledger.grover_iterations += k_max
            ledger.oracle_calls += k_max
            ledger.pram_calls += 2 * k_max * r
            ledger.stage_depth += k_max * (2 * r * lookup_stage
                                           + metrics(alphas[i]).stage_depth + 1)
            if found and rng.random() < p:
                results[i] = found[int(rng.integers(0, len(found)))]
                break
    return results, ledger


# -- element distinctness -----------------------------------------------------------

def _blocks(indices: list[int], s: int) -> list[list[int]]:
    size = math.ceil(len(indices) / s) if indices else 0
    return [indices[i:i + size] for i in range(0, len(indices), size)] if size else []


def _inner_success(f, sample, s) -> tuple[float, list]:
    """Exact success probability of one sampled run, plus its solution map."""
    values = {f[i] for i in sample}
    if len(values) < len(sample):
        return 1.0, []
    remaining = [i for i in range(len(f)) if i not in set(sample)]
    blocks = _blocks(remaining, s)
    p_fail = 1.0
    sol_blocks = []
    for blk in blocks:
        m = sum(1 for i in blk if f[i] in values)
        if not m:
            continue
        bsize = len(blk)
        k = int(math.floor((math.pi / 4) * math.sqrt(bsize))) if bsize > 1 else 0
        p = qsim.grover_success_probability(bsize, m, k)
        p_fail *= 1.0 - p
        sol_blocks.append(blk)
    return 1.0 - p_fail, sol_blocks


_p0_cache: dict = {}


def _estimate_p0(f, s, samples: int = 4000) -> float:
    """Base success probability of one sampled run, over the draw of the
    sample set.  Deterministic per instance: estimated once with a seed
    derived from the instance and cached."""
    key = (tuple(f), s)
    if key in _p0_cache:
        return _p0_cache[key]
    n = len(f)
    samples = max(1000, min(samples, 60 * n))
    est_rng = np.random.default_rng(abs(hash(key)) % (1 << 32))
    total = 0.0
    for _ in range(samples):
        sample = [int(v) for v in est_rng.choice(n, size=s, replace=False)]
        total += _inner_success(f, sample, s)[0]
    _p0_cache[key] = total / samples
    return _p0_cache[key]


def _best_rounds(p0: float, budget: int) -> tuple[int, float]:
    """Amplification rounds maximising success within the round budget."""
    if p0 <= 0.0:
        return budget, 0.0
    theta = math.asin(min(1.0, math.sqrt(p0)))
    best = (0, math.sin(theta) ** 2)
    for rounds in range(1, budget + 1):
        q = math.sin((2 * rounds + 1) * theta) ** 2
        if q > best[1]:
            best = (rounds, q)
    return best


def _find_pair_execution(f, s, rng, max_draws: int, initial_sample=None):
    """Draw classical runs until one finds a collision; returns the pair."""
    n = len(f)
    for attempt in range(max_draws):
        if initial_sample is not None and attempt == 0:
            sample = list(initial_sample)
        else:
            sample = [int(v) for v in rng.choice(n, size=s, replace=False)]
        byval: dict[int, int] = {}
        for i in sample:
            if f[i] in byval:
                return (min(i, byval[f[i]]), max(i, byval[f[i]])), True
            byval[f[i]] = i
        _, sol_blocks = _inner_success(f, sample, s)
        hits = [i for blk in sol_blocks for i in blk if f[i] in byval]
        if hits:
            i = hits[int(rng.integers(0, len(hits)))]
            j = byval[f[i]]
            return (min(i, j), max(i, j)), False
    return None, False


def element_distinctness(f, s: int, rng=None, initial_sample=None,
                         attempts: int = 3, seed: int | None = None) -> SearchOutcome:
    """Store s sampled pairs, sort them, then run s block searches for a
    colliding partner, all wrapped in amplitude amplification.

    Success probability of the wrapped routine is computed exactly on its
    two-dimensional invariant subspace (the base probability is estimated
    by seeded sampling of the classical draw) and the outcome is sampled
    from it; any returned pair is verified against f before reporting.
    """
    n = len(f)
    if not 1 <= s <= n:
        raise ValueError("need 1 <= s <= n")
    if rng is None:
        rng = np.random.default_rng(seed if seed is not None else 0)
    ledger = CostLedger()
    d_val = _bits_for(n)
    lookup_stage, lookup_width = _parallel_lookup_cost(s, d_val)
    ledger.width = lookup_width

    # sorting the sampled pairs with the compiled network
    sort_net = (sortnet.bitonic_network(int(math.log2(s))) if s >= 2 and
                (s & (s - 1)) == 0 else sortnet.oets_network(max(2, s)))
    ledger.stage_depth += sort_net.depth

    if initial_sample is not None:
        vals = [f[i] for i in initial_sample]
        if len(vals) == sort_net.wires:
            ordered, _ = sortnet.replay(sort_net, vals)
            assert ordered == sorted(vals)
        byval: dict[int, int] = {}
        for i in initial_sample:
            if f[i] in byval:
                j = byval[f[i]]
                return SearchOutcome("pair", (min(i, j), max(i, j)), ledger, seed)
            byval[f[i]] = i

    bmax = math.ceil((n - s) / s) if n > s else 1
    k = int(math.floor((math.pi / 4) * math.sqrt(bmax))) if bmax > 1 else 0
    k_eff = max(1, k)
    calls_per_oracle = max(1, math.ceil(math.log2(s)) if s > 1 else 1)
    per_round = k_eff * calls_per_oracle * lookup_stage
    ledger.per_round_stage_depth = per_round
    ledger.grover_iterations = k_eff

    p0 = _estimate_p0(f, s)
    budget = max(1, int(math.floor((math.pi / 4) * math.sqrt(n / s))))
    rounds, q = _best_rounds(p0, budget)

    success = False
    for _ in range(attempts):
        ledger.amp_rounds += rounds + 1
        ledger.oracle_calls += (rounds + 1) * k_eff * s
        ledger.pram_calls += (rounds + 1) * k_eff * calls_per_oracle * 2
        ledger.stage_depth += (rounds + 1) * per_round
        if rng.random() < q:
            success = True
            break
    if not success:
        return SearchOutcome("distinct", None, ledger, seed)
    pair, _ = _find_pair_execution(f, s, rng, max_draws=300 * max(1, n // (2 * s)),
                                   initial_sample=initial_sample)
    if pair is None:
        return SearchOutcome("distinct", None, ledger, seed)
    i, j = pair
    assert f[i] == f[j] and i != j, "search returned an invalid pair"
    return SearchOutcome("pair", pair, ledger, seed)


# -- collision finding ----------------------------------------------------------------

def _direct_inner(f, s, draw_rng):
    """One round of the direct path: sample s pairs, then search s random
    blocks of size about N/s^2 for a partner.  Returns (success prob,
    solution indices, sample)."""
    n = len(f)
    sample = [int(v) for v in draw_rng.choice(n, size=s, replace=False)]
    byval: dict[int, int] = {}
    for i in sample:
        if f[i] in byval:
            return 1.0, None, sample  # internal collision
        byval[f[i]] = i
    remaining = np.array([i for i in range(n) if i not in set(sample)])
    bp = max(1, math.ceil(len(remaining) / (s * s)))
    perm = draw_rng.permutation(len(remaining))
    hits, p_fail = [], 1.0
    for bi in range(s):
        blk = remaining[perm[bi * bp:(bi + 1) * bp]]
        if not len(blk):
            continue
        partners = [int(i) for i in blk if f[i] in byval]
        if not partners:
            continue
        k = int(math.floor((math.pi / 4) * math.sqrt(len(blk)))) if len(blk) > 1 else 0
        p_fail *= 1.0 - qsim.grover_success_probability(len(blk), len(partners), k)
        hits.extend(partners)
    return 1.0 - p_fail, hits, sample


def _direct_p0(f, s) -> float:
    key = (tuple(f), s, "direct")
    if key in _p0_cache:
        return _p0_cache[key]
    est_rng = np.random.default_rng(abs(hash(key)) % (1 << 32))
    samples = max(1000, min(4000, 60 * len(f)))
    total = 0.0
    for _ in range(samples):
        total += _direct_inner(f, s, est_rng)[0]
    _p0_cache[key] = total / samples
    return _p0_cache[key]


def _direct_collision(f, s: int, rng, attempts: int, seed) -> SearchOutcome:
    n = len(f)
    ledger = CostLedger()
    d_val = _bits_for(n)
    lookup_stage, lookup_width = _parallel_lookup_cost(s, d_val)
    ledger.width = lookup_width
    bp = max(1, math.ceil((n - s) / (s * s)))
    k = int(math.floor((math.pi / 4) * math.sqrt(bp))) if bp > 1 else 0
    k_eff = max(1, k)
    calls_per_oracle = max(1, math.ceil(math.log2(s)) if s > 1 else 1)
    ledger.per_round_stage_depth = k_eff * calls_per_oracle * lookup_stage
    ledger.grover_iterations = k_eff

    p0 = _direct_p0(f, s)
    budget = max(1, int(math.floor((math.pi / 4) * math.sqrt(n / s))))
    rounds, q = _best_rounds(p0, budget)
    for _ in range(attempts):
        ledger.amp_rounds += rounds + 1
        ledger.oracle_calls += (rounds + 1) * k_eff * s
        ledger.pram_calls += (rounds + 1) * k_eff * calls_per_oracle * 2
        ledger.stage_depth += (rounds + 1) * ledger.per_round_stage_depth
        if rng.random() >= q:
            continue
        for _ in range(400 * max(1, s)):
            p_inner, hits, sample = _direct_inner(f, s, rng)
            byval = {f[i]: i for i in sample}
            if hits is None:  # internal collision within the sample
                seen: dict[int, int] = {}
                for i in sample:
                    if f[i] in seen:
                        j = seen[f[i]]
                        return SearchOutcome("pair", (min(i, j), max(i, j)),
                                             ledger, seed)
                    seen[f[i]] = i
            elif hits:
                i = hits[int(rng.integers(0, len(hits)))]
                j = byval[f[i]]
                assert f[i] == f[j] and i != j
                return SearchOutcome("pair", (min(i, j), max(i, j)), ledger, seed)
        break
    return SearchOutcome("one-to-one", None, ledger, seed)


def check_promise(f) -> int:
    """Return max preimage count; reject anything beyond 2-1."""
    counts: dict[int, int] = {}
    for v in f:
        counts[v] = counts.get(v, 0) + 1
    worst = max(counts.values())
    if worst > 2:
        raise ValueError("promise violation: a value has more than 2 preimages")
    return worst


def collision_finding(f, s: int, rng=None, method: str = "reduction",
                      attempts: int = 3, seed: int | None = None) -> SearchOutcome:
    """Find a colliding pair of a promised 1-1 or 2-1 function.

    The default reduction samples about 2 sqrt(N) inputs and runs the
    distinctness routine on the restriction; the direct method runs the
    block searches on the full domain.
    """
    n = len(f)
    check_promise(f)
    if rng is None:
        rng = np.random.default_rng(seed if seed is not None else 0)
    if method == "direct":
        return _direct_collision(f, s, rng, attempts, seed)
    if method != "reduction":
        raise ValueError(f"unknown method {method!r}")

    m_sub = min(n, math.ceil(2 * math.sqrt(n)))
    ledger = CostLedger()
    for _ in range(attempts):
        sub = [int(v) for v in rng.choice(n, size=m_sub, replace=False)]
        g = [f[i] for i in sub]
        out = element_distinctness(g, min(s, m_sub), rng=rng, attempts=1, seed=seed)
        ledger.oracle_calls += out.ledger.oracle_calls
        ledger.pram_calls += out.ledger.pram_calls
        ledger.stage_depth += out.ledger.stage_depth
        ledger.amp_rounds += out.ledger.amp_rounds
        ledger.width = max(ledger.width, out.ledger.width)
        ledger.per_round_stage_depth = out.ledger.per_round_stage_depth
        ledger.grover_iterations = out.ledger.grover_iterations
        if out.kind == "pair":
            a, b = out.pair
            i, j = sub[a], sub[b]
            assert f[i] == f[j] and i != j
            return SearchOutcome("pair", (min(i, j), max(i, j)), ledger, seed)
    return SearchOutcome("one-to-one", None, ledger, seed)


# -- instance builders -------------------------------------------------------------

def planted_collision_table(n: int, rng) -> tuple[list[int], tuple[int, int]]:
    """Random permutation with one value duplicated at a random pair."""
    f = [int(v) for v in rng.permutation(n)]
    u, v = (int(x) for x in rng.choice(n, size=2, replace=False))
    f[v] = f[u]
    return f, (min(u, v), max(u, v))


def two_to_one_table(n: int, rng) -> list[int]:
    if n % 2:
        raise ValueError("need even n")
    values = [int(v) for v in rng.permutation(n)[:n // 2]]
    slots = [int(v) for v in rng.permutation(n)]
    f = [0] * n
    for idx, slot in enumerate(slots):
        f[slot] = values[idx % (n // 2)]
    return f


def injective_table(n: int, rng) -> list[int]:
    return [int(v) for v in rng.permutation(n)]
