"""Command-line front end: build, verify, emulate, and benchmark.

Exit codes: 0 success, 1 validation/usage error, 2 self-test failure.
Every CSV row carries the seed and version string; re-running with the
same seed reproduces the files byte for byte.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import VERSION_STRING, algorithms, datamove, emulator, pram, qsim, report, revcirc, sortnet, topology
from .revcirc import metrics
from .sortnet import bitonic_network, grid_network, oets_network


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def _write_csv(path, fieldnames, rows):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fieldnames)
        w.writeheader()
        for r in rows:
            w.writerow(r)
    return path


def _packet_network(topo, rows=None, cols=None):
    """A 2N-wire network local to the topology, two wires per node."""
    n2 = 2 * topo.n
    if topo.family == "line":
        return oets_network(n2)
    if topo.family in ("hypercube", "complete"):
        if n2 & (n2 - 1) == 0:
            return bitonic_network(int(math.log2(n2)))
        if topo.family == "complete":
            return oets_network(n2)
        raise ValueError("hypercube packet network needs a power-of-two size")
    if topo.family == "grid2d":
        if not rows or not cols:
            raise ValueError("grid topologies need --rows and --cols")
        return grid_network(rows, 2 * cols)
    raise ValueError(f"no default packet network for family {topo.family!r}")


# -- subcommands -----------------------------------------------------------------

def cmd_topo(args) -> int:
    try:
        size = (args.rows, args.cols) if args.family == "grid2d" else args.n
        topo = topology.build_topology(args.family, size)
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.out:
        Path(args.out).write_text(topology.to_json(topo))
    print(f"family={topo.family} n={topo.n} edges={len(topo.edges)} "
          f"valency={topo.valency()}")
    return 0


def _make_network(args):
    if args.kind == "bitonic":
        if args.t is None:
            raise ValueError("bitonic needs --t")
        return bitonic_network(args.t)
    if args.kind == "oets":
        if args.n is None:
            raise ValueError("oets needs --n")
        return oets_network(args.n)
    if args.kind == "grid":
        if not args.rows or not args.cols:
            raise ValueError("grid needs --rows and --cols")
        return grid_network(args.rows, args.cols)
    raise ValueError(f"unknown network kind {args.kind!r}")


def cmd_sortnet(args) -> int:
    try:
        net = _make_network(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    line = f"layers={net.depth} comparators={net.size}"
    if args.verify:
        ok, cex = sortnet.verify_network(net)
        line += f" verified={'true' if ok else 'false'}"
        print(line)
        if not ok:
            print(f"counterexample={cex}", file=sys.stderr)
            return 2
    else:
        print(line)
    if args.out:
        Path(args.out).write_text(sortnet.to_json(net))
    return 0


def cmd_move(args) -> int:
    try:
        topo = topology.from_json(Path(args.topo).read_text())
        perm = json.loads(Path(args.perm).read_text())
        if sorted(perm) != list(range(topo.n)):
            raise ValueError("perm file must hold a permutation of 0..n-1")
        rows, cols = _grid_shape(topo.family, topo.n, args.rows, args.cols)
        net = _packet_network(topo, rows, cols)
        circ = datamove.build_data_mover(topo.n, args.d, net, destinations=perm)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    rng = np.random.default_rng(args.seed)
    n = topo.n
    states, expect = [], []
    for _ in range(20):
        xs = [int(rng.integers(0, 1 << args.d)) for _ in range(n)]
        states.append(revcirc.encode_state(circ, {f"x{i}": xs[i] for i in range(n)}))
        expect.append([xs[perm[i]] for i in range(n)])
    outs = revcirc.simulate_ints(circ, states)
    amask = revcirc.ancilla_mask(circ)
    for out, want in zip(outs, expect):
        got = [revcirc.decode_register_batch(circ, [out], f"x{i}")[0] for i in range(n)]
        if got != want or out & amask:
            print("self-test failed: circuit disagrees with the permutation",
                  file=sys.stderr)
            return 2
    m = metrics(circ)
    if topo.family == "complete":
        sched = datamove.route_complete_permutation(perm, 1)
    else:
        sched = datamove.compile_fixed_permutation(
            perm, _node_network(topo, rows, cols), 1)
    print(f"n={n} d={args.d} stage_depth={m.stage_depth} depth={m.depth} "
          f"size={m.size} width={m.width} schedule_layers={sched.depth}")
    if args.emit:
        Path(args.emit).write_text(revcirc.to_json(circ))
    if args.metrics:
        _write_csv(args.metrics,
                   ["name", "N", "d", "stage_depth", "depth", "size", "width",
                    "seed", "version"],
                   [{"name": "data_mover", "N": n, "d": args.d,
                     "stage_depth": m.stage_depth, "depth": m.depth,
                     "size": m.size, "width": m.width,
                     "seed": args.seed, "version": VERSION_STRING}])
    return 0


def _node_network(topo, rows=None, cols=None):
    if topo.family == "complete":
        return None
    if topo.family == "grid2d":
        if not rows or not cols:
            raise ValueError("grid topologies need --rows and --cols")
        return grid_network(rows, cols)
    return emulator.default_network(topo)


def _grid_shape(family, n, rows, cols):
    """Fill in rows/cols for square grids when not given explicitly."""
    if family != "grid2d" or (rows and cols):
        return rows, cols
    side = math.isqrt(n)
    if side * side == n:
        return side, side
    raise ValueError("non-square grids need --rows and --cols")


def _pram_cases(n, d, pattern, rng, count=200):
    cases = []
    if pattern in ("adversarial", "all"):
        cases.append(([0] * n, "all-same"))
        cases.append((list(range(n)), "identity"))
        half = n // 2
        cases.append(([0] * half + [n - 1] * (n - half), "two-hot"))
    for _ in range(count):
        cases.append(([int(rng.integers(0, n)) for _ in range(n)], "random"))
    return cases


def cmd_pram(args) -> int:
    n, d = args.n, args.d
    if n < 2 or n & (n - 1):
        print("error: --n must be a power of two (default bitonic network)",
              file=sys.stderr)
        return 1
    circ = pram.build_parallel_lookup(n, d)
    rng = np.random.default_rng(args.seed)
    states, expect = [], []
    for js, _tag in _pram_cases(n, d, args.selftest, rng):
        ys = [int(rng.integers(0, 1 << d)) for _ in range(n)]
        xs = [int(rng.integers(0, 1 << d)) for _ in range(n)]
        vals = {}
        for i in range(n):
            vals[f"j{i}"] = js[i]
            vals[f"y{i}"] = ys[i]
            vals[f"x{i}"] = xs[i]
        states.append(revcirc.encode_state(circ, vals))
        expect.append(pram.gather_oracle(js, ys, xs))
    outs = revcirc.simulate_ints(circ, states)
    amask = revcirc.ancilla_mask(circ)
    bad = 0
    for i in range(n):
        got = revcirc.decode_register_batch(circ, outs, f"y{i}")
        bad += sum(1 for g, e in zip(got, expect) if g != e[i])
    bad += sum(1 for o in outs if o & amask)
    m = metrics(circ)
    print(f"n={n} d={d} cases={len(states)} mismatches={bad} "
          f"stage_depth={m.stage_depth} width={m.width}")
    if args.metrics:
        _write_csv(args.metrics,
                   ["name", "N", "d", "stage_depth", "depth", "size", "width",
                    "seed", "version"],
                   [{"name": "parallel_lookup", "N": n, "d": d,
                     "stage_depth": m.stage_depth, "depth": m.depth,
                     "size": m.size, "width": m.width,
                     "seed": args.seed, "version": VERSION_STRING}])
    return 0 if bad == 0 else 2


def cmd_emulate(args) -> int:
    try:
        topo = topology.from_json(Path(args.topo).read_text())
        if args.circuit:
            circ = emulator.from_json(Path(args.circuit).read_text())
        elif args.random:
            w, depth = (int(x) for x in args.random.split(","))
            circ = emulator.random_logical_circuit(w, depth,
                                                   np.random.default_rng(args.seed))
        else:
            raise ValueError("need --circuit FILE or --random W,D")
        plan, emu, rep = emulator.emulate(circ, topo)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    verified = ""
    if emu.width <= 20 and circ.width <= 10:
        ok = emulator.verify_emulation(circ, emu,
                                       rng=np.random.default_rng(args.seed))
        verified = str(ok).lower()
        if not ok:
            print("self-test failed: emulated circuit is not equivalent",
                  file=sys.stderr)
            return 2
    print(f"family={rep['family']} n={rep['n']} w={circ.width} "
          f"logical_depth={rep['logical_depth']} "
          f"emulated_stage_depth={rep['emulated_stage_depth']} "
          f"overhead={rep['overhead']:.2f}"
          + (f" verified={verified}" if verified else ""))
    if args.emit:
        Path(args.emit).write_text(emulator.to_json(emu))
    if args.report:
        row = {"family": rep["family"], "n": rep["n"], "w": circ.width,
               "logical_depth": rep["logical_depth"],
               "emulated_stage_depth": rep["emulated_stage_depth"],
               "per_slice_stage_depth": rep["per_slice_stage_depth"],
               "overhead": round(rep["overhead"], 4),
               "ref_floor": emulator.reference_floor(
                   rep["per_slice_stage_depth"], rep["n"]),
               "verified": verified, "seed": args.seed,
               "version": VERSION_STRING}
        _write_csv(args.report, list(row.keys()), [row])
    return 0


def cmd_grover(args) -> int:
    n, m = args.n, args.m
    if n < 1 or n & (n - 1):
        print("error: --n must be a power of two", file=sys.stderr)
        return 1
    if m > n:
        print("error: --m may not exceed --n", file=sys.stderr)
        return 1
    if args.iters == "auto":
        k = qsim.grover_iterations(n, max(1, m))
    else:
        k = int(args.iters)
    res = qsim.grover_dynamics(lambda x: x < m, n, k)
    if res.no_solutions:
        print(f"n={n} m=0 iterations={k} success=0.0 flagged=no-solutions")
        return 0
    closed = qsim.grover_success_probability(n, m, k)
    print(f"n={n} m={m} iterations={k} success={res.success_probability:.9f} "
          f"closed_form={closed:.9f}")
    return 0 if abs(res.success_probability - closed) < 1e-9 else 2


_TRIAL_FIELDS = ["seed", "N", "S", "success", "oracle_calls", "stage_depth",
                 "width", "version"]


def _trial_row(seed, n, s, out) -> dict:
    return {"seed": seed, "N": n, "S": s,
            "success": int(out.kind == "pair"),
            "oracle_calls": out.ledger.oracle_calls,
            "stage_depth": out.ledger.stage_depth,
            "width": out.ledger.width, "version": VERSION_STRING}


def cmd_distinct(args) -> int:
    n, s = args.n, args.s
    inst_rng = np.random.default_rng(args.seed)
    f, _pair = algorithms.planted_collision_table(n, inst_rng)
    rows, wins = [], 0
    for t in range(args.trials):
        trial_seed = args.seed * 1_000_003 + t
        out = algorithms.element_distinctness(
            f, s, rng=np.random.default_rng(trial_seed), seed=trial_seed)
        wins += int(out.kind == "pair")
        rows.append(_trial_row(trial_seed, n, s, out))
    freq = wins / max(1, args.trials)
    print(f"n={n} s={s} trials={args.trials} success_frequency={freq:.3f}")
    if args.csv:
        path = _write_csv(args.csv, _TRIAL_FIELDS, rows)
        if not args.no_figures:
            report.render_trials_figure(rows, path.with_suffix(".png"))
    return 0


def cmd_collision(args) -> int:
    n, s = args.n, args.s
    rows, wins, ones = [], 0, 0
    for t in range(args.trials):
        trial_seed = args.seed * 1_000_003 + t
        rng = np.random.default_rng(trial_seed)
        f = algorithms.two_to_one_table(n, rng)
        out = algorithms.collision_finding(f, s, rng=rng, method=args.method,
                                           seed=trial_seed)
        if out.kind == "pair":
            if f[out.pair[0]] != f[out.pair[1]] or out.pair[0] == out.pair[1]:
                print("self-test failed: invalid pair returned", file=sys.stderr)
                return 2
            wins += 1
        else:
            ones += 1
        rows.append(_trial_row(trial_seed, n, s, out))
    freq = wins / max(1, args.trials)
    print(f"n={n} s={s} trials={args.trials} method={args.method} "
          f"success_frequency={freq:.3f}")
    if args.csv:
        path = _write_csv(args.csv, _TRIAL_FIELDS, rows)
        if not args.no_figures:
            report.render_trials_figure(rows, path.with_suffix(".png"))
    return 0


def cmd_bench(args) -> int:
    families = args.families.split(",")
    sizes = [int(x) for x in args.sizes.split(",")]
    d = args.d
    rows = []
    for family in families:
        for n in sizes:
            try:
                gr, gc = _grid_shape(family, n, None, None)
                size = (gr, gc) if family == "grid2d" else n
                topo = topology.build_topology(family, size)
                node_net = _node_network(topo, gr, gc)
                pkt_net = _packet_network(topo, gr, gc)
            except ValueError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return 1
            dg = node_net.depth if node_net is not None else 2
            rows.append({"name": "sortnet", "family": family, "N": n, "d": 0,
                         "stage_depth": dg, "depth": dg,
                         "size": node_net.size if node_net else n // 2,
                         "width": n, "seed": args.seed,
                         "version": VERSION_STRING})
            mover = datamove.build_data_mover(n, d, pkt_net,
                                              destinations=list(range(n)))
            m = metrics(mover)
            rows.append({"name": "data_mover", "family": family, "N": n, "d": d,
                         "stage_depth": m.stage_depth, "depth": m.depth,
                         "size": m.size, "width": m.width, "seed": args.seed,
                         "version": VERSION_STRING})
            if n & (n - 1) == 0 and family == "hypercube":
                lm = metrics(pram.build_parallel_lookup(n, d))
                rows.append({"name": "parallel_lookup", "family": family,
                             "N": n, "d": d, "stage_depth": lm.stage_depth,
                             "depth": lm.depth, "size": lm.size,
                             "width": lm.width, "seed": args.seed,
                             "version": VERSION_STRING})
    for family in families:
        sub = [r for r in rows if r["name"] == "data_mover" and r["family"] == family]
        if len(sub) >= 2:
            xs = np.log([r["N"] for r in sub])
            ys = np.log([r["stage_depth"] for r in sub])
            slope = float(np.polyfit(xs, ys, 1)[0])
            print(f"fit {family}: data-mover stage depth ~ N^{slope:.2f}")
    path = _write_csv(args.out,
                      ["name", "family", "N", "d", "stage_depth", "depth",
                       "size", "width", "seed", "version"], rows)
    figures = []
    if not args.no_figures:
        figures += report.render_bench_figures(rows, path.with_suffix(""))
    if args.overhead:
        orows = emulator.overhead_report(
            families=[f for f in families if f != "grid2d"], sizes=sizes)
        for r in orows:
            r["seed"] = args.seed
            r["version"] = VERSION_STRING
        opath = Path(args.out).with_name(Path(args.out).stem + "_overhead.csv")
        _write_csv(opath, list(orows[0].keys()), orows)
        if not args.no_figures:
            figures.append(report.render_overhead_figure(
                orows, opath.with_suffix(".png")))
        print(f"wrote {opath}")
    print(f"wrote {path}" + (f" and {len(figures)} figure(s)" if figures else ""))
    return 0


# -- parser -----------------------------------------------------------------------

def build_parser() -> _Parser:
    p = _Parser(prog="qroute",
                description="sorting-network routing, lookup and emulation toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("topo", help="build a host graph")
    t.add_argument("--family", required=True,
                   choices=["line", "grid2d", "hypercube", "complete"])
    t.add_argument("--n", type=int)
    t.add_argument("--rows", type=int)
    t.add_argument("--cols", type=int)
    t.add_argument("--out")
    t.set_defaults(fn=cmd_topo)

    s = sub.add_parser("sortnet", help="build and verify a comparator network")
    s.add_argument("--kind", required=True, choices=["bitonic", "oets", "grid"])
    s.add_argument("--t", type=int)
    s.add_argument("--n", type=int)
    s.add_argument("--rows", type=int)
    s.add_argument("--cols", type=int)
    s.add_argument("--verify", action="store_true")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_sortnet)

    mv = sub.add_parser("move", help="compile a data-moving circuit")
    mv.add_argument("--topo", required=True)
    mv.add_argument("--perm", required=True)
    mv.add_argument("--d", type=int, default=1)
    mv.add_argument("--rows", type=int)
    mv.add_argument("--cols", type=int)
    mv.add_argument("--emit")
    mv.add_argument("--metrics")
    mv.add_argument("--seed", type=int, default=0)
    mv.set_defaults(fn=cmd_move)

    pr = sub.add_parser("pram", help="build and self-test the parallel lookup")
    pr.add_argument("--n", type=int, required=True)
    pr.add_argument("--d", type=int, default=2)
    pr.add_argument("--net", default="bitonic", choices=["bitonic"])
    pr.add_argument("--selftest", default="random",
                    choices=["random", "adversarial"])
    pr.add_argument("--metrics")
    pr.add_argument("--seed", type=int, default=0)
    pr.set_defaults(fn=cmd_pram)

    em = sub.add_parser("emulate", help="map a circuit onto a host graph")
    em.add_argument("--circuit")
    em.add_argument("--random", metavar="W,D")
    em.add_argument("--topo", required=True)
    em.add_argument("--report")
    em.add_argument("--emit")
    em.add_argument("--seed", type=int, default=0)
    em.set_defaults(fn=cmd_emulate)

    g = sub.add_parser("grover", help="search dynamics on the index register")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, default=1)
    g.add_argument("--iters", default="auto")
    g.set_defaults(fn=cmd_grover)

    di = sub.add_parser("distinct", help="element distinctness trials")
    di.add_argument("--n", type=int, required=True)
    di.add_argument("--s", type=int, required=True)
    di.add_argument("--trials", type=int, default=200)
    di.add_argument("--seed", type=int, default=0)
    di.add_argument("--csv")
    di.add_argument("--no-figures", action="store_true")
    di.set_defaults(fn=cmd_distinct)

    co = sub.add_parser("collision", help="collision-finding trials")
    co.add_argument("--n", type=int, required=True)
    co.add_argument("--s", type=int, required=True)
    co.add_argument("--trials", type=int, default=200)
    co.add_argument("--method", default="reduction",
                    choices=["reduction", "direct"])
    co.add_argument("--seed", type=int, default=0)
    co.add_argument("--csv")
    co.add_argument("--no-figures", action="store_true")
    co.set_defaults(fn=cmd_collision)

    b = sub.add_parser("bench", help="depth/width series and overhead report")
    b.add_argument("--families", default="line,hypercube,complete")
    b.add_argument("--sizes", default="8,16,32,64")
    b.add_argument("--d", type=int, default=4)
    b.add_argument("--out", required=True)
    b.add_argument("--overhead", action="store_true")
    b.add_argument("--no-figures", action="store_true")
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(fn=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
