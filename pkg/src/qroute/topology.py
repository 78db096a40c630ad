"""Host graphs over which comparator networks and routed circuits must live."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

FAMILIES = ("line", "grid2d", "hypercube", "complete", "custom")


@dataclass(frozen=True)
class Topology:
    """Connected undirected graph on nodes 0..n-1.

    Edges are stored canonically as (u, v) with u < v.  Instances are
    immutable and safe to share between threads.
    """

    n: int
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)
    family: str = "custom"

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError("topology needs at least one node")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        for u, v in self.edges:
            if not (0 <= u < v < self.n):
                raise ValueError(f"bad edge ({u},{v}) for n={self.n}")
        if not self._connected():
            raise ValueError("graph is not connected")
        if self.family == "hypercube":
            self._check_hypercube()

    def _connected(self) -> bool:
        if self.n == 1:
            return True
        adj = self.adjacency()
        seen = {0}
        frontier = [0]
        while frontier:
            v = frontier.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    frontier.append(w)
        return len(seen) == self.n

    def _check_hypercube(self):
        if self.n & (self.n - 1):
            raise ValueError("hypercube size must be a power of two")
        want = {(min(v, v ^ (1 << b)), max(v, v ^ (1 << b)))
                for v in range(self.n) for b in range(self.n.bit_length() - 1)}
        if set(self.edges) != want:
            raise ValueError("edges do not form a hypercube")

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def has_edge(self, u: int, v: int) -> bool:
        if u > v:
            u, v = v, u
        return (u, v) in self.edges

    def valency(self) -> int:
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return max(deg)


def build_topology(family: str, size) -> Topology:
    """Construct one of the named graph families.

    `size` is a node count, except for grid2d where it is (rows, cols).
    """
    if family == "line":
        n = int(size)
        if n <= 0:
            raise ValueError("line needs n >= 1")
        edges = frozenset((i, i + 1) for i in range(n - 1))
        return Topology(n, edges, "line")
    if family == "grid2d":
        rows, cols = size
        if rows <= 0 or cols <= 0:
            raise ValueError("grid needs positive rows and cols")
        n = rows * cols
        edges = set()
        for r in range(rows):
            for c in range(cols):
                if c + 1 < cols:
                    edges.add((r * cols + c, r * cols + c + 1))
                if r + 1 < rows:
                    edges.add((r * cols + c, (r + 1) * cols + c))
        return Topology(n, frozenset(edges), "grid2d")
    if family == "hypercube":
        n = int(size)
        if n <= 0 or n & (n - 1):
            raise ValueError("hypercube size must be a positive power of two")
        dim = n.bit_length() - 1
        edges = frozenset((min(v, v ^ (1 << b)), max(v, v ^ (1 << b)))
                          for v in range(n) for b in range(dim))
        return Topology(n, edges, "hypercube")
    if family == "complete":
        n = int(size)
        if n <= 0:
            raise ValueError("complete graph needs n >= 1")
        edges = frozenset((i, j) for i in range(n) for j in range(i + 1, n))
        return Topology(n, edges, "complete")
    raise ValueError(f"unknown family {family!r}")


def neighbors(t: Topology, v: int) -> list[int]:
    """Sorted adjacency list of node v."""
    if not (0 <= v < t.n):
        raise IndexError(f"node {v} out of range for n={t.n}")
    out = [w for u, w in t.edges if u == v] + [u for u, w in t.edges if w == v]
    return sorted(out)


def snake_order(rows: int, cols: int) -> list[int]:
    """Row-major node indices visited in boustrophedon order.

    Entry p of the result is the node holding rank p when a grid sort
    finishes; even rows run left to right, odd rows right to left.
    """
    order = []
    for r in range(rows):
        cs = range(cols) if r % 2 == 0 else range(cols - 1, -1, -1)
        order.extend(r * cols + c for c in cs)
    return order


def to_json(t: Topology) -> str:
    return json.dumps({"n": t.n, "edges": sorted(map(list, t.edges)), "family": t.family})


def from_json(text: str) -> Topology:
    obj = json.loads(text)
    edges = frozenset((min(u, v), max(u, v)) for u, v in obj["edges"])
    return Topology(int(obj["n"]), edges, obj.get("family", "custom"))
