"""Entry patterns as undirected graphs with self-loops.

Vertices are 1-indexed. An edge ``(i, j)`` with ``i <= j`` marks the
specified entry ``X[i, j]``; ``(i, i)`` is a loop (specified diagonal).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional

from .errors import GraphError

DEFAULT_EXACT_LIMIT = 20


def _norm_pair(e) -> tuple[int, int]:
    try:
        i, j = (int(x) for x in e)
    except (TypeError, ValueError) as exc:
        raise GraphError(f"edge {e!r} is not a pair of integers") from exc
    return (i, j) if i <= j else (j, i)


@dataclass(frozen=True)
class PatternGraph:
    """Graph ``G = (V, E)`` of specified entries of an ``n x n`` symmetric matrix."""

    n: int
    edges: frozenset

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise GraphError(f"vertex count must be a positive integer, got {self.n!r}")
        for i, j in self.edges:
            if not (1 <= i <= j <= self.n):
                raise GraphError(f"edge ({i}, {j}) out of range for n={self.n}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable) -> "PatternGraph":
        seen = set()
        for e in edges:
            p = _norm_pair(e)
            if p in seen:
                raise GraphError(f"duplicate edge {p}")
            seen.add(p)
        return cls(int(n), frozenset(seen))

    @classmethod
    def complete(cls, n: int) -> "PatternGraph":
        return cls(n, frozenset((i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)))

    @classmethod
    def path(cls, n: int) -> "PatternGraph":
        return cls(n, frozenset((i, i + 1) for i in range(1, n)))

    @classmethod
    def cycle(cls, n: int) -> "PatternGraph":
        return cls(n, frozenset(_norm_pair((i, i % n + 1)) for i in range(1, n + 1)))

    @classmethod
    def complete_multipartite(cls, *sizes: int) -> "PatternGraph":
        parts, start = [], 1
        for s in sizes:
            parts.append(range(start, start + s))
            start += s
        edges = {
            (u, v)
            for a in range(len(parts))
            for b in range(a + 1, len(parts))
            for u in parts[a]
            for v in parts[b]
        }
        return cls(start - 1, frozenset(edges))

    # -- derived structure -------------------------------------------------

    @cached_property
    def sorted_edges(self) -> tuple:
        return tuple(sorted(self.edges))

    @cached_property
    def loops(self) -> frozenset:
        return frozenset(i for i, j in self.edges if i == j)

    @cached_property
    def nonloops(self) -> frozenset:
        return frozenset(range(1, self.n + 1)) - self.loops

    @property
    def is_loopless(self) -> bool:
        return not self.loops

    @cached_property
    def adjacency(self) -> dict:
        """Neighbour sets, loops excluded."""
        adj = {v: set() for v in range(1, self.n + 1)}
        for i, j in self.edges:
            if i != j:
                adj[i].add(j)
                adj[j].add(i)
        return {v: frozenset(s) for v, s in adj.items()}

    @cached_property
    def _bits(self) -> list:
        # bit (v-1) set in _bits[u-1] iff uv is a non-loop edge
        bits = [0] * self.n
        for i, j in self.edges:
            if i != j:
                bits[i - 1] |= 1 << (j - 1)
                bits[j - 1] |= 1 << (i - 1)
        return bits

    def has_edge(self, i: int, j: int) -> bool:
        return ((i, j) if i <= j else (j, i)) in self.edges

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def induced(self, vertices: Iterable[int]) -> tuple["PatternGraph", tuple]:
        """Induced subgraph relabelled ``1..k`` in sorted order, plus the label map."""
        labels = tuple(sorted(set(vertices)))
        index = {v: k + 1 for k, v in enumerate(labels)}
        sub = frozenset(
            (index[i], index[j]) for i, j in self.edges if i in index and j in index
        )
        return PatternGraph(len(labels), sub), labels

    def complement(self) -> "PatternGraph":
        """Loopless complement."""
        return PatternGraph(
            self.n,
            frozenset(
                (i, j)
                for i in range(1, self.n + 1)
                for j in range(i + 1, self.n + 1)
                if (i, j) not in self.edges
            ),
        )

    def is_clique(self, vertices: Iterable[int]) -> bool:
        vs = list(vertices)
        return all(self.has_edge(a, b) for k, a in enumerate(vs) for b in vs[k + 1:])

    def is_independent(self, vertices: Iterable[int]) -> bool:
        vs = list(vertices)
        return not any(self.has_edge(a, b) for k, a in enumerate(vs) for b in vs[k + 1:])


@dataclass(frozen=True)
class ComponentDecomposition:
    """Connected components ``H_1..H_k`` with their induced subgraphs."""

    blocks: tuple  # tuple of sorted vertex tuples, ordered by smallest vertex
    subgraphs: tuple  # induced PatternGraph per block, relabelled 1..n_i

    @property
    def sizes(self) -> tuple:
        return tuple(len(b) for b in self.blocks)

    def __len__(self):
        return len(self.blocks)


def connected_components(g: PatternGraph) -> ComponentDecomposition:
    seen: set = set()
    blocks = []
    for start in range(1, g.n + 1):
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for w in g.adjacency[u]:
                if w not in seen:
                    seen.add(w)
                    comp.append(w)
                    queue.append(w)
        blocks.append(tuple(sorted(comp)))
    subgraphs = tuple(g.induced(b)[0] for b in blocks)
    return ComponentDecomposition(tuple(blocks), subgraphs)


def mixed_loop_edge(g: PatternGraph) -> Optional[tuple]:
    """Find an adjacent pair ``(i, j)`` with ``i`` looped and ``j`` not, inside one component.

    Returns ``(component index, (i, j))`` or ``None`` when every component
    is entirely looped or entirely loopless.
    """
    comps = connected_components(g)
    for c, block in enumerate(comps.blocks):
        members = set(block)
        if not (members & g.loops) or not (members & g.nonloops):
            continue
        # a connected component with both kinds always has a crossing edge
        for i in sorted(members & g.loops):
            for j in sorted(g.adjacency[i]):
                if j not in g.loops:
                    return c, (i, j)
    return None


def two_coloring(g: PatternGraph) -> Optional[dict]:
    """BFS 2-colouring (colours 0/1) ignoring loops, or ``None`` on an odd cycle."""
    color: dict = {}
    for s in range(1, g.n + 1):
        if s in color:
            continue
        color[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in g.adjacency[u]:
                if w not in color:
                    color[w] = 1 - color[u]
                    queue.append(w)
                elif color[w] == color[u]:
                    return None
    return color


def complete_bipartite_partition(g: PatternGraph) -> Optional[tuple]:
    """Return ``(S, T)`` if the loopless connected graph ``g`` is complete bipartite.

    ``S`` holds vertex 1. A single vertex yields ``((1,), ())``.
    """
    if not g.is_loopless:
        raise GraphError("complete_bipartite_partition requires a loopless graph")
    if len(connected_components(g)) != 1:
        raise GraphError("complete_bipartite_partition requires a connected graph")
    color = two_coloring(g)
    if color is None:
        return None
    s = tuple(v for v in range(1, g.n + 1) if color[v] == color[1])
    t = tuple(v for v in range(1, g.n + 1) if color[v] != color[1])
    if len(g.edges) != len(s) * len(t):
        return None
    return s, t


def find_triangle(g: PatternGraph) -> Optional[tuple]:
    """Lexicographically first triangle ``(i, j, k)``, ``i < j < k``."""
    adj = g.adjacency
    for i, j in g.sorted_edges:
        if i == j:
            continue
        common = [k for k in adj[i] & adj[j] if k > j]
        if common:
            return i, j, min(common)
    return None


def find_noncyclic_path3(g: PatternGraph) -> Optional[tuple]:
    """Distinct ``(v1, v2, v3, v4)`` with edges v1v2, v2v3, v3v4 and ``v1v4`` absent."""
    if not g.is_loopless:
        raise GraphError("find_noncyclic_path3 requires a loopless graph")
    adj = g.adjacency
    for v2 in range(1, g.n + 1):
        for v3 in sorted(adj[v2]):
            for v1 in sorted(adj[v2] - {v3}):
                for v4 in sorted(adj[v3] - {v2, v1}):
                    if v4 not in adj[v1]:
                        return v1, v2, v3, v4
    return None


# -- cliques and independent sets ---------------------------------------------


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _bit_list(mask: int) -> list:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _max_clique_exact(bits: list) -> int:
    """Branch and bound with greedy-colouring bounds over bitmask adjacency."""
    n = len(bits)
    best = [0, 0]  # mask, size

    def color_sort(p: int):
        order, colors = [], []
        uncolored, c = p, 0
        while uncolored:
            c += 1
            q = uncolored
            while q:
                low = q & -q
                v = low.bit_length() - 1
                q &= ~bits[v] & ~low
                uncolored &= ~low
                order.append(v)
                colors.append(c)
        return order, colors

    def expand(r: int, size: int, p: int):
        order, colors = color_sort(p)
        for idx in range(len(order) - 1, -1, -1):
            if size + colors[idx] <= best[1]:
                return
            v = order[idx]
            r2 = r | (1 << v)
            p2 = p & bits[v]
            if p2:
                expand(r2, size + 1, p2)
            elif size + 1 > best[1]:
                best[0], best[1] = r2, size + 1
            p &= ~(1 << v)

    if n:
        expand(0, 0, (1 << n) - 1)
    return best[0]


def _max_clique_greedy(bits: list) -> int:
    n = len(bits)
    best = 0
    for start in range(n):
        clique = 1 << start
        cand = bits[start]
        while cand:
            v = max(_bit_list(cand), key=lambda u: _popcount(bits[u] & cand))
            clique |= 1 << v
            cand &= bits[v]
        if _popcount(clique) > _popcount(best):
            best = clique
    return best


def max_clique(g: PatternGraph, exact_limit: int = DEFAULT_EXACT_LIMIT) -> tuple:
    """Largest clique found: exact for ``n <= exact_limit``, greedy otherwise."""
    bits = g._bits
    mask = _max_clique_exact(bits) if g.n <= exact_limit else _max_clique_greedy(bits)
    verts = tuple(v + 1 for v in _bit_list(mask))
    assert g.is_clique(verts)
    return len(verts), verts


def max_independent_set(g: PatternGraph, exact_limit: int = DEFAULT_EXACT_LIMIT) -> tuple:
    """Size and members of a maximum (or, past ``exact_limit``, greedy) independent set."""
    full = (1 << g.n) - 1
    comp = [full & ~b & ~(1 << v) for v, b in enumerate(g._bits)]
    mask = _max_clique_exact(comp) if g.n <= exact_limit else _max_clique_greedy(comp)
    verts = tuple(v + 1 for v in _bit_list(mask))
    assert g.is_independent(verts)
    return len(verts), verts


def _maximal_cliques_with(v: int, allowed: int, bits: list):
    """Cliques containing ``v`` that are maximal within ``allowed`` (Bron-Kerbosch)."""

    def bk(r: int, p: int, x: int):
        if not p and not x:
            yield r
            return
        pivot_pool = p | x
        pivot = max(_bit_list(pivot_pool), key=lambda u: _popcount(p & bits[u]))
        for u in _bit_list(p & ~bits[pivot]):
            ub = 1 << u
            yield from bk(r | ub, p & bits[u], x & bits[u])
            p &= ~ub
            x |= ub

    yield from bk(1 << v, bits[v] & allowed, 0)


def _packing_exact(bits: list) -> list:
    n = len(bits)
    best_val = [-1]
    best: list = [[]]

    def search(rem: int, value: int, chosen: list):
        cnt = _popcount(rem)
        bound = value + (cnt - 2 if cnt >= 3 else 0)
        if bound <= best_val[0]:
            return
        if cnt < 3:
            best_val[0], best[0] = value, list(chosen)
            return
        low = rem & -rem
        v = low.bit_length() - 1
        # an optimal packing exists whose cliques are maximal in the
        # not-yet-assigned vertices (growing a clique never loses value)
        for c in _maximal_cliques_with(v, rem, bits):
            k = _popcount(c)
            if k >= 3:
                chosen.append(c)
                search(rem & ~c, value + k - 2, chosen)
                chosen.pop()
        search(rem & ~low, value, chosen)

    search((1 << n) - 1, 0, [])
    return best[0]


def _packing_greedy(bits: list) -> list:
    rem = (1 << len(bits)) - 1
    out = []
    while True:
        sub = [b & rem if (rem >> v) & 1 else 0 for v, b in enumerate(bits)]
        c = _max_clique_greedy(sub) & rem
        if _popcount(c) < 3:
            return out
        out.append(c)
        rem &= ~c


def disjoint_clique_packing(g: PatternGraph, exact_limit: int = DEFAULT_EXACT_LIMIT) -> list:
    """Vertex-disjoint cliques of size >= 3 maximising ``sum(k_i - 2)``."""
    if not g.is_loopless:
        raise GraphError("disjoint_clique_packing requires a loopless graph")
    masks = _packing_exact(g._bits) if g.n <= exact_limit else _packing_greedy(g._bits)
    cliques = sorted((tuple(v + 1 for v in _bit_list(m)) for m in masks), key=lambda c: (-len(c), c))
    for c in cliques:
        assert len(c) >= 3 and g.is_clique(c)
    return cliques


def complete_multipartite_parts(g: PatternGraph) -> Optional[list]:
    """Parts of ``g`` if it is complete multipartite (complement is a union of cliques)."""
    comp = g.complement()
    comps = connected_components(comp)
    for block in comps.blocks:
        if not comp.is_clique(block):
            return None
    return [list(b) for b in comps.blocks]


def barvinok_threshold(edge_count: int) -> int:
    """Least ``t >= 0`` with ``edge_count <= (t + 2)(t + 1)/2 - 1``.

    Equals ``ceil(-3/2 + sqrt(9 + 8 |E|)/2)``; evaluated in integers so the
    ceiling is exact for every edge count.
    """
    e = int(edge_count)
    if e < 0:
        raise ValueError("edge count must be nonnegative")
    # (t+1)(t+2) >= 2e + 2  <=>  (2t+3)^2 >= 8e + 9
    t = max(0, (math.isqrt(8 * e + 9) - 3) // 2)
    while (2 * t + 3) ** 2 < 8 * e + 9:
        t += 1
    while t > 0 and (2 * t + 1) ** 2 >= 8 * e + 9:
        t -= 1
    return t
