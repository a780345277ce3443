"""Divergent witness sequences certifying non-closedness.

Every family here is a sum of outer products of vectors whose anchor
entries are signed monomials ``sign * j**e`` with half-integer ``e``.
Entries of ``X_j`` are therefore finite sums of integer powers of ``j``,
which gives exact closed forms for the projected data ``a_j`` and for the
limit (the ``j**0`` coefficient). Vertices outside the anchors carry zeros,
so a witness stays valid inside any ambient pattern.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .completion import PartialMatrix
from .errors import (
    NotAClique,
    NotATriangle,
    PairInvalid,
    PathClosesCycle,
    UnsupportedPattern,
    WitnessError,
)
from .graph import PatternGraph

HALF = Fraction(1, 2)

TRIANGLE = "Triangle"
PATH = "NoncyclicPath"
CLIQUE = "Clique"
MIXED_LOOP = "MixedLoop"
ODD_CYCLE = "OddCycleOrthogonal"
FAMILIES = (TRIANGLE, PATH, CLIQUE, MIXED_LOOP, ODD_CYCLE)


@dataclass(frozen=True)
class WitnessSequence:
    """``j -> (X_j, a_j)`` with ``X_j = F_j F_j.T`` and ``a_j = P(X_j)``.

    ``vectors`` holds, per rank-one term, one ``(sign, exponent)`` pair per anchor.
    """

    family: str
    anchors: tuple
    pattern: PatternGraph
    rank: int
    vectors: tuple
    experimental: bool = False

    def __post_init__(self):
        for u, v in self.pattern.edges:
            coeffs = self._coefficients(u, v)
            if any(e > 0 and c != 0 for e, c in coeffs.items()):
                raise WitnessError(f"entry ({u}, {v}) of the {self.family} family diverges")

    @property
    def n(self) -> int:
        return self.pattern.n

    def factor(self, j) -> np.ndarray:
        j = float(j)
        f = np.zeros((self.n, len(self.vectors)))
        for k, vec in enumerate(self.vectors):
            for a, (sign, e) in zip(self.anchors, vec):
                f[a - 1, k] = sign * j ** float(e)
        return f

    def matrix(self, j) -> np.ndarray:
        f = self.factor(j)
        return f @ f.T

    def _coefficients(self, u: int, v: int) -> dict:
        """Integer exponent -> coefficient for the (u, v) entry of ``X_j``."""
        pos = {a: k for k, a in enumerate(self.anchors)}
        out: dict = defaultdict(int)
        if u not in pos or v not in pos:
            return out
        for vec in self.vectors:
            (su, eu), (sv, ev) = vec[pos[u]], vec[pos[v]]
            if su == 0 or sv == 0:
                continue
            e = eu + ev
            if e.denominator != 1:
                raise WitnessError("non-integer exponent in entry product")
            out[int(e)] += su * sv
        return out

    def entry(self, j: int, u: int, v: int) -> float:
        """Closed-form ``X_j[u, v]`` (exact rational arithmetic, then rounded once)."""
        total = Fraction(0)
        for e, c in self._coefficients(u, v).items():
            total += c * Fraction(j) ** e
        return float(total)

    def data(self, j: int) -> PartialMatrix:
        return PartialMatrix(self.pattern, {(u, v): self.entry(j, u, v) for u, v in self.pattern.edges})

    def element(self, j: int) -> tuple:
        return self.matrix(j), self.data(j)

    @property
    def limit(self) -> PartialMatrix:
        return PartialMatrix(
            self.pattern,
            {(u, v): float(self._coefficients(u, v).get(0, 0)) for u, v in self.pattern.edges},
        )

    def describe(self) -> dict:
        return {
            "family": self.family,
            "anchors": list(self.anchors),
            "rank": self.rank,
            "n": self.n,
            "experimental": self.experimental,
        }


def _mono(e) -> tuple:
    return (1, Fraction(e))


def _require_loopless(g: PatternGraph, vertices, err):
    bad = [v for v in vertices if v in g.loops]
    if bad:
        raise err(f"anchor vertices {bad} carry loops")


def _require_distinct(vertices, err):
    if len(set(vertices)) != len(vertices):
        raise err(f"anchors {list(vertices)} are not distinct")
    return tuple(int(v) for v in vertices)


def triangle_witness(g: PatternGraph, triangle) -> WitnessSequence:
    """Rank one: ``v_j = (j^-1/2, j^-1/2, j^1/2)`` on ``(p, q, s)``; limit ``(0, 1, 1)``."""
    p, q, s = _require_distinct(triangle, NotATriangle)
    if not g.is_clique((p, q, s)):
        raise NotATriangle(f"{(p, q, s)} is not a triangle")
    _require_loopless(g, (p, q, s), NotATriangle)
    vec = (_mono(-HALF), _mono(-HALF), _mono(HALF))
    return WitnessSequence(TRIANGLE, (p, q, s), g, 1, (vec,))


def path_witness(g: PatternGraph, path) -> WitnessSequence:
    """Rank one: ``v_j = (j^1/2, j^-1/2, j^-1/2, j^1/2)``; the (v1, v4) entry diverges."""
    v1, v2, v3, v4 = _require_distinct(path, WitnessError)
    if not all(g.has_edge(a, b) for a, b in ((v1, v2), (v2, v3), (v3, v4))):
        raise WitnessError(f"{path} is not a path in the pattern")
    if g.has_edge(v1, v4):
        raise PathClosesCycle(f"edge ({v1}, {v4}) closes the path into a 4-cycle")
    _require_loopless(g, (v1, v2, v3, v4), WitnessError)
    vec = (_mono(HALF), _mono(-HALF), _mono(-HALF), _mono(HALF))
    return WitnessSequence(PATH, (v1, v2, v3, v4), g, 1, (vec,))


def clique_witness(g: PatternGraph, clique, r: int | None = None) -> WitnessSequence:
    """Rank one on a k-clique: ``1/j`` on the first k-1 vertices, ``j`` on the last.

    The limit has an orthogonal star (pairwise-zero leaves, unit links to
    the centre), so it needs rank k-1 and excludes rank bound ``k - 2``.
    """
    verts = _require_distinct(clique, NotAClique)
    k = len(verts)
    if k < 3 or not g.is_clique(verts):
        raise NotAClique(f"{list(verts)} is not a clique of size > 2")
    _require_loopless(g, verts, NotAClique)
    r = k - 2 if r is None else r
    vec = tuple(_mono(-1) for _ in range(k - 1)) + (_mono(1),)
    return WitnessSequence(CLIQUE, verts, g, r, (vec,))


def mixed_loop_witness(g: PatternGraph, pair, r: int = 1) -> WitnessSequence:
    """``a_ii = 1/j``, ``a_ij = 1`` with the free diagonal ``X_jj = j``; limit not PSD-completable."""
    i, j = _require_distinct(pair, PairInvalid)
    if (i, i) not in g.edges or (j, j) in g.edges or not g.has_edge(i, j):
        raise PairInvalid(f"need loop at {i}, no loop at {j}, and edge ({i}, {j})")
    vec = (_mono(-HALF), _mono(HALF))
    return WitnessSequence(MIXED_LOOP, (i, j), g, r, (vec,))


def odd_cycle_orthogonal_witness(g: PatternGraph, anchors) -> WitnessSequence:
    """Rank two: ``v+-_j = (j^-1/2, +-j^-1/2, j^-1/2, +-j^-1/2, j^1/2, +-j^1/2)``.

    Experimental. Odd anchors and even anchors each form a triangle witness
    scaled by 2, and the cross entries cancel to zero.
    """
    u = _require_distinct(anchors, UnsupportedPattern)
    if len(u) != 6:
        raise UnsupportedPattern("six anchor vertices required")
    _require_loopless(g, u, UnsupportedPattern)
    for tri in ((u[0], u[2], u[4]), (u[1], u[3], u[5])):
        if not g.is_clique(tri):
            raise UnsupportedPattern(f"anchors {tri} must be mutually adjacent")
    exps = (-HALF, -HALF, -HALF, -HALF, HALF, HALF)
    plus = tuple((1, e) for e in exps)
    minus = tuple(((-1) ** k, e) for k, e in enumerate(exps))
    return WitnessSequence(ODD_CYCLE, u, g, 2, (plus, minus), experimental=True)


def from_spec(g: PatternGraph, spec: dict) -> WitnessSequence:
    """Build a witness from a certificate's ``witness`` dict (``family``, ``anchors``, ``rank``)."""
    family, anchors, r = spec["family"], spec["anchors"], spec.get("rank")
    if family == TRIANGLE:
        return triangle_witness(g, anchors)
    if family == PATH:
        return path_witness(g, anchors)
    if family == CLIQUE:
        return clique_witness(g, anchors, r)
    if family == MIXED_LOOP:
        return mixed_loop_witness(g, anchors, r or 1)
    if family == ODD_CYCLE:
        return odd_cycle_orthogonal_witness(g, anchors)
    raise WitnessError(f"unknown witness family {family!r}")
