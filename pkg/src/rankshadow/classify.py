"""Closedness classifier for rank-restricted PSD coordinate shadows.

:func:`classify` walks a first-match decision list over the pattern graph
and returns a :class:`ClosureVerdict` whose certificate names the rule that
fired together with checkable combinatorial evidence. Closed certificates
carry a completion recipe tag; NotClosed certificates carry the parameters
of a divergent witness family.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

from .errors import RankOutOfRange
from .graph import (
    DEFAULT_EXACT_LIMIT,
    PatternGraph,
    barvinok_threshold,
    complete_bipartite_partition,
    connected_components,
    find_noncyclic_path3,
    find_triangle,
    max_clique,
    max_independent_set,
    mixed_loop_edge,
)


class Status(enum.Enum):
    CLOSED = "Closed"
    NOT_CLOSED = "NotClosed"
    UNKNOWN = "Unknown"


RECIPES = {
    "RankZero": "zero",
    "LoopComponent": "loop-direct",
    "TrivialFullRank": "diagonal-padding",
    "RankAtLeastThreshold": "independent-set-schur",
    "CompleteBipartite": "bipartite",
    "IndependentSet": "independent-set-schur",
    "PerComponent": "stack",
}


@dataclass(frozen=True)
class Certificate:
    kind: str
    evidence: dict = field(default_factory=dict)
    recipe: Optional[str] = None
    witness: Optional[dict] = None


def _closed(kind: str, **evidence) -> tuple:
    return Status.CLOSED, Certificate(kind, evidence, recipe=RECIPES[kind])


def _not_closed(kind: str, witness: dict, **evidence) -> tuple:
    return Status.NOT_CLOSED, Certificate(kind, evidence, witness=witness)


@dataclass
class ClosureVerdict:
    status: Status
    certificate: Certificate
    rank: int
    vertices: tuple = ()
    components: tuple = ()
    heuristic: bool = False

    @property
    def is_closed(self) -> bool:
        return self.status is Status.CLOSED


class _Component:
    """One connected component with lazily computed combinatorial facts.

    All evidence is reported in ambient (original) vertex labels.
    """

    def __init__(self, g: PatternGraph, labels: tuple, r: int, exact_limit: int):
        self.g = g
        self.labels = labels
        self.r = r
        self.exact_limit = exact_limit

    @property
    def n(self) -> int:
        return self.g.n

    @property
    def exact(self) -> bool:
        return self.g.n <= self.exact_limit

    def lift(self, vertices) -> list:
        return [self.labels[v - 1] for v in vertices]

    @cached_property
    def fully_looped(self) -> bool:
        return len(self.g.loops) == self.g.n

    @cached_property
    def partition(self):
        return complete_bipartite_partition(self.g) if self.g.is_loopless else None

    @cached_property
    def independent(self) -> tuple:
        return max_independent_set(self.g, self.exact_limit)

    @cached_property
    def clique(self) -> tuple:
        return max_clique(self.g, self.exact_limit)


def _rule_rank_zero(c: _Component):
    if c.r == 0:
        return _closed("RankZero")


def _rule_loop_component(c: _Component):
    if c.fully_looped:
        return _closed("LoopComponent", loops=c.lift(sorted(c.g.loops)))


def _rule_trivial_full_rank(c: _Component):
    if c.g.is_loopless and c.r >= c.n:
        return _closed("TrivialFullRank", n=c.n)


def _rule_threshold(c: _Component):
    if not c.g.is_loopless:
        return None
    e = c.g.edge_count
    t = barvinok_threshold(e)
    if c.r >= min(c.n - 1, t):
        return _closed("RankAtLeastThreshold", edges=e, threshold=t, n=c.n)


def _rule_complete_bipartite(c: _Component):
    if c.partition is not None:
        s, t = c.partition
        return _closed("CompleteBipartite", partition=[c.lift(s), c.lift(t)])


def _rule_rank_one_not_bipartite(c: _Component):
    if not (c.g.is_loopless and c.r == 1 and c.partition is None):
        return None
    tri = find_triangle(c.g)
    if tri is not None:
        anchors = c.lift(tri)
        return _not_closed(
            "NotBipartiteRankOne",
            {"family": "Triangle", "anchors": anchors, "rank": 1},
            triangle=anchors,
        )
    path = find_noncyclic_path3(c.g)
    if path is None:  # pragma: no cover - excluded by the triangle/path characterisation
        raise AssertionError("connected triangle-free non-complete-bipartite graph without a 3-path")
    anchors = c.lift(path)
    return _not_closed(
        "NotBipartiteRankOne",
        {"family": "NoncyclicPath", "anchors": anchors, "rank": 1},
        path=anchors,
    )


def _rule_independent_set(c: _Component):
    if not c.g.is_loopless:
        return None
    k, members = c.independent
    if c.r >= c.n - k:
        return _closed("IndependentSet", set=c.lift(members), size=k, exact=c.exact)


def _rule_clique_exclusion(c: _Component):
    if not c.g.is_loopless or c.r < 1:
        return None
    k, members = c.clique
    if c.r > k - 2:
        return None
    # a single clique suffices: anchor a (r+2)-subclique, last vertex is the star centre
    j = c.r + 2
    clique = c.lift(members)
    witness = {"family": "Clique", "anchors": clique[:j], "rank": c.r}
    kind = "CompleteGraphExclusion" if (k == c.n and c.r == c.n - 2) else "CliquePackingExclusion"
    return _not_closed(kind, witness, cliques=[clique], chosen_j=[j], exact=c.exact)


RULES: list = [
    ("rank-zero", _rule_rank_zero),
    ("loop-component", _rule_loop_component),
    ("trivial-full-rank", _rule_trivial_full_rank),
    ("rank-threshold", _rule_threshold),
    ("complete-bipartite", _rule_complete_bipartite),
    ("rank-one-not-bipartite", _rule_rank_one_not_bipartite),
    ("independent-set", _rule_independent_set),
    ("clique-exclusion", _rule_clique_exclusion),
]


def _classify_component(c: _Component) -> ClosureVerdict:
    for _, rule in RULES:
        hit = rule(c)
        if hit is not None:
            status, cert = hit
            heuristic = not c.exact and cert.kind in (
                "IndependentSet", "CliquePackingExclusion", "CompleteGraphExclusion"
            )
            return ClosureVerdict(status, cert, c.r, tuple(c.labels), heuristic=heuristic)
    notes = [name for name, _ in RULES]
    if not c.exact:
        notes.append(f"independent set / clique searches were greedy (n={c.n} > {c.exact_limit})")
    cert = Certificate("Unknown", {"inapplicable": notes})
    return ClosureVerdict(Status.UNKNOWN, cert, c.r, tuple(c.labels), heuristic=not c.exact)


def _check_rank(g: PatternGraph, r: int) -> None:
    if not isinstance(r, int) or not 0 <= r <= g.n:
        raise RankOutOfRange(f"rank bound {r!r} outside [0, {g.n}]")


def combine(statuses) -> Status:
    statuses = list(statuses)
    if Status.NOT_CLOSED in statuses:
        return Status.NOT_CLOSED
    if Status.UNKNOWN in statuses:
        return Status.UNKNOWN
    return Status.CLOSED


def classify(g: PatternGraph, r: int, exact_limit: int = DEFAULT_EXACT_LIMIT) -> ClosureVerdict:
    """Decide closedness of the rank-``r`` coordinate shadow on pattern ``g``."""
    _check_rank(g, r)
    everyone = tuple(range(1, g.n + 1))
    if r == 0:
        return ClosureVerdict(Status.CLOSED, Certificate("RankZero", recipe="zero"), r, everyone)
    mixed = mixed_loop_edge(g)
    if mixed is not None:
        comp, (i, j) = mixed
        cert = Certificate(
            "MixedLoopComponent",
            {"component": comp, "pair": [i, j]},
            witness={"family": "MixedLoop", "anchors": [i, j], "rank": r},
        )
        return ClosureVerdict(Status.NOT_CLOSED, cert, r, everyone)
    parts = []
    comps = connected_components(g)
    for block, sub in zip(comps.blocks, comps.subgraphs):
        c = _Component(sub, block, min(r, sub.n), exact_limit)
        parts.append(_classify_component(c))
    status = combine(p.status for p in parts)
    cert = Certificate(
        "PerComponent",
        {"count": len(parts)},
        recipe=RECIPES["PerComponent"] if status is Status.CLOSED else None,
    )
    return ClosureVerdict(status, cert, r, everyone, tuple(parts), any(p.heuristic for p in parts))


@dataclass(frozen=True)
class RuleOutcome:
    rule: str
    status: Optional[Status]
    certificate: Optional[Certificate]


def evaluate_rules(g: PatternGraph, r: int, exact_limit: int = DEFAULT_EXACT_LIMIT) -> list:
    """Run every per-component rule (not first-match) on a connected graph."""
    _check_rank(g, r)
    if len(connected_components(g)) != 1:
        raise ValueError("evaluate_rules expects a connected graph")
    c = _Component(g, tuple(range(1, g.n + 1)), r, exact_limit)
    out = []
    for name, rule in RULES:
        hit = rule(c)
        out.append(RuleOutcome(name, *(hit if hit is not None else (None, None))))
    return out


def conflicting(outcomes) -> bool:
    fired = {o.status for o in outcomes if o.status is not None}
    return Status.CLOSED in fired and Status.NOT_CLOSED in fired


def iter_verdicts(verdict: ClosureVerdict):
    """Depth-first walk over a verdict and its component verdicts."""
    yield verdict
    for comp in verdict.components:
        yield from iter_verdicts(comp)

