"""Re-verification of classifier certificates.

Combinatorial evidence is re-checked against the edge set directly. NotClosed
certificates are instantiated as witness sequences: one element is checked
numerically and the limit obstruction is confirmed by the exact oracle.
Closed certificates are exercised by completing random rank-r data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import witness as wf
from .classify import ClosureVerdict, Status, combine
from .completion import check_completion, complete_for_verdict, project
from .errors import AuditFailed, RecipeInapplicable, WitnessError
from .graph import PatternGraph, connected_components
from .linalg import rank_eps
from .oracle import alt_proj_complete, min_rank_lower_bound, psd_completable, rank1_completable

ELEMENT_J = 10


@dataclass
class AuditReport:
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def require(self, claim: str, passed: bool, detail: str = "") -> None:
        self.checks.append({"claim": claim, "passed": bool(passed), "detail": detail})
        if not passed:
            raise AuditFailed(claim, detail)

    def note(self, claim: str, detail: str) -> None:
        self.checks.append({"claim": claim, "passed": True, "detail": detail})


def _check_witness(g: PatternGraph, spec: dict, r: int, report: AuditReport) -> None:
    try:
        seq = wf.from_spec(g, spec)
    except WitnessError as exc:
        report.require(f"{spec['family']} witness constructible", False, str(exc))
        return
    x, a = seq.element(ELEMENT_J)
    shadow = project(x, g)
    gap = max((abs(shadow.values[e] - v) / (1.0 + abs(v)) for e, v in a.values.items()), default=0.0)
    report.require(f"{seq.family} element projects onto its data", gap <= 1e-12, f"gap {gap:.2e}")
    k = rank_eps(x)
    report.require(f"{seq.family} element has rank <= {r}", k <= r, f"rank {k}")
    dist = a.distance(seq.limit)
    report.require(f"{seq.family} element near its limit", dist <= 2.0 / ELEMENT_J, f"distance {dist:.3e}")
    limit = seq.limit
    if seq.family == wf.MIXED_LOOP:
        ans = psd_completable(limit, search=False)
        report.require("mixed-loop limit is not PSD completable", ans.no, str(ans.certificate))
    elif seq.family in (wf.TRIANGLE, wf.PATH):
        ans = rank1_completable(limit, allow_loops=True)
        report.require(f"{seq.family} limit has no rank-1 completion", ans.no, str(ans.certificate))
    elif seq.family == wf.CLIQUE:
        bound, cert = min_rank_lower_bound(limit)
        report.require(f"clique limit needs rank > {r}", bound > r, f"bound {bound} via {cert}")
    else:
        report.note(f"{seq.family} limit", "experimental family; no exact obstruction claimed")


def _check_node(g: PatternGraph, v: ClosureVerdict, r: int, report: AuditReport) -> None:
    cert, ev = v.certificate, v.certificate.evidence
    kind = cert.kind
    if v.status is Status.CLOSED:
        report.require(f"{kind} carries a recipe", cert.recipe is not None)
    if v.status is Status.NOT_CLOSED and kind != "PerComponent":
        report.require(f"{kind} carries witness parameters", cert.witness is not None)

    if kind == "RankZero":
        report.require("rank bound is zero", r == 0, f"r={r}")
        return
    if kind == "MixedLoopComponent":
        i, j = ev["pair"]
        report.require(
            "mixed pair is loop/non-loop adjacent",
            (i, i) in g.edges and (j, j) not in g.edges and g.has_edge(i, j),
            f"pair {(i, j)}",
        )
        report.require("rank bound at least one", r >= 1)
        _check_witness(g, cert.witness, r, report)
        return
    if kind == "PerComponent":
        comps = connected_components(g)
        mine = sorted(tuple(sorted(c.vertices)) for c in v.components)
        report.require("components are the connected components", mine == sorted(comps.blocks))
        for c in v.components:
            report.require("component rank is min(r, n_c)", c.rank == min(r, len(c.vertices)))
            _check_node(g, c, c.rank, report)
        report.require("combined status", combine(c.status for c in v.components) is v.status)
        return

    verts = tuple(v.vertices)
    sub, _ = g.induced(verts)
    if kind == "LoopComponent":
        report.require("component fully looped", all(u in g.loops for u in verts))
    elif kind == "TrivialFullRank":
        report.require("loopless with r >= n_c", sub.is_loopless and r >= sub.n, f"r={r} n_c={sub.n}")
    elif kind == "RankAtLeastThreshold":
        e = sub.edge_count
        t = next(t for t in range(e + 2) if e <= (t + 2) * (t + 1) // 2 - 1)
        report.require("threshold arithmetic", ev["edges"] == e and ev["threshold"] == t, f"e={e} t={t}")
        report.require("r >= min(n_c - 1, t)", r >= min(sub.n - 1, t))
    elif kind == "CompleteBipartite":
        s, t = ev["partition"]
        report.require("partition covers component", sorted(s + t) == sorted(verts))
        missing = [(a, b) for a in s for b in t if not g.has_edge(a, b)]
        inner = [(a, b) for side in (s, t) for a in side for b in side if a <= b and g.has_edge(a, b)]
        report.require("every cross pair is an edge", not missing, f"missing {missing}")
        report.require("no edge inside a side", not inner, f"inner {inner}")
    elif kind == "NotBipartiteRankOne":
        report.require("rank bound is one", r == 1)
        if "triangle" in ev:
            report.require("triangle is a triangle", g.is_clique(ev["triangle"]))
        else:
            v1, v2, v3, v4 = ev["path"]
            report.require(
                "path is a non-cyclic 3-path",
                all(g.has_edge(a, b) for a, b in ((v1, v2), (v2, v3), (v3, v4))) and not g.has_edge(v1, v4),
            )
        _check_witness(g, cert.witness, r, report)
    elif kind == "IndependentSet":
        members = ev["set"]
        report.require("set is independent", g.is_independent(members) and set(members) <= set(verts))
        report.require("r >= n_c - k", r >= sub.n - len(members), f"r={r} n_c={sub.n} k={len(members)}")
    elif kind in ("CliquePackingExclusion", "CompleteGraphExclusion"):
        cliques, js = ev["cliques"], ev["chosen_j"]
        for c, j in zip(cliques, js):
            report.require("clique is a clique", g.is_clique(c) and set(c) <= set(verts), f"{c}")
            report.require("3 <= j <= k", 3 <= j <= len(c), f"j={j} k={len(c)}")
        report.require("r = sum(j - 2)", r == sum(j - 2 for j in js), f"r={r}")
        if kind == "CompleteGraphExclusion":
            report.require("component is complete with r = n_c - 2",
                           sub.is_clique(range(1, sub.n + 1)) and r == sub.n - 2)
        _check_witness(g, cert.witness, r, report)
    elif kind == "Unknown":
        report.note("unknown verdict", "no claim to verify")
    else:
        report.require(f"known certificate kind {kind}", False)


def audit_certificate(g: PatternGraph, r: int, verdict: ClosureVerdict, seed: int = 0) -> AuditReport:
    """Re-verify ``verdict`` for ``(g, r)``; raises :class:`AuditFailed` on a broken claim."""
    report = AuditReport()
    _check_node(g, verdict, r, report)
    if verdict.status is Status.CLOSED:
        rng = np.random.default_rng(seed)
        f = rng.standard_normal((g.n, r))
        pm = project(f @ f.T, g)
        try:
            res = complete_for_verdict(pm, r, verdict)
            chk = check_completion(res.matrix, pm, r)
            report.require("recipe completes random rank-r data", chk["ok"], str(chk))
        except RecipeInapplicable as exc:
            ans = alt_proj_complete(pm, r, seed=seed) if r >= 1 else None
            if ans is not None and ans.yes:
                report.note("random rank-r data completed by search", str(exc))
            else:
                report.note("random rank-r data not completed", f"recipe inapplicable: {exc}")
    return report
