"""Independent completability oracle.

Exact routines answer Yes with a verified completion or No with an
obstruction that can be re-checked by hand. The nonconvex search
(:func:`alt_proj_complete`) only ever answers Yes or Inconclusive.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import least_squares

from . import linalg
from .completion import PartialMatrix, check_completion, diagonal_padding
from .errors import LoopsUnsupported
from .graph import PatternGraph, connected_components, max_clique

ZERO_TOL = 1e-12
EQ_TOL = 1e-9
DEFAULT_SEEDS = 16
DEFAULT_MAX_ITERS = 5000
DEFAULT_RESIDUAL_TOL = 1e-9


class Answer(enum.Enum):
    YES = "Yes"
    NO = "No"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class OracleAnswer:
    status: Answer
    completion: Optional[np.ndarray] = None
    certificate: Optional[dict] = None
    info: dict = field(default_factory=dict)

    @property
    def yes(self) -> bool:
        return self.status is Answer.YES

    @property
    def no(self) -> bool:
        return self.status is Answer.NO


def _is_zero(v: float, scale: float) -> bool:
    return abs(v) <= ZERO_TOL * (1.0 + scale)


def _no(kind: str, **evidence) -> OracleAnswer:
    return OracleAnswer(Answer.NO, certificate={"kind": kind, **evidence})


# -- rank one ---------------------------------------------------------------


def rank1_completable(pm: PartialMatrix, allow_loops: bool = False) -> OracleAnswer:
    """Decide whether some ``x`` has ``x_i x_j = a_ij`` on every specified entry.

    Zero entries force one endpoint to vanish; vertices with a nonzero
    incident entry cannot vanish, every other vertex is set to zero. On the
    remaining nonzero core, magnitudes propagate along a spanning forest
    with one free scale ``t`` per tree; every non-tree entry becomes either
    an exact product check or an equation for ``t**2``.
    """
    g = pm.pattern
    if g.loops and not allow_loops:
        raise LoopsUnsupported("pattern has loops; pass allow_loops=True to constrain x_i**2")
    scale = pm.max_abs()
    nonzero_adj: dict = {v: [] for v in range(1, g.n + 1)}
    forced = set()
    zero_edges = []
    for (i, j), a in sorted(pm.values.items()):
        if i == j:
            if _is_zero(a, scale):
                zero_edges.append((i, i))
            elif a < 0:
                return _no("SpecifiedBlockRank", submatrix=[i], eigenvalue=a)
            else:
                forced.add(i)
                nonzero_adj[i].append((i, a))
            continue
        if _is_zero(a, scale):
            zero_edges.append((i, j))
        else:
            forced.update((i, j))
            nonzero_adj[i].append((j, a))
            nonzero_adj[j].append((i, a))

    def support(v):
        for w, _ in nonzero_adj[v]:
            return [v, w] if w != v else [v]
        return [v]

    for i, j in zero_edges:
        if i in forced and j in forced:
            return _no(
                "ZeroPropagation",
                zero_entry=[i, j],
                support={str(i): support(i), str(j): support(j)},
            )

    core_edges = [
        (i, j, a) for (i, j), a in sorted(pm.values.items()) if i in forced and j in forced
    ]
    coef: dict = {}
    parity: dict = {}
    parent: dict = {}
    x = np.zeros(g.n)
    for root in sorted(forced):
        if root in coef:
            continue
        # x_v = coef[v] * t ** (+1 if parity 0 else -1)
        coef[root], parity[root], parent[root] = 1.0, 0, None
        tree = [root]
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for w, a in nonzero_adj[u]:
                if w not in coef:
                    coef[w] = a / coef[u]
                    parity[w] = 1 - parity[u]
                    parent[w] = u
                    tree.append(w)
                    queue.append(w)
        members = set(tree)
        t_sq = None
        t_sq_edge = None
        for u, w, a in core_edges:
            if u not in members or (u != w and (parent[w] == u or parent[u] == w)):
                continue
            prod = coef[u] * coef[w]
            if parity[u] != parity[w]:
                if abs(prod - a) > EQ_TOL * abs(a):
                    return _no("CycleInconsistency", edges=_cycle(parent, u, w))
                continue
            s = a / prod if parity[u] == 0 else prod / a
            if s <= 0:
                return _no("CycleInconsistency", edges=_cycle(parent, u, w))
            if t_sq is None:
                t_sq, t_sq_edge = s, (u, w)
            elif abs(s - t_sq) > EQ_TOL * t_sq:
                return _no(
                    "CycleInconsistency",
                    edges=_cycle(parent, u, w) + _cycle(parent, *t_sq_edge),
                )
        t = math.sqrt(t_sq) if t_sq is not None else 1.0
        for v in tree:
            x[v - 1] = coef[v] * (t if parity[v] == 0 else 1.0 / t)

    completion = np.outer(x, x)
    res = check_completion(completion, pm, 1)
    if res["data_error"] > 1e-7 * (1.0 + scale):  # pragma: no cover - guarded by the algebra above
        return OracleAnswer(Answer.INCONCLUSIVE, info={"reason": "verification failed", **res})
    return OracleAnswer(Answer.YES, completion, info={"x": x.tolist()})


def _cycle(parent: dict, u: int, w: int) -> list:
    """Edges of the tree path ``u .. w`` closed by the entry ``(u, w)``."""
    if u == w:
        return [[u, u]]

    def up(v):
        path = [v]
        while parent[path[-1]] is not None:
            path.append(parent[path[-1]])
        return path

    pu, pw = up(u), up(w)
    common = set(pu) & set(pw)
    pu = pu[: next(k for k, v in enumerate(pu) if v in common) + 1]
    pw = pw[: next(k for k, v in enumerate(pw) if v in common) + 1]
    walk = pu + pw[-2::-1]
    edges = [sorted(e) for e in zip(walk, walk[1:])]
    return edges + [sorted((u, w))]


# -- PSD completability -----------------------------------------------------


def _specified_cliques(g: PatternGraph) -> list:
    """Maximal vertex sets whose principal submatrix is fully specified."""
    looped = sorted(g.loops)
    if not looped:
        return []
    sub, labels = g.induced(looped)
    out = []
    remaining = set(range(1, sub.n + 1))
    # enumerate maximal cliques by repeated Bron-Kerbosch on the looped subgraph
    adj = sub.adjacency

    def bk(r, p, x):
        if not p and not x:
            out.append(tuple(labels[v - 1] for v in sorted(r)))
            return
        pivot = max(p | x, key=lambda u: len(adj[u] & p))
        for v in list(p - adj[pivot]):
            bk(r | {v}, p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    bk(set(), remaining, set())
    return out


def psd_completable(pm: PartialMatrix, search: bool = True, seed: int = 0) -> OracleAnswer:
    """Exact No on diagonal / zero-diagonal / specified-block obstructions; Yes by construction."""
    g = pm.pattern
    scale = pm.max_abs()
    for i in sorted(g.loops):
        if pm[i, i] < 0 and not _is_zero(pm[i, i], scale):
            return _no("SpecifiedBlockRank", submatrix=[i], eigenvalue=pm[i, i])
    for i in sorted(g.loops):
        if _is_zero(pm[i, i], scale):
            for j in sorted(g.adjacency[i]):
                if not _is_zero(pm[i, j], scale):
                    return _no("ZeroPropagation", chain=[i, j], zero_diagonal=i, entry=pm[i, j])
    for block in _specified_cliques(g):
        sub = np.array([[pm[a, b] for b in block] for a in block])
        lam = float(linalg.eig_sym(sub)[0][-1])
        if lam < -EQ_TOL * (1.0 + np.abs(sub).max()):
            return _no("SpecifiedBlockRank", submatrix=list(block), eigenvalue=lam)

    comps = connected_components(g)
    blocks = []
    for block in comps.blocks:
        sub = pm.restrict(block)
        if sub.pattern.is_loopless:
            blocks.append(diagonal_padding(sub))
            continue
        if sub.pattern.edge_count == sub.n * (sub.n + 1) // 2:
            blocks.append(sub.padded())
            continue
        if not search:
            return OracleAnswer(Answer.INCONCLUSIVE, info={"component": list(block)})
        found = alt_proj_complete(sub, sub.n, seed=seed)
        if not found.yes:
            return OracleAnswer(Answer.INCONCLUSIVE, info={"component": list(block)})
        blocks.append(found.completion)
    x = np.zeros((g.n, g.n))
    for block, blk in zip(comps.blocks, blocks):
        idx = [v - 1 for v in block]
        x[np.ix_(idx, idx)] = blk
    res = check_completion(x, pm, g.n)
    if not res["ok"]:  # pragma: no cover
        return OracleAnswer(Answer.INCONCLUSIVE, info=res)
    return OracleAnswer(Answer.YES, x, info=res)


# -- rank lower bounds ------------------------------------------------------


def orthogonal_star_bound(pm: PartialMatrix) -> tuple:
    """Largest star: centre ``c`` and leaves with nonzero links to ``c`` and pairwise zero entries.

    In any Gram representation the leaf vectors are nonzero and mutually
    orthogonal, so every PSD completion has rank at least the leaf count.
    """
    g = pm.pattern
    scale = pm.max_abs()
    best = (0, None, [])
    for c in range(1, g.n + 1):
        leaves = [v for v in sorted(g.adjacency[c]) if not _is_zero(pm[c, v], scale)]
        if not leaves:
            continue
        # leaves joined when their entry is specified and zero
        edges = [
            (a + 1, b + 1)
            for a in range(len(leaves))
            for b in range(a + 1, len(leaves))
            if g.has_edge(leaves[a], leaves[b]) and _is_zero(pm[leaves[a], leaves[b]], scale)
        ]
        k, members = max_clique(PatternGraph(len(leaves), frozenset(edges)))
        if k > best[0]:
            best = (k, c, [leaves[m - 1] for m in members])
    return best


def specified_block_bound(pm: PartialMatrix, max_n: int = 12) -> tuple:
    """Max rank of a fully specified off-diagonal block ``X[S, T]`` with ``S``, ``T`` disjoint."""
    g = pm.pattern
    if g.n > max_n:
        return 0, None
    best = (0, None)
    adj = g.adjacency
    for mask in range(1, 1 << g.n):
        s = [v + 1 for v in range(g.n) if (mask >> v) & 1]
        common = set.intersection(*(set(adj[v]) for v in s)) - set(s)
        if not common:
            continue
        t = sorted(common)
        if min(len(s), len(t)) <= best[0]:
            continue
        block = np.array([[pm[a, b] for b in t] for a in s])
        k = linalg.rank_eps(block)
        if k > best[0]:
            best = (k, {"rows": s, "cols": t})
    return best


def min_rank_lower_bound(pm: PartialMatrix) -> tuple:
    """Certified lower bound on the rank of any PSD completion, with its certificate."""
    star = orthogonal_star_bound(pm)
    block = specified_block_bound(pm)
    if star[0] == 0 and block[0] == 0:
        return 0, None
    if star[0] >= block[0]:
        return star[0], {"kind": "OrthogonalStar", "center": star[1], "leaves": star[2]}
    return block[0], {"kind": "SpecifiedBlockRank", **block[1], "rank": block[0]}


# -- nonconvex search -------------------------------------------------------


def _project_low_rank_psd(y: np.ndarray, r: int) -> np.ndarray:
    w, v = np.linalg.eigh(y)
    w, v = w[::-1][:r], v[:, ::-1][:, :r]
    w = np.clip(w, 0.0, None)
    return (v * w) @ v.T


def _polish(f0: np.ndarray, rows, cols, vals, max_nfev: int = 200) -> np.ndarray:
    """Least-squares refinement of a factor ``F`` on the specified entries of ``F F.T``."""

    n, r = f0.shape

    def resid(z):
        f = z.reshape(n, r)
        return np.einsum("ij,ij->i", f[rows], f[cols]) - vals

    def jac(z):
        f = z.reshape(n, r)
        jm = np.zeros((len(vals), n, r))
        k = np.arange(len(vals))
        jm[k, rows] += f[cols]
        jm[k, cols] += f[rows]
        return jm.reshape(len(vals), n * r)

    out = least_squares(resid, f0.ravel(), jac=jac, method="trf", xtol=1e-15, ftol=1e-15,
                        gtol=1e-15, max_nfev=max_nfev)
    return out.x.reshape(n, r)


def alt_proj_complete(
    pm: PartialMatrix,
    r: int,
    seeds: int = DEFAULT_SEEDS,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_RESIDUAL_TOL,
    seed: int = 0,
) -> OracleAnswer:
    """Multi-start alternating projections between ``{X : X_E = a}`` and ``{PSD, rank <= r}``.

    Once a start is close, a Gauss-Newton polish on the Gram factor removes
    the slow linear tail. Answers Yes (verified) or Inconclusive, never No.
    """
    if r < 1:
        raise ValueError("alt_proj_complete needs r >= 1")
    g = pm.pattern
    n = g.n
    edges = g.sorted_edges
    rows = np.array([i - 1 for i, _ in edges], dtype=int)
    cols = np.array([j - 1 for _, j in edges], dtype=int)
    vals = np.array([pm.values[e] for e in edges])
    scale = max(pm.max_abs(), 1.0)
    best = math.inf
    for k in range(seeds):
        rng = np.random.default_rng([seed, k])
        g0 = rng.standard_normal((n, n))
        y = (g0 + g0.T) * (scale / max(1.0, math.sqrt(n)))
        x = _project_low_rank_psd(y, r)
        resid = math.inf
        for it in range(max_iters):
            y = x.copy()
            y[rows, cols] = vals
            y[cols, rows] = vals
            x = _project_low_rank_psd(y, r)
            resid = float(np.linalg.norm(x[rows, cols] - vals))
            if resid <= tol or (resid <= 1e-3 * scale and it % 25 == 0):
                break
        if resid > tol and resid <= 1e-3 * scale:
            w, v = np.linalg.eigh(x)
            f0 = v[:, ::-1][:, :r] * np.sqrt(np.clip(w[::-1][:r], 0.0, None))
            f = _polish(f0, rows, cols, vals)
            x = f @ f.T
            resid = float(np.linalg.norm(x[rows, cols] - vals))
        best = min(best, resid)
        if resid <= tol:
            res = check_completion(x, pm, r)
            if res["rank"] <= r and res["lambda_min"] >= -1e-8 * max(res["lambda_max"], 1e-300):
                return OracleAnswer(Answer.YES, x, info={"seed": k, "iterations": it + 1,
                                                         "residual": resid, **res})
    return OracleAnswer(Answer.INCONCLUSIVE, info={"best_residual": best, "seeds": seeds})


def min_rank_estimate(pm: PartialMatrix, r_max: int | None = None, seed: int = 0) -> tuple:
    """``(lower, upper, completions)``; ``upper`` is ``math.inf`` when no search succeeds."""
    g = pm.pattern
    r_max = g.n if r_max is None else r_max
    completions: dict = {}
    lower, _ = min_rank_lower_bound(pm)
    if pm.max_abs() == 0.0:
        completions[0] = np.zeros((g.n, g.n))
        return 0, 0, completions
    lower = max(lower, 1)
    one = rank1_completable(pm, allow_loops=True)
    if one.yes:
        completions[1] = one.completion
        return 1, 1, completions
    if one.no:
        lower = max(lower, 2)
    for r in range(lower, r_max + 1):
        found = alt_proj_complete(pm, r, seed=seed)
        if found.yes:
            completions[r] = found.completion
            return lower, r, completions
    return lower, math.inf, completions


def decide_rank_completable(pm: PartialMatrix, r: int, seed: int = 0) -> OracleAnswer:
    """Combine the exact and search routines for "rank <= r PSD completion exists?"."""
    if r == 0:
        if pm.max_abs() == 0.0:
            return OracleAnswer(Answer.YES, np.zeros((pm.n, pm.n)))
        return _no("SpecifiedBlockRank", submatrix=[], reason="nonzero data at rank 0")
    psd = psd_completable(pm, search=False)
    if psd.no:
        return psd
    if r == 1:
        return rank1_completable(pm, allow_loops=True)
    bound, cert = min_rank_lower_bound(pm)
    if bound > r:
        return OracleAnswer(Answer.NO, certificate=cert, info={"lower_bound": bound})
    return alt_proj_complete(pm, r, seed=seed)
