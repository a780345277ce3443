"""Constructive minimum-rank PSD completions for the solvable pattern classes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import linalg
from .errors import RangeViolation, RankExceeded, RecipeInapplicable
from .graph import PatternGraph, max_independent_set
from .linalg import DEFAULT_TOL


@dataclass(frozen=True)
class PartialMatrix:
    """A pattern plus one real value per specified entry (keys ``(i, j)``, ``i <= j``)."""

    pattern: PatternGraph
    values: Mapping

    def __post_init__(self):
        vals = {}
        for key, v in dict(self.values).items():
            i, j = sorted(int(x) for x in key)
            v = float(v)
            if not np.isfinite(v):
                raise ValueError(f"non-finite value at ({i}, {j})")
            vals[(i, j)] = v
        if set(vals) != set(self.pattern.edges):
            missing = sorted(set(self.pattern.edges) - set(vals))
            extra = sorted(set(vals) - set(self.pattern.edges))
            raise ValueError(f"values must match pattern edges (missing {missing}, extra {extra})")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.pattern.n

    def __getitem__(self, key) -> float:
        i, j = key
        return self.values[(i, j) if i <= j else (j, i)]

    def vector(self) -> np.ndarray:
        """Values in sorted edge order."""
        return np.array([self.values[e] for e in self.pattern.sorted_edges])

    def max_abs(self) -> float:
        return max((abs(v) for v in self.values.values()), default=0.0)

    def padded(self, fill: float = 0.0) -> np.ndarray:
        """Dense symmetric matrix with ``fill`` in unspecified positions."""
        x = np.full((self.n, self.n), float(fill))
        for (i, j), v in self.values.items():
            x[i - 1, j - 1] = x[j - 1, i - 1] = v
        return x

    def restrict(self, vertices: Sequence[int]) -> "PartialMatrix":
        sub, labels = self.pattern.induced(vertices)
        return PartialMatrix(sub, {(a, b): self[labels[a - 1], labels[b - 1]] for a, b in sub.edges})

    def distance(self, other: "PartialMatrix") -> float:
        """Max entrywise gap to another partial matrix on the same pattern."""
        if other.pattern != self.pattern:
            raise ValueError("patterns differ")
        return max((abs(v - other.values[e]) for e, v in self.values.items()), default=0.0)


@dataclass
class CompletionResult:
    matrix: np.ndarray
    rank: int
    recipe: str
    residuals: dict = field(default_factory=dict)


def project(x, pattern: PatternGraph) -> PartialMatrix:
    """Coordinate shadow: read the entries of ``x`` indexed by ``pattern``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (pattern.n, pattern.n):
        raise ValueError(f"matrix order {x.shape} does not match pattern order {pattern.n}")
    return PartialMatrix(pattern, {(i, j): x[i - 1, j - 1] for i, j in pattern.edges})


def completion_residuals(x, pm: PartialMatrix | None = None, tol: float = DEFAULT_TOL) -> dict:
    """Achieved PSD margin, data mismatch on the pattern, and numerical rank."""
    x = np.asarray(x, dtype=float)
    w, _ = linalg.eig_sym(x)
    out = {
        "lambda_min": float(w[-1]) if w.size else 0.0,
        "lambda_max": float(w[0]) if w.size else 0.0,
        "rank": linalg.rank_eps(x, tol),
        "asymmetry": float(np.max(np.abs(x - x.T))) if x.size else 0.0,
    }
    if pm is not None:
        out["data_error"] = max(
            (abs(x[i - 1, j - 1] - v) for (i, j), v in pm.values.items()), default=0.0
        )
    return out


def check_completion(x, pm: PartialMatrix, r: int, tol: float = DEFAULT_TOL) -> dict:
    """Residuals plus a pass flag for the completion contract (PSD, data match, rank <= r)."""
    res = completion_residuals(x, pm, tol)
    res["ok"] = bool(
        res["lambda_min"] >= -tol * max(res["lambda_max"], 1e-300)
        and res["data_error"] <= tol * (1.0 + pm.max_abs())
        and res["rank"] <= r
    )
    return res


def _result(x, recipe, tol, pm=None) -> CompletionResult:
    x = linalg.symmetrize(x)
    res = completion_residuals(x, pm, tol)
    return CompletionResult(x, res["rank"], recipe, res)


def schur_complete(a_block, b_block, tol: float = DEFAULT_TOL) -> CompletionResult:
    """Fill the free block of ``[[A, B], [B.T, ?]]`` with ``B.T A^+ B``.

    The result has rank ``rank(A)``, the least possible for fixed ``A``.
    """
    a = linalg.as_sym(a_block)
    b = np.atleast_2d(np.asarray(b_block, dtype=float))
    if b.shape[0] != a.shape[0]:
        b = b.reshape(a.shape[0], -1)
    linalg.require_psd_spectrum(linalg.eig_sym(a)[0], tol)
    a_pinv = linalg.pinv_sym(a, tol)
    leak = b - a @ (a_pinv @ b)
    b_norm = np.linalg.norm(b)
    if np.linalg.norm(leak) > tol * max(b_norm, 1e-300) and b_norm > 0:
        raise RangeViolation(
            f"range(B) not within range(A): residual {np.linalg.norm(leak):.3e} vs |B| {b_norm:.3e}"
        )
    m, p = b.shape
    y = np.empty((m + p, m + p))
    y[:m, :m] = a
    y[:m, m:] = b
    y[m:, :m] = b.T
    y[m:, m:] = linalg.symmetrize(b.T @ a_pinv @ b)
    return _result(y, "schur", tol)


def bipartite_complete(b_block, r: int, tol: float = DEFAULT_TOL) -> CompletionResult:
    """Complete ``[[?, B], [B.T, ?]]`` as ``[P; Q][P; Q].T`` from ``B = P Q.T``."""
    b = np.atleast_2d(np.asarray(b_block, dtype=float))
    rho = linalg.rank_eps(b, tol)
    if rho > r:
        raise RankExceeded(f"rank(B) = {rho} exceeds r = {r}")
    p, q = linalg.full_rank_decompose(b, tol)
    f = np.vstack([p, q])
    return _result(f @ f.T, "bipartite", tol)


def stack_complete(diagonal_blocks: Sequence, r: int, tol: float = DEFAULT_TOL) -> CompletionResult:
    """Block-diagonal pattern: stack equal-width factors so the rank is the max block rank."""
    blocks = [linalg.as_sym(np.atleast_2d(blk)) for blk in diagonal_blocks]
    ranks = [linalg.rank_eps(blk, tol) if blk.size else 0 for blk in blocks]
    if any(k > r for k in ranks):
        raise RankExceeded(f"block ranks {ranks} exceed r = {r}")
    width = max(ranks, default=0)
    factors = [linalg.psd_factor(blk, tol, width) for blk in blocks]
    f = np.vstack(factors) if factors else np.zeros((0, 0))
    return _result(f @ f.T, "stack", tol)


def max_rank_complete(diagonal_blocks: Sequence, tol: float = DEFAULT_TOL) -> CompletionResult:
    """Zero off-diagonal blocks; the rank is the sum of block ranks."""
    blocks = [linalg.as_sym(np.atleast_2d(blk)) for blk in diagonal_blocks]
    for blk in blocks:
        linalg.psd_factor(blk, tol)  # raises NotPSD
    sizes = [blk.shape[0] for blk in blocks]
    x = np.zeros((sum(sizes), sum(sizes)))
    start = 0
    for blk, s in zip(blocks, sizes):
        x[start:start + s, start:start + s] = blk
        start += s
    return _result(x, "max-rank", tol)


def diagonal_padding(pm: PartialMatrix) -> np.ndarray:
    """Zero the free off-diagonals; set free diagonals to ``1 + sum |row off-diagonal|``."""
    x = pm.padded(0.0)
    for i in range(1, pm.n + 1):
        if (i, i) not in pm.values:
            row = np.abs(x[i - 1]).sum() - abs(x[i - 1, i - 1])
            x[i - 1, i - 1] = 1.0 + row
    return x


def independent_set_complete(pm: PartialMatrix, independent, tol: float = DEFAULT_TOL) -> CompletionResult:
    """Loopless data: pad to a diagonally dominant matrix, then re-fill the
    independent block by Schur reduction. Rank is ``n - |independent|``."""
    if not pm.pattern.is_loopless:
        raise RecipeInapplicable("independent-set recipe needs free diagonals")
    s_idx = sorted(set(independent))
    if not pm.pattern.is_independent(s_idx):
        raise RecipeInapplicable(f"{s_idx} is not an independent set")
    a_idx = [v for v in range(1, pm.n + 1) if v not in set(s_idx)]
    y = diagonal_padding(pm)
    order = [v - 1 for v in a_idx + s_idx]
    y = y[np.ix_(order, order)]
    m = len(a_idx)
    if m == 0:
        x = np.zeros((pm.n, pm.n))
        return _result(x, "independent-set", tol, pm)
    res = schur_complete(y[:m, :m], y[:m, m:], tol)
    inv = np.argsort(order)
    x = res.matrix[np.ix_(inv, inv)]
    return _result(x, "independent-set", tol, pm)


def _complete_component(pm: PartialMatrix, r: int, cert, labels, tol: float) -> np.ndarray:
    # certificate evidence is in ambient labels; pm is relabelled 1..n_c
    local = {v: k + 1 for k, v in enumerate(labels)}
    kind = cert.kind
    g = pm.pattern
    if kind == "RankZero":
        if pm.max_abs() > 0:
            raise RecipeInapplicable("rank 0 requires all-zero data")
        return np.zeros((pm.n, pm.n))
    if kind == "LoopComponent":
        full = all(g.has_edge(i, j) for i in range(1, g.n + 1) for j in range(i, g.n + 1))
        if not full:
            raise RecipeInapplicable("looped component with free entries has no constructive recipe")
        x = pm.padded()
        if not linalg.is_psd(x, tol) or linalg.rank_eps(x, tol) > r:
            raise RecipeInapplicable("fully specified block is not PSD of rank <= r")
        return x
    if kind == "TrivialFullRank":
        return diagonal_padding(pm)
    if kind == "CompleteBipartite":
        s, t = ([local[v] for v in side] for side in cert.evidence["partition"])
        b = np.array([[pm[u, v] for v in t] for u in s]).reshape(len(s), len(t))
        try:
            res = bipartite_complete(b, r, tol)
        except RankExceeded as exc:
            raise RecipeInapplicable(f"bipartite block rank exceeds r: {exc}") from exc
        order = [v - 1 for v in list(s) + list(t)]
        inv = np.argsort(order)
        return res.matrix[np.ix_(inv, inv)]
    if kind == "IndependentSet":
        return independent_set_complete(pm, [local[v] for v in cert.evidence["set"]], tol).matrix
    if kind == "RankAtLeastThreshold":
        k, ind = max_independent_set(g)
        if g.n - k <= r:
            return independent_set_complete(pm, ind, tol).matrix
        raise RecipeInapplicable(
            "rank-threshold closure is existential; no independent set gives rank <= r"
        )
    raise RecipeInapplicable(f"no completion recipe for certificate {kind!r}")


def complete_for_verdict(pm: PartialMatrix, r: int, verdict, tol: float = DEFAULT_TOL) -> CompletionResult:
    """Dispatch a Closed verdict's recipe on concrete data; result has rank <= r."""
    from .classify import Status

    if verdict.status is not Status.CLOSED:
        raise RecipeInapplicable(f"verdict is {verdict.status.value}; only Closed verdicts carry a recipe")
    cert = verdict.certificate
    if cert.kind != "PerComponent":
        x = _complete_component(pm, r, cert, tuple(range(1, pm.n + 1)), tol)
        recipe = cert.recipe
    else:
        blocks, order = [], []
        for comp in verdict.components:
            sub = pm.restrict(comp.vertices)
            blocks.append(_complete_component(sub, min(r, sub.n), comp.certificate, comp.vertices, tol))
            order.extend(v - 1 for v in comp.vertices)
        stacked = stack_complete(blocks, r, tol)
        inv = np.argsort(order)
        x = stacked.matrix[np.ix_(inv, inv)]
        recipe = "stack[" + ",".join(c.certificate.recipe for c in verdict.components) + "]"
    x = linalg.symmetrize(x)
    res = check_completion(x, pm, r, tol)
    if not res["ok"]:
        raise RecipeInapplicable(f"recipe {recipe} produced an invalid completion: {res}")
    return CompletionResult(x, res["rank"], recipe, res)
