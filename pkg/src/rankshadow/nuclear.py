"""Nuclear-norm completion of sampled rectangular data, and where it fails.

``nuclear_min_complete`` solves ``min ||Z||_*  s.t.  Z_ij = data_ij on Omega``
by Douglas-Rachford splitting: singular value soft-thresholding alternates
with re-inserting the observed entries, and the governing sequence is the
usual averaged (Krasnosel'skii-Mann) iteration.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import NonConvergence
from .graph import PatternGraph, complete_bipartite_partition, connected_components
from .linalg import rank_eps

RECOVERY_RTOL = 1e-6


@dataclass(frozen=True)
class ObservationInstance:
    """``m x p`` data observed on ``omega`` (1-indexed ``(row, col)`` pairs)."""

    m: int
    p: int
    omega: tuple
    values: tuple
    truth: Optional[np.ndarray] = None

    def __post_init__(self):
        omega = tuple((int(i), int(j)) for i, j in self.omega)
        if len(set(omega)) != len(omega):
            raise ValueError("duplicate observed coordinate")
        if len(self.values) != len(omega):
            raise ValueError("one value per observed coordinate required")
        for i, j in omega:
            if not (1 <= i <= self.m and 1 <= j <= self.p):
                raise ValueError(f"coordinate ({i}, {j}) outside {self.m}x{self.p}")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.truth is not None:
            z = np.asarray(self.truth, dtype=float)
            if z.shape != (self.m, self.p):
                raise ValueError("truth has the wrong shape")
            obs = np.array([z[i - 1, j - 1] for i, j in omega])
            if not np.allclose(obs, self.values, rtol=1e-12, atol=1e-12):
                raise ValueError("observed values disagree with ground truth")
            object.__setattr__(self, "truth", z)

    @classmethod
    def sample(cls, z, omega) -> "ObservationInstance":
        z = np.asarray(z, dtype=float)
        omega = [tuple(c) for c in omega]
        return cls(z.shape[0], z.shape[1], tuple(omega), tuple(z[i - 1, j - 1] for i, j in omega), z)

    def mask(self) -> np.ndarray:
        mk = np.zeros((self.m, self.p), dtype=bool)
        for i, j in self.omega:
            mk[i - 1, j - 1] = True
        return mk

    def observed(self) -> np.ndarray:
        z = np.zeros((self.m, self.p))
        for (i, j), v in zip(self.omega, self.values):
            z[i - 1, j - 1] = v
        return z


@dataclass
class RecoveryReport:
    z_hat: np.ndarray
    nuclear_norm: float
    rank: int
    residual: float
    gap: float
    iterations: int
    truth_error: Optional[float] = None
    lifted_half_trace: float = 0.0
    history: list = field(default_factory=list, repr=False)

    @property
    def recovered(self) -> bool:
        return self.truth_error is not None and self.truth_error <= RECOVERY_RTOL


def omega_to_pattern(inst: ObservationInstance) -> PatternGraph:
    """Bipartite pattern on ``m + p`` vertices: edge ``{i, m + j}`` per observed ``(i, j)``."""
    return PatternGraph.from_edges(inst.m + inst.p, [(i, inst.m + j) for i, j in inst.omega])


def nuclear_norm(z) -> float:
    return float(np.linalg.svd(np.atleast_2d(z), compute_uv=False).sum())


def svt(z: np.ndarray, tau: float) -> np.ndarray:
    """Singular value soft-thresholding, the prox of ``tau * ||.||_*``."""
    u, s, vt = np.linalg.svd(z, full_matrices=False)
    return (u * np.maximum(s - tau, 0.0)) @ vt


def lift_to_sdp(z_hat) -> np.ndarray:
    """``Y = [[U S U.T, Z], [Z.T, V S V.T]]``: PSD with ``trace(Y) / 2 = ||Z||_*``."""
    z = np.atleast_2d(np.asarray(z_hat, dtype=float))
    m, p = z.shape
    u, s, vt = np.linalg.svd(z, full_matrices=False)
    y = np.empty((m + p, m + p))
    y[:m, :m] = (u * s) @ u.T
    y[m:, m:] = (vt.T * s) @ vt
    y[:m, m:] = z
    y[m:, :m] = z.T
    y[:m, :m] = 0.5 * (y[:m, :m] + y[:m, :m].T)
    y[m:, m:] = 0.5 * (y[m:, m:] + y[m:, m:].T)
    return y


def nuclear_min_complete(
    inst: ObservationInstance,
    step: float | None = None,
    max_iters: int = 50000,
    tol: float = 1e-12,
) -> RecoveryReport:
    """Douglas-Rachford for ``min ||Z||_*`` over the observed-entry affine set.

    ``step`` defaults to the RMS observed magnitude. Stops when the fixed-point
    gap ``||prox_f - prox_g||_F`` falls below ``tol * (1 + ||data||)``.
    Raises :class:`NonConvergence` (carrying the last report) otherwise.
    """
    if not inst.omega:
        raise ValueError("omega must be nonempty")
    mask = inst.mask()
    data = inst.observed()
    scale = max(float(np.linalg.norm(data)), 1e-300)
    gamma = step if step is not None else max(float(np.sqrt(np.mean(np.square(inst.values)))), 1e-12)

    y = data.copy()
    history = []
    gap = np.inf
    it = 0
    for it in range(1, max_iters + 1):
        x = np.where(mask, data, y)  # prox of the affine indicator
        z = svt(2.0 * x - y, gamma)
        step_vec = z - x
        y = y + step_vec
        gap = float(np.linalg.norm(step_vec))
        history.append(gap)
        if gap <= tol * (1.0 + scale):
            break
    x = np.where(mask, data, y)
    report = _report(inst, x, gap, it, history)
    if gap > tol * (1.0 + scale):
        raise NonConvergence(f"fixed-point gap {gap:.3e} after {max_iters} iterations", report)
    return report


def _report(inst, z_hat, gap, iterations, history) -> RecoveryReport:
    mask = inst.mask()
    residual = float(np.linalg.norm((z_hat - inst.observed())[mask]))
    err = None
    if inst.truth is not None:
        err = float(np.linalg.norm(z_hat - inst.truth) / max(np.linalg.norm(inst.truth), 1e-300))
    y = lift_to_sdp(z_hat)
    return RecoveryReport(
        z_hat=z_hat,
        nuclear_norm=nuclear_norm(z_hat),
        rank=rank_eps(z_hat),
        residual=residual,
        gap=gap,
        iterations=iterations,
        truth_error=err,
        lifted_half_trace=0.5 * float(np.trace(y)),
        history=history,
    )


def classify_omega(inst: ObservationInstance) -> dict:
    """Connectivity and complete-bipartiteness of the pattern induced by ``omega``."""
    g = omega_to_pattern(inst)
    connected = len(connected_components(g)) == 1
    complete = connected and complete_bipartite_partition(g) is not None
    return {"connected": connected, "complete_bipartite": complete}


def gaussian_rank_one(rng: np.random.Generator, m: int, p: int) -> np.ndarray:
    return np.outer(rng.standard_normal(m), rng.standard_normal(p))


def adversarial_rank_one(eps: float) -> tuple:
    """``Z = [[eps, 1], [1, 1/eps]]`` observed everywhere except the (2, 2) entry."""
    z = np.array([[eps, 1.0], [1.0, 1.0 / eps]])
    return ObservationInstance.sample(z, [(1, 1), (1, 2), (2, 1)])


def failure_sweep(
    pattern_family: Iterable,
    trials: int,
    rank_one_sampler: Callable = gaussian_rank_one,
    seed: int = 0,
) -> dict:
    """Tabulate recovery of rank-one truths per observation pattern.

    ``pattern_family`` yields ``(name, m, p, omega)``. Returns per-trial
    rows and per-pattern recovery / rank-one rates.
    """
    rows = []
    summary = {}
    for name, m, p, omega in pattern_family:
        flags = None
        recovered = rank_one = 0
        for t in range(trials):
            trial_seed = int(np.random.SeedSequence([seed, len(rows)]).generate_state(1)[0])
            z = rank_one_sampler(np.random.default_rng(trial_seed), m, p)
            inst = ObservationInstance.sample(z, omega)
            flags = flags or classify_omega(inst)
            try:
                rep = nuclear_min_complete(inst)
            except NonConvergence as exc:
                rep = exc.report
            ok = rep.recovered
            recovered += ok
            rank_one += rep.rank == 1
            rows.append({
                "pattern": name,
                "connected": flags["connected"],
                "complete_bipartite": flags["complete_bipartite"],
                "trial_seed": trial_seed,
                "recovered": bool(ok),
                "rank": rep.rank,
                "error": rep.truth_error,
            })
        summary[name] = {
            **(flags or {}),
            "trials": trials,
            "recovery_rate": recovered / trials if trials else 0.0,
            "rank_one_rate": rank_one / trials if trials else 0.0,
        }
    return {"rows": rows, "summary": summary}


def sweep_csv(result: dict) -> str:
    buf = io.StringIO()
    fields = ["pattern", "connected", "complete_bipartite", "trial_seed", "recovered", "rank", "error"]
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in result["rows"]:
        writer.writerow(row)
    return buf.getvalue()


def default_sweep_family(m: int = 3, p: int = 3) -> list:
    """Full sampling, one missing entry, a missing diagonal, and a disconnected diagonal-only pattern."""
    full = [(i, j) for i in range(1, m + 1) for j in range(1, p + 1)]
    return [
        ("full", m, p, full),
        ("one-missing", m, p, full[:-1]),
        ("diagonal-missing", m, p, [c for c in full if c[0] != c[1]]),
        ("diagonal-only", m, p, [(k, k) for k in range(1, min(m, p) + 1)]),
    ]
