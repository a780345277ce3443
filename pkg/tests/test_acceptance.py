"""Exit criteria. Run ``pytest tests/test_acceptance.py`` (or this file as a
script); the terminal summary prints one PASS/FAIL line per criterion."""

import sys

import numpy as np
import pytest

from conftest import atlas_connected_graphs, labeled_connected_graphs
from oracles import (
    has_noncyclic_path3,
    has_triangle,
    independent_psd_report,
    is_complete_bipartite,
    rank1_feasible,
    single_free_entry_minimum,
    threshold_scan,
)
from rankshadow import witness as wf
from rankshadow.classify import Status, classify, conflicting, evaluate_rules
from rankshadow.completion import (
    PartialMatrix,
    bipartite_complete,
    max_rank_complete,
    project,
    schur_complete,
    stack_complete,
)
from rankshadow.errors import RangeViolation
from rankshadow.graph import PatternGraph, barvinok_threshold, complete_bipartite_partition
from rankshadow.linalg import rank_eps
from rankshadow.nuclear import (
    ObservationInstance,
    adversarial_rank_one,
    lift_to_sdp,
    nuclear_min_complete,
    omega_to_pattern,
)
from rankshadow.oracle import alt_proj_complete, min_rank_estimate, psd_completable, rank1_completable

JS = (1, 10, 100, 1000)
EXACT_TOL = 1e-12

acceptance = pytest.mark.acceptance


def _leaf(verdict):
    (comp,) = verdict.components
    return comp


def _assert_element_exact(seq, j):
    x, a = seq.element(j)
    for (u, v), val in a.values.items():
        assert abs(x[u - 1, v - 1] - val) <= EXACT_TOL * max(1.0, abs(val)), (seq.family, j, u, v)


# 1 ------------------------------------------------------------------------


@acceptance(1, "threshold formula equals brute-force minimal t for all e <= 10^6")
def test_threshold_matches_scan():
    e_max = 10**6
    expected = threshold_scan(e_max)
    got = np.fromiter((barvinok_threshold(e) for e in range(e_max + 1)), dtype=np.int64, count=e_max + 1)
    mismatches = np.flatnonzero(got != expected)
    assert mismatches.size == 0, mismatches[:10]


# 2 ------------------------------------------------------------------------


def _bipartite_vs_forbidden(graphs):
    bad = []
    for g in graphs:
        found = complete_bipartite_partition(g) is not None
        forbidden_free = not has_triangle(g) and not has_noncyclic_path3(g)
        if found != forbidden_free or found != is_complete_bipartite(g):
            bad.append(sorted(g.edges))
    return bad


@acceptance(2, "complete bipartite iff no triangle and no noncyclic 3-path (n <= 7)")
def test_bipartite_characterisation_all_classes_to_7():
    graphs = list(atlas_connected_graphs(7))
    assert len(graphs) == 996  # connected graphs on 1..7 vertices up to isomorphism
    assert _bipartite_vs_forbidden(graphs) == []


@acceptance(2, "complete bipartite iff no triangle and no noncyclic 3-path (n <= 7)")
@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_bipartite_characterisation_labelled(n):
    assert _bipartite_vs_forbidden(labeled_connected_graphs(n)) == []


# 3 ------------------------------------------------------------------------


@acceptance(3, "rank-one dichotomy with exact witnesses (n <= 6)")
@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_rank_one_dichotomy(n):
    limits_checked = {}
    for g in labeled_connected_graphs(n):
        verdict = classify(g, min(1, n))
        bip = is_complete_bipartite(g)
        if n == 1:
            assert verdict.status is Status.CLOSED
            continue
        assert (verdict.status is Status.CLOSED) == bip, sorted(g.edges)
        if bip:
            continue
        assert verdict.status is Status.NOT_CLOSED
        seq = wf.from_spec(g, _leaf(verdict).certificate.witness)
        for j in JS:
            _assert_element_exact(seq, j)
            assert rank_eps(seq.matrix(j)) == 1
        limit = seq.limit
        assert rank1_completable(limit).no
        key = tuple(sorted(limit.values.items()))
        if key not in limits_checked:
            limits_checked[key] = rank1_feasible(limit.values, n)
        assert limits_checked[key] is False


# 4 ------------------------------------------------------------------------


def _family_cases():
    yield "triangle", wf.triangle_witness(PatternGraph.complete(3), (1, 2, 3)), 1
    yield "triangle-in-K5", wf.triangle_witness(PatternGraph.complete(5), (2, 4, 5)), 1
    yield "path", wf.path_witness(PatternGraph.path(4), (1, 2, 3, 4)), 1
    yield "path-in-C6", wf.path_witness(PatternGraph.cycle(6), (1, 2, 3, 4)), 1
    for k in (3, 4, 5):
        yield f"clique-{k}", wf.clique_witness(PatternGraph.complete(k), range(1, k + 1)), k - 2
    g = PatternGraph.from_edges(2, [(1, 1), (1, 2)])
    yield "mixed-loop", wf.mixed_loop_witness(g, (1, 2)), 1
    g = PatternGraph.from_edges(4, [(1, 1), (1, 2), (2, 3), (3, 3), (3, 4)])
    yield "mixed-loop-path", wf.mixed_loop_witness(g, (1, 2)), 1


FAMILY_CASES = list(_family_cases())


@acceptance(4, "witness convergence <= 2/j, rank <= r, exact entries to 1e-12")
@pytest.mark.parametrize("name,seq,r", FAMILY_CASES, ids=[c[0] for c in FAMILY_CASES])
@pytest.mark.parametrize("j", JS)
def test_witness_convergence(name, seq, r, j):
    x, a = seq.element(j)
    _assert_element_exact(seq, j)
    assert a.distance(seq.limit) <= 2.0 / j
    assert rank_eps(x) <= r


# 5 ------------------------------------------------------------------------


def _psd_sqrt(a):
    # roundoff eigenvalues (~1e-16) would leave ~1e-8 mass outside range(A) after the root
    w, v = np.linalg.eigh(a)
    w = np.where(w > 1e-12 * w[-1], w, 0.0)
    return (v * np.sqrt(w)) @ v.T


@acceptance(5, "Schur completion: 200 instances, and RangeViolation on every violation")
def test_schur_completion_random():
    rng = np.random.default_rng(5)
    for _ in range(200):
        m = int(rng.integers(1, 13))
        rho = int(rng.integers(1, min(4, m) + 1))
        p = int(rng.integers(1, 7))
        f = rng.standard_normal((m, rho))
        a = f @ f.T
        b = _psd_sqrt(a) @ rng.standard_normal((m, p))
        y = schur_complete(a, b).matrix
        rep = independent_psd_report(y, {})
        assert rep["lambda_min"] >= -1e-8 * rep["lambda_max"]
        assert rank_eps(y) == rho == rep["rank"]
        assert np.abs(y[:m, :m] - a).max() <= 1e-8
        assert np.abs(y[:m, m:] - b).max() <= 1e-8
        assert np.abs(y[m:, :m] - b.T).max() <= 1e-8


@acceptance(5, "Schur completion: 200 instances, and RangeViolation on every violation")
def test_schur_range_violation_always_raised():
    rng = np.random.default_rng(55)
    raised = 0
    trials = 200
    for _ in range(trials):
        m = int(rng.integers(2, 13))
        rho = int(rng.integers(1, min(4, m - 1) + 1))
        p = int(rng.integers(1, 7))
        f = rng.standard_normal((m, rho))
        a = f @ f.T
        q, _ = np.linalg.qr(np.hstack([f, rng.standard_normal((m, m - rho))]))
        outside = q[:, rho:] @ rng.standard_normal((m - rho, p))
        b = _psd_sqrt(a) @ rng.standard_normal((m, p)) + outside
        try:
            schur_complete(a, b)
        except RangeViolation:
            raised += 1
    assert raised == trials


# 6 ------------------------------------------------------------------------


@acceptance(6, "bipartite completion: 200 random B of rank <= r")
def test_bipartite_completion_random():
    rng = np.random.default_rng(6)
    for _ in range(200):
        m, p = (int(v) for v in rng.integers(1, 9, size=2))
        r = int(rng.integers(1, 5))
        rho = int(rng.integers(0, min(r, m, p) + 1))
        b = rng.standard_normal((m, rho)) @ rng.standard_normal((rho, p))
        x = bipartite_complete(b, r).matrix
        rep = independent_psd_report(x, {})
        assert rank_eps(x) == rank_eps(b)
        assert rep["lambda_min"] >= -1e-8 * max(rep["lambda_max"], 1e-300)
        assert np.abs(x[:m, m:] - b).max() <= 1e-10
        assert np.abs(x[m:, :m] - b.T).max() <= 1e-10


# 7 ------------------------------------------------------------------------


@acceptance(7, "block stacking: min rank = max block rank, max-rank = sum")
def test_block_stacking_random():
    rng = np.random.default_rng(7)
    for _ in range(100):
        blocks, ranks = [], []
        for _ in range(int(rng.integers(1, 6))):
            size = int(rng.integers(1, 6))
            k = int(rng.integers(0, size + 1))
            f = rng.standard_normal((size, k))
            blocks.append(f @ f.T)
            ranks.append(k)
        r = max(ranks)
        stacked = stack_complete(blocks, r)
        assert stacked.rank == max(ranks) == rank_eps(stacked.matrix, 1e-8)
        wide = max_rank_complete(blocks)
        assert wide.rank == sum(ranks) == rank_eps(wide.matrix, 1e-8)
        start = 0
        for blk in blocks:
            s = blk.shape[0]
            for x in (stacked.matrix, wide.matrix):
                assert np.abs(x[start:start + s, start:start + s] - blk).max() <= 1e-8
            start += s
        rep = independent_psd_report(stacked.matrix, {})
        assert rep["lambda_min"] >= -1e-8 * max(rep["lambda_max"], 1e-300)


# 8 ------------------------------------------------------------------------


@acceptance(8, "clique-witness limit has minimum rank exactly k-1 (k = 3, 4, 5)")
@pytest.mark.parametrize("k", [3, 4, 5])
def test_clique_limit_min_rank(k):
    seq = wf.clique_witness(PatternGraph.complete(k), range(1, k + 1))
    lower, upper, completions = min_rank_estimate(seq.limit)
    assert (lower, upper) == (k - 1, k - 1)
    rep = independent_psd_report(completions[k - 1], seq.limit.values)
    assert rep["rank"] == k - 1
    assert rep["data_error"] <= 1e-9
    assert rep["lambda_min"] >= -1e-8 * rep["lambda_max"]


# 9 ------------------------------------------------------------------------


MIXED_GRAPHS = [
    PatternGraph.from_edges(2, [(1, 1), (1, 2)]),
    PatternGraph.from_edges(3, [(1, 1), (1, 2), (2, 3), (1, 3)]),
    PatternGraph.from_edges(4, [(1, 1), (3, 3), (1, 2), (2, 3), (3, 4), (1, 4)]),
]


@acceptance(9, "mixed-loop limit: exact No via zero propagation; finite elements rank-1 Yes")
@pytest.mark.parametrize("g", MIXED_GRAPHS, ids=["edge", "triangle", "square"])
def test_mixed_loop_limit(g):
    verdict = classify(g, 1)
    assert verdict.status is Status.NOT_CLOSED
    assert verdict.certificate.kind == "MixedLoopComponent"
    seq = wf.from_spec(g, verdict.certificate.witness)
    ans = psd_completable(seq.limit)
    assert ans.no and ans.certificate["kind"] == "ZeroPropagation"
    for j in JS:
        data = seq.data(j)
        assert rank1_completable(data, allow_loops=True).yes
        assert rank1_feasible(data.values, g.n)


# 10 -----------------------------------------------------------------------


def _consistency_failures(graphs):
    bad = []
    for g in graphs:
        n = g.n
        complete = g.edge_count == n * (n - 1) // 2
        for r in range(n + 1):
            outcomes = evaluate_rules(g, r)
            if conflicting(outcomes):
                bad.append(("conflict", sorted(g.edges), r))
            if r == n - 2:
                clique_rule = next(o for o in outcomes if o.rule == "clique-exclusion")
                complete_kind = clique_rule.certificate is not None and \
                    clique_rule.certificate.kind == "CompleteGraphExclusion"
                if complete and n >= 3 and not complete_kind:
                    bad.append(("K_n not excluded", n, r))
                if not complete and complete_kind:
                    bad.append(("non-complete excluded", sorted(g.edges), r))
        if n >= 1 and classify(g, n - 1).status is not Status.CLOSED:
            bad.append(("r = n-1 not closed", sorted(g.edges)))
        if complete and n >= 3 and classify(g, n - 2).status is not Status.NOT_CLOSED:
            bad.append(("K_n at n-2 not NotClosed", n))
    return bad


@acceptance(10, "classifier consistency over all graphs n <= 7 and all r")
def test_classifier_consistency_all_classes_to_7():
    assert _consistency_failures(atlas_connected_graphs(7)) == []


@acceptance(10, "classifier consistency over all graphs n <= 7 and all r")
@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_classifier_consistency_labelled(n):
    assert _consistency_failures(labeled_connected_graphs(n)) == []


# 11 -----------------------------------------------------------------------


@acceptance(11, "nuclear-norm lab: lifted identity, adversarial failure, 1-D scan agreement")
def test_lifted_identity():
    rng = np.random.default_rng(11)
    for _ in range(100):
        m, p = (int(v) for v in rng.integers(1, 7, size=2))
        z = rng.standard_normal((m, p))
        y = lift_to_sdp(z)
        nuc = np.linalg.svd(z, compute_uv=False).sum()
        assert abs(0.5 * np.trace(y) - nuc) <= 1e-9
        assert np.linalg.eigvalsh(y)[0] >= -1e-9 * max(1.0, nuc)
        assert np.abs(y[:m, m:] - z).max() <= 1e-12


@acceptance(11, "nuclear-norm lab: lifted identity, adversarial failure, 1-D scan agreement")
@pytest.mark.parametrize("eps", [0.1, 0.01])
def test_adversarial_rank_one_is_not_recovered(eps):
    inst = adversarial_rank_one(eps)
    rep = nuclear_min_complete(inst)
    truth = 1.0 / eps
    assert abs(rep.z_hat[1, 1] - truth) / truth > 0.5
    # a rank-one completion of the same data exists: check it through the bipartite lift
    g = omega_to_pattern(inst)
    pm = PartialMatrix(g, {(i, inst.m + j): v for (i, j), v in zip(inst.omega, inst.values)})
    ans = rank1_completable(pm)
    assert ans.yes
    assert abs(ans.completion[1, inst.m + 1] - truth) <= 1e-9 * truth
    assert rank1_feasible(pm.values, g.n)


def _single_free_instances():
    rng = np.random.default_rng(111)
    out = [("adversarial-0.1", adversarial_rank_one(0.1)), ("adversarial-0.01", adversarial_rank_one(0.01))]
    for k in range(20):
        m, p = (int(v) for v in rng.integers(2, 4, size=2))
        rank = int(rng.integers(1, 3))
        z = rng.standard_normal((m, rank)) @ rng.standard_normal((rank, p))
        free = (int(rng.integers(1, m + 1)), int(rng.integers(1, p + 1)))
        omega = [(i, j) for i in range(1, m + 1) for j in range(1, p + 1) if (i, j) != free]
        out.append((f"random-{k}", ObservationInstance.sample(z, omega)))
    return out


SINGLE_FREE = _single_free_instances()


@acceptance(11, "nuclear-norm lab: lifted identity, adversarial failure, 1-D scan agreement")
@pytest.mark.parametrize("name,inst", SINGLE_FREE, ids=[s[0] for s in SINGLE_FREE])
def test_single_free_entry_matches_scan(name, inst):
    rep = nuclear_min_complete(inst)
    (free,) = [(i, j) for i in range(inst.m) for j in range(inst.p) if not inst.mask()[i, j]]
    best = single_free_entry_minimum(inst.observed(), free)
    assert abs(rep.nuclear_norm - best) <= 1e-5


# 12 -----------------------------------------------------------------------


@acceptance(12, "alternating projections: >= 95% Yes on 100 completable instances")
def test_alternating_projection_success_rate():
    rng = np.random.default_rng(12)
    yes = 0
    for _ in range(100):
        n = int(rng.integers(2, 9))
        r = int(rng.integers(1, min(3, n) + 1))
        f = rng.standard_normal((n, r))
        x = f @ f.T
        keep = rng.uniform(0.3, 0.8)
        edges = [(i, j) for i in range(1, n + 1) for j in range(i, n + 1) if rng.random() < keep]
        if not edges:
            edges = [(1, 1)]
        pm = project(x, PatternGraph.from_edges(n, edges))
        ans = alt_proj_complete(pm, r, seeds=16)
        if not ans.yes:
            continue
        rep = independent_psd_report(ans.completion, pm.values)
        assert rep["rank"] <= r
        assert rep["lambda_min"] >= -1e-8 * rep["lambda_max"]
        assert rep["data_error"] <= 1e-9
        assert ans.info["residual"] <= 1e-9
        yes += 1
    assert yes >= 95


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
