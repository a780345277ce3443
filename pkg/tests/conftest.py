import itertools
from collections import defaultdict

import networkx as nx
import numpy as np
import pytest

from rankshadow.graph import PatternGraph


def pairs(n):
    return list(itertools.combinations(range(1, n + 1), 2))


def _connected(n, edges):
    if n == 1:
        return True
    adj = defaultdict(set)
    for i, j in edges:
        adj[i].add(j)
        adj[j].add(i)
    seen, stack = {1}, [1]
    while stack:
        for w in adj[stack.pop()] - seen:
            seen.add(w)
            stack.append(w)
    return len(seen) == n


def labeled_connected_graphs(n):
    """Every connected loopless graph on vertex set 1..n (labelled)."""
    ps = pairs(n)
    for mask in range(1 << len(ps)):
        edges = [ps[k] for k in range(len(ps)) if (mask >> k) & 1]
        if _connected(n, edges):
            yield PatternGraph.from_edges(n, edges)


def atlas_connected_graphs(max_n=7):
    """One representative per isomorphism class of connected graphs with 1..max_n vertices."""
    for h in nx.graph_atlas_g():
        n = h.number_of_nodes()
        if n == 0 or n > max_n or not nx.is_connected(h):
            continue
        yield PatternGraph.from_edges(n, [(u + 1, v + 1) for u, v in h.edges()])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# -- acceptance summary ----------------------------------------------------

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    crit = getattr(report, "acceptance", None)
    if crit is None:
        return
    if report.when == "call" or report.failed or report.skipped:
        entry = _ACCEPTANCE.setdefault(crit, {"passed": True, "ran": False})
        entry["ran"] = entry["ran"] or report.when == "call"
        if report.failed or report.skipped:
            entry["passed"] = False


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    mark = item.get_closest_marker("acceptance")
    if mark is not None:
        outcome.get_result().acceptance = (mark.args[0], mark.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), entry in sorted(_ACCEPTANCE.items()):
        ok = entry["passed"] and entry["ran"]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:2d}. {title}")
