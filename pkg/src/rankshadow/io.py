"""JSON (de)serialisation for graphs, partial matrices, verdicts and instances.

Sparse symmetric values use string keys ``"i,j"`` with ``i <= j``.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .classify import Certificate, ClosureVerdict, Status
from .completion import CompletionResult, PartialMatrix
from .errors import GraphError
from .graph import PatternGraph
from .nuclear import ObservationInstance, RecoveryReport
from .oracle import OracleAnswer


def _key(i: int, j: int) -> str:
    return f"{min(i, j)},{max(i, j)}"


def _parse_key(k: str) -> tuple:
    try:
        i, j = (int(x) for x in k.split(","))
    except ValueError as exc:
        raise GraphError(f"bad entry key {k!r}; expected 'i,j'") from exc
    if i > j:
        raise GraphError(f"entry key {k!r} must have i <= j")
    return i, j


def graph_to_dict(g: PatternGraph) -> dict:
    return {"n": g.n, "edges": [list(e) for e in g.sorted_edges]}


def graph_from_dict(d: dict) -> PatternGraph:
    if not isinstance(d, dict) or "n" not in d or "edges" not in d:
        raise GraphError("graph JSON needs 'n' and 'edges'")
    for e in d["edges"]:
        if len(e) != 2 or int(e[0]) > int(e[1]):
            raise GraphError(f"edge {e!r} must be [i, j] with i <= j")
    return PatternGraph.from_edges(int(d["n"]), d["edges"])


def partial_to_dict(pm: PartialMatrix) -> dict:
    out = graph_to_dict(pm.pattern)
    out["values"] = {_key(i, j): pm.values[(i, j)] for i, j in pm.pattern.sorted_edges}
    return out


def partial_from_dict(d: dict) -> PartialMatrix:
    g = graph_from_dict(d)
    if "values" not in d:
        raise GraphError("partial matrix JSON needs 'values'")
    vals = {}
    for k, v in d["values"].items():
        key = _parse_key(k)
        if key in vals:
            raise GraphError(f"duplicate value key {k!r}")
        vals[key] = float(v)
    try:
        return PartialMatrix(g, vals)
    except ValueError as exc:
        raise GraphError(str(exc)) from exc


def certificate_to_dict(c: Certificate) -> dict:
    out = {"kind": c.kind, **c.evidence}
    if c.recipe is not None:
        out["recipe"] = c.recipe
    if c.witness is not None:
        out["witness"] = c.witness
    return out


def certificate_from_dict(d: dict) -> Certificate:
    d = dict(d)
    kind = d.pop("kind")
    recipe = d.pop("recipe", None)
    witness = d.pop("witness", None)
    return Certificate(kind, d, recipe, witness)


def verdict_to_dict(v: ClosureVerdict) -> dict:
    return {
        "status": v.status.value,
        "rank": v.rank,
        "vertices": list(v.vertices),
        "heuristic": v.heuristic,
        "certificate": certificate_to_dict(v.certificate),
        "components": [verdict_to_dict(c) for c in v.components],
    }


def verdict_from_dict(d: dict) -> ClosureVerdict:
    return ClosureVerdict(
        Status(d["status"]),
        certificate_from_dict(d["certificate"]),
        int(d["rank"]),
        tuple(d.get("vertices", ())),
        tuple(verdict_from_dict(c) for c in d.get("components", ())),
        bool(d.get("heuristic", False)),
    )


def instance_to_dict(inst: ObservationInstance) -> dict:
    out = {"m": inst.m, "p": inst.p, "omega": [list(c) for c in inst.omega], "values": list(inst.values)}
    if inst.truth is not None:
        out["truth"] = inst.truth.tolist()
    return out


def instance_from_dict(d: dict) -> ObservationInstance:
    truth = d.get("truth")
    return ObservationInstance(
        int(d["m"]),
        int(d["p"]),
        tuple(tuple(c) for c in d["omega"]),
        tuple(d["values"]),
        None if truth is None else np.asarray(truth, dtype=float),
    )


def completion_to_dict(res: CompletionResult) -> dict:
    return {
        "order": int(res.matrix.shape[0]),
        "matrix": res.matrix.tolist(),
        "rank": res.rank,
        "recipe": res.recipe,
        "residuals": _plain(res.residuals),
    }


def oracle_to_dict(ans: OracleAnswer) -> dict:
    out = {"status": ans.status.value, "certificate": _plain(ans.certificate), "info": _plain(ans.info)}
    if ans.completion is not None:
        out["completion"] = ans.completion.tolist()
    return out


def report_to_dict(rep: RecoveryReport) -> dict:
    return {
        "z_hat": rep.z_hat.tolist(),
        "nuclear_norm": rep.nuclear_norm,
        "rank": rep.rank,
        "residual": rep.residual,
        "gap": rep.gap,
        "iterations": rep.iterations,
        "truth_error": rep.truth_error,
        "recovered": rep.recovered,
        "lifted_half_trace": rep.lifted_half_trace,
    }


def _plain(obj):
    """Recursively convert numpy scalars/arrays so ``json.dumps`` accepts them."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and obj != obj:
        return None
    if obj == float("inf"):
        return "inf"
    return obj


def dumps(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=False)


def load_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_atomic(path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
