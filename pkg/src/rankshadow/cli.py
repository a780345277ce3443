"""Command line: ``rankshadow {classify,complete,witness,oracle,nuclear}``.

Exit codes: 0 Closed / success / Yes, 10 NotClosed / No, 20 Unknown /
Inconclusive, 30 no completion recipe, 40 witness family inapplicable,
2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from . import io as rio
from . import witness as wf
from .audit import audit_certificate
from .classify import Status, classify
from .completion import complete_for_verdict
from .errors import (
    AuditFailed,
    GraphError,
    NonConvergence,
    RankOutOfRange,
    RecipeInapplicable,
    WitnessError,
)
from .graph import (
    DEFAULT_EXACT_LIMIT,
    complete_multipartite_parts,
    find_noncyclic_path3,
    find_triangle,
    max_clique,
    mixed_loop_edge,
)
from .linalg import DEFAULT_TOL, rank_eps
from .nuclear import (
    adversarial_rank_one,
    default_sweep_family,
    failure_sweep,
    nuclear_min_complete,
    sweep_csv,
)
from .oracle import Answer, decide_rank_completable, min_rank_lower_bound, psd_completable

EXIT_OK, EXIT_NOT_CLOSED, EXIT_UNKNOWN = 0, 10, 20
EXIT_NO_RECIPE, EXIT_FAMILY, EXIT_INPUT = 30, 40, 2

STATUS_EXIT = {Status.CLOSED: EXIT_OK, Status.NOT_CLOSED: EXIT_NOT_CLOSED, Status.UNKNOWN: EXIT_UNKNOWN}
ANSWER_EXIT = {Answer.YES: EXIT_OK, Answer.NO: EXIT_NOT_CLOSED, Answer.INCONCLUSIVE: EXIT_UNKNOWN}


class InputError(Exception):
    pass


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("RANKSHADOW_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise InputError(f"RANKSHADOW_SEED={env!r} is not an integer") from exc


def _config(args, seed) -> dict:
    keep = {k: v for k, v in vars(args).items() if k not in ("func",)}
    return {"version": __version__, "config": {**keep, "seed": seed}, "tolerances": {"rank": args.tol}}


def _emit(args, text: str) -> None:
    if args.out:
        rio.write_atomic(args.out, text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _load(path, parser):
    try:
        return parser(rio.load_json(path))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError, GraphError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def cmd_classify(args) -> int:
    seed = _seed(args)
    g = _load(args.graph, rio.graph_from_dict)
    verdict = classify(g, args.rank, args.exact_limit)
    out = {**_config(args, seed), "verdict": rio.verdict_to_dict(verdict)}
    if args.audit:
        try:
            out["audit"] = {"ok": True, "checks": audit_certificate(g, args.rank, verdict, seed).checks}
        except AuditFailed as exc:
            out["audit"] = {"ok": False, "failed": str(exc)}
    if args.probe_tripartite:
        parts = complete_multipartite_parts(g) if g.is_loopless else None
        out["experimental"] = {
            "complete_tripartite": parts is not None and len(parts) == 3,
            "parts": parts,
            "note": "conjectural probe only; never used as a verdict",
        }
    _emit(args, rio.dumps(out))
    sys.stderr.write(f"{verdict.status.value}: {_summary(verdict)}\n")
    return STATUS_EXIT[verdict.status]


def _summary(verdict) -> str:
    comps = verdict.components or (verdict,)
    return "; ".join(f"{list(c.vertices)} -> {c.status.value} ({c.certificate.kind})" for c in comps)


def cmd_complete(args) -> int:
    seed = _seed(args)
    pm = _load(args.partial, rio.partial_from_dict)
    verdict = classify(pm.pattern, args.rank, args.exact_limit)
    out = {**_config(args, seed), "verdict": rio.verdict_to_dict(verdict)}
    try:
        res = complete_for_verdict(pm, args.rank, verdict, args.tol)
    except RecipeInapplicable as exc:
        out["error"] = {"kind": "RecipeInapplicable", "detail": str(exc)}
        _emit(args, rio.dumps(out))
        return EXIT_NO_RECIPE
    out["completion"] = rio.completion_to_dict(res)
    _emit(args, rio.dumps(out))
    return EXIT_OK


def _auto_anchors(g, family, rank):
    if family == wf.TRIANGLE:
        return find_triangle(g)
    if family == wf.PATH:
        return find_noncyclic_path3(g) if g.is_loopless else None
    if family == wf.CLIQUE:
        k, members = max_clique(g)
        return members[: rank + 2] if k >= rank + 2 else None
    if family == wf.MIXED_LOOP:
        hit = mixed_loop_edge(g)
        return hit[1] if hit else None
    return None


FAMILY_ALIASES = {
    "triangle": wf.TRIANGLE,
    "path": wf.PATH,
    "clique": wf.CLIQUE,
    "mixed-loop": wf.MIXED_LOOP,
    "odd-cycle": wf.ODD_CYCLE,
}


def cmd_witness(args) -> int:
    _seed(args)
    g = _load(args.graph, rio.graph_from_dict)
    family = FAMILY_ALIASES[args.family]
    anchors = args.anchors or _auto_anchors(g, family, args.rank or 1)
    if anchors is None:
        sys.stderr.write(f"no anchors for family {family} in this graph\n")
        return EXIT_FAMILY
    try:
        seq = wf.from_spec(g, {"family": family, "anchors": list(anchors), "rank": args.rank})
    except WitnessError as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return EXIT_FAMILY
    lines = []
    for j in args.j:
        x, a = seq.element(j)
        shadow = rio.partial_to_dict(a)["values"]
        residual = max((abs(x[u - 1, v - 1] - val) for (u, v), val in a.values.items()), default=0.0)
        row = {"j": j, "values": shadow, "rank": rank_eps(x, args.tol), "residual": residual,
               "limit_distance": a.distance(seq.limit)}
        lines.append(json.dumps(row))
    lines.append(json.dumps({"limit": rio.partial_to_dict(seq.limit)["values"], **seq.describe()}))
    _emit(args, "\n".join(lines))
    return EXIT_OK


def cmd_oracle(args) -> int:
    seed = _seed(args)
    pm = _load(args.partial, rio.partial_from_dict)
    rank = args.rank if args.rank is not None else pm.n
    if not 0 <= rank <= pm.n:
        raise InputError(f"rank {rank} outside [0, {pm.n}]")
    ans = decide_rank_completable(pm, rank, seed=seed)
    bound, cert = min_rank_lower_bound(pm)
    out = {
        **_config(args, seed),
        "answer": rio.oracle_to_dict(ans),
        "psd_completable": psd_completable(pm, search=False).status.value,
        "min_rank_lower_bound": {"bound": bound, "certificate": cert},
    }
    _emit(args, rio.dumps(out))
    return ANSWER_EXIT[ans.status]


def cmd_nuclear(args) -> int:
    seed = _seed(args)
    if args.sweep:
        family = default_sweep_family()
        result = failure_sweep(family, args.trials, seed=seed)
        if args.format == "csv":
            _emit(args, sweep_csv(result))
        else:
            _emit(args, rio.dumps({**_config(args, seed), **result}))
        return EXIT_OK
    if args.adversarial is not None:
        inst = adversarial_rank_one(args.adversarial)
    elif args.instance:
        inst = _load(args.instance, rio.instance_from_dict)
    else:
        raise InputError("nuclear needs an instance file, --adversarial EPS, or --sweep")
    code = EXIT_OK
    try:
        rep = nuclear_min_complete(inst)
    except NonConvergence as exc:
        rep, code = exc.report, EXIT_UNKNOWN
    _emit(args, rio.dumps({**_config(args, seed), "report": rio.report_to_dict(rep)}))
    return code


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (fallback: $RANKSHADOW_SEED, then 0)")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="relative rank tolerance")
    common.add_argument("--exact-limit", type=int, default=DEFAULT_EXACT_LIMIT,
                        help="largest component searched exactly for cliques / independent sets")
    common.add_argument("--out", default=None, help="write output here (atomically) instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    p = argparse.ArgumentParser(prog="rankshadow", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"rankshadow {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", parents=[common], help="closedness verdict for a pattern graph")
    c.add_argument("graph")
    c.add_argument("--rank", "-r", type=int, required=True)
    c.add_argument("--audit", action="store_true", help="re-verify the certificate")
    c.add_argument("--probe-tripartite", action="store_true",
                   help="report whether the graph is complete tripartite (experimental)")
    c.set_defaults(func=cmd_classify)

    c = sub.add_parser("complete", parents=[common], help="rank-restricted completion via the verdict's recipe")
    c.add_argument("partial")
    c.add_argument("--rank", "-r", type=int, required=True)
    c.set_defaults(func=cmd_complete)

    c = sub.add_parser("witness", parents=[common], help="tabulate a divergent witness sequence")
    c.add_argument("graph")
    c.add_argument("--family", choices=sorted(FAMILY_ALIASES), required=True)
    c.add_argument("--rank", "-r", type=int, default=None)
    c.add_argument("--anchors", type=int, nargs="+", default=None)
    c.add_argument("--j", type=int, nargs="+", default=[1, 10, 100, 1000])
    c.set_defaults(func=cmd_witness)

    c = sub.add_parser("oracle", parents=[common], help="rank-r PSD completability of a partial matrix")
    c.add_argument("partial")
    c.add_argument("--rank", "-r", type=int, default=None)
    c.set_defaults(func=cmd_oracle)

    c = sub.add_parser("nuclear", parents=[common], help="nuclear-norm completion / failure sweep")
    c.add_argument("instance", nargs="?")
    c.add_argument("--adversarial", type=float, default=None, metavar="EPS")
    c.add_argument("--sweep", action="store_true")
    c.add_argument("--trials", type=int, default=20)
    c.set_defaults(func=cmd_nuclear)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, RankOutOfRange, GraphError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
