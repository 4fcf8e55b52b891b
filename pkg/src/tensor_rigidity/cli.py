"""Command-line interface.

Subcommands: gen, dtree, certify, sweep, md-stats, oracle.  Exit codes:
0 on success, 2 on configuration/usage errors, 3 when a request exceeds the
documented size guards.
"""

from __future__ import annotations

import argparse
import json
import sys

from .completion import crosscheck
from .experiments import (
    CERTIFICATE_CHOICES,
    SweepConfig,
    curve_summary,
    md_statistics,
    summary_to_csv,
    threshold_sweep,
    write_records_csv,
)
from .hypergraph import PartiteHypergraph, gnm, gnp, random_dtree
from .identifiability import certify_global_rigidity
from .rigidity import GuardError


def _write_out(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _load_graph(path: str) -> PartiteHypergraph:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return PartiteHypergraph.from_json(text)
    return PartiteHypergraph.from_text(text)


def _dump_graph(graph: PartiteHypergraph, fmt: str, out: str | None) -> None:
    if fmt == "text":
        _write_out(graph.to_text(), out)
    else:
        _write_out(graph.to_json(), out)


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master RNG seed")
    common.add_argument("--trials", type=int, default=None, help="trial count override")
    common.add_argument("--out", default=None, help="output path (stdout when omitted)")
    common.add_argument(
        "--format", default=None, choices=("json", "csv", "text"), help="output format"
    )

    parser = argparse.ArgumentParser(
        prog="tensor-rigidity",
        description="Rigidity and identifiability certificates for partial tensor observation patterns",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", parents=[common], help="sample a random observation pattern")
    p_gen.add_argument("--n", type=int, required=True, help="class size (balanced)")
    p_gen.add_argument("--k", type=int, required=True, help="number of classes")
    p_gen.add_argument("--model", choices=("gnm", "gnp", "complete"), default="gnm")
    p_gen.add_argument("--m", type=int, default=None, help="edge count for gnm")
    p_gen.add_argument("--p", type=float, default=None, help="keep probability for gnp")

    p_tree = sub.add_parser("dtree", parents=[common], help="grow a random d-tree")
    p_tree.add_argument("--k", type=int, required=True)
    p_tree.add_argument("--d", type=int, required=True)
    p_tree.add_argument("--sizes", required=True, help="target class sizes, e.g. 4,4,4")

    p_cert = sub.add_parser("certify", parents=[common], help="evaluate rigidity certificates")
    p_cert.add_argument("--graph", required=True, help="graph file (JSON or text)")
    p_cert.add_argument("--d", type=int, required=True)
    p_cert.add_argument("--field", choices=("real", "complex"), default="real")

    p_sweep = sub.add_parser("sweep", parents=[common], help="Monte Carlo threshold sweep")
    p_sweep.add_argument("--k", type=int, required=True)
    p_sweep.add_argument("--d", type=int, required=True)
    p_sweep.add_argument("--n-list", required=True, help="class sizes, e.g. 6,8,10")
    p_sweep.add_argument("--mode", choices=("gnm", "at-threshold"), default="gnm")
    p_sweep.add_argument("--m-grid", default=None, help="edge counts for gnm mode")
    p_sweep.add_argument(
        "--certs", default="local", help=f"comma list from {','.join(CERTIFICATE_CHOICES)}"
    )
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument(
        "--summarize", action="store_true", help="emit per-point success rates instead of records"
    )

    p_md = sub.add_parser("md-stats", parents=[common], help="minimum-degree stopping statistics")
    p_md.add_argument("--n", type=int, required=True)
    p_md.add_argument("--k", type=int, required=True)
    p_md.add_argument("--d", type=int, required=True)

    p_oracle = sub.add_parser("oracle", parents=[common], help="least-squares completion cross-check")
    p_oracle.add_argument("--graph", required=True)
    p_oracle.add_argument("--d", type=int, required=True)
    p_oracle.add_argument("--starts", type=int, default=50)

    return parser


def _cmd_gen(args) -> int:
    fmt = args.format or "json"
    if fmt == "csv":
        fmt = "text"
    if args.model == "gnm":
        if args.m is None:
            raise ValueError("gen --model gnm needs --m")
        graph = gnm(args.n, args.k, args.m, seed=args.seed)
    elif args.model == "gnp":
        if args.p is None:
            raise ValueError("gen --model gnp needs --p")
        graph = gnp(args.n, args.k, args.p, seed=args.seed)
    else:
        graph = PartiteHypergraph.complete((args.n,) * args.k)
    _dump_graph(graph, fmt, args.out)
    return 0


def _cmd_dtree(args) -> int:
    fmt = args.format or "json"
    if fmt == "csv":
        fmt = "text"
    sizes = _int_list(args.sizes)
    graph = random_dtree(args.k, args.d, sizes, seed=args.seed)
    _dump_graph(graph, fmt, args.out)
    return 0


def _cmd_certify(args) -> int:
    graph = _load_graph(args.graph)
    trials = args.trials if args.trials is not None else 3
    cert = certify_global_rigidity(graph, args.d, args.field, trials=trials, seed=args.seed)
    _write_out(cert.to_json(), args.out)
    return 0


def _cmd_sweep(args) -> int:
    cfg = SweepConfig(
        k=args.k,
        d=args.d,
        n_list=tuple(_int_list(args.n_list)),
        mode=args.mode,
        m_grid=tuple(_int_list(args.m_grid)) if args.m_grid else None,
        certificates=tuple(tok for tok in args.certs.split(",") if tok),
        trials=args.trials if args.trials is not None else 20,
        seed=args.seed,
        jobs=args.jobs,
    )
    cfg.validate()
    records = threshold_sweep(cfg)
    fmt = args.format or "csv"
    if args.summarize:
        rows = []
        for n in cfg.n_list:
            for row in curve_summary([r for r in records if r.n == n]):
                rows.append({"n": n, **row})
        if fmt == "json":
            _write_out(json.dumps(rows), args.out)
        else:
            import csv as _csv
            import io as _io

            buf = _io.StringIO()
            writer = _csv.DictWriter(buf, fieldnames=list(rows[0].keys()) if rows else ["n"])
            writer.writeheader()
            for row in rows:
                writer.writerow(row)
            _write_out(buf.getvalue(), args.out)
        return 0
    if fmt == "json":
        _write_out(json.dumps([rec.__dict__ for rec in records]), args.out)
        return 0
    if args.out:
        write_records_csv(records, args.out)
    else:
        write_records_csv(records, sys.stdout)
    return 0


def _cmd_md_stats(args) -> int:
    trials = args.trials if args.trials is not None else 200
    stats = md_statistics(args.n, args.k, args.d, trials, seed=args.seed)
    fmt = args.format or "json"
    if fmt == "csv":
        header = ",".join(stats.keys())
        row = ",".join(str(v) for v in stats.values())
        _write_out(header + "\n" + row, args.out)
    else:
        _write_out(json.dumps(stats), args.out)
    return 0


def _cmd_oracle(args) -> int:
    graph = _load_graph(args.graph)
    trials = args.trials if args.trials is not None else 20
    report = crosscheck(graph, args.d, trials=trials, starts=args.starts, seed=args.seed)
    _write_out(json.dumps(report), args.out)
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "dtree": _cmd_dtree,
    "certify": _cmd_certify,
    "sweep": _cmd_sweep,
    "md-stats": _cmd_md_stats,
    "oracle": _cmd_oracle,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors already; normalize others
        return int(exc.code) if exc.code else 0
    try:
        return _COMMANDS[args.command](args)
    except GuardError as exc:
        print(f"guard violation: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
