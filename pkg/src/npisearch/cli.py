"""Command-line front end: search, verify, enumerate, fold, sweep.

Exit codes follow one contract everywhere: 0 for a run that completed
within budget, 2 when the budget ran out (or the run was interrupted)
before finishing, 1 for configuration or input errors.

Progress goes to stderr as line-oriented key=value records.  Certificates
and index files are written under --out, defaulting to $NPI_OUT_DIR and
then ./npi-out.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from pathlib import Path
from typing import Optional

from . import certify
from .complexes import TwoComplex
from .folding import fold
from .forest import Budget, ForestNode, SearchReport, Target, search
from .presentations import Word, enumerate_words, miller_schupp

ENV_OUT_DIR = "NPI_OUT_DIR"
INDEX_FORMAT = "npi-index/1"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # config errors must exit 1, not argparse's default 2
    def error(self, message):
        raise _UsageError(message)


def _log(line: str) -> None:
    print(line, file=sys.stderr)


def _out_dir(arg: Optional[str]) -> Path:
    return Path(arg or os.environ.get(ENV_OUT_DIR) or "npi-out")


def _parse_ms(spec: str) -> tuple[int, str]:
    match = re.fullmatch(r"n=(\d+),w=([aAbB]+)", spec)
    if not match:
        raise _UsageError(f"bad --ms spec {spec!r}; expected n=<int>,w=<word>")
    return int(match.group(1)), match.group(2)


def _load_complex_file(path: str) -> TwoComplex:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc}")
    try:
        return certify.load_complex(text)
    except certify.CertificateError as exc:
        raise _UsageError(f"{path}: {exc}")


def _budget(args) -> Budget:
    return Budget(args.max_depth, args.max_nodes, args.max_seconds)


def _target(args) -> Target:
    return Target(args.min_chi, args.require_no_free_edges, args.stop_on_first)


def _workers(args) -> int:
    if args.deterministic and args.workers > 1:
        _log(f"workers={args.workers} ignored: deterministic mode forces workers=1")
        return 1
    return args.workers


def _index_doc(
    source: dict,
    report: SearchReport,
    hits: list[dict],
    *,
    budget: Budget,
    target: Target,
    workers: int,
    deterministic: bool,
) -> dict:
    return {
        "format": INDEX_FORMAT,
        "input": source,
        "budget": {
            "max_depth": budget.max_depth,
            "max_nodes": budget.max_nodes,
            "max_seconds": budget.max_seconds,
        },
        "target": {
            "min_chi": target.min_chi,
            "require_no_free_edges": target.require_no_free_edges,
            "stop_on_first": target.stop_on_first,
        },
        "workers": workers,
        "deterministic": deterministic,
        "completed": report.completed,
        "interrupted": report.interrupted,
        "stopped_on_hit": report.stopped_on_hit,
        "depths": [
            {
                "depth": d.depth,
                "nodes": d.nodes,
                "max_chi": d.max_chi,
                "complete": d.complete,
            }
            for d in report.depths
        ],
        "hits": hits,
        "stats": {
            "candidates": report.candidates,
            "dedup_hits": report.dedup_hits,
            "face_merge_rejects": report.face_merge_rejects,
            "elapsed_seconds": None if deterministic else report.wall_seconds,
        },
    }


def _run_one_search(
    x: TwoComplex,
    source: dict,
    out_dir: Path,
    args,
    *,
    extra_hit_fields: Optional[dict] = None,
) -> tuple[int, SearchReport]:
    budget = _budget(args)
    target = _target(args)
    workers = _workers(args)
    out_dir.mkdir(parents=True, exist_ok=True)
    hits: list[dict] = []

    def on_hit(node: ForestNode) -> None:
        name = f"hit-d{node.depth}-{node.digest}{certify.FILE_SUFFIX}"
        certify.write_certificate(out_dir / name, node.immersion)
        entry = {
            "file": name,
            "depth": node.depth,
            "euler": node.euler,
            "faces": node.faces,
            "key": node.digest,
        }
        if extra_hit_fields:
            entry.update(extra_hit_fields)
        hits.append(entry)

    report = search(
        x,
        budget,
        target,
        workers=workers,
        on_hit=on_hit,
        log=_log,
    )
    index = _index_doc(
        source,
        report,
        hits,
        budget=budget,
        target=target,
        workers=workers,
        deterministic=args.deterministic,
    )
    (out_dir / "index.json").write_text(
        json.dumps(index, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    code = 0 if report.completed or report.stopped_on_hit else 2
    return code, report


def _cmd_search(args) -> int:
    sources = [s for s in (args.ms, args.complex, args.sweep) if s]
    if len(sources) != 1:
        raise _UsageError("exactly one of --ms, --complex, --sweep is required")
    if args.sweep:
        match = re.fullmatch(r"max_len=(\d+)", args.sweep)
        if not match:
            raise _UsageError(f"bad --sweep spec {args.sweep!r}; expected max_len=<int>")
        args.max_len = int(match.group(1))
        args.n = 1
        return _cmd_sweep(args)
    if args.ms:
        n, word = _parse_ms(args.ms)
        try:
            x = miller_schupp(n, word)
        except ValueError as exc:
            raise _UsageError(str(exc))
        source = {"kind": "miller-schupp", "n": n, "word": word}
    else:
        x = _load_complex_file(args.complex)
        source = {"kind": "complex-file", "path": args.complex}
    code, _ = _run_one_search(x, source, _out_dir(args.out), args)
    return code


def _cmd_sweep(args) -> int:
    if args.max_len < 1:
        raise _UsageError("max_len must be >= 1")
    out_root = _out_dir(args.out)
    out_root.mkdir(parents=True, exist_ok=True)
    summary = []
    worst = 0
    for word in enumerate_words(args.max_len):
        spelled = str(word)
        _log(f"sweep word={spelled}")
        x = miller_schupp(args.n, word)
        source = {"kind": "miller-schupp", "n": args.n, "word": spelled}
        code, report = _run_one_search(
            x,
            source,
            out_root / spelled,
            args,
            extra_hit_fields={"word": spelled, "n": args.n},
        )
        first_hit = report.hits[0] if report.hits else None
        summary.append(
            {
                "word": spelled,
                "n": args.n,
                "hit": bool(report.hits),
                "first_hit_depth": first_hit.depth if first_hit else None,
                "first_hit_chi": first_hit.euler if first_hit else None,
                "completed": report.completed,
                "index": f"{spelled}/index.json",
            }
        )
        hit = "yes" if report.hits else "no"
        depth = first_hit.depth if first_hit else "-"
        _log(f"sweep word={spelled} hit={hit} depth={depth} exit={code}")
        worst = max(worst, code)
    (out_root / "sweep.json").write_text(
        json.dumps({"format": "npi-sweep/1", "words": summary}, indent=2, sort_keys=True)
        + "\n",
        encoding="utf-8",
    )
    return worst


def _cmd_verify(args) -> int:
    if not args.paths:
        print("usage: npisearch verify PATH [PATH ...]", file=sys.stderr)
        return 1
    all_pass = True
    for path in args.paths:
        report = certify.verify_file(path)
        status = "PASS" if report.passed else "FAIL"
        print(f"{path}: {status}")
        if not report.passed:
            all_pass = False
            for line in report.lines():
                if line.startswith("FAIL"):
                    print(f"  {line}")
    return 0 if all_pass else 1


def _cmd_enumerate(args) -> int:
    if args.max_len < 1:
        raise _UsageError("max_len must be >= 1")
    for word in enumerate_words(args.max_len):
        print(word)
    return 0


def _cmd_fold(args) -> int:
    try:
        text = Path(args.input).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {args.input}: {exc}", file=sys.stderr)
        return 1
    try:
        m = certify.deserialize(text)
    except certify.CertificateError as exc:
        print(f"error: {args.input}: {exc}", file=sys.stderr)
        return 1
    result = fold(m)
    out_dir = _out_dir(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.input).name
    if stem.endswith(certify.FILE_SUFFIX):
        stem = stem[: -len(certify.FILE_SUFFIX)]
    out_path = out_dir / f"{stem}.folded{certify.FILE_SUFFIX}"
    certify.write_certificate(out_path, result.folded)
    print(
        f"edge_fold_count={result.edge_fold_count} "
        f"face_merge_count={result.face_merge_count} "
        f"vertex_fold_count={result.vertex_fold_count} "
        f"output={out_path}"
    )
    return 0


def _add_budget_and_target_flags(p: argparse.ArgumentParser, *, default_min_chi=None):
    p.add_argument("--min-chi", type=int, default=default_min_chi,
                   help="hit predicate: euler characteristic at least this")
    p.add_argument("--require-no-free-edges", action="store_true",
                   help="hit predicate: no free edges")
    p.add_argument("--stop-on-first", action="store_true",
                   help="halt as soon as a hit is found")
    p.add_argument("--max-depth", type=int, default=8)
    p.add_argument("--max-nodes", type=int, default=1_000_000)
    p.add_argument("--max-seconds", type=float, default=None)
    p.add_argument("--out", default=None,
                   help=f"output directory (default ${ENV_OUT_DIR} or ./npi-out)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--deterministic", action="store_true",
                   help="single worker, byte-identical outputs across runs")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="npisearch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_search = sub.add_parser("search", help="breadth-first forest search")
    p_search.add_argument("--ms", help="presentation spec, e.g. n=1,w=abbaB")
    p_search.add_argument("--complex", help="JSON file with a target complex")
    p_search.add_argument("--sweep", help="sweep mode, e.g. max_len=6")
    _add_budget_and_target_flags(p_search)
    p_search.set_defaults(func=_cmd_search)

    p_sweep = sub.add_parser("sweep", help="search every enumerated word")
    p_sweep.add_argument("--max-len", type=int, required=True)
    p_sweep.add_argument("--n", type=int, default=1)
    _add_budget_and_target_flags(p_sweep, default_min_chi=2)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_verify = sub.add_parser("verify", help="verify certificates")
    p_verify.add_argument("paths", nargs="*")
    p_verify.set_defaults(func=_cmd_verify)

    p_enum = sub.add_parser("enumerate", help="list normalized candidate words")
    p_enum.add_argument("max_len", type=int)
    p_enum.set_defaults(func=_cmd_enumerate)

    p_fold = sub.add_parser("fold", help="fold a map document to an immersion")
    p_fold.add_argument("input")
    p_fold.add_argument("--out", default=None)
    p_fold.set_defaults(func=_cmd_fold)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
