"""``idd`` command-line front end.

Every command builds one JSON document (sorted keys, rationals as ``p/q``)
that embeds the configuration producing it; Markdown output is rendered
from that document.  Exit codes: 0 all checks pass (flagged discrepancies
allowed), 1 a check failed, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Iterable

from idd.algebra import AlgebraSpec, SpecParseError, build_table, parse_spec
from idd.classify import DEFAULT_SEED, WindowTooSmall as ChainWindowTooSmall, classify_report, classify_window
from idd.derivations import (
    DEFAULT_MARGIN, WindowTooSmall, check_leibniz, find_infinite_family, infinite_family_check,
    solve_derivations,
)
from idd.identities import StarTable, check_conservative, check_generalized_associative, check_left_commutative
from idd.scalars import render
from idd.verify import DISCREPANCY, FAIL, PASS, SCOPES, Task, run_task, tasks_for

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class GridParseError(ValueError):
    def __init__(self, path: str, line: int, text: str, reason: str):
        self.line = line
        super().__init__(f"{path}:{line}: {reason}: {text!r}")


class UsageError(ValueError):
    pass


# --- serialization -------------------------------------------------------------

def _default(obj):
    if isinstance(obj, Fraction):
        return render(obj)
    if isinstance(obj, AlgebraSpec):
        return str(obj)
    if isinstance(obj, (set, frozenset, tuple)):
        return sorted(obj) if isinstance(obj, (set, frozenset)) else list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dump_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False, default=_default) + "\n"


def _cell(v: Any) -> str:
    if isinstance(v, (dict, list)):
        text = json.dumps(v, sort_keys=True, ensure_ascii=False, default=_default)
        if len(text) > 120:
            text = text[:117] + "..."
        return f"`{text}`"
    return str(v).replace("|", "\\|")


def _table(rows: list[dict]) -> list[str]:
    cols: list[str] = []
    for r in rows:
        cols += [c for c in r if c not in cols]
    out = ["| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
    out += ["| " + " | ".join(_cell(r.get(c, "")) for c in cols) + " |" for r in rows]
    return out


def render_markdown(doc: dict) -> str:
    """Markdown view of a JSON report document."""
    lines = [f"# idd {doc['command']}", "", "## Configuration", ""]
    lines += _table([doc["config"]])
    for key in sorted(k for k in doc if k not in ("command", "config")):
        val = json.loads(json.dumps(doc[key], default=_default))
        lines += ["", f"## {key.replace('_', ' ').capitalize()}", ""]
        if isinstance(val, list) and val and all(isinstance(v, dict) for v in val):
            lines += _table(val)
        elif isinstance(val, list) and not val:
            lines.append("(none)")
        elif not isinstance(val, (dict, list)):
            lines.append(f"**{val}**")
        elif isinstance(val, dict) and all(not isinstance(v, (dict, list)) for v in val.values()):
            lines += _table([val])
        else:
            lines += ["```json", json.dumps(val, sort_keys=True, indent=2, ensure_ascii=False), "```"]
    return "\n".join(lines) + "\n"


def emit(doc: dict, args) -> None:
    text = render_markdown(doc) if args.format == "markdown" else dump_json(doc)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def config_of(args, specs: Iterable[str] = ()) -> dict:
    """The result-determining configuration; output path and worker count are excluded."""
    cfg = {"command": args.command, "specs": list(specs), "format": args.format, "seed": args.seed,
           "window_margin": args.window_margin}
    if args.command == "verify-paper":
        cfg.update(scope=args.scope, n_max=args.n_max)
    return cfg


def _worker_count(jobs: int | None) -> int:
    return max(1, jobs if jobs else (os.cpu_count() or 1))


def fan_out(fn: Callable, items: list, jobs: int | None) -> list:
    """``map`` in input order, across a process pool when more than one worker is requested."""
    n = _worker_count(jobs)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * n))))


# --- commands -------------------------------------------------------------------

def cmd_table(args) -> int:
    spec = parse_spec(args.spec)
    t = build_table(spec)
    doc = {"command": "table", "config": config_of(args, [str(spec)]), "spec": str(spec),
           "entries": t.dump()}
    if spec.infinite:
        doc["out_of_window"] = [list(p) for p in sorted(t.out_of_window)]
    emit(doc, args)
    return EXIT_OK


def classification_record(spec_text: str, seed: int) -> dict:
    spec = parse_spec(spec_text)
    return classify_window(spec, seed) if spec.infinite else classify_report(spec, seed)


def _classification_status(rec: dict) -> str:
    if rec["verdict"] in ("Unclassified",):
        return FAIL
    return PASS if rec["oracle_agreement"] else DISCREPANCY


def cmd_classify(args) -> int:
    spec = parse_spec(args.spec)
    rec = classification_record(str(spec), args.seed)
    status = _classification_status(rec)
    emit({"command": "classify", "config": config_of(args, [str(spec)]), "report": rec, "status": status}, args)
    return EXIT_FAIL if status == FAIL else EXIT_OK


def cmd_derive(args) -> int:
    spec = parse_spec(args.spec)
    if spec.infinite:
        if find_infinite_family(spec) is None:
            raise UsageError(f"no corollary family registered for {spec}")
        report = infinite_family_check(spec, margin=args.window_margin)
        status = PASS if report["leibniz_ok"] and report["interior_within_corollary"] else DISCREPANCY
        if "generator_count_mismatch" in report:
            status = DISCREPANCY
    else:
        rep = solve_derivations(spec)
        t = build_table(spec)
        report = rep.to_json()
        report["kernel_basis_passes_leibniz"] = all(check_leibniz(t, D).ok for D in rep.kernel_maps())
        if not report["kernel_basis_passes_leibniz"]:
            status = FAIL
        elif rep.family is None or (rep.span_match and not rep.discrepancies):
            status = PASS
        else:
            status = DISCREPANCY
    emit({"command": "derive", "config": config_of(args, [str(spec)]), "report": report, "status": status}, args)
    return EXIT_FAIL if status == FAIL else EXIT_OK


def cmd_identities(args) -> int:
    spec = parse_spec(args.spec)
    t = build_table(spec)
    reports = []
    lc = check_left_commutative(t).to_json()
    lc["claimed"] = spec.infinite and spec.m2 == 0
    reports.append(lc)
    if spec.m2 == 0:
        s = StarTable(spec)
        for fn in (check_generalized_associative, check_conservative):
            r = fn(t, s).to_json()
            r["claimed"] = spec.infinite
            reports.append(r)
    failed = any(r["claimed"] and not r["pass"] for r in reports)
    emit({"command": "identities", "config": config_of(args, [str(spec)]), "reports": reports,
          "status": FAIL if failed else PASS}, args)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_verify_paper(args) -> int:
    if args.n_max < 8:
        raise UsageError("--n-max must be at least 8")
    if args.scope != "all" and args.scope not in SCOPES:
        raise UsageError(f"unknown scope {args.scope!r}; choose all or one of {', '.join(SCOPES)}")
    tasks: list[Task] = tasks_for(args.scope, args.n_max, args.seed, args.window_margin)
    results = fan_out(run_task, tasks, args.jobs)
    for r in results:
        print(f"{r['status']:<11} {r['scope']:<15} {r['instance']}", file=sys.stderr)
    summary = {s: sum(r["status"] == s for r in results) for s in (PASS, FAIL, DISCREPANCY)}
    summary["instances"] = len(results)
    print(f"summary: {summary[PASS]} pass, {summary[DISCREPANCY]} discrepancy, {summary[FAIL]} fail",
          file=sys.stderr)
    emit({"command": "verify-paper", "config": config_of(args), "summary": summary, "results": results}, args)
    return EXIT_FAIL if summary[FAIL] else EXIT_OK


def read_grid(path: str) -> list[str]:
    """Spec strings of a grid file, one per line; ``#`` starts a comment."""
    specs = []
    for no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            specs.append(str(parse_spec(line)))
        except SpecParseError as exc:
            raise GridParseError(path, no, line, f"bad spec at column {exc.pos + 1}") from exc
    return specs


def _sweep_point(item: tuple[str, int]) -> dict:
    spec_text, seed = item
    return classification_record(spec_text, seed)


def _load_manifest(out: Path) -> dict[str, dict]:
    """Completed records from an earlier interrupted run of the same sweep."""
    manifest = out.with_name(out.name + ".manifest")
    records = out.with_name(out.name + ".records.jsonl")
    if not manifest.exists() or not records.exists():
        return {}
    done = {line.strip() for line in manifest.read_text(encoding="utf-8").splitlines() if line.strip()}
    got = {}
    for line in records.read_text(encoding="utf-8").splitlines():
        try:
            rec = json.loads(line)
        except json.JSONDecodeError:
            continue  # a torn final line from an interrupted write
        if rec.get("spec") in done:
            got[rec["spec"]] = rec
    return got


def cmd_sweep(args) -> int:
    specs = read_grid(args.grid)
    out = Path(args.out) if args.out else None
    done = _load_manifest(out) if out else {}
    todo = sorted({s for s in specs if s not in done}, key=specs.index)
    if out and todo:
        manifest = out.with_name(out.name + ".manifest")
        records = out.with_name(out.name + ".records.jsonl")
        with records.open("a", encoding="utf-8") as rf, manifest.open("a", encoding="utf-8") as mf:
            # Persist each point before listing it, one worker batch at a time.
            batch = max(1, _worker_count(args.jobs)) * 8
            for start in range(0, len(todo), batch):
                chunk = todo[start:start + batch]
                for spec_text, rec in zip(chunk, fan_out(_sweep_point, [(s, args.seed) for s in chunk], args.jobs)):
                    rf.write(json.dumps(rec, sort_keys=True, default=_default) + "\n")
                    rf.flush()
                    mf.write(spec_text + "\n")
                    mf.flush()
                    done[spec_text] = rec
    elif todo:
        for spec_text, rec in zip(todo, fan_out(_sweep_point, [(s, args.seed) for s in todo], args.jobs)):
            done[spec_text] = rec
    records_out = [json.loads(json.dumps(done[s], default=_default)) for s in specs]
    statuses = [_classification_status(r) for r in records_out]
    summary = {s: statuses.count(s) for s in (PASS, FAIL, DISCREPANCY)}
    summary["records"] = len(records_out)
    emit({"command": "sweep", "config": {**config_of(args, specs), "grid": os.path.basename(args.grid)},
          "summary": summary, "records": records_out}, args)
    return EXIT_FAIL if summary[FAIL] else EXIT_OK


# --- entry point --------------------------------------------------------------------

COMMANDS = {"table": cmd_table, "classify": cmd_classify, "derive": cmd_derive,
            "identities": cmd_identities, "verify-paper": cmd_verify_paper, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "markdown"], default="json")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--seed", type=_u64, default=DEFAULT_SEED, help="seed for random probes")
    common.add_argument("--window-margin", type=int, default=DEFAULT_MARGIN,
                        help="boundary band excluded from interior analysis on truncation windows")
    common.add_argument("--jobs", type=int, default=None, help="worker processes (default: all CPUs)")

    p = argparse.ArgumentParser(prog="idd", description="Integro-derivation algebras: tables, "
                                "classification, derivations and identity checks.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in [("table", "dump the nonzero structure constants"),
                           ("classify", "classify a finite algebra or a truncation window"),
                           ("derive", "solve for the derivation algebra"),
                           ("identities", "check left-commutativity and, for m2 = 0, conservativity")]:
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("spec", help="K<k>:<n>:<m1>,<m2> or K<k>:inf@<N>:<m1>,<m2>")
    vp = sub.add_parser("verify-paper", parents=[common], help="run every registered theorem check")
    vp.add_argument("--scope", default="all", help=f"all or one of: {', '.join(SCOPES)}")
    vp.add_argument("--n-max", type=int, default=15)
    sw = sub.add_parser("sweep", parents=[common], help="classify every spec listed in a grid file")
    sw.add_argument("grid", help="file with one spec string per line")
    return p


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except (SpecParseError, GridParseError, UsageError, WindowTooSmall, ChainWindowTooSmall) as exc:
        print(f"idd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError) as exc:
        print(f"idd: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
