"""Command-line interface: check, enumerate, verify, atlas."""
from __future__ import annotations

import argparse
import csv
import glob
import io
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import lemmas
from .families import FAMILY_TAGS, VersionMismatch, atlas_merge, beta_growth
from .pipeline import SUITES, StageError, classify_json, scan_family_parallel, verify_all
from .serialize import atomic_write, dumps, parse_rat, rat
from .valuation import DEFAULT_KMAX

EX_OK = 0
EX_FAIL = 1
EX_SETTING = 2
EX_USAGE = 64
EX_IOERR = 74


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class RunConfig:
    command: str
    r_max: Optional[int] = None
    k_max: int = DEFAULT_KMAX
    d_max: int = 8
    s_max: int = 3
    q_max: int = 6
    d: int = 2
    delta: Optional[Fraction] = None
    epsilon: Optional[Fraction] = None
    workers: Optional[int] = None
    paths: dict = field(default_factory=dict)
    include_integer_classes: bool = False
    verbose_pairings: bool = False

    def validate(self):
        for name in ("r_max", "k_max", "d_max", "s_max", "q_max", "d", "workers"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise UsageError(f"{name} must be positive, got {v}")
        if self.d_max < 2:
            raise UsageError("--gdeg must be at least 2")
        for name in ("delta", "epsilon"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise UsageError(f"{name} must be a positive rational")


def _rational(text):
    try:
        return parse_rat(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="enc-cdv", description="Exact classification tools for cyclic quotient cDV data.")
    p.add_argument("--workers", type=int, help="worker processes (default: $%s or 1)" % lemmas.WORKERS_ENV)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    c = sub.add_parser("check", help="classify one instance given as JSON")
    c.add_argument("--input", required=True, help="path to the instance JSON, or - for stdin")
    c.add_argument("--kmax", type=int, default=DEFAULT_KMAX)
    c.add_argument("--include-integer-classes", action="store_true",
                   help="also search the class j = 0 (integer shifts)")
    c.add_argument("--verbose-pairings", action="store_true",
                   help="report every valid terminal pairing, not only the first")

    e = sub.add_parser("enumerate", help="scan one family and write JSONL records")
    e.add_argument("--family", required=True, choices=FAMILY_TAGS)
    e.add_argument("--rmax", type=int, required=True)
    e.add_argument("--kmax", type=int, default=3)
    e.add_argument("--gdeg", type=int, default=8)
    e.add_argument("--gsize", type=int, default=3)
    e.add_argument("--include-integer-classes", action="store_true")
    e.add_argument("--out", required=True)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=SUITES)
    v.add_argument("--rmax", type=int)
    v.add_argument("--delta", type=_rational)
    v.add_argument("--d", type=int, default=2)
    v.add_argument("--epsilon", type=_rational)
    v.add_argument("--qmax", type=int, default=6)
    v.add_argument("--kmax", type=int, default=3)
    v.add_argument("--gdeg", type=int, default=8)
    v.add_argument("--gsize", type=int, default=3)
    v.add_argument("--count", type=int, default=400, help="corpus size for sublevel-oracle")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--csv", help="write one row per witness/counterexample")
    v.add_argument("--json", dest="json_out", help="write the full report as JSON")

    a = sub.add_parser("atlas", help="merge JSONL scan shards into the atlas table")
    a.add_argument("--merge", required=True, action="append", help="glob of JSONL files (repeatable)")
    a.add_argument("--csv", required=True)
    a.add_argument("--growth", action="store_true", help="print distinct-beta counts per window")
    return p


def parse_config(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    if ns.command is None:
        raise UsageError("missing subcommand (check, enumerate, verify, atlas)")
    cfg = RunConfig(ns.command, workers=ns.workers)
    if ns.command == "check":
        cfg.k_max = ns.kmax
        cfg.paths["input"] = ns.input
        cfg.include_integer_classes = ns.include_integer_classes
        cfg.verbose_pairings = ns.verbose_pairings
    elif ns.command == "enumerate":
        cfg.r_max, cfg.k_max, cfg.d_max, cfg.s_max = ns.rmax, ns.kmax, ns.gdeg, ns.gsize
        cfg.include_integer_classes = ns.include_integer_classes
        cfg.paths.update(out=ns.out, family=ns.family)
    elif ns.command == "verify":
        cfg.r_max, cfg.k_max, cfg.d_max, cfg.s_max = ns.rmax, ns.kmax, ns.gdeg, ns.gsize
        cfg.delta, cfg.epsilon, cfg.q_max, cfg.d = ns.delta, ns.epsilon, ns.qmax, ns.d
        cfg.paths.update(suite=ns.suite, csv=ns.csv, json=ns.json_out, count=ns.count, seed=ns.seed)
        if ns.count < 1:
            raise UsageError("--count must be positive")
    else:
        cfg.paths.update(merge=ns.merge, csv=ns.csv, growth=ns.growth)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------- commands


def _read_text(path):
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def cmd_check(cfg: RunConfig, out) -> int:
    text = _read_text(cfg.paths["input"])
    try:
        data = json.loads(text)
        verdict = classify_json(data, cfg.k_max, not cfg.include_integer_classes)
    except (ValueError, json.JSONDecodeError) as exc:
        raise UsageError(str(exc))
    doc = verdict.to_json()
    ws = verdict.weights
    if ws is not None:
        hyp = lemmas.terminal_hypothesis(ws)
        pre = lemmas.terminal_preconditions(ws.r, ws.a, ws.e)
        doc["terminal"] = {"hypothesis": hyp, "preconditions": pre}
    if ws is not None and hyp and pre:
        tc = lemmas.terminal_conclusion(ws, all_pairings=cfg.verbose_pairings)
        doc["terminal"].update({
            "case": tc.case,
            "pairing": [list(x) if isinstance(x, tuple) else x for x in tc.pairing],
            "values": list(tc.values),
        })
        if cfg.verbose_pairings:
            doc["terminal"]["alternatives"] = [
                [list(x) if isinstance(x, tuple) else x for x in p] for p in tc.alternatives
            ]
    out.write(dumps(doc, indent=2) + "\n")
    return EX_OK if verdict.setting_pass else EX_SETTING


def cmd_enumerate(cfg: RunConfig, out) -> int:
    recs = scan_family_parallel(
        cfg.paths["family"], cfg.r_max, cfg.k_max, cfg.d_max, cfg.s_max, cfg.workers,
        exclude_integer_classes=not cfg.include_integer_classes,
    )
    lines = sorted(dumps(r) for r in recs)
    atomic_write(cfg.paths["out"], "".join(line + "\n" for line in lines))
    valid = sum(r["verdict"]["status"] == "Valid" for r in recs)
    out.write(f"{len(recs)} records ({valid} Valid) -> {cfg.paths['out']}\n")
    return EX_OK


def _csv_rows(suite: str, rep: dict):
    """Header and rows: one per witness/counterexample of the suite."""
    if suite == "terminal":
        return ["r", "a1", "a2", "a3", "a4", "e"], [list(c) for c in rep["counterexamples"]]
    if suite == "nc":
        rows = [[v] + [w[0], w[1]] + list(w[2]) + [w[3]] for v, w in sorted(rep["witnesses"].items())]
        return ["value", "r", "k0", "a1", "a2", "a3", "a4", "e"], rows
    if suite == "bound-oracle":
        rows = [["max", rep["max_r"], " ".join(rat(x) for x in rep["attained_by"])]]
        rows += [["degenerate", "", " ".join(rat(x) for x in v)] for v in rep["degenerate"]]
        return ["kind", "r", "vector"], rows
    if suite in ("structure-cA", "structure-nonCA"):
        rows = [["violation", v["family"], json.dumps(v["ws"], sort_keys=True), json.dumps(v["support"]["monomials"]), ""]
                for v in rep["violations"]]
        rows += [["exception", x["family"], json.dumps(x["ws"], sort_keys=True), json.dumps(x["support"]["monomials"]),
                  " ".join(x["failed"])] for x in rep["exceptions"]]
        return ["kind", "family", "ws", "monomials", "failed"], rows
    if suite == "lemma-4.7":
        rows = [[json.dumps(v["ws"], sort_keys=True), json.dumps(v["support"]["monomials"]), " ".join(map(str, v["classes"]))]
                for v in rep["violations"]]
        return ["ws", "monomials", "classes"], rows
    rows = []
    for kind in ("missing", "extra", "beyond_box"):
        rows += [[kind, x["corpus"], json.dumps(x["ws"]), x["support"]["type"], json.dumps(x["support"]["monomials"])]
                 for x in rep[kind]]
    return ["kind", "corpus", "ws", "type", "monomials"], rows


def cmd_verify(cfg: RunConfig, out) -> int:
    suite = cfg.paths["suite"]
    status, rep = verify_all(
        suite, r_max=cfg.r_max, delta=cfg.delta, d=cfg.d, epsilon=cfg.epsilon, q_max=cfg.q_max,
        k_max=cfg.k_max, d_max=cfg.d_max, s_max=cfg.s_max, workers=cfg.workers,
        count=cfg.paths["count"], seed=cfg.paths["seed"],
    )
    if cfg.paths.get("json"):
        atomic_write(cfg.paths["json"], dumps(rep, indent=2) + "\n")
    if cfg.paths.get("csv"):
        header, rows = _csv_rows(suite, rep)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        atomic_write(cfg.paths["csv"], buf.getvalue())
    out.write(dumps({"suite": suite, "status": status, "summary": _summary(suite, rep)}, indent=2) + "\n")
    return EX_OK if status == 0 else EX_FAIL


def _summary(suite: str, rep: dict) -> dict:
    if suite == "terminal":
        return {"r_max": rep["r_max"], "tuples": rep["tuples"], "counterexamples": len(rep["counterexamples"])}
    if suite == "nc":
        return {"delta": rep["delta"], "r_max": rep["r_max"], "values": rep["values"],
                "chain_failures": len(rep["chain_failures"])}
    if suite == "bound-oracle":
        return {k: rep[k] for k in ("d", "epsilon", "q_max", "r_max", "max_r", "attained_by", "checked")} | {
            "degenerate": len(rep["degenerate"])}
    if suite in ("structure-cA", "structure-nonCA"):
        return {"records": rep["records"], "valid": rep["valid"], "violations": len(rep["violations"]),
                "exceptions": len(rep["exceptions"])}
    if suite == "lemma-4.7":
        return {"records": rep["records"], "valid": rep["valid"], "violations": len(rep["violations"])}
    return {"systems": rep["systems"], "per_corpus": rep["per_corpus"], "missing": len(rep["missing"]),
            "extra": len(rep["extra"]), "beyond_box": len(rep["beyond_box"])}


def cmd_atlas(cfg: RunConfig, out) -> int:
    paths = sorted({p for pattern in cfg.paths["merge"] for p in glob.glob(pattern)})
    if not paths:
        raise FileNotFoundError(f"no files match {cfg.paths['merge']}")
    records = []
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            for n, line in enumerate(fh, 1):
                if line.strip():
                    try:
                        records.append(json.loads(line))
                    except json.JSONDecodeError as exc:
                        raise UsageError(f"{path}:{n}: {exc}")
    try:
        rows = atlas_merge(records)
    except VersionMismatch as exc:
        raise UsageError(str(exc))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["family", "k", "r", "beta", "supports"])
    for row in rows:
        w.writerow([row["family"], row["k"], row["r"], " ".join(row["beta"]), row["supports"]])
    atomic_write(cfg.paths["csv"], buf.getvalue())
    out.write(f"{len(rows)} atlas rows from {len(records)} records -> {cfg.paths['csv']}\n")
    if cfg.paths["growth"]:
        for fam in sorted({r["family"] for r in records}):
            counts = beta_growth(records, fam)
            regress = [big for (big, c), (_, c0) in zip(counts[1:], counts) if c > c0]
            out.write(f"{fam}: {counts} regressions at R={regress}\n")
    return EX_OK


COMMANDS = {"check": cmd_check, "enumerate": cmd_enumerate, "verify": cmd_verify, "atlas": cmd_atlas}


def parse_and_dispatch(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
        return COMMANDS[cfg.command](cfg, out)
    except UsageError as exc:
        err.write(f"usage error: {exc}\n")
        return EX_USAGE
    except SystemExit as exc:  # --help
        return EX_OK if not exc.code else EX_USAGE
    except OSError as exc:
        err.write(f"i/o error: {exc}\n")
        return EX_IOERR
    except StageError as exc:
        err.write(f"internal error in stage {exc}\n")
        return EX_FAIL
    except Exception as exc:
        err.write(f"internal error: {type(exc).__name__}: {exc}\n")
        return EX_FAIL


def main(argv=None) -> int:
    return parse_and_dispatch(argv)


if __name__ == "__main__":
    sys.exit(main())
