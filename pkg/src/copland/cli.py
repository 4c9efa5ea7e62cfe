"""``copland`` command-line front end.

Exit status: 0 on success, 1 on parse/runtime errors, a FAIL verdict or
failed conformance checks, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import random
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import scenario
from .am import AmConfig, AmState, appraise, gen_nonce, nonce_evidence, record_golden, run_avm
from .config import Config, GoldenEntry, load_config, save
from .conformance import run_suite
from .core import Phrase, annotate
from .cvm import CvmError
from .events import Before, Copy, Hash, Join, Leaf, Meas, Merge, Req, Rpy, Sign, Split, ev_sys, ordered_pairs
from .evidence import PP, SS, Evidence, G, H, Mt, N, U
from .text import ParseError, SymbolTable, decode, encode, parse_phrase, print_phrase
from .text.codec import NAT, Node, Nodes, register


@dataclass(frozen=True)
class RunRecord:
    """Everything an appraiser needs from one ``run``: the result and the AM's nonces."""

    phrase: Phrase
    place: int
    seed: int
    evidence: Evidence
    trace: tuple
    state: AmState


@dataclass(frozen=True)
class GoldenTable:
    entries: tuple[GoldenEntry, ...]

    def table(self) -> dict[tuple, bytes]:
        return {(g.asp_id, g.place, g.target): g.bits for g in self.entries}


register(RunRecord, "RUN", "run", phrase=Node("phrase"), place=NAT, seed=NAT,
         evidence=Node("evidence"), trace=Nodes("event"), state=Node("amstate"))
register(GoldenTable, "GOLDENTABLE", "goldentable", entries=Nodes("golden"))


class CliError(Exception):
    pass


# --- rendering -----------------------------------------------------------


def _asp_name(asp_id: int, names: SymbolTable | None) -> str:
    return names.name_of(asp_id) if names is not None else f"asp{asp_id}"


def show_event(v, names: SymbolTable | None = None) -> str:
    match v:
        case Meas(i, pl, asp_id, args, host, target):
            extra = "".join(f", {a!r}" for a in args)
            return f"{i:>3} @{pl} meas {_asp_name(asp_id, names)}({host}, {target}{extra})"
        case Req(i, src, dst, _):
            return f"{i:>3} @{src} req -> {dst}"
        case Rpy(i, src, dst):
            return f"{i:>3} @{src} rpy <- {dst}"
        case Copy() | Sign() | Hash() | Split() | Join():
            return f"{v.id:>3} @{v.place} {type(v).__name__.lower()}"
    raise TypeError(v)


def _short(b: bytes) -> str:
    h = b.hex()
    return h if len(h) <= 16 else h[:16] + ".."


def show_evidence(e: Evidence, path: str = "$", names: SymbolTable | None = None) -> list[str]:
    def go(e, path):
        match e:
            case Mt():
                return [f"{path}  Mt"]
            case U(asp_id, args, place, bits, sub):
                head = f"{path}  U {_asp_name(asp_id, names)} {list(args)} @{place} {_short(bits)}"
                return [head] + go(sub, path + ".sub")
            case G(bits, sub):
                return [f"{path}  G {_short(bits)}"] + go(sub, path + ".sub")
            case H(bits):
                return [f"{path}  H {_short(bits)}"]
            case N(nid, bits, sub):
                return [f"{path}  N {nid} {_short(bits)}"] + go(sub, path + ".sub")
            case SS(l, r) | PP(l, r):
                return [f"{path}  {type(e).__name__}"] + go(l, path + ".left") + go(r, path + ".right")
        raise TypeError(e)

    return go(e, path)


def show_evsys(es, indent: int = 0) -> list[str]:
    pad = "  " * indent
    match es:
        case Leaf(v):
            return [pad + show_event(v).strip()]
        case Before(l, r) | Merge(l, r):
            return [pad + type(es).__name__] + show_evsys(l, indent + 1) + show_evsys(r, indent + 1)
    raise TypeError(es)


def show_tree(t, indent: int = 0) -> list[str]:
    """Indented constructor tree of a phrase or annotated phrase."""
    pad = "  " * indent
    name = type(t).__name__
    rng = getattr(t, "rng", None)
    label = f"{name} {list(rng)}" if rng is not None else name
    kids = [getattr(t, f) for f in ("body", "left", "right", "prim") if hasattr(t, f)]
    extra = []
    for f in ("place", "split", "asp_id", "args", "target"):
        if hasattr(t, f):
            val = getattr(t, f)
            extra.append(f"{f}={'/'.join(s.value for s in val) if f == 'split' else val}")
    line = pad + label + (" " + " ".join(extra) if extra else "")
    return [line] + [ln for k in kids for ln in show_tree(k, indent + 1)]


# --- helpers -------------------------------------------------------------


def _config(args) -> Config:
    cfg = load_config(args.config)
    if args.provider is not None:
        cfg = cfg.with_mode(args.provider)
    return cfg


def _read_phrase(args, cfg: Config) -> Phrase:
    if args.expr is not None:
        return parse_phrase(args.expr, cfg.symbols())
    path = Path(args.file)
    src = sys.stdin.read() if args.file == "-" else path.read_text()
    if path.suffix == ".json":
        return decode(src, "phrase")
    return parse_phrase(src, cfg.symbols())


def _emit(args, value, text: str | None = None) -> None:
    """Write the canonical encoding to --out (or stdout), human text to stdout."""
    if args.out:
        Path(args.out).write_bytes(encode(value) + b"\n")
        if text is not None:
            print(text)
    else:
        print(text if text is not None else encode(value).decode())


# --- subcommands ---------------------------------------------------------


def cmd_parse(args) -> int:
    cfg = _config(args)
    t = _read_phrase(args, cfg)
    text = {
        "json": None,
        "text": print_phrase(t, cfg.symbols()),
        "tree": "\n".join(show_tree(t)),
    }[args.format]
    _emit(args, t, text)
    return 0


def cmd_annotate(args) -> int:
    cfg = _config(args)
    at, _ = annotate(_read_phrase(args, cfg), args.start)
    _emit(args, at, "\n".join(show_tree(at)) if args.format == "tree" else None)
    return 0


def cmd_events(args) -> int:
    cfg = _config(args)
    at, _ = annotate(_read_phrase(args, cfg), 0)
    es = ev_sys(at, args.place)
    pairs = sorted(ordered_pairs(es), key=lambda vw: (vw[0].id, vw[1].id))
    lines = show_evsys(es) + [f"earlier pairs: {len(pairs)}"]
    lines += [f"  {v.id} < {w.id}" for v, w in pairs]
    _emit(args, es, "\n".join(lines) if args.format == "text" else None)
    return 0


def cmd_run(args) -> int:
    cfg = _config(args)
    t = _read_phrase(args, cfg)
    st = AmState()
    init: Evidence = Mt()
    if args.evidence:
        init = decode(Path(args.evidence).read_bytes(), "evidence")
    if args.nonce:
        nid, _, st = gen_nonce(st, random.Random(args.seed))
        init = nonce_evidence(st, nid, init)
    am = AmConfig(cfg.registry(), cfg.verifier(), cfg.golden_table(), args.place)
    ev, trace = run_avm(t, init, am, st, args.seed)
    if args.golden_out:
        table = record_golden(t, args.place, ev)
        entries = tuple(GoldenEntry(*k, v) for k, v in sorted(table.items()))
        save(GoldenTable(entries), args.golden_out)
    record = RunRecord(t, args.place, args.seed, ev, trace, st)
    names = cfg.symbols()
    lines = ["trace:"] + [show_event(v, names) for v in trace] + ["evidence:"] + show_evidence(ev, names=names)
    text = "\n".join(lines)
    _emit(args, record, text if args.out else None)
    return 0


def cmd_appraise(args) -> int:
    cfg = _config(args)
    t = _read_phrase(args, cfg)
    record = decode(Path(args.run).read_bytes(), "run")
    if record.phrase != t:
        raise CliError("the run record was produced by a different phrase")
    golden = cfg.golden_table()
    if args.golden:
        golden.update(decode(Path(args.golden).read_bytes(), "goldentable").table())
    am = AmConfig(cfg.registry(), cfg.verifier(), golden, record.place)
    result = appraise(t, record.place, record.evidence, am, record.state)
    _emit(args, result, result.render())
    return 0 if result.passed else 1


def cmd_check(args) -> int:
    start = time.perf_counter()
    report = run_suite(args.count, args.depth, args.seed, args.places, args.schedules)
    elapsed = time.perf_counter() - start
    lines = [
        f"phrases: {report.count}  depth <= {report.depth}  seed {report.seed}",
        f"checks run: {report.checks_run}  failures: {len(report.failures)}  ({elapsed:.1f}s)",
    ]
    for r in report.failures[:10]:
        for c in r.failures():
            lines.append(f"  FAIL {c.name} seed={r.seed} place={r.place}: {print_phrase(r.phrase)} {c.detail}")
    _emit(args, report, "\n".join(lines))
    return 0 if report.ok else 1


def demo_lines(cfg: Config, seed: int) -> tuple[list[str], bool]:
    """Stage-by-stage report of the layered scenario and whether it went as expected."""
    run = scenario.run_scenario(cfg, seed)
    names = cfg.symbols()
    out = ["== phrase", print_phrase(run.phrase, names), ""]
    nid = max(run.state.nonces)
    out += ["== nonce", f"issued nonce {nid}: {run.state.nonces[nid].hex()}", ""]
    out += ["== golden measurements (reference run)"]
    out += [f"{names.name_of(a)} place {p} target {t}: {_short(b)}" for (a, p, t), b in sorted(run.golden.items())]
    out += ["", f"== trace ({len(run.trace)} events)"] + [show_event(v, names) for v in run.trace]
    out += ["", "== evidence"] + show_evidence(run.evidence, names=names)
    out += ["", "== appraisal", run.result.render()]
    for case in run.tampered:
        out += ["", f"== tamper: {case.name}", f"verdict: {case.result.verdict}"]
        out += [f"  FAIL {f.check:<17} {f.path}" for f in case.result.failures()]
        out += [f"detected at {case.path}: {'yes' if case.caught else 'NO'}"]
    return out, run.result.passed and all(c.caught for c in run.tampered)


def cmd_demo(args) -> int:
    cfg = _config(args)
    lines, ok = demo_lines(cfg, args.seed)
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return 0 if ok else 1


# --- argument parsing ----------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--place", type=int, default=0, help="the AM's own place (default 0)")
    common.add_argument("--seed", type=int, default=0, help="scheduler and nonce seed")
    common.add_argument("--provider", choices=("abstract", "real"), help="override the config's provider mode")
    common.add_argument("--config", help="config file in canonical encoding")
    common.add_argument("--out", help="write the canonical encoding here")

    def phrase_args(p):
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("file", nargs="?", help=".copland source, .json phrase, or - for stdin")
        src.add_argument("-e", "--expr", help="phrase given inline")

    ap = argparse.ArgumentParser(prog="copland", description="Copland attestation toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common], help="phrase source to canonical AST")
    phrase_args(p)
    p.add_argument("--format", choices=("json", "text", "tree"), default="json")
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("annotate", parents=[common], help="assign event ids")
    phrase_args(p)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--format", choices=("json", "tree"), default="json")
    p.set_defaults(fn=cmd_annotate)

    p = sub.add_parser("events", parents=[common], help="Event System and its ordered pairs")
    phrase_args(p)
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.set_defaults(fn=cmd_events)

    p = sub.add_parser("run", parents=[common], help="execute a phrase on the CVM")
    phrase_args(p)
    p.add_argument("--nonce", action="store_true", help="prepend a fresh nonce to the initial evidence")
    p.add_argument("--evidence", help="initial evidence file")
    p.add_argument("--golden-out", help="record golden measurements from this run")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("appraise", parents=[common], help="appraise a run record")
    phrase_args(p)
    p.add_argument("run", help="run record written by `run --out`")
    p.add_argument("--golden", help="golden table written by `run --golden-out`")
    p.set_defaults(fn=cmd_appraise)

    p = sub.add_parser("check", parents=[common], help="conformance suite")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--places", type=int, default=3)
    p.add_argument("--schedules", type=int, default=3, help="scheduler seeds per parallel phrase")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("demo", parents=[common], help="layered virus-checking scenario end to end")
    p.set_defaults(fn=cmd_demo)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, CvmError, CliError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
