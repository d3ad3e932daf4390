"""Command-line front end: ``synth``, ``tables``, ``enumerate`` and ``verify``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from .batch import all_functions, run_batch, sample_functions, summarize, write_report
from .expr import ONE, ZERO, cost_of, maj, tt_bits, var
from .oracle import SearchBound, verify_optimal, within_bound
from .synth import SynthesisError, SynthResult, Synthesizer
from .tables import TableFormatError, build_tables, get_tables, load_tables, save_tables, table_path
from .truth_table import InputDomainError, TruthTable, check_n

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3

log = logging.getLogger("majsynth")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    n: int
    input_format: str = "bin"
    tables: str | None = None
    output: str = "expr"
    jobs: int = 1
    sample: int | None = None
    seed: int | None = None
    report: str | None = None
    greedy_budget: int | None = None

    def __post_init__(self):
        check_n(self.n)
        if self.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        if self.sample is not None and self.sample < 1:
            raise UsageError("--sample must be positive")

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def parse_tt(text: str, n: int, fmt: str) -> TruthTable:
    if fmt == "hex":
        return TruthTable.from_hex(text, n)
    return TruthTable.from_string(text, n)


def _synthesizer(cfg: RunConfig) -> Synthesizer:
    if cfg.tables is None:
        return Synthesizer(greedy_x1_budget=cfg.greedy_budget)
    explicit = load_tables(cfg.tables, cfg.n)

    def provider(k):
        return explicit if k == cfg.n else get_tables(k)

    return Synthesizer(provider, greedy_x1_budget=cfg.greedy_budget)


def _base_config(args, **extra) -> RunConfig:
    return RunConfig(
        command=args.command,
        n=args.n,
        input_format=getattr(args, "format", "bin"),
        tables=getattr(args, "tables", None),
        output=getattr(args, "output", "expr"),
        jobs=getattr(args, "jobs", 1),
        greedy_budget=getattr(args, "greedy_budget", None),
        **extra,
    )


def cmd_synth(args) -> int:
    cfg = _base_config(args)
    f = parse_tt(args.tt, cfg.n, cfg.input_format)
    result = _synthesizer(cfg).synthesize(f)
    if cfg.output == "json":
        row = {
            "tt": str(f),
            "expr": str(result.expr),
            "cost": list(result.cost),
            "method": result.method,
            "detail": result.detail,
        }
        print(json.dumps(row, separators=(",", ":")))
    else:
        print(result.expr)
        print(f"cost {result.cost}")
        print(f"method {result.method}" + (f" ({result.detail})" if result.detail else ""))
    return EXIT_OK


def cmd_tables(args) -> int:
    check_n(args.n)
    tables = build_tables(args.n)
    out = Path(args.out) if args.out else table_path(args.n)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_tables(tables, out)
    print(f"primitives={len(tables.primitives)} m2={len(tables.m2)}")
    log.info("wrote %s", out)
    return EXIT_OK


def _read_tt_file(path: str, n: int, fmt: str) -> list[TruthTable]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(parse_tt(line, n, fmt))
    return out


def _progress(stream):
    def report(done, total):
        if done == total or done % 4096 == 0:
            print(f"  {done}/{total}", file=stream, flush=True)

    return report


def cmd_enumerate(args) -> int:
    n = check_n(args.n)
    if args.tt_file:
        cfg = _base_config(args, report=args.report)
        functions = _read_tt_file(args.tt_file, n, cfg.input_format)
        source = {"tt_file": args.tt_file}
    elif args.sample is not None:
        if args.seed is None:
            raise UsageError("--sample needs --seed")
        cfg = _base_config(args, sample=args.sample, seed=args.seed, report=args.report)
        functions = sample_functions(n, args.sample, args.seed)
        source = {}
    else:
        if n >= 5:
            raise UsageError("n=5 needs --sample K --seed S or --tt-file")
        cfg = _base_config(args, report=args.report)
        functions = all_functions(n)
        source = {}
    progress = _progress(sys.stderr) if args.progress else None
    records = run_batch(functions, cfg.jobs, progress, _synthesizer(cfg))
    summary = summarize(n, records)
    if cfg.report:
        header = {k: v for k, v in cfg.as_dict().items() if k != "report"}
        write_report(cfg.report, {**header, **source}, records, summary)
    elif cfg.output == "json":
        for rec in records:
            print(rec.as_json())
    print(summary.as_json() if cfg.output == "json" and not cfg.report else _summary_text(summary))
    return EXIT_OK if summary.verified == summary.total else EXIT_FAILED


def _summary_text(summary) -> str:
    lines = [
        f"verified {summary.verified}/{summary.total}",
        "depth " + " ".join(f"{k}:{v}" for k, v in summary.depth_histogram().items()),
    ]
    for method, count in sorted(summary.methods.items()):
        lines.append(f"method {method} {count}")
    return "\n".join(lines)


def corrupt(result: SynthResult) -> SynthResult:
    """An equivalent but needlessly larger expression, for negative controls."""
    e, x = result.expr, var(0)
    bigger = maj(e, maj(e, x, ZERO), maj(e, x, ONE))
    return SynthResult(bigger, cost_of(bigger), result.method, "corrupted")


def cmd_verify(args) -> int:
    cfg = _base_config(args)
    bound = SearchBound(cfg.n, max_depth=args.bound_depth)
    functions = within_bound(bound)
    synth = _synthesizer(cfg)
    results = []
    for f in functions:
        r = synth.synthesize(f)
        if tt_bits(r.expr, f.n) != f.bits:
            print(f"unsound result for {f}: {r.expr}")
            return EXIT_FAILED
        results.append(r)
    if args.inject_corruption:
        idx = next(i for i, r in enumerate(results) if r.expr.is_gate)
        results[idx] = corrupt(results[idx])
    report = verify_optimal(results, bound)
    for m in report.mismatches[:20]:
        print(f"mismatch {m.tt}: {m.expr} cost {m.cost} optimum {m.optimum}")
    print(report.summary())
    return EXIT_OK if report.ok else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="majsynth", description="Majority expression synthesis from truth tables.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, tt_format=True):
        p.add_argument("--n", type=int, required=True, help="number of input variables (1-5)")
        p.add_argument("--tables", help="LUT file to load instead of the cache")
        if tt_format:
            p.add_argument("--format", choices=("bin", "hex"), default="bin", help="truth table notation")
        p.add_argument("--greedy-budget", type=int, help="cap on X1 candidates tried by the n=5 greedy search")

    p = sub.add_parser("synth", help="synthesize one truth table")
    common(p)
    p.add_argument("--tt", required=True, help="truth table, leftmost character is minterm 0")
    p.add_argument("--output", choices=("expr", "json"), default="expr")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("tables", help="generate and store the lookup tables")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", help="output path (default: the cache directory)")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("enumerate", help="synthesize every function, or a seeded sample")
    common(p)
    p.add_argument("--sample", type=int, help="number of distinct functions to draw")
    p.add_argument("--seed", type=int, help="seed for --sample")
    p.add_argument("--tt-file", help="file with one truth table per line")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--report", help="write a JSON-lines report here")
    p.add_argument("--output", choices=("expr", "json"), default="expr")
    p.add_argument("--progress", action="store_true", help="print progress to stderr")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("verify", help="compare synthesized costs with exhaustive search")
    common(p, tt_format=False)
    p.add_argument("--bound-depth", type=int, default=2, help="search depth of the exhaustive baseline")
    p.add_argument("--inject-corruption", action="store_true", help="negative control: spoil one result")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (UsageError, InputDomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, TableFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SynthesisError as exc:
        print(f"synthesis failed: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
