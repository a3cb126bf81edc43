"""Command line entry point: ``lcsim run|verify|report|indices``.

Exit codes: 0 clean, 1 scenario or input error, 2 verification violations.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analytics import DEFAULT_REQUESTS, bundled_fixture, index_report, load_table
from .driver import run
from .errors import SupernetError
from .report import build_report, report_json, report_text
from .scenario import load_scenario
from .verify import verify

EXIT_OK, EXIT_ERROR, EXIT_VIOLATIONS = 0, 1, 2


def _render(report: dict, fmt: str) -> str:
    return report_json(report) if fmt == "json" else report_text(report)


def _write(out: Path, name: str, content: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(content, encoding="utf-8")
    return path


def cmd_run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    result = run(scenario, seed=args.seed)
    rendered = _render(result.report, args.format)
    if args.out:
        out = Path(args.out)
        suffix = "json" if args.format == "json" else "txt"
        _write(out, f"{scenario.name}.transcript.jsonl", result.transcript)
        _write(out, f"{scenario.name}.report.{suffix}", rendered)
    sys.stdout.write(rendered)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    verdict = verify(args.transcript)
    if args.format == "json":
        sys.stdout.write(json.dumps(verdict.to_dict(), sort_keys=True, indent=2) + "\n")
    else:
        checked = ", ".join(f"{k} {v}" for k, v in sorted(verdict.checked.items()))
        status = "clean" if verdict.clean else f"{len(verdict.violations)} violation(s)"
        sys.stdout.write(f"{args.transcript}: {status} over {verdict.heights} blocks ({checked})\n")
        for v in verdict.violations:
            sys.stdout.write(f"  {v}\n")
    return EXIT_OK if verdict.clean else EXIT_VIOLATIONS


def cmd_report(args: argparse.Namespace) -> int:
    if args.transcript:
        report = build_report(args.transcript)
    elif args.scenario:
        report = run(load_scenario(args.scenario), seed=args.seed).report
    else:
        raise SupernetError("report needs a transcript or --scenario")
    rendered = _render(report, args.format)
    if args.out:
        suffix = "json" if args.format == "json" else "txt"
        _write(Path(args.out), f"{report['scenario']}.report.{suffix}", rendered)
    sys.stdout.write(rendered)
    return EXIT_OK


def cmd_indices(args: argparse.Namespace) -> int:
    table = load_table(args.fixture or bundled_fixture())
    requests = DEFAULT_REQUESTS
    if args.scenario:
        wanted = load_scenario(args.scenario).data.get("indices") or {}
        requests = wanted.get("requests") or DEFAULT_REQUESTS
    entries = index_report(table, requests)
    if args.format == "json":
        sys.stdout.write(json.dumps(entries, sort_keys=True, indent=2) + "\n")
        return EXIT_OK
    for e in entries:
        if e["index"] == "tiva":
            shares = ", ".join(f"{k} {v}%" for k, v in e["shares"].items())
            sys.stdout.write(f"tiva {e['sector']} {e['year']}: {shares}\n")
        else:
            subject = f"{e['exporter']}->{e['partner']}" if e["index"] == "tii" else f"{e['country']} {e['sector']}"
            sys.stdout.write(f"{e['index']} {subject} {e['year']}: {e['value']} ({e['reading']})\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lcsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--out", metavar="DIR")

    p = sub.add_parser("run", help="run a scenario, write its transcript and report")
    p.add_argument("--scenario", required=True, metavar="PATH|NAME")
    p.add_argument("--seed", type=int, help="override the seed in the scenario file")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="audit a transcript")
    p.add_argument("transcript", metavar="TRANSCRIPT")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="regenerate a report from a transcript (or a fresh run)")
    p.add_argument("transcript", nargs="?", metavar="TRANSCRIPT")
    p.add_argument("--scenario", metavar="PATH|NAME")
    p.add_argument("--seed", type=int)
    common(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("indices", help="compute trade indices from a flow table")
    p.add_argument("--fixture", metavar="CSV", help="flow table (defaults to the bundled 2021 fixture)")
    p.add_argument("--scenario", metavar="PATH|NAME", help="take index requests from a scenario")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_indices)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SupernetError, OSError) as exc:
        sys.stderr.write(f"lcsim: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
