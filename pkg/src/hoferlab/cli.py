"""Command line entry point: ``hoferlab run --scenario <id> ...``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .scenarios import DESCRIPTIONS, REGISTRY, ScenarioConfig, ScenarioError, run_scenario

OPTIONS = {
    "n": int, "k": int, "s": float, "gap": float, "amplitude": float, "mesh": int,
    "tsamples": int, "steps": int, "budget": int, "seed": int,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hoferlab", description="Hofer length and criticality of exact Lagrangian paths")
    sub = parser.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario and write report.json, length.csv, probes.csv")
    r.add_argument("--scenario", choices=sorted(REGISTRY))
    r.add_argument("--list", action="store_true", help="list registered scenarios and exit")
    r.add_argument("--config", type=Path, help="flat JSON config; flags override its entries")
    r.add_argument("--out", type=Path, help="output directory (default: print summary only)")
    for name, typ in OPTIONS.items():
        r.add_argument(f"--{name}", type=typ)
    return parser


def _config(args) -> ScenarioConfig:
    data = {}
    if args.config is not None:
        data = json.loads(args.config.read_text())
        if not isinstance(data, dict):
            raise ScenarioError("config file must hold a JSON object")
    for name in OPTIONS:
        value = getattr(args, name)
        if value is not None:
            data[name] = value
    if args.scenario is not None:
        data["scenario"] = args.scenario
    if args.out is not None:
        data["out"] = str(args.out)
    return ScenarioConfig.from_dict(data)


def write_outputs(report, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json() + "\n")
    (out / "length.csv").write_text(report.length.to_csv())
    (out / "probes.csv").write_text(report.probes_csv())
    (out / "candidates.csv").write_text(report.candidates_csv())


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    if args.list:
        for name in REGISTRY:
            print(f"{name:22s} {DESCRIPTIONS[name]}")
        return 0
    try:
        cfg = _config(args)
        report = run_scenario(cfg)
    except (ScenarioError, ValueError, OSError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not report.checks_ok:
        failed = [k for k, v in report.checks.items() if not v["ok"]]
        print(f"error: self-checks failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    if cfg.out is not None:
        write_outputs(report, Path(cfg.out))
    crit = report.criticality
    print(f"{cfg.scenario}: length {report.length.total:.6g}, verdict {crit.verdict} ({crit.reason})")
    return 2 if crit.verdict == "inconclusive" else 0


def main() -> None:
    sys.exit(run_cli())
