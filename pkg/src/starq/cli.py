"""Command-line entry point: ``starq run | converge | dump-field``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from .grid import GridSpec, dump_field, sample
from .harness import (
    SUITES,
    ScenarioConfig,
    UsageError,
    compare_golden,
    convergence_study,
    load_config,
    parse_grid,
    run_scenario,
)
from .lie import AlgebraElement
from .orbit import gaussian_panel
from .star_exp import star_exp

EXIT_FAIL = 1
EXIT_USAGE = 2


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI scenario file")
    common.add_argument("--suite", choices=SUITES)
    common.add_argument("--theta", help="comma-separated theta list, e.g. 0.1,0.5,1")
    common.add_argument("--grid", help="grid size NxM (a-nodes x l-nodes)")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--golden", type=Path, help="stored report.json to compare against")

    p = argparse.ArgumentParser(prog="starq", description="Invariant star-product verification runner")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run a verification suite")
    c = sub.add_parser("converge", parents=[common], help="convergence study")
    c.add_argument("--levels", type=int, default=3)
    d = sub.add_parser("dump-field", parents=[common], help="write a sampled field as CSV")
    d.add_argument("--field", default="panel:0",
                   help="panel:N for a panel Gaussian, or star-exp:alpha,beta,gamma,t")
    return p


def build_config(args: argparse.Namespace) -> ScenarioConfig:
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as e:
            raise UsageError(f"cannot read config: {e}") from None
        cfg = load_config(text, str(args.config))
    else:
        cfg = ScenarioConfig()
    over = {}
    if args.suite:
        over["suite"] = args.suite
    if args.theta is not None:
        try:
            over["theta_list"] = tuple(float(x) for x in args.theta.split(",") if x.strip())
        except ValueError:
            raise UsageError(f"--theta: not a number list: {args.theta!r}") from None
    if args.grid:
        na, nl = parse_grid(args.grid)
        try:
            over["grid"] = GridSpec(cfg.grid.a_window, cfg.grid.l_window, na, nl)
        except ValueError as e:
            raise UsageError(f"--grid: {e}") from None
    if args.seed is not None:
        over["seed"] = args.seed
    return replace(cfg, **over) if over else cfg


def _dump(args: argparse.Namespace, cfg: ScenarioConfig) -> int:
    kind, _, spec = args.field.partition(":")
    if kind == "panel":
        try:
            f = gaussian_panel()[int(spec or 0)]
        except (ValueError, IndexError):
            raise UsageError(f"--field: no panel member {spec!r}") from None
    elif kind == "star-exp":
        try:
            al, be, ga, t = (float(x) for x in spec.split(","))
        except ValueError:
            raise UsageError("--field star-exp:alpha,beta,gamma,t") from None
        f = star_exp(AlgebraElement(al, be, ga), t, cfg.make_profile(cfg.theta_list[0])).as_field()
    else:
        raise UsageError(f"--field: unknown kind {kind!r}")
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / f"field_{kind}.csv"
    dump_field(sample(f, cfg.grid), path)
    print(path)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        if args.command == "dump-field":
            return _dump(args, cfg)
        if args.command == "converge":
            report = convergence_study(cfg, args.levels)
        else:
            report = run_scenario(cfg)
    except UsageError as e:
        print(f"starq: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    pj, _ = report.write(args.out)
    for r in report.records:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name} [{r.tag}] value={r.value:.3e} "
              f"tol={r.tolerance:.1e} ({r.comparison})")
    status = 0 if report.passed else EXIT_FAIL
    if args.golden is not None:
        try:
            golden = json.loads(args.golden.read_text())
        except (OSError, json.JSONDecodeError) as e:
            print(f"starq: usage error: cannot read golden report: {e}", file=sys.stderr)
            return EXIT_USAGE
        diffs = compare_golden(report.to_dict(), golden)
        for d in diffs:
            print(f"GOLDEN {d}")
        if diffs:
            status = EXIT_FAIL
    print(f"report: {pj}")
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
