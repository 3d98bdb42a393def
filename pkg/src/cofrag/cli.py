"""Command-line entry point: ``cofrag run | check | info``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .checks import run_checks
from .config import OVERRIDE_KEYS, PRESETS, build_problem, load_config, stamp
from .errors import CofragError
from .evolution import run
from .output import snapshot_name, write_diagnostics, write_snapshot

logger = logging.getLogger("cofrag")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=sorted(PRESETS))
    src.add_argument("--config", help="key=value config file")
    common.add_argument("--nx", type=int)
    common.add_argument("--ny", type=int)
    common.add_argument("--nsize", type=int)
    common.add_argument("--dt", type=float)
    common.add_argument("--t-end", type=float)
    common.add_argument("--steady-tol", type=float)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="cofrag", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="integrate a preset or config file")
    r.add_argument("--out", required=True, help="output directory")
    c = sub.add_parser("check", help="randomized invariant self-checks")
    c.add_argument("--seed", type=int, default=0)
    sub.add_parser("info", parents=[common], help="print the resolved manifest")
    return p


def _manifest(args):
    source = args.config or args.preset
    if source is None:
        raise CofragError("one of --preset or --config is required")
    overrides = {name: getattr(args, name) for name in OVERRIDE_KEYS}
    return load_config(source, overrides)


def _cmd_run(args) -> int:
    out = Path(args.out)
    manifest = _manifest(args)
    out.mkdir(parents=True, exist_ok=True)
    manifest = stamp(manifest, str(out))
    (out / "manifest.cfg").write_text(manifest.to_text())
    problem = build_problem(manifest)
    kinds = manifest.get("output", "snapshot_kinds")
    t0 = time.perf_counter()
    result = run(problem.initial, problem.config, problem.tables, problem.reference)
    logger.info("%d steps in %.1fs", result.steps, time.perf_counter() - t0)
    write_diagnostics(result.records, out / "diagnostics.csv")
    for requested, _, state in result.snapshots:
        for kind in kinds:
            write_snapshot(state, kind, out / snapshot_name(kind, requested))
    for kind in kinds:
        write_snapshot(result.state, kind, out / f"{kind}_final.csv")
    status = "steady" if result.converged else "t_end reached"
    print(f"{status} after {result.steps} steps (t={result.steps * problem.config.dt:.6g}); wrote {out}")
    return 0


def _cmd_check(args) -> int:
    results = run_checks(args.seed)
    for res in results:
        print(f"{'PASS' if res.passed else 'FAIL'}  {res.name}: {res.detail}")
    return 0 if all(r.passed for r in results) else 1


def _cmd_info(args) -> int:
    print(_manifest(args).to_text(), end="")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": _cmd_run, "check": _cmd_check, "info": _cmd_info}[args.command]
    try:
        return handler(args)
    except (CofragError, OSError) as exc:
        print(f"cofrag: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
