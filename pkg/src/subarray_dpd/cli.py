"""Command-line entry point: ``run``, ``validate`` and ``pattern``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from . import config as config_mod
from .exceptions import DpdError


def _parse_antennas(text: str) -> tuple:
    try:
        vals = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("antenna counts must be positive")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="subarray-dpd", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run the configured scenarios and write all outputs")
    r.add_argument("config", type=Path)
    r.add_argument("--fast", action="store_true",
                   help=f"B={config_mod.FAST_BLOCK_SIZE}, {config_mod.FAST_ITERATIONS} iterations")
    r.add_argument("--out", type=Path, default=None, help="output directory (default: config output_dir)")
    r.add_argument("--no-pattern", action="store_true", help="skip emission patterns")

    v = sub.add_parser("validate", help="check a configuration without running it")
    v.add_argument("config", type=Path)

    pt = sub.add_parser("pattern", help="emission patterns only")
    pt.add_argument("config", type=Path)
    pt.add_argument("--antennas", type=_parse_antennas, default=None, help="e.g. 16,32")
    pt.add_argument("--fast", action="store_true")
    pt.add_argument("--out", type=Path, default=None)
    return p


def _load(path: Path, fast: bool):
    cfg = config_mod.load(path)
    return cfg.fast() if fast else cfg


def cmd_validate(args) -> int:
    diags = config_mod.validate_file(args.config)
    for d in diags:
        print(d)
    if not diags:
        print(f"{args.config}: OK")
    return 1 if diags else 0


def cmd_run(args) -> int:
    from . import experiment

    cfg = _load(args.config, args.fast)
    t0 = time.perf_counter()
    result = experiment.run(cfg, patterns=False if args.no_pattern else None)
    out = args.out or Path(cfg.output_dir)
    experiment.write_outputs(result, out)
    for name, r in result.scenarios.items():
        rep = r.report
        print(f"{name:20s} EVM {rep.evm_pct:6.3f} %   ACLR {rep.aclr_lower_dbc:6.2f} / {rep.aclr_upper_dbc:6.2f} dBc")
    print(f"wrote {out} in {time.perf_counter() - t0:.1f} s")
    return 0


def cmd_pattern(args) -> int:
    from . import experiment

    cfg = _load(args.config, args.fast)
    antennas = args.antennas or tuple(cfg.pattern.antennas)
    setup = experiment.prepare(cfg, antennas)
    patterns = experiment.run_patterns(setup, antennas)
    out = args.out or Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for k, p in patterns.items():
        experiment.write_pattern(out / f"pattern_{k}.csv", p)
        print(f"pattern_{k}.csv")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": cmd_run, "validate": cmd_validate, "pattern": cmd_pattern}[args.command]
    try:
        return handler(args)
    except DpdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
