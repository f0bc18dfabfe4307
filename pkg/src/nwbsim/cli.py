"""Command-line front end: run sweeps, summarize CSVs, emit presets."""

from __future__ import annotations

import argparse
import sys

from nwbsim import harness, metrics


def _cmd_run(args) -> int:
    cfg = harness.load_config(args.config)
    records = harness.run_sweep(cfg, jobs=args.jobs)
    metrics.write_csv(records, args.out)
    print(f"wrote {len(records)} rows to {args.out}")
    return 0


def _cmd_summarize(args) -> int:
    group_by = [c.strip() for c in args.group_by.split(",") if c.strip()]
    if not group_by:
        raise harness.ConfigError("--group-by needs at least one column")
    table = harness.summarize_csv(args.infile, group_by, machine=args.csv)
    sys.stdout.write(table)
    return 0


def _cmd_validate(args) -> int:
    cfg = harness.load_config(args.config)
    rows = harness.count_rows(cfg)
    print(f"ok: {len(harness.enumerate_cells(cfg))} cells x {cfg.seeds} seeds, {rows} rows")
    return 0


def _cmd_presets(args) -> int:
    text = harness.preset_text(args.name)
    with open(args.out, "w") as fh:
        fh.write(text)
    print(f"wrote preset '{args.name}' to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nwbsim",
        description="Discrete-event simulator for network-wide broadcast protocols",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a sweep config and write a CSV")
    p_run.add_argument("--config", required=True, help="sweep config file")
    p_run.add_argument("--out", required=True, help="output CSV path")
    p_run.add_argument(
        "--jobs",
        type=int,
        default=harness.default_jobs(),
        help=f"parallel seed runs (default from ${harness.JOBS_ENV_VAR} or 1)",
    )
    p_run.set_defaults(fn=_cmd_run)

    p_sum = sub.add_parser("summarize", help="aggregate a results CSV into a table")
    p_sum.add_argument("--in", dest="infile", required=True, help="input CSV path")
    p_sum.add_argument("--group-by", required=True, help="comma-separated CSV columns")
    p_sum.add_argument("--csv", action="store_true", help="machine-readable full-precision output")
    p_sum.set_defaults(fn=_cmd_summarize)

    p_val = sub.add_parser("validate", help="check a sweep config")
    p_val.add_argument("--config", required=True)
    p_val.set_defaults(fn=_cmd_validate)

    p_pre = sub.add_parser("presets", help="emit a canned experiment config")
    p_pre.add_argument("--name", required=True, help=", ".join(sorted(harness.PRESETS)))
    p_pre.add_argument("--out", required=True)
    p_pre.set_defaults(fn=_cmd_presets)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (harness.ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
