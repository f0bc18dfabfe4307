"""figures --in <csv> --family <id> --out <dir>"""

from __future__ import annotations

import argparse
import os
import sys

from nwbfigures.render import FAMILIES, render_family


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render figure families from an nwbsim results CSV",
    )
    parser.add_argument("--in", dest="infile", required=True, help="input results CSV")
    parser.add_argument("--family", required=True, help=", ".join(sorted(FAMILIES)))
    parser.add_argument("--out", required=True, help="output directory for image files")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        os.makedirs(args.out, exist_ok=True)
        outputs = render_family(args.family, args.infile, args.out)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in outputs:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
