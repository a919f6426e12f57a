"""figkit <kind> <csv> <output-image>"""

import argparse
import sys

from .render import KINDS, FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="figkit",
                                     description="Render simulation CSVs to figures")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("csv", help="input CSV path")
    parser.add_argument("out", help="output image path (png/pdf/svg)")
    parser.add_argument("--dpi", type=int, default=150)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        info = render(FigureSpec(args.csv, args.kind, args.out,
                                 style={"dpi": args.dpi}))
    except SchemaError as exc:
        print(f"schema mismatch in {args.csv}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot render {args.csv}: {exc}", file=sys.stderr)
        return 1
    print(f"{info.kind}: wrote {info.out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
