"""Entry point: ``plot <kind> --in <csv> --out <img>``.

Exit codes: 0 success, 2 unusable input data (missing columns, empty or
malformed CSV), 4 I/O failure (unreadable input, unwritable output).
"""
import argparse
import sys

from .csvdata import PlotDataError
from .figures import KINDS, FigureSpec, render

EXIT_OK = 0
EXIT_DATA = 2
EXIT_IO = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot",
        description="Render a figure from a model CLI CSV file. Writes "
                    "both PNG and SVG next to --out.")
    parser.add_argument("kind", choices=sorted(KINDS))
    parser.add_argument("--in", dest="source", required=True,
                        metavar="CSV", help="input CSV path")
    parser.add_argument("--out", required=True, metavar="IMG",
                        help="output image path; extension optional")
    parser.add_argument("--xlabel", help="override the x axis label")
    parser.add_argument("--ylabel", help="override the y axis label")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    spec = FigureSpec(source=args.source, kind=args.kind, out=args.out,
                      xlabel=args.xlabel, ylabel=args.ylabel)
    try:
        written = render(spec)
    except PlotDataError as exc:
        print(f"plot: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"plot: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
