"""render: draw one figure from a directory of CSV artifacts.

    render --figure flux --input artifacts/ --out flux.png

Exit codes: 0 success, 1 missing or malformed artifact (message names the
path), 2 usage error.
"""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURES, ArtifactError, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="render",
        description="Render one figure from CSV artifacts.")
    ap.add_argument("--figure", required=True, choices=sorted(FIGURES),
                    help="which figure to draw")
    ap.add_argument("--input", required=True,
                    help="directory holding the CSV artifacts")
    ap.add_argument("--out", required=True,
                    help="output image path (.png or .svg)")
    ap.add_argument("--dpi", type=int, default=150,
                    help="raster resolution for .png output")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.dpi <= 0:
        print("render: --dpi must be positive", file=sys.stderr)
        return 2
    spec = FigureSpec(figure_id=args.figure, input_dir=args.input,
                      out_path=args.out, dpi=args.dpi)
    try:
        render(spec)
    except ArtifactError as err:
        print(f"render: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
