"""Command-line entry: render one figure from a JSON spec file."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import FigureSpec, ManifestError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hailplots",
        description="Render a diagnostic figure from hailsim run artifacts.",
    )
    parser.add_argument("--spec", type=Path, required=True,
                        help="JSON file: {kind, inputs: {...}, output}")
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec.from_json(args.spec.read_text())
        info = render(spec)
    except (OSError, ValueError, KeyError, ManifestError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(info["output"])
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
