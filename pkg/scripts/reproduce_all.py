#!/usr/bin/env python3
"""Regenerate every registered model figure into fresh run directories.

Equivalent to running `swapsim reproduce <name>` once per figure; handy
after touching anything in the physics pipeline.
"""

import argparse
import sys

from swapsim.harness.figures import available_figures, reproduce_figure


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs", help="run-directory root")
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    for name in available_figures():
        print(f"== {name}")
        for path in reproduce_figure(name, args.out, workers=args.workers):
            print(f"   {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
