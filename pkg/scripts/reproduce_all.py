#!/usr/bin/env python3
"""Run every bundled figure scenario and drop the CSV tables under out/.

Usage: python scripts/reproduce_all.py [out_dir]
"""

import sys
import time
from pathlib import Path

from mzinet.scenarios import FIGURES, reproduce


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out")
    for figure in FIGURES:
        start = time.monotonic()
        paths = reproduce(figure, out / figure)
        elapsed = time.monotonic() - start
        print(f"{figure}: {elapsed:.1f} s")
        for path in paths:
            print(f"  {path}")


if __name__ == "__main__":
    main()
