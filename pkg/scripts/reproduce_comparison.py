#!/usr/bin/env python3
"""Three-boat tacking comparison (plus the propellers-off hybrid), 50 trials each.

Writes comparison.json / trials.csv / per-trial trajectory logs under out/compare.
"""

import sys

from hybridsail.cli import main

if __name__ == "__main__":
    sys.exit(main(["compare", "--trials", "50", "--seed", "5", "--out", "out/compare"]))
