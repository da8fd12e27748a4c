#!/usr/bin/env python3
"""The PWM-time study end to end: exclusion recovery, fit, calibration check, sweep.

Prints the recovered exclusions and the per-degree fit table, then runs the
simulated sweep with the hand-flown protocol (the one that loses high-duty
trials to overshoot) and writes everything under out/pwm_study.
"""

import sys
from pathlib import Path

from hybridsail.calibration import (
    TABLE3_AVERAGES,
    TABLE3_TRIALS,
    recover_exclusions,
)
from hybridsail.cli import main

OUT = Path("out/pwm_study")


def show_exclusions() -> None:
    print("recovered excluded trials per duty level:")
    for pwm, row in TABLE3_TRIALS.items():
        excl = recover_exclusions(row, TABLE3_AVERAGES[pwm])
        vals = sorted(round(row[i], 2) for i in excl)
        kept = [t for i, t in enumerate(row) if i not in excl]
        mean = sum(kept) / len(kept)
        print(f"  {pwm:2d}%: excluded {vals} -> retained mean {mean:.3f} "
              f"(published {TABLE3_AVERAGES[pwm]})")


if __name__ == "__main__":
    show_exclusions()
    rc = main(["fit", "--degrees", "1:5", "--out", str(OUT)])
    rc |= main(["calibrate", "--out", str(OUT)])
    rc |= main(["sweep", "--protocol", "manual", "--trials", "12", "--out", str(OUT)])
    sys.exit(rc)
