#!/usr/bin/env python3
"""Regenerate the checked-in config/fixture/scenario files from code truth."""

import json
from pathlib import Path

from hybridsail.calibration import fixture_to_csv
from hybridsail.controller import TackPlan
from hybridsail.dynamics import BoatConfig
from hybridsail.harness import Scenario, comparison_scenarios, scenario_to_dict

ROOT = Path(__file__).resolve().parents[1]


def main() -> None:
    configs = ROOT / "configs"
    configs.mkdir(exist_ok=True)
    for name in ("baseline", "heavy", "hybrid"):
        BoatConfig.variant(name).save(configs / f"{name}.json")
        print(f"wrote configs/{name}.json")

    data = ROOT / "data"
    data.mkdir(exist_ok=True)
    (data / "table3_pwm_time.csv").write_text(fixture_to_csv())
    (data / "table3_pwm_time_raw.csv").write_text(fixture_to_csv(raw=True))
    print("wrote data/table3_pwm_time.csv (+ raw)")

    scenarios = ROOT / "scenarios"
    scenarios.mkdir(exist_ok=True)
    for key, sc in comparison_scenarios().items():
        path = scenarios / f"{key}.json"
        path.write_text(json.dumps(scenario_to_dict(sc), indent=2) + "\n")
        print(f"wrote scenarios/{key}.json")
    teleop = Scenario(name="teleop_pool", boat_variant="hybrid", strategy="prop_assist",
                      plan=TackPlan(), heading_jitter_deg=0.0)
    (scenarios / "teleop_pool.json").write_text(
        json.dumps(scenario_to_dict(teleop), indent=2) + "\n")
    print("wrote scenarios/teleop_pool.json")


if __name__ == "__main__":
    main()
