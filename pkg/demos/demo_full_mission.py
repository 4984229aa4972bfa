"""End-to-end mission: plan, drive, localize, merge, locate beacons.

Runs the bundled mission scenario headless (the same thing the run-scenario
command does) and prints an ASCII rendering of the merged map afterwards.

    python demos/demo_full_mission.py
"""

import json
import tempfile
from pathlib import Path

from semnav.scenario import load_scenario, run_scenario

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

out_dir = Path(tempfile.mkdtemp(prefix="semnav-demo-"))
config = load_scenario(FIXTURES / "scenario_mission.json")
print(f"running mission(s) {config.missions} with seed {config.seed} ...")
summary = run_scenario(config, out_dir)

for mission in summary["missions"]:
    rooms = mission["semantic_path"]["semantic_path"][0::2]
    print(f"  goal {mission['goal']}: {' > '.join(rooms)}  "
          f"weight {mission['semantic_path']['total_weight']}  "
          f"{mission['metric_length']:.1f} m  "
          f"{'arrived' if mission['arrived'] else 'DID NOT ARRIVE'}")
print(f"  {summary['ticks']} ticks, {summary['sim_time']:.0f} s simulated")

if "uwb" in summary and summary["uwb"].get("error_stats"):
    stats = summary["uwb"]["error_stats"]["planar"]
    print(f"  beacons located, planar error mean {stats['mean']:.3f} m "
          f"(max {stats['max']:.3f} m)")

# telemetry tail
events = [json.loads(line) for line in (out_dir / "telemetry.jsonl").read_text().splitlines()]
last_tick = [e for e in events if e["type"] == "tick"][-1]
print(f"  final estimate ({last_tick['pose_est']['x']:.2f}, {last_tick['pose_est']['y']:.2f}) "
      f"vs truth ({last_tick['pose_true']['x']:.2f}, {last_tick['pose_true']['y']:.2f})")
print(f"outputs in {out_dir}")
