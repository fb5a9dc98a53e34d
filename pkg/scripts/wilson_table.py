"""Recompute the multi-task success table's 95% Wilson cells from printed percents.

Reads tests/data/multitask_ci_table.json, converts each percent back to a
count out of the per-cell trials, and prints computed vs printed intervals.
"""

import json
from pathlib import Path

from galtkit.stats import suite_mean, wilson_ci

TABLE = Path(__file__).resolve().parent.parent / "tests" / "data" / "multitask_ci_table.json"


def main() -> None:
    table = json.loads(TABLE.read_text())
    n = table["trials_per_cell"]
    cells = [c for c in table["cells"] if c["task"] != "suite-mean"]
    groups: dict = {}
    mismatches = 0
    for c in table["cells"]:
        key = (c["suite"], c["robot"], c["split"], c["camera"])
        printed = f"{c['pct']:.1f} [{c['lo']:.1f}, {c['hi']:.1f}]"
        if c["task"] == "suite-mean":
            got = suite_mean(groups[key])
        else:
            k = round(c["pct"] * n / 100)
            groups.setdefault(key, []).append((k, n))
            got = wilson_ci(k, n)
        ok = got.display() == printed
        mismatches += not ok
        label = "/".join(key[1:]) + f" {c['suite']}:{c['task']}"
        print(f"{'ok ' if ok else 'BAD'} {label:<55} {got.successes:>4}/{got.trials:<4} {got.display():<20} {printed}")
    print(f"{len(table['cells']) - mismatches}/{len(table['cells'])} cells match ({len(cells)} task cells)")


if __name__ == "__main__":
    main()
