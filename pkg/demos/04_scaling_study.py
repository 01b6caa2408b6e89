"""Growth of the sup norm with n, written to demos/out/.

Produces the scaling CSV, a summary with fitted log-log slopes, and an SVG
chart comparing random and searched medians with the L2 floor.
"""
import math
from pathlib import Path

from smallball.report import svg_loglog, to_csv, to_json, write_text
from smallball.search import SCALING_COLUMNS, scaling_study, summarize_scaling

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

rows = scaling_study(3, range(2, 7), trials=5, seed=1, strategy="anneal", budget=300)
summary = summarize_scaling(rows)
write_text(out / "scaling_d3.csv", to_csv(rows, SCALING_COLUMNS))
write_text(out / "scaling_d3_summary.json", to_json(summary))

table = summary["table"]
series = {
    "median random": [(r["n"], r["median_random"]) for r in table],
    "median searched": [(r["n"], r["median_searched"]) for r in table],
    "L2 floor": [(r["n"], math.sqrt((r["n"] + 1) * (r["n"] + 2) / 2)) for r in table],
}
write_text(out / "scaling_d3.svg", svg_loglog(series, "sup norm, d=3", ylabel="||H||_inf"))

for r in table:
    print(f"n={r['n']}: median random {r['median_random']}, searched {r['median_searched']}")
print("slopes:", round(summary["slope_median_random"], 4), round(summary["slope_median_searched"], 4))
print("written to", out)
