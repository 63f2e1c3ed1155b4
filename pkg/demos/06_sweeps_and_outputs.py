# %% [markdown]
# # Sweeps, CSVs and plots
#
# The harness expands a scenario file into seeded runs, aggregates them per
# sweep point and writes CSV and SVG files. The same thing is available as
# `gewisim p2p -c configs/p2p_desk.toml`.

# %%
from pathlib import Path

from gewisim.harness import emit_outputs, parse_config, run_sweep
from gewisim.harness.sweep import expand

cfg = parse_config("""
scenario = "p2p"
name = "demo sweep"
seeds_per_point = 3
master_seed = 11

[link]
total_ticks = 5000

[sweep]
arrival_probs = [0.1, 0.3, 0.5, 0.7, 0.9]
noise = ["1100/1000ns", "110/100ns"]
policies = ["filo", "filo-replace"]
""")
points = expand(cfg)
print(len(points), "points, e.g.", points[0].key, "|", points[-1].key)

# %%
result = run_sweep(cfg)
for path in emit_outputs(result, Path("sweep_demo")):
    print("wrote", path)

# %%
for agg in result.aggregates[:6]:
    print(agg["series"], agg["r"], round(agg["throughput_mean"], 3), "+-", round(agg["throughput_std"], 3))
