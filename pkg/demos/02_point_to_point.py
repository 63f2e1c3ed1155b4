# %% [markdown]
# # One GEWI link
#
# The sender polls for a 4-bit job every 10 ns. If it has one it transmits,
# superdense-coded when two stored pairs are available and bit by bit
# otherwise; if it has nothing to send it makes an EPR pair instead.

# %%
import numpy as np

from gewisim.link import LinkConfig, Mode, run_link
from gewisim.qcore import PERFECT, NoiseParams

cfg = LinkConfig(arrival_prob=0.3, noise=NoiseParams(1100, 1000), total_ticks=50_000)
res = run_link(cfg, seed=1)
m = res.metrics
print(f"offered {m.messages_offered}, dropped {m.messages_dropped}, delivered {m.messages_delivered}")
print(f"error rate {m.message_error_rate:.3f}, throughput {m.throughput:.3f} bits/tick "
      f"({m.throughput_bps / 1e6:.0f} Mb/s), assisted {m.assisted_fraction:.1%}")

# %% [markdown]
# Every consumed pair's two halves aged the same amount; FILO means that age
# is usually short.

# %%
ages = np.array([a for rec in res.trace for a, _ in rec.pair_ages])
print(f"pair age at use: median {np.median(ages):.0f} ns, 95th percentile {np.percentile(ages, 95):.0f} ns")
first = next(rec for rec in res.trace if rec.mode is Mode.ASSISTED)
print("example record:", first.bits, "->", first.decoded_bits, "pairs", first.pair_ids, "ages", first.pair_ages)

# %% [markdown]
# With perfect memory and a pre-filled buffer, superdense coding doubles the
# rate of the plain channel exactly.

# %%
plain = run_link(LinkConfig(arrival_prob=1.0, ebuf_capacity=0, total_ticks=500), 2).metrics
warm = run_link(LinkConfig(arrival_prob=1.0, ebuf_capacity=1000, noise=PERFECT, total_ticks=500,
                           warm_start=True), 2).metrics
print(f"plain {plain.throughput:.2f} bits/tick, assisted {warm.throughput:.2f} bits/tick")

# %% [markdown]
# Sweeping the arrival rate shows where buffered entanglement pays off.

# %%
for r in (0.1, 0.3, 0.5, 0.8, 1.0):
    base = run_link(LinkConfig(arrival_prob=r, ebuf_capacity=0, total_ticks=20_000), 3).metrics
    ent = run_link(cfg.with_(arrival_prob=r, total_ticks=20_000), 3).metrics
    print(f"r={r:.1f}  classical {base.throughput:.3f}  entanglement-assisted {ent.throughput:.3f} "
          f"(error {ent.message_error_rate:.3f})")
