# %% [markdown]
# # Which stored pair to spend
#
# At low load the memory fills up and then sits. FIFO spends the oldest,
# most decayed pair; FILO the newest. Entanglement replacing keeps the store
# fresh by evicting the oldest pair whenever a new one arrives.

# %%
from gewisim.buffers import Consume, EntanglementBuffer, EprRecord, Overflow
from gewisim.link import LinkConfig, run_link
from gewisim.qcore import NoiseParams

buf = EntanglementBuffer(2, Overflow.REPLACE_OLDEST, Consume.FILO)
for i in range(3):
    print("store", i, "->", buf.store(EprRecord(i, 10.0 * i)).name, buf.ids())
print("take ->", buf.take().id)

# %%
noise = NoiseParams(1100, 1000)
policies = {
    "FIFO": dict(consume=Consume.FIFO),
    "FILO": dict(consume=Consume.FILO),
    "FILO + replacing": dict(consume=Consume.FILO, overflow=Overflow.REPLACE_OLDEST),
}
print(f"{'r':>4}" + "".join(f"{name:>18}" for name in policies))
for r in (0.05, 0.1, 0.2, 0.3, 0.5, 0.8):
    row = [run_link(LinkConfig(arrival_prob=r, noise=noise, total_ticks=30_000, **kw), 4).metrics.message_error_rate
           for kw in policies.values()]
    print(f"{r:4.2f}" + "".join(f"{e:18.3f}" for e in row))

# %% [markdown]
# A small memory behaves like replacement: with E=10 the pairs never get old.

# %%
for e in (10, 200):
    m = run_link(LinkConfig(arrival_prob=0.2, noise=noise, ebuf_capacity=e, total_ticks=30_000), 4).metrics
    print(f"E={e:<4} error {m.message_error_rate:.3f} throughput {m.throughput:.3f}")
