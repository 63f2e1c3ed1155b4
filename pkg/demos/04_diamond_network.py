# %% [markdown]
# # A four-node network
#
# Source s feeds sink d through relays a and b. Each node sends its next job
# on whichever outgoing link holds more pairs, and the other link keeps
# generating. Relays decode fully and re-send, so no entanglement swapping
# is needed.

# %%
from gewisim.network import Topology, route, run_network
from gewisim.qcore import NoiseParams

print("route((3, 1)) =", route((3, 1)), " route((2, 2)) =", route((2, 2)), " route((0, 5)) =", route((0, 5)))

topo = Topology.diamond(arrival_prob=0.5, noise=NoiseParams(1100, 1000), total_ticks=20_000)
res = run_network(topo, seed=3, record_busy=True)
m = res.metrics
print(f"delivered {m.messages_delivered}/{m.messages_accepted}, error {m.message_error_rate:.3f}, "
      f"throughput {m.throughput:.3f} bits/tick")
for link, modes in m.link_modes.items():
    print(f"  {link}: {modes['assisted']} assisted, {modes['plain']} plain")

# %% [markdown]
# The source never carries data on both links in the same tick.

# %%
ticks = [t for t, _ in res.busy["s"]]
print("source busy ticks:", len(ticks), "duplicates:", len(ticks) - len(set(ticks)))

# %%
for r in (0.2, 0.3, 0.5, 0.8):
    base = run_network(Topology.diamond(arrival_prob=r, ebuf_capacity=0, total_ticks=20_000), 1).metrics
    ent = run_network(Topology.diamond(arrival_prob=r, noise=NoiseParams(1100, 1000), total_ticks=20_000), 1).metrics
    print(f"r={r:.1f} classical {base.throughput:.3f}  1100/1000 ns {ent.throughput:.3f}")
