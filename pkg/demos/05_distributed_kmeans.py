# %% [markdown]
# # Two parties, one k-means
#
# Both parties hold all 500 points. Each labels half of them, ships its
# labels to the other (two per stored pair, then one bit per qubit), and
# updates its centroids from what it received. Decayed pairs corrupt labels,
# and the parties' views drift apart.

# %%
from dataclasses import replace

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from gewisim.cluster import ClusterConfig, f1_score, generate_dataset, kmeans_reference, run_distributed_kmeans
from gewisim.qcore import NoiseParams

data = generate_dataset(0)
labels, centroids, iters = kmeans_reference(data.points, [(-0.5, 0), (0.5, 0)])
print(f"single-node k-means: {iters} iterations, centroids {centroids.round(3).tolist()}")
print("F1 against ground truth:", f1_score(data.truth, labels))

# %%
pairs = (0, 25, 50, 75, 100, 125)
settings = {"1100/1000 ns": NoiseParams(1100, 1000), "1 ms": NoiseParams(1e6, 1e6), "10 ms": NoiseParams(1e7, 1e7)}
fig, ax = plt.subplots(figsize=(7, 4))
ax2 = ax.twinx()
for name, noise in settings.items():
    f1, sends = [], []
    for p in pairs:
        runs = [run_distributed_kmeans(ClusterConfig(noise=noise, pairs_per_iteration=p), s) for s in range(20)]
        f1.append(np.mean([r.f1 for r in runs]))
        sends.append(np.mean([r.total_transmissions for r in runs]))
    ax.plot(pairs, f1, marker="o", label=name)
    print(name, "F1:", np.round(f1, 3).tolist())
ax2.plot(pairs, sends, color="black", linestyle="--")
ax.set(xlabel="EPR pairs per iteration", ylabel="F1 between parties")
ax2.set_ylabel("total transmissions")
ax.legend()
fig.tight_layout()
fig.savefig("distributed_kmeans.png", dpi=120)

# %% [markdown]
# Per-iteration detail for one noisy run.

# %%
res = run_distributed_kmeans(ClusterConfig(noise=settings["1 ms"], pairs_per_iteration=125), 1)
for rec in res.iterations:
    print(f"iteration {rec.iteration}: {rec.transmissions} sends, wrong labels received {rec.label_errors}, F1 {rec.f1:.3f}")
