# %% [markdown]
# # Storing half of an EPR pair
#
# A Bell pair sitting in quantum memory decays in two ways: amplitude
# damping (T1) pulls each qubit toward |0>, and dephasing (T2) scrambles the
# relative phase. Here we watch what that does to superdense decoding.

# %%
import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from gewisim.qcore import (
    Half,
    NoiseParams,
    aged_decode_table,
    apply_memory_noise,
    bell_probabilities,
    fidelity_to_phi_plus,
    make_bell_pair,
)

pair = make_bell_pair()
print("fresh pair Bell probabilities:", bell_probabilities(pair).round(6))

# %% [markdown]
# Age both halves by the same storage time (the receiver's half waits in
# memory exactly as long as the sender's) and track the fidelity to Phi+.

# %%
ages = np.linspace(0, 3000, 121)
presets = {"11/10 ns": NoiseParams(11, 10), "110/100 ns": NoiseParams(110, 100),
           "1100/1000 ns": NoiseParams(1100, 1000)}

fig, (ax_f, ax_s) = plt.subplots(1, 2, figsize=(10, 4))
for label, params in presets.items():
    fid, success = [], []
    for age in ages:
        rho = apply_memory_noise(pair, Half.SENDER, age, params)
        rho = apply_memory_noise(rho, Half.RECEIVER, age, params)
        fid.append(fidelity_to_phi_plus(rho))
        # probability a random 4-bit message (two symbols) decodes correctly
        table = aged_decode_table(float(age), params)
        per_symbol = np.mean([np.diff(np.r_[0.0, table[s]])[k] for s, k in ((0, 0), (1, 2), (2, 1), (3, 3))])
        success.append(per_symbol ** 2)
    ax_f.plot(ages, fid, label=label)
    ax_s.plot(ages, 1 - np.array(success), label=label)
ax_f.set(xlabel="storage time [ns]", ylabel="fidelity to Phi+")
ax_s.set(xlabel="storage time [ns]", ylabel="4-bit message error")
ax_s.axhline(0.9375, color="grey", linestyle=":", label="uniform random decoding")
ax_s.legend(fontsize=8)
fig.tight_layout()
fig.savefig("memory_noise.png", dpi=120)

# %% [markdown]
# Long storage does not produce the maximally mixed state: both qubits relax
# to |00>, which still distinguishes Phi from Psi. Decoding therefore keeps
# one of the two bits, and the message error saturates near 0.75.

# %%
rho = make_bell_pair()
for half in Half:
    rho = apply_memory_noise(rho, half, 1e5, presets["11/10 ns"])
print("after a very long wait:", bell_probabilities(rho).round(6))
print("saturated 4-bit error:", 1 - 0.5 ** 2)
