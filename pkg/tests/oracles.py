"""Independent reference computations used by the tests.

These deliberately rebuild everything from textbook definitions (explicit
Kraus operators via np.kron, Bell vectors as kets) rather than calling the
package's closed-form channel.
"""
import math

import numpy as np

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]])
Z = np.diag([1, -1])

KET = {
    "00": np.array([1, 0, 0, 0], dtype=complex),
    "01": np.array([0, 1, 0, 0], dtype=complex),
    "10": np.array([0, 0, 1, 0], dtype=complex),
    "11": np.array([0, 0, 0, 1], dtype=complex),
}
BELL_KETS = [
    (KET["00"] + KET["11"]) / math.sqrt(2),  # Phi+
    (KET["00"] - KET["11"]) / math.sqrt(2),  # Phi-
    (KET["01"] + KET["10"]) / math.sqrt(2),  # Psi+
    (KET["01"] - KET["10"]) / math.sqrt(2),  # Psi-
]


def kraus_noise(rho, half, p1, p2):
    """Amplitude damping then dephasing on one half, by explicit Kraus sums."""
    e0 = np.array([[1, 0], [0, math.sqrt(1 - p1)]])
    e1 = np.array([[0, math.sqrt(p1)], [0, 0]])
    lift = (lambda op: np.kron(op, I2)) if half == 0 else (lambda op: np.kron(I2, op))
    rho = sum(lift(k) @ rho @ lift(k).conj().T for k in (e0, e1))
    z = lift(Z)
    return (1 - p2) * rho + p2 * z @ rho @ z


def probs(dt, t1, t2):
    p1 = 1 - math.exp(-dt / t1)
    p2 = 0.5 * (1 - math.exp(-dt / t2 + dt / (2 * t1)))
    return p1, p2


def aged_pair(dt, t1, t2):
    rho = np.outer(BELL_KETS[0], BELL_KETS[0].conj())
    p1, p2 = probs(dt, t1, t2)
    return kraus_noise(kraus_noise(rho, 0, p1, p2), 1, p1, p2)


def encode(rho, symbol):
    """Symbol bits b0 b1: b1 drives X, b0 drives Z, both on the sender half (XZ for 11)."""
    op = I2
    if symbol & 1:
        op = X @ op
    if symbol & 2:
        op = op @ Z if symbol & 1 else Z
    u = np.kron(op, I2)
    return u @ rho @ u.conj().T


def bell_probs(rho):
    return np.array([np.real(v.conj() @ rho @ v) for v in BELL_KETS])


# Bell outcome index that decodes to each symbol (inverse of the encoding above)
OUTCOME_FOR_SYMBOL = {0: 0, 1: 2, 2: 1, 3: 3}


def symbol_success(dt, t1, t2, symbol):
    return bell_probs(encode(aged_pair(dt, t1, t2), symbol))[OUTCOME_FOR_SYMBOL[symbol]]


def random_density_matrix(rng, rank=None):
    rank = rank or int(rng.integers(1, 5))
    g = rng.standard_normal((4, rank)) + 1j * rng.standard_normal((4, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho)
