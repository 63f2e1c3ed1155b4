"""Two-qubit density-matrix algebra for buffered EPR pairs.

A pair state is a 4x4 complex matrix in the basis |00>, |01>, |10>, |11>,
with the sender's half as the first tensor factor.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "Half",
    "NoiseParams",
    "PERFECT",
    "BellOutcome",
    "QubitPairState",
    "make_bell_pair",
    "apply_memory_noise",
    "damping_probabilities",
    "superdense_encode",
    "bell_probabilities",
    "bell_measure_sample",
    "classical_encode_measure",
    "fidelity_to_phi_plus",
    "aged_decode_table",
    "sample_cdf",
]

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# Rows: Phi+, Phi-, Psi+, Psi-.
_BELL = np.array(
    [[1, 0, 0, 1], [1, 0, 0, -1], [0, 1, 1, 0], [0, 1, -1, 0]], dtype=complex
) / math.sqrt(2)

# 00 -> I, 01 -> X, 10 -> Z, 11 -> XZ on the sender half.
_ENCODERS = (
    np.kron(_I2, _I2),
    np.kron(_X, _I2),
    np.kron(_Z, _I2),
    np.kron(_X @ _Z, _I2),
)


class Half(enum.IntEnum):
    SENDER = 0
    RECEIVER = 1


class BellOutcome(enum.IntEnum):
    """Bell-basis outcome; the value indexes :func:`bell_probabilities`."""

    PHI_PLUS = 0
    PHI_MINUS = 1
    PSI_PLUS = 2
    PSI_MINUS = 3

    @property
    def symbol(self) -> int:
        """The 2-bit symbol (as an int in 0..3) this outcome decodes to."""
        return _OUTCOME_TO_SYMBOL[self]

    @classmethod
    def for_symbol(cls, symbol: int) -> "BellOutcome":
        return _SYMBOL_TO_OUTCOME[symbol]


_SYMBOL_TO_OUTCOME = {
    0b00: BellOutcome.PHI_PLUS,
    0b01: BellOutcome.PSI_PLUS,
    0b10: BellOutcome.PHI_MINUS,
    0b11: BellOutcome.PSI_MINUS,
}
_OUTCOME_TO_SYMBOL = {v: k for k, v in _SYMBOL_TO_OUTCOME.items()}
# outcome index -> symbol, for vectorised decoding
DECODE = np.array([_OUTCOME_TO_SYMBOL[BellOutcome(i)] for i in range(4)])


@dataclass(frozen=True)
class NoiseParams:
    """Memory coherence times in ns. ``perfect`` disables decoherence."""

    t1: float = math.inf
    t2: float = math.inf
    perfect: bool = False

    def __post_init__(self):
        if self.perfect:
            return
        if not (self.t1 > 0 and self.t2 > 0):
            raise ValueError(f"T1 and T2 must be positive, got T1={self.t1}, T2={self.t2}")
        if self.t2 > 2 * self.t1:
            raise ValueError(
                f"T2 must not exceed 2*T1 (got T1={self.t1}, T2={self.t2})"
            )

    @classmethod
    def perfect_memory(cls) -> "NoiseParams":
        return cls(perfect=True)

    @property
    def label(self) -> str:
        if self.perfect:
            return "perfect"
        return f"T1={self.t1:g}ns,T2={self.t2:g}ns"


PERFECT = NoiseParams.perfect_memory()


class QubitPairState:
    """Density matrix of one EPR pair (sender half (x) receiver half)."""

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        m = np.asarray(matrix, dtype=complex)
        if m.shape != (4, 4):
            raise ValueError(f"pair state must be 4x4, got {m.shape}")
        self.matrix = m

    def __repr__(self):
        return f"QubitPairState(fidelity={fidelity_to_phi_plus(self):.6f})"

    def check(self, atol: float = 1e-12, psd_tol: float = 1e-10) -> None:
        """Raise ``ValueError`` if the matrix is not a valid density matrix."""
        m = self.matrix
        if np.max(np.abs(m - m.conj().T)) > atol:
            raise ValueError("state is not Hermitian")
        if abs(np.trace(m) - 1) > atol:
            raise ValueError(f"state trace is {np.trace(m).real!r}, not 1")
        if np.linalg.eigvalsh(m).min() < -psd_tol:
            raise ValueError("state is not positive semidefinite")

    @classmethod
    def maximally_mixed(cls) -> "QubitPairState":
        return cls(np.eye(4) / 4)

    @classmethod
    def from_ket(cls, ket) -> "QubitPairState":
        v = np.asarray(ket, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))


def make_bell_pair() -> QubitPairState:
    """Return |Phi+><Phi+|."""
    return QubitPairState(np.outer(_BELL[0], _BELL[0].conj()))


def damping_probabilities(dt: float, params: NoiseParams) -> tuple[float, float]:
    """Return (p1, p2): amplitude-damping and dephasing probabilities after ``dt`` ns."""
    if dt < 0:
        raise ValueError(f"dt must be non-negative, got {dt}")
    if params.perfect or dt == 0:
        return 0.0, 0.0
    p1 = -math.expm1(-dt / params.t1)
    p2 = 0.5 * (1.0 - math.exp(-dt / params.t2 + dt / (2.0 * params.t1)))
    return p1, p2


def apply_memory_noise(
    state: QubitPairState, half: Half, dt: float, params: NoiseParams
) -> QubitPairState:
    """Decohere one half of the pair for ``dt`` ns of storage.

    Amplitude damping with Kraus operators E0 = |0><0| + sqrt(1-p1)|1><1|,
    E1 = sqrt(p1)|0><1| and p1 = 1 - exp(-dt/T1), then dephasing
    rho -> (1 - p2) rho + p2 Z rho Z with p2 = (1 - exp(-dt/T2) exp(dt/2T1)) / 2.
    The other half is left untouched.
    """
    p1, p2 = damping_probabilities(dt, params)
    if p1 == 0.0 and p2 == 0.0:
        return state
    # t[a, b, a', b']: a/a' index the sender half, b/b' the receiver half
    t = state.matrix.reshape(2, 2, 2, 2)
    if half == Half.RECEIVER:
        t = t.transpose(1, 0, 3, 2)
    coherence = math.sqrt(1.0 - p1) * (1.0 - 2.0 * p2)
    out = np.empty_like(t)
    out[0, :, 0, :] = t[0, :, 0, :] + p1 * t[1, :, 1, :]
    out[1, :, 1, :] = (1.0 - p1) * t[1, :, 1, :]
    out[0, :, 1, :] = coherence * t[0, :, 1, :]
    out[1, :, 0, :] = coherence * t[1, :, 0, :]
    if half == Half.RECEIVER:
        out = out.transpose(1, 0, 3, 2)
    return QubitPairState(out.reshape(4, 4))


def superdense_encode(state: QubitPairState, bits: int) -> QubitPairState:
    """Apply the Pauli for 2-bit symbol ``bits`` (0..3) to the sender half."""
    u = _ENCODERS[bits]
    return QubitPairState(u @ state.matrix @ u.conj().T)


def bell_probabilities(state: QubitPairState) -> np.ndarray:
    """Return (p_Phi+, p_Phi-, p_Psi+, p_Psi-)."""
    m = state.matrix
    return np.einsum("ki,ij,kj->k", _BELL.conj(), m, _BELL).real


def _sampling_weights(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, 1.0)
    return p / p.sum()


def bell_measure_sample(state: QubitPairState, rng: np.random.Generator) -> BellOutcome:
    """Sample a Bell outcome with one uniform draw (inverse CDF)."""
    cdf = np.cumsum(_sampling_weights(bell_probabilities(state)))
    cdf[-1] = 1.0
    return BellOutcome(sample_cdf(cdf, rng.random()))


def sample_cdf(cdf, u: float) -> int:
    """Index of the first cumulative weight strictly above ``u``."""
    for k in range(3):
        if u < cdf[k]:
            return k
    return 3


def classical_encode_measure(bit: int, rng: np.random.Generator | None = None) -> int:
    """Send one bit as |0> or |1> and measure in Z.

    The channel is lossless and noise-free, so this is the identity; ``rng``
    is accepted for signature symmetry with the assisted path.
    """
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    amplitudes = (0.0, 1.0) if bit else (1.0, 0.0)
    return 0 if amplitudes[0] ** 2 > 0.5 else 1


def fidelity_to_phi_plus(state: QubitPairState) -> float:
    v = _BELL[0]
    return float((v.conj() @ state.matrix @ v).real)


@lru_cache(maxsize=65536)
def aged_decode_table(age: float, params: NoiseParams) -> np.ndarray:
    """Cumulative decode distribution for a fresh pair stored ``age`` ns on both halves.

    Row ``s`` holds the cumulative Bell-outcome probabilities after encoding
    symbol ``s``. The simulators sample from this instead of rebuilding the
    same 4x4 states for every consumed pair.
    """
    rho = make_bell_pair()
    rho = apply_memory_noise(rho, Half.SENDER, age, params)
    rho = apply_memory_noise(rho, Half.RECEIVER, age, params)
    table = np.empty((4, 4))
    for s in range(4):
        table[s] = np.cumsum(_sampling_weights(bell_probabilities(superdense_encode(rho, s))))
    table[:, -1] = 1.0
    table.setflags(write=False)
    return table
