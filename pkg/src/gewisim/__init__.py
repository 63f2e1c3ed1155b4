"""Discrete-event simulation of entanglement-buffered classical communication.

Idle ticks on a qubit channel are spent generating EPR pairs; stored pairs
decohere under a T1/T2 memory model and are later spent on superdense-coded
messages. Point-to-point links, relay networks and a two-party distributed
k-means workload are supported.
"""
from .buffers import Consume, EntanglementBuffer, EprRecord, Message, MessageBuffer, Overflow
from .cluster import ClusterConfig, f1_score, generate_dataset, run_distributed_kmeans
from .link import LinkConfig, Mode, RunMetrics, run_link
from .network import Topology, route, run_network
from .qcore import (
    PERFECT,
    BellOutcome,
    Half,
    NoiseParams,
    QubitPairState,
    apply_memory_noise,
    bell_measure_sample,
    bell_probabilities,
    fidelity_to_phi_plus,
    make_bell_pair,
    superdense_encode,
)

__version__ = "0.1.0"
