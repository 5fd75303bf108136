import numpy as np
import pytest

from znqr import AcquisitionConfig, SpinSystem
from znqr.gates import (
    OptimizationConfig,
    calibrate_pi_half,
    optimize_gate,
    target_unitaries,
)

GATE_LABELS = ("CNOT_a", "CNOT_b", "P12", "P13", "H_ab")

# Segment counts and seeds chosen once for a fast deterministic suite; any
# seed converges, these keep the five-gate synthesis around five minutes.
# Fidelity targets sit above the 0.99 floor so that readout patterns stay
# inside the 0.05 deviation budget downstream.
GATE_PROFILES = {
    "CNOT_a": dict(n_segments=6, escalation=(8,), rng_seed=1, target_fidelity=0.996),
    "CNOT_b": dict(n_segments=6, escalation=(8,), rng_seed=2, target_fidelity=0.996),
    "P12": dict(n_segments=6, escalation=(8,), rng_seed=3, target_fidelity=0.996),
    "P13": dict(n_segments=6, escalation=(8,), rng_seed=4, target_fidelity=0.996),
    "H_ab": dict(n_segments=8, escalation=(10,), rng_seed=5, target_fidelity=0.996),
}


@pytest.fixture(scope="session")
def paper_system() -> SpinSystem:
    return SpinSystem.paper_working_point()


@pytest.fixture(scope="session")
def acq() -> AcquisitionConfig:
    return AcquisitionConfig()


@pytest.fixture(scope="session")
def pi_half(paper_system, acq):
    return calibrate_pi_half(paper_system, 2 * np.pi * 15e3, acq)


@pytest.fixture(scope="session")
def optimized_gates(paper_system):
    """Optimize the five-gate set once per session (used by acceptance and CLI tests)."""
    targets = target_unitaries()
    results = {}
    for label in GATE_LABELS:
        cfg = OptimizationConfig(**GATE_PROFILES[label])
        results[label] = optimize_gate(paper_system, targets[label], cfg)
    return results
