"""Simulator and pulse-sequence optimizer for two-qubit QIP on a spin-3/2
nucleus under Zeeman-perturbed nuclear quadrupole resonance."""

from .operators import evolve_operator, hs_overlap, kron, spin_operators
from .spinmodel import (
    DensityMatrix,
    Frame,
    SpinSystem,
    THETA_EVEN_SPACING,
    detected_lines,
    energy_levels,
    equilibrium_deviation,
    f_factors,
    h_quadrupole,
    h_rf_lab,
    h_zeeman,
    hat_h0,
    hat_rf,
    r_transform,
    secular_hamiltonian,
    tilde_transform,
    transition_frequencies,
)
from .dynamics import (
    AcquisitionConfig,
    PeakAmplitudes,
    PulseSegment,
    PulseSequence,
    Spectrum,
    apply,
    equilibrium_reference,
    fid_analytic,
    fid_trace,
    peak_amplitudes,
    propagate,
    readout,
    spectrum,
)
from .gates import (
    GateKind,
    GateTarget,
    OptimizationConfig,
    OptimizationResult,
    calibrate_pi_half,
    gate_fidelity,
    load_sequence,
    optimize_gate,
    permutation_fidelity,
    sequence_fidelity,
    target_unitaries,
)
from .pps import (
    ExperimentRecord,
    PpsLabel,
    deviation_metric,
    expected_readout,
    ideal_readout,
    operator_sum,
    prepare_pps,
)
from .orientation import (
    GoniometerConfig,
    OrientationFit,
    ThetaCriterion,
    ThetaScanData,
    b1_perp_ratio,
    fit_orientation,
    select_theta,
    theta_from_goniometer,
    theta_scan,
)

__version__ = "0.1.0"
