"""Pseudo-pure state preparation by temporal averaging, and gate circuits on them.

Each pseudo-pure state is built from three separately-run experiments whose
gate permutations average the background populations to uniformity; the
three FIDs are summed (complex, before the modulus is taken).  The ideal
operator sums map the unit equilibrium deviation diag(1,-1,-1,1) onto
+-(4 e_k - 1), doubling the population contrast across the bright
transitions relative to equilibrium, so the summed signal is halved to put
ideal bright lines at exactly 1 in equilibrium-normalized units.

``expected_readout`` is the noiseless oracle: exact target unitaries, an
ideal reading rotation and the closed-form line amplitudes, no spectra
involved.  ``prepare_pps`` runs the full pulse pipeline and is judged
against the oracle with ``deviation_metric``.
"""

import enum
import json
from dataclasses import dataclass

import numpy as np

from .operators import dagger, evolve_operator
from .dynamics import (
    AcquisitionConfig,
    PeakAmplitudes,
    PulseSequence,
    Spectrum,
    apply,
    fid_trace,
    peak_amplitudes,
    propagate,
    spectrum,
)
from .gates import GateTarget, target_unitaries
from .spinmodel import (
    DensityMatrix,
    SpinSystem,
    detected_lines,
    equilibrium_deviation,
    hat_rf,
)

#: Scale applied to the summed three-experiment signal (see module docstring).
TEMPORAL_AVERAGE_SCALE = 0.5


class PpsLabel(enum.Enum):
    """The four computational-basis pseudo-pure states."""

    PPS00 = "00"
    PPS01 = "01"
    PPS10 = "10"
    PPS11 = "11"

    @property
    def level(self) -> int:
        """Level index (0-based) carrying the pseudo-pure population excess."""
        return int(self.value, 2)


_OPERATOR_SUMS = {
    PpsLabel.PPS00: ["identity", "CNOT_a", "CNOT_b"],
    PpsLabel.PPS01: ["identity", "CNOT_a", "P13"],
    PpsLabel.PPS10: ["identity", "CNOT_b", "P12"],
    PpsLabel.PPS11: ["identity", "P13", "P12"],
}


def operator_sum(label: PpsLabel) -> list[str]:
    """Gate labels of the three-term sum preparing the given pseudo-pure state."""
    return list(_OPERATOR_SUMS[label])


def ideal_readout(sys: SpinSystem, phi: float = 0.0) -> np.ndarray:
    """Exact pi/2 reading rotation generated by the RF operator alone.

    The hat-frame RF operator at unit amplitude squares to 3/4 times the
    identity, so evolving under it for t = pi/(2 sqrt(3)) gives a clean
    quarter rotation on every driven transition.
    """
    h = hat_rf(sys, omega_1=1.0, alpha=0.0, phi=phi)
    return evolve_operator(h, np.pi / (2.0 * np.sqrt(3.0)))


def analytic_line_amplitudes(sys: SpinSystem, rho: DensityMatrix) -> np.ndarray:
    """Moduli of the four detected lines (sorted by frequency) straight from coherences."""
    lines = detected_lines(sys)
    m = rho.matrix
    return np.array([abs(m[line.i, line.j]) * line.weight for line in lines])


def _resolve_gate(gate) -> np.ndarray:
    if isinstance(gate, GateTarget):
        return gate.as_matrix()
    return np.asarray(gate, dtype=complex)


def expected_readout(sys: SpinSystem, label: PpsLabel,
                     circuit: tuple = ()) -> PeakAmplitudes:
    """Ideal-gate prediction of the normalized line amplitudes.

    Builds the pseudo-pure deviation with exact target unitaries, applies
    the exact circuit unitaries and the ideal reading rotation, and returns
    the closed-form line amplitudes normalized line-by-line against the
    identically processed equilibrium state.
    """
    targets = target_unitaries()

    def exact_matrix(name_or_gate):
        if name_or_gate == "identity":
            return np.eye(4, dtype=complex)
        if isinstance(name_or_gate, str):
            return targets[name_or_gate].as_matrix()
        return _resolve_gate(name_or_gate)

    rho0 = equilibrium_deviation(sys)
    summed = np.zeros((4, 4), dtype=complex)
    for name in operator_sum(label):
        g = exact_matrix(name)
        summed += g @ rho0.matrix @ dagger(g)
    summed *= TEMPORAL_AVERAGE_SCALE
    for gate in circuit:
        g = exact_matrix(gate)
        summed = g @ summed @ dagger(g)

    u_ro = ideal_readout(sys)
    rho_read = DensityMatrix(u_ro @ summed @ dagger(u_ro), rho0.frame)
    raw = analytic_line_amplitudes(sys, rho_read)

    eq_read = DensityMatrix(u_ro @ rho0.matrix @ dagger(u_ro), rho0.frame)
    reference = analytic_line_amplitudes(sys, eq_read)

    lines = detected_lines(sys)
    return PeakAmplitudes(
        raw=raw,
        line_order=[line.label for line in lines],
        offsets_hz=np.array([line.offset_hz for line in lines]),
        reference=reference,
    )


@dataclass
class ExperimentRecord:
    """One temporal-averaging experiment: constituents, summed signal, verdict."""

    label: str
    circuit: list[str]
    constituents: list[tuple[str, np.ndarray]]  # (gate label, FID)
    summed_spectrum: Spectrum
    amplitudes: PeakAmplitudes
    expected: PeakAmplitudes
    deviation: float

    def to_json(self, path):
        payload = {
            "label": self.label,
            "circuit": self.circuit,
            "line_order": self.amplitudes.line_order,
            "amplitudes": [float(x) for x in self.amplitudes.normalized],
            "expected": [float(x) for x in self.expected.normalized],
            "deviation_metric": self.deviation,
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


def prepare_pps(sys: SpinSystem, label: PpsLabel, gates: dict,
                pi_half, acq: AcquisitionConfig,
                circuit: tuple = (), reference: PeakAmplitudes | None = None,
                phi: float = 0.0) -> ExperimentRecord:
    """Run the three-experiment temporal average and read the result.

    Args:
        gates: mapping from gate label to PulseSequence or explicit hat-frame
            unitary; the identity constituent needs no entry.
        pi_half: reading pulse (PulseSequence or unitary).
        circuit: extra gate labels applied after each preparation gate.
        reference: equilibrium readout used for normalization; computed on
            the fly when omitted.

    Raises:
        KeyError: a constituent or circuit gate has no entry in ``gates``.
    """
    rho0 = equilibrium_deviation(sys)

    def gate_propagator(name):
        if name == "identity":
            return np.eye(4, dtype=complex)
        if name not in gates or gates[name] is None:
            raise KeyError(f"no pulse sequence or unitary supplied for gate '{name}'")
        g = gates[name]
        return propagate(sys, g) if isinstance(g, PulseSequence) else np.asarray(g, dtype=complex)

    if isinstance(pi_half, PulseSequence):
        u_read = propagate(sys, pi_half)
    else:
        u_read = np.asarray(pi_half, dtype=complex)

    circuit_u = np.eye(4, dtype=complex)
    for name in circuit:
        circuit_u = gate_propagator(name) @ circuit_u

    constituents = []
    summed_fid = np.zeros(acq.n_points, dtype=complex)
    for name in operator_sum(label):
        u_total = u_read @ circuit_u @ gate_propagator(name)
        fid = fid_trace(sys, apply(rho0, u_total), acq, phi=phi)
        constituents.append((name, fid))
        summed_fid = summed_fid + fid
    summed_fid *= TEMPORAL_AVERAGE_SCALE

    if reference is None:
        from .dynamics import equilibrium_reference

        reference = equilibrium_reference(sys, pi_half, acq, phi=phi)

    spec = spectrum(summed_fid, acq)
    amps = peak_amplitudes(spec, sys, reference=reference)
    expected = expected_readout(sys, label, circuit=tuple(circuit))
    dev = deviation_metric(amps, expected)
    return ExperimentRecord(
        label=label.name,
        circuit=list(circuit),
        constituents=constituents,
        summed_spectrum=spec,
        amplitudes=amps,
        expected=expected,
        deviation=dev,
    )


def deviation_metric(measured, expected) -> float:
    """Root-mean-square difference of normalized line amplitudes over the four lines."""
    m = measured.normalized if isinstance(measured, PeakAmplitudes) else np.asarray(measured, float)
    e = expected.normalized if isinstance(expected, PeakAmplitudes) else np.asarray(expected, float)
    return float(np.sqrt(np.mean((m - e) ** 2)))
