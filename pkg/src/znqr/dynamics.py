"""Pulse propagation, signal synthesis and spectra.

Pulse sequences are piecewise-constant RF segments propagated in the hat
frame.  The free-induction signal is evaluated two independent ways: a
trace over the numerically propagated detection operator (``fid_trace``)
and the closed-form four-line expansion (``fid_analytic``); the two must
agree to rounding and serve as mutual oracles.

Acquisition is quadrature-demodulated at the carrier omega_q, so spectra
are displayed as Hz offsets around the quadrupole frequency.
"""

import json
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .operators import dagger, evolve_operator
from . import spinmodel
from .spinmodel import (
    DIM,
    DensityMatrix,
    Frame,
    SpinSystem,
    T2_SECONDS,
    detected_lines,
    energy_levels,
    equilibrium_deviation,
    f_factors,
    hat_h0,
    hat_rf,
)


@dataclass(frozen=True)
class PulseSegment:
    """One piecewise-constant RF segment.

    Attributes:
        duration: length (s), > 0.
        omega_1: RF amplitude gamma*B1 (rad/s), >= 0; zero means free evolution.
        alpha: RF initial phase (rad).
        delta_wq: carrier offset omega_q - omega (rad/s); 0 is on resonance.
        phi: polarization angle of B1 in the xy plane (rad).
    """

    duration: float
    omega_1: float = 0.0
    alpha: float = 0.0
    delta_wq: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("segment duration must be positive")
        if self.omega_1 < 0:
            raise ValueError("omega_1 must be non-negative")

    def to_dict(self) -> dict:
        return {
            "duration_s": self.duration,
            "omega1_hz": self.omega_1 / (2 * np.pi),
            "alpha_rad": self.alpha,
            "delta_wq_hz": self.delta_wq / (2 * np.pi),
            "phi_rad": self.phi,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PulseSegment":
        return cls(
            duration=d["duration_s"],
            omega_1=2 * np.pi * d["omega1_hz"],
            alpha=d["alpha_rad"],
            delta_wq=2 * np.pi * d.get("delta_wq_hz", 0.0),
            phi=d.get("phi_rad", 0.0),
        )


@dataclass
class PulseSequence:
    """Ordered list of RF segments applied left to right in time."""

    segments: list[PulseSegment]
    label: str = ""
    t2_budget: float = T2_SECONDS

    def __post_init__(self):
        if not self.segments:
            raise ValueError("pulse sequence must contain at least one segment")
        if self.total_duration > self.t2_budget:
            warnings.warn(
                f"sequence '{self.label}' lasts {self.total_duration * 1e3:.2f} ms, "
                f"longer than the transverse-relaxation budget {self.t2_budget * 1e3:.1f} ms",
                stacklevel=2,
            )

    @property
    def total_duration(self) -> float:
        return sum(seg.duration for seg in self.segments)

    def common_phi(self) -> float:
        """Shared polarization angle of all segments (error if they disagree)."""
        phis = {seg.phi for seg in self.segments}
        if len(phis) > 1:
            raise ValueError("segments carry different polarization angles")
        return self.segments[0].phi


@dataclass(frozen=True)
class AcquisitionConfig:
    """FID sampling parameters.

    Defaults resolve lines a few kHz apart with a twenty-fold margin: 4096
    points at 20 us dwell give a 50 kHz spectral width and 12.2 Hz bins,
    and the 2.5 ms apodization time (inside the 4.6 ms transverse
    relaxation budget) keeps the 127 Hz linewidth more than 20x below the
    line spacing so Lorentzian tails stay out of neighbouring peaks.
    """

    n_points: int = 4096
    dwell: float = 20e-6
    decay_time: float = 2.5e-3

    def __post_init__(self):
        n = self.n_points
        if n < 512 or (n & (n - 1)) != 0:
            raise ValueError("n_points must be a power of two >= 512")
        if self.dwell <= 0 or self.decay_time <= 0:
            raise ValueError("dwell and decay_time must be positive")

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_points) * self.dwell

    def check_covers(self, sys: SpinSystem):
        """Require the spectral width to cover every line offset with 20% margin."""
        max_offset_hz = max(abs(line.offset_hz) for line in detected_lines(sys))
        nyquist = 0.5 / self.dwell
        if 1.2 * max_offset_hz > nyquist:
            raise ValueError(
                f"spectral width {1.0 / self.dwell:.0f} Hz does not cover line "
                f"offsets up to {max_offset_hz:.0f} Hz with a 20% margin"
            )


# ---------------------------------------------------------------------------
# Propagation
# ---------------------------------------------------------------------------

def segment_hamiltonian(sys: SpinSystem, seg: PulseSegment) -> np.ndarray:
    """Hat-frame Hamiltonian of one segment (time independent)."""
    return hat_h0(sys, seg.delta_wq) + hat_rf(sys, seg.omega_1, seg.alpha, seg.phi)


def propagate(sys: SpinSystem, seq: PulseSequence) -> np.ndarray:
    """Hat-frame propagator of a pulse sequence (product of segment exponentials)."""
    u = np.eye(DIM, dtype=complex)
    for seg in seq.segments:
        u = evolve_operator(segment_hamiltonian(sys, seg), seg.duration) @ u
    return u


def apply(rho: DensityMatrix, u: np.ndarray) -> DensityMatrix:
    """Conjugate a state by a propagator: U rho U^dagger (frame preserved)."""
    return DensityMatrix(u @ rho.matrix @ dagger(u), rho.frame)


# ---------------------------------------------------------------------------
# Signal synthesis
# ---------------------------------------------------------------------------

def detection_operator(sys: SpinSystem, phi: float = 0.0) -> np.ndarray:
    """Demodulated detection operator: the co-rotating sideband of the hat RF operator.

    Built from the hat-frame RF operator at unit amplitude and zero phase,
    keeping only elements whose laboratory frequency sits near +omega_q
    (those with m_i^2 - m_j^2 = +2).  The polarization angle must match the
    coil used for excitation.
    """
    full = hat_rf(sys, omega_1=1.0, alpha=0.0, phi=phi)
    mask = (spinmodel._M2_DIFF == 2.0)
    return full * mask


def fid_trace(sys: SpinSystem, rho: DensityMatrix, acq: AcquisitionConfig,
              phi: float = 0.0) -> np.ndarray:
    """FID from the trace of the freely evolving detection operator.

    S(t) = Tr{rho . U0(t)^-1 D U0(t)} with U0 the RF-free propagator and D
    the demodulated detection operator; apodized by exp(-t/decay_time).
    Fully numerical (eigendecomposition of the matrix-conjugated
    Hamiltonian), independent of the closed-form route in ``fid_analytic``.
    """
    if rho.frame is not Frame.HAT:
        raise ValueError(f"fid_trace needs a hat-frame state, got {rho.frame}")
    acq.check_covers(sys)
    w, v = np.linalg.eigh(hat_h0(sys, delta_wq=0.0))
    rho_e = dagger(v) @ rho.matrix @ v
    det_e = dagger(v) @ detection_operator(sys, phi) @ v
    coeff = (rho_e.T * det_e).ravel()
    freq = (w[:, None] - w[None, :]).ravel()
    t = acq.times
    signal = np.exp(1j * np.outer(t, freq)) @ coeff
    return signal * np.exp(-t / acq.decay_time)


def fid_analytic(sys: SpinSystem, rho: DensityMatrix, acq: AcquisitionConfig,
                 phi: float = 0.0) -> np.ndarray:
    """FID from the closed-form four-line expansion.

    The four detected coherences beat at their closed-form offsets from the
    carrier, weighted by the central-transition mixing factors:

        S(t) = -(sqrt(3)/2) [ e^{-i phi} (rho*_12 f+ e^{i w12 t} + rho*_13 f- e^{i w13 t})
                            + e^{+i phi} (rho_24 f- e^{i w24 t} - rho_34 f+ e^{i w34 t}) ]

    with w_ij the carrier offsets of the lines.  Same demodulation and
    apodization as ``fid_trace``.
    """
    if rho.frame is not Frame.HAT:
        raise ValueError(f"fid_analytic needs a hat-frame state, got {rho.frame}")
    acq.check_covers(sys)
    e = energy_levels(sys, delta_wq=sys.omega_q)
    f_plus, f_minus = f_factors(sys.theta)
    m = rho.matrix
    terms = (
        (np.conj(m[0, 1]) * f_plus * np.exp(-1j * phi), (e[0] - e[1]) - sys.omega_q),
        (np.conj(m[0, 2]) * f_minus * np.exp(-1j * phi), (e[0] - e[2]) - sys.omega_q),
        (m[1, 3] * f_minus * np.exp(1j * phi), -(e[1] - e[3]) - sys.omega_q),
        (-m[2, 3] * f_plus * np.exp(1j * phi), -(e[2] - e[3]) - sys.omega_q),
    )
    t = acq.times
    signal = np.zeros(acq.n_points, dtype=complex)
    for amp, offset in terms:
        signal += amp * np.exp(1j * offset * t)
    return -(np.sqrt(3.0) / 2.0) * signal * np.exp(-t / acq.decay_time)


# ---------------------------------------------------------------------------
# Spectra and peak amplitudes
# ---------------------------------------------------------------------------

@dataclass
class Spectrum:
    """Complex spectrum on a frequency grid of Hz offsets from the carrier."""

    freq_hz: np.ndarray
    amplitude: np.ndarray

    @property
    def modulus(self) -> np.ndarray:
        return np.abs(self.amplitude)

    def to_csv(self, path):
        rows = np.column_stack([
            self.freq_hz, self.amplitude.real, self.amplitude.imag, self.modulus,
        ])
        with open(path, "w") as fh:
            fh.write("freq_hz,re,im,abs\n")
            for row in rows:
                fh.write(",".join(f"{x:.12g}" for x in row) + "\n")

    def peak_positions(self, n_peaks: int = 4) -> np.ndarray:
        """Frequencies (Hz) of the n strongest local maxima, refined by quadratic interpolation."""
        mod = self.modulus
        interior = (mod[1:-1] > mod[:-2]) & (mod[1:-1] >= mod[2:])
        idx = np.where(interior)[0] + 1
        if len(idx) < n_peaks:
            raise ValueError(f"found only {len(idx)} peaks, need {n_peaks}")
        strongest = idx[np.argsort(mod[idx])[-n_peaks:]]
        df = self.freq_hz[1] - self.freq_hz[0]
        positions = []
        for k in strongest:
            a, b, c = mod[k - 1], mod[k], mod[k + 1]
            shift = 0.5 * (a - c) / (a - 2 * b + c)
            positions.append(self.freq_hz[k] + shift * df)
        return np.sort(positions)


def spectrum(fid: np.ndarray, acq: AcquisitionConfig) -> Spectrum:
    """Discrete Fourier transform of the FID, centered frequency axis."""
    freq = np.fft.fftshift(np.fft.fftfreq(len(fid), acq.dwell))
    amp = np.fft.fftshift(np.fft.fft(fid))
    return Spectrum(freq, amp)


@dataclass
class PeakAmplitudes:
    """Moduli of the four lines ordered by frequency (lowest to highest).

    ``reference`` stores the equilibrium line amplitudes used for the
    line-by-line normalization.
    """

    raw: np.ndarray
    line_order: list[str]
    offsets_hz: np.ndarray
    reference: np.ndarray | None = None

    @property
    def normalized(self) -> np.ndarray:
        if self.reference is None:
            raise ValueError("no equilibrium reference stored; cannot normalize")
        return self.raw / self.reference

    def to_json(self, path):
        payload = {
            "line_order": self.line_order,
            "offsets_hz": [float(x) for x in self.offsets_hz],
            "raw": [float(x) for x in self.raw],
            "normalized": [float(x) for x in self.normalized]
            if self.reference is not None else None,
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


def peak_amplitudes(spec: Spectrum, sys: SpinSystem,
                    reference: "PeakAmplitudes | np.ndarray | None" = None) -> PeakAmplitudes:
    """Read the modulus at the four predicted line positions.

    Takes the nearest bin to each closed-form line offset and searches the
    three surrounding bins for a local maximum; when none exists there (an
    absent line sitting on a neighbour's tail) the nearest bin itself is
    read, so empty lines are not inflated by climbing the tail slope.
    Lines are well separated and noiseless so no integration is needed.
    """
    lines = detected_lines(sys)
    mod = spec.modulus
    raw = np.empty(len(lines))
    for k, line in enumerate(lines):
        idx = int(np.argmin(np.abs(spec.freq_hz - line.offset_hz)))
        value = mod[idx]
        for j in range(max(idx - 1, 1), min(idx + 2, len(mod) - 1)):
            if mod[j] >= mod[j - 1] and mod[j] >= mod[j + 1]:
                value = max(value, mod[j])
        raw[k] = value
    ref = reference.raw if isinstance(reference, PeakAmplitudes) else reference
    return PeakAmplitudes(
        raw=raw,
        line_order=[line.label for line in lines],
        offsets_hz=np.array([line.offset_hz for line in lines]),
        reference=None if ref is None else np.asarray(ref, dtype=float),
    )


def readout(sys: SpinSystem, rho: DensityMatrix, pi_half, acq: AcquisitionConfig,
            reference=None, phi: float | None = None) -> PeakAmplitudes:
    """Apply the reading pulse, synthesize the FID and pick the line amplitudes.

    ``pi_half`` may be a PulseSequence or an explicit hat-frame unitary.
    The detection polarization follows the reading pulse unless given.
    """
    if isinstance(pi_half, PulseSequence):
        u = propagate(sys, pi_half)
        if phi is None:
            phi = pi_half.common_phi()
    else:
        u = np.asarray(pi_half, dtype=complex)
        if phi is None:
            phi = 0.0
    fid = fid_trace(sys, apply(rho, u), acq, phi=phi)
    return peak_amplitudes(spectrum(fid, acq), sys, reference=reference)


def equilibrium_reference(sys: SpinSystem, pi_half, acq: AcquisitionConfig,
                          phi: float | None = None) -> PeakAmplitudes:
    """Equilibrium readout normalized against itself (all lines exactly 1)."""
    peaks = readout(sys, equilibrium_deviation(sys), pi_half, acq, phi=phi)
    return replace(peaks, reference=peaks.raw.copy())
