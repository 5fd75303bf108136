"""Spin-3/2 Hamiltonians and frame transforms for Zeeman-perturbed NQR.

The static problem is a nucleus with a dominant axially-symmetric
quadrupole coupling omega_q, a weak Zeeman perturbation omega_0 = gamma*B0
tilted by theta from the field-gradient axis, and a linearly polarized RF
field near the quadrupole frequency.  Three frames are used:

* ``LAB``            laboratory frame, time-dependent RF.
* ``QUAD_PICTURE``   interaction picture of exp(i*omega*Iz^2*t/2); after the
                     secular step the Hamiltonian is time independent.
* ``HAT``            quadrupole picture rotated by the real involution R
                     that diagonalizes the RF-free Hamiltonian.

All couplings are angular frequencies (rad/s) with hbar = 1.  The basis is
ordered m = +3/2, +1/2, -1/2, -3/2; the two-qubit labelling maps these
levels to |00>, |01>, |10>, |11>.
"""

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from .operators import dagger, require_hermitian, spin_operators

DIM = 4
# Magnetic quantum numbers in basis order.
M_VALUES = np.array([1.5, 0.5, -0.5, -1.5])
IX, IY, IZ = spin_operators(3)
IDENTITY = np.eye(DIM, dtype=complex)

#: theta with cos^2(theta) = 4/39, the working point at which the four
#: spectral lines are evenly spaced.
THETA_EVEN_SPACING = float(np.arccos(2.0 / np.sqrt(39.0)))

PAPER_NU_Q_HZ = 28.1e6
PAPER_GAMMA_HZ_PER_T = 4.176e6
PAPER_B0_T = 730e-6
T2_SECONDS = 4.6e-3
T1_SECONDS = 32e-3


class Frame(enum.Enum):
    """Frame tag attached to operators and states."""

    LAB = "lab"
    QUAD_PICTURE = "quad_picture"
    HAT = "hat"


@dataclass(frozen=True)
class SpinSystem:
    """Static parameters of the spin-3/2 problem.

    Attributes:
        omega_q: quadrupole coupling (rad/s), > 0.
        omega_0: Zeeman coupling gamma*B0 (rad/s), >= 0.
        theta: angle between B0 and the field-gradient axis (rad), in [0, pi).
        gamma: gyromagnetic ratio (Hz/T), used only for unit conversions.
    """

    omega_q: float
    omega_0: float
    theta: float
    gamma: float = PAPER_GAMMA_HZ_PER_T

    def __post_init__(self):
        if self.omega_q <= 0:
            raise ValueError("omega_q must be positive")
        if self.omega_0 < 0:
            raise ValueError("omega_0 must be non-negative")
        if not (0 <= self.theta < np.pi):
            raise ValueError("theta must lie in [0, pi)")
        if self.omega_0 / self.omega_q >= 0.1:
            warnings.warn(
                "omega_0/omega_q = %.3g: Zeeman term is not a small perturbation"
                % (self.omega_0 / self.omega_q),
                stacklevel=2,
            )

    @classmethod
    def from_hz(cls, nu_q_hz, theta, nu_0_hz=None, b0_tesla=None,
                gamma_hz_per_t=PAPER_GAMMA_HZ_PER_T) -> "SpinSystem":
        """Build a system from ordinary frequencies; give exactly one of nu_0_hz / b0_tesla."""
        if (nu_0_hz is None) == (b0_tesla is None):
            raise ValueError("give exactly one of nu_0_hz or b0_tesla")
        if nu_0_hz is None:
            nu_0_hz = gamma_hz_per_t * b0_tesla
        return cls(
            omega_q=2 * np.pi * nu_q_hz,
            omega_0=2 * np.pi * nu_0_hz,
            theta=float(theta),
            gamma=gamma_hz_per_t,
        )

    @classmethod
    def paper_working_point(cls) -> "SpinSystem":
        """KClO3 / Cl-35 values with theta at the even-spacing angle."""
        return cls.from_hz(PAPER_NU_Q_HZ, THETA_EVEN_SPACING, b0_tesla=PAPER_B0_T)

    @property
    def b0_tesla(self) -> float:
        return self.omega_0 / (2 * np.pi * self.gamma)


@dataclass
class DensityMatrix:
    """4x4 Hermitian, traceless deviation density operator with a frame tag."""

    matrix: np.ndarray
    frame: Frame = Frame.HAT

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (DIM, DIM):
            raise ValueError("density matrix must be 4x4")
        require_hermitian(self.matrix, name="density matrix")
        scale = max(1.0, float(np.max(np.abs(self.matrix))))
        if abs(np.trace(self.matrix)) > 1e-10 * scale:
            raise ValueError("deviation density matrix must be traceless")


# ---------------------------------------------------------------------------
# Laboratory frame
# ---------------------------------------------------------------------------

def h_quadrupole(sys: SpinSystem) -> np.ndarray:
    """Quadrupole Hamiltonian (omega_q/2) * (Iz^2 - I(I+1)/3), lab frame, traceless."""
    return (sys.omega_q / 2.0) * (IZ @ IZ - (15.0 / 4.0 / 3.0) * IDENTITY)


def h_zeeman(sys: SpinSystem) -> np.ndarray:
    """Static Zeeman Hamiltonian -omega_0 (Ix sin(theta) + Iz cos(theta)), lab frame."""
    return -sys.omega_0 * (IX * np.sin(sys.theta) + IZ * np.cos(sys.theta))


def _ix_polarized(phi: float) -> np.ndarray:
    """exp(-i phi Iz) Ix exp(i phi Iz): Ix with its elements phased by the coil angle."""
    phase = np.exp(-1j * phi * (M_VALUES[:, None] - M_VALUES[None, :]))
    return IX * phase


def h_rf_lab(sys: SpinSystem, omega_1: float, omega: float, alpha: float,
             phi: float, t: float) -> np.ndarray:
    """Linearly polarized RF Hamiltonian at time t, lab frame.

    -2*omega_1*cos(omega*t + alpha) * exp(-i phi Iz) Ix exp(i phi Iz);
    omega is the carrier (rad/s), alpha the initial phase, phi the
    polarization angle of B1 in the xy plane.
    """
    return -2.0 * omega_1 * np.cos(omega * t + alpha) * _ix_polarized(phi)


# ---------------------------------------------------------------------------
# Quadrupole interaction picture and the secular approximation
# ---------------------------------------------------------------------------

_M2 = M_VALUES**2
# m_i^2 - m_j^2 decides the interaction-picture phase of each element.
_M2_DIFF = _M2[:, None] - _M2[None, :]


def tilde_transform(a: np.ndarray, omega: float, t: float) -> np.ndarray:
    """Conjugate a lab-frame operator by U = exp(i omega Iz^2 t / 2).

    Element (i, j) acquires the phase exp(i omega t (m_i^2 - m_j^2) / 2).
    """
    return a * np.exp(0.5j * omega * t * _M2_DIFF)


def secular_zeeman(sys: SpinSystem) -> np.ndarray:
    """Zeeman term surviving the secular step in the quadrupole picture.

    Only elements with m_i^2 == m_j^2 are time independent in the
    interaction picture; for Ix that keeps the central-transition block.
    """
    static_mask = (_M2_DIFF == 0.0)
    ix_central = IX * static_mask
    return -sys.omega_0 * (np.sin(sys.theta) * ix_central + np.cos(sys.theta) * IZ)


def secular_rf(omega_1: float, alpha: float = 0.0, phi: float = 0.0) -> np.ndarray:
    """RF term after the rotating-wave selection, quadrupole picture.

    The cosine drive cancels the oscillation of elements whose
    interaction-picture frequency is -+omega, i.e. (m_i^2 - m_j^2)/2 = +-1
    (the satellite transitions); central elements are dropped.
    """
    ix_phi = _ix_polarized(phi)
    h = np.zeros((DIM, DIM), dtype=complex)
    co = (_M2_DIFF / 2.0 == 1.0)
    counter = (_M2_DIFF / 2.0 == -1.0)
    h[co] = -omega_1 * np.exp(-1j * alpha) * ix_phi[co]
    h[counter] = -omega_1 * np.exp(1j * alpha) * ix_phi[counter]
    return h


def secular_h0(sys: SpinSystem, delta_wq: float) -> np.ndarray:
    """RF-free secular Hamiltonian (delta_wq/2) Iz^2 + secular Zeeman term."""
    return (delta_wq / 2.0) * (IZ @ IZ) + secular_zeeman(sys)


def secular_hamiltonian(sys: SpinSystem, omega_1: float, delta_wq: float,
                        alpha: float = 0.0, phi: float = 0.0) -> np.ndarray:
    """Full time-independent secular Hamiltonian in the quadrupole picture.

    delta_wq = omega_q - omega is the carrier offset from the quadrupole
    frequency (rad/s).
    """
    return secular_h0(sys, delta_wq) + secular_rf(omega_1, alpha, phi)


# ---------------------------------------------------------------------------
# R transform and closed-form energies
# ---------------------------------------------------------------------------

def f_factors(theta: float) -> tuple[float, float]:
    """Central-transition mixing weights (f_plus, f_minus).

    Evaluated as sqrt(1/2 +- cos(theta) / (2 sqrt(cos^2 + 4 sin^2))), which
    stays finite at theta = pi/2 and keeps R an involution for all theta.
    """
    c = np.cos(theta)
    s = np.sin(theta)
    denom = 2.0 * np.sqrt(c * c + 4.0 * s * s)
    f_plus = np.sqrt(0.5 + c / denom)
    f_minus = np.sqrt(0.5 - c / denom)
    return float(f_plus), float(f_minus)


def g_cos_theta(theta: float) -> float:
    """sqrt(1 + 4 tan^2) * cos(theta), computed as sign(cos) * sqrt(4 - 3 cos^2)."""
    c = np.cos(theta)
    return float(np.sign(c) * np.sqrt(4.0 - 3.0 * c * c)) if c != 0.0 else 2.0


def r_transform(theta: float) -> np.ndarray:
    """Real symmetric involution mixing the central levels with weights f_plus/f_minus."""
    f_plus, f_minus = f_factors(theta)
    r = np.eye(DIM, dtype=complex)
    r[1, 1] = f_plus
    r[1, 2] = f_minus
    r[2, 1] = f_minus
    r[2, 2] = -f_plus
    return r


def energy_levels(sys: SpinSystem, delta_wq: float) -> np.ndarray:
    """Closed-form eigenvalues of the RF-free secular Hamiltonian, hat frame.

    Returns the four energies (rad/s, hbar = 1) ordered by the R-basis
    labels (+3/2, +1/2, -1/2, -3/2).
    """
    c = np.cos(sys.theta)
    gc = g_cos_theta(sys.theta)
    return np.array([
        (9.0 * delta_wq - 12.0 * sys.omega_0 * c) / 8.0,
        (delta_wq - 4.0 * sys.omega_0 * gc) / 8.0,
        (delta_wq + 4.0 * sys.omega_0 * gc) / 8.0,
        (9.0 * delta_wq + 12.0 * sys.omega_0 * c) / 8.0,
    ])


# Coherences observable in the detected sideband, as (row, col) index pairs
# in R-basis order, with the mixing weight each carries in the signal.
DETECTED_COHERENCES = ((0, 1, "f+"), (0, 2, "f-"), (1, 3, "f-"), (2, 3, "f+"))


def transition_frequencies(sys: SpinSystem) -> dict[str, float]:
    """Observable lab-frame line frequencies (rad/s, magnitudes), keyed '12', '13', '24', '34'.

    Computed from the closed-form levels with delta_wq = omega_q, i.e. with
    the quadrupole splitting restored to the laboratory value.
    """
    e = energy_levels(sys, delta_wq=sys.omega_q)
    return {
        "12": abs(e[0] - e[1]),
        "13": abs(e[0] - e[2]),
        "24": abs(e[1] - e[3]),
        "34": abs(e[2] - e[3]),
    }


@dataclass(frozen=True)
class DetectedLine:
    """One observable line: coherence indices, mixing weight, carrier offset."""

    i: int
    j: int
    weight_label: str
    weight: float
    offset: float  # rad/s from the carrier omega_q

    @property
    def label(self) -> str:
        return f"{self.i + 1}{self.j + 1}"

    @property
    def offset_hz(self) -> float:
        return self.offset / (2 * np.pi)


def detected_lines(sys: SpinSystem) -> list[DetectedLine]:
    """The four observable lines sorted by offset from the carrier (low to high).

    Coherences (1,2) and (1,3) appear at +(E_i - E_j) - omega_q, the mirrored
    pair (2,4) and (3,4) at -(E_i - E_j) - omega_q.
    """
    e = energy_levels(sys, delta_wq=sys.omega_q)
    f_plus, f_minus = f_factors(sys.theta)
    weights = {"f+": f_plus, "f-": f_minus}
    lines = []
    for i, j, wlab in DETECTED_COHERENCES:
        nu = e[i] - e[j]
        offset = nu - sys.omega_q if i == 0 else -nu - sys.omega_q
        lines.append(DetectedLine(i, j, wlab, weights[wlab], float(offset)))
    return sorted(lines, key=lambda line: line.offset)


# ---------------------------------------------------------------------------
# Hat frame
# ---------------------------------------------------------------------------

def hat_h0(sys: SpinSystem, delta_wq: float) -> np.ndarray:
    """RF-free Hamiltonian rotated to the hat frame (numerically diagonal)."""
    r = r_transform(sys.theta)
    return r @ secular_h0(sys, delta_wq) @ dagger(r)


def hat_rf(sys: SpinSystem, omega_1: float, alpha: float = 0.0,
           phi: float = 0.0) -> np.ndarray:
    """Secular RF Hamiltonian rotated to the hat frame."""
    r = r_transform(sys.theta)
    return r @ secular_rf(omega_1, alpha, phi) @ dagger(r)


def equilibrium_deviation(sys: SpinSystem) -> DensityMatrix:
    """Thermal deviation state, proportional to the traceless part of Iz^2.

    Normalized to unit maximum entry: diag(1, -1, -1, 1).  Diagonal with a
    degenerate central block, so it is the same matrix in every frame; it is
    tagged hat for direct use with the propagators.
    """
    del sys  # deviation shape is parameter independent at high temperature
    return DensityMatrix(np.diag([1.0, -1.0, -1.0, 1.0]).astype(complex), Frame.HAT)
