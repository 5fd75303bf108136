"""Goniometer geometry, working-point selection and orientation fitting.

The crystal sits in a two-axis goniometer: theta_h is the fixed angle
between the field-gradient axis and the horizontal rotation axis, phi_h the
horizontal rotation angle, and the effective tilt theta of the static field
follows cos(theta) = sin(theta_h) cos(phi_h).  Only the component of B1
perpendicular to the gradient axis drives transitions, which sets the
usable fraction of the RF amplitude.

Line positions versus theta come straight from the closed-form energy
levels; fitting them to measured line frequencies recovers the couplings
and a global angle offset.
"""

import csv
import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .spinmodel import SpinSystem, THETA_EVEN_SPACING, energy_levels


@dataclass(frozen=True)
class GoniometerConfig:
    """Goniometer and coil geometry (all angles rad).

    ``coil_tilt`` is the angle of B1 from the vertical rotation axis and
    ``delta`` the angle of B1's projection onto the horizontal plane from
    B0.
    """

    theta_h: float = np.pi / 2
    phi_h: float = 0.0
    coil_tilt: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        for name in ("theta_h", "phi_h", "coil_tilt", "delta"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not (0 <= self.coil_tilt <= np.pi / 2):
            raise ValueError("coil_tilt must lie in [0, pi/2]")


def theta_from_goniometer(g: GoniometerConfig) -> float:
    """Tilt angle of B0 from the gradient axis for the given goniometer setting."""
    return float(np.arccos(np.sin(g.theta_h) * np.cos(g.phi_h)))


def b1_perp_ratio(g: GoniometerConfig, theta: float) -> float:
    """Fraction of B1 perpendicular to the gradient axis, in [cos(coil_tilt), 1]."""
    s2 = np.sin(g.coil_tilt) ** 2
    return float(np.sqrt(1.0 + s2 * (np.sin(theta + g.delta) ** 2 - 1.0)))


def line_frequencies_hz(sys: SpinSystem, theta: float) -> np.ndarray:
    """The four observable line frequencies (Hz, sorted ascending) at tilt theta."""
    tilted = SpinSystem(sys.omega_q, sys.omega_0, float(theta) % np.pi, sys.gamma)
    e = energy_levels(tilted, delta_wq=tilted.omega_q)
    nus = np.abs([e[0] - e[1], e[0] - e[2], e[1] - e[3], e[2] - e[3]])
    return np.sort(nus) / (2 * np.pi)


@dataclass
class ThetaScanData:
    """Measured (or synthesized) line frequencies on a grid of tilt angles."""

    thetas: np.ndarray          # rad
    frequencies_hz: np.ndarray  # shape (n, 4), sorted ascending per row

    def __post_init__(self):
        self.thetas = np.asarray(self.thetas, dtype=float)
        self.frequencies_hz = np.asarray(self.frequencies_hz, dtype=float)
        if self.frequencies_hz.shape != (len(self.thetas), 4):
            raise ValueError("frequencies must be an (n, 4) array")
        self.frequencies_hz = np.sort(self.frequencies_hz, axis=1)
        if np.any(self.frequencies_hz <= 0):
            raise ValueError("line frequencies must be positive")

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["theta_deg", "f1_hz", "f2_hz", "f3_hz", "f4_hz"])
            for theta, row in zip(self.thetas, self.frequencies_hz):
                writer.writerow([f"{np.degrees(theta):.12g}"] + [f"{f:.12g}" for f in row])

    @classmethod
    def from_csv(cls, path) -> "ThetaScanData":
        thetas, freqs = [], []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                thetas.append(np.radians(float(row["theta_deg"])))
                freqs.append([float(row[f"f{k}_hz"]) for k in range(1, 5)])
        return cls(np.array(thetas), np.array(freqs))


def theta_scan(sys: SpinSystem, thetas) -> ThetaScanData:
    """Closed-form line frequencies for each tilt angle in ``thetas``."""
    thetas = np.asarray(thetas, dtype=float)
    freqs = np.array([line_frequencies_hz(sys, th) for th in thetas])
    return ThetaScanData(thetas, freqs)


@dataclass
class OrientationFit:
    """Recovered couplings and angle offset with the fit residual."""

    nu_q_hz: float
    nu_0_hz: float
    theta_offset: float  # rad
    rms_residual_hz: float

    def to_json_dict(self) -> dict:
        return {
            "nu_q_hz": self.nu_q_hz,
            "nu_0_hz": self.nu_0_hz,
            "theta_offset_deg": float(np.degrees(self.theta_offset)),
            "rms_residual_hz": self.rms_residual_hz,
        }


def fit_orientation(data: ThetaScanData, gamma: float = 4.176e6) -> OrientationFit:
    """Least-squares fit of the closed-form line curves to scan data.

    Lines are matched to curves by sorted frequency order at each angle.
    Requires at least 6 scan points spanning more than one angle.
    """
    if len(data.thetas) < 6:
        raise ValueError("need at least 6 scan points to fit")
    if np.ptp(data.thetas) < 1e-9:
        raise ValueError("scan points all share the same angle; fit is rank deficient")

    nu_q0 = float(np.mean(data.frequencies_hz))
    nu_00 = max(float(np.ptp(data.frequencies_hz)) / 6.0, 1.0)

    def residuals(p):
        nu_q, nu_0, offset = p
        model_sys = SpinSystem(2 * np.pi * max(nu_q, 1.0), 2 * np.pi * abs(nu_0),
                               0.0, gamma)
        model = np.array([
            line_frequencies_hz(model_sys, th + offset) for th in data.thetas
        ])
        return (model - data.frequencies_hz).ravel()

    result = least_squares(residuals, x0=[nu_q0, nu_00, 0.0], x_scale="jac")
    res = residuals(result.x)
    return OrientationFit(
        nu_q_hz=float(result.x[0]),
        nu_0_hz=float(abs(result.x[1])),
        theta_offset=float(result.x[2]),
        rms_residual_hz=float(np.sqrt(np.mean(res**2))),
    )


class ThetaCriterion(enum.Enum):
    """Working-point selection rules for the tilt angle."""

    MAX_B1_PERP = "max_b1_perp"
    MAX_SENSITIVITY = "max_sensitivity"
    EVEN_SPACING = "even_spacing"


def select_theta(criterion: ThetaCriterion, g: GoniometerConfig,
                 sys: SpinSystem | None = None) -> float:
    """Pick the tilt angle according to the given criterion (rad).

    MAX_B1_PERP maximizes the usable RF amplitude (theta = pi/2 - delta);
    EVEN_SPACING makes the four lines equidistant (cos^2 theta = 4/39);
    MAX_SENSITIVITY maximizes the summed |d nu / d theta| over a 0.5 degree
    grid by finite differences and needs a SpinSystem.
    """
    if criterion is ThetaCriterion.MAX_B1_PERP:
        return float(np.pi / 2 - g.delta)
    if criterion is ThetaCriterion.EVEN_SPACING:
        return THETA_EVEN_SPACING
    if sys is None:
        raise ValueError("MAX_SENSITIVITY needs a SpinSystem")
    grid = np.radians(np.arange(0.5, 180.0, 0.5))
    h = np.radians(0.05)
    sens = [
        np.sum(np.abs(line_frequencies_hz(sys, th + h) - line_frequencies_hz(sys, th - h))) / (2 * h)
        for th in grid
    ]
    return float(grid[int(np.argmax(sens))])
