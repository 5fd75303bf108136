"""Independent reference implementations used only as test oracles.

These deliberately avoid the library's closed forms and secular machinery:
the lab-frame propagator integrates the full time-dependent Hamiltonian
with its counter-rotating terms, and the interaction-picture transform is
re-derived through brute-force matrix exponentials.
"""

import numpy as np
from scipy.linalg import expm

from znqr.spinmodel import IX, IZ, SpinSystem, h_quadrupole, h_rf_lab, h_zeeman


def lab_propagator(sys: SpinSystem, omega_1: float, omega: float, alpha: float,
                   phi: float, total_time: float, dt: float = 1e-9) -> np.ndarray:
    """Piecewise-constant integration of the full lab-frame Hamiltonian.

    Steps of dt with the RF evaluated at the midpoint of each step.
    """
    n_steps = int(round(total_time / dt))
    h_static = h_quadrupole(sys) + h_zeeman(sys)
    u = np.eye(4, dtype=complex)
    t_mid = (np.arange(n_steps) + 0.5) * dt
    for k in range(n_steps):
        h = h_static + h_rf_lab(sys, omega_1, omega, alpha, phi, t_mid[k])
        w, v = np.linalg.eigh(h)
        u = (v * np.exp(-1j * w * dt)) @ v.conj().T @ u
    return u


def quad_picture_of_lab(sys: SpinSystem, u_lab: np.ndarray, omega: float,
                        total_time: float) -> np.ndarray:
    """Transform a lab propagator into the quadrupole interaction picture."""
    u_frame = expm(0.5j * omega * (IZ @ IZ) * total_time)
    return u_frame @ u_lab


def tilde_by_expm(a: np.ndarray, omega: float, t: float) -> np.ndarray:
    """Interaction-picture conjugation via explicit matrix exponentials."""
    u = expm(0.5j * omega * (IZ @ IZ) * t)
    return u @ a @ np.linalg.inv(u)


def phase_invariant_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    return float(abs(np.vdot(u, v)) ** 2) / u.shape[0] ** 2


def eq21_matrix(theta: float, omega_1: float, alpha: float, phi: float) -> np.ndarray:
    """Hat-frame RF operator written out element by element (closed form)."""
    c = np.cos(theta)
    s = np.sin(theta)
    denom = 2.0 * np.sqrt(c * c + 4.0 * s * s)
    fp = np.sqrt(0.5 + c / denom)
    fm = np.sqrt(0.5 - c / denom)
    pp = phi + alpha
    pm = phi - alpha
    m = np.zeros((4, 4), dtype=complex)
    m[0, 1] = np.exp(-1j * pp) * fp
    m[0, 2] = np.exp(-1j * pp) * fm
    m[1, 3] = np.exp(-1j * pm) * fm
    m[2, 3] = -np.exp(-1j * pm) * fp
    m = m + m.conj().T
    return -(np.sqrt(3.0) / 2.0) * omega_1 * m


def ix_quad_picture_elementwise(omega: float, t: float) -> np.ndarray:
    """Interaction-picture Ix for spin 3/2, built element by element.

    Satellite elements carry exp(+-i omega t); the central block is static.
    """
    e = np.exp(1j * omega * t)
    m = np.zeros((4, 4), dtype=complex)
    m[0, 1] = np.sqrt(3) / 2 * e
    m[1, 0] = np.sqrt(3) / 2 * e.conjugate()
    m[1, 2] = m[2, 1] = 1.0
    m[2, 3] = np.sqrt(3) / 2 * e.conjugate()
    m[3, 2] = np.sqrt(3) / 2 * e
    return m
