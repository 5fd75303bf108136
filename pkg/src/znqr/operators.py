"""Dense complex operator algebra for small spin systems.

Everything here works on plain complex ndarrays (row-major, double
precision).  Energies are angular frequencies (rad/s) and hbar = 1
throughout, so a Hermitian generator H evolves as exp(-i H t).
"""

import numpy as np

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-12


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def hermiticity_defect(a: np.ndarray) -> float:
    """Max-norm distance from a to its conjugate transpose."""
    return float(np.max(np.abs(a - dagger(a))))


def unitarity_defect(a: np.ndarray) -> float:
    """Max-norm distance of a @ a_dagger from the identity."""
    return float(np.max(np.abs(a @ dagger(a) - np.eye(a.shape[0]))))


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    # Tolerance scales with the matrix so rad/s-sized entries are not
    # rejected for eps-level asymmetry.
    return hermiticity_defect(a) < tol * max(1.0, float(np.max(np.abs(a))))


def is_unitary(a: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    return unitarity_defect(a) < tol


def require_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL, name: str = "operator"):
    if not is_hermitian(a, tol):
        raise ValueError(f"{name} is not Hermitian within {tol:g} (scaled max-norm)")


def spin_operators(two_i: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cartesian angular-momentum matrices (Ix, Iy, Iz) for spin I = two_i/2.

    The basis is ordered by decreasing magnetic quantum number,
    m = +I, I-1, ..., -I, and the matrices are dimensionless, so
    [Ix, Iy] = i Iz.

    Args:
        two_i: twice the spin quantum number (two_i = 3 for spin 3/2).

    Returns:
        Tuple (Ix, Iy, Iz) of (two_i+1) x (two_i+1) complex arrays.
    """
    if int(two_i) != two_i or two_i < 1:
        raise ValueError(f"two_i must be a positive integer, got {two_i!r}")
    two_i = int(two_i)
    spin = two_i / 2.0
    n = two_i + 1
    m = spin - np.arange(n)
    # <m+1| I+ |m> = sqrt(I(I+1) - m(m+1)); superdiagonal in descending-m order.
    raise_coeff = np.sqrt(spin * (spin + 1) - m[1:] * (m[1:] + 1))
    i_plus = np.zeros((n, n), dtype=complex)
    i_plus[np.arange(n - 1), np.arange(1, n)] = raise_coeff
    i_minus = i_plus.conj().T
    ix = (i_plus + i_minus) / 2.0
    iy = (i_plus - i_minus) / 2.0j
    iz = np.diag(m).astype(complex)
    return ix, iy, iz


def evolve_operator(h: np.ndarray, t: float) -> np.ndarray:
    """Unitary propagator exp(-i H t) of a Hermitian generator H (rad/s).

    Uses the Hermitian eigendecomposition, which keeps the result unitary
    to rounding regardless of t.
    """
    require_hermitian(h, name="generator")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ dagger(v)


def hs_overlap(a: np.ndarray, b: np.ndarray):
    """Hilbert-Schmidt inner product Tr(a_dagger @ b)."""
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product of two square operators (2x2 inputs give the 4x4 two-qubit embedding)."""
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("kron expects square operators")
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValueError("kron expects square operators")
    return np.kron(a, b)
