import logging

import numpy as np
from scipy.linalg import eigvals

from wqed.exceptions import DomainError

logger = logging.getLogger(__name__)

# two-qubit basis order used throughout: |ee>, |eg>, |ge>, |gg>
BASIS = ('ee', 'eg', 'ge', 'gg')

SIGMA_Y = np.array([[0.0, -1j], [1j, 0.0]])
SPIN_FLIP = np.kron(SIGMA_Y, SIGMA_Y)


def reduced_density_matrix(c_a: complex, c_b: complex, photon_weight: float = None) -> np.ndarray:
    """
    Atomic density matrix of a single-excitation state after tracing out the field.

    Args:
        c_a: amplitude of |e_A g_B> (vacuum)
        c_b: amplitude of |g_A e_B> (vacuum)
        photon_weight: norm of the one-photon part; defaults to 1 - |c_a|^2 - |c_b|^2

    Returns:
        4x4 complex matrix in the |ee>, |eg>, |ge>, |gg> basis
    """
    if photon_weight is None:
        photon_weight = max(0.0, 1.0 - abs(c_a) ** 2 - abs(c_b) ** 2)
    amplitudes = np.array([c_a, c_b], dtype=complex)
    rho = np.zeros((4, 4), dtype=complex)
    rho[1:3, 1:3] = np.outer(amplitudes, amplitudes.conj())
    rho[3, 3] = photon_weight
    return rho


def concurrence(rho: np.ndarray) -> float:
    """
    Concurrence of a two-qubit density matrix from the eigenvalues of
    rho (sy x sy) rho* (sy x sy).
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DomainError(f"concurrence needs a 4x4 density matrix, got shape {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=1e-10):
        raise DomainError("density matrix is not Hermitian")
    trace = np.trace(rho).real
    if not abs(trace - 1.0) < 1e-8:
        raise DomainError(f"density matrix must have unit trace, got {trace}")

    rho_tilde = rho @ SPIN_FLIP @ rho.conj() @ SPIN_FLIP
    # abs guards the square root against tiny negative round-off
    values = np.abs(np.sort(np.real(eigvals(rho_tilde))))
    roots = np.sqrt(values)
    return float(max(0.0, roots[3] - roots[2] - roots[1] - roots[0]))
