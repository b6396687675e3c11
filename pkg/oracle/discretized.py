"""
Periodic-box discretization of the single-excitation sector.

Basis order: |e_A g_B>, |g_A e_B>, then one photon in mode k_j = 2 pi j / L,
j = -(N-1)/2 ... (N-1)/2. Emitter A sits at x = 0, emitter B at x = d.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np
from django.conf import settings
from scipy.linalg import eigh

from dispersion.params import ModelParams
from dispersion.relations import massive_dispersion, resonant_wavenumber
from wqed.exceptions import DomainError

logger = logging.getLogger(__name__)


def default_box(params: ModelParams, modes: Optional[int] = None) -> Tuple[float, int]:
    """
    Box length and mode count for the oracle.

    L covers ORACLE_BOX_FACTOR emitter separations (stretched by 1/k_bar for
    slow photons) and ORACLE_RECURRENCE_FACTOR unstable lifetimes; N is raised
    to the smallest odd count reaching k_max = ORACLE_KMAX_FACTOR * M.
    """
    length = settings.ORACLE_BOX_FACTOR * max(params.distance, 1.0 / params.mass)
    k_bar = resonant_wavenumber(params)
    if k_bar is not None:
        length *= max(1.0, 1.0 / k_bar)
        if params.lam > 0:
            gamma = 8.0 * np.pi * params.lam ** 2 / k_bar
            length = max(length, settings.ORACLE_RECURRENCE_FACTOR / gamma)

    count = int(modes or settings.ORACLE_MODES)
    needed = int(np.ceil(settings.ORACLE_KMAX_FACTOR * params.mass * length / np.pi))
    if count < needed:
        count = needed
    if count % 2 == 0:
        count += 1
    return float(length), count


class DiscretizedModel:
    """
    Hermitian (2 + N) x (2 + N) Hamiltonian of the two emitters and N modes.

    Diagonalization happens once, on first use.
    """

    def __init__(self, params: ModelParams, box_length: float, modes: int):
        self.params = params
        self.box_length = float(box_length)
        self.modes = int(modes)

        index = np.arange(self.modes) - (self.modes - 1) // 2
        self.k = 2.0 * np.pi * index / self.box_length
        self.omega = massive_dispersion(params.mass).omega(self.k)
        self.couplings = params.lam * np.sqrt(self.delta_k) / np.sqrt(self.omega)

        size = self.dimension
        hamiltonian = np.zeros((size, size), dtype=complex)
        hamiltonian[0, 0] = hamiltonian[1, 1] = params.omega0
        hamiltonian[2:, 2:][np.diag_indices(self.modes)] = self.omega
        hamiltonian[0, 2:] = self.couplings
        hamiltonian[1, 2:] = self.couplings * np.exp(1j * self.k * params.distance)
        hamiltonian[2:, 0] = hamiltonian[0, 2:].conj()
        hamiltonian[2:, 1] = hamiltonian[1, 2:].conj()
        self.hamiltonian = hamiltonian

        self._eigenvalues = None
        self._eigenvectors = None

    @property
    def dimension(self) -> int:
        return self.modes + 2

    @property
    def delta_k(self) -> float:
        return 2.0 * np.pi / self.box_length

    @property
    def k_max(self) -> float:
        return np.pi * self.modes / self.box_length

    @property
    def recurrence_time(self) -> float:
        return self.box_length

    def hermiticity_defect(self) -> float:
        norm = np.linalg.norm(self.hamiltonian)
        return float(np.linalg.norm(self.hamiltonian - self.hamiltonian.conj().T) / norm)

    def diagnostics(self) -> dict:
        return {
            'box_length': self.box_length,
            'modes': self.modes,
            'delta_k': self.delta_k,
            'k_max': self.k_max,
        }

    def diagonalize(self):
        if self._eigenvalues is None:
            logger.info(f"Diagonalizing {self.dimension}x{self.dimension} single-excitation Hamiltonian")
            self._eigenvalues, self._eigenvectors = eigh(self.hamiltonian)
        return self._eigenvalues, self._eigenvectors

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.diagonalize()[0]

    @property
    def eigenvectors(self) -> np.ndarray:
        return self.diagonalize()[1]

    def atomic_weights(self) -> np.ndarray:
        """|c_A|^2 + |c_B|^2 of every eigenvector"""
        vectors = self.eigenvectors
        return np.abs(vectors[0]) ** 2 + np.abs(vectors[1]) ** 2


def build(params: ModelParams, box_length: Optional[float] = None,
          modes: Optional[int] = None) -> DiscretizedModel:
    """
    Assemble the discretized model.

    Without arguments the sizing comes from ``default_box``. Explicit sizes
    are checked, never adjusted.
    """
    if box_length is None and modes is None:
        box_length, modes = default_box(params)
    elif box_length is None:
        box_length, modes = default_box(params, modes)
    else:
        modes = modes or settings.ORACLE_MODES
        if not box_length > 0:
            raise DomainError(f"box length must be positive, got {box_length}")
        if modes < 1 or modes % 2 == 0:
            raise DomainError(f"mode count must be a positive odd integer, got {modes}")
        minimum = settings.ORACLE_BOX_FACTOR * max(params.distance, 1.0 / params.mass)
        if box_length < minimum:
            raise DomainError(
                f"box length {box_length} violates L >= {settings.ORACLE_BOX_FACTOR:g} max(d, 1/M) = {minimum}"
            )
        k_max = np.pi * modes / box_length
        if k_max < settings.ORACLE_KMAX_FACTOR * params.mass:
            raise DomainError(
                f"k_max = pi N / L = {k_max} violates k_max >= {settings.ORACLE_KMAX_FACTOR:g} M"
            )

    model = DiscretizedModel(params, box_length, modes)
    logger.info(f"Oracle model: L={model.box_length}, N={model.modes}, dk={model.delta_k}, k_max={model.k_max}")
    return model


def eigen_bound_states(model: DiscretizedModel) -> List[tuple]:
    """
    Eigenpairs that behave as bound states.

    Returns every eigenpair below the threshold M and, among the eigenpairs
    above it, the one with the largest atomic weight. Each entry is
    (energy, SingleExcitationState, kind) with kind 'below_threshold' or
    'continuum'.
    """
    from .dynamics import SingleExcitationState

    energies, vectors = model.diagonalize()
    weights = model.atomic_weights()
    pairs = []
    below = np.flatnonzero(energies < model.params.mass)
    for index in below:
        state = SingleExcitationState.from_vector(model, vectors[:, index])
        pairs.append((float(energies[index]), state, 'below_threshold'))

    above = np.flatnonzero(energies >= model.params.mass)
    if above.size:
        index = above[np.argmax(weights[above])]
        state = SingleExcitationState.from_vector(model, vectors[:, index])
        pairs.append((float(energies[index]), state, 'continuum'))
    return pairs
