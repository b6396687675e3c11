"""
Exact time evolution of the discretized model and analysis of its output.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.signal import find_peaks
from sklearn.linear_model import LinearRegression

from wqed.exceptions import DomainError
from .discretized import DiscretizedModel
from .entanglement import concurrence, reduced_density_matrix

logger = logging.getLogger(__name__)

# times evaluated per matrix product
TIME_CHUNK = 256


@dataclass
class SingleExcitationState:
    """c_A |e_A g_B> + c_B |g_A e_B> + sum_j phi_j |g g; k_j>"""
    model: DiscretizedModel = field(repr=False)
    c_a: complex
    c_b: complex
    phi: np.ndarray = field(repr=False)

    @classmethod
    def from_vector(cls, model: DiscretizedModel, vector: np.ndarray) -> 'SingleExcitationState':
        vector = np.asarray(vector, dtype=complex)
        return cls(model, complex(vector[0]), complex(vector[1]), vector[2:].copy())

    @classmethod
    def excited_a(cls, model: DiscretizedModel) -> 'SingleExcitationState':
        return cls(model, 1.0 + 0j, 0j, np.zeros(model.modes, dtype=complex))

    @classmethod
    def excited_b(cls, model: DiscretizedModel) -> 'SingleExcitationState':
        return cls(model, 0j, 1.0 + 0j, np.zeros(model.modes, dtype=complex))

    @classmethod
    def bell(cls, model: DiscretizedModel, sign: int = 1) -> 'SingleExcitationState':
        if sign not in (1, -1):
            raise DomainError(f"Bell sign must be +1 or -1, got {sign}")
        root = 1.0 / np.sqrt(2.0)
        return cls(model, root + 0j, sign * root + 0j, np.zeros(model.modes, dtype=complex))

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate(([self.c_a, self.c_b], self.phi))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))

    @property
    def atomic_weight(self) -> float:
        return float(abs(self.c_a) ** 2 + abs(self.c_b) ** 2)

    @property
    def photon_weight(self) -> float:
        return float(np.sum(np.abs(self.phi) ** 2))

    @property
    def energy(self) -> float:
        vector = self.vector
        return float(np.real(vector.conj() @ self.model.hamiltonian @ vector) / self.norm ** 2)

    def concurrence(self) -> float:
        scale = self.norm
        return concurrence(reduced_density_matrix(self.c_a / scale, self.c_b / scale))


@dataclass
class Evolution:
    """Emitter amplitudes sampled on a time grid"""
    times: np.ndarray
    c_a: np.ndarray
    c_b: np.ndarray
    model: DiscretizedModel = field(repr=False)
    coefficients: np.ndarray = field(repr=False)
    warnings: List[str] = field(default_factory=list)

    @property
    def population_a(self) -> np.ndarray:
        return np.abs(self.c_a) ** 2

    @property
    def population_b(self) -> np.ndarray:
        return np.abs(self.c_b) ** 2

    @property
    def atomic_population(self) -> np.ndarray:
        return self.population_a + self.population_b

    @property
    def concurrence(self) -> np.ndarray:
        """Spin-flip concurrence of the reduced emitter state at every sample"""
        return np.array([concurrence(reduced_density_matrix(a, b)) for a, b in zip(self.c_a, self.c_b)])

    def state_at(self, t: float) -> SingleExcitationState:
        energies, vectors = self.model.diagonalize()
        vector = vectors @ (np.exp(-1j * energies * t) * self.coefficients)
        return SingleExcitationState.from_vector(self.model, vector)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            't': self.times,
            'population_a': self.population_a,
            'population_b': self.population_b,
            'atomic_population': self.atomic_population,
            'concurrence': self.concurrence,
        })


def evolve(model: DiscretizedModel, initial: SingleExcitationState, times) -> Evolution:
    """
    Propagate ``initial`` through the eigenbasis of the model.

    Times beyond the recurrence time L carry the 'recurrence' warning.
    """
    times = np.asarray(times, dtype=float)
    energies, vectors = model.diagonalize()
    coefficients = vectors.conj().T @ initial.vector
    atomic = vectors[:2]

    amplitudes = np.empty((2, times.size), dtype=complex)
    for start in range(0, times.size, TIME_CHUNK):
        chunk = times[start:start + TIME_CHUNK]
        phases = np.exp(-1j * np.outer(energies, chunk)) * coefficients[:, None]
        amplitudes[:, start:start + TIME_CHUNK] = atomic @ phases

    result = Evolution(times, amplitudes[0], amplitudes[1], model, coefficients)
    if times.size and times.max() > model.recurrence_time:
        logger.warning(
            f"Evolution reaches t={times.max()} beyond the recurrence time L={model.recurrence_time}"
        )
        result.warnings.append('recurrence')
    return result


def field_profile(state: SingleExcitationState, x_grid, energy: Optional[float] = None) -> pd.DataFrame:
    """
    Photon amplitude and field energy density on a position grid.

    pole_density is E |phi(x)|^2; full_density adds the three field terms
    with their own mode weights omega, k^2 / omega and M^2 / omega.
    """
    model = state.model
    x = np.asarray(x_grid, dtype=float)
    waves = np.exp(1j * np.outer(x, model.k))
    amplitude = waves @ state.phi / np.sqrt(model.box_length)
    if energy is None:
        energy = state.energy

    scale = np.sqrt(model.delta_k / (4.0 * np.pi))
    mass = model.params.mass
    terms = (
        np.sqrt(model.omega),
        model.k / np.sqrt(model.omega),
        mass / np.sqrt(model.omega),
    )
    full = sum(np.abs(waves @ (scale * weight * state.phi)) ** 2 for weight in terms)
    return pd.DataFrame({
        'x': x,
        'amplitude': np.abs(amplitude),
        'pole_density': energy * np.abs(amplitude) ** 2,
        'full_density': full,
    })


def _window(times, values, window: Optional[Tuple[float, float]]):
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is not None:
        mask = (times >= window[0]) & (times <= window[1])
        times, values = times[mask], values[mask]
    return times, values


def exponential_rate(times, values, window: Optional[Tuple[float, float]] = None) -> float:
    """Rate r of values ~ exp(-r t) from a least-squares fit of log(values)"""
    times, values = _window(times, values, window)
    keep = values > 0
    if keep.sum() < 2:
        raise DomainError("exponential fit needs at least two positive samples")
    model = LinearRegression().fit(times[keep].reshape(-1, 1), np.log(values[keep]))
    return float(-model.coef_[0])


def oscillation_period(times, values, window: Optional[Tuple[float, float]] = None,
                       prominence: Optional[float] = None) -> float:
    """Mean spacing of prominent maxima"""
    times, values = _window(times, values, window)
    if prominence is None:
        prominence = 0.5 * np.ptp(values)
    peaks, _ = find_peaks(values, prominence=prominence)
    if peaks.size < 2:
        raise DomainError(f"found {peaks.size} maxima, need at least two to measure a period")
    return float(np.mean(np.diff(times[peaks])))


def plateau(times, values, window: Tuple[float, float]) -> float:
    """Mean of values within the window"""
    _, values = _window(times, values, window)
    if values.size == 0:
        raise DomainError(f"no samples inside window {window}")
    return float(np.mean(values))
