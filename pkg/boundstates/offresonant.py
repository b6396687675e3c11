"""
Bound states below the propagation threshold and the threshold singlet.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
from scipy.optimize import brentq

from dispersion.params import ModelParams
from wqed.exceptions import DomainError

logger = logging.getLogger(__name__)

# |alpha| + |beta| above this fraction of M - omega0 leaves the two-level picture
SHIFT_LIMIT = 0.1


def _decay_constant(params: ModelParams, energy: float) -> float:
    return float(np.sqrt(params.mass ** 2 - energy ** 2))


def lamb_shift(params: ModelParams, energy: float) -> float:
    """alpha(E): single-emitter level shift below threshold (negative)"""
    q = _decay_constant(params, energy)
    return -(params.lam ** 2 / q) * (np.pi + 2.0 * np.arctan(energy / q))


def exchange_coupling(params: ModelParams, energy: float) -> float:
    """beta(E): evanescent coupling between the emitters (negative, decays like e^{-q d})"""
    q = _decay_constant(params, energy)
    return -(params.lam ** 2 / q) * 2.0 * np.pi * np.exp(-q * params.distance)


@dataclass
class OffResonantState:
    """
    The two sub-threshold levels E+ (c_A = c_B) and E- (c_A = -c_B).

    With beta < 0 the symmetric combination is the lower one.
    """
    omega0: float
    energy_plus: float
    energy_minus: float
    alpha: float
    beta: float
    self_consistent: bool = False
    tags: List[str] = field(default_factory=list)

    @property
    def splitting(self) -> float:
        return self.energy_plus - self.energy_minus

    @property
    def oscillation_period(self) -> float:
        """Period 2 pi / |beta| of the emitter amplitudes"""
        if self.beta == 0:
            return np.inf
        return float(2.0 * np.pi / abs(self.beta))

    @property
    def coefficients(self) -> Dict[str, Tuple[float, float]]:
        root = 1.0 / np.sqrt(2.0)
        return {'plus': (root, root), 'minus': (root, -root)}

    def as_dict(self) -> dict:
        return {
            'omega0': self.omega0,
            'E_plus': self.energy_plus,
            'E_minus': self.energy_minus,
            'alpha': self.alpha,
            'beta': self.beta,
            'splitting': self.splitting,
            'oscillation_period': self.oscillation_period,
            'self_consistent': self.self_consistent,
            'tags': ','.join(self.tags),
        }


def _solve_level(params: ModelParams, s: int, guess: float) -> float:
    def equation(energy):
        return energy - params.omega0 - lamb_shift(params, energy) - s * exchange_coupling(params, energy)

    upper = params.mass * (1.0 - 1e-12)
    if equation(upper) <= 0:
        raise DomainError(
            f"no sub-threshold level in sector {s} for omega0={params.omega0}: "
            f"the level has merged into the continuum",
            diagnostics={'sector': s, 'omega0': params.omega0, 'defect_at_threshold': equation(upper)},
        )
    width = max(abs(guess - params.omega0), params.lam ** 2 / params.mass)
    lower = guess - width
    while equation(lower) > 0:
        width *= 2.0
        lower = guess - width
        if lower < -params.mass:
            raise DomainError(f"no sub-threshold level in sector {s} for omega0={params.omega0}")
    return brentq(equation, lower, upper, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def off_resonant_states(params: ModelParams, self_consistent: bool = False) -> OffResonantState:
    """
    E+- = omega0 + alpha(omega0) +- beta(omega0).

    Args:
        params: model parameters with omega0 < M
        self_consistent: solve E = omega0 + alpha(E) +- beta(E) instead of
            evaluating the shifts at omega0

    Returns:
        OffResonantState
    """
    if not params.omega0 < params.mass:
        raise DomainError(
            f"off-resonant states need omega0 < M, got omega0={params.omega0}, M={params.mass}"
        )
    omega0 = params.omega0
    alpha = lamb_shift(params, omega0)
    beta = exchange_coupling(params, omega0)
    plus = omega0 + alpha + beta
    minus = omega0 + alpha - beta

    tags = list(params.tags)
    if abs(alpha) + abs(beta) > SHIFT_LIMIT * (params.mass - omega0):
        logger.warning(
            f"omega0={omega0} is within the level shift of the threshold; the two-level picture breaks down"
        )
        tags.append('nonperturbative')

    if self_consistent:
        plus = _solve_level(params, 1, plus)
        minus = _solve_level(params, -1, minus)

    return OffResonantState(omega0, plus, minus, alpha, beta, self_consistent, tags)


@dataclass
class ThresholdReport:
    """Excitation energy at which the singlet bound state sits exactly at E = M"""
    singlet_omega0: float
    singlet_sector: int = -1
    triplet_suppressed: bool = True
    dark_state_limit: bool = False

    def as_dict(self) -> dict:
        return {
            'singlet_omega0': self.singlet_omega0,
            'singlet_sector': self.singlet_sector,
            'triplet_suppressed': self.triplet_suppressed,
            'dark_state_limit': self.dark_state_limit,
        }


def threshold_states(params: ModelParams) -> ThresholdReport:
    """
    omega0 = M - 2 lambda^2 / M + 2 pi lambda^2 d for the singlet.

    The triplet threshold state carries a suppressed atomic population and is
    only flagged.
    """
    lam2 = params.lam ** 2
    omega0 = params.mass - 2.0 * lam2 / params.mass + 2.0 * np.pi * lam2 * params.distance
    return ThresholdReport(omega0, dark_state_limit=params.distance == 0)
