import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from django.conf import settings

from dispersion.params import ModelParams
from dispersion.relations import DispersionRelation, massive_dispersion, require_resonant_wavenumber
from selfenergy.evaluator import sigma, sigma_cut, sigma_cut_closed_form
from wqed.exceptions import ConvergenceError, DomainError

logger = logging.getLogger(__name__)


@dataclass
class PoleResult:
    """
    A pole z_p = E_p - i gamma_p / 2 of the resolvent on the second sheet.
    """
    z: complex
    sector: int
    converged: bool
    iterations: int
    defect: float
    method: str = 'newton'
    tags: List[str] = field(default_factory=list)
    history: List[complex] = field(default_factory=list, repr=False)

    @property
    def energy(self) -> float:
        return float(self.z.real)

    @property
    def gamma(self) -> float:
        return float(-2.0 * self.z.imag)

    def as_dict(self) -> Dict:
        return {
            'sector': self.sector,
            'E_p': self.energy,
            'gamma_p': self.gamma,
            'defect': self.defect,
            'iterations': self.iterations,
            'converged': self.converged,
            'method': self.method,
            'tags': ','.join(self.tags),
        }


def _scale(params: ModelParams, dispersion: Optional[DispersionRelation]) -> float:
    if dispersion is None:
        return params.mass
    if dispersion.is_massive:
        return dispersion.mass
    return max(abs(dispersion.omega_min), 1.0)


def _threshold(params: ModelParams, dispersion: Optional[DispersionRelation]) -> float:
    return params.mass if dispersion is None else dispersion.omega_min


def pole_equation_defect(params: ModelParams, s: int, z,
                         dispersion: Optional[DispersionRelation] = None) -> complex:
    """z - omega0 - lambda^2 Sigma_s^II(z); a root is a pole of the resolvent"""
    z = complex(z)
    if params.lam == 0:
        return z - params.omega0
    value = sigma(params, s, z, sheet='II', dispersion=dispersion)
    return z - params.omega0 - params.lam ** 2 * value.total


def continued_pole_defect(params: ModelParams, s: int, z) -> complex:
    """
    Same defect written with the continued residue of the massive relation,

        z - omega0 - lambda^2 (Sigma^cut(z) - 2 pi i (1 + s e^{i k0 d}) / k0)

    with k0 taken from the lower half plane. Used to cross-check the
    sheet-II composition.
    """
    z = complex(z)
    disp = massive_dispersion(params.mass)
    k = disp.k0_lower(z)
    pole = -2j * np.pi * (1.0 + s * np.exp(1j * k * params.distance)) / k
    return z - params.omega0 - params.lam ** 2 * (sigma_cut(params, s, z) + pole)


class NewtonPoleSolver:
    """
    Damped Newton iteration on the pole equation.

    The derivative is a central difference with a real step, which is exact
    to O(h^2) for the analytic defect. Iterates are kept in Im z <= 0 and
    Re z >= omega_min + THRESHOLD_CLAMP * scale. An iterate that Newton keeps
    pushing below that floor ends the search with a 'threshold' result.
    """
    pinned_limit = 3

    def __init__(self, params: ModelParams, s: int,
                 dispersion: Optional[DispersionRelation] = None):
        self.params = params
        self.s = s
        self.dispersion = dispersion
        self.scale = _scale(params, dispersion)
        self.floor = _threshold(params, dispersion) + settings.THRESHOLD_CLAMP * self.scale
        self.step = settings.NEWTON_STEP * self.scale
        self.max_iter = settings.NEWTON_MAX_ITER

    def clamp(self, z: complex) -> complex:
        return complex(max(z.real, self.floor), min(z.imag, 0.0))

    def defect(self, z: complex) -> complex:
        return pole_equation_defect(self.params, self.s, z, self.dispersion)

    def tolerance(self, z: complex) -> float:
        return settings.NEWTON_TOL * max(self.scale, abs(z))

    def derivative(self, z: complex) -> complex:
        h = self.step
        return (self.defect(z + h) - self.defect(z - h)) / (2.0 * h)

    def solve(self, guess: complex) -> PoleResult:
        z = complex(guess)
        if z.imag > settings.NEWTON_TOL * self.scale:
            raise DomainError(
                f"initial guess {z} lies above the real axis; second-sheet poles have Im z <= 0"
            )
        z = self.clamp(z)
        f = self.defect(z)
        history = [z]
        pinned = 0

        for iteration in range(1, self.max_iter + 1):
            if abs(f) <= self.tolerance(z):
                return PoleResult(z, self.s, True, iteration - 1, abs(f), history=history,
                                  tags=list(self.params.tags))

            slope = self.derivative(z)
            if slope == 0:
                break
            step = -f / slope
            pinned = pinned + 1 if z.real <= self.floor and (z + step).real < self.floor else 0
            if pinned >= self.pinned_limit:
                logger.warning(f"Pole search s={self.s} pinned at the threshold floor {self.floor}: z={z}")
                return PoleResult(z, self.s, False, iteration, abs(f), method='threshold',
                                  tags=list(self.params.tags) + ['threshold'], history=history)
            damping = 1.0
            while True:
                trial = self.clamp(z + damping * step)
                f_trial = self.defect(trial)
                if abs(f_trial) < abs(f) or damping < 1e-6:
                    break
                damping *= 0.5
            logger.debug(f"Newton s={self.s} it={iteration} z={trial} |f|={abs(f_trial)} damping={damping}")
            z, f = trial, f_trial
            history.append(z)

        if abs(f) <= self.tolerance(z):
            return PoleResult(z, self.s, True, self.max_iter, abs(f), history=history,
                              tags=list(self.params.tags))

        logger.error(f"Pole search s={self.s} did not converge from {guess}: last z={z}, |f|={abs(f)}")
        raise ConvergenceError(
            f"pole search in sector {self.s} did not converge in {self.max_iter} iterations",
            diagnostics={'history': history, 'defect': abs(f), 'guess': guess},
        )


def find_pole(params: ModelParams, s: int, initial_guess: Optional[complex] = None,
              dispersion: Optional[DispersionRelation] = None) -> PoleResult:
    """
    Newton search for the sector-s pole on the second sheet.

    Args:
        params: model parameters
        s: sector (+1 or -1)
        initial_guess: starting point; defaults to the perturbative pole
        dispersion: optional non-massive relation

    Returns:
        converged PoleResult, or an unconverged one tagged 'threshold' when
        the root lies below the threshold floor
    """
    if s not in (1, -1):
        raise DomainError(f"sector must be +1 or -1, got {s}")
    if params.lam == 0:
        return PoleResult(complex(params.omega0), s, True, 0, 0.0, tags=list(params.tags))

    if initial_guess is None:
        initial_guess = perturbative_pole(params, s, dispersion).z

    solver = NewtonPoleSolver(params, s, dispersion)
    result = solver.solve(initial_guess)
    if 'threshold' not in result.tags and result.energy - solver.floor < settings.THRESHOLD_CLAMP * solver.scale:
        logger.warning(f"Pole {result.z} in sector {s} sits at the threshold")
        result.tags.append('threshold')
    return result


def perturbative_pole(params: ModelParams, s: int,
                      dispersion: Optional[DispersionRelation] = None) -> PoleResult:
    """
    Real and imaginary parts of the pole equation decoupled at order lambda^2.

    E_p solves E = omega0 + lambda^2 Re Sigma_s^II(E) on the real axis by
    damped fixed-point iteration; gamma_p = -2 lambda^2 Im Sigma_s^II(E_p).
    For the massive relation the cut part uses its closed form.
    """
    if s not in (1, -1):
        raise DomainError(f"sector must be +1 or -1, got {s}")
    if params.lam == 0:
        return PoleResult(complex(params.omega0), s, True, 0, 0.0, method='perturbative',
                          tags=list(params.tags))

    disp = dispersion or massive_dispersion(params.mass)
    scale = _scale(params, dispersion)
    floor = disp.omega_min + settings.THRESHOLD_CLAMP * scale
    lam2 = params.lam ** 2
    d = params.distance

    def continued(E):
        if disp.is_massive:
            k = float(np.real(disp.k0(E)))
            re = sigma_cut_closed_form(params, E).real + 2.0 * np.pi * s * np.sin(k * d) / k
            im = -2.0 * np.pi * (1.0 + s * np.cos(k * d)) / k
            return complex(re, im)
        return sigma(params, s, E, sheet='II', dispersion=disp).total

    tags = list(params.tags)
    energy = max(params.omega0, floor)
    residual = np.inf
    damping = 1.0
    history = [complex(energy)]
    for iteration in range(1, settings.FIXED_POINT_MAX_ITER + 1):
        target = params.omega0 + lam2 * continued(energy).real
        new_residual = abs(target - energy)
        if new_residual <= settings.FIXED_POINT_TOL * scale:
            break
        if energy <= floor and target < floor:
            break
        if new_residual > residual:
            damping *= 0.5
        residual = new_residual
        energy = max(energy + damping * (target - energy), floor)
        history.append(complex(energy))
    else:
        raise ConvergenceError(
            f"perturbative pole in sector {s} did not reach a fixed point",
            diagnostics={'history': history, 'residual': residual},
        )

    if energy <= floor:
        logger.warning(f"Perturbative pole in sector {s} pinned at the threshold clamp {floor}")
        tags.append('threshold')

    gamma = -2.0 * lam2 * continued(energy).imag
    z = complex(energy, -0.5 * gamma)
    try:
        defect = abs(pole_equation_defect(params, s, z, dispersion))
    except DomainError:
        defect = np.inf
    return PoleResult(z, s, True, iteration, defect, method='perturbative', tags=tags, history=history)


def rate_ratio(params: ModelParams, n: int, d_actual: float,
               dispersion: Optional[DispersionRelation] = None) -> float:
    """gamma^(s) / gamma^(u) = k_bar^2 (d - d_n)^2 / 4, independent of the dispersion"""
    if n < 1:
        raise DomainError(f"resonance index must be >= 1, got {n}")
    k_bar = require_resonant_wavenumber(params, dispersion)
    d_n = n * np.pi / k_bar
    return 0.25 * k_bar ** 2 * (d_actual - d_n) ** 2


def perturbative_rates(params: ModelParams, n: Optional[int] = None,
                       dispersion: Optional[DispersionRelation] = None) -> Dict:
    """
    Leading-order rates near the resonance closest to ``params.distance``.

    Returns:
        dict with k_bar, n, d_n, the stable sector and the two rates; the
        stable rate uses the small-detuning form
    """
    disp = dispersion or massive_dispersion(params.mass)
    k_bar = require_resonant_wavenumber(params, disp)
    if n is None:
        n = max(1, int(round(k_bar * params.distance / np.pi)))
    d_n = n * np.pi / k_bar
    density = float(np.real(disp.pole_denominator(k_bar)))
    lam2 = params.lam ** 2
    return {
        'k_bar': k_bar,
        'n': n,
        'd_n': d_n,
        'stable_sector': 1 if n % 2 else -1,
        'gamma_unstable': 8.0 * np.pi * lam2 / density,
        'gamma_stable': 2.0 * np.pi * lam2 * k_bar ** 2 * (params.distance - d_n) ** 2 / density,
    }
