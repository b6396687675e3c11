"""
Bound states in the continuum at the resonant distances d_n = n pi / k_bar.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd
from django.conf import settings
from scipy.integrate import trapezoid

from dispersion.params import ModelParams
from dispersion.relations import (
    DispersionRelation,
    massive_dispersion,
    require_resonant_wavenumber,
)
from oracle.entanglement import concurrence, reduced_density_matrix
from selfenergy.evaluator import sigma, sigma_cut
from selfenergy.quadrature import real_quad
from wqed.exceptions import ConvergenceError, DomainError, ResonanceAbsentError

logger = logging.getLogger(__name__)

# k_bar |d - d_n| below this counts as resonant
RESONANCE_TOLERANCE = 1e-3


def bell_sector(n: int) -> int:
    return 1 if n % 2 else -1


@dataclass
class ResonantBoundState:
    """Bound state of resonance n and its atomic population"""
    n: int
    sector: int
    k_bar: float
    d_n: float
    energy: float
    p_n: float
    params: ModelParams
    fixed_point_residual: float
    leading_k_bar: float
    p_n_quadrature: Optional[float] = None
    dispersion: Optional[DispersionRelation] = field(default=None, repr=False)
    tags: List[str] = field(default_factory=list)

    @property
    def concurrence(self) -> float:
        return 0.5 * self.p_n ** 2

    def as_dict(self) -> dict:
        return {
            'omega0': self.params.omega0,
            'n': self.n,
            'sector': self.sector,
            'k_bar': self.k_bar,
            'd_n': self.d_n,
            'energy': self.energy,
            'p_n': self.p_n,
            'concurrence': self.concurrence,
        }


class ResonanceSolver:
    """
    Fixed point E = omega0 + lambda^2 Re Sigma_s(E) with the distance tied to E
    through k0(E) d = n pi.

    At the resonance the pole term of the self-energy vanishes identically,
    so for the massive relation only the cut part is evaluated.
    """

    def __init__(self, params: ModelParams, n: int, dispersion: Optional[DispersionRelation] = None):
        self.params = params
        self.n = n
        self.sector = bell_sector(n)
        self.dispersion = dispersion
        self.disp = dispersion or massive_dispersion(params.mass)
        self.scale = self.disp.mass if self.disp.is_massive else max(abs(self.disp.omega_min), 1.0)

    def wavenumber(self, energy: float) -> float:
        if energy <= self.disp.omega_min:
            raise ResonanceAbsentError(
                f"dressed energy {energy} fell below threshold {self.disp.omega_min}"
            )
        return float(np.real(self.disp.k0(energy)))

    def self_energy(self, energy: float) -> float:
        k = self.wavenumber(energy)
        resonant = self.params.with_distance(self.n * np.pi / k)
        if self.disp.is_massive:
            return sigma_cut(resonant, self.sector, energy).real
        return sigma(resonant, self.sector, energy, side=1, dispersion=self.disp).total.real

    def residual(self, energy: float) -> float:
        return energy - self.params.omega0 - self.params.lam ** 2 * self.self_energy(energy)

    def solve(self, start: float) -> float:
        energy = start
        history = [energy]
        damping = 1.0
        previous = np.inf
        for _ in range(settings.FIXED_POINT_MAX_ITER):
            step = -self.residual(energy)
            if abs(step) <= settings.FIXED_POINT_TOL * self.scale:
                return energy
            if abs(step) > previous:
                damping *= 0.5
            previous = abs(step)
            energy += damping * step
            history.append(energy)

        logger.error(f"Resonant energy for n={self.n} did not settle: last E={energy}")
        raise ConvergenceError(
            f"resonant fixed point for n={self.n} did not converge",
            diagnostics={'history': history},
        )


def _closed_form_population(params: ModelParams, n: int, k_bar: float, energy: float,
                            disp: DispersionRelation) -> float:
    lam2 = params.lam ** 2
    if disp.is_massive:
        return 1.0 / (1.0 + n * np.pi * 2.0 * np.pi * lam2 * disp.mass / k_bar ** 3)
    slope = float(np.real(disp.omega_prime(k_bar)))
    return 1.0 / (1.0 + 2.0 * np.pi * lam2 * (n * np.pi / k_bar) / (energy * slope ** 2))


def solve_resonant_state(params: ModelParams, n: int,
                         dispersion: Optional[DispersionRelation] = None,
                         quadrature: bool = True) -> ResonantBoundState:
    """
    Resonant bound state of index n for (omega0, lambda, M); the distance in
    ``params`` is ignored and replaced by the self-consistent d_n.

    Args:
        params: model parameters
        n: resonance index, n >= 1
        dispersion: optional non-massive relation
        quadrature: also compute p_n from the normalization integral

    Returns:
        ResonantBoundState with p_n from the closed form
    """
    if n < 1:
        raise DomainError(f"resonance index must be >= 1, got {n}")
    disp = dispersion or massive_dispersion(params.mass)
    leading = require_resonant_wavenumber(params, disp)
    base = params.with_distance(0.0)

    solver = ResonanceSolver(base, n, dispersion)
    energy = solver.solve(float(np.real(disp.omega(leading))))
    k_bar = solver.wavenumber(energy)
    d_n = n * np.pi / k_bar
    residual = abs(solver.residual(energy))

    p_n = _closed_form_population(params, n, k_bar, energy, disp)
    tags = list(params.tags)
    state = ResonantBoundState(
        n=n,
        sector=solver.sector,
        k_bar=k_bar,
        d_n=d_n,
        energy=energy,
        p_n=p_n,
        params=base.with_distance(d_n),
        fixed_point_residual=residual,
        leading_k_bar=leading,
        dispersion=dispersion,
        tags=tags,
    )
    if quadrature:
        state.p_n_quadrature = normalization_population(state)
    logger.info(f"Resonance n={n}: E={energy!r}, k_bar={k_bar!r}, d_n={d_n!r}, p_n={p_n!r}")
    return state


def normalization_population(state: ResonantBoundState) -> float:
    """
    p_n from the normalization of the bound state,

        1/p_n = 1 + 2 lambda^2 int_0^inf dk (1 + s cos kd) / (omega (E - omega)^2)

    With k d = n pi + u d (u = k - k_bar) the numerator is 2 sin^2(u d / 2), and
    the double zero at k_bar is divided out before integrating.
    """
    disp = state.dispersion or massive_dispersion(state.params.mass)
    lam2 = state.params.lam ** 2
    k_bar, d, s = state.k_bar, state.d_n, state.sector
    energy = float(np.real(disp.omega(k_bar)))

    def secant(k):
        u = k - k_bar
        if abs(u) > 1e-4 * k_bar:
            return (float(np.real(disp.omega(k))) - energy) / u
        return float(np.real(disp.omega_prime(k_bar + 0.5 * u)))

    def head(k):
        w = float(np.real(disp.omega(k)))
        ratio = 0.5 * d * np.sinc((k - k_bar) * d / (2.0 * np.pi)) / secant(k)
        return 4.0 * lam2 * ratio ** 2 / w

    def tail(k):
        w = float(np.real(disp.omega(k)))
        return 2.0 * lam2 / (w * (energy - w) ** 2)

    split = 2.0 * k_bar
    total = real_quad(head, 0.0, split, points=[k_bar], label='normalization head')
    total += real_quad(tail, split, np.inf, label='normalization tail')
    total += s * real_quad(tail, split, np.inf, weight='cos', wvar=d, label='normalization tail')
    return 1.0 / (1.0 + total)


@dataclass
class EnergyDensityProfile:
    """Pole-approximated field energy density of a resonant bound state"""
    x: np.ndarray
    density: np.ndarray
    prefactor: float
    dressed_prefactor: float
    k_bar: float
    d_n: float

    def integral(self) -> float:
        return float(trapezoid(self.density, self.x))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'x': self.x, 'density': self.density})


def energy_density(state: ResonantBoundState, x_grid=None, points: int = 421) -> EnergyDensityProfile:
    """
    (2 sqrt(pi) lambda M / k_bar)^2 p_n sin^2(k_bar x) between the emitters and 0 outside.

    The default grid extends ENERGY_DENSITY_MARGIN * d_n beyond each emitter.
    """
    if x_grid is None:
        margin = settings.ENERGY_DENSITY_MARGIN * state.d_n
        x_grid = np.linspace(-margin, state.d_n + margin, points)
    x = np.asarray(x_grid, dtype=float)

    disp = state.dispersion or massive_dispersion(state.params.mass)
    mass = disp.mass if disp.is_massive else disp.omega_min
    lam = state.params.lam
    prefactor = (2.0 * np.sqrt(np.pi) * lam * mass / state.k_bar) ** 2 * state.p_n
    dressed = (2.0 * np.sqrt(np.pi) * lam * state.energy / state.k_bar) ** 2 * state.p_n

    inside = (x >= 0.0) & (x <= state.d_n)
    density = np.where(inside, prefactor * np.sin(state.k_bar * x) ** 2, 0.0)
    # exact nodes at the emitters
    density[np.isclose(x, 0.0, atol=1e-14) | np.isclose(x, state.d_n, rtol=1e-14, atol=0.0)] = 0.0
    return EnergyDensityProfile(x, density, prefactor, dressed, state.k_bar, state.d_n)


@dataclass
class AsymptoticAtomicState:
    """Long-time atomic density matrix after relaxation at a resonant distance"""
    rho: np.ndarray
    sector: int
    p_n: float
    bell_weight: float

    @property
    def probability_bell(self) -> float:
        return self.bell_weight

    @property
    def probability_ground(self) -> float:
        return float(self.rho[3, 3].real)

    @property
    def concurrence(self) -> float:
        return concurrence(self.rho)


INITIAL_STATES = ('excited_a', 'excited_b', 'bell')


def asymptotic_state(params: ModelParams, n: Optional[int] = None, initial: str = 'excited_a',
                     dispersion: Optional[DispersionRelation] = None) -> AsymptoticAtomicState:
    """
    Atomic state left once the decaying sector has radiated away.

    From |e_A g_B> the stable Bell state keeps weight p_n^2 / 2, the rest ends
    in |g_A g_B> with a photon; starting from the stable Bell state itself
    the weight is p_n^2.
    """
    if initial not in INITIAL_STATES:
        raise DomainError(f"initial state must be one of {INITIAL_STATES}, got {initial!r}")
    disp = dispersion or massive_dispersion(params.mass)
    leading = require_resonant_wavenumber(params, disp)
    if n is None:
        n = max(1, int(round(leading * params.distance / np.pi)))

    state = solve_resonant_state(params, n, dispersion, quadrature=False)
    detuning = state.k_bar * abs(params.distance - state.d_n)
    if detuning > RESONANCE_TOLERANCE:
        raise DomainError(
            f"d={params.distance} is off resonance (k_bar |d - d_n| = {detuning:.3g}); "
            f"use the discretized-mode dynamics instead",
            diagnostics={'d_n': state.d_n, 'detuning': detuning},
        )

    p = state.p_n
    if initial == 'bell':
        overlap = np.sqrt(p)
    elif initial == 'excited_b':
        overlap = state.sector * np.sqrt(0.5 * p)
    else:
        overlap = np.sqrt(0.5 * p)
    c = overlap * np.sqrt(0.5 * p)
    rho = reduced_density_matrix(c, state.sector * c)
    weight = float(abs(c) ** 2 * 2.0)
    return AsymptoticAtomicState(rho, state.sector, p, weight)
