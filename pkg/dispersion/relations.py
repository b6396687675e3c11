import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from wqed.exceptions import DomainError, ResonanceAbsentError, SingularInputError
from .params import ModelParams

logger = logging.getLogger(__name__)


def _clean(w):
    # -0.0 imaginary parts would flip the principal square root
    return w + 0.0j


@dataclass(frozen=True)
class DispersionRelation:
    """
    Photon dispersion omega(k) packaged with its derivative and inverse.

    ``k0`` is the principal inverse: the root of omega(k) = z with Re k0 >= 0.
    ``mass`` is only set for the massive relation, which unlocks the closed
    cut + pole evaluation of the self-energy. ``threshold_shift`` returns the
    leading-order dressed shift of the atomic energy for a given coupling,
    when one is known.
    """
    name: str
    omega: Callable
    omega_prime: Callable
    k0: Callable
    omega_min: float
    mass: Optional[float] = None
    threshold_shift: Optional[Callable] = None

    @property
    def is_massive(self) -> bool:
        return self.mass is not None

    def k0_lower(self, z):
        """Inverse continued from the lower half plane (used on sheet II)"""
        return np.conj(self.k0(np.conj(complex(z))))

    def pole_denominator(self, k0):
        """omega(k0) * omega'(k0); reduces to k0 for the massive relation"""
        return self.omega(k0) * self.omega_prime(k0)

    def branch_points(self):
        if self.is_massive:
            return (self.mass, -self.mass)
        return (self.omega_min,)


def massive_dispersion(mass: float) -> DispersionRelation:
    """
    The TE10 relation omega(k) = sqrt(k^2 + M^2).

    Branch points of omega in the k plane sit at +-iM with cuts along
    k = +-i*chi, chi > M.

    Args:
        mass: cutoff energy M

    Returns:
        DispersionRelation with the principal square-root continuation
    """
    if not mass > 0:
        raise DomainError(f"mass must be positive, got {mass}")
    mass = float(mass)

    def omega(k):
        return np.sqrt(k * k + mass * mass)

    def omega_prime(k):
        return k / omega(k)

    def k0(z):
        return np.sqrt(_clean((z - mass) * (z + mass)))

    def threshold_shift(lam):
        return 2.0 * lam * lam / mass

    return DispersionRelation(
        name='massive',
        omega=omega,
        omega_prime=omega_prime,
        k0=k0,
        omega_min=mass,
        mass=mass,
        threshold_shift=threshold_shift,
    )


def quadratic_band(omega_min: float, curvature: float) -> DispersionRelation:
    """Lower-bounded, increasing band omega(k) = omega_min + c k^2 (entire in k)"""
    if not curvature > 0:
        raise DomainError(f"curvature must be positive, got {curvature}")
    omega_min = float(omega_min)
    curvature = float(curvature)

    def omega(k):
        return omega_min + curvature * k * k

    def omega_prime(k):
        return 2.0 * curvature * k

    def k0(z):
        return np.sqrt(_clean((z - omega_min) / curvature))

    return DispersionRelation(
        name='quadratic',
        omega=omega,
        omega_prime=omega_prime,
        k0=k0,
        omega_min=omega_min,
    )


def invert_energy(disp: DispersionRelation, z) -> complex:
    """
    Wavenumber k0(z) with Re k0 >= 0.

    Args:
        disp: dispersion relation
        z: complex energy, not a branch point

    Returns:
        k0 as a complex number; real positive for real z above threshold
    """
    z = complex(z)
    scale = max(abs(disp.omega_min), 1.0)
    for point in disp.branch_points():
        if abs(z - point) <= 1e-14 * scale:
            raise SingularInputError(f"z={z} is a branch point of {disp.name} dispersion")
    return complex(disp.k0(z))


def resonant_wavenumber(params: ModelParams,
                        dispersion: Optional[DispersionRelation] = None) -> Optional[float]:
    """
    Leading-order resonant wavenumber k_bar.

    For the massive relation k_bar = sqrt((omega0 + 2 lambda^2/M)^2 - M^2).
    Relations without a known threshold shift use the bare omega0.

    Returns:
        k_bar, or None when the dressed energy is at or below threshold
    """
    disp = dispersion or massive_dispersion(params.mass)
    shift = disp.threshold_shift(params.lam) if disp.threshold_shift else 0.0
    energy = params.omega0 + shift
    if energy <= disp.omega_min:
        logger.debug(f"No resonant wavenumber: dressed energy {energy} <= {disp.omega_min}")
        return None
    return float(np.real(disp.k0(energy)))


class RectangularWaveguide:
    """
    Rectangular guide of transverse sides Ly, Lz carrying the TE10 mode.

    The cutoff is attached to Ly: M = pi v / Ly (natural units, hbar = 1).
    TE10 is the fundamental mode only when Ly >= Lz; the two conventions
    found in the literature for which side is longer are not reconciled here,
    the ``te10_is_fundamental`` flag reports which case applies.
    """

    def __init__(self, Ly: float, Lz: float, phase_velocity: float = 1.0):
        if not Ly > 0:
            raise DomainError(f"Ly must be positive, got {Ly}")
        if not Lz > 0:
            raise DomainError(f"Lz must be positive, got {Lz}")
        if not phase_velocity > 0:
            raise DomainError(f"phase velocity must be positive, got {phase_velocity}")
        self.Ly = float(Ly)
        self.Lz = float(Lz)
        self.phase_velocity = float(phase_velocity)
        if not self.te10_is_fundamental:
            logger.warning(
                f"Ly={self.Ly} < Lz={self.Lz}: TE01 has a lower cutoff than TE10"
            )

    @property
    def te10_is_fundamental(self) -> bool:
        return self.Ly >= self.Lz

    def cutoff_frequency(self) -> float:
        return np.pi * self.phase_velocity / self.Ly

    @property
    def mass(self) -> float:
        return self.cutoff_frequency()

    def dispersion(self) -> DispersionRelation:
        return massive_dispersion(self.mass)

    def model_params(self, omega0: float, lam: float, distance: float = 0.0) -> ModelParams:
        return ModelParams(omega0, lam, self.mass, distance)


def require_resonant_wavenumber(params: ModelParams,
                                dispersion: Optional[DispersionRelation] = None) -> float:
    """resonant_wavenumber that raises ResonanceAbsentError instead of returning None"""
    k_bar = resonant_wavenumber(params, dispersion)
    if k_bar is None:
        raise ResonanceAbsentError(
            f"no resonant wavenumber for omega0={params.omega0}, lambda={params.lam}, "
            f"mass={params.mass}; use the off-resonant solver below threshold"
        )
    return k_bar
