import logging
import re
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np
from django.conf import settings

from wqed.exceptions import DomainError, ResonanceAbsentError

logger = logging.getLogger(__name__)

AUTO_DISTANCE = re.compile(r'^auto:n=(\d+)$')


@dataclass(frozen=True)
class ModelParams:
    """
    Physical configuration of the two-emitter waveguide.

    Natural units hbar = v = 1. ``lam`` is the coupling constant in units of
    M^(3/2) (the vertex carries omega(k)^(-1/2)); ``distance`` is the A-B
    separation in units of 1/M.
    """
    omega0: float
    lam: float
    mass: float = 1.0
    distance: float = 0.0

    def __post_init__(self):
        if not self.mass > 0:
            raise DomainError(f"mass must be positive, got {self.mass}")
        if self.lam < 0:
            raise DomainError(f"coupling must be nonnegative, got {self.lam}")
        if self.distance < 0:
            raise DomainError(f"distance must be nonnegative, got {self.distance}")

    @property
    def coupling_ratio(self) -> float:
        return self.lam / self.mass ** 1.5

    @property
    def tags(self) -> List[str]:
        """Regime tags attached to every result computed from these params"""
        if self.coupling_ratio > settings.PERTURBATIVE_LIMIT:
            return ['nonperturbative']
        return []

    def with_distance(self, distance: float) -> 'ModelParams':
        return replace(self, distance=float(distance))

    def with_omega0(self, omega0: float) -> 'ModelParams':
        return replace(self, omega0=float(omega0))

    def as_dict(self) -> dict:
        return {
            'omega0': self.omega0,
            'lambda': self.lam,
            'mass': self.mass,
            'distance': self.distance,
        }


def parse_distance(value) -> Tuple[Optional[float], Optional[int]]:
    """
    Parse a distance flag.

    Args:
        value: a number, a numeric string, or ``auto:n=K``

    Returns:
        (distance, None) for explicit values, (None, K) for the automatic form
    """
    if isinstance(value, (int, float)):
        return float(value), None

    text = str(value).strip()
    match = AUTO_DISTANCE.match(text)
    if match:
        n = int(match.group(1))
        if n < 1:
            raise DomainError(f"resonance index must be >= 1, got {n}")
        return None, n

    try:
        return float(text), None
    except ValueError:
        raise DomainError(f"distance must be a number or auto:n=K, got {value!r}")


def resolve_distance(omega0: float, lam: float, mass: float, value,
                     dispersion=None) -> ModelParams:
    """
    Build ModelParams from a distance flag, resolving ``auto:n=K`` to d_K.

    The automatic form uses the leading-order resonant wavenumber, d_K = K*pi/k_bar.
    """
    from .relations import resonant_wavenumber

    distance, n = parse_distance(value)
    if n is None:
        return ModelParams(omega0, lam, mass, distance)

    base = ModelParams(omega0, lam, mass, 0.0)
    k_bar = resonant_wavenumber(base, dispersion)
    if k_bar is None:
        raise ResonanceAbsentError(
            f"no resonant wavenumber for omega0={omega0}, lambda={lam}, mass={mass}"
        )

    d_n = n * np.pi / k_bar
    logger.info(f"Resolved auto:n={n} to d={d_n!r} (k_bar={k_bar!r})")
    return base.with_distance(d_n)
