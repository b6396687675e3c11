"""
Two-emitter self-energies Sigma_s(z), s = +1 (symmetric) and s = -1 (antisymmetric).

For the massive relation the k-integral is split into the contribution of the
branch cut of omega(k) along k = i*chi, chi > M, and the residue of the photon
pole at k0(z). Other relations go through the contour integrator.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from django.conf import settings

from dispersion.params import ModelParams
from dispersion.relations import DispersionRelation, invert_energy, massive_dispersion
from wqed.exceptions import DomainError, SingularInputError
from .contour import sigma_generic
from .quadrature import complex_quad

logger = logging.getLogger(__name__)

SHEETS = ('I', 'II')
SECTORS = (1, -1)


@dataclass(frozen=True)
class SelfEnergyValue:
    """Sigma_s(z) with its cut, pole and sheet-II continuation pieces"""
    z: complex
    sector: int
    sheet: str
    cut_part: complex
    pole_part: complex
    continuation_part: complex = 0j

    @property
    def total(self) -> complex:
        return self.cut_part + self.pole_part + self.continuation_part

    def as_dict(self) -> dict:
        return {
            'z': self.z,
            'sector': self.sector,
            'sheet': self.sheet,
            'cut_part': self.cut_part,
            'pole_part': self.pole_part,
            'continuation_part': self.continuation_part,
            'total': self.total,
        }


def _check_sector(s: int) -> int:
    if s not in SECTORS:
        raise DomainError(f"sector must be +1 or -1, got {s}")
    return int(s)


def _relation(params: ModelParams, dispersion: Optional[DispersionRelation]) -> DispersionRelation:
    return dispersion or massive_dispersion(params.mass)


def spectral_density(params: ModelParams, s: int, E: float,
                     dispersion: Optional[DispersionRelation] = None) -> float:
    """
    kappa_s(E) = (1 + s cos(k0 d)) / (omega(k0) omega'(k0)) on [omega_min, inf), zero below.

    At the threshold the s=+1 density diverges like 1/k0 and +inf is
    returned; the s=-1 density vanishes there.
    """
    s = _check_sector(s)
    disp = _relation(params, dispersion)
    E = float(E)
    if E < disp.omega_min:
        return 0.0
    if E == disp.omega_min:
        return np.inf if s == 1 else 0.0

    k = float(np.real(disp.k0(E)))
    value = (1.0 + s * np.cos(k * params.distance)) / float(np.real(disp.pole_denominator(k)))
    return max(value, 0.0)


def continued_density(params: ModelParams, s: int, z,
                      dispersion: Optional[DispersionRelation] = None) -> complex:
    """kappa_s continued off the real axis from above the cut into the lower half plane"""
    s = _check_sector(s)
    disp = _relation(params, dispersion)
    k = disp.k0_lower(z)
    return complex((1.0 + s * np.cos(k * params.distance)) / disp.pole_denominator(k))


def _side(z: complex, side: Optional[int], omega_min: float) -> int:
    if z.imag > 0:
        return 1
    if z.imag < 0:
        return -1
    if side in (1, -1):
        return side
    if z.real < omega_min:
        # no discontinuity below threshold
        return 1
    raise SingularInputError(
        f"real z={z.real} lies on the cut; pass side=+1 (z + i0) or side=-1 (z - i0)"
    )


def sigma_pole(params: ModelParams, s: int, z, side: Optional[int] = None,
               dispersion: Optional[DispersionRelation] = None) -> complex:
    """
    Residue of the photon pole.

    Args:
        params: model parameters
        s: sector
        z: complex energy; real z above threshold needs ``side``
        side: +1 for z + i0, -1 for z - i0; ignored off the real axis
        dispersion: defaults to the massive relation of ``params``

    Returns:
        -2 pi i (1 + s e^{i k0 d}) / (omega omega')(k0) in the upper half plane,
        +2 pi i (1 + s e^{-i k0 d}) / (omega omega')(k0) in the lower one
    """
    s = _check_sector(s)
    disp = _relation(params, dispersion)
    z = complex(z)
    invert_energy(disp, z)
    d = params.distance

    if _side(z, side, disp.omega_min) > 0:
        k = disp.k0(z)
        return complex(-2j * np.pi * (1.0 + s * np.exp(1j * k * d)) / disp.pole_denominator(k))
    k = disp.k0_lower(z)
    return complex(2j * np.pi * (1.0 + s * np.exp(-1j * k * d)) / disp.pole_denominator(k))


def _cut_integrand_limit(z: complex, mass: float) -> float:
    ratio = max(abs(z) ** 2, mass ** 2) / (mass ** 2 * settings.QUAD_TAIL_FLOOR)
    return float(np.arcsinh(np.sqrt(ratio)))


def sigma_cut_correction(params: ModelParams, z) -> complex:
    """
    The exponentially small piece of the cut integral,

        2z int_0^inf du exp(-M d cosh u) / (z^2 + M^2 sinh^2 u).

    Equals the closed form exactly when d = 0.
    """
    z = _cut_argument(params, z)
    if params.distance == 0:
        return sigma_cut_closed_form(params, z)

    mass = params.mass
    md = mass * params.distance
    # exp(-Md cosh u) < floor beyond this point
    decay = np.arccosh(max(1.0, -np.log(settings.QUAD_TAIL_FLOOR) / md)) if md > 0 else np.inf
    upper = min(_cut_integrand_limit(z, mass), max(decay, 1.0))

    def integrand(u):
        return 2.0 * z * np.exp(-md * np.cosh(u)) / (z * z + (mass * np.sinh(u)) ** 2)

    return complex_quad(integrand, 0.0, upper, points=_cut_peaks(z, mass, upper),
                        label='cut correction')


def _cut_argument(params: ModelParams, z) -> complex:
    z = complex(z)
    if not z.real > 0:
        raise DomainError(f"cut integral needs Re z > 0, got z={z}")
    return z


def _cut_peaks(z: complex, mass: float, upper: float):
    # z^2 + M^2 sinh^2 u is smallest where M sinh u = |Im z|
    peak = float(np.arcsinh(abs(z.imag) / mass))
    return [peak] if 0.0 < peak < upper else None


def sigma_cut(params: ModelParams, s: int, z) -> complex:
    """
    Branch-cut contribution for the massive relation, by quadrature.

    With chi = M cosh u the endpoint singularity disappears:

        Sigma_s^cut(z) = 2z int_0^inf du (1 + s exp(-M d cosh u)) / (z^2 + M^2 sinh^2 u)

    The exponentially small distance-dependent part is kept.
    """
    s = _check_sector(s)
    z = _cut_argument(params, z)
    mass = params.mass
    upper = _cut_integrand_limit(z, mass)

    def integrand(u):
        return 2.0 * z / (z * z + (mass * np.sinh(u)) ** 2)

    base = complex_quad(integrand, 0.0, upper, points=_cut_peaks(z, mass, upper),
                        label='cut integral')
    return base + s * sigma_cut_correction(params, z)


def sigma_cut_closed_form(params: ModelParams, z) -> complex:
    """
    2 Log((z + k0)/M) / k0, the cut contribution without the e^{-Md} term.

    The expression is even in k0; near threshold it tends to 2/M.
    """
    z = _cut_argument(params, z)
    mass = params.mass
    k = complex(np.sqrt((z - mass) * (z + mass) + 0j))
    if abs(k) < 1e-6 * mass:
        return complex(2.0 / mass * (1.0 - k * k / (6.0 * mass * mass)))
    return complex(2.0 * np.log1p((z - mass + k) / mass) / k)


def sigma(params: ModelParams, s: int, z, sheet: str = 'I', side: Optional[int] = None,
          dispersion: Optional[DispersionRelation] = None) -> SelfEnergyValue:
    """
    Self-energy on the requested Riemann sheet.

    Sheet I: cut + pole. Sheet II (Im z <= NEWTON_TOL*M): the first-sheet
    value approached from below plus -4 pi i kappa_s(z), with kappa_s
    continued to complex z.

    Args:
        params: model parameters
        s: sector (+1 or -1)
        z: complex energy
        sheet: 'I' or 'II'
        side: +1 / -1 for real z on the cut (sheet I only)
        dispersion: a non-massive relation is evaluated by contour quadrature

    Returns:
        SelfEnergyValue
    """
    s = _check_sector(s)
    if sheet not in SHEETS:
        raise DomainError(f"sheet must be 'I' or 'II', got {sheet!r}")
    disp = _relation(params, dispersion)
    z = complex(z)
    invert_energy(disp, z)

    if sheet == 'II':
        scale = disp.mass if disp.is_massive else max(abs(disp.omega_min), 1.0)
        if z.imag > settings.NEWTON_TOL * scale:
            raise DomainError(f"sheet II is reached through the cut only for Im z <= 0, got z={z}")
        z = complex(z.real, min(z.imag, 0.0))
        pole = sigma_pole(params, s, z, side=-1, dispersion=disp)
        continuation = -4j * np.pi * continued_density(params, s, z, disp)
        if disp.is_massive:
            cut = sigma_cut(params, s, z)
        else:
            cut = sigma_generic(params, s, z, 'II', disp) - pole - continuation
        return SelfEnergyValue(z, s, sheet, cut, pole, continuation)

    pole = sigma_pole(params, s, z, side=side, dispersion=disp)
    if disp.is_massive:
        cut = sigma_cut(params, s, z)
    else:
        cut = sigma_generic(params, s, z, 'I', disp, side=side) - pole
    return SelfEnergyValue(z, s, sheet, cut, pole)


def discontinuity(params: ModelParams, s: int, E: float,
                  dispersion: Optional[DispersionRelation] = None) -> complex:
    """Sigma_s(E - i0) - Sigma_s(E + i0); equals 4 pi i kappa_s(E)"""
    below = sigma(params, s, E, side=-1, dispersion=dispersion).total
    above = sigma(params, s, E, side=1, dispersion=dispersion).total
    return below - above
