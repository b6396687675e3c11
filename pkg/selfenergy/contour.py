"""
Self-energy for an arbitrary dispersion by quadrature of the k-integral.

    Sigma_s(z) = 2 * int_0^inf dk (1 + s cos(kd)) / (omega(k) (z - omega(k)))

The real half-line is deformed around k = Re k0(z) so that the contour never
runs through the pole. Bending away from the pole reproduces the first sheet;
dipping below a pole that has crossed into the lower half plane gives the
continuation onto the second sheet.
"""
import logging
from typing import Optional

import numpy as np

from dispersion.params import ModelParams
from dispersion.relations import DispersionRelation, massive_dispersion
from wqed.exceptions import DomainError, SingularInputError
from .quadrature import complex_quad

logger = logging.getLogger(__name__)


class ContourIntegrator:
    """Evaluates the k-integral along a bump-deformed half line"""

    def __init__(self, params: ModelParams, dispersion: DispersionRelation):
        self.params = params
        self.dispersion = dispersion

    def integrate(self, s: int, z: complex, k0: complex, depth_sign: int,
                  flat: bool = False) -> complex:
        """
        Args:
            s: sector (+1 or -1)
            z: complex energy
            k0: pole position the contour has to avoid
            depth_sign: -1 bends the contour below Re k0, +1 above
            flat: integrate along the real axis (requires Im z != 0)

        Returns:
            Sigma_s(z) on the sheet selected by the deformation
        """
        d = self.params.distance
        a = float(np.real(k0)) if np.real(k0) > 0 else 0.0
        depth = 0.0 if flat or a == 0.0 else depth_sign * self._depth(a, k0, depth_sign)
        omega = self.dispersion.omega

        total = 0j
        if a > 0:
            span = 2.0 * a

            def head(t):
                phase = np.pi * t / span
                k = t + 1j * depth * np.sin(phase) ** 2
                dk = 1.0 + 1j * depth * (np.pi / span) * np.sin(2.0 * phase)
                w = omega(k)
                return 2.0 * (1.0 + s * np.cos(k * d)) / (w * (z - w)) * dk

            total += complex_quad(head, 0.0, span, points=[a], label='contour head')
        else:
            span = 0.0

        def tail(k):
            w = omega(k)
            return 2.0 / (w * (z - w))

        flat_tail = complex_quad(tail, span, np.inf, label='contour tail')
        if d > 0:
            total += flat_tail + s * complex_quad(tail, span, np.inf, weight='cos', wvar=d,
                                                  label='oscillating contour tail')
        else:
            total += (1 + s) * flat_tail
        logger.debug(f"Contour value s={s} z={z} depth={depth}: {total}")
        return total

    def _depth(self, a: float, k0: complex, depth_sign: int) -> float:
        """Contour depth: clear of the pole, of omega's singularities and of cos growth"""
        depth = 0.5 * a
        if self.dispersion.mass is not None:
            depth = min(depth, 0.5 * self.dispersion.mass)
        if self.params.distance > 0:
            depth = min(depth, 5.0 / self.params.distance)

        # the pole must stay between the real axis and the contour
        crossing = -depth_sign * np.imag(k0)
        if crossing < 0:
            needed = 3.0 * abs(np.imag(k0))
            if needed > depth:
                raise DomainError(
                    f"pole k0={k0} lies too far from the real axis for contour evaluation",
                    diagnostics={'k0': k0, 'depth': depth},
                )
        return depth


def sigma_generic(params: ModelParams, s: int, z, sheet: str = 'I',
                  dispersion: Optional[DispersionRelation] = None,
                  side: Optional[int] = None) -> complex:
    """
    Sigma_s(z) for any dispersion bundle.

    Sheet I off the real axis bends away from the pole; real z above
    threshold needs ``side`` (+1 for E + i0, -1 for E - i0). Sheet II
    (Im z <= 0) dips below Re k0.
    """
    disp = dispersion or massive_dispersion(params.mass)
    z = complex(z)
    if abs(z - disp.omega_min) <= 1e-14 * max(1.0, abs(disp.omega_min)):
        raise SingularInputError(f"z={z} is the threshold branch point")

    integrator = ContourIntegrator(params, disp)
    if sheet == 'II':
        k0 = disp.k0_lower(z)
        if np.real(k0) <= 0:
            raise DomainError(f"contour continuation needs Re k0 > 0, got k0={k0} at z={z}")
        return integrator.integrate(s, z, k0, depth_sign=-1)

    if z.imag > 0:
        return integrator.integrate(s, z, disp.k0(z), depth_sign=-1)
    if z.imag < 0:
        return integrator.integrate(s, z, disp.k0_lower(z), depth_sign=+1)
    if z.real < disp.omega_min:
        return integrator.integrate(s, z, 0j, depth_sign=-1)
    if side is None:
        raise SingularInputError(f"real z={z} on the cut needs an explicit side tag")
    return integrator.integrate(s, z, disp.k0(z), depth_sign=-side)


def sigma_direct(params: ModelParams, s: int, z,
                 dispersion: Optional[DispersionRelation] = None) -> complex:
    """Brute-force real-axis quadrature of the k-integral (Im z != 0)"""
    disp = dispersion or massive_dispersion(params.mass)
    z = complex(z)
    if z.imag == 0:
        raise SingularInputError("direct quadrature needs Im z != 0")
    k0 = disp.k0(z) if z.imag > 0 else disp.k0_lower(z)
    return ContourIntegrator(params, disp).integrate(s, z, k0, depth_sign=0, flat=True)
