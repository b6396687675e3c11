import logging
import warnings
from typing import Callable, Optional, Sequence

import numpy as np
from django.conf import settings
from scipy.integrate import IntegrationWarning, quad

from wqed.exceptions import QuadratureError

logger = logging.getLogger(__name__)

# absolute floor for error estimates of O(1) self-energy pieces
ABS_FLOOR = 1e-11


def real_quad(func: Callable, a: float, b: float, points: Optional[Sequence[float]] = None,
              weight: Optional[str] = None, wvar: Optional[float] = None,
              label: str = 'integral') -> float:
    """
    Adaptive quadrature with tolerances taken from settings.

    Raises QuadratureError when the returned error estimate is far above the
    requested tolerance.
    """
    rtol = settings.QUAD_RTOL
    kwargs = {'limit': settings.QUAD_LIMIT}
    if weight is not None:
        kwargs.update(weight=weight, wvar=wvar)
        if np.isinf(b):
            # QAWF only honours an absolute tolerance
            kwargs['epsabs'] = rtol * 1e-3
        else:
            kwargs.update(epsabs=rtol * 1e-3, epsrel=rtol)
    else:
        kwargs.update(epsabs=rtol * 1e-4, epsrel=rtol)
        if points is not None and np.isfinite(b):
            inner = [p for p in points if a < p < b]
            if inner:
                kwargs['points'] = inner

    with warnings.catch_warnings():
        warnings.simplefilter('ignore', IntegrationWarning)
        value, abserr = quad(func, a, b, **kwargs)[:2]

    bound = max(1e3 * rtol * abs(value), ABS_FLOOR)
    if not np.isfinite(value) or abserr > bound:
        logger.error(f"Quadrature of {label} on [{a}, {b}] failed: value={value}, abserr={abserr}")
        raise QuadratureError(
            f"quadrature of {label} did not converge",
            diagnostics={'value': value, 'abserr': abserr, 'interval': (a, b), 'weight': weight},
        )
    return value


def complex_quad(func: Callable, a: float, b: float, points: Optional[Sequence[float]] = None,
                 weight: Optional[str] = None, wvar: Optional[float] = None,
                 label: str = 'integral') -> complex:
    """Integrate a complex-valued integrand part by part"""
    re = real_quad(lambda t: np.real(func(t)), a, b, points, weight, wvar, f"Re {label}")
    im = real_quad(lambda t: np.imag(func(t)), a, b, points, weight, wvar, f"Im {label}")
    return complex(re, im)
