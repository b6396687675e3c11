import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from django.conf import settings
from joblib import Parallel, delayed
from sklearn.linear_model import LinearRegression

from dispersion.params import ModelParams
from dispersion.relations import DispersionRelation, massive_dispersion, require_resonant_wavenumber
from wqed.exceptions import DomainError
from .poles import find_pole

logger = logging.getLogger(__name__)

DEFAULT_OFFSETS = tuple(np.geomspace(0.01, 0.1, 7))


@dataclass
class QuadraticLawFit:
    """Power-law fit gamma = prefactor * |d - d_n|^slope of the stable pole"""
    slope: float
    prefactor: float
    r2: float
    expected_prefactor: float
    d_n: float
    table: pd.DataFrame

    @property
    def prefactor_error(self) -> float:
        return abs(self.prefactor - self.expected_prefactor) / self.expected_prefactor


def _stable_gamma(params: ModelParams, s: int, distance: float,
                  dispersion: Optional[DispersionRelation]) -> float:
    return find_pole(params.with_distance(distance), s, dispersion=dispersion).gamma


def quadratic_law_fit(params: ModelParams, n: int, offsets: Sequence[float] = DEFAULT_OFFSETS,
                      dispersion: Optional[DispersionRelation] = None,
                      n_jobs: Optional[int] = None) -> QuadraticLawFit:
    """
    Fit log gamma^(s) against log |d - d_n| for the stable sector of resonance n.

    Args:
        params: model parameters; a nonzero ``distance`` is taken as the
            resonant distance d_n, otherwise d_n = n pi / k_bar
        n: resonance index
        offsets: detunings k_bar (d - d_n), all nonzero
        dispersion: optional non-massive relation

    Returns:
        QuadraticLawFit with slope, prefactor and R^2 of the log-log regression
    """
    if n < 1:
        raise DomainError(f"resonance index must be >= 1, got {n}")
    offsets = np.asarray(offsets, dtype=float)
    if offsets.size < 2 or np.any(offsets == 0):
        raise DomainError("the fit needs at least two nonzero detunings")

    disp = dispersion or massive_dispersion(params.mass)
    k_bar = require_resonant_wavenumber(params, disp)
    d_n = params.distance if params.distance > 0 else n * np.pi / k_bar
    s = 1 if n % 2 else -1
    distances = d_n + offsets / k_bar

    gammas = Parallel(n_jobs=n_jobs or settings.DEFAULT_JOBS)(
        delayed(_stable_gamma)(params, s, d, dispersion) for d in distances
    )
    gammas = np.asarray(gammas)
    if np.any(gammas <= 0):
        raise DomainError("stable-sector rates must be positive away from the resonance")

    x = np.log(np.abs(distances - d_n)).reshape(-1, 1)
    y = np.log(gammas)
    model = LinearRegression().fit(x, y)
    slope = float(model.coef_[0])
    prefactor = float(np.exp(model.intercept_))
    r2 = float(model.score(x, y))

    density = float(np.real(disp.pole_denominator(k_bar)))
    expected = 2.0 * np.pi * params.lam ** 2 * k_bar ** 2 / density
    logger.info(f"Quadratic law for n={n}: slope={slope:.4f}, prefactor={prefactor:.4e} (expected {expected:.4e})")

    table = pd.DataFrame({'distance': distances, 'offset': offsets, 'gamma_p': gammas})
    return QuadraticLawFit(slope, prefactor, r2, expected, d_n, table)
