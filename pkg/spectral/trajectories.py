import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from django.conf import settings
from joblib import Parallel, delayed

from dispersion.params import ModelParams
from dispersion.relations import DispersionRelation
from wqed.exceptions import DomainError, WaveguideError
from .poles import PoleResult, find_pole, perturbative_pole

logger = logging.getLogger(__name__)

SWEEP_PARAMETERS = ('omega0', 'distance')
FRAME_COLUMNS = ['sweep_value', 'sector', 'E_p', 'gamma_p', 'defect', 'converged', 'threshold']


@dataclass
class PoleTrajectory:
    """Poles of one sector along a sweep of omega0 or d"""
    parameter: str
    grid: np.ndarray
    sector: int
    poles: List[Optional[PoleResult]]
    failure_index: Optional[int] = None
    tags: List[str] = field(default_factory=list)

    @property
    def is_complete(self) -> bool:
        return self.failure_index is None

    @property
    def max_jump(self) -> float:
        """Largest |z_{i+1} - z_i| between consecutive converged points"""
        points = [p.z for p in self.poles if p is not None]
        if len(points) < 2:
            return 0.0
        return float(np.max(np.abs(np.diff(points))))

    def gammas(self) -> np.ndarray:
        return np.array([p.gamma if p is not None else np.nan for p in self.poles])

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for value, pole in zip(self.grid, self.poles):
            rows.append({
                'sweep_value': float(value),
                'sector': self.sector,
                'E_p': pole.energy if pole is not None else np.nan,
                'gamma_p': pole.gamma if pole is not None else np.nan,
                'defect': pole.defect if pole is not None else np.nan,
                'converged': pole is not None and pole.converged,
                'threshold': pole is not None and 'threshold' in pole.tags,
            })
        return pd.DataFrame(rows, columns=FRAME_COLUMNS)


def _validate_grid(parameter: str, grid: Sequence[float]) -> np.ndarray:
    if parameter not in SWEEP_PARAMETERS:
        raise DomainError(f"sweep parameter must be one of {SWEEP_PARAMETERS}, got {parameter!r}")
    values = np.asarray(grid, dtype=float)
    if values.ndim != 1 or values.size < 2:
        raise DomainError("a sweep needs at least two grid points")
    steps = np.diff(values)
    if not (np.all(steps > 0) or np.all(steps < 0)):
        raise DomainError("sweep grid must be strictly monotone")
    return values


def _point_params(params: ModelParams, parameter: str, value: float) -> ModelParams:
    if parameter == 'omega0':
        return params.with_omega0(value)
    return params.with_distance(value)


def trace_trajectory(params: ModelParams, s: int, parameter: str, grid: Sequence[float],
                     dispersion: Optional[DispersionRelation] = None) -> PoleTrajectory:
    """
    Follow the sector-s pole along a monotone grid by continuation.

    The walk starts at the end of an omega0 grid farthest above threshold and
    seeds that point perturbatively; every later point is seeded with the
    previous pole. Seeds and iterates never go below the threshold floor;
    points where the pole would cross it are kept and tagged 'threshold'
    (the sub-threshold levels belong to ``boundstates.threshold_states``).
    A failure stops the walk and the trajectory comes back partial, with
    ``failure_index`` pointing into the caller's grid.
    """
    values = _validate_grid(parameter, grid)
    order = np.arange(values.size)
    if parameter == 'omega0' and values[0] < values[-1]:
        order = order[::-1]

    poles: List[Optional[PoleResult]] = [None] * values.size
    failure_index = None
    seed = None
    for position, index in enumerate(order):
        point = _point_params(params, parameter, values[index])
        try:
            if seed is None:
                seed = perturbative_pole(point, s, dispersion).z
            pole = find_pole(point, s, seed, dispersion)
        except WaveguideError as exc:
            logger.warning(f"Trajectory s={s} stopped at {parameter}={values[index]}: {exc.message}")
            failure_index = int(index)
            break
        poles[index] = pole
        seed = pole.z
        if position % 20 == 0:
            logger.info(f"Trajectory s={s}: {position + 1}/{values.size} points, z={pole.z}")

    tags = list(params.tags)
    pinned = sum(1 for pole in poles if pole is not None and 'threshold' in pole.tags)
    if pinned:
        logger.warning(f"Trajectory s={s}: {pinned} points stopped at the threshold floor")
        tags.append('threshold')
    if failure_index is not None:
        tags.append('partial')
    return PoleTrajectory(parameter, values, s, poles, failure_index, tags)


def trace_sectors(params: ModelParams, parameter: str, grid: Sequence[float],
                  sectors: Sequence[int] = (1, -1),
                  dispersion: Optional[DispersionRelation] = None,
                  n_jobs: Optional[int] = None) -> List[PoleTrajectory]:
    """Independent trajectories of several sectors, run in parallel"""
    n_jobs = n_jobs or settings.DEFAULT_JOBS
    return Parallel(n_jobs=n_jobs)(
        delayed(trace_trajectory)(params, s, parameter, grid, dispersion) for s in sectors
    )
