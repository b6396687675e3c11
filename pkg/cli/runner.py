"""
Subcommand implementations.

Each ``cmd_*`` takes a validated run configuration and returns a Report; the
management command decides where and how it gets written.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from boundstates.offresonant import off_resonant_states, threshold_states
from boundstates.resonant import energy_density, solve_resonant_state
from dispersion.params import ModelParams, parse_distance, resolve_distance
from dispersion.relations import resonant_wavenumber
from oracle.discretized import build, default_box
from oracle.dynamics import SingleExcitationState, evolve, field_profile
from spectral.poles import find_pole, perturbative_rates
from spectral.trajectories import trace_sectors
from wqed.exceptions import DomainError, ResonanceAbsentError

logger = logging.getLogger(__name__)

SIMULATION_POINTS = 501


@dataclass
class Report:
    frame: Optional[pd.DataFrame] = None
    report: Optional[Dict] = None
    partial: bool = False
    snapshots: Dict[str, pd.DataFrame] = field(default_factory=dict)
    resolved: Dict = field(default_factory=dict)


def model_params(config: dict) -> ModelParams:
    return resolve_distance(config['omega0'], config['lam'], config['mass'], config['distance'])


def cmd_poles(config: dict) -> Report:
    """Both sector poles next to the leading-order rates"""
    params = model_params(config)
    rates = None
    if resonant_wavenumber(params) is not None:
        rates = perturbative_rates(params)

    rows = []
    for s in (1, -1):
        pole = find_pole(params, s)
        row = pole.as_dict()
        if rates is not None:
            row['gamma_perturbative'] = (
                rates['gamma_stable'] if s == rates['stable_sector'] else rates['gamma_unstable']
            )
        rows.append(row)
        logger.info(f"Sector {s}: z={pole.z}, defect={pole.defect:.3g}")

    return Report(
        frame=pd.DataFrame(rows),
        report={'poles': rows, 'perturbative': rates},
        resolved={'distance': params.distance},
    )


def cmd_trajectory(config: dict) -> Report:
    """Pole trajectories of both sectors along an omega0 or distance sweep"""
    params = model_params(config)
    grid = np.linspace(config['start'], config['stop'], config['steps'])
    trajectories = trace_sectors(params, config['sweep'], grid, n_jobs=config['jobs'])
    frame = pd.concat([trajectory.to_frame() for trajectory in trajectories], ignore_index=True)

    partial = not all(trajectory.is_complete for trajectory in trajectories)
    failures = {trajectory.sector: trajectory.failure_index for trajectory in trajectories}
    if partial:
        logger.warning(f"Trajectory incomplete, failure indices by sector: {failures}")
    return Report(frame=frame, report={'failure_index': failures}, partial=partial,
                  resolved={'distance': params.distance})


def _scan_row(params: ModelParams, n: int, verbose: bool) -> dict:
    row = {'omega0': params.omega0, 'n': n}
    try:
        state = solve_resonant_state(params, n, quadrature=verbose)
    except ResonanceAbsentError:
        row.update({'k_bar': np.nan, 'd_n': np.nan, 'p_n': np.nan, 'concurrence': np.nan, 'absent': True})
        if verbose:
            row.update({'p_n_quadrature': np.nan, 'fixed_point_residual': np.nan})
        return row

    row.update({
        'k_bar': state.k_bar,
        'd_n': state.d_n,
        'p_n': state.p_n,
        'concurrence': state.concurrence,
        'absent': False,
    })
    if verbose:
        row.update({'p_n_quadrature': state.p_n_quadrature, 'fixed_point_residual': state.fixed_point_residual})
    return row


def cmd_concurrence_scan(config: dict) -> Report:
    """p_n and C = p_n^2 / 2 over omega0 for each resonance index"""
    base = ModelParams(config['omega0'], config['lam'], config['mass'])
    omegas = np.linspace(config['start'], config['stop'], config['steps'])
    indices = [config['n']] if config.get('n') else [1, 2, 3]
    tasks = [(base.with_omega0(w), n) for n in indices for w in omegas]
    rows = Parallel(n_jobs=config['jobs'])(
        delayed(_scan_row)(params, n, config['verbose']) for params, n in tasks
    )
    frame = pd.DataFrame(rows)
    absent = int(frame['absent'].sum())
    if absent:
        logger.warning(f"{absent} scan points lie below threshold and are marked absent")
    return Report(frame=frame, report={'absent_points': absent})


def _resonance_index(config: dict) -> int:
    if config.get('n'):
        return config['n']
    _, n = parse_distance(config['distance'])
    return n or 1


def cmd_energy_density(config: dict) -> Report:
    """Field energy density of the resonant bound state between the emitters"""
    params = ModelParams(config['omega0'], config['lam'], config['mass'])
    state = solve_resonant_state(params, _resonance_index(config), quadrature=config['verbose'])
    profile = energy_density(state)
    report = {
        'n': state.n,
        'k_bar': state.k_bar,
        'd_n': state.d_n,
        'energy': state.energy,
        'p_n': state.p_n,
        'prefactor': profile.prefactor,
        'dressed_prefactor': profile.dressed_prefactor,
    }
    if config['verbose']:
        report['p_n_quadrature'] = state.p_n_quadrature
        report['fixed_point_residual'] = state.fixed_point_residual
    return Report(frame=profile.to_frame(), report=report, resolved={'distance': state.d_n})


def cmd_offres(config: dict) -> Report:
    """Sub-threshold levels, exchange splitting and the threshold singlet"""
    params = model_params(config)
    state = off_resonant_states(params, self_consistent=config['self_consistent'])
    report = state.as_dict()
    report.update({f"threshold_{key}": value for key, value in threshold_states(params).as_dict().items()})
    return Report(frame=pd.DataFrame([report]), report=report)


def _time_grid(config: dict, params: ModelParams, box_length: float) -> np.ndarray:
    if config.get('times'):
        start, stop, count = config['times']
        return np.linspace(start, stop, count)
    k_bar = resonant_wavenumber(params)
    if k_bar is not None and params.lam > 0:
        stop = 5.0 * k_bar / (8.0 * np.pi * params.lam ** 2)
    else:
        stop = box_length
    return np.linspace(0.0, stop, SIMULATION_POINTS)


def _initial_state(name: str, model, params: ModelParams) -> SingleExcitationState:
    if name == 'excited_a':
        return SingleExcitationState.excited_a(model)
    if name == 'excited_b':
        return SingleExcitationState.excited_b(model)
    k_bar = resonant_wavenumber(params)
    if k_bar is None:
        raise DomainError("the bell initial state needs a resonant configuration")
    n = max(1, int(round(k_bar * params.distance / np.pi)))
    return SingleExcitationState.bell(model, 1 if n % 2 else -1)


def cmd_simulate(config: dict) -> Report:
    """Exact evolution of the discretized model from a product or Bell state"""
    params = model_params(config)
    box, modes = config.get('oracle_box'), config.get('oracle_modes')
    if box is None and modes is not None:
        box, modes = default_box(params, modes)
    model = build(params, box, modes)

    times = _time_grid(config, params, model.box_length)
    initial = _initial_state(config['initial'], model, params)
    result = evolve(model, initial, times)

    snapshots = {}
    count = config.get('snapshots') or 0
    if count:
        margin = max(params.distance, 1.0 / params.mass)
        x = np.linspace(-margin, params.distance + margin, 401)
        for index in np.linspace(0, times.size - 1, count).astype(int):
            frame = field_profile(result.state_at(times[index]), x)
            snapshots[f"snapshot_{index:05d}"] = frame

    report = {'model': model.diagnostics(), 'warnings': list(result.warnings)}
    return Report(frame=result.to_frame(), report=report, snapshots=snapshots,
                  resolved={'distance': params.distance, **model.diagnostics()})


COMMANDS = {
    'poles': cmd_poles,
    'trajectory': cmd_trajectory,
    'concurrence-scan': cmd_concurrence_scan,
    'energy-density': cmd_energy_density,
    'offres': cmd_offres,
    'simulate': cmd_simulate,
}


def run(config: dict) -> Report:
    return COMMANDS[config['subcommand']](config)
