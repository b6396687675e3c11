import numpy as np
import pytest
from django.test import SimpleTestCase, override_settings
from sklearn.linear_model import LinearRegression

from boundstates.resonant import solve_resonant_state
from dispersion.params import ModelParams
from dispersion.relations import quadratic_band, resonant_wavenumber
from wqed.exceptions import ConvergenceError, DomainError, ResonanceAbsentError
from .fitting import quadratic_law_fit
from .poles import (
    NewtonPoleSolver,
    continued_pole_defect,
    find_pole,
    perturbative_pole,
    perturbative_rates,
    pole_equation_defect,
    rate_ratio,
)
from .trajectories import FRAME_COLUMNS, trace_sectors, trace_trajectory

LAM = 1e-2


def first_resonance(omega0=1.25, lam=LAM, mass=1.0):
    base = ModelParams(omega0, lam, mass)
    k_bar = resonant_wavenumber(base)
    return base.with_distance(np.pi / k_bar), k_bar


class PoleEquationTests(SimpleTestCase):

    def test_free_theory(self):
        params = ModelParams(1.25, 0.0, 1.0, 3.0)
        self.assertEqual(pole_equation_defect(params, 1, 1.3 - 0.1j), 1.3 - 0.1j - 1.25)
        result = find_pole(params, -1)
        self.assertEqual(result.z, 1.25)
        self.assertEqual(result.gamma, 0.0)

    def test_two_forms_agree(self):
        params = ModelParams(1.25, LAM, 1.0, 4.3)
        rng = np.random.default_rng(2)
        for z in rng.uniform(0.9, 2.0, 10) - 1j * rng.uniform(0.0, 0.3, 10):
            for s in (1, -1):
                a = pole_equation_defect(params, s, z)
                b = continued_pole_defect(params, s, z)
                self.assertLess(abs(a - b), 1e-10)

    def test_resonance_is_nearly_real(self):
        params, k_bar = first_resonance()
        z = np.sqrt(k_bar ** 2 + 1.0)
        defect = pole_equation_defect(params, 1, z)
        self.assertLess(abs(defect), LAM ** 2)
        self.assertLess(abs(defect.imag), 1e-8)


class FindPoleTests(SimpleTestCase):

    def setUp(self):
        self.params, self.k_bar = first_resonance()

    def test_stable_and_unstable_sectors(self):
        stable = find_pole(self.params, 1)
        unstable = find_pole(self.params, -1)
        self.assertTrue(stable.converged)
        self.assertLessEqual(stable.gamma, 1e-8)
        self.assertGreaterEqual(stable.gamma, -1e-10)
        expected = 8.0 * np.pi * LAM ** 2 / self.k_bar
        self.assertAlmostEqual(expected, 3.3495e-3, places=6)
        self.assertLess(abs(unstable.gamma - expected) / unstable.gamma, 0.02)
        for pole in (stable, unstable):
            self.assertLessEqual(pole.defect, 1e-10 * max(1.0, abs(pole.z)))

    def test_second_resonance_swaps_sectors(self):
        params = self.params.with_distance(2.0 * np.pi / self.k_bar)
        self.assertLessEqual(find_pole(params, -1).gamma, 1e-8)
        self.assertGreater(find_pole(params, 1).gamma, 1e-3)

    def test_detuned_stable_rate(self):
        d = self.params.distance * 1.02
        pole = find_pole(self.params.with_distance(d), 1)
        expected = 2.0 * np.pi * LAM ** 2 * self.k_bar * (d - self.params.distance) ** 2
        self.assertLess(abs(pole.gamma - expected) / expected, 0.10)

    def test_rejects_guess_above_real_axis(self):
        with self.assertRaises(DomainError):
            find_pole(self.params, 1, 1.25 + 0.01j)

    def test_iterates_stay_above_threshold(self):
        solver = NewtonPoleSolver(self.params, 1)
        self.assertEqual(solver.clamp(0.5 - 0.1j), complex(1.0 + 1e-4, -0.1))
        self.assertEqual(solver.clamp(1.3 + 0.1j), complex(1.3, 0.0))
        pole = find_pole(ModelParams(0.95, LAM, 1.0, 15.0), 1)
        self.assertIn('threshold', pole.tags)
        self.assertGreaterEqual(pole.energy, 1.0)

    def test_rejects_bad_sector(self):
        with self.assertRaises(DomainError):
            find_pole(self.params, 2)

    @override_settings(NEWTON_MAX_ITER=1)
    def test_convergence_failure_keeps_history(self):
        with self.assertRaises(ConvergenceError) as ctx:
            find_pole(self.params, -1, 1.6 - 0.2j)
        self.assertGreaterEqual(len(ctx.exception.history), 2)
        self.assertEqual(ctx.exception.history[0], 1.6 - 0.2j)


class PerturbativePoleTests(SimpleTestCase):

    def test_resonant_values(self):
        params, k_bar = first_resonance()
        stable = perturbative_pole(params, 1)
        unstable = perturbative_pole(params, -1)
        self.assertAlmostEqual(stable.energy, np.sqrt(k_bar ** 2 + 1.0), delta=5e-5)
        self.assertLessEqual(stable.gamma, 1e-8)
        expected = 8.0 * np.pi * LAM ** 2 / k_bar
        self.assertLess(abs(unstable.gamma - expected) / expected, 0.01)
        self.assertEqual(unstable.method, 'perturbative')

    def test_free_theory(self):
        pole = perturbative_pole(ModelParams(1.25, 0.0, 1.0, 2.0), 1)
        self.assertEqual((pole.energy, pole.gamma), (1.25, 0.0))

    @override_settings(NEWTON_TOL=1e-13)
    def test_error_is_fourth_order_in_coupling(self):
        couplings = np.array([0.002, 0.005, 0.01, 0.02])
        gaps = []
        for lam in couplings:
            params = ModelParams(1.25, lam, 1.0, 3.0)
            gaps.append(abs(perturbative_pole(params, -1).z - find_pole(params, -1).z))
        x = np.log(couplings).reshape(-1, 1)
        slope = LinearRegression().fit(x, np.log(gaps)).coef_[0]
        self.assertGreater(slope, 3.5)
        self.assertLess(slope, 4.5)

    def test_threshold_clamp_is_tagged(self):
        pole = perturbative_pole(ModelParams(0.9, LAM, 1.0, 5.0), 1)
        self.assertIn('threshold', pole.tags)
        self.assertGreater(pole.energy, 1.0)


class RateTests(SimpleTestCase):

    def test_rate_ratio_examples(self):
        params, k_bar = first_resonance()
        self.assertEqual(rate_ratio(params, 1, np.pi / k_bar), 0.0)
        self.assertAlmostEqual(rate_ratio(params, 1, (np.pi + 0.1) / k_bar), 0.0025, places=14)

    def test_rate_ratio_below_threshold(self):
        with self.assertRaises(ResonanceAbsentError):
            rate_ratio(ModelParams(0.5, LAM, 1.0), 1, 3.0)

    def test_perturbative_rates(self):
        params, k_bar = first_resonance()
        rates = perturbative_rates(params.with_distance(params.distance * 1.02))
        self.assertEqual(rates['n'], 1)
        self.assertEqual(rates['stable_sector'], 1)
        self.assertAlmostEqual(rates['gamma_unstable'], 8.0 * np.pi * LAM ** 2 / k_bar, places=14)
        self.assertAlmostEqual(
            rates['gamma_stable'] / rates['gamma_unstable'],
            rate_ratio(params, 1, params.distance * 1.02),
            places=12,
        )

    def assert_ratio_universal(self, params, dispersion=None):
        state = solve_resonant_state(params, 1, dispersion=dispersion)
        d = state.d_n + 0.05 / state.k_bar
        detuned = params.with_distance(d)
        stable = find_pole(detuned, 1, dispersion=dispersion)
        unstable = find_pole(detuned, -1, dispersion=dispersion)
        expected = 0.25 * state.k_bar ** 2 * (d - state.d_n) ** 2
        self.assertLess(abs(stable.gamma / unstable.gamma - expected) / expected, 0.15)

    def test_rate_ratio_matches_solver_massive(self):
        self.assert_ratio_universal(ModelParams(1.25, LAM, 1.0))

    def test_rate_ratio_matches_solver_quadratic_band(self):
        self.assert_ratio_universal(ModelParams(1.25, LAM, 1.0), quadratic_band(1.0, 0.5))


class QuadraticLawTests(SimpleTestCase):

    def test_exponent_and_prefactor(self):
        base = ModelParams(1.25, LAM, 1.0)
        state = solve_resonant_state(base, 1)
        fit = quadratic_law_fit(base.with_distance(state.d_n), 1, np.geomspace(0.01, 0.1, 6))
        self.assertLess(abs(fit.slope - 2.0), 0.05)
        self.assertLess(fit.prefactor_error, 0.10)
        self.assertGreater(fit.r2, 0.999)
        self.assertEqual(list(fit.table.columns), ['distance', 'offset', 'gamma_p'])

    def test_rejects_zero_offset(self):
        with self.assertRaises(DomainError):
            quadratic_law_fit(ModelParams(1.25, LAM, 1.0), 1, [0.0, 0.01])


class TrajectoryTests(SimpleTestCase):

    def setUp(self):
        self.params = ModelParams(1.2, LAM, 1.0, 15.0)
        self.grid = np.linspace(1.2, 1.3, 6)

    def test_short_sweep(self):
        trajectory = trace_trajectory(self.params, 1, 'omega0', self.grid)
        self.assertTrue(trajectory.is_complete)
        self.assertEqual(len(trajectory.poles), 6)
        self.assertTrue(np.all(trajectory.gammas() >= -2e-10))
        self.assertLess(trajectory.max_jump, 0.05)
        frame = trajectory.to_frame()
        self.assertEqual(list(frame.columns), FRAME_COLUMNS)
        self.assertFalse(frame['threshold'].any())
        np.testing.assert_array_equal(frame['sweep_value'].to_numpy(), self.grid)

    def test_reversed_sweep_reproduces_poles(self):
        forward = trace_trajectory(self.params, -1, 'omega0', self.grid)
        backward = trace_trajectory(self.params, -1, 'omega0', self.grid[::-1])
        for a, b in zip(forward.poles, reversed(backward.poles)):
            self.assertLess(abs(a.z - b.z), 1e-9)

    def test_distance_sweep(self):
        trajectory = trace_trajectory(self.params, -1, 'distance', [14.0, 14.5, 15.0])
        self.assertTrue(trajectory.is_complete)

    def test_free_sweep_stays_on_real_axis(self):
        trajectory = trace_trajectory(ModelParams(1.2, 0.0, 1.0, 3.0), 1, 'omega0', self.grid)
        np.testing.assert_allclose([p.z for p in trajectory.poles], self.grid)

    def test_invalid_grids(self):
        with self.assertRaises(DomainError):
            trace_trajectory(self.params, 1, 'omega0', [1.2])
        with self.assertRaises(DomainError):
            trace_trajectory(self.params, 1, 'omega0', [1.2, 1.3, 1.25])
        with self.assertRaises(DomainError):
            trace_trajectory(self.params, 1, 'mass', [1.2, 1.3])

    @override_settings(NEWTON_MAX_ITER=0)
    def test_partial_trajectory(self):
        trajectory = trace_trajectory(self.params, -1, 'omega0', self.grid)
        self.assertFalse(trajectory.is_complete)
        self.assertEqual(trajectory.failure_index, 5)
        self.assertIn('partial', trajectory.tags)
        self.assertTrue(all(p is None for p in trajectory.poles))

    @pytest.mark.slow
    def test_trajectories_touch_real_axis_at_resonances(self):
        grid = np.linspace(0.95, 1.35, 161)
        step = grid[1] - grid[0]
        params = ModelParams(1.0, LAM, 1.0, 15.0)
        trajectories = {t.sector: t for t in trace_sectors(params, 'omega0', grid)}
        resonances = {n: np.sqrt((n * np.pi / 15.0) ** 2 + 1.0) - 2.0 * LAM ** 2 for n in (1, 2, 3, 4)}

        for n, resonance in resonances.items():
            s = 1 if n % 2 else -1
            gammas = trajectories[s].gammas()
            window = np.abs(grid - resonance) <= 4 * step
            self.assertTrue(np.all(np.isfinite(gammas[window])))
            nearest = grid[window][np.argmin(gammas[window])]
            self.assertLessEqual(abs(nearest - resonance), step + 1e-12)

            pole = find_pole(params.with_omega0(resonance), s)
            self.assertLessEqual(pole.gamma, 1e-6)

        for s, trajectory in trajectories.items():
            self.assertTrue(trajectory.is_complete)
            frame = trajectory.to_frame()
            self.assertTrue(np.all(frame['E_p'] >= 1.0))
            self.assertTrue(np.all(frame['gamma_p'] >= -2e-10))
            free = frame[~frame['threshold']]
            self.assertTrue(free['converged'].all())
            self.assertTrue(frame['threshold'][grid > 1.05].eq(False).all())

            lowest = free['sweep_value'].iloc[int(np.argmin(free['gamma_p'].to_numpy()))]
            own = [r for n, r in resonances.items() if (1 if n % 2 else -1) == s]
            self.assertLessEqual(min(abs(lowest - r) for r in own), step + 1e-12)
