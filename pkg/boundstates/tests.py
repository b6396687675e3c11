import numpy as np
from django.test import SimpleTestCase, override_settings

from dispersion.params import ModelParams
from dispersion.relations import quadratic_band, resonant_wavenumber
from selfenergy.evaluator import sigma, sigma_cut_correction
from wqed.exceptions import ConvergenceError, DomainError, ResonanceAbsentError
from .offresonant import exchange_coupling, lamb_shift, off_resonant_states, threshold_states
from .resonant import (
    asymptotic_state,
    energy_density,
    normalization_population,
    solve_resonant_state,
)

LAM = 1e-2


class ResonantStateTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.params = ModelParams(1.25, LAM, 1.0)
        cls.state = solve_resonant_state(cls.params, 1)

    def test_population_spot_value(self):
        self.assertAlmostEqual(self.state.p_n, 0.995349, places=5)
        self.assertLess(abs(self.state.concurrence - 0.4953), 0.0005)
        self.assertEqual(self.state.sector, 1)

    def test_resonance_condition(self):
        self.assertAlmostEqual(self.state.k_bar * self.state.d_n, np.pi, places=13)
        self.assertAlmostEqual(self.state.energy, np.sqrt(self.state.k_bar ** 2 + 1.0), places=13)
        self.assertAlmostEqual(self.state.leading_k_bar, 0.7503333, places=6)
        self.assertLess(abs(self.state.k_bar - self.state.leading_k_bar), 1e-4)
        self.assertLessEqual(self.state.fixed_point_residual, 1e-8)
        self.assertEqual(self.state.params.distance, self.state.d_n)

    def test_quadrature_population(self):
        self.assertLess(abs(self.state.p_n_quadrature - self.state.p_n) / self.state.p_n, 0.01)
        self.assertEqual(normalization_population(self.state), self.state.p_n_quadrature)

    def test_population_decreases_with_index(self):
        populations = [solve_resonant_state(self.params, n, quadrature=False).p_n for n in (1, 2, 3)]
        self.assertTrue(populations[0] > populations[1] > populations[2])
        sectors = [solve_resonant_state(self.params, n, quadrature=False).sector for n in (1, 2, 3)]
        self.assertEqual(sectors, [1, -1, 1])

    def test_population_vanishes_near_threshold(self):
        k_bar = 0.03
        params = ModelParams(np.sqrt(k_bar ** 2 + 1.0) - 2.0 * LAM ** 2, LAM, 1.0)
        state = solve_resonant_state(params, 1, quadrature=False)
        self.assertLess(state.p_n, 0.02)
        scaled = state.p_n * 2.0 * np.pi ** 2 * LAM ** 2 / state.k_bar ** 3
        self.assertAlmostEqual(scaled, 1.0, delta=0.05)

    def test_concurrence_curves(self):
        omegas = np.linspace(1.05, 1.35, 7)
        curves = {
            n: np.array([solve_resonant_state(self.params.with_omega0(w), n, quadrature=False).concurrence
                         for w in omegas])
            for n in (1, 2, 3)
        }
        for values in curves.values():
            self.assertTrue(np.all(np.diff(values) > 0))
            self.assertTrue(np.all(values <= 0.5))
        self.assertTrue(np.all(curves[1] > curves[2]))
        self.assertTrue(np.all(curves[2] > curves[3]))
        self.assertGreater(curves[1][-2], 0.49)

    def test_below_threshold(self):
        with self.assertRaises(ResonanceAbsentError):
            solve_resonant_state(ModelParams(0.8, LAM, 1.0), 1)

    def test_rejects_bad_index(self):
        with self.assertRaises(DomainError):
            solve_resonant_state(self.params, 0)

    @override_settings(FIXED_POINT_MAX_ITER=1)
    def test_fixed_point_budget(self):
        with self.assertRaises(ConvergenceError):
            solve_resonant_state(self.params, 1, quadrature=False)

    def test_generic_dispersion(self):
        band = quadratic_band(1.0, 0.5)
        state = solve_resonant_state(self.params, 1, dispersion=band)
        self.assertAlmostEqual(band.omega(state.k_bar), state.energy, places=13)
        self.assertLessEqual(state.fixed_point_residual, 1e-8)
        self.assertLess(abs(state.p_n_quadrature - state.p_n) / state.p_n, 0.01)


class EnergyDensityTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.state = solve_resonant_state(ModelParams(1.25, LAM, 1.0), 1, quadrature=False)

    def test_nodes_and_antinode(self):
        state = self.state
        profile = energy_density(state, [0.0, 0.5 * state.d_n, state.d_n])
        self.assertEqual(profile.density[0], 0.0)
        self.assertEqual(profile.density[2], 0.0)
        self.assertAlmostEqual(profile.density[1], profile.prefactor, places=14)

    def test_prefactors(self):
        profile = energy_density(self.state)
        k = self.state.k_bar
        self.assertAlmostEqual(profile.prefactor, 4.0 * np.pi * LAM ** 2 * self.state.p_n / k ** 2, places=15)
        self.assertAlmostEqual(profile.dressed_prefactor, profile.prefactor * self.state.energy ** 2, places=15)

    def test_confined_between_emitters(self):
        profile = energy_density(self.state)
        self.assertAlmostEqual(profile.x[0], -0.2 * self.state.d_n)
        outside = (profile.x < 0) | (profile.x > self.state.d_n)
        self.assertTrue(np.all(profile.density[outside] == 0.0))
        self.assertTrue(np.all(profile.density >= 0.0))

    def test_integral(self):
        x = np.linspace(0.0, self.state.d_n, 4001)
        profile = energy_density(self.state, x)
        expected = profile.prefactor * self.state.d_n / 2.0
        self.assertAlmostEqual(profile.integral(), expected, delta=1e-6 * expected)
        self.assertEqual(list(profile.to_frame().columns), ['x', 'density'])


class AsymptoticStateTests(SimpleTestCase):

    def setUp(self):
        base = ModelParams(1.25, LAM, 1.0)
        self.d1 = np.pi / resonant_wavenumber(base)
        self.params = base.with_distance(self.d1)

    def test_relaxed_state(self):
        result = asymptotic_state(self.params)
        p = result.p_n
        self.assertAlmostEqual(np.trace(result.rho).real, 1.0, places=14)
        self.assertTrue(np.all(np.linalg.eigvalsh(result.rho) >= -1e-14))
        self.assertAlmostEqual(result.probability_bell, p ** 2 / 2, places=14)
        self.assertAlmostEqual(result.probability_ground, 1 - p ** 2 / 2, places=14)
        self.assertAlmostEqual(result.concurrence, p ** 2 / 2, places=10)

    def test_other_emitter_and_bell_start(self):
        self.assertAlmostEqual(
            asymptotic_state(self.params, initial='excited_b').concurrence,
            asymptotic_state(self.params).concurrence,
            places=12,
        )
        bell = asymptotic_state(self.params, initial='bell')
        self.assertAlmostEqual(bell.probability_bell, bell.p_n ** 2, places=14)

    def test_ideal_limit(self):
        params = ModelParams(1.25, 0.0, 1.0, np.pi / 0.75)
        self.assertAlmostEqual(asymptotic_state(params).concurrence, 0.5, places=12)

    def test_rejects_off_resonant_distance(self):
        with self.assertRaises(DomainError):
            asymptotic_state(self.params.with_distance(self.d1 * 1.05))
        with self.assertRaises(DomainError):
            asymptotic_state(self.params, initial='vacuum')


class OffResonantTests(SimpleTestCase):

    def setUp(self):
        self.params = ModelParams(0.8, LAM, 1.0, 5.0)

    def test_levels(self):
        state = off_resonant_states(self.params)
        self.assertLess(state.beta, 0.0)
        self.assertLess(state.alpha, 0.0)
        self.assertLess(state.energy_plus, state.energy_minus)
        self.assertLess(state.energy_minus, 1.0)
        self.assertAlmostEqual(state.splitting, 2.0 * state.beta, places=15)
        self.assertAlmostEqual(state.oscillation_period, 2.0 * np.pi / abs(state.beta), places=10)
        self.assertEqual(state.coefficients['minus'][1], -state.coefficients['minus'][0])

    def test_formal_zero_frequency(self):
        params = ModelParams(0.0, LAM, 1.0, 5.0)
        self.assertAlmostEqual(lamb_shift(params, 0.0), -np.pi * LAM ** 2, places=15)

    def test_far_apart(self):
        state = off_resonant_states(self.params.with_distance(1e4))
        self.assertEqual(state.beta, 0.0)
        self.assertEqual(state.energy_plus, state.energy_minus)
        self.assertEqual(state.oscillation_period, np.inf)

    def test_splitting_decays_evanescently(self):
        q = np.sqrt(1.0 - 0.8 ** 2)
        d = np.array([2.0, 4.0, 6.0, 8.0])
        betas = [abs(exchange_coupling(self.params.with_distance(x), 0.8)) for x in d]
        slope = np.polyfit(d, np.log(betas), 1)[0]
        self.assertAlmostEqual(slope, -q, places=10)

    def test_matches_self_energy_below_threshold(self):
        for s in (1, -1):
            value = LAM ** 2 * sigma(self.params, s, 0.8).total.real
            shifts = lamb_shift(self.params, 0.8) + s * exchange_coupling(self.params, 0.8)
            correction = LAM ** 2 * s * sigma_cut_correction(self.params, 0.8).real
            self.assertAlmostEqual(value, shifts + correction, places=12)

    def test_self_consistent_levels(self):
        plain = off_resonant_states(self.params)
        exact = off_resonant_states(self.params, self_consistent=True)
        self.assertTrue(exact.self_consistent)
        for s, energy in ((1, exact.energy_plus), (-1, exact.energy_minus)):
            shift = lamb_shift(self.params, energy) + s * exchange_coupling(self.params, energy)
            self.assertAlmostEqual(energy, 0.8 + shift, places=13)
        self.assertLess(abs(exact.energy_plus - plain.energy_plus), 1e-5)

    def test_domain(self):
        with self.assertRaises(DomainError):
            off_resonant_states(ModelParams(1.0, LAM, 1.0, 5.0))

    def test_singlet_level_merged_into_continuum(self):
        params = ModelParams(0.9999, LAM, 1.0, 0.1)
        self.assertLess(threshold_states(params).singlet_omega0, params.omega0)
        with self.assertRaisesRegex(DomainError, 'sector -1') as context:
            off_resonant_states(params, self_consistent=True)
        self.assertEqual(context.exception.diagnostics['sector'], -1)
        self.assertLess(context.exception.diagnostics['defect_at_threshold'], 0.0)

    def test_threshold_proximity_tag(self):
        state = off_resonant_states(ModelParams(0.9999, LAM, 1.0, 5.0))
        self.assertIn('nonperturbative', state.tags)
        self.assertNotIn('nonperturbative', off_resonant_states(self.params).tags)


class ThresholdStateTests(SimpleTestCase):

    def test_singlet_frequency(self):
        report = threshold_states(ModelParams(1.0, LAM, 1.0, 15.0))
        self.assertAlmostEqual(report.singlet_omega0, 1.009225, places=6)
        self.assertTrue(report.triplet_suppressed)
        self.assertEqual(report.singlet_sector, -1)

    def test_free_and_dark_limits(self):
        self.assertEqual(threshold_states(ModelParams(1.0, 0.0, 1.0, 15.0)).singlet_omega0, 1.0)
        report = threshold_states(ModelParams(1.0, LAM, 1.0, 0.0))
        self.assertTrue(report.dark_state_limit)
        self.assertAlmostEqual(report.singlet_omega0, 1.0 - 2.0 * LAM ** 2, places=15)
