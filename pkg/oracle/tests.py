import numpy as np
import pytest
from scipy.integrate import trapezoid
from django.test import SimpleTestCase

from boundstates.offresonant import off_resonant_states
from boundstates.resonant import energy_density, solve_resonant_state
from dispersion.params import ModelParams
from wqed.exceptions import DomainError
from .discretized import build, default_box, eigen_bound_states
from .dynamics import (
    SingleExcitationState,
    evolve,
    exponential_rate,
    field_profile,
    oscillation_period,
    plateau,
)
from .entanglement import concurrence, reduced_density_matrix

LAM = 1e-2


class EntanglementTests(SimpleTestCase):

    def test_bell_states(self):
        root = 1.0 / np.sqrt(2.0)
        self.assertAlmostEqual(concurrence(reduced_density_matrix(root, -root)), 1.0, places=12)
        self.assertAlmostEqual(concurrence(reduced_density_matrix(root, 1j * root)), 1.0, places=12)

    def test_product_and_mixed(self):
        self.assertAlmostEqual(concurrence(reduced_density_matrix(1.0, 0.0)), 0.0, places=12)
        c = 0.5
        self.assertAlmostEqual(concurrence(reduced_density_matrix(c, c)), 2 * c * c, places=12)

    def test_rejects_invalid_matrix(self):
        with self.assertRaises(DomainError):
            concurrence(np.eye(3) / 3)
        with self.assertRaises(DomainError):
            concurrence(np.eye(4))
        rho = np.eye(4, dtype=complex) / 4
        rho[0, 1] = 0.1j
        with self.assertRaises(DomainError):
            concurrence(rho)


class DiscretizedModelTests(SimpleTestCase):

    def setUp(self):
        self.params = ModelParams(0.8, LAM, 1.0, 5.0)

    def test_default_box(self):
        length, modes = default_box(self.params)
        self.assertEqual(length, 200.0)
        self.assertEqual(modes, 4001)
        length, modes = default_box(self.params, modes=11)
        self.assertEqual(modes % 2, 1)
        self.assertGreaterEqual(np.pi * modes / length, 8.0)

    def test_resonant_box_covers_lifetimes(self):
        k_bar = 0.7503333
        params = ModelParams(1.25, LAM, 1.0, np.pi / k_bar)
        length, _ = default_box(params)
        self.assertGreaterEqual(length, 5.0 * k_bar / (8.0 * np.pi * LAM ** 2) * 0.999)

    def test_explicit_sizes_are_checked(self):
        with self.assertRaisesRegex(DomainError, 'max\\(d, 1/M\\)'):
            build(self.params, 100.0, 1001)
        with self.assertRaisesRegex(DomainError, 'k_max'):
            build(self.params, 200.0, 301)
        with self.assertRaises(DomainError):
            build(self.params, 200.0, 1000)
        model = build(self.params, 200.0, 1001)
        self.assertEqual(model.modes, 1001)
        self.assertEqual(model.box_length, 200.0)

    def test_hermitian(self):
        model = build(self.params, 200.0, 1001)
        self.assertLess(model.hermiticity_defect(), 1e-15)
        self.assertEqual(model.hamiltonian.shape, (1003, 1003))
        self.assertAlmostEqual(model.k[model.modes // 2], 0.0)

    def test_free_spectrum(self):
        model = build(ModelParams(0.8, 0.0, 1.0, 5.0), 200.0, 1001)
        expected = np.sort(np.concatenate(([0.8, 0.8], model.omega)))
        self.assertTrue(np.allclose(model.eigenvalues, expected, atol=1e-13))
        for energy, state, _ in eigen_bound_states(model)[:2]:
            self.assertAlmostEqual(energy, 0.8, places=13)
            self.assertLess(state.photon_weight, 1e-20)
            profile = field_profile(state, np.linspace(-5.0, 5.0, 11))
            self.assertTrue(np.all(profile['full_density'] < 1e-20))

    def test_dark_state_at_zero_distance(self):
        params = ModelParams(1.25, LAM, 1.0, 0.0)
        model = build(params, 40.0, 201)
        dark = SingleExcitationState.bell(model, -1).vector
        image = model.hamiltonian @ dark
        self.assertTrue(np.allclose(image, 1.25 * dark, atol=1e-14))

    def test_sub_threshold_levels(self):
        model = build(self.params, 200.0, 1001)
        pairs = [pair for pair in eigen_bound_states(model) if pair[2] == 'below_threshold']
        self.assertEqual(len(pairs), 2)
        levels = off_resonant_states(self.params)
        found = sorted(energy for energy, _, _ in pairs)
        self.assertLess(abs(found[0] - levels.energy_plus), 1e-4)
        self.assertLess(abs(found[1] - levels.energy_minus), 1e-4)
        self.assertAlmostEqual(found[0] - found[1], levels.splitting, delta=0.05 * abs(levels.splitting))
        lower = min(pairs, key=lambda pair: pair[0])[1]
        self.assertGreater(np.real(lower.c_a * np.conj(lower.c_b)), 0.0)

    def test_sub_threshold_levels_converge(self):
        coarse = build(self.params, 200.0, 1001)
        fine = build(self.params, 400.0, 2001)
        for model in (coarse, fine):
            self.assertEqual(np.sum(model.eigenvalues < 1.0), 2)
        difference = np.abs(coarse.eigenvalues[:2] - fine.eigenvalues[:2])
        self.assertTrue(np.all(difference < 1e-5))


class DynamicsTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.params = ModelParams(0.8, LAM, 1.0, 5.0)
        cls.model = build(cls.params, 200.0, 1001)

    def test_norm_and_energy_conservation(self):
        initial = SingleExcitationState.excited_a(self.model)
        result = evolve(self.model, initial, np.linspace(0.0, 150.0, 7))
        for t in result.times:
            state = result.state_at(t)
            self.assertAlmostEqual(state.norm, 1.0, places=10)
            self.assertAlmostEqual(state.energy, initial.energy, places=10)
        self.assertEqual(result.warnings, [])
        self.assertAlmostEqual(result.population_a[0], 1.0, places=12)
        self.assertEqual(list(result.to_frame().columns),
                         ['t', 'population_a', 'population_b', 'atomic_population', 'concurrence'])

    def test_concurrence_matches_amplitude_product(self):
        times = np.linspace(0.0, 150.0, 31)
        for initial in (SingleExcitationState.excited_a(self.model), SingleExcitationState.bell(self.model, 1)):
            result = evolve(self.model, initial, times)
            np.testing.assert_allclose(result.concurrence, 2.0 * np.abs(result.c_a * result.c_b),
                                       rtol=0, atol=1e-6)
        self.assertGreater(result.concurrence[0], 0.99)

    def test_recurrence_warning(self):
        result = evolve(self.model, SingleExcitationState.excited_a(self.model), [0.0, 500.0])
        self.assertIn('recurrence', result.warnings)

    def test_singlet_stays_entangled_at_zero_distance(self):
        params = ModelParams(1.25, LAM, 1.0, 0.0)
        model = build(params, 40.0, 201)
        result = evolve(model, SingleExcitationState.bell(model, -1), np.linspace(0.0, 30.0, 5))
        self.assertTrue(np.allclose(result.concurrence, 1.0, atol=1e-6))

    def test_exchange_oscillation(self):
        levels = off_resonant_states(self.params)
        half = np.pi / abs(levels.beta)
        times = np.linspace(0.0, 3.0 * half, 1500)
        result = evolve(self.model, SingleExcitationState.excited_a(self.model), times)
        population = oscillation_period(times, result.population_a)
        self.assertAlmostEqual(2.0 * population, levels.oscillation_period,
                               delta=0.05 * levels.oscillation_period)
        entangled = oscillation_period(times, result.concurrence)
        self.assertAlmostEqual(4.0 * entangled, levels.oscillation_period,
                               delta=0.05 * levels.oscillation_period)

    def test_evanescent_profile(self):
        energy, state, _ = min(eigen_bound_states(self.model), key=lambda pair: pair[0])
        x = np.linspace(6.0, 14.0, 81)
        profile = field_profile(state, x, energy)
        q = np.sqrt(1.0 - energy ** 2)
        rate = exponential_rate(profile['x'].values, profile['amplitude'].values)
        self.assertAlmostEqual(rate, q, delta=0.1 * q)
        self.assertEqual(list(profile.columns), ['x', 'amplitude', 'pole_density', 'full_density'])


class AnalysisTests(SimpleTestCase):

    def test_exponential_rate(self):
        t = np.linspace(0.0, 10.0, 50)
        self.assertAlmostEqual(exponential_rate(t, 3.0 * np.exp(-0.7 * t)), 0.7, places=10)
        self.assertAlmostEqual(exponential_rate(t, np.exp(-0.2 * t), window=(2.0, 5.0)), 0.2, places=10)
        with self.assertRaises(DomainError):
            exponential_rate(t, np.zeros_like(t))

    def test_period_and_plateau(self):
        t = np.linspace(0.0, 20.0, 2001)
        values = np.cos(2.0 * np.pi * t / 4.0) ** 2 + 0.01 * np.cos(50.0 * t)
        self.assertAlmostEqual(oscillation_period(t, values), 2.0, delta=0.02)
        self.assertAlmostEqual(plateau(t, np.full_like(t, 0.3), (5.0, 6.0)), 0.3, places=14)
        with self.assertRaises(DomainError):
            plateau(t, values, (30.0, 40.0))
        with self.assertRaises(DomainError):
            oscillation_period(t[:100], values[:100])


@pytest.mark.slow
class ResonantDynamicsTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.state = solve_resonant_state(ModelParams(1.25, LAM, 1.0), 1, quadrature=False)
        cls.model = build(cls.state.params)
        cls.gamma = 8.0 * np.pi * LAM ** 2 / cls.state.k_bar

    def test_concurrence_plateau(self):
        gamma = self.gamma
        times = np.linspace(0.0, 5.0 / gamma, 1001)
        result = evolve(self.model, SingleExcitationState.excited_a(self.model), times)
        self.assertEqual(result.warnings, [])
        expected = self.state.p_n ** 2 / 2
        value = plateau(times, result.concurrence, (4.0 / gamma, 5.0 / gamma))
        self.assertAlmostEqual(value, expected, delta=0.02 * expected)
        decaying = np.abs(result.c_a - self.state.sector * result.c_b) ** 2
        rate = exponential_rate(times, decaying, window=(0.5 / gamma, 3.0 / gamma))
        self.assertAlmostEqual(rate, gamma, delta=0.2 * gamma)

    def test_unstable_sector_decay(self):
        gamma = self.gamma
        times = np.linspace(0.1 / gamma, 3.0 / gamma, 300)
        unstable = SingleExcitationState.bell(self.model, -self.state.sector)
        result = evolve(self.model, unstable, times)
        rate = exponential_rate(times, result.atomic_population)
        self.assertAlmostEqual(rate, gamma, delta=0.05 * gamma)

    def test_bound_state_in_continuum(self):
        energy, state, kind = eigen_bound_states(self.model)[-1]
        self.assertEqual(kind, 'continuum')
        self.assertAlmostEqual(state.atomic_weight, self.state.p_n, delta=0.03 * self.state.p_n)
        self.assertAlmostEqual(energy, self.state.energy, delta=1e-4)

        x = np.linspace(0.0, self.state.d_n, 201)
        profile = field_profile(state, x, energy)
        reference = energy_density(self.state, x)
        oracle = profile['pole_density'].values
        correlation = np.dot(oracle, reference.density) / (
            np.linalg.norm(oracle) * np.linalg.norm(reference.density))
        self.assertGreaterEqual(correlation, 0.95)

        expected = reference.dressed_prefactor * self.state.d_n / 2.0
        stored = trapezoid(profile['full_density'].values, x)
        self.assertAlmostEqual(stored, expected, delta=0.05 * expected)
