import numpy as np
from django.test import SimpleTestCase, override_settings

from wqed.exceptions import DomainError, ResonanceAbsentError, SingularInputError
from .params import ModelParams, parse_distance, resolve_distance
from .relations import (
    RectangularWaveguide,
    invert_energy,
    massive_dispersion,
    quadratic_band,
    resonant_wavenumber,
)


class ModelParamsTests(SimpleTestCase):

    def test_rejects_nonpositive_mass(self):
        with self.assertRaises(DomainError):
            ModelParams(1.25, 0.01, 0.0, 1.0)

    def test_rejects_negative_coupling_and_distance(self):
        with self.assertRaises(DomainError):
            ModelParams(1.25, -0.01, 1.0, 1.0)
        with self.assertRaises(DomainError):
            ModelParams(1.25, 0.01, 1.0, -1.0)

    def test_perturbative_tag(self):
        self.assertEqual(ModelParams(1.25, 0.01).tags, [])
        self.assertEqual(ModelParams(1.25, 0.5).tags, ['nonperturbative'])

    @override_settings(PERTURBATIVE_LIMIT=0.001)
    def test_perturbative_limit_comes_from_settings(self):
        self.assertEqual(ModelParams(1.25, 0.01).tags, ['nonperturbative'])

    def test_parse_distance(self):
        self.assertEqual(parse_distance('4.5'), (4.5, None))
        self.assertEqual(parse_distance(3), (3.0, None))
        self.assertEqual(parse_distance('auto:n=2'), (None, 2))
        with self.assertRaises(DomainError):
            parse_distance('auto:n=x')

    def test_resolve_auto_distance(self):
        params = resolve_distance(1.25, 0.01, 1.0, 'auto:n=1')
        k_bar = resonant_wavenumber(params)
        self.assertAlmostEqual(params.distance * k_bar, np.pi, places=12)

    def test_resolve_auto_distance_below_threshold(self):
        with self.assertRaises(ResonanceAbsentError):
            resolve_distance(0.5, 0.01, 1.0, 'auto:n=1')


class MassiveDispersionTests(SimpleTestCase):

    def setUp(self):
        self.disp = massive_dispersion(1.0)

    def test_rejects_nonpositive_mass(self):
        with self.assertRaises(DomainError):
            massive_dispersion(0.0)

    def test_values(self):
        self.assertAlmostEqual(self.disp.omega(0.0), 1.0)
        self.assertAlmostEqual(self.disp.omega(0.75), 1.25)
        self.assertAlmostEqual(self.disp.omega(-0.75), 1.25)
        self.assertEqual(invert_energy(self.disp, 1.25), 0.75)

    def test_evanescent_inverse(self):
        k = invert_energy(self.disp, 0.8)
        self.assertAlmostEqual(k, 0.6j, places=14)

    def test_complex_round_trip(self):
        z = 1.25 - 0.001j
        k = invert_energy(self.disp, z)
        self.assertGreater(k.real, 0)
        self.assertLess(k.imag, 0)
        self.assertAlmostEqual(k * k, z * z - 1.0, places=14)

    def test_branch_point_rejected(self):
        with self.assertRaises(SingularInputError):
            invert_energy(self.disp, 1.0)
        with self.assertRaises(SingularInputError):
            invert_energy(self.disp, -1.0)

    def test_even_and_increasing(self):
        rng = np.random.default_rng(7)
        k = np.sort(rng.uniform(0.0, 20.0, 500))
        w = self.disp.omega(k)
        np.testing.assert_allclose(w, self.disp.omega(-k), rtol=0, atol=0)
        self.assertTrue(np.all(np.diff(w) >= 0))
        self.assertTrue(np.all(w >= self.disp.omega_min))

    def test_round_trip_off_cut(self):
        rng = np.random.default_rng(11)
        z = rng.uniform(0.1, 4.0, 200) + 1j * rng.uniform(-2.0, 2.0, 200)
        for value in z:
            k = invert_energy(self.disp, value)
            self.assertGreaterEqual(k.real, 0.0)
            back = self.disp.omega(k)
            self.assertLess(abs(back - value), 1e-12 * abs(value))

    def test_inverse_of_real_wavenumbers(self):
        for k in (0.01, 0.3, 1.0, 7.5):
            self.assertAlmostEqual(invert_energy(self.disp, self.disp.omega(k)).real, k, places=12)

    def test_lower_determination(self):
        self.assertAlmostEqual(self.disp.k0_lower(0.8), -0.6j, places=14)
        z = 1.1 - 0.2j
        self.assertAlmostEqual(self.disp.k0_lower(z), self.disp.k0(z), places=14)

    def test_pole_denominator_is_k0(self):
        k = invert_energy(self.disp, 1.7 - 0.1j)
        self.assertAlmostEqual(self.disp.pole_denominator(k), k, places=13)


class ResonantWavenumberTests(SimpleTestCase):

    def test_leading_order_value(self):
        k_bar = resonant_wavenumber(ModelParams(1.25, 1e-2, 1.0))
        self.assertAlmostEqual(k_bar, np.sqrt(1.2502 ** 2 - 1.0), places=14)
        self.assertAlmostEqual(k_bar, 0.7503333, places=6)

    def test_absent_below_threshold(self):
        self.assertIsNone(resonant_wavenumber(ModelParams(0.5, 1e-2, 1.0)))

    def test_free_limit(self):
        self.assertEqual(resonant_wavenumber(ModelParams(1.25, 0.0, 1.0)), 0.75)

    def test_generic_relation_uses_bare_energy(self):
        band = quadratic_band(1.0, 0.5)
        k_bar = resonant_wavenumber(ModelParams(1.25, 1e-2, 1.0), band)
        self.assertAlmostEqual(band.omega(k_bar), 1.25, places=14)


class RectangularWaveguideTests(SimpleTestCase):

    def test_mass_from_wide_side(self):
        guide = RectangularWaveguide(np.pi, np.pi / 2)
        self.assertAlmostEqual(guide.mass, 1.0)
        self.assertTrue(guide.te10_is_fundamental)
        self.assertAlmostEqual(guide.dispersion().omega(0.75), 1.25)

    def test_rejects_nonpositive_side(self):
        with self.assertRaises(DomainError):
            RectangularWaveguide(0.0, 1.0)

    def test_flags_swapped_sides(self):
        with self.assertLogs('dispersion.relations', level='WARNING'):
            guide = RectangularWaveguide(1.0, 2.0)
        self.assertFalse(guide.te10_is_fundamental)
