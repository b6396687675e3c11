import numpy as np
import pytest
from django.test import SimpleTestCase

from dispersion.params import ModelParams
from dispersion.relations import massive_dispersion, quadratic_band
from wqed.exceptions import DomainError, SingularInputError
from .contour import sigma_direct, sigma_generic
from .evaluator import (
    continued_density,
    discontinuity,
    sigma,
    sigma_cut,
    sigma_cut_closed_form,
    sigma_cut_correction,
    sigma_pole,
    spectral_density,
)


def random_points(count, seed):
    rng = np.random.default_rng(seed)
    re = rng.uniform(0.3, 3.0, count)
    im = rng.uniform(0.05, 1.0, count) * rng.choice([-1.0, 1.0], count)
    return re + 1j * im


class SpectralDensityTests(SimpleTestCase):

    def test_dark_sector_at_zero_distance(self):
        params = ModelParams(1.25, 0.01, 1.0, 0.0)
        for E in (1.01, 1.5, 4.0):
            self.assertEqual(spectral_density(params, -1, E), 0.0)

    def test_resonant_suppression(self):
        params = ModelParams(1.25, 0.01, 1.0, np.pi)
        self.assertAlmostEqual(spectral_density(params, 1, np.sqrt(2.0)), 0.0, places=14)
        self.assertAlmostEqual(spectral_density(params, -1, np.sqrt(2.0)), 2.0, places=14)

    def test_support_and_sum_rule(self):
        params = ModelParams(1.25, 0.01, 1.0, 3.7)
        self.assertEqual(spectral_density(params, 1, 0.9), 0.0)
        for E in np.linspace(1.01, 5.0, 25):
            k = np.sqrt(E * E - 1.0)
            plus = spectral_density(params, 1, E)
            minus = spectral_density(params, -1, E)
            self.assertGreaterEqual(plus, 0.0)
            self.assertGreaterEqual(minus, 0.0)
            self.assertAlmostEqual(plus + minus, 2.0 / k, places=12)

    def test_threshold_values(self):
        params = ModelParams(1.25, 0.01, 1.0, 2.0)
        self.assertEqual(spectral_density(params, 1, 1.0), np.inf)
        self.assertEqual(spectral_density(params, -1, 1.0), 0.0)

    def test_continued_density_matches_real_axis(self):
        params = ModelParams(1.25, 0.01, 1.0, 4.0)
        for s in (1, -1):
            value = continued_density(params, s, 1.7)
            self.assertAlmostEqual(value.real, spectral_density(params, s, 1.7), places=13)
            self.assertAlmostEqual(value.imag, 0.0, places=14)

    def test_rejects_bad_sector(self):
        with self.assertRaises(DomainError):
            spectral_density(ModelParams(1.25, 0.01), 0, 1.5)


class PoleTermTests(SimpleTestCase):

    def setUp(self):
        self.params = ModelParams(1.25, 0.01, 1.0, np.pi)

    def test_resonant_examples(self):
        z = np.sqrt(2.0)
        self.assertAlmostEqual(sigma_pole(self.params, 1, z, side=1), 0.0, places=13)
        self.assertAlmostEqual(sigma_pole(self.params, -1, z, side=1), -4j * np.pi, places=13)

    def test_lower_side(self):
        z = np.sqrt(2.0)
        self.assertAlmostEqual(sigma_pole(self.params, -1, z, side=-1), 4j * np.pi, places=13)

    def test_untagged_real_on_cut(self):
        with self.assertRaises(SingularInputError):
            sigma_pole(self.params, 1, 1.5)

    def test_branch_point(self):
        with self.assertRaises(SingularInputError):
            sigma_pole(self.params, 1, 1.0, side=1)

    def test_below_threshold_is_real(self):
        q = np.sqrt(1.0 - 0.64)
        expected = -2.0 * np.pi * (1.0 + np.exp(-q * np.pi)) / q
        self.assertAlmostEqual(sigma_pole(self.params, 1, 0.8), expected, places=12)
        self.assertAlmostEqual(sigma_pole(self.params, 1, 0.8, side=-1), expected, places=12)


class CutTermTests(SimpleTestCase):

    def test_closed_form_spot_value(self):
        params = ModelParams(1.25, 0.01, 1.0, 0.0)
        expected = 2.0 * np.log(2.0 + np.sqrt(3.0)) / np.sqrt(3.0)
        self.assertAlmostEqual(sigma_cut_closed_form(params, 2.0), expected, places=14)

    def test_closed_form_threshold_limit(self):
        params = ModelParams(1.25, 0.01, 2.0, 0.0)
        self.assertAlmostEqual(sigma_cut_closed_form(params, 2.0 + 1e-12), 1.0, places=10)
        self.assertAlmostEqual(sigma_cut_closed_form(params, 2.0 + 1e-4), 1.0, places=3)

    def test_quadrature_matches_closed_form_without_distance_term(self):
        params = ModelParams(1.25, 0.01, 1.0, 80.0)
        for z in (2.0, 1.2, 0.7, 1.3 - 0.4j, 2.5 + 0.8j):
            full = sigma_cut(params, 1, z)
            closed = sigma_cut_closed_form(params, z)
            self.assertLess(abs(full - closed), 1e-10 * abs(closed))

    def test_zero_distance_doubles_or_cancels(self):
        params = ModelParams(1.25, 0.01, 1.0, 0.0)
        closed = sigma_cut_closed_form(params, 1.6)
        self.assertLess(abs(sigma_cut(params, 1, 1.6) - 2.0 * closed), 1e-9)
        self.assertLess(abs(sigma_cut(params, -1, 1.6)), 1e-9)

    def test_exponential_suppression(self):
        previous = None
        for md in (5.0, 10.0, 15.0, 20.0):
            params = ModelParams(1.25, 0.01, 1.0, md)
            for s in (1, -1):
                gap = abs(sigma_cut(params, s, 1.2) - sigma_cut_closed_form(params, 1.2))
                self.assertLessEqual(gap, np.exp(-md) + 1e-11)
            scaled = abs(sigma_cut_correction(params, 1.2)) * np.exp(md)
            self.assertLess(scaled, 1.0)
            if previous is not None:
                self.assertLess(scaled, previous)
            previous = scaled

    def test_rejects_imaginary_axis(self):
        with self.assertRaises(DomainError):
            sigma_cut(ModelParams(1.25, 0.01), 1, 0.5j)


class SigmaTests(SimpleTestCase):

    def setUp(self):
        self.params = ModelParams(1.25, 0.01, 1.0, 4.0)

    def test_discontinuity_identity(self):
        for E in np.linspace(1.05, 3.0, 12):
            for s in (1, -1):
                jump = discontinuity(self.params, s, E)
                expected = 4j * np.pi * spectral_density(self.params, s, E)
                self.assertLess(abs(jump - expected), 1e-8 * max(1.0, abs(expected)))

    def test_discontinuity_spot_value(self):
        jump = discontinuity(self.params, 1, 1.5)
        self.assertAlmostEqual(jump.real, 0.0, places=12)
        self.assertGreater(jump.imag, 0.0)

    def test_cut_plus_pole_matches_direct_quadrature(self):
        for z in random_points(20, seed=3):
            for s in (1, -1):
                split = sigma(self.params, s, z).total
                direct = sigma_direct(self.params, s, z)
                self.assertLess(abs(split - direct), 1e-8 * abs(direct), msg=f"z={z}, s={s}")

    @pytest.mark.slow
    def test_cut_plus_pole_matches_direct_quadrature_dense(self):
        for z in random_points(200, seed=19):
            s = 1 if z.imag > 0 else -1
            split = sigma(self.params, s, z).total
            direct = sigma_direct(self.params, s, z)
            self.assertLess(abs(split - direct), 1e-8 * abs(direct), msg=f"z={z}, s={s}")

    def test_schwarz_reflection(self):
        for z in random_points(15, seed=5):
            for s in (1, -1):
                value = sigma(self.params, s, z).total
                mirrored = sigma(self.params, s, np.conj(z)).total
                self.assertLess(abs(mirrored - np.conj(value)), 1e-12 * abs(value))

    def test_total_is_sum_of_parts(self):
        value = sigma(self.params, 1, 1.4 - 0.02j, sheet='II')
        self.assertEqual(value.total, value.cut_part + value.pole_part + value.continuation_part)
        self.assertEqual(value.as_dict()['sheet'], 'II')

    def test_second_sheet_is_continuous_through_cut(self):
        for E in (1.1, 1.5, 2.4):
            for s in (1, -1):
                above = sigma(self.params, s, E + 1e-9j).total
                below = sigma(self.params, s, E - 1e-9j, sheet='II').total
                self.assertLess(abs(above - below), 1e-6 * abs(above))

    def test_second_sheet_on_cut_equals_upper_side(self):
        for s in (1, -1):
            upper = sigma(self.params, s, 1.5, side=1).total
            continued = sigma(self.params, s, 1.5, sheet='II').total
            self.assertLess(abs(upper - continued), 1e-12 * abs(upper))

    def test_dark_sector_has_no_second_sheet(self):
        params = ModelParams(1.25, 0.01, 1.0, 0.0)
        for z in (1.3 - 0.2j, 2.0 - 0.01j):
            first = sigma(params, -1, z).total
            second = sigma(params, -1, z, sheet='II').total
            self.assertAlmostEqual(first, second, places=12)

    def test_second_sheet_domain(self):
        with self.assertRaises(DomainError):
            sigma(self.params, 1, 1.5 + 0.1j, sheet='II')
        with self.assertRaises(DomainError):
            sigma(self.params, 1, 1.5 - 0.1j, sheet='III')
        with self.assertRaises(SingularInputError):
            sigma(self.params, 1, 1.5)

    def test_below_threshold_closed_expression(self):
        z = 0.9
        q = np.sqrt(1.0 - z * z)
        for s in (1, -1):
            expected = -(np.pi + 2.0 * np.arctan(z / q)) / q - 2.0 * np.pi * s * np.exp(-q * 4.0) / q
            expected += s * sigma_cut_correction(self.params, z)
            value = sigma(self.params, s, z).total
            self.assertLess(abs(value - expected), 1e-9 * abs(expected))


class ContourTests(SimpleTestCase):

    def test_generic_path_reproduces_massive_sheets(self):
        params = ModelParams(1.25, 0.01, 1.0, 3.0)
        for s in (1, -1):
            for z, sheet in ((1.4 + 0.3j, 'I'), (1.4 - 0.3j, 'I'), (1.4 - 0.01j, 'II')):
                expected = sigma(params, s, z, sheet=sheet).total
                value = sigma_generic(params, s, z, sheet=sheet)
                self.assertLess(abs(value - expected), 1e-8 * abs(expected), msg=f"{z} {sheet}")

    def test_generic_path_on_cut(self):
        params = ModelParams(1.25, 0.01, 1.0, 3.0)
        for side in (1, -1):
            expected = sigma(params, 1, 1.6, side=side).total
            value = sigma_generic(params, 1, 1.6, side=side)
            self.assertLess(abs(value - expected), 1e-8 * abs(expected))

    def test_generic_relation_discontinuity(self):
        band = quadratic_band(1.0, 0.5)
        params = ModelParams(1.25, 0.01, 1.0, 2.0)
        for s in (1, -1):
            jump = discontinuity(params, s, 1.5, dispersion=band)
            expected = 4j * np.pi * spectral_density(params, s, 1.5, dispersion=band)
            self.assertLess(abs(jump - expected), 1e-8 * max(1.0, abs(expected)))

    def test_generic_second_sheet_continuity(self):
        band = quadratic_band(1.0, 0.5)
        params = ModelParams(1.25, 0.01, 1.0, 2.0)
        above = sigma(params, 1, 1.5 + 1e-9j, dispersion=band).total
        below = sigma(params, 1, 1.5 - 1e-9j, sheet='II', dispersion=band).total
        self.assertLess(abs(above - below), 1e-6 * abs(above))

    def test_pole_too_deep_for_contour(self):
        params = ModelParams(1.25, 0.01, 1.0, 3.0)
        with self.assertRaises(DomainError):
            sigma_generic(params, 1, 1.1 - 0.8j, sheet='II')

    def test_direct_needs_complex_energy(self):
        with self.assertRaises(SingularInputError):
            sigma_direct(ModelParams(1.25, 0.01), 1, 1.5)

    def test_massive_default(self):
        params = ModelParams(1.25, 0.01, 1.0, 0.0)
        value = sigma_generic(params, 1, 1.5 + 0.2j, dispersion=massive_dispersion(1.0))
        self.assertAlmostEqual(value, sigma_generic(params, 1, 1.5 + 0.2j), places=14)
