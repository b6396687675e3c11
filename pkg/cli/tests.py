import io
import json
import os
import tempfile
from unittest import mock

import numpy as np
import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from .main import main
from .reports import write_atomic

LAM = '0.01'


class CommandTestCase(SimpleTestCase):

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = self._tmp.name

    def tearDown(self):
        self._tmp.cleanup()

    def path(self, name):
        return os.path.join(self.tmp, name)

    def run_json(self, *args):
        out = self.path('report.json')
        call_command('waveguide', *args, '--format', 'json', '--out', out)
        with open(out) as handle:
            return json.load(handle)

    def run_csv(self, *args, name='report.csv'):
        out = self.path(name)
        call_command('waveguide', *args, '--out', out)
        return pd.read_csv(out, comment='#')

    def assertExitCode(self, code, *args):
        with self.assertRaises(CommandError) as context:
            call_command('waveguide', *args)
        self.assertEqual(context.exception.returncode, code)
        return context.exception


class PolesCommandTests(CommandTestCase):

    def test_resonant_poles(self):
        document = self.run_json('poles', '--omega0', '1.25', '--lambda', LAM, '--mass', '1',
                                 '--distance', 'auto:n=1')
        rows = {row['sector']: row for row in document['rows']}
        self.assertLessEqual(rows[1]['gamma_p'], 1e-8)
        gamma = rows[-1]['gamma_p']
        self.assertAlmostEqual(gamma, 3.3495e-3, delta=0.02 * gamma)
        self.assertAlmostEqual(rows[-1]['gamma_perturbative'], gamma, delta=0.02 * gamma)
        self.assertEqual(document['config']['distance'], 'auto:n=1')
        self.assertAlmostEqual(document['config']['resolved_distance'], np.pi / 0.7503333, places=4)
        self.assertIn('newton_tol', document['tolerances'])

    def test_free_theory(self):
        document = self.run_json('poles', '--omega0', '1.25', '--lambda', '0', '--distance', '3')
        for row in document['rows']:
            self.assertEqual(row['E_p'], 1.25)
            self.assertEqual(row['gamma_p'], 0.0)

    def test_no_resonance_below_threshold(self):
        error = self.assertExitCode(2, 'poles', '--omega0', '0.8', '--lambda', LAM, '--distance', 'auto:n=1')
        self.assertIn('no resonant wavenumber', str(error))

    def test_exact_numbers(self):
        document = self.run_json('poles', '--omega0', '1.25', '--lambda', '0', '--distance', '3', '--exact')
        self.assertEqual(document['rows'][0]['E_p'], '1.25')


class ValidationTests(CommandTestCase):

    def test_invalid_values(self):
        self.assertExitCode(2, 'poles', '--omega0', '1.25', '--lambda', LAM, '--format', 'xml')
        self.assertExitCode(2, 'poles', '--omega0', '1.25', '--lambda', '-1')
        self.assertExitCode(2, 'poles', '--omega0', '1.25', '--lambda', LAM, '--mass', '0')
        self.assertExitCode(2, 'poles', '--omega0', '1.25', '--lambda', LAM, '--distance', 'auto:n=0')
        self.assertExitCode(2, 'poles', '--lambda', LAM)
        self.assertExitCode(2, 'poles', '--omega0', '1.25', '--lambda', LAM, '--jobs', '0')
        self.assertExitCode(2, 'simulate', '--omega0', '0.8', '--lambda', LAM, '--distance', '5',
                            '--oracle-modes', '1000')

    def test_single_step_sweep(self):
        self.assertExitCode(2, 'trajectory', '--omega0', '1.2', '--lambda', LAM, '--distance', '15',
                            '--start', '1.2', '--stop', '1.3', '--steps', '1')

    def test_config_file(self):
        config = self.path('run.cfg')
        with open(config, 'w') as handle:
            handle.write('omega0=0.8\nlambda=0.01\ndistance=5\nformat=json\n')
        out = self.path('offres.json')
        call_command('waveguide', 'offres', '--config', config, '--distance', '4', '--out', out)
        with open(out) as handle:
            document = json.load(handle)
        self.assertEqual(document['config']['omega0'], 0.8)
        self.assertEqual(document['config']['distance'], '4')

    def test_unknown_config_key(self):
        config = self.path('run.cfg')
        with open(config, 'w') as handle:
            handle.write('omega=0.8\n')
        self.assertExitCode(2, 'offres', '--config', config)


class TrajectoryCommandTests(CommandTestCase):
    args = ('trajectory', '--omega0', '1.2', '--lambda', LAM, '--distance', '15',
            '--sweep', 'omega0', '--steps', '5')

    def test_columns_and_determinism(self):
        first = self.path('first.csv')
        second = self.path('second.csv')
        call_command('waveguide', *self.args, '--start', '1.2', '--stop', '1.3', '--out', first)
        call_command('waveguide', *self.args, '--start', '1.2', '--stop', '1.3', '--out', second)
        with open(first, 'rb') as a, open(second, 'rb') as b:
            self.assertEqual(a.read(), b.read())
        frame = pd.read_csv(first, comment='#')
        self.assertEqual(list(frame.columns),
                         ['sweep_value', 'sector', 'E_p', 'gamma_p', 'defect', 'converged', 'threshold'])
        self.assertEqual(len(frame), 10)

    def test_reversed_sweep(self):
        forward = self.run_csv(*self.args, '--start', '1.2', '--stop', '1.3', name='forward.csv')
        backward = self.run_csv(*self.args, '--start', '1.3', '--stop', '1.2', name='backward.csv')
        for s in (1, -1):
            a = forward[forward['sector'] == s].reset_index(drop=True)
            b = backward[backward['sector'] == s].iloc[::-1].reset_index(drop=True)
            np.testing.assert_allclose(a['sweep_value'], b['sweep_value'], rtol=0, atol=1e-15)
            np.testing.assert_allclose(a['E_p'], b['E_p'], rtol=0, atol=1e-9)
            np.testing.assert_allclose(a['gamma_p'], b['gamma_p'], rtol=0, atol=1e-9)

    def test_header_toggle(self):
        out = self.path('bare.csv')
        call_command('waveguide', *self.args, '--start', '1.2', '--stop', '1.3', '--out', out, '--no-header')
        with open(out) as handle:
            self.assertTrue(handle.readline().startswith('sweep_value,'))

    @override_settings(NEWTON_MAX_ITER=0)
    def test_partial_results(self):
        out = self.path('partial.csv')
        self.assertExitCode(4, *self.args, '--start', '1.2', '--stop', '1.3', '--out', out)
        frame = pd.read_csv(out, comment='#')
        self.assertFalse(frame['converged'].any())


class ConcurrenceScanTests(CommandTestCase):

    def test_scan(self):
        frame = self.run_csv('concurrence-scan', '--lambda', LAM, '--start', '0.85', '--stop', '1.25',
                             '--steps', '5')
        self.assertEqual(list(frame.columns[:6]), ['omega0', 'n', 'k_bar', 'd_n', 'p_n', 'concurrence'])
        self.assertEqual(len(frame), 15)
        absent = frame[frame['omega0'] < 1.0]
        self.assertTrue(absent['absent'].all())
        self.assertTrue(absent['concurrence'].isna().all())
        for n in (1, 2, 3):
            values = frame[(frame['n'] == n) & ~frame['absent']]['concurrence'].to_numpy()
            self.assertTrue(np.all(np.diff(values) > 0))

    def test_spot_value(self):
        frame = self.run_csv('concurrence-scan', '--lambda', LAM, '--start', '1.25', '--stop', '1.3',
                             '--steps', '2', '--index', '1', '--verbose')
        self.assertAlmostEqual(frame['concurrence'][0], 0.4953, delta=0.0005)
        self.assertIn('p_n_quadrature', frame.columns)


class ReportCommandTests(CommandTestCase):

    def test_energy_density_nodes(self):
        frame = self.run_csv('energy-density', '--omega0', '1.25', '--lambda', LAM, '--index', '1')
        document = self.run_json('energy-density', '--omega0', '1.25', '--lambda', LAM, '--index', '1')
        d_n = document['report']['d_n']
        for x in (0.0, d_n):
            index = int(np.argmin(np.abs(frame['x'] - x)))
            self.assertAlmostEqual(frame['x'][index], x, places=12)
            self.assertEqual(frame['density'][index], 0.0)
        self.assertAlmostEqual(frame['density'].max(), document['report']['prefactor'], delta=1e-3 * frame['density'].max())

    def test_offres_period(self):
        document = self.run_json('offres', '--omega0', '0.8', '--lambda', LAM, '--distance', '5')
        report = document['report']
        self.assertAlmostEqual(report['oscillation_period'], 2 * np.pi / abs(report['beta']), places=6)
        self.assertEqual(report['threshold_singlet_sector'], -1)

    def test_simulate(self):
        frame = self.run_csv('simulate', '--omega0', '0.8', '--lambda', LAM, '--distance', '5',
                             '--oracle-box', '200', '--oracle-modes', '1001', '--times', '0:100:11',
                             '--snapshots', '2')
        self.assertEqual(list(frame.columns),
                         ['t', 'population_a', 'population_b', 'atomic_population', 'concurrence'])
        self.assertEqual(len(frame), 11)
        self.assertAlmostEqual(frame['population_a'][0], 1.0, places=12)
        self.assertAlmostEqual(frame['concurrence'][0], 0.0, places=12)
        snapshots = sorted(name for name in os.listdir(self.tmp) if '_snapshot_' in name)
        self.assertEqual(len(snapshots), 2)
        profile = pd.read_csv(self.path(snapshots[-1]), comment='#')
        self.assertEqual(list(profile.columns), ['x', 'amplitude', 'pole_density', 'full_density'])

    def test_console_script(self):
        out = self.path('console.json')
        main(['offres', '--omega0', '0.8', '--lambda', LAM, '--distance', '5', '--format', 'json', '--out', out])
        with open(out) as handle:
            self.assertIn('E_plus', json.load(handle)['report'])


class FailureExitTests(CommandTestCase):

    @override_settings(NEWTON_MAX_ITER=0)
    def test_non_convergence(self):
        out = self.path('poles.json')
        error = self.assertExitCode(3, 'poles', '--omega0', '1.25', '--lambda', LAM, '--distance', '3',
                                    '--out', out)
        self.assertIn('did not converge', str(error))
        self.assertFalse(os.path.exists(out))

    def test_missing_singlet_level(self):
        error = self.assertExitCode(2, 'offres', '--omega0', '0.9999', '--lambda', LAM, '--distance', '0.1',
                                    '--self-consistent')
        self.assertIn('sector -1', str(error))

    def test_snapshots_need_output_file(self):
        with mock.patch('sys.stdout', new_callable=io.StringIO) as stdout:
            self.assertExitCode(2, 'simulate', '--omega0', '0.8', '--lambda', LAM, '--distance', '5',
                                '--oracle-box', '200', '--oracle-modes', '1001', '--times', '0:100:11',
                                '--snapshots', '2')
        self.assertEqual(stdout.getvalue(), '')


class WriteAtomicTests(CommandTestCase):

    def test_replaces_file(self):
        out = self.path('report.csv')
        write_atomic('a\n', out)
        write_atomic('b\n', out)
        with open(out) as handle:
            self.assertEqual(handle.read(), 'b\n')
        self.assertEqual(os.listdir(self.tmp), ['report.csv'])

    def test_failed_write_leaves_nothing_behind(self):
        out = self.path('report.csv')
        with self.assertRaises(TypeError):
            write_atomic(42, out)
        self.assertEqual(os.listdir(self.tmp), [])
