import argparse
import logging
import os

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from django.test.utils import override_settings
from dotenv import dotenv_values

from cli.reports import render_csv, write_atomic, write_report
from cli.runner import run
from cli.serializers import OracleSizingSerializer, RunConfigSerializer, SweepSerializer
from wqed.exceptions import NumericalFailure, WaveguideError

logger = logging.getLogger(__name__)

EXIT_INVALID = 2
EXIT_CONVERGENCE = 3
EXIT_PARTIAL = 4

SWEEP_COMMANDS = ('trajectory', 'concurrence-scan')

# command-line flag -> configuration key
FLAG_KEYS = {
    'omega0': 'omega0',
    'lambda': 'lam',
    'mass': 'mass',
    'distance': 'distance',
    'out': 'out',
    'format': 'format',
    'jobs': 'jobs',
    'exact': 'exact',
    'verbose': 'verbose',
    'no_header': 'no_header',
    'n': 'n',
    'index': 'n',
    'sweep': 'sweep',
    'start': 'start',
    'stop': 'stop',
    'steps': 'steps',
    'times': 'times',
    'oracle_modes': 'oracle_modes',
    'oracle_box': 'oracle_box',
    'initial': 'initial',
    'snapshots': 'snapshots',
    'self_consistent': 'self_consistent',
    'quad_rtol': 'quad_rtol',
    'newton_tol': 'newton_tol',
}

TOLERANCE_KEYS = {'quad_rtol': 'QUAD_RTOL', 'newton_tol': 'NEWTON_TOL'}


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='key=value file whose keys mirror the flags')
    common.add_argument('--omega0')
    common.add_argument('--lambda', dest='lambda')
    common.add_argument('--mass')
    common.add_argument('--distance', help='number or auto:n=K')
    common.add_argument('--out', help='output file; stdout when omitted')
    common.add_argument('--format', help='csv or json')
    common.add_argument('--jobs')
    common.add_argument('--exact', action='store_true', default=None)
    common.add_argument('--verbose', action='store_true', default=None)
    common.add_argument('--no-header', dest='no_header', action='store_true', default=None)
    common.add_argument('--quad-rtol', dest='quad_rtol')
    common.add_argument('--newton-tol', dest='newton_tol')
    return common


def _sweep_flags() -> argparse.ArgumentParser:
    sweep = argparse.ArgumentParser(add_help=False)
    sweep.add_argument('--sweep', help='omega0 or distance')
    sweep.add_argument('--start')
    sweep.add_argument('--stop')
    sweep.add_argument('--steps')
    sweep.add_argument('--index', dest='n', help='resonance index n >= 1')
    return sweep


class Command(BaseCommand):
    help = 'Bound states, poles and entanglement of two emitters coupled to a waveguide'

    def add_arguments(self, parser):
        common = _common_flags()
        sweep = _sweep_flags()
        subparsers = parser.add_subparsers(dest='subcommand', required=True)
        subparsers.add_parser('poles', parents=[common])
        subparsers.add_parser('trajectory', parents=[common, sweep])
        subparsers.add_parser('concurrence-scan', parents=[common, sweep])
        density = subparsers.add_parser('energy-density', parents=[common])
        density.add_argument('--index', dest='n', help='resonance index n >= 1')
        offres = subparsers.add_parser('offres', parents=[common])
        offres.add_argument('--self-consistent', dest='self_consistent', action='store_true', default=None)
        simulate = subparsers.add_parser('simulate', parents=[common])
        simulate.add_argument('--times', help='START:STOP:COUNT')
        simulate.add_argument('--oracle-modes', dest='oracle_modes')
        simulate.add_argument('--oracle-box', dest='oracle_box')
        simulate.add_argument('--initial', help='excited_a, excited_b or bell')
        simulate.add_argument('--snapshots', help='number of field-profile snapshots')

    def _collect(self, options) -> dict:
        raw = {}
        if options.get('config'):
            path = options['config']
            if not os.path.exists(path):
                raise CommandError(f"config file {path} does not exist", returncode=EXIT_INVALID)
            for key, value in dotenv_values(path).items():
                key = key.strip().replace('-', '_')
                if key not in FLAG_KEYS:
                    raise CommandError(f"unknown config key {key!r} in {path}", returncode=EXIT_INVALID)
                raw[FLAG_KEYS[key]] = value
        for flag, key in FLAG_KEYS.items():
            if options.get(flag) is not None:
                raw[key] = options[flag]
        raw['subcommand'] = options['subcommand']
        return raw

    def _validate(self, raw: dict) -> dict:
        raw = dict(raw)
        raw.setdefault('jobs', settings.DEFAULT_JOBS)
        if raw['subcommand'] == 'concurrence-scan':
            raw.setdefault('omega0', raw.get('start'))
        raw['header'] = not _truthy(raw.pop('no_header', False))
        tolerance_overrides = {}
        for key, name in TOLERANCE_KEYS.items():
            if key in raw:
                try:
                    tolerance_overrides[name] = float(raw.pop(key))
                except ValueError:
                    raise CommandError(f"{key} must be a number", returncode=EXIT_INVALID)

        serializers = [RunConfigSerializer(data=raw), OracleSizingSerializer(data=raw)]
        if raw['subcommand'] in SWEEP_COMMANDS:
            serializers.append(SweepSerializer(data=raw))
        config = {}
        for serializer in serializers:
            if not serializer.is_valid():
                messages = '; '.join(
                    f"{field}: {' '.join(str(error) for error in errors)}"
                    for field, errors in serializer.errors.items()
                )
                logger.error(f"Invalid configuration: {messages}")
                raise CommandError(f"invalid configuration: {messages}", returncode=EXIT_INVALID)
            config.update(serializer.validated_data)
        if config.get('snapshots') and config.get('out') is None:
            raise CommandError("--snapshots needs --out", returncode=EXIT_INVALID)
        config['tolerance_overrides'] = tolerance_overrides
        return config

    def handle(self, *args, **options):
        config = self._validate(self._collect(options))
        overrides = config.pop('tolerance_overrides')

        try:
            with override_settings(**overrides):
                report = run(config)
        except NumericalFailure as exc:
            logger.error(f"Solver did not converge: {exc.message}")
            raise CommandError(f"solver did not converge: {exc.message}", returncode=EXIT_CONVERGENCE)
        except WaveguideError as exc:
            logger.error(f"{type(exc).__name__}: {exc.message}")
            raise CommandError(exc.message, returncode=EXIT_INVALID)

        embedded = _embedded_config(config, report.resolved)
        with override_settings(**overrides):
            write_report(embedded, config['out'], config['format'], frame=report.frame,
                         report=report.report, exact=config['exact'], header=config['header'])
            for name, frame in report.snapshots.items():
                write_atomic(render_csv(frame, embedded, config['header']), _snapshot_path(config['out'], name))

        if report.partial:
            raise CommandError("results are partial; see the failure indices in the report",
                               returncode=EXIT_PARTIAL)


def _truthy(value) -> bool:
    if isinstance(value, bool):
        return value
    return str(value).strip().lower() in ('1', 'true', 'yes', 'on')


def _embedded_config(config: dict, resolved: dict) -> dict:
    embedded = {key: value for key, value in config.items() if key not in ('out',)}
    embedded['lambda'] = embedded.pop('lam')
    if isinstance(embedded.get('times'), tuple):
        embedded['times'] = ':'.join(str(part) for part in embedded['times'])
    for key, value in resolved.items():
        embedded[f"resolved_{key}"] = value
    return embedded


def _snapshot_path(out: str, name: str) -> str:
    stem, _ = os.path.splitext(out)
    return f"{stem}_{name}.csv"
