"""
The sideband command line.

    python manage.py sideband table
    python manage.py sideband map dqd --tunnel-2t-ghz 10 --bz-ghz 6 --bx-ghz 1.5 ...
    python manage.py sideband check --config sideband/configs/rc7.cfg
    python manage.py sideband search --condition rc7 --qmax 8 --pmax 20 --mmax 50 --eta-ghz 0.05
    python manage.py sideband simulate --config sideband/configs/rc7.cfg
    python manage.py sideband sweep --config sideband/configs/rc9.cfg --gamma 0.1:100:log4 --kappa 0.1:100:log4

Exit codes: 0 on success, 2 for invalid input, 3 when a numerical check fails.
"""

from dataclasses import replace
from pathlib import Path
import json
import logging

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from sideband.exceptions import SidebandError
from sideband.runconfig import (
    csv_text, json_text, load_config, parse_grid, population_table, unit_metadata, write_output,
)
from sideband.search import CSV_COLUMNS
from sideband.services import SidebandService

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ('gamma_khz', 'kappa_khz', 'error')
TABLE_KEYS = ('R', 'resonance', 'constraints', 'interaction', 'gate')


class Command(BaseCommand):
    help = 'Sideband-resonance gate toolkit: tables, mappings, checks, search, simulation and sweeps'

    def add_arguments(self, parser):
        sub = parser.add_subparsers(dest='subcommand', required=True)

        table = sub.add_parser('table', help='Print the nine resonance conditions')
        table.add_argument('--json', action='store_true', help='Print JSON instead of text')

        mapping = sub.add_parser('map', help='Map device parameters to qubit parameters')
        devices = mapping.add_subparsers(dest='device', required=True)
        dqd = devices.add_parser('dqd', help='Double quantum dot')
        dqd.add_argument('--tunnel-2t-ghz', type=float, required=True)
        dqd.add_argument('--bz-ghz', type=float, required=True)
        dqd.add_argument('--bx-ghz', type=float, required=True)
        dqd.add_argument('--g-charge-ghz', type=float, required=True)
        dqd.add_argument('--drive-amp-ghz', type=float, required=True)
        dqd.add_argument('--drive-freq-ghz', type=float, required=True)
        dqd.add_argument('--drive-phase', type=float, default=0.0)
        dqd.add_argument('--eps0-ghz', type=float, default=0.0)
        dqd.add_argument('--mode', choices=('spin', 'charge'), default='spin')
        rx = devices.add_parser('rx', help='Resonant exchange qubit')
        rx.add_argument('--tunnel-ghz', type=float, required=True)
        rx.add_argument('--hubbard-ghz', type=float, required=True)
        rx.add_argument('--g-charge-ghz', type=float, required=True)
        rx.add_argument('--exchange-left-ghz', type=float)
        rx.add_argument('--exchange-right-ghz', type=float)
        rx.add_argument('--drive-freq-ghz', type=float)
        rx.add_argument('--rabi-ghz', type=float, default=0.0)

        check = sub.add_parser('check', help='Validate a config and report derived quantities')
        self._config_arguments(check)

        search = sub.add_parser('search', help='Search the integer grid for rc7/rc9 operating points')
        search.add_argument('--condition', required=True)
        search.add_argument('--qmax', type=int, required=True)
        search.add_argument('--pmax', type=int, required=True)
        search.add_argument('--mmax', type=int, required=True)
        search.add_argument('--eta-ghz', type=float, required=True)
        search.add_argument('--omega-c-ghz', type=float, default=7.0)
        search.add_argument('--qmin', type=int, default=1)
        search.add_argument('--mmin', type=int, default=1)
        search.add_argument('--wmin', type=int)
        search.add_argument('--wmax', type=int)
        search.add_argument('--g-min-ghz', type=float, default=0.0)
        search.add_argument('--g-max-ghz', type=float)
        search.add_argument('--max-g-over-w', type=float)
        search.add_argument('--limit', type=int, help='Keep only the best N candidates (default: all)')
        search.add_argument('--threads', type=int)
        search.add_argument('--output', help='CSV file for the ranked candidates')

        simulate = sub.add_parser('simulate', help='Propagate the gate and report F0 (and F with decay)')
        self._config_arguments(simulate)
        simulate.add_argument('--skip-convergence-check', action='store_true',
                              help='Do not repeat the closed run at dt/2')
        simulate.add_argument('--sample-every', type=int, default=0, help='Record populations every N steps')

        sweep = sub.add_parser('sweep', help='Gate error over a (gamma, kappa) grid')
        self._config_arguments(sweep)
        sweep.add_argument('--gamma', required=True, help="kHz grid, e.g. 0.1:100:log4")
        sweep.add_argument('--kappa', required=True, help="kHz grid, e.g. 0.1:100:log4")
        sweep.add_argument('--threads', type=int)

    @staticmethod
    def _config_arguments(parser):
        parser.add_argument('--config', required=True, help='key = value config file')
        parser.add_argument('--exactify', action='store_true', help='Use the exact rc7/rc9 couplings')
        parser.add_argument('--output', help='Output file (overrides the config)')

    def handle(self, *args, **options):
        handler = getattr(self, f"handle_{options['subcommand']}")
        try:
            handler(options)
        except SidebandError as e:
            # Library errors that escaped the service layer (config loading)
            self._fail(e.to_dict() | {'exit_code': e.exit_code})

    def _fail(self, result):
        logger.error(f"{result['message']}: {result.get('errors')}")
        message = '; '.join(result.get('errors') or [result['message']])
        raise CommandError(message, returncode=result.get('exit_code', 2))

    def _load(self, options):
        config = load_config(options['config'])
        if options.get('exactify'):
            config = replace(config, exactify=True)
        if options.get('output'):
            config = replace(config, output=options['output'])
        return config

    def _output_path(self, config, suffix):
        if config.output:
            return Path(config.output)
        return Path(settings.SIDEBAND_OUTPUT_DIR) / f"{config.condition.label}_{suffix}"

    def handle_table(self, options):
        rows = SidebandService.table()['rows']
        if options['json']:
            self.stdout.write(json.dumps(rows, ensure_ascii=False, indent=2))
            return
        header = dict(zip(TABLE_KEYS, ('R', 'Resonance', 'Constraints', 'Interaction', 'Gate')))
        lines = [header] + rows
        widths = [max(len(str(line[key])) for line in lines) for key in TABLE_KEYS]
        for line in lines:
            self.stdout.write('  '.join(str(line[key]).ljust(w) for key, w in zip(TABLE_KEYS, widths)).rstrip())

    def handle_map(self, options):
        if options['device'] == 'dqd':
            data = {key: options[key] for key in (
                'tunnel_2t_ghz', 'bz_ghz', 'bx_ghz', 'g_charge_ghz', 'drive_amp_ghz',
                'drive_freq_ghz', 'drive_phase', 'eps0_ghz', 'mode',
            )}
            result = SidebandService.map_dqd(data)
        else:
            data = {key: options[key] for key in (
                'tunnel_ghz', 'hubbard_ghz', 'g_charge_ghz', 'exchange_left_ghz',
                'exchange_right_ghz', 'drive_freq_ghz', 'rabi_ghz',
            ) if options[key] is not None}
            result = SidebandService.map_rx(data)
        if not result['success']:
            self._fail(result)
        for message in result.get('warnings', []):
            self.stderr.write(f"warning: {message}")
        self.stdout.write(json_text(result))

    def handle_check(self, options):
        config = self._load(options)
        result = SidebandService.check(config)
        if not result['success']:
            self._fail(result)
        self.stdout.write(json_text(result))
        if not result['constraints']['passed']:
            self.stderr.write("warning: constraint residuals exceed tolerance (see 'constraints')")

    def handle_search(self, options):
        data = {key: options[key] for key in (
            'condition', 'qmax', 'pmax', 'mmax', 'eta_ghz', 'omega_c_ghz', 'qmin', 'mmin',
            'wmin', 'wmax', 'g_min_ghz', 'g_max_ghz', 'max_g_over_w', 'limit',
        ) if options[key] is not None}
        result = SidebandService.search(data, threads=options['threads'])
        if not result['success']:
            self._fail(result)
        metadata = unit_metadata(settings.SIDEBAND_RATE_CONVENTION, condition=result['condition'],
                                 eta_ghz=options['eta_ghz'])
        text = csv_text(CSV_COLUMNS, result['candidates'], metadata)
        if options['output']:
            write_output(options['output'], text)
        self.stdout.write(text, ending='')
        self.stderr.write(f"{result['count']} candidate(s)")

    def handle_simulate(self, options):
        config = self._load(options)
        result = SidebandService.simulate(config, not options['skip_convergence_check'], options['sample_every'])
        if not result['success']:
            self._fail(result)
        outcome = result['outcome']
        output_format = config.format or 'json'
        if output_format == 'csv':
            columns, rows = population_table(outcome)
            metadata = dict(outcome['metadata'], f0=outcome['f0'], fidelity=outcome['fidelity'])
            text = csv_text(columns, rows, metadata)
        else:
            text = json_text(outcome)
        path = write_output(self._output_path(config, f"simulate.{output_format}"), text)
        self.stdout.write(f"F0 = {outcome['f0']:.6f}")
        if outcome['fidelity'] is not None:
            self.stdout.write(f"F = {outcome['fidelity']:.6f}")
        self.stdout.write(f"wrote {path}")

    def handle_sweep(self, options):
        config = self._load(options)
        gamma = parse_grid(options['gamma'])
        kappa = parse_grid(options['kappa'])
        result = SidebandService.sweep(config, gamma, kappa, threads=options['threads'])
        if not result['success']:
            self._fail(result)
        output_format = config.format or 'csv'
        if output_format == 'csv':
            text = csv_text(SWEEP_COLUMNS, result['rows'], result['metadata'])
        else:
            text = json_text({'rows': result['rows'], 'metadata': result['metadata']})
        path = write_output(self._output_path(config, f"sweep.{output_format}"), text)
        self.stdout.write(f"{len(result['rows'])} points, wrote {path}")
