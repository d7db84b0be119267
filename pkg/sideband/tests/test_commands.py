from io import StringIO
from pathlib import Path
import csv
import json
import tempfile

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from sideband.runconfig import load_config
from sideband.search import CSV_COLUMNS
from sideband.services import SidebandService

CONFIG_DIR = Path(__file__).resolve().parents[1] / 'configs'

# One period of the rc7 grid point with weak couplings
SHORT_RUN = """
condition = rc7
eta_ghz = 0.05
omega_c_ghz = 7.0
omega1_ghz = 6.0
rabi1_ghz = 0.175
g1_ghz = 0.005
omega2_ghz = 6.15
rabi2_ghz = 0.1
g2_ghz = 0.005
m = 1
n_max = 1
dt_ns = 0.05
"""

# Same point with strong couplings and four steps per period
COARSE_RUN = SHORT_RUN.replace('g1_ghz = 0.005', 'g1_ghz = 0.03').replace(
    'g2_ghz = 0.005', 'g2_ghz = 0.03').replace('dt_ns = 0.05', 'dt_ns = 5.0')


class SidebandCommandTestCase(SimpleTestCase):

    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.tmp = Path(tmp.name)
        self.short_config = self.tmp / 'short.cfg'
        self.short_config.write_text(SHORT_RUN, encoding='utf-8')

    def run_command(self, *args):
        out, err = StringIO(), StringIO()
        call_command('sideband', *args, stdout=out, stderr=err)
        return out.getvalue(), err.getvalue()

    def test_table(self):
        """
        Test the text table has a header and nine rows.
        """
        out, _ = self.run_command('table')
        lines = out.strip().splitlines()
        self.assertEqual(len(lines), 10)
        self.assertTrue(lines[0].startswith('R'))
        self.assertIn('iSWAP', lines[7])

    def test_table_json(self):
        """
        Test the JSON table.
        """
        out, _ = self.run_command('table', '--json')
        self.assertEqual(len(json.loads(out)), 9)

    def test_check(self):
        """
        Test that check prints the report and warns about failed constraints.
        """
        out, err = self.run_command('check', '--config', str(CONFIG_DIR / 'rc7.cfg'))
        result = json.loads(out)
        self.assertEqual(result['report']['p'], [20, 17])
        self.assertFalse(result['constraints']['passed'])
        self.assertIn('constraint residuals', err)

    def test_check_exactify(self):
        """
        Test that the exact couplings pass every constraint.
        """
        out, err = self.run_command('check', '--config', str(CONFIG_DIR / 'rc9.cfg'), '--exactify')
        self.assertTrue(json.loads(out)['constraints']['passed'])
        self.assertEqual(err, '')

    def test_missing_config(self):
        """
        Test that a missing config exits with code 2.
        """
        with self.assertRaises(CommandError) as ctx:
            self.run_command('check', '--config', str(self.tmp / 'nope.cfg'))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_map_dqd(self):
        """
        Test the DQD mapping from the command line.
        """
        out, _ = self.run_command(
            'map', 'dqd', '--tunnel-2t-ghz', '10', '--bz-ghz', '6', '--bx-ghz', '1.5',
            '--g-charge-ghz', '0.05', '--drive-amp-ghz', '0.2', '--drive-freq-ghz', '5.9',
        )
        result = json.loads(out)
        self.assertTrue(result['success'])
        self.assertAlmostEqual(result['qubit']['drive_ghz'], 5.9)

    def test_map_rx_invalid(self):
        """
        Test that xi >= 1 exits with code 2.
        """
        with self.assertRaises(CommandError) as ctx:
            self.run_command('map', 'rx', '--tunnel-ghz', '2', '--hubbard-ghz', '1', '--g-charge-ghz', '0.05')
        self.assertEqual(ctx.exception.returncode, 2)

    def test_search_csv(self):
        """
        Test that search prints CSV with metadata and writes the file.
        """
        output = self.tmp / 'rc7.csv'
        out, err = self.run_command(
            'search', '--condition', 'rc7', '--qmax', '8', '--pmax', '20', '--mmax', '50',
            '--eta-ghz', '0.05', '--wmin', '13', '--wmax', '13', '--threads', '1', '--output', str(output),
        )
        lines = out.splitlines()
        header = next(line for line in lines if not line.startswith('#'))
        self.assertEqual(header, ','.join(CSV_COLUMNS))
        self.assertTrue(any(line.startswith('# condition: rc7') for line in lines))
        self.assertIn('candidate(s)', err)
        self.assertEqual(output.read_text(encoding='utf-8'), out)

    def test_search_keeps_every_candidate(self):
        """
        Test that the plain rc7 search lists the reference point, which ranks
        far below the first thousand candidates.
        """
        out, err = self.run_command(
            'search', '--condition', 'rc7', '--qmax', '8', '--pmax', '20', '--mmax', '50',
            '--eta-ghz', '0.05',
        )
        rows = list(csv.DictReader(line for line in out.splitlines() if not line.startswith('#')))
        self.assertGreater(len(rows), 1000)
        found = [(row['p1'], row['p2'], row['q1'], row['q2'], row['m']) for row in rows]
        self.assertIn(('20', '17', '7', '4', '40'), found)
        self.assertIn(f"{len(rows)} candidate(s)", err)

    def test_search_limit(self):
        """
        Test that --limit keeps only the best-ranked rows.
        """
        out, _ = self.run_command(
            'search', '--condition', 'rc7', '--qmax', '8', '--pmax', '20', '--mmax', '50',
            '--eta-ghz', '0.05', '--limit', '2',
        )
        rows = list(csv.DictReader(line for line in out.splitlines() if not line.startswith('#')))
        self.assertEqual(len(rows), 2)

    def test_search_unsupported(self):
        """
        Test that searching rc4 exits with code 2.
        """
        with self.assertRaises(CommandError) as ctx:
            self.run_command('search', '--condition', 'rc4', '--qmax', '4', '--pmax', '4', '--mmax', '4',
                             '--eta-ghz', '0.05')
        self.assertEqual(ctx.exception.returncode, 2)

    def test_simulate(self):
        """
        Test a short simulation writes its JSON outcome.
        """
        output = self.tmp / 'sim.json'
        out, _ = self.run_command('simulate', '--config', str(self.short_config), '--output', str(output),
                                  '--sample-every', '200')
        self.assertIn('F0 = ', out)
        outcome = json.loads(output.read_text(encoding='utf-8'))
        self.assertEqual(len(outcome['samples']), 2)
        self.assertEqual(len(outcome['basis']), 8)
        self.assertEqual(outcome['metadata']['condition'], 'rc7')

    def test_simulate_coarse_step_exits_3(self):
        """
        Test that a step which fails the halving check exits with code 3,
        and that skipping the check lets the run finish.
        """
        coarse = self.tmp / 'coarse.cfg'
        coarse.write_text(COARSE_RUN, encoding='utf-8')
        output = self.tmp / 'coarse.json'
        with self.assertRaises(CommandError) as ctx:
            self.run_command('simulate', '--config', str(coarse), '--output', str(output))
        self.assertEqual(ctx.exception.returncode, 3)
        self.assertFalse(output.exists())

        self.run_command('simulate', '--config', str(coarse), '--output', str(output),
                         '--skip-convergence-check')
        outcome = json.loads(output.read_text(encoding='utf-8'))
        self.assertFalse(outcome['metadata']['step_halving_checked'])

    def test_simulate_service_reports_numerical_failure(self):
        """
        Test the service marks a failed halving check as numerical.
        """
        coarse = self.tmp / 'coarse.cfg'
        coarse.write_text(COARSE_RUN, encoding='utf-8')
        result = SidebandService.simulate(load_config(coarse))
        self.assertFalse(result['success'])
        self.assertTrue(result['numerical'])
        self.assertEqual(result['exit_code'], 3)
        self.assertEqual(result['relation'], 'step-halving |dF0| <= 1e-4')

    def test_simulate_csv_format(self):
        """
        Test that format = csv writes the population samples as CSV.
        """
        config = self.tmp / 'short_csv.cfg'
        config.write_text(SHORT_RUN + 'format = csv\n', encoding='utf-8')
        output = self.tmp / 'sim.csv'
        self.run_command('simulate', '--config', str(config), '--output', str(output), '--sample-every', '200')
        lines = output.read_text(encoding='utf-8').splitlines()
        self.assertTrue(any(line.startswith('# f0: ') for line in lines))
        rows = [line for line in lines if not line.startswith('#')]
        header = rows[0].split(',')
        self.assertEqual(header[:3], ['t_ns', 'p_ee_0', 'p_ee_1'])
        self.assertEqual(len(header), 9)
        self.assertEqual(len(rows), 3)

    def test_sweep_json_format(self):
        """
        Test that format = json writes the sweep rows as JSON.
        """
        config = self.tmp / 'short_json.cfg'
        config.write_text(SHORT_RUN + 'format = json\n', encoding='utf-8')
        output = self.tmp / 'sweep.json'
        self.run_command('sweep', '--config', str(config), '--output', str(output),
                         '--gamma', '0,1000', '--kappa', '0', '--threads', '1')
        payload = json.loads(output.read_text(encoding='utf-8'))
        self.assertEqual([row['gamma_khz'] for row in payload['rows']], [0.0, 1000.0])
        self.assertEqual(payload['rows'][0]['error'], 0.0)
        self.assertEqual(payload['metadata']['condition'], 'rc7')

    def test_sweep(self):
        """
        Test a two-point sweep writes a CSV.
        """
        output = self.tmp / 'sweep.csv'
        out, _ = self.run_command('sweep', '--config', str(self.short_config), '--output', str(output),
                                  '--gamma', '0,1000', '--kappa', '0', '--threads', '1')
        self.assertIn('2 points', out)
        rows = [line for line in output.read_text(encoding='utf-8').splitlines() if not line.startswith('#')]
        self.assertEqual(rows[0], 'gamma_khz,kappa_khz,error')
        self.assertEqual(rows[1], '0,0,0')
        self.assertEqual(len(rows), 3)
