from dataclasses import replace
from pathlib import Path
import json

import numpy as np
from django.test import SimpleTestCase

from sideband import __version__
from sideband.exceptions import ValidationError
from sideband.resonance import ResonanceCondition
from sideband.runconfig import (
    csv_text, json_text, load_config, parse_config, parse_grid, render_config, unit_metadata,
    validation_report,
)

CONFIG_DIR = Path(__file__).resolve().parents[1] / 'configs'

MINIMAL = """
condition = rc7
eta_ghz = 0.05
omega_c_ghz = 7.0
omega1_ghz = 6.0
rabi1_ghz = 0.175
g1_ghz = 0.026
omega2_ghz = 6.15
rabi2_ghz = 0.1
g2_ghz = 0.031
m = 40
"""


class ConfigParsingTestCase(SimpleTestCase):

    def test_shipped_configs(self):
        """
        Both shipped configs load with drives defaulting to resonance.
        """
        rc7 = load_config(CONFIG_DIR / 'rc7.cfg')
        self.assertEqual(rc7.condition, ResonanceCondition.RC7)
        self.assertEqual(rc7.drive_ghz, rc7.omega_ghz)
        self.assertEqual(rc7.initial_state, 'eg')
        self.assertEqual(rc7.m, 40)
        rc9 = load_config(CONFIG_DIR / 'rc9.cfg')
        self.assertEqual(rc9.condition, ResonanceCondition.RC9)
        self.assertEqual(rc9.initial_state, 'ee')
        self.assertEqual(rc9.rates.convention, 'linear')

    def test_comments_and_blank_lines(self):
        """
        Comments and blank lines are skipped.
        """
        config = parse_config("# header\n" + MINIMAL + "\nkappa_khz = 2.5  # cavity\n")
        self.assertEqual(config.rates.kappa, 2.5)

    def test_unsuffixed_keys(self):
        """
        Frequency and rate keys without a unit are rejected.
        """
        with self.assertRaises(ValidationError) as ctx:
            parse_config(MINIMAL.replace('eta_ghz', 'eta'))
        self.assertEqual(ctx.exception.relation, 'frequency keys carry _ghz')
        with self.assertRaises(ValidationError) as ctx:
            parse_config(MINIMAL + "kappa = 1.0\n")
        self.assertEqual(ctx.exception.relation, 'rate keys carry _khz')
        with self.assertRaises(ValidationError) as ctx:
            parse_config(MINIMAL + "dt = 0.01\n")
        self.assertEqual(ctx.exception.relation, 'time keys carry _ns')

    def test_unknown_and_duplicate_keys(self):
        """
        Typos and repeated keys are errors.
        """
        with self.assertRaises(ValidationError) as ctx:
            parse_config(MINIMAL + "colour = red\n")
        self.assertEqual(ctx.exception.relation, 'known keys only')
        with self.assertRaises(ValidationError) as ctx:
            parse_config(MINIMAL + "m = 41\n")
        self.assertEqual(ctx.exception.relation, 'unique keys')

    def test_missing_key(self):
        """
        A missing required key is named.
        """
        with self.assertRaises(ValidationError) as ctx:
            parse_config(MINIMAL.replace('m = 40', ''))
        self.assertEqual(ctx.exception.message, "missing required key 'm'")

    def test_bad_values(self):
        """
        Malformed values and states are rejected.
        """
        with self.assertRaises(ValidationError):
            parse_config(MINIMAL + "initial_state = eh\n")
        with self.assertRaises(ValidationError):
            parse_config(MINIMAL.replace('condition = rc7', 'condition = rc12'))

    def test_missing_file(self):
        """
        Unreadable paths raise a validation error.
        """
        with self.assertRaises(ValidationError) as ctx:
            load_config(CONFIG_DIR / 'missing.cfg')
        self.assertEqual(ctx.exception.relation, 'readable config')

    def test_render_round_trip(self):
        """
        A rendered config parses back to the same record.
        """
        config = replace(load_config(CONFIG_DIR / 'rc9.cfg'), dt_ns=0.01, exactify=True)
        self.assertEqual(parse_config(render_config(config)), config)
        self.assertIn('exactify = true', render_config(config))


class ValidationReportTestCase(SimpleTestCase):

    def test_rc7_report(self):
        """
        Derived rows for the iSWAP point: tau = 20 ns, J = 0.31 MHz, chi ~ -0.14 MHz.
        """
        report = validation_report(load_config(CONFIG_DIR / 'rc7.cfg'))
        self.assertEqual(report['p'], [20, 17])
        self.assertEqual(report['q'], [7, 4])
        self.assertEqual(report['w'], 13)
        self.assertAlmostEqual(report['tau_ns'], 20.0, places=9)
        self.assertAlmostEqual(report['tau_m_ns'], 800.0, places=6)
        self.assertAlmostEqual(report['J_mhz'], 0.31, places=6)
        self.assertAlmostEqual(report['chi1_mhz'], -0.14, delta=0.01)
        self.assertAlmostEqual(report['Delta1_ghz'], 1.0, places=9)
        self.assertAlmostEqual(report['Delta1_minus_ghz'], 0.65, places=9)
        self.assertAlmostEqual(report['Delta2_minus_ghz'], 0.65, places=9)
        self.assertEqual(report['conditions_holding'], ['rc7'])
        self.assertTrue(report['constraints_ok'])
        self.assertEqual(round(report['exact']['chi1_mhz'], 2), -0.14)
        self.assertEqual(round(report['exact']['chi2_mhz'], 2), -0.14)

    def test_rc9_report(self):
        """
        The double-excitation point has J = -1.25 MHz and chi = +-1.25 MHz at exact couplings.
        """
        report = validation_report(load_config(CONFIG_DIR / 'rc9.cfg'))
        self.assertEqual(report['p'], [10, -13])
        self.assertEqual(report['q'], [12, 11])
        self.assertEqual(report['w'], -2)
        self.assertAlmostEqual(report['tau_m_ns'], 200.0, places=6)
        self.assertAlmostEqual(report['exact']['J_mhz'], -1.25, places=9)
        self.assertAlmostEqual(report['exact']['chi1_mhz'], 1.25, places=9)
        self.assertAlmostEqual(report['exact']['chi2_mhz'], -1.25, places=9)

    def test_exactify_flag(self):
        """
        With exactify the report is already at the exact couplings.
        """
        config = replace(load_config(CONFIG_DIR / 'rc9.cfg'), exactify=True)
        report = validation_report(config)
        self.assertNotIn('exact', report)
        self.assertAlmostEqual(report['J_mhz'], -1.25, places=9)

    def test_pole_is_named(self):
        """
        W_1 = |Delta_1| makes the effective theory undefined.
        """
        config = parse_config(MINIMAL.replace('rabi1_ghz = 0.175', 'rabi1_ghz = 0.5'))
        with self.assertRaises(ValidationError) as ctx:
            validation_report(config)
        self.assertEqual(ctx.exception.relation, 'W_j != |Delta_j|')

    def test_off_grid(self):
        """
        A dressed splitting that is not a multiple of eta is rejected.
        """
        config = parse_config(MINIMAL.replace('rabi1_ghz = 0.175', 'rabi1_ghz = 0.176'))
        with self.assertRaises(ValidationError) as ctx:
            validation_report(config)
        self.assertEqual(ctx.exception.relation, 'W_j = q_j eta')


class OutputTestCase(SimpleTestCase):

    def test_grids(self):
        """
        Log, linear and explicit grids.
        """
        log_grid = parse_grid('0.1:100:log1')
        self.assertEqual(len(log_grid), 4)
        for value, expected in zip(log_grid, (0.1, 1.0, 10.0, 100.0)):
            self.assertAlmostEqual(value, expected, places=9)
        self.assertEqual(len(parse_grid('0.1:100:log4')), 13)
        self.assertEqual(parse_grid('0:1:3'), [0.0, 0.5, 1.0])
        self.assertEqual(parse_grid('1, 2,3'), [1.0, 2.0, 3.0])

    def test_bad_grids(self):
        """
        Malformed grids are rejected.
        """
        for text in ('1:2', '0:10:log2', '5:1:3', 'a,b', ''):
            with self.assertRaises(ValidationError, msg=text):
                parse_grid(text)

    def test_csv_is_deterministic(self):
        """
        Metadata lines come sorted, floats at 12 significant digits.
        """
        rows = [{'a': 1 / 3, 'b': 2}, {'a': np.float64(0.5), 'b': -1}]
        text = csv_text(('a', 'b'), rows, {'zeta': 1, 'alpha': 'x'})
        self.assertEqual(text, "# alpha: x\n# zeta: 1\na,b\n0.333333333333,2\n0.5,-1\n")
        self.assertEqual(text, csv_text(('a', 'b'), rows, {'alpha': 'x', 'zeta': 1}))

    def test_json_handles_numpy_and_conditions(self):
        """
        numpy values and conditions serialize.
        """
        payload = json.loads(json_text({'x': np.float64(1.5), 'v': np.arange(2), 'c': ResonanceCondition.RC9}))
        self.assertEqual(payload, {'x': 1.5, 'v': [0, 1], 'c': 'rc9'})

    def test_unit_metadata(self):
        """
        Metadata carries the conventions and the version.
        """
        meta = unit_metadata('angular', condition='rc7')
        self.assertEqual(meta['rate_convention'], 'angular')
        self.assertEqual(meta['condition'], 'rc7')
        self.assertTrue(meta['version'].startswith(__version__))
        self.assertIn('omega/2pi', meta['frequency_convention'])
