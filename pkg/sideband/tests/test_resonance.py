from dataclasses import replace
from fractions import Fraction

import numpy as np
from django.test import SimpleTestCase

from sideband.effective import exactify
from sideband.exceptions import UnsupportedError, ValidationError
from sideband.models import SystemParams, to_mhz
from sideband.operators import pauli
from sideband.resonance import (
    GateKind, ResonanceCondition, build_vqq, classify_resonance, coupling_strength, table_rows,
    two_photon_resonances, vqq_table_form,
)
from sideband.tests.test_magnus import random_grids


def reference_rc7():
    return SystemParams.from_grid((20, 17), (7, 4), 0.05, 7.0, (0.026, 0.031), 40)


def reference_rc9():
    return SystemParams.from_grid((10, -13), (12, 11), 0.05, 6.2, (0.021, 0.023), 10)


class ResonanceTableTestCase(SimpleTestCase):

    def setUp(self):
        self.rows = table_rows()

    def test_nine_rows(self):
        """
        There are exactly nine resonance conditions.
        """
        self.assertEqual(len(self.rows), 9)
        self.assertEqual([row['R'] for row in self.rows], list(range(1, 10)))

    def test_row_seven(self):
        """
        Condition 7 lines up the two red sidebands and gives the iSWAP.
        """
        row = self.rows[6]
        self.assertEqual(row['resonance'], 'Δ₁⁻=Δ₂⁻')
        self.assertEqual(row['interaction'], '−𝒥(σ₁⁺σ₂⁻+σ₁⁻σ₂⁺)')
        self.assertIn('iSWAP', row['gate'])

    def test_row_one(self):
        """
        Condition 1 gives the sigma^z sigma^z controlled phase.
        """
        row = self.rows[0]
        self.assertEqual(row['interaction'], '−2𝒥σ₁ᶻσ₂ᶻ')
        self.assertIn('Controlled-phase', row['gate'])
        self.assertEqual(ResonanceCondition.RC1.gate, GateKind.CONTROLLED_PHASE)

    def test_parse_accepts_numbers_and_labels(self):
        """
        7, '7', 'rc7' and 'RC7' all name the same condition.
        """
        for value in (7, '7', 'rc7', 'RC7'):
            self.assertIs(ResonanceCondition.parse(value), ResonanceCondition.RC7)

    def test_parse_rejects_unknown(self):
        """
        There is no tenth condition.
        """
        for value in ('rc10', 0, 'seven'):
            with self.assertRaises(ValidationError):
                ResonanceCondition.parse(value)


class ClassificationTestCase(SimpleTestCase):

    def setUp(self):
        self.rc7 = reference_rc7()
        self.rc9 = reference_rc9()

    def test_rc7_grid(self):
        """
        p = (20, 17), q = (7, 4): only condition 7 holds (13 = 13).
        """
        matches = classify_resonance(self.rc7)
        self.assertEqual(matches, [(ResonanceCondition.RC7, True)])
        self.assertEqual(ResonanceCondition.RC7.resonant_index(self.rc7), 13)

    def test_rc9_grid(self):
        """
        p = (10, -13), q = (12, 11): only condition 9 holds (-2 = -2).
        """
        matches = classify_resonance(self.rc9)
        self.assertEqual(matches, [(ResonanceCondition.RC9, True)])
        self.assertEqual(ResonanceCondition.RC9.resonant_index(self.rc9), -2)

    def test_w_constraint_violation(self):
        """
        W1 = W2 also makes the blue sidebands resonant for condition 7.
        """
        sys = SystemParams.from_grid((9, 9), (4, 4), 0.05, 7.0, (0.02, 0.02), 10)
        self.assertEqual(ResonanceCondition.RC7.violated_constraints(sys), [f"W₁/W₂ = {Fraction(1)}"])
        with self.assertRaises(ValidationError):
            build_vqq(sys, ResonanceCondition.RC7)
        op, _ = build_vqq(sys, ResonanceCondition.RC7, check_constraints=False)
        self.assertTrue(op.is_hermitian())

    def test_condition_must_hold(self):
        """
        Building V_qq for a condition that does not hold is an error.
        """
        with self.assertRaises(ValidationError):
            build_vqq(self.rc7, ResonanceCondition.RC9)

    def test_two_photon_resonance(self):
        """
        Delta_1 = -Delta_2 puts the two centre lines in a two-photon resonance.
        """
        sys = SystemParams.from_grid((5, -5), (1, 3), 0.05, 7.0, (0.02, 0.02), 10)
        self.assertIn((0, 0), two_photon_resonances(sys))
        self.assertEqual(two_photon_resonances(self.rc7), [])


class InteractionTestCase(SimpleTestCase):

    def setUp(self):
        self.rc7 = reference_rc7()
        self.rc9 = reference_rc9()

    def test_rc7_interaction(self):
        """
        Resonant driving gives -J(s1+ s2- + s1- s2+) with J/2pi = 0.31 MHz.
        """
        op, J = build_vqq(self.rc7, ResonanceCondition.RC7)
        self.assertAlmostEqual(to_mhz(J), 0.31, places=6)
        flip = pauli('+', 1) @ pauli('-', 2) + pauli('-', 1) @ pauli('+', 2)
        self.assertTrue(op.allclose(-J * flip, atol=1e-15))

    def test_rc9_interaction(self):
        """
        Condition 9 gives J(s1+ s2+ + s1- s2-) with J/2pi = -1.25 MHz at the exact couplings.
        """
        sys = exactify(self.rc9, ResonanceCondition.RC9)
        op, J = build_vqq(sys, ResonanceCondition.RC9)
        self.assertAlmostEqual(to_mhz(J), -1.25, places=9)
        pair = pauli('+', 1) @ pauli('+', 2) + pauli('-', 1) @ pauli('-', 2)
        self.assertTrue(op.allclose(J * pair, atol=1e-15))

    def test_every_condition_matches_table_form(self):
        """
        With resonant driving every condition reproduces its listed interaction.
        """
        resonant = [sys for sys in random_grids(20) if all(qb.delta == 0 for qb in sys.qubits)]
        seen = set()
        for sys in resonant:
            for cond, _ in classify_resonance(sys):
                op, J = build_vqq(sys, cond, check_constraints=False)
                expected = vqq_table_form(cond, J)
                self.assertLessEqual((op - expected).max_abs(), 1e-12 * abs(J), msg=cond.label)
                seen.add(cond)
        self.assertEqual(seen, set(ResonanceCondition))

    def test_interaction_is_hermitian(self):
        """
        V_qq is Hermitian for detuned driving too.
        """
        for sys in random_grids(18):
            for cond, _ in classify_resonance(sys):
                op, _ = build_vqq(sys, cond, check_constraints=False)
                self.assertLessEqual(op.hermitian_error(), 1e-12)

    def test_drive_phase_is_unsupported(self):
        """
        The effective theory only covers zero drive phases.
        """
        qubits = (replace(self.rc7.qubits[0], phase=0.3), self.rc7.qubits[1])
        sys = replace(self.rc7, qubits=qubits)
        with self.assertRaises(UnsupportedError):
            build_vqq(sys, ResonanceCondition.RC7)

    def test_coupling_sign_follows_detuning(self):
        """
        Condition 9 sits at a negative detuning, so J < 0.
        """
        self.assertLess(coupling_strength(self.rc9, ResonanceCondition.RC9), 0)
        self.assertGreater(coupling_strength(self.rc7, ResonanceCondition.RC7), 0)

    def test_rc1_table_form(self):
        """
        Condition 1 at resonance is -2J sigma_1^z sigma_2^z.
        """
        op = vqq_table_form(ResonanceCondition.RC1, 0.5)
        expected = -1.0 * (pauli('z', 1) @ pauli('z', 2))
        self.assertTrue(np.allclose(op.data, expected.data))
