from pathlib import Path
import json

from rest_framework import status
from rest_framework.test import APISimpleTestCase

from sideband.runconfig import load_config
from sideband.services import SidebandService
from sideband.views import API_SEARCH_LIMIT

CONFIG_DIR = Path(__file__).resolve().parents[1] / 'configs'


class SidebandAPITestCase(APISimpleTestCase):

    def setUp(self):
        self.base_url = '/sideband/'
        fields = load_config(CONFIG_DIR / 'rc7.cfg').to_fields()
        self.rc7_fields = {key: value for key, value in fields.items() if value is not None}
        self.dqd = {
            'tunnel_2t_ghz': 10.0,
            'bz_ghz': 6.0,
            'bx_ghz': 1.5,
            'g_charge_ghz': 0.05,
            'drive_amp_ghz': 0.2,
            'drive_freq_ghz': 5.9,
        }

    def post(self, path, payload):
        return self.client.post(
            f"{self.base_url}{path}",
            data=json.dumps(payload),
            content_type='application/json'
        )

    def test_api_root(self):
        """
        Test the root endpoint lists the sideband routes.
        """
        response = self.client.get('/api/')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertIn('search', response.json()['endpoints'])

    def test_resonance_table(self):
        """
        Test the table lists nine conditions.
        """
        response = self.client.get(f"{self.base_url}table/")
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(len(response.data['rows']), 9)
        self.assertEqual(response.data['rows'][6]['resonance'], 'Δ₁⁻=Δ₂⁻')

    def test_check_config(self):
        """
        Test checking the shipped rc7 config.
        """
        response = self.post('check/', self.rc7_fields)
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['report']['w'], 13)
        self.assertEqual(response.data['resonances'], [{'condition': 'rc7', 'constraints_ok': True}])
        self.assertIn('residuals', response.data['constraints'])

    def test_check_config_unsuffixed_key(self):
        """
        Test that a frequency key without a unit is rejected.
        """
        fields = dict(self.rc7_fields)
        fields['eta'] = fields.pop('eta_ghz')
        response = self.post('check/', fields)
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertEqual(response.data['relation'], 'frequency keys carry _ghz')

    def test_check_config_pole(self):
        """
        Test that a pole of the effective theory is reported with its relation.
        """
        fields = dict(self.rc7_fields, rabi1_ghz=0.5)
        response = self.post('check/', fields)
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertEqual(response.data['relation'], 'W_j != |Delta_j|')

    def test_map_dqd(self):
        """
        Test the spin-qubit mapping.
        """
        response = self.post('map/dqd/', self.dqd)
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['mode'], 'spin')
        self.assertIn('spectrum', response.data)
        self.assertGreater(response.data['qubit']['omega_ghz'], 0.0)

    def test_map_dqd_missing_field(self):
        """
        Test that a missing field is named.
        """
        payload = dict(self.dqd)
        del payload['bz_ghz']
        response = self.post('map/dqd/', payload)
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn("missing required key 'bz_ghz'", response.data['errors'])

    def test_map_rx(self):
        """
        Test the RX mapping and its xi >= 1 rejection.
        """
        response = self.post('map/rx/', {'tunnel_ghz': 1.0, 'hubbard_ghz': 10.0, 'g_charge_ghz': 0.05})
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertAlmostEqual(response.data['xi'], 0.1)

        response = self.post('map/rx/', {'tunnel_ghz': 2.0, 'hubbard_ghz': 1.0, 'g_charge_ghz': 0.05})
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)

    def test_search(self):
        """
        Test that the search finds the rc7 point in a narrow window.
        """
        payload = {
            'condition': 'rc7', 'qmax': 8, 'pmax': 20, 'mmax': 50, 'eta_ghz': 0.05,
            'wmin': 13, 'wmax': 13, 'limit': 1000,
        }
        response = self.post('search/', payload)
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['count'], len(response.data['candidates']))
        found = [(c['p1'], c['p2'], c['q1'], c['q2'], c['m']) for c in response.data['candidates']]
        self.assertIn((20, 17, 7, 4, 40), found)

    def test_search_limit_is_capped(self):
        """
        Test that the endpoint accepts any limit but returns at most its cap.
        """
        payload = {
            'condition': 'rc7', 'qmax': 8, 'pmax': 20, 'mmax': 50, 'eta_ghz': 0.05,
            'limit': 5000,
        }
        response = self.post('search/', payload)
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['count'], API_SEARCH_LIMIT)

        capped = SidebandService.search(dict(payload, limit=None), threads=1, max_limit=2)
        self.assertTrue(capped['success'])
        self.assertEqual(capped['count'], 2)

    def test_search_unsupported_condition(self):
        """
        Test that only rc7 and rc9 can be searched.
        """
        payload = {'condition': 'rc4', 'qmax': 4, 'pmax': 4, 'mmax': 4, 'eta_ghz': 0.05}
        response = self.post('search/', payload)
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertEqual(response.data['relation'], 'condition in {7, 9}')
