from django.conf import settings
from django.test import SimpleTestCase
from django.urls import reverse
from rest_framework import status
from rest_framework.test import APITestCase

from dynamics.models import Run


class RunApiTests(APITestCase):

    def setUp(self):
        self.done = Run.objects.create(command='evolve', status='done', knobs={'TOL': 1e-8},
                                       artifact='artifacts/evolve.csv', wall_time=0.5)
        self.failed = Run.objects.create(command='quasi', status='failed',
                                         error='error kind=unitarity defect=1.000e-03')

    def test_list_runs(self):
        response = self.client.get(reverse('run-list'))
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(len(response.data), 2)

    def test_filter_by_status(self):
        response = self.client.get(reverse('run-list'), {'status': 'failed'})
        self.assertEqual([item['id'] for item in response.data], [self.failed.id])
        self.assertTrue(response.data[0]['error'].startswith('error kind=unitarity'))

    def test_filter_by_command(self):
        response = self.client.get(reverse('run-list'), {'command': 'evolve'})
        self.assertEqual([item['id'] for item in response.data], [self.done.id])

    def test_run_detail(self):
        response = self.client.get(reverse('run-detail', args=[self.done.id]))
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['artifact'], 'artifacts/evolve.csv')
        self.assertEqual(response.data['knobs'], {'TOL': 1e-8})

    def test_runs_are_read_only(self):
        response = self.client.post(reverse('run-list'), {'command': 'gbf'}, format='json')
        self.assertEqual(response.status_code, status.HTTP_405_METHOD_NOT_ALLOWED)

    def test_missing_run(self):
        response = self.client.get(reverse('run-detail', args=[999]))
        self.assertEqual(response.status_code, status.HTTP_404_NOT_FOUND)


class ComputeApiTests(APITestCase):

    def test_gbf_table(self):
        response = self.client.post(reverse('gbf-table'), {
            'spec': {'eps0': 1.0, 'd_coeffs': [{'k': 1, 're': 3.0}]},
        }, format='json')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual((response.data['l_min'], response.data['l_max']), (1, 1))
        self.assertEqual(response.data['rows'], [{'l': 1, 're': 1.5, 'im': 0.0, 'modulus': 1.5}])

    def test_gbf_table_rejects_unknown_keys(self):
        response = self.client.post(reverse('gbf-table'), {
            'spec': {'eps0': 1.0, 'colour': 'red'},
        }, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('colour', response.data['spec'])

    def test_gbf_table_rejects_invalid_omega(self):
        response = self.client.post(reverse('gbf-table'), {'spec': {'omega': 0.0}}, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('omega', response.data['spec'])

    def test_quasienergies_of_static_rabi(self):
        response = self.client.post(reverse('quasienergies'), {
            'spec': {'eps0': 0.0, 'd_coeffs': [{'k': 0, 're': 0.5}]},
        }, format='json')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertAlmostEqual(response.data['eps_plus'], -0.25, places=4)
        self.assertAlmostEqual(response.data['eps_minus'], 0.25, places=4)
        self.assertEqual(response.data['frame'], 'rotated')

    def test_quasienergies_without_drive(self):
        response = self.client.post(reverse('quasienergies'), {'spec': {'eps0': 0.0}}, format='json')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual((response.data['eps_plus'], response.data['eps_minus']), (0.0, 0.0))

    def test_quasienergy_grid_bounds(self):
        response = self.client.post(reverse('quasienergies'), {
            'spec': {'eps0': 0.0}, 'grid': 8,
        }, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('grid', response.data)

    def test_schema(self):
        response = self.client.get('/api/schema/')
        self.assertEqual(response.status_code, status.HTTP_200_OK)


class SettingsTests(SimpleTestCase):

    def test_no_password_policy_without_user_accounts(self):
        self.assertEqual(settings.AUTH_PASSWORD_VALIDATORS, [])
