import math

import numpy as np
from django.test import SimpleTestCase

from dynamics.exceptions import SpecError
from dynamics.waveform import (
    DriveSpec, delta_at, epsilon_at, frame_rotation, hamiltonian_at, phase_antiderivative, to_lab_frame,
)


def mixed_drive():
    return DriveSpec(omega=1.0, eps0=1.0, eps_mult=1, delta_mult=2,
                     a_coeffs=((1, 2.0), (3, 0.5)), b_coeffs=((2, 1.5),),
                     d_coeffs=((0, 0.4), (1, 0.2 + 0.1j)))


class DriveSpecTests(SimpleTestCase):

    def test_coefficients_are_sorted_and_typed(self):
        spec = DriveSpec(a_coeffs=((3, 1), (1, 2)), d_coeffs=((1, 2), (0, 1)))
        self.assertEqual(spec.a_coeffs, ((1, 2.0), (3, 1.0)))
        self.assertIsInstance(spec.d_coeffs[0][1], complex)

    def test_invalid_omega_names_the_key(self):
        with self.assertRaises(SpecError) as caught:
            DriveSpec(omega=0.0)
        self.assertEqual(caught.exception.key, 'omega')
        self.assertIn('kind=spec-error', caught.exception.as_line())

    def test_duplicate_and_zero_harmonics_are_rejected(self):
        with self.assertRaises(SpecError):
            DriveSpec(a_coeffs=((1, 1.0), (1, 2.0)))
        with self.assertRaises(SpecError):
            DriveSpec(b_coeffs=((0, 1.0),))

    def test_period_and_harmonic_frequencies(self):
        spec = mixed_drive()
        self.assertAlmostEqual(spec.period, 2 * math.pi)
        self.assertEqual(spec.omega_delta, 2.0)
        self.assertTrue(spec.is_longitudinally_driven)
        self.assertEqual(spec.max_transverse_index, 1)

    def test_with_parameter_replaces_one_amplitude(self):
        spec = mixed_drive().with_parameter('A3', 7.0)
        self.assertEqual(spec.parameter('A3'), 7.0)
        self.assertEqual(spec.parameter('A1'), 2.0)
        self.assertEqual(spec.with_parameter('eps0', -2.0).eps0, -2.0)
        self.assertEqual(spec.with_parameter('D1', 0.5).parameter('D1'), 0.5)

    def test_unknown_axis_is_a_spec_error(self):
        with self.assertRaises(SpecError):
            mixed_drive().with_parameter('A2', 1.0)
        with self.assertRaises(SpecError):
            mixed_drive().parameter('Z1')

    def test_to_dict_shape(self):
        data = mixed_drive().to_dict()
        self.assertEqual(data['a_coeffs'][0], {'n': 1, 'A': 2.0})
        self.assertEqual(data['d_coeffs'][1], {'k': 1, 're': 0.2, 'im': 0.1})


class WaveformTests(SimpleTestCase):

    def test_bias_values(self):
        spec = DriveSpec(eps0=1.0, a_coeffs=((1, 2.0),), b_coeffs=((1, 3.0),))
        self.assertAlmostEqual(epsilon_at(spec, 0.0), 3.0)
        self.assertAlmostEqual(epsilon_at(spec, math.pi / 2), 4.0)

    def test_tunneling_values(self):
        spec = DriveSpec(d_coeffs=((0, 1.0), (1, 0.5)))
        self.assertAlmostEqual(delta_at(spec, 0.0), 1.5)
        self.assertAlmostEqual(delta_at(spec, math.pi), 0.5)

    def test_hamiltonian_is_hermitian_and_traceless(self):
        times = np.linspace(0.0, 6.0, 7)
        matrices = hamiltonian_at(mixed_drive(), times)
        self.assertEqual(matrices.shape, (7, 2, 2))
        np.testing.assert_allclose(matrices, np.conj(np.swapaxes(matrices, -1, -2)), atol=1e-15)
        np.testing.assert_allclose(np.trace(matrices, axis1=1, axis2=2), 0.0, atol=1e-15)

    def test_phase_antiderivative_derivative_is_ac_bias(self):
        spec = mixed_drive()
        step = 1e-5
        for t in (0.3, 1.7, 4.2):
            derivative = (phase_antiderivative(spec, t + step) - phase_antiderivative(spec, t - step)) / (2 * step)
            self.assertAlmostEqual(derivative, epsilon_at(spec, t) - spec.eps0, delta=1e-6)

    def test_phase_antiderivative_is_periodic(self):
        spec = mixed_drive()
        self.assertEqual(phase_antiderivative(spec, 0.0), 0.0)
        self.assertAlmostEqual(phase_antiderivative(spec, spec.period), 0.0, delta=1e-12)

    def test_frame_rotation_is_diagonal_unitary(self):
        rotation = frame_rotation(mixed_drive(), 1.3)
        np.testing.assert_allclose(rotation @ rotation.conj().T, np.eye(2), atol=1e-14)
        self.assertEqual(rotation[0, 1], 0)

    def test_lab_frame_of_identity_at_equal_times(self):
        spec = mixed_drive()
        np.testing.assert_allclose(to_lab_frame(np.eye(2), spec, 0.8, 0.8), np.eye(2), atol=1e-14)
