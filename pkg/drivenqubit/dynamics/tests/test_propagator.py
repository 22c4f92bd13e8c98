import math

import numpy as np
from django.test import SimpleTestCase

from dynamics.exceptions import (
    BudgetExceeded, CausalityError, ConvergenceError, DiscretizationError, GridMismatch, UnitarityError,
)
from dynamics.kernel import KernelSpec, kernel_at_dd, kernel_grid
from dynamics.propagator import (
    IndexTuple, TwoTimeGrid, Unitary2, effective_hamiltonian, neumann_greens, node_list, quasienergies,
    star_power_analytic, star_product_grid, stroboscopic_probability, transition_probability,
    unitary_analytic, unitary_analytic_trace, unitary_grid, unitary_grid_column,
)
from dynamics.serializers import load_drive_spec
from dynamics.waveform import DriveSpec

TWO_PI = 2 * math.pi


def static_rabi(delta=1.0):
    return DriveSpec(eps0=0.0, d_coeffs=((0, delta),))


def modulated():
    return KernelSpec.from_drive(DriveSpec(eps0=1.0, a_coeffs=((1, 2.0),), d_coeffs=((0, 0.5), (1, 0.3))))


class StarProductGridTests(SimpleTestCase):

    def test_products_of_polynomials_are_exact(self):
        ones = TwoTimeGrid.from_function(0.0, 2.0, 21, lambda t, s: np.ones_like(t))
        linear = TwoTimeGrid.from_function(0.0, 2.0, 21, lambda t, s: t - s)
        times = ones.times
        first = star_product_grid(ones, ones)
        second = star_product_grid(ones, linear)
        for i in range(21):
            for j in range(i + 1):
                tau = times[i] - times[j]
                self.assertAlmostEqual(first.values[i, j], tau, delta=1e-12)
                self.assertAlmostEqual(second.values[i, j], tau ** 2 / 2, delta=1e-12)
        self.assertEqual(first.values[3, 7], 0)

    def test_mismatched_grids(self):
        coarse = TwoTimeGrid.from_function(0.0, 1.0, 5, lambda t, s: t - s)
        fine = TwoTimeGrid.from_function(0.0, 1.0, 9, lambda t, s: t - s)
        with self.assertRaises(GridMismatch):
            star_product_grid(coarse, fine)
        with self.assertRaises(GridMismatch):
            TwoTimeGrid(1.0, 1.0, np.zeros((3, 3)))


class NeumannSeriesTests(SimpleTestCase):

    def test_zero_kernel(self):
        zero = TwoTimeGrid(0.0, 1.0, np.zeros((9, 9)))
        greens, orders = neumann_greens(zero, 1e-12, 10)
        self.assertEqual(orders, 0)
        self.assertFalse(np.any(greens.values))

    def test_order_limit(self):
        ks = KernelSpec.from_drive(load_drive_spec('@fig2a'))
        times = np.linspace(0.0, TWO_PI, 65)
        generator = TwoTimeGrid(0.0, TWO_PI, -kernel_grid(ks, times))
        with self.assertRaises(ConvergenceError) as caught:
            neumann_greens(generator, 1e-12, 2)
        self.assertEqual(caught.exception.orders, 2)


class GridEngineTests(SimpleTestCase):

    def test_static_rabi_oscillation(self):
        result = unitary_grid(static_rabi(), 0.0, TWO_PI, 257, 1e-4)
        times = result.times
        for i in range(0, 257, 16):
            for j in range(0, i + 1, 16):
                expected = math.cos((times[i] - times[j]) / 2)
                self.assertAlmostEqual(result.u11.values[i, j], expected, delta=1e-6)
                self.assertAlmostEqual(result.u22.values[i, j], np.conj(result.u11.values[i, j]),
                                       delta=1e-15)
        self.assertLess(result.unitarity_defect, 1e-5)
        self.assertLess(result.discretization_error, 1e-4)

    def test_composition_on_the_grid(self):
        result = unitary_grid(load_drive_spec('@fig2a'), 0.0, TWO_PI, 257, 1e-2)
        for i, j, k in ((256, 128, 0), (200, 50, 10), (100, 99, 3)):
            composed = (result.at(i, j) @ result.at(j, k)).matrix
            np.testing.assert_allclose(composed, result.at(i, k).matrix, atol=5e-4)

    def test_zero_drive_gives_identity(self):
        result = unitary_grid(DriveSpec(eps0=1.0), 0.0, 3.0, 33)
        self.assertEqual(result.orders_used, 0)
        np.testing.assert_allclose(result.u11.values, np.tri(33), atol=1e-15)
        self.assertFalse(np.any(result.probability()))

    def test_coarse_grid_is_rejected(self):
        with self.assertRaises(DiscretizationError) as caught:
            unitary_grid(static_rabi(), 0.0, 4 * math.pi, 5, 1e-6)
        self.assertIn('kind=discretization', caught.exception.as_line())

    def test_column_matches_full_grid(self):
        spec = load_drive_spec('@fig2a')
        full = unitary_grid(spec, 0.0, TWO_PI, 129, 0.1)
        column = unitary_grid_column(KernelSpec.from_drive(spec), 0.0, TWO_PI, 129, 0.1)
        np.testing.assert_allclose(column.entries[1], full.u12.values[:, 0], atol=1e-9)


class NodeListTests(SimpleTestCase):

    def test_first_power(self):
        nodes = node_list(IndexTuple(m=(2,), n=(-1,)), 0.5, 2.0)
        self.assertEqual(nodes.nodes, (0.5 - 2.0, 0.0))

    def test_second_power_shifts_earlier_nodes(self):
        eps0, omega = 0.3, 1.5
        n1, n2, m1, m2 = 1, -2, 0, 3
        nodes = node_list(IndexTuple(m=(m1, m2), n=(n1, n2)), eps0, omega)
        expected = (eps0 + (n1 + n2 - m2) * omega, (n2 - m2) * omega, eps0 + n2 * omega, 0.0)
        np.testing.assert_allclose(nodes.nodes, expected, atol=1e-15)

    def test_index_tuple_validation(self):
        with self.assertRaises(ValueError):
            IndexTuple(m=(), n=())
        self.assertTrue(IndexTuple(m=(1, 0), n=(-1, 1)).within((-1, 1)))
        self.assertFalse(IndexTuple(m=(2,), n=(0,)).within((-1, 1)))


class AnalyticSeriesTests(SimpleTestCase):

    def test_first_power_is_the_kernel(self):
        ks = modulated()
        for t, s in ((1.0, 0.0), (3.7, 1.2), (6.0, 5.5)):
            self.assertAlmostEqual(star_power_analytic(ks, 1, t, s), kernel_at_dd(ks, t, s), delta=1e-13)

    def test_second_power_of_constant_coupling(self):
        ks = KernelSpec.from_drive(static_rabi(2.0))
        tau = 1.7
        self.assertAlmostEqual(star_power_analytic(ks, 2, 2.0 + tau, 2.0), tau ** 3 / 6, delta=1e-13)

    def test_budget_is_enforced(self):
        with self.assertRaises(BudgetExceeded) as caught:
            star_power_analytic(modulated(), 2, 1.0, 0.0, budget=10)
        self.assertGreater(caught.exception.required, 10)

    def test_static_rabi_probability(self):
        ks = KernelSpec.from_drive(static_rabi())
        times = np.linspace(0.0, 4 * math.pi, 41)
        solution = unitary_analytic_trace(ks, times, 0.0)
        np.testing.assert_allclose(solution.probability(), np.sin(times / 2) ** 2, atol=2e-9)
        self.assertGreater(solution.orders_used, 1)

    def test_composition(self):
        ks = KernelSpec.from_drive(load_drive_spec('@fig2a'))
        for t, s in ((5.0, 2.0), (TWO_PI, 0.7), (3.1, 3.0)):
            with self.subTest(t=t, s=s):
                composed = unitary_analytic(ks, t, s) @ unitary_analytic(ks, s, 0.0)
                np.testing.assert_allclose(composed.matrix, unitary_analytic(ks, t, 0.0).matrix, atol=1e-7)

    def test_causality(self):
        with self.assertRaises(CausalityError):
            unitary_analytic(modulated(), 0.5, 1.0)

    def test_order_limit(self):
        with self.assertRaises(ConvergenceError):
            unitary_analytic(KernelSpec.from_drive(load_drive_spec('@fig2a')), TWO_PI, 0.0, k_max=2)

    def test_series_and_grid_engines_agree(self):
        ks = KernelSpec.from_drive(load_drive_spec('@fig2a'))
        series = unitary_analytic(ks, TWO_PI, 0.0)
        grid = unitary_grid_column(ks, 0.0, TWO_PI, 1025, 1e-4).at(-1)
        np.testing.assert_allclose(grid.matrix, series.matrix, atol=1e-6)
        self.assertLess(series.unitarity_defect(), 1e-7)


class ObservableTests(SimpleTestCase):

    def test_transition_probability(self):
        self.assertEqual(transition_probability(Unitary2.identity()), 0.0)
        swap = Unitary2(0j, 1 + 0j, 1 + 0j, 0j)
        self.assertEqual(transition_probability(swap), 1.0)
        with self.assertLogs('dynamics.propagator', level='WARNING'):
            clamped = transition_probability(Unitary2(0j, 1.0 + 1e-9, 1 + 0j, 0j), clamp=True)
        self.assertEqual(clamped, 1.0)

    def test_quasienergies_of_identity(self):
        self.assertEqual(quasienergies(Unitary2.identity(), TWO_PI), (0.0, 0.0))

    def test_quasienergies_of_diagonal_monodromy(self):
        theta = 0.6
        monodromy = Unitary2(np.exp(-1j * theta), 0j, 0j, np.exp(1j * theta))
        eps_plus, eps_minus = quasienergies(monodromy, TWO_PI)
        self.assertAlmostEqual(eps_plus, -theta / TWO_PI, delta=1e-12)
        self.assertAlmostEqual(eps_minus, theta / TWO_PI, delta=1e-12)

    def test_quasienergies_need_unitary_monodromy(self):
        with self.assertRaises(UnitarityError):
            quasienergies(Unitary2(2 + 0j, 0j, 0j, 2 + 0j), TWO_PI)

    def test_stroboscopic_probability(self):
        ks = KernelSpec.from_drive(static_rabi(0.5))
        monodromy = unitary_analytic(ks, TWO_PI, 0.0)
        self.assertAlmostEqual(stroboscopic_probability(monodromy, 1), 1.0, delta=1e-9)
        self.assertAlmostEqual(stroboscopic_probability(monodromy, 2), 0.0, delta=1e-9)


class EffectiveHamiltonianTests(SimpleTestCase):

    def test_constant_coupling_is_its_own_average(self):
        matrix = effective_hamiltonian(static_rabi())
        np.testing.assert_allclose(matrix, [[0, 0.5], [0.5, 0]], atol=1e-5)

    def test_resonant_harmonic_without_modulation(self):
        spec = DriveSpec(eps0=1.0, d_coeffs=((-1, 0.1),))
        matrix = effective_hamiltonian(spec)
        np.testing.assert_allclose(matrix, [[0, 0.05], [0.05, 0]], atol=1e-6)

    def test_weak_modulated_drive_keeps_the_resonant_coupling(self):
        spec = DriveSpec(eps0=1.0, a_coeffs=((1, 1.8),), d_coeffs=((0, 0.172),))
        ks = KernelSpec.from_drive(spec)
        alpha = ks.resonance_index()
        self.assertEqual(alpha, -1)
        resonant = ks.gbf[alpha]
        self.assertAlmostEqual(abs(resonant), 0.05, delta=5e-4)
        self.assertGreater(abs(ks.gbf[0]), 0.02)
        self.assertGreater(abs(ks.gbf[-2]), 0.02)
        matrix = effective_hamiltonian(spec, n_quad=513, ks=ks)
        self.assertLess(abs(matrix[0, 1] - resonant), 0.05 * abs(resonant))
        self.assertLess(abs(matrix[1, 0] - np.conj(resonant)), 0.05 * abs(resonant))

    def test_zero_drive(self):
        self.assertFalse(np.any(effective_hamiltonian(DriveSpec(eps0=1.0))))

    def test_quadrature_size(self):
        with self.assertRaises(ValueError):
            effective_hamiltonian(static_rabi(), n_quad=16)
