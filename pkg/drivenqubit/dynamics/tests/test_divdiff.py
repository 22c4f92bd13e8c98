import math

import numpy as np
from django.test import SimpleTestCase

from dynamics.divdiff import (
    NodeList, divided_difference_recurrence_check, exp_divided_difference, explicit_divided_difference,
)
from dynamics.exceptions import NodeError


class DividedDifferenceTests(SimpleTestCase):

    def test_single_node_is_the_exponential(self):
        self.assertAlmostEqual(exp_divided_difference([0.7], 2.0), np.exp(1.4j), delta=1e-14)

    def test_two_nodes(self):
        a, b, tau = 1.3, -0.4, 1.7
        expected = (np.exp(1j * a * tau) - np.exp(1j * b * tau)) / (a - b)
        self.assertAlmostEqual(exp_divided_difference([a, b], tau), expected, delta=1e-13)

    def test_confluent_closed_forms(self):
        for x, count, tau in ((0.0, 4, 1.5), (2.0, 3, 0.8), (-1.5, 6, 2.2)):
            n = count - 1
            expected = (1j * tau) ** n * np.exp(1j * x * tau) / math.factorial(n)
            value = exp_divided_difference([x] * count, tau)
            self.assertLess(abs(value - expected), 1e-12 * max(1.0, abs(expected)))

    def test_permutation_invariance(self):
        rng = np.random.default_rng(11)
        nodes = rng.uniform(-3, 3, 7)
        reference = exp_divided_difference(nodes, 1.9)
        for _ in range(5):
            shuffled = rng.permutation(nodes)
            value = exp_divided_difference(shuffled, 1.9)
            self.assertLess(abs(value - reference), 1e-13 * max(abs(reference), 1e-300))

    def test_matches_explicit_formula_for_separated_nodes(self):
        nodes = [-2.0, -0.5, 1.0, 2.5]
        for tau in (0.3, 1.0, 2.7):
            expected = explicit_divided_difference(nodes, tau)
            self.assertLess(abs(exp_divided_difference(nodes, tau) - expected), 1e-12 * abs(expected))

    def test_simplex_bound(self):
        rng = np.random.default_rng(5)
        for _ in range(10000):
            n = int(rng.integers(0, 13))
            nodes = rng.uniform(-20, 20, n + 1)
            tau = float(rng.uniform(0, 4))
            bound = tau ** n / math.factorial(n)
            self.assertLessEqual(abs(exp_divided_difference(nodes, tau)), bound * (1 + 1e-10) + 1e-13)

    def test_near_confluence_is_continuous(self):
        confluent = exp_divided_difference([1.0, 1.0, 2.0], 1.3)
        nearby = exp_divided_difference([1.0, 1.0 + 1e-8, 2.0], 1.3)
        self.assertLess(abs(confluent - nearby), 1e-6)

    def test_recurrence_residual(self):
        self.assertLess(divided_difference_recurrence_check([-1.0, 0.2, 0.9, 3.0], 1.1), 1e-12)

    def test_array_tau_keeps_shape(self):
        taus = np.linspace(0.0, 2.0, 6).reshape(2, 3)
        values = exp_divided_difference([0.5, -0.5], taus)
        self.assertEqual(values.shape, (2, 3))
        self.assertAlmostEqual(values[1, 2], exp_divided_difference([0.5, -0.5], 2.0), delta=1e-14)

    def test_node_list_helpers(self):
        nodes = NodeList((2.0, 0.0, 2.0))
        self.assertEqual(nodes.order, 2)
        self.assertEqual(nodes.canonical(), (0.0, 2.0, 2.0))
        self.assertEqual(nodes.distinct(), [(0.0, 1), (2.0, 2)])

    def test_invalid_nodes(self):
        with self.assertRaises(NodeError):
            NodeList(())
        with self.assertRaises(NodeError):
            NodeList((1.0, 1j))
        with self.assertRaises(NodeError):
            NodeList((float('nan'),))
        with self.assertRaises(NodeError):
            explicit_divided_difference([1.0, 1.0], 0.5)
