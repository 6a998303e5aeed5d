import unittest

import numpy as np

from domain.gpc.multiindex import build_index_set
from domain.gpc.orthopoly import (
    DistributionFamily,
    PolynomialBasis,
    eval_1d,
    parse_families,
    quadrature_rule,
)
from utils.exceptions import ConfigurationError


class OrthoPolyTest(unittest.TestCase):
    def _families(self):
        return (DistributionFamily.standard_normal(), DistributionFamily.uniform_symmetric(0.5))

    def test_constant_polynomial(self):
        self.assertEqual(eval_1d(DistributionFamily.standard_normal(), 0, 3.7), 1.0)

    def test_uniform_degree_one_is_scaled_identity(self):
        family = DistributionFamily.uniform_symmetric(0.5)
        for x in (-0.5, -0.1, 0.2, 0.5):
            self.assertAlmostEqual(eval_1d(family, 1, x), np.sqrt(12.0) * x, places=14)

    def test_hermite_degree_three(self):
        value = eval_1d(DistributionFamily.standard_normal(), 3, 1.0)
        self.assertAlmostEqual(value, -2.0 / np.sqrt(6.0), places=14)

    def test_single_node_rule(self):
        nodes, weights = quadrature_rule(DistributionFamily.standard_normal(), 1)
        np.testing.assert_allclose(nodes, [0.0])
        np.testing.assert_allclose(weights, [1.0])

    def test_two_point_uniform_rule(self):
        nodes, weights = quadrature_rule(DistributionFamily.uniform_symmetric(0.5), 2)
        np.testing.assert_allclose(np.sort(nodes), [-1 / (2 * np.sqrt(3)), 1 / (2 * np.sqrt(3))], atol=1e-14)
        np.testing.assert_allclose(weights, [0.5, 0.5], atol=1e-14)

    def test_rejects_zero_nodes(self):
        with self.assertRaises(ConfigurationError):
            quadrature_rule(DistributionFamily.standard_normal(), 0)

    def test_moment_exactness(self):
        for family in self._families():
            for n_nodes in (1, 3, 6):
                nodes, weights = quadrature_rule(family, n_nodes)
                self.assertAlmostEqual(weights.sum(), 1.0, delta=1e-12)
                for degree in range(2 * n_nodes):
                    expected = family.moment(degree)
                    value = float(np.sum(weights * nodes**degree))
                    self.assertAlmostEqual(value, expected, delta=1e-12 * max(1.0, abs(expected)))

    def test_normal_variance_with_five_nodes(self):
        nodes, weights = quadrature_rule(DistributionFamily.standard_normal(), 5)
        self.assertAlmostEqual(float(np.sum(weights * nodes**2)), 1.0, delta=1e-12)

    def test_basis_is_orthonormal(self):
        basis = PolynomialBasis(self._families(), build_index_set(2, 8))
        points, weights = basis.tensor_quadrature(10)
        values = basis.evaluate(points)
        gram = (values * weights) @ values.T
        np.testing.assert_allclose(gram, np.eye(basis.size), atol=1e-10)

    def test_basis_factorizes(self):
        families = self._families()
        basis = PolynomialBasis(families, build_index_set(2, 3))
        point = np.array([[0.3, -0.2]])
        values = basis.evaluate(point)[:, 0]
        for position, index in enumerate(basis.index_set):
            expected = eval_1d(families[0], index.entries[0], 0.3) * eval_1d(families[1], index.entries[1], -0.2)
            self.assertAlmostEqual(values[position], expected, places=13)

    def test_family_labels(self):
        families = parse_families("normal, uniform:0.25")
        self.assertEqual([family.label for family in families], ["normal", "uniform:0.25"])
        with self.assertRaises(ConfigurationError):
            parse_families("beta")


if __name__ == "__main__":
    unittest.main()
