import unittest

import numpy as np

from application.sgsystem.coupling import assemble_coupling, check_parabolic
from application.sgsystem.option import OptionSpec
from application.sgsystem.problem import ProblemTemplate, build_problem
from domain.gpc.galerkin import galerkin_tensor
from domain.gpc.multiindex import build_index_set
from domain.gpc.orthopoly import PolynomialBasis, parse_families
from domain.volatility.model import VolatilityModel
from utils.exceptions import ConfigurationError, NonParabolicError

FAMILIES = "normal,uniform:0.5"


class SGSystemTest(unittest.TestCase):
    def _tensor(self, N=5, K=1):
        basis = PolynomialBasis(parse_families(FAMILIES), build_index_set(2, N))
        return galerkin_tensor(basis, K, N)

    def _sigma_one(self):
        return VolatilityModel.build(FAMILIES, 1, [0.5, 0.2, 0.1])

    def test_deterministic_model_gives_scaled_identity(self):
        tensor = self._tensor(3)
        coupling = assemble_coupling(tensor, VolatilityModel.deterministic(0.5, FAMILIES))
        np.testing.assert_allclose(coupling.matrix, 0.25 * np.eye(10), atol=1e-14)

    def test_sigma_one_coupling(self):
        coupling = assemble_coupling(self._tensor(5), self._sigma_one())
        self.assertEqual(coupling.matrix.shape, (21, 21))
        self.assertAlmostEqual(coupling.matrix[0, 0], 0.30, places=12)
        np.testing.assert_array_equal(coupling.matrix, coupling.matrix.T)

    def test_degree_zero_solution_gives_second_moment(self):
        coupling = assemble_coupling(self._tensor(0), self._sigma_one())
        self.assertEqual(coupling.matrix.shape, (1, 1))
        self.assertAlmostEqual(coupling.matrix[0, 0], self._sigma_one().second_moment, places=13)

    def test_matches_direct_quadrature(self):
        model = self._sigma_one()
        for N in range(4):
            tensor = self._tensor(N)
            basis = PolynomialBasis(tensor.families, tensor.index_set)
            points, weights = basis.tensor_quadrature(20)
            values = basis.evaluate(points)
            sigma_squared = model.evaluate(points) ** 2
            expected = (values * weights * sigma_squared) @ values.T
            np.testing.assert_allclose(assemble_coupling(tensor, model).matrix, expected, atol=1e-10)

    def test_spectrum_invariant_under_sign_flips(self):
        tensor = self._tensor(4)
        model = self._sigma_one()
        reference = np.linalg.eigvalsh(assemble_coupling(tensor, model).matrix)
        for variables in ([0], [1], [0, 1]):
            flipped = model.flip_signs(variables)
            spectrum = np.linalg.eigvalsh(assemble_coupling(tensor, flipped).matrix)
            np.testing.assert_allclose(spectrum, reference, atol=1e-12)

    def test_parabolicity_reports(self):
        report = check_parabolic(0.25 * np.eye(3))
        self.assertTrue(report.parabolic)
        self.assertAlmostEqual(report.min_real_eig, 0.25)

        report = check_parabolic(np.diag([1.0, -0.1]))
        self.assertFalse(report.parabolic)
        self.assertAlmostEqual(report.min_real_eig, -0.1)

        self.assertTrue(check_parabolic(assemble_coupling(self._tensor(5), self._sigma_one())).parabolic)

    def test_market_fitted_model_is_parabolic(self):
        tensor = self._tensor(5)
        for model in (
            VolatilityModel.from_raw(FAMILIES, [0.2292, 0.1126, 0.0115]),
            VolatilityModel.build(FAMILIES, 1, [0.2292, 0.1126, 0.0115]),
        ):
            problem = build_problem(model, OptionSpec(10275.0, 180.0, 0.0), tensor)
            self.assertTrue(problem.parabolicity.parabolic)

    def test_mismatched_dimensions_are_rejected(self):
        tensor = self._tensor(2)
        model = VolatilityModel.build("normal,normal,uniform:0.5", 1, [0.5, 0.1, 0.1, 0.1])
        with self.assertRaises(ConfigurationError):
            assemble_coupling(tensor, model)
        with self.assertRaises(ConfigurationError):
            assemble_coupling(tensor, self._sigma_one(), build_index_set(2, 3))

    def test_problem_initial_and_boundary_values(self):
        problem = build_problem(self._sigma_one(), OptionSpec(100.0, 20.0, 0.0), self._tensor(5))
        initial = problem.initial_value(np.array([0.0, 0.5, 0.75, 1.0]))
        np.testing.assert_allclose(initial[:, 0], [0.0, 0.0, 0.5, 1.0])
        self.assertTrue(np.all(initial[:, 1:] == 0.0))
        np.testing.assert_array_equal(problem.lower_boundary(), np.zeros(21))
        self.assertEqual(problem.upper_boundary()[0], 1.0)
        self.assertAlmostEqual(problem.maturity_years, 20 / 251)

    def test_coefficient_functions(self):
        problem = build_problem(self._sigma_one(), OptionSpec(100.0, 20.0, 0.05), self._tensor(1))
        zeta = np.array([0.25])
        self.assertAlmostEqual(problem.diffusion(zeta)[0], 0.5 * 0.25**2 * 0.75**2)
        self.assertAlmostEqual(problem.drift(zeta)[0], 0.05 * 0.25 * 0.75)
        self.assertAlmostEqual(problem.reaction(zeta)[0], -0.05 * 0.75)

    def test_zero_volatility_is_not_parabolic(self):
        tensor = self._tensor(2)
        model = VolatilityModel.deterministic(0.0, FAMILIES)
        with self.assertRaises(NonParabolicError):
            build_problem(model, OptionSpec(100.0, 20.0), tensor)
        problem = build_problem(model, OptionSpec(100.0, 20.0), tensor, allow_nonparabolic=True)
        self.assertFalse(problem.parabolicity.parabolic)

    def test_template_builds_from_coefficients(self):
        tensor = self._tensor(2)
        template = ProblemTemplate(OptionSpec(100.0, 20.0), tensor, tensor.index_set)
        problem = template.build(template.model_from_coefficients([0.4, 0.1, 0.05]))
        self.assertEqual(problem.size, 6)

    def test_invalid_option(self):
        with self.assertRaises(ConfigurationError):
            OptionSpec(0.0, 20.0)
        with self.assertRaises(ConfigurationError):
            OptionSpec(100.0, 0.0)


if __name__ == "__main__":
    unittest.main()
