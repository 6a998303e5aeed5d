import tempfile
import unittest
from pathlib import Path

import numpy as np
from scipy.integrate import quad

from application.volfit.density import density_table
from application.volfit.mle import FitMode, fit_constrained_mle, log_likelihood
from application.volfit.series import load_series
from constants import DAYS_PER_YEAR, DensityColumns
from domain.pricing.black_scholes import bs_closed_form
from domain.volatility.model import VolatilityModel, model_density
from utils.exceptions import DataError, DegenerateModelError

BOOTSTRAP_RESAMPLES = 30


class VolatilityModelTest(unittest.TestCase):
    def _model(self, sigma00=0.5, sigma10=0.2, sigma01=0.1):
        return VolatilityModel.build("normal,uniform:0.5", 1, [sigma00, sigma10, sigma01])

    def test_moments_from_coefficients(self):
        model = self._model()
        self.assertAlmostEqual(model.mean, 0.5)
        self.assertAlmostEqual(model.variance, 0.05)

    def test_normal_limit_density(self):
        model = self._model(0.5, 0.2, 0.0)
        self.assertAlmostEqual(model_density(model, 0.5), 1 / (0.2 * np.sqrt(2 * np.pi)), places=12)

    def test_uniform_limit_density(self):
        model = self._model(0.5, 0.0, 0.1)
        self.assertAlmostEqual(model_density(model, 0.55), 1 / (0.1 * np.sqrt(12)), places=12)
        self.assertEqual(model_density(model, 0.9), 0.0)

    def test_point_mass_is_rejected(self):
        with self.assertRaises(DegenerateModelError):
            model_density(self._model(0.5, 0.0, 0.0), 0.5)

    def test_density_matches_monte_carlo(self):
        model = self._model()
        samples = model.sample(np.random.default_rng(7), 1_000_000)
        half_width = 0.005
        hits = np.mean(np.abs(samples - 0.5) <= half_width)
        estimate = hits / (2 * half_width)
        error = np.sqrt(hits * (1 - hits) / samples.size) / (2 * half_width)
        self.assertLess(abs(estimate - model_density(model, 0.5)), 3 * error)

    def test_density_integrates_to_one(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            sigma00, sigma10, sigma01 = rng.uniform(0.05, 0.6, 3)
            model = self._model(sigma00, sigma10, sigma01)
            reach = np.sqrt(3) * sigma01 + 12 * sigma10
            total, _ = quad(
                lambda x: model_density(model, x),
                sigma00 - reach,
                sigma00 + reach,
                points=[sigma00 - np.sqrt(3) * sigma01, sigma00 + np.sqrt(3) * sigma01],
                epsabs=1e-12,
                limit=200,
            )
            self.assertAlmostEqual(total, 1.0, delta=1e-8)

    def test_sign_flips_keep_distribution(self):
        model = self._model(0.5, -0.2, -0.1)
        canonical = model.canonical()
        np.testing.assert_allclose(canonical.coefficients, [0.5, 0.2, 0.1])
        self.assertAlmostEqual(model_density(model, 0.42), model_density(canonical, 0.42), places=14)

    def test_raw_coefficient_conventions(self):
        model = VolatilityModel.from_raw("normal,uniform:0.5", [0.2292, 0.1126, 0.0115])
        self.assertAlmostEqual(model.coefficient((0, 1)), 0.0115 / np.sqrt(12), places=15)
        np.testing.assert_allclose(model.raw_coefficients(), [0.2292, 0.1126, 0.0115], rtol=1e-14)


class ConstrainedFitTest(unittest.TestCase):
    def _samples(self, size=100_000, seed=11):
        model = VolatilityModel.build("normal,uniform:0.5", 1, [0.5, 0.2, 0.1])
        return model.sample(np.random.default_rng(seed), size)

    def test_recovers_known_model(self):
        samples = self._samples()
        result = fit_constrained_mle(samples)
        rng = np.random.default_rng(12)
        resampled = np.array(
            [
                fit_constrained_mle(rng.choice(samples, size=samples.size)).model.coefficients
                for _ in range(BOOTSTRAP_RESAMPLES)
            ]
        )
        standard_errors = np.std(resampled, axis=0, ddof=1)
        for fitted, expected, error in zip(result.model.coefficients, (0.5, 0.2, 0.1), standard_errors):
            self.assertAlmostEqual(fitted, expected, delta=3 * error)

    def test_first_two_moments_are_exact(self):
        samples = self._samples(5_000, seed=5)
        result = fit_constrained_mle(samples)
        self.assertAlmostEqual(result.model.mean, float(np.mean(samples)), delta=1e-12)
        self.assertAlmostEqual(result.model.variance, float(np.var(samples, ddof=1)), delta=1e-12)

    def test_fit_beats_every_angle(self):
        samples = self._samples(5_000, seed=9)
        result = fit_constrained_mle(samples)
        spread = np.sqrt(result.sample_variance)
        for angle in np.linspace(0, np.pi / 2, 64):
            candidate = VolatilityModel.build(
                "normal,uniform:0.5", 1, [result.sample_mean, spread * np.cos(angle), spread * np.sin(angle)]
            )
            self.assertGreaterEqual(result.log_likelihood + 1e-9, log_likelihood(candidate, samples))

    def test_mean_only_mode(self):
        samples = self._samples(5_000, seed=2)
        result = fit_constrained_mle(samples, mode=FitMode.MEAN_ONLY)
        self.assertAlmostEqual(result.model.mean, float(np.mean(samples)), delta=1e-12)
        self.assertTrue(np.all(result.model.coefficients[1:] >= 0))

    def test_equal_samples_are_rejected(self):
        with self.assertRaises(DegenerateModelError):
            fit_constrained_mle([0.3, 0.3, 0.3, 0.3])

    def test_density_table_columns(self):
        samples = self._samples(2_000, seed=1)
        result = fit_constrained_mle(samples)
        table = density_table(result.model, samples, bins=25)
        self.assertEqual(list(table.columns), DensityColumns.get_all_names())
        self.assertEqual(len(table), 25)


class SeriesTest(unittest.TestCase):
    def test_implied_vol_column_skips_inversion(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "vols.csv"
            path.write_text("date,implied_vol\n2020-01-02,0.21\n2020-01-03,0.25\n")
            series = load_series(path)
        self.assertFalse(series.inverted)
        np.testing.assert_allclose(series.values, [0.21, 0.25])

    def test_prices_are_inverted(self):
        vols = [0.18, 0.22, 0.3]
        lines = ["date,spot,price,strike,maturity_days,rate"]
        for day, vol in enumerate(vols):
            price = bs_closed_form(100.0, 60 / DAYS_PER_YEAR, 100.0, 0.0, vol)
            lines.append(f"d{day},100,{float(price)!r},100,60,0")
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "prices.csv"
            path.write_text("\n".join(lines) + "\n")
            series = load_series(path)
        self.assertTrue(series.inverted)
        np.testing.assert_allclose(series.values, vols, atol=1e-9)

    def test_malformed_row_reports_line(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "vols.csv"
            path.write_text("date,implied_vol\n2020-01-02,0.21\n2020-01-03,abc\n")
            with self.assertRaises(DataError) as context:
                load_series(path)
        self.assertIn("line 3", str(context.exception))


if __name__ == "__main__":
    unittest.main()
