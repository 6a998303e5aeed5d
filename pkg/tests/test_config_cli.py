import contextlib
import io
import tempfile
import unittest
from pathlib import Path

import numpy as np
import pandas as pd

from application.bifidelity.benchmark import PHASES
from constants import DAYS_PER_YEAR, BenchmarkColumns, MarketComparisonColumns, SurfaceColumns
from domain.pricing.black_scholes import bs_closed_form
from domain.volatility.model import VolatilityModel
from infrastructure.storage.tables import read_table
from interface.cli import build_parser, main
from store.config import CONFIG_KEYS
from store.data import read_json
from store.state import load_run_config
from utils.exceptions import ConfigurationError

SMALL_SOLVE = ["--grid-m-zeta", "40", "--grid-n-tau", "40", "--uncertainty-solution-degree", "2", "--log-level", "WARNING"]


class ConfigTest(unittest.TestCase):
    def test_defaults(self):
        config = load_run_config()
        self.assertEqual(config.option.strike, 100.0)
        self.assertEqual(config.option.maturity_days, 20.0)
        self.assertEqual(config.uncertainty.solution_degree, 5)
        self.assertEqual(config.volatility.coefficients, (0.5, 0.2, 0.1))
        self.assertEqual((config.grid.m_zeta, config.grid.n_tau), (200, 319))
        self.assertEqual((config.bifid.low_m_zeta, config.bifid.low_n_tau), (50, 150))
        self.assertEqual((config.bifid.high_m_zeta, config.bifid.high_n_tau), (175, 1500))
        self.assertEqual(config.bifid.budget, 40)
        self.assertFalse(config.grid.allow_unstable)

    def test_ini_file_and_overrides(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "run.ini"
            path.write_text(
                "[option]\nstrike=120\nrate=0.01\n"
                "[volatility]\ncoefficients=0.4,0.1,0.05\n"
                "[grid]\nallow_unstable=true\nn_tau=500\n"
            )
            config = load_run_config(path, {"grid/n_tau": "600"})
        self.assertEqual(config.option.strike, 120.0)
        self.assertEqual(config.option.rate, 0.01)
        self.assertEqual(config.volatility.coefficients, (0.4, 0.1, 0.05))
        self.assertTrue(config.grid.allow_unstable)
        self.assertEqual(config.grid.n_tau, 600)
        self.assertEqual(config.grid.m_zeta, 200)

    def test_invalid_values(self):
        for overrides in (
            {"grid/m_zeta": "abc"},
            {"option/strike": "-1"},
            {"option/type": "put"},
            {"grid/allow_unstable": "maybe"},
            {"volatility/coefficients": "0.5,x"},
            {"bifid/sampling": "sobol"},
            {"unknown/key": "1"},
        ):
            with self.subTest(overrides=overrides), self.assertRaises(ConfigurationError):
                load_run_config(None, overrides)

    def test_missing_file(self):
        with self.assertRaises(ConfigurationError):
            load_run_config("/nonexistent/run.ini")

    def test_flags_are_unique(self):
        flags = [item.flag for item in CONFIG_KEYS]
        self.assertEqual(len(set(flags)), len(flags))
        arguments = build_parser().parse_args(["solve", "--grid-n-tau", "10"])
        self.assertEqual(getattr(arguments, "grid/n_tau"), "10")

    def test_record_echo(self):
        record = load_run_config().to_record()
        self.assertEqual(record["grid"]["n_tau"], 319)
        self.assertEqual(record["volatility"]["coefficients"], (0.5, 0.2, 0.1))


class CommandTest(unittest.TestCase):
    def test_implied_vol(self):
        price = bs_closed_form(100.0, 20 / DAYS_PER_YEAR, 100.0, 0.0, 0.2292)
        output = io.StringIO()
        with contextlib.redirect_stdout(output):
            code = main(["implied-vol", "--price", repr(float(price)), "--spot", "100", "--log-level", "WARNING"])
        self.assertEqual(code, 0)
        self.assertAlmostEqual(float(output.getvalue()), 0.2292, delta=1e-10)

    def test_implied_vol_without_solution(self):
        code = main(["implied-vol", "--price", "150", "--spot", "100", "--log-level", "CRITICAL"])
        self.assertEqual(code, 4)

    def test_solve_writes_surface_and_manifest(self):
        with tempfile.TemporaryDirectory() as directory:
            code = main(["solve", "--output-directory", directory, "--grid-include-reference", "true"] + SMALL_SOLVE)
            self.assertEqual(code, 0)
            frame = read_table(Path(directory) / "surface.csv", SurfaceColumns)
            manifest = read_json(Path(directory) / "solve_manifest.json")
        self.assertEqual(len(frame), 41 * 40)
        self.assertTrue(manifest["results"]["stability"]["stable"])
        self.assertEqual(manifest["results"]["problem"]["basis_size"], 6)
        self.assertEqual(manifest["outputs"]["surface"], "surface.csv")

    def test_solve_with_market_comparison(self):
        with tempfile.TemporaryDirectory() as directory:
            market = Path(directory) / "market.csv"
            lines = ["date,spot,price,strike,maturity_days,rate"]
            for day, spot in enumerate((95.0, 100.0, 104.0)):
                remaining = 20 - 5 * day
                price = bs_closed_form(spot, remaining / DAYS_PER_YEAR, 100.0, 0.0, 0.5)
                lines.append(f"d{day},{spot},{float(price)!r},100,{remaining},0")
            market.write_text("\n".join(lines) + "\n")
            code = main(
                ["solve", "--output-directory", directory, "--grid-market-input", str(market)] + SMALL_SOLVE
            )
            self.assertEqual(code, 0)
            frame = pd.read_csv(Path(directory) / "market_comparison.csv")
        self.assertEqual(list(frame.columns), MarketComparisonColumns.get_all_names())
        self.assertEqual(len(frame), 3)
        self.assertTrue(np.all(frame["std"] >= 0))
        np.testing.assert_allclose(frame["t_days"], [0.0, 5.0, 10.0])

    def test_unstable_grid_exit_code(self):
        with tempfile.TemporaryDirectory() as directory:
            code = main(["solve", "--output-directory", directory, "--grid-n-tau", "2", "--log-level", "CRITICAL"])
        self.assertEqual(code, 3)

    def test_bad_configuration_exit_code(self):
        code = main(["solve", "--grid-m-zeta", "abc", "--log-level", "CRITICAL"])
        self.assertEqual(code, 2)

    def test_fit_command(self):
        model = VolatilityModel.build("normal,uniform:0.5", 1, [0.3, 0.05, 0.03])
        samples = model.sample(np.random.default_rng(1), 500)
        with tempfile.TemporaryDirectory() as directory:
            series = Path(directory) / "vols.csv"
            series.write_text(
                "date,implied_vol\n" + "".join(f"d{i},{float(value)!r}\n" for i, value in enumerate(samples))
            )
            code = main(["fit", "--volatility-fit-input", str(series), "--output-directory", directory, "--log-level", "WARNING"])
            self.assertEqual(code, 0)
            saved = read_json(Path(directory) / "fitted_model.json")
            self.assertTrue((Path(directory) / "density.csv").exists())
        coefficients = saved["results"]["fit"]["model"]["coefficients"]
        self.assertAlmostEqual(coefficients[0], float(np.mean(samples)), delta=1e-12)

    def test_bifid_pipeline(self):
        with tempfile.TemporaryDirectory() as directory:
            common = [
                "--uncertainty-solution-degree", "2",
                "--bifid-low-m-zeta", "20",
                "--bifid-low-n-tau", "40",
                "--bifid-high-m-zeta", "40",
                "--bifid-high-n-tau", "160",
                "--bifid-sigma00-max", "0.3",
                "--bifid-step", "0.1",
                "--bifid-budget", "3",
                "--bifid-store", str(Path(directory) / "store"),
                "--output-directory", directory,
                "--log-level", "WARNING",
            ]
            self.assertEqual(main(["bifid", "offline"] + common), 0)
            manifest = read_json(Path(directory) / "store" / "manifest.json")
            self.assertEqual(manifest["A"], 3)
            self.assertFalse((Path(directory) / "store" / "scratch").exists())

            point = ",".join(repr(value) for value in manifest["points"][0])
            self.assertEqual(main(["bifid", "online", "--volatility-coefficients", point] + common), 0)
            online = read_json(Path(directory) / "bifid_online_manifest.json")
            self.assertTrue(online["results"]["exact_match"])

            self.assertEqual(main(["bench", "--bench-models", "2"] + common), 0)
            table = pd.read_csv(Path(directory) / "benchmark.csv")
            self.assertEqual(list(table.columns), BenchmarkColumns.get_all_names())
            self.assertEqual(len(table), 3)
            bench = read_json(Path(directory) / "benchmark_manifest.json")
            self.assertEqual(set(bench["results"]["phase_seconds"]), set(PHASES))

            code = main(["bifid", "online", "--option-strike", "110"] + common[:-1] + ["CRITICAL"])
            self.assertEqual(code, 2)


if __name__ == "__main__":
    unittest.main()
