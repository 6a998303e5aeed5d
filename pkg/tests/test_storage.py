import json
import tempfile
import unittest
from pathlib import Path

import numpy as np

from constants import ImpliedVolInputColumns, PriceInputColumns, SurfaceColumns
from infrastructure.parallel import map_ordered
from infrastructure.storage.tables import build_frame, detect_market_columns, read_table, write_table
from store.data import RunRecord, read_json, to_json_compatible, write_json
from utils.exceptions import DataError
from utils.functions import convert_seconds, remaining_time


class JsonTest(unittest.TestCase):
    def test_numpy_and_non_finite_values(self):
        value = to_json_compatible({"a": np.arange(3), "b": np.float64(np.nan), "c": (1.5, np.inf), 4: Path("x")})
        self.assertEqual(value, {"a": [0, 1, 2], "b": None, "c": [1.5, None], "4": "x"})

    def test_run_record(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "manifest.json"
            record = RunRecord("solve", {"grid": {"m_zeta": 200}})
            record.add(residual=np.float64(0.25)).add_output("surface", Path(directory) / "surface.csv")
            record.save(path)
            saved = read_json(path)
        self.assertEqual(saved["command"], "solve")
        self.assertEqual(saved["config"]["grid"]["m_zeta"], 200)
        self.assertEqual(saved["results"]["residual"], 0.25)
        self.assertEqual(saved["outputs"], {"surface": "surface.csv"})
        self.assertIn("format_version", saved)

    def test_invalid_json_reports_line(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "broken.json"
            path.write_text('{\n  "a": 1,\n  "b": \n}\n')
            with self.assertRaises(DataError) as context:
                read_json(path)
            self.assertIn("line", str(context.exception))
            with self.assertRaises(DataError):
                read_json(Path(directory) / "missing.json")

    def test_write_json_creates_directories(self):
        with tempfile.TemporaryDirectory() as directory:
            path = write_json(Path(directory) / "a" / "b.json", {"x": np.int64(3)})
            self.assertEqual(json.loads(path.read_text()), {"x": 3})


class TableTest(unittest.TestCase):
    def test_written_surface_keeps_precision(self):
        frame = build_frame(
            SurfaceColumns,
            {"t_days": [20.0, 0.0], "S": [100.0, 100.0], "mean": [0.0, 1.0 / 3.0], "variance": [0.0, 2e-7]},
        )
        with tempfile.TemporaryDirectory() as directory:
            path = write_table(frame, Path(directory) / "surface.csv")
            loaded = read_table(path, SurfaceColumns)
        self.assertAlmostEqual(loaded["mean"].iloc[1], 1.0 / 3.0, delta=1e-12)

    def test_missing_column(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "prices.csv"
            path.write_text("date,spot,price\n2020-01-02,100,5\n")
            with self.assertRaises(DataError) as context:
                read_table(path, PriceInputColumns)
        self.assertIn("line 1", str(context.exception))

    def test_detects_input_kind(self):
        with tempfile.TemporaryDirectory() as directory:
            vols = Path(directory) / "vols.csv"
            vols.write_text("date,implied_vol\n2020-01-02,0.2\n")
            prices = Path(directory) / "prices.csv"
            prices.write_text("date,spot,price,strike,maturity_days,rate\n")
            self.assertIs(detect_market_columns(vols), ImpliedVolInputColumns)
            self.assertIs(detect_market_columns(prices), PriceInputColumns)
            with self.assertRaises(DataError):
                detect_market_columns(Path(directory) / "missing.csv")


class HelpersTest(unittest.TestCase):
    def test_map_ordered_keeps_order(self):
        seen = []
        results = map_ordered(lambda x: x * x, range(10), workers=4, on_result=lambda i, r: seen.append(i))
        self.assertEqual(results, [x * x for x in range(10)])
        self.assertEqual(seen, list(range(10)))

    def test_map_ordered_propagates_errors(self):
        def fail(x):
            if x == 3:
                raise ValueError("three")
            return x

        with self.assertRaises(ValueError):
            map_ordered(fail, range(6), workers=2)

    def test_time_formatting(self):
        self.assertEqual(convert_seconds(3725), "01:02:05")
        self.assertEqual(convert_seconds(90061), "1 day 01:01:01")
        self.assertEqual(remaining_time(10.0, 1, 3), "00:00:20")
        self.assertEqual(remaining_time(10.0, 3, 3), "00:00:00")


if __name__ == "__main__":
    unittest.main()
