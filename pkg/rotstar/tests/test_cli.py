"""Unit tests for the command line front end."""

import csv
import io
import json
import math
import tempfile
import unittest
from pathlib import Path
from typing import Any
from unittest.mock import MagicMock, patch

from rotstar.cli import build_parser, config_from_args, main
from rotstar.config import SolverConfig
from rotstar.exceptions import NotContracting
from rotstar.tests.fixtures import get_fixture_path
from rotstar.validation import CheckResult

SMALL_GRID: list[str] = ["--panels", "6", "--nodes", "12", "--jmax", "8", "--angular-order", "16"]


def _csv_body(text: str) -> list[list[str]]:
    body: str = "\n".join(line for line in text.splitlines() if line and not line.startswith("#"))
    return list(csv.reader(io.StringIO(body)))


class TestParser(unittest.TestCase):
    """Test argument parsing and configuration layering."""

    def test_panels_split(self) -> None:
        """--panels sets the inner panels and half as many outer panels."""
        args = build_parser().parse_args(["solve", "--nu", "3", "--eps", "0.001", "--panels", "5"])
        config: SolverConfig = config_from_args(args)
        self.assertEqual((config.panels_inner, config.panels_outer), (5, 2))
        args = build_parser().parse_args(["solve", "--nu", "3", "--eps", "0.001", "--panels", "1"])
        self.assertEqual(config_from_args(args).panels_outer, 1)

    def test_flags_override_config_file(self) -> None:
        """Explicit flags take precedence over the configuration file."""
        path: Path = get_fixture_path("config", "small.json")
        args = build_parser().parse_args(["validate", "--config", str(path), "--nodes", "10"])
        config: SolverConfig = config_from_args(args)
        self.assertEqual(config.nodes_per_panel, 10)
        self.assertEqual(config.panels_inner, 6)
        self.assertEqual(config.nu, 3.0)

    def test_missing_argument(self) -> None:
        """A missing required flag exits with code 1."""
        with patch("sys.stderr", new_callable=io.StringIO):
            self.assertEqual(main(["solve", "--nu", "3"]), 1)

    def test_invalid_parameter(self) -> None:
        """Invalid parameters exit with code 2."""
        with patch("sys.stderr", new_callable=io.StringIO) as stderr:
            self.assertEqual(main(["lane-emden", "--nu", "0.5"]), 2)
        self.assertIn("error:", stderr.getvalue())

    def test_no_finite_zero(self) -> None:
        """Index 5 exits with code 3."""
        with patch("sys.stderr", new_callable=io.StringIO):
            self.assertEqual(main(["lane-emden", "--nu", "5"]), 3)


class TestCommands(unittest.TestCase):
    """Test the sub-commands end to end."""

    def test_lane_emden(self) -> None:
        """The table starts at theta = 1 and the footer reports xi1 = pi for index 1."""
        with patch("sys.stdout", new_callable=io.StringIO) as stdout:
            self.assertEqual(main(["lane-emden", "--nu", "1", "--samples", "11"]), 0)
        text: str = stdout.getvalue()
        rows: list[list[str]] = _csv_body(text)
        self.assertEqual(rows[0], ["r", "theta", "dtheta"])
        self.assertEqual(len(rows), 12)
        self.assertEqual(float(rows[1][1]), 1.0)
        footer: str = text.splitlines()[-1]
        self.assertTrue(footer.startswith("# xi1="))
        self.assertAlmostEqual(float(footer.split(",")[0].split("=")[1]), math.pi, delta=1e-10)

    def test_kovetz(self) -> None:
        """Indices 1 and 5 report their closed forms."""
        with patch("sys.stdout", new_callable=io.StringIO) as stdout:
            self.assertEqual(main(["kovetz", "--nu-list", "1,5"]), 0)
        rows: list[list[str]] = _csv_body(stdout.getvalue())
        self.assertEqual(rows[0], ["nu", "m_bar", "r1", "below_6", "status", "note"])
        self.assertAlmostEqual(float(rows[1][1]), math.pi**2, delta=1e-8)
        self.assertAlmostEqual(float(rows[2][1]), 3.75, delta=1e-6)
        self.assertEqual(rows[2][3], "true")
        self.assertIn("closed form 15/4", rows[2][5])
        self.assertIn("differs from Kovetz table value 2.8", rows[2][5])
        self.assertEqual(rows[1][5], "")

    def test_kovetz_table_discrepancy(self) -> None:
        """Index 2 is flagged against the published table, index 4 agrees with it."""
        with patch("sys.stdout", new_callable=io.StringIO) as stdout:
            self.assertEqual(main(["kovetz", "--nu-list", "2,4"]), 0)
        rows: list[list[str]] = _csv_body(stdout.getvalue())
        self.assertAlmostEqual(float(rows[1][1]), 4.6865, delta=1e-3)
        self.assertEqual(rows[1][5], "differs from Kovetz table value 1.8")
        self.assertAlmostEqual(float(rows[2][1]), 3.8, delta=0.1)
        self.assertEqual(rows[2][5], "")

    def test_solve_and_surface(self) -> None:
        """A snapshot written by solve feeds the surface table."""
        with tempfile.TemporaryDirectory() as folder:
            snapshot: Path = Path(folder).joinpath("sol.json")
            table: Path = Path(folder).joinpath("surface.csv")
            with patch("sys.stdout", new_callable=io.StringIO) as stdout:
                code: int = main(["solve", "--nu", "3", "--eps", "0.001", *SMALL_GRID, "-o", str(snapshot)])
            self.assertEqual(code, 0)
            summary: dict[str, str] = dict(line.split("=") for line in stdout.getvalue().splitlines())
            self.assertGreater(int(summary["iterations"]), 1)
            self.assertLess(float(summary["residual"]), 1e-8)
            self.assertTrue(snapshot.exists())
            self.assertEqual(main(["surface", str(snapshot), "--zeta-samples", "5", "-o", str(table)]), 0)
            text: str = table.read_text(encoding="utf-8")
        rows: list[list[str]] = _csv_body(text)
        self.assertEqual(rows[0], ["zeta", "xi1", "dxi1_dzeta", "dtheta_dn"])
        self.assertEqual(len(rows), 6)
        self.assertGreater(float(text.splitlines()[-1].split("=")[1]), 0.0)

    def test_surface_missing_snapshot(self) -> None:
        """A missing snapshot is an I/O error."""
        with patch("sys.stderr", new_callable=io.StringIO):
            self.assertEqual(main(["surface", "/nonexistent/snapshot.json"]), 1)

    def test_chandrasekhar(self) -> None:
        """The JSON document carries the fields and constants of the first-order response."""
        with patch("sys.stdout", new_callable=io.StringIO) as stdout:
            self.assertEqual(main(["chandrasekhar", "--nu", "1", "--samples", "5"]), 0)
        document: dict[str, Any] = json.loads(stdout.getvalue())
        self.assertEqual(sorted(document), ["A2", "C2", "h0", "mu1", "nu", "psi2", "r", "sigma1", "xi1"])
        self.assertEqual(len(document["r"]), 5)
        self.assertAlmostEqual(document["psi2"][-1], 45.0 / math.pi**2, delta=1e-8)
        self.assertGreater(document["sigma1"], 0.0)

    @patch("rotstar.cli.run_suite")
    def test_validate_exit_codes(self, mock_run_suite) -> None:
        """validate exits 0 only when every property passes."""
        passing: CheckResult = CheckResult(name="a", passed=True, detail="", seconds=0.0)
        failing: CheckResult = CheckResult(name="b", passed=False, detail="broken", seconds=0.0)
        mock_run_suite.return_value = [passing]
        with patch("sys.stdout", new_callable=io.StringIO) as stdout:
            self.assertEqual(main(["validate", "--quick"]), 0)
        self.assertIn("PASS", stdout.getvalue())
        self.assertTrue(mock_run_suite.call_args.kwargs["quick"])
        mock_run_suite.return_value = [passing, failing]
        with patch("sys.stdout", new_callable=io.StringIO) as stdout:
            self.assertEqual(main(["validate"]), 1)
        self.assertIn("FAIL", stdout.getvalue())

    @patch("rotstar.cli.solve_distorted")
    def test_not_contracting_exit_code(self, mock_solve: MagicMock) -> None:
        """NotContracting maps to exit code 4."""
        mock_solve.side_effect = NotContracting("not contracting")
        with patch("sys.stderr", new_callable=io.StringIO):
            self.assertEqual(main(["solve", "--nu", "3", "--eps", "1.0"]), 4)
