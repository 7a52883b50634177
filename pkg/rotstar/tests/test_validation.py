"""Unit tests for the property suite runner."""

import io
import unittest
from unittest.mock import patch

from rotstar.config import SolverConfig
from rotstar.validation import CHECKS, Check, CheckResult, ValidationContext, print_results, run_suite


def _passing(_vc: ValidationContext) -> tuple[bool, str]:
    return True, "fine"


def _raising(_vc: ValidationContext) -> tuple[bool, str]:
    raise ValueError("boom")


class TestValidationSuite(unittest.TestCase):
    """Test the registry, the runner and the report."""

    base_import_path: str = "rotstar.validation"

    def test_registry(self) -> None:
        """At least twenty properties are registered under unique names, one of them slow."""
        names: list[str] = [item.name for item in CHECKS]
        self.assertGreaterEqual(len(names), 20)
        self.assertEqual(len(names), len(set(names)))
        self.assertIn("direct_vs_multipole", [item.name for item in CHECKS if item.slow])

    @patch(f"{base_import_path}.CHECKS", [Check("ok", _passing, False), Check("bad", _raising, False), Check("slow", _raising, True)])
    def test_run_suite(self) -> None:
        """Exceptions count as failures and quick mode skips slow properties."""
        results: list[CheckResult] = run_suite(SolverConfig(nu=3.0), quick=True)
        self.assertEqual([result.name for result in results], ["ok", "bad", "slow"])
        self.assertTrue(results[0].passed)
        self.assertFalse(results[1].passed)
        self.assertIn("ValueError: boom", results[1].detail)
        self.assertTrue(results[2].skipped)
        self.assertTrue(results[2].passed)

    def test_print_results(self) -> None:
        """One line per property and a summary line."""
        stream = io.StringIO()
        print_results(
            [
                CheckResult(name="ok", passed=True, detail="fine", seconds=0.5),
                CheckResult(name="bad", passed=False, detail="broken", seconds=1.0),
                CheckResult(name="slow", passed=True, detail="skipped", seconds=0.0, skipped=True),
            ],
            stream,
        )
        lines: list[str] = stream.getvalue().splitlines()
        self.assertTrue(lines[0].startswith("PASS  ok"))
        self.assertTrue(lines[1].startswith("FAIL  bad"))
        self.assertTrue(lines[2].startswith("SKIP  slow"))
        self.assertEqual(lines[3], "3 properties, 1 failed")

    def test_lane_emden_properties(self) -> None:
        """The Lane-Emden properties hold without building a solver context."""
        vc = ValidationContext(SolverConfig(nu=3.0))
        for item in CHECKS:
            if item.name in ("lane_emden_nu1_closed_form", "mass_identity", "kovetz_reference_values", "homology_orbit"):
                with self.subTest(name=item.name):
                    passed, detail = item.func(vc)
                    self.assertTrue(passed, detail)
