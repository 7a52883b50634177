"""Unit tests for the shared helpers."""

import os
import unittest
from unittest.mock import patch

import numpy as np

from rotstar.utils.helper import (
    THREADS_ENV,
    format_float,
    format_row,
    gauss_rule,
    parallel_map,
    positive_power,
    thread_count,
)


class TestHelpers(unittest.TestCase):
    """Test the numerical and formatting helpers."""

    def test_positive_power(self) -> None:
        """Non-positive entries map to 0, also for exponent 0."""
        values: np.ndarray = np.array([-1.0, 0.0, 4.0])
        np.testing.assert_array_equal(positive_power(values, 0.5), [0.0, 0.0, 2.0])
        np.testing.assert_array_equal(positive_power(values, 0.0), [0.0, 0.0, 1.0])

    @patch.dict(os.environ, {THREADS_ENV: "3"})
    def test_thread_count_from_environment(self) -> None:
        """A positive integer in the environment sets the worker count."""
        self.assertEqual(thread_count(), 3)

    @patch.dict(os.environ, {THREADS_ENV: "many"})
    def test_thread_count_invalid(self) -> None:
        """Unusable values fall back to the default with a warning."""
        with self.assertLogs("rotstar.utils.helper", level="WARNING"):
            count: int = thread_count()
        self.assertGreaterEqual(count, 1)
        self.assertLessEqual(count, 4)

    @patch.dict(os.environ, {THREADS_ENV: "4"})
    def test_parallel_map_keeps_order(self) -> None:
        """Results come back in input order."""
        self.assertEqual(parallel_map(lambda k: k * k, range(10)), [k * k for k in range(10)])

    def test_format_float(self) -> None:
        """Floats keep 17 significant digits."""
        self.assertEqual(float(format_float(0.1)), 0.1)
        self.assertEqual(format_float(1.0), "1")

    def test_format_row(self) -> None:
        """Booleans are lowercase and strings pass through."""
        self.assertEqual(format_row([1.5, True, "ok"]), ["1.5", "true", "ok"])

    def test_gauss_rule(self) -> None:
        """The mapped rule integrates polynomials exactly."""
        nodes, weights = gauss_rule(1.0, 3.0, 4)
        self.assertAlmostEqual(float(weights @ nodes**7), (3.0**8 - 1.0) / 8.0, delta=1e-10)
        self.assertTrue(np.all(np.diff(nodes) > 0.0))
