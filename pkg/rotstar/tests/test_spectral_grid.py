"""Unit tests for the spectral grids."""

import unittest

import numpy as np
from scipy.special import eval_legendre

from rotstar.exceptions import ConfigError
from rotstar.spectral_grid import (
    AngularGrid,
    GridFunction,
    ModeSet,
    RadialGrid,
    lagrange_matrix,
    legendre_deriv,
    legendre_eval,
    make_angular_grid,
    make_grids,
    make_radial_grid,
    origin_spread,
    positive_part,
    project,
    sample,
    sup_norm,
    synthesize,
)
from rotstar.tests.fixtures import small_config


class TestLegendre(unittest.TestCase):
    """Test the Legendre helpers."""

    def test_values(self) -> None:
        """The recurrence agrees with scipy."""
        zeta: np.ndarray = np.linspace(-1.0, 1.0, 21)
        for j in range(12):
            with self.subTest(j=j):
                np.testing.assert_allclose(legendre_eval(j, zeta), eval_legendre(j, zeta), atol=1e-14)

    def test_scalar_input(self) -> None:
        """Scalars give floats."""
        self.assertIsInstance(legendre_eval(2, 0.5), float)
        self.assertAlmostEqual(legendre_eval(2, 0.5), -0.125, delta=1e-15)

    def test_derivative_at_ends(self) -> None:
        """P_j'(1) = j (j + 1) / 2."""
        for j in range(8):
            with self.subTest(j=j):
                self.assertAlmostEqual(legendre_deriv(j, 1.0), j * (j + 1) / 2.0, delta=1e-12)

    def test_derivative_interior(self) -> None:
        """The derivative matches a central difference."""
        step: float = 1e-6
        difference: float = (legendre_eval(4, 0.3 + step) - legendre_eval(4, 0.3 - step)) / (2 * step)
        self.assertAlmostEqual(legendre_deriv(4, 0.3), difference, delta=1e-8)

    def test_lagrange_matrix_reproduces_polynomials(self) -> None:
        """Interpolation on n nodes is exact for polynomials of degree n - 1."""
        nodes: np.ndarray = np.polynomial.legendre.leggauss(6)[0]
        targets: np.ndarray = np.array([-0.95, 0.0, 0.42])
        matrix: np.ndarray = lagrange_matrix(nodes, targets)
        np.testing.assert_allclose(matrix @ nodes**5, targets**5, atol=1e-13)
        np.testing.assert_allclose(matrix.sum(axis=1), 1.0, atol=1e-13)


class TestRadialGrid(unittest.TestCase):
    """Test the composite radial rule."""

    @classmethod
    def setUpClass(cls) -> None:
        cls.grid: RadialGrid = make_radial_grid(xi1=3.0, r0=6.0, panels_inner=4, panels_outer=2, nodes_per_panel=8)

    def test_layout(self) -> None:
        """Nodes increase inside (0, R0) and xi1 is a panel break."""
        self.assertEqual(self.grid.size, 48)
        self.assertEqual(self.grid.panel_count, 6)
        self.assertEqual(self.grid.n_interior, 32)
        self.assertIn(3.0, self.grid.panel_breaks)
        self.assertTrue(np.all(np.diff(self.grid.nodes) > 0.0))
        self.assertGreater(self.grid.nodes[0], 0.0)
        self.assertLess(self.grid.nodes[-1], 6.0)

    def test_integrates_polynomials(self) -> None:
        """The rule is exact for r^5 on [0, R0]."""
        self.assertAlmostEqual(float(self.grid.weights @ self.grid.nodes**5), 6.0**6 / 6.0, delta=1e-9)

    def test_panel_of(self) -> None:
        """Breaks and points outside the grid have no panel."""
        self.assertEqual(self.grid.panel_of(0.1), 0)
        self.assertEqual(self.grid.panel_of(3.5), 4)
        self.assertIsNone(self.grid.panel_of(3.0))
        self.assertIsNone(self.grid.panel_of(0.0))
        self.assertIsNone(self.grid.panel_of(7.0))

    def test_interior(self) -> None:
        """The interior grid keeps the panels of [0, xi1]."""
        inner: RadialGrid = self.grid.interior()
        self.assertEqual(inner.size, 32)
        self.assertEqual(inner.r0, 3.0)
        self.assertAlmostEqual(float(inner.weights.sum()), 3.0, delta=1e-13)

    def test_invalid_sizes(self) -> None:
        """Empty panels and an outer radius inside xi1 are rejected."""
        with self.assertRaises(ConfigError):
            make_radial_grid(xi1=3.0, r0=6.0, panels_inner=0, panels_outer=2, nodes_per_panel=8)
        with self.assertRaises(ConfigError):
            make_radial_grid(xi1=3.0, r0=2.0, panels_inner=2, panels_outer=2, nodes_per_panel=8)


class TestAngularGrid(unittest.TestCase):
    """Test the half-range angular rule and the transforms."""

    @classmethod
    def setUpClass(cls) -> None:
        cls.radial: RadialGrid = make_radial_grid(xi1=1.0, r0=2.0, panels_inner=2, panels_outer=1, nodes_per_panel=4)
        cls.angular: AngularGrid = make_angular_grid(order=16, j_max=8)

    def test_layout(self) -> None:
        """Half the nodes are stored together with their Legendre table."""
        self.assertEqual(self.angular.zeta_nodes.size, 8)
        self.assertEqual(self.angular.legendre_table.shape, (5, 8))
        self.assertEqual(self.angular.modes, [0, 2, 4, 6, 8])
        self.assertAlmostEqual(float(self.angular.full_weights.sum()), 2.0, delta=1e-14)
        np.testing.assert_allclose(self.angular.full_nodes, -self.angular.full_nodes[::-1])

    def test_odd_order(self) -> None:
        """Odd orders and odd cutoffs are rejected."""
        with self.assertRaises(ConfigError):
            make_angular_grid(order=15, j_max=8)
        with self.assertRaises(ConfigError):
            make_angular_grid(order=16, j_max=7)

    def test_project_synthesize(self) -> None:
        """Projection recovers the modes of a band-limited even function and synthesis rebuilds it."""
        f: GridFunction = sample(
            self.radial,
            self.angular,
            lambda r, zeta: r + r**2 * np.asarray(legendre_eval(2, zeta)) - 0.5 * np.asarray(legendre_eval(6, zeta)),
        )
        modes: ModeSet = project(f)
        np.testing.assert_allclose(modes.mode(0), self.radial.nodes, atol=1e-13)
        np.testing.assert_allclose(modes.mode(2), self.radial.nodes**2, atol=1e-13)
        np.testing.assert_allclose(modes.mode(4), 0.0, atol=1e-13)
        np.testing.assert_allclose(modes.mode(6), -0.5, atol=1e-13)
        np.testing.assert_allclose(modes.mode(3), 0.0)
        np.testing.assert_allclose(synthesize(modes, self.angular).values, f.values, atol=1e-13)

    def test_arithmetic(self) -> None:
        """Grid functions combine pointwise with each other and with scalars."""
        f: GridFunction = sample(self.radial, self.angular, lambda r, zeta: r - 1.0 + 0.0 * zeta)
        np.testing.assert_allclose((2.0 * f + 1.0).values, 2.0 * f.values + 1.0)
        np.testing.assert_allclose((1.0 - f).values, 1.0 - f.values)
        np.testing.assert_allclose((f - f).values, 0.0)
        np.testing.assert_allclose((-f / 2.0).values, -0.5 * f.values)
        self.assertEqual(sup_norm(positive_part(-f - 5.0)), 0.0)
        self.assertEqual(origin_spread(f), 0.0)
        self.assertEqual(f.full().shape, (self.radial.size, 16))

    def test_make_grids(self) -> None:
        """The configuration fixes R0 = r0_factor * xi1."""
        radial, angular = make_grids(small_config(), 2.5)
        self.assertAlmostEqual(radial.r0, 5.0, delta=1e-14)
        self.assertEqual(radial.size, 9 * 12)
        self.assertEqual(angular.order, 16)
