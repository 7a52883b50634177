"""Unit tests for the fixed-point operator and its linearization."""

import unittest
from unittest.mock import patch

import numpy as np

from rotstar.exceptions import IndexOutOfTheoryWarning, SingularMode
from rotstar.lane_emden import LaneEmdenProfile, solve_lane_emden
from rotstar.operator_core import (
    OperatorContext,
    ResolventFactorization,
    apply_DG_theta,
    apply_G,
    build_resolvent,
    discrete_defect,
    omega,
    resolvent_apply,
)
from rotstar.spectral_grid import GridFunction, make_grids, sample, sup_norm
from rotstar.tests.fixtures import small_config


def _build(nu: float) -> OperatorContext:
    profile: LaneEmdenProfile = solve_lane_emden(nu)
    radial, angular = make_grids(small_config(nu=nu), profile.xi1)
    return OperatorContext.build(profile, radial, angular)


class TestOperatorG(unittest.TestCase):
    """Test G, its derivative and the remainder."""

    base_import_path: str = "rotstar.operator_core"

    @classmethod
    def setUpClass(cls) -> None:
        cls.ctx: OperatorContext = _build(3.0)
        xi1: float = cls.ctx.profile.xi1
        cls.h: GridFunction = sample(
            cls.ctx.radial,
            cls.ctx.angular,
            lambda r, zeta: 0.1 * (1.0 - r**2 / xi1**2) * (1.0 + zeta**2) / 2.0,
        )

    def test_theta_is_fixed_point(self) -> None:
        """G(theta) = theta on the grid."""
        self.assertLess(discrete_defect(self.ctx), 1e-6)

    def test_vacuum_maps_to_one(self) -> None:
        """A function without positive part is mapped to the constant 1."""
        negative: GridFunction = self.ctx.theta.like(-np.ones_like(self.ctx.theta.values))
        np.testing.assert_allclose(apply_G(negative, 3.0).values, 1.0, atol=0.0)

    def test_derivative_matches_difference_quotient(self) -> None:
        """DG(theta) h agrees with a central difference of G."""
        tau: float = 1e-4
        quotient: GridFunction = (apply_G(self.ctx.theta + tau * self.h, 3.0) - apply_G(self.ctx.theta - tau * self.h, 3.0)) / (
            2.0 * tau
        )
        self.assertLess(sup_norm(quotient - apply_DG_theta(self.ctx, self.h)), 1e-7)

    def test_remainder_is_quadratic(self) -> None:
        """Doubling the direction multiplies the remainder by about four."""
        small: float = sup_norm(omega(self.ctx, 0.01 * self.h))
        large: float = sup_norm(omega(self.ctx, 0.02 * self.h))
        self.assertGreater(small, 0.0)
        self.assertGreater(large / small, 3.5)
        self.assertLess(large / small, 4.5)

    def test_g_theta_cached(self) -> None:
        """G(theta) is computed once per context."""
        self.assertIs(self.ctx.g_theta(), self.ctx.g_theta())


class TestResolvent(unittest.TestCase):
    """Test the factorized resolvent."""

    base_import_path: str = "rotstar.operator_core"

    @classmethod
    def setUpClass(cls) -> None:
        cls.ctx: OperatorContext = _build(3.0)
        cls.fact: ResolventFactorization = build_resolvent(cls.ctx)
        cls.s: GridFunction = sample(
            cls.ctx.radial, cls.ctx.angular, lambda r, zeta: 0.25 * (1.0 - zeta**2) * r**2
        )

    def test_round_trip(self) -> None:
        """h - DG(theta) h reproduces the right-hand side."""
        h: GridFunction = resolvent_apply(self.fact, self.s)
        self.assertLess(sup_norm(self.s - (h - apply_DG_theta(self.ctx, h))), 1e-9 * max(1.0, sup_norm(h)))

    def test_full_matrix_exterior_columns(self) -> None:
        """Columns of exterior nodes are identity columns."""
        matrix: np.ndarray = self.fact.full_system_matrix(2)
        outside: np.ndarray = ~self.ctx.interior
        np.testing.assert_array_equal(matrix[:, outside], np.eye(self.ctx.radial.size)[:, outside])

    def test_conditions_recorded(self) -> None:
        """Every mode has a finite condition number."""
        self.assertEqual(sorted(self.fact.conditions), self.ctx.angular.modes)
        self.assertTrue(all(np.isfinite(value) for value in self.fact.conditions.values()))

    @patch(f"{base_import_path}.np.linalg.cond")
    def test_singular_mode(self, mock_cond) -> None:
        """An ill-conditioned mode raises SingularMode naming the mode."""
        mock_cond.return_value = 1e13
        with self.assertRaises(SingularMode) as context:
            build_resolvent(self.ctx)
        self.assertIn(context.exception.mode, self.ctx.angular.modes)

    def test_low_index_warning(self) -> None:
        """Indices below 2 factorize with a warning."""
        ctx: OperatorContext = _build(1.5)
        with self.assertWarns(IndexOutOfTheoryWarning):
            build_resolvent(ctx)
