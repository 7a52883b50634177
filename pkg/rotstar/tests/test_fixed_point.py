"""Unit tests for the distorted Lane-Emden solver."""

import unittest
from logging import Logger, getLogger

import numpy as np

from rotstar.config import SolverConfig
from rotstar.exceptions import MaxIterExceeded, NotContracting, OutOfDomain
from rotstar.fixed_point import (
    DistortedSolution,
    SolverContext,
    eval_grad_Theta,
    eval_Theta,
    perturbation_norm,
    residual,
    solve_distorted,
    sweep,
    theta_grid,
)
from rotstar.operator_core import resolvent_apply
from rotstar.spectral_grid import GridFunction, sup_norm
from rotstar.tests.fixtures import small_config


class TestSolveDistorted(unittest.TestCase):
    """Test the contraction iteration."""

    @classmethod
    def setUpClass(cls) -> None:
        cls.logger: Logger = getLogger(name="test")
        cls.config: SolverConfig = small_config()
        cls.context: SolverContext = SolverContext.build(cls.config, logger=cls.logger)
        cls.first_order: GridFunction = resolvent_apply(cls.context.resolvent(), cls.context.g)
        cls.solutions: dict[float, DistortedSolution] = {
            eps: solve_distorted(cls.config, eps, context=cls.context, logger=cls.logger)
            for eps in (0.0, 1e-3, 2e-3, 4e-3)
        }

    def test_eps_zero(self) -> None:
        """eps = 0 returns theta after a single application of the resolvent."""
        sol: DistortedSolution = self.solutions[0.0]
        self.assertEqual(sol.report.iterations, 1)
        self.assertEqual(sol.report.diffs, [0.0])
        self.assertTrue(sol.report.converged)
        self.assertEqual(perturbation_norm(sol), 0.0)
        np.testing.assert_array_equal(sol.w.values, self.first_order.values)

    def test_converges_with_small_ratios(self) -> None:
        """Small eps converge geometrically with a small residual."""
        for eps in (1e-3, 2e-3, 4e-3):
            with self.subTest(eps=eps):
                sol: DistortedSolution = self.solutions[eps]
                self.assertTrue(sol.report.converged)
                self.assertLess(max(sol.report.ratios, default=0.0), 0.5)
                self.assertLessEqual(sol.report.diffs[-1], self.config.fp_tol)
                self.assertLess(sol.report.residual, 1e-8)
                self.assertAlmostEqual(residual(sol), sol.report.residual, delta=1e-15)

    def test_linear_scaling(self) -> None:
        """|Theta - theta| grows linearly in eps."""
        scaled: list[float] = [perturbation_norm(self.solutions[eps]) / eps for eps in (1e-3, 2e-3, 4e-3)]
        self.assertLess((max(scaled) - min(scaled)) / min(scaled), 0.1)

    def test_first_order_law(self) -> None:
        """|w(eps) - w(0)| halves with eps."""
        gaps: list[float] = [sup_norm(self.solutions[eps].w - self.first_order) for eps in (2e-3, 1e-3)]
        self.assertGreater(gaps[1] / gaps[0], 0.4)
        self.assertLess(gaps[1] / gaps[0], 0.6)

    def test_negative_eps(self) -> None:
        """Negative eps is rejected."""
        with self.assertRaises(OutOfDomain):
            solve_distorted(self.config, -1e-3, context=self.context)

    def test_large_eps_not_contracting(self) -> None:
        """A rotation far beyond the contraction range fails with NotContracting."""
        with self.assertRaises(NotContracting) as context:
            solve_distorted(self.config, 10.0, context=self.context)
        self.assertIsNotNone(context.exception.report)

    def test_iteration_budget(self) -> None:
        """A budget of one iteration is exceeded for eps > 0."""
        with self.assertRaises(MaxIterExceeded):
            solve_distorted(self.config.replace(max_iter=1, fp_tol=1e-14), 1e-3, context=self.context)

    def test_sweep_uses_eps_list(self) -> None:
        """The configured eps_list drives a sweep."""
        solutions: list[DistortedSolution] = sweep(self.config.replace(eps_list=(0.0, 1e-3)))
        self.assertEqual([sol.eps for sol in solutions], [0.0, 1e-3])


class TestEvaluation(unittest.TestCase):
    """Test evaluation of Theta away from the grid."""

    @classmethod
    def setUpClass(cls) -> None:
        cls.sol: DistortedSolution = solve_distorted(small_config(), 2e-3)

    def test_centre(self) -> None:
        """Theta is 1 at the centre."""
        self.assertAlmostEqual(eval_Theta(self.sol, 0.0, 0.7), 1.0, delta=1e-14)

    def test_matches_grid(self) -> None:
        """Evaluation at grid nodes reproduces the grid values."""
        grid: GridFunction = theta_grid(self.sol)
        radial = grid.radial
        for i in (3, radial.size // 2, radial.size - 2):
            with self.subTest(i=i):
                value: float = eval_Theta(self.sol, float(radial.nodes[i]), float(grid.angular.zeta_nodes[2]))
                self.assertAlmostEqual(value, float(grid.values[i, 2]), delta=1e-8)

    def test_gradient(self) -> None:
        """The gradient matches central differences."""
        r, zeta, step = 3.0, 0.4, 1e-5
        d_r, d_zeta = eval_grad_Theta(self.sol, r, zeta)
        self.assertAlmostEqual(
            d_r, (eval_Theta(self.sol, r + step, zeta) - eval_Theta(self.sol, r - step, zeta)) / (2 * step), delta=1e-7
        )
        self.assertAlmostEqual(
            d_zeta,
            (eval_Theta(self.sol, r, zeta + step) - eval_Theta(self.sol, r, zeta - step)) / (2 * step),
            delta=1e-7,
        )

    def test_even_in_zeta(self) -> None:
        """Theta is symmetric about the equator."""
        self.assertAlmostEqual(eval_Theta(self.sol, 2.5, 0.3), eval_Theta(self.sol, 2.5, -0.3), delta=1e-14)
