"""Unit tests for the surface of the distorted solution."""

import unittest
from unittest.mock import patch

import numpy as np

from rotstar.exceptions import NoBracket, OutOfDomain
from rotstar.fixed_point import DistortedSolution, SolverContext, eval_Theta, solve_distorted
from rotstar.perturbation import FirstOrderField, frak_h, sigma_first_order
from rotstar.surface import (
    PoleSlope,
    SurfaceProfile,
    dxi1_dzeta,
    find_xi1,
    first_order_xi1,
    normal_derivative,
    oblateness,
    pole_slope,
    surface_profile,
)
from rotstar.tests.fixtures import small_config


class TestSurface(unittest.TestCase):
    """Test the surface of a slowly rotating index-3 polytrope."""

    base_import_path: str = "rotstar.surface"

    @classmethod
    def setUpClass(cls) -> None:
        cls.eps: float = 1e-3
        cls.sol: DistortedSolution = solve_distorted(small_config(), cls.eps)
        cls.profile: SurfaceProfile = surface_profile(cls.sol, 5)

    def test_root_certificate(self) -> None:
        """Theta changes sign across every sampled surface radius."""
        delta: float = 1e-3 * self.sol.profile.xi1
        for zeta, radius in zip(self.profile.zeta_samples, self.profile.xi1_values):
            with self.subTest(zeta=zeta):
                self.assertGreater(eval_Theta(self.sol, radius - delta, zeta), 0.0)
                self.assertLess(eval_Theta(self.sol, radius + delta, zeta), 0.0)

    def test_samples(self) -> None:
        """Chebyshev-Lobatto samples include both ends."""
        np.testing.assert_allclose(self.profile.zeta_samples, [0.0, 0.5 - 0.5 * np.sqrt(0.5), 0.5, 0.5 + 0.5 * np.sqrt(0.5), 1.0])
        self.assertEqual(self.profile.reference_radius, self.sol.profile.xi1)

    def test_oblate(self) -> None:
        """The equator lies outside the pole and sigma matches the endpoint samples."""
        self.assertGreater(self.profile.xi1_values[0], self.profile.xi1_values[-1])
        self.assertGreater(self.profile.sigma, 0.0)
        self.assertAlmostEqual(oblateness(self.profile), self.profile.sigma, delta=1e-15)

    def test_physical_vacuum(self) -> None:
        """The normal derivative is negative and close to its spherical value."""
        spherical: float = -self.sol.profile.mu1 / self.sol.profile.xi1**2
        self.assertTrue(np.all(self.profile.normal_derivs < 0.0))
        np.testing.assert_allclose(self.profile.normal_derivs, spherical, atol=200.0 * self.eps * abs(spherical))
        self.assertAlmostEqual(normal_derivative(self.sol, 0.5), float(self.profile.normal_derivs[2]), delta=1e-12)

    def test_slope_sign_and_symmetry(self) -> None:
        """The radius decreases towards the pole and the slope vanishes at the equator."""
        self.assertAlmostEqual(dxi1_dzeta(self.sol, 0.0), 0.0, delta=1e-10)
        self.assertLess(dxi1_dzeta(self.sol, 0.5), 0.0)
        with self.assertRaises(OutOfDomain):
            dxi1_dzeta(self.sol, 1.0)

    def test_pole_slope_decay(self) -> None:
        """The pole proxy decays towards the axis and the section is flat there."""
        slopes: list[PoleSlope] = [pole_slope(self.sol, zeta) for zeta in (0.9, 0.99, 0.999)]
        proxies: list[float] = [abs(item.proxy) for item in slopes]
        self.assertGreater(proxies[0], proxies[1])
        self.assertGreater(proxies[1], proxies[2])
        self.assertLess(abs(slopes[-1].dz_dvarpi), abs(slopes[0].dz_dvarpi))
        with self.assertRaises(OutOfDomain):
            pole_slope(self.sol, 0.5)

    def test_invalid_arguments(self) -> None:
        """Angles outside [-1, 1] and too few samples are rejected."""
        with self.assertRaises(OutOfDomain):
            find_xi1(self.sol, 1.5)
        with self.assertRaises(OutOfDomain):
            surface_profile(self.sol, 2)
        with self.assertRaises(OutOfDomain):
            oblateness(SurfaceProfile(np.array([0.2, 0.5, 1.0]), np.ones(3), np.zeros(3), 0.0, -np.ones(3), 1.0))

    @patch(f"{base_import_path}.eval_Theta")
    def test_no_bracket(self, mock_eval_theta) -> None:
        """A bracket without sign change raises NoBracket."""
        mock_eval_theta.return_value = 1.0
        with self.assertRaises(NoBracket):
            find_xi1(self.sol, 0.0)


class TestFirstOrderSurface(unittest.TestCase):
    """Test the approach of the surface to its first-order expansion as eps halves."""

    @classmethod
    def setUpClass(cls) -> None:
        config = small_config()
        context: SolverContext = SolverContext.build(config)
        cls.eps_values: tuple[float, float] = (5e-4, 2.5e-4)
        cls.solutions: dict[float, DistortedSolution] = {
            eps: solve_distorted(config, eps, context=context) for eps in cls.eps_values
        }
        cls.field: FirstOrderField = frak_h(context.profile)

    def _radius_gap(self, eps: float, zeta: float) -> float:
        """Distance of the surface radius to its first-order value, relative to the equatorial shift."""
        sol: DistortedSolution = self.solutions[eps]
        xi1: float = sol.profile.xi1
        predicted: float = first_order_xi1(sol.profile, self.field, zeta, eps)
        scale: float = abs(first_order_xi1(sol.profile, self.field, 0.0, eps) - xi1)
        return abs(find_xi1(sol, zeta) - predicted) / scale

    def test_first_order_oblateness(self) -> None:
        """sigma / eps is within 5% of the first-order coefficient and the gap halves with eps."""
        sigma1: float = sigma_first_order(self.solutions[5e-4].profile, self.field)
        gaps: list[float] = []
        for eps in self.eps_values:
            sol: DistortedSolution = self.solutions[eps]
            sigma: float = (find_xi1(sol, 0.0) - find_xi1(sol, 1.0)) / sol.profile.xi1
            self.assertGreater(sigma, 0.0)
            gaps.append(abs(sigma / eps / sigma1 - 1.0))
        self.assertLessEqual(gaps[0], 0.05)
        self.assertTrue(0.35 <= gaps[1] / gaps[0] <= 0.65, msg=f"gaps {gaps}")

    def test_first_order_radius(self) -> None:
        """The surface radius approaches its first-order expansion at a rate O(eps^2)."""
        for zeta in (0.0, 1.0):
            with self.subTest(zeta=zeta):
                coarse: float = self._radius_gap(self.eps_values[0], zeta)
                fine: float = self._radius_gap(self.eps_values[1], zeta)
                self.assertLessEqual(fine, 0.05)
                self.assertLess(fine, 0.65 * coarse)
        self.assertLessEqual(self._radius_gap(self.eps_values[1], 0.5), 0.05)

    def test_normal_derivative_linear_in_eps(self) -> None:
        """The deviation of the normal derivative from its spherical value halves with eps."""
        deviations: list[float] = []
        for eps in self.eps_values:
            sol: DistortedSolution = self.solutions[eps]
            spherical: float = -sol.profile.mu1 / sol.profile.xi1**2
            normals: np.ndarray = np.array([normal_derivative(sol, zeta) for zeta in (0.0, 0.5, 1.0)])
            self.assertTrue(np.all(normals < 0.0))
            deviations.append(float(np.max(np.abs(normals - spherical))) / abs(spherical))
        self.assertLessEqual(deviations[0], 200.0 * self.eps_values[0])
        self.assertTrue(0.4 <= deviations[1] / deviations[0] <= 0.6, msg=f"deviations {deviations}")
