"""Free boundary ``r = Xi1(zeta)`` of a distorted Lane-Emden function."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np
from scipy.optimize import brentq

from rotstar.exceptions import NoBracket, OutOfDomain
from rotstar.fixed_point import DistortedSolution, eval_grad_Theta, eval_Theta
from rotstar.utils.helper import parallel_map

if TYPE_CHECKING:
    from logging import Logger

    from rotstar.lane_emden import LaneEmdenProfile
    from rotstar.perturbation import FirstOrderField

LOGGER = logging.getLogger(__name__)

BRACKET: tuple[float, float] = (0.5, 1.5)
ROOT_XTOL: float = 1e-12
POLE_ZONE: float = 0.9


@dataclass(frozen=True)
class SurfaceProfile:
    """Samples of the surface and of the normal derivative on it.

    Attrs:
        zeta_samples (np.ndarray): Increasing samples of ``[0, 1]``, both ends included.
        xi1_values (np.ndarray): ``Xi1(zeta)``.
        dxi1_dzeta (np.ndarray): ``dXi1/dzeta``.
        sigma (float): Oblateness ``(Xi1(0) - Xi1(1)) / xi1``.
        normal_derivs (np.ndarray): Outward normal derivative of ``Theta``.
        reference_radius (float): ``xi1`` of the spherical profile.
    """

    zeta_samples: np.ndarray
    xi1_values: np.ndarray
    dxi1_dzeta: np.ndarray
    sigma: float
    normal_derivs: np.ndarray
    reference_radius: float


@dataclass(frozen=True)
class PoleSlope:
    """Slope of the meridional section near the pole.

    Attrs:
        proxy (float): ``sqrt(1 - zeta^2) dXi1/dzeta``.
        dz_dvarpi (float): ``dZ/dvarpi`` of the section ``(varpi, Z) = Xi1 (sqrt(1 - zeta^2), zeta)``.
        denominator (float): Denominator of ``dz_dvarpi``, tending to ``-Xi1(1)``.
    """

    proxy: float
    dz_dvarpi: float
    denominator: float


def find_xi1(sol: DistortedSolution, zeta: float) -> float:
    """Zero of ``r -> Theta(r, zeta)`` in ``(0.5 xi1, 1.5 xi1)``.

    Args:
        sol (DistortedSolution): Converged solution.
        zeta (float): ``cos`` of the polar angle, ``|zeta| <= 1``.

    Returns:
        float: ``Xi1(zeta)``.

    Raises:
        OutOfDomain: When ``|zeta| > 1``.
        NoBracket: When ``Theta`` does not change sign on the bracket or is not decreasing at the root.
    """
    if abs(zeta) > 1.0:
        exc_msg: str = f"zeta={zeta} outside [-1, 1]."
        LOGGER.error(exc_msg)
        raise OutOfDomain(exc_msg)
    xi1: float = sol.profile.xi1
    lower: float = BRACKET[0] * xi1
    upper: float = BRACKET[1] * xi1

    def theta(r: float) -> float:
        return float(eval_Theta(sol, r, zeta))

    if theta(lower) * theta(upper) >= 0.0:
        exc_msg = f"No sign change of Theta on [{lower:.6g}, {upper:.6g}] at zeta={zeta}, eps={sol.eps}."
        LOGGER.error(exc_msg)
        raise NoBracket(exc_msg)
    root: float = float(brentq(theta, lower, upper, xtol=ROOT_XTOL * xi1, rtol=4.0 * np.finfo(float).eps))
    if eval_grad_Theta(sol, root, zeta)[0] >= 0.0:
        exc_msg = f"Theta is not decreasing at its zero r={root:.12g}, zeta={zeta}; the root is not unique."
        LOGGER.error(exc_msg)
        raise NoBracket(exc_msg)
    return root


def _slope(sol: DistortedSolution, radius: float, zeta: float) -> float:
    d_r, d_zeta = eval_grad_Theta(sol, radius, zeta)
    return -d_zeta / d_r


def dxi1_dzeta(sol: DistortedSolution, zeta: float) -> float:
    """``dXi1/dzeta = -(dTheta/dr)^-1 dTheta/dzeta`` on the surface.

    Args:
        sol (DistortedSolution): Converged solution.
        zeta (float): ``|zeta| < 1``.

    Returns:
        float: The derivative.
    """
    if abs(zeta) >= 1.0:
        exc_msg: str = f"dXi1/dzeta is evaluated for |zeta| < 1, got {zeta}."
        LOGGER.error(exc_msg)
        raise OutOfDomain(exc_msg)
    return _slope(sol, find_xi1(sol, zeta), zeta)


def _normal(sol: DistortedSolution, radius: float, zeta: float, slope: float) -> float:
    d_r, d_zeta = eval_grad_Theta(sol, radius, zeta)
    metric: float = (1.0 - zeta * zeta) / radius**2
    return (d_r - metric * slope * d_zeta) / math.sqrt(1.0 + metric * slope * slope)


def normal_derivative(sol: DistortedSolution, zeta: float) -> float:
    """Outward normal derivative of ``Theta`` at ``(Xi1(zeta), zeta)``.

    Args:
        sol (DistortedSolution): Converged solution.
        zeta (float): ``|zeta| <= 1``.

    Returns:
        float: ``dTheta/dN``; negative for a physical vacuum boundary.
    """
    radius: float = find_xi1(sol, zeta)
    return _normal(sol, radius, zeta, _slope(sol, radius, zeta))


def _surface_point(sol: DistortedSolution, zeta: float) -> tuple[float, float, float]:
    radius: float = find_xi1(sol, zeta)
    slope: float = _slope(sol, radius, zeta)
    return radius, slope, _normal(sol, radius, zeta, slope)


def surface_profile(sol: DistortedSolution, n_samples: int, logger: Optional[Logger] = None) -> SurfaceProfile:
    """Sample the surface on Chebyshev-Lobatto points of ``[0, 1]``.

    Args:
        sol (DistortedSolution): Converged solution.
        n_samples (int): Number of samples, at least 3.
        logger (Optional[Logger]): Logger for progress and errors.

    Returns:
        SurfaceProfile: Radii, slopes, normal derivatives and oblateness.
    """
    log: Logger = logger or LOGGER
    if n_samples < 3:
        exc_msg: str = f"n_samples={n_samples} is too small; at least 3 samples are needed."
        log.error(exc_msg)
        raise OutOfDomain(exc_msg)
    zetas: np.ndarray = 0.5 * (1.0 - np.cos(np.pi * np.arange(n_samples) / (n_samples - 1)))
    zetas[0], zetas[-1] = 0.0, 1.0
    points: list[tuple[float, float, float]] = parallel_map(lambda z: _surface_point(sol, float(z)), zetas)
    values: np.ndarray = np.array(points)
    xi1: float = sol.profile.xi1
    sigma: float = float((values[0, 0] - values[-1, 0]) / xi1)
    log.info(f"Surface of nu={sol.nu}, eps={sol.eps}: {n_samples} samples, sigma={sigma:.6e}")
    return SurfaceProfile(
        zeta_samples=zetas,
        xi1_values=values[:, 0],
        dxi1_dzeta=values[:, 1],
        sigma=sigma,
        normal_derivs=values[:, 2],
        reference_radius=xi1,
    )


def oblateness(profile: SurfaceProfile) -> float:
    """``(Xi1(0) - Xi1(1)) / xi1`` from the endpoint samples.

    Raises:
        OutOfDomain: When ``zeta = 0`` or ``zeta = 1`` is not sampled.
    """
    equator: np.ndarray = np.flatnonzero(profile.zeta_samples == 0.0)
    pole: np.ndarray = np.flatnonzero(profile.zeta_samples == 1.0)
    if not equator.size or not pole.size:
        exc_msg: str = "Oblateness needs samples at zeta = 0 and zeta = 1."
        LOGGER.error(exc_msg)
        raise OutOfDomain(exc_msg)
    return float((profile.xi1_values[equator[0]] - profile.xi1_values[pole[0]]) / profile.reference_radius)


def pole_slope(sol: DistortedSolution, zeta: float) -> PoleSlope:
    """Slope diagnostics of the meridional section close to the pole.

    Args:
        sol (DistortedSolution): Converged solution.
        zeta (float): ``0.9 <= zeta < 1``.

    Returns:
        PoleSlope: The proxy ``sqrt(1 - zeta^2) dXi1/dzeta`` and ``dZ/dvarpi``.
    """
    if not POLE_ZONE <= zeta < 1.0:
        exc_msg: str = f"zeta={zeta} outside the pole zone [{POLE_ZONE}, 1)."
        LOGGER.error(exc_msg)
        raise OutOfDomain(exc_msg)
    radius: float = find_xi1(sol, zeta)
    slope: float = _slope(sol, radius, zeta)
    sine: float = math.sqrt(1.0 - zeta * zeta)
    denominator: float = (1.0 - zeta * zeta) * slope - zeta * radius
    return PoleSlope(
        proxy=sine * slope,
        dz_dvarpi=(zeta * sine * slope + sine * radius) / denominator,
        denominator=denominator,
    )


def first_order_xi1(profile: LaneEmdenProfile, field: FirstOrderField, zeta: float, eps: float) -> float:
    """``xi1 + (xi1^2 / mu1) h(xi1, zeta) eps``, the surface to first order in ``eps``."""
    xi1: float = profile.xi1
    return xi1 + xi1**2 / profile.mu1 * float(field.value(xi1, zeta)) * eps
