"""Lane-Emden profile, its harmonic extension and scalar diagnostics.

The profile solves ``theta'' + 2 theta'/r + theta_+^nu = 0`` with ``theta(0) = 1``,
``theta'(0) = 0``. Beyond the first zero ``xi1`` it is continued by the harmonic
function ``-mu1 (1/xi1 - 1/r)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq, minimize_scalar

from rotstar.exceptions import InvalidIndex, NoFiniteZero, OutOfDomain

if TYPE_CHECKING:
    from logging import Logger

    from scipy.integrate import OdeSolution

LOGGER = logging.getLogger(__name__)

SEED_SCALE: float = 1e-3
SCAN_POINTS: int = 2001
DEFAULT_R_MAX: float = 100.0

# Published one-decimal values of the supremum of nu theta^(nu-1) r^2 (Kovetz). The entries for
# 2, 2.5, 3 and 5 do not follow from the definition: the computed suprema are 4.6865, 4.3203,
# 4.1098 and 15/4.
KOVETZ_TABLE: dict[float, float] = {1.0: 9.9, 2.0: 1.8, 2.5: 2.3, 3.0: 4.0, 4.0: 3.8, 5.0: 2.8}
KOVETZ_TABLE_TOLERANCE: float = 0.1


def series_theta(nu: float, r: np.ndarray | float) -> tuple[np.ndarray, np.ndarray]:
    """Taylor expansion of ``(theta, dtheta/dr)`` about the centre.

    Args:
        nu (float): Polytropic index.
        r (np.ndarray | float): Radii close to 0.

    Returns:
        tuple[np.ndarray, np.ndarray]: Values and derivatives.
    """
    r = np.asarray(r, dtype=float)
    c6: float = nu * (8.0 * nu - 5.0) / 15120.0
    theta = 1.0 - r**2 / 6.0 + nu * r**4 / 120.0 - c6 * r**6
    dtheta = -r / 3.0 + nu * r**3 / 30.0 - 6.0 * c6 * r**5
    return theta, dtheta


def seed_radius() -> float:
    """Radius at which the series hands over to the integrator."""
    # sqrt(6) is where the two-term series vanishes
    return SEED_SCALE * max(1.0, math.sqrt(6.0))


@dataclass(frozen=True)
class LaneEmdenIntegration:
    """Raw event-terminated integration from the series seed.

    Attrs:
        nu (float): Polytropic index.
        dense (OdeSolution): Dense output of ``(theta, dtheta/dr)`` on ``[r_seed, r_end]``.
        r_seed (float): Seed radius.
        r_end (float): Last radius reached.
        zero (Optional[float]): First zero when the event fired.
        dtheta_zero (Optional[float]): ``dtheta/dr`` at the first zero.
        tol (float): Relative tolerance handed to the integrator.
    """

    nu: float
    dense: OdeSolution
    r_seed: float
    r_end: float
    zero: Optional[float]
    dtheta_zero: Optional[float]
    tol: float

    def state(self, r: np.ndarray | float) -> tuple[np.ndarray, np.ndarray]:
        """``(theta, dtheta/dr)`` on ``[0, r_end]``, series below the seed radius."""
        r = np.asarray(r, dtype=float)
        theta = np.empty_like(r)
        dtheta = np.empty_like(r)
        near: np.ndarray = r < self.r_seed
        if np.any(near):
            theta[near], dtheta[near] = series_theta(self.nu, r[near])
        far: np.ndarray = ~near
        if np.any(far):
            values: np.ndarray = self.dense(np.clip(r[far], self.r_seed, self.r_end))
            theta[far] = values[0]
            dtheta[far] = values[1]
        return theta, dtheta


def integrate_lane_emden(
    nu: float,
    tol: float,
    r_max: float = DEFAULT_R_MAX,
    logger: Optional[Logger] = None,
) -> LaneEmdenIntegration:
    """Integrate the Lane-Emden equation from the series seed up to the first zero or ``r_max``.

    Args:
        nu (float): Polytropic index, at least 1.
        tol (float): Integration tolerance in ``[1e-14, 1e-4]``.
        r_max (float): Probing radius.
        logger (Optional[Logger]): Logger to log error messages to.

    Returns:
        LaneEmdenIntegration: The dense integration.

    Raises:
        InvalidIndex: When ``nu < 1``.
        OutOfDomain: When ``tol`` is outside ``[1e-14, 1e-4]``.
        RuntimeError: When the integrator fails.
    """
    log: Logger = logger or LOGGER
    if not nu >= 1.0:
        exc_msg: str = f"Polytropic index nu={nu} is invalid; nu must be at least 1."
        log.error(exc_msg)
        raise InvalidIndex(exc_msg)
    if not 1e-14 <= tol <= 1e-4:
        exc_msg = f"Tolerance {tol} outside [1e-14, 1e-4]."
        log.error(exc_msg)
        raise OutOfDomain(exc_msg)

    def rhs(r: float, y: np.ndarray) -> list[float]:
        theta_plus: float = max(y[0], 0.0)
        return [y[1], -2.0 * y[1] / r - theta_plus**nu]

    def first_zero(_r: float, y: np.ndarray) -> float:
        return y[0]

    first_zero.terminal = True  # type: ignore[attr-defined]
    first_zero.direction = -1  # type: ignore[attr-defined]

    r_seed: float = seed_radius()
    theta0, dtheta0 = series_theta(nu, r_seed)
    rtol: float = max(tol, 100.0 * float(np.finfo(float).eps))
    sol = solve_ivp(
        fun=rhs,
        t_span=(r_seed, r_max),
        y0=[float(theta0), float(dtheta0)],
        method="DOP853",
        rtol=rtol,
        atol=rtol * 1e-2,
        dense_output=True,
        events=first_zero,
    )
    if not sol.success:
        exc_msg = f"Lane-Emden integration failed for nu={nu}: {sol.message}"
        log.error(exc_msg)
        raise RuntimeError(exc_msg)
    zero: Optional[float] = None
    dtheta_zero: Optional[float] = None
    if sol.t_events[0].size:
        zero = float(sol.t_events[0][0])
        dtheta_zero = float(sol.y_events[0][0][1])
    return LaneEmdenIntegration(
        nu=float(nu),
        dense=sol.sol,
        r_seed=r_seed,
        r_end=float(sol.t[-1]),
        zero=zero,
        dtheta_zero=dtheta_zero,
        tol=rtol,
    )


@dataclass(frozen=True)
class LaneEmdenProfile:
    """Lane-Emden function with a finite first zero.

    Attrs:
        nu (float): Polytropic index.
        xi1 (float): First zero of ``theta``.
        mu1 (float): ``-xi1**2 * dtheta/dr(xi1)``.
        interior (LaneEmdenIntegration): Dense representation on ``[0, xi1]``.
        tol (float): Integration tolerance achieved.
    """

    nu: float
    xi1: float
    mu1: float
    interior: LaneEmdenIntegration
    tol: float


def solve_lane_emden(
    nu: float,
    tol: float = 1e-12,
    r_max: float = DEFAULT_R_MAX,
    logger: Optional[Logger] = None,
) -> LaneEmdenProfile:
    """Solve the Lane-Emden equation and locate its first zero.

    Args:
        nu (float): Polytropic index, at least 1.
        tol (float): Integration tolerance in ``[1e-14, 1e-4]``.
        r_max (float): Radius beyond which the zero is considered absent.
        logger (Optional[Logger]): Logger for progress and error messages.

    Returns:
        LaneEmdenProfile: The profile.

    Raises:
        InvalidIndex: When ``nu < 1``.
        NoFiniteZero: When ``theta`` stays positive up to ``r_max``.
    """
    log: Logger = logger or LOGGER
    integration: LaneEmdenIntegration = integrate_lane_emden(nu=nu, tol=tol, r_max=r_max, logger=log)
    if integration.zero is None or integration.dtheta_zero is None:
        exc_msg: str = f"theta(r; nu={nu}) has no zero on [0, r_max={r_max}]."
        log.error(exc_msg)
        raise NoFiniteZero(exc_msg, r_max=r_max, solution=integration)
    xi1: float = integration.zero
    mu1: float = -(xi1**2) * integration.dtheta_zero
    log.info(f"Lane-Emden nu={nu}: xi1={xi1:.12g}, mu1={mu1:.12g}")
    return LaneEmdenProfile(nu=float(nu), xi1=xi1, mu1=mu1, interior=integration, tol=integration.tol)


def _split(profile: LaneEmdenProfile, r: np.ndarray | float) -> tuple[np.ndarray, np.ndarray, bool]:
    radii: np.ndarray = np.asarray(r, dtype=float)
    scalar: bool = radii.ndim == 0
    radii = np.atleast_1d(radii)
    if np.any(radii < 0.0):
        exc_msg: str = "Radii must be non-negative."
        LOGGER.error(exc_msg)
        raise OutOfDomain(exc_msg)
    return radii, radii <= profile.xi1, scalar


def _finish(values: np.ndarray, scalar: bool) -> np.ndarray | float:
    return float(values[0]) if scalar else values


def eval_theta(profile: LaneEmdenProfile, r: np.ndarray | float) -> np.ndarray | float:
    """``theta(r)``, harmonically extended beyond ``xi1``.

    Args:
        profile (LaneEmdenProfile): The profile.
        r (np.ndarray | float): Non-negative radii.

    Returns:
        np.ndarray | float: Values, a float for scalar input.
    """
    radii, inner, scalar = _split(profile, r)
    values: np.ndarray = np.empty_like(radii)
    values[inner] = profile.interior.state(radii[inner])[0]
    outer: np.ndarray = radii[~inner]
    values[~inner] = -profile.mu1 * (1.0 / profile.xi1 - 1.0 / outer)
    return _finish(values, scalar)


def eval_dtheta(profile: LaneEmdenProfile, r: np.ndarray | float) -> np.ndarray | float:
    """``dtheta/dr``; ``-mu1 / r**2`` beyond ``xi1``.

    Args:
        profile (LaneEmdenProfile): The profile.
        r (np.ndarray | float): Non-negative radii.

    Returns:
        np.ndarray | float: Derivatives, a float for scalar input.
    """
    radii, inner, scalar = _split(profile, r)
    values: np.ndarray = np.empty_like(radii)
    values[inner] = profile.interior.state(radii[inner])[1]
    values[~inner] = -profile.mu1 / radii[~inner] ** 2
    return _finish(values, scalar)


def mass_integral(profile: LaneEmdenProfile) -> float:
    """``int_0^xi1 theta^nu r^2 dr`` by adaptive quadrature."""
    nu: float = profile.nu
    value, _ = quad(
        lambda r: max(eval_theta(profile, r), 0.0) ** nu * r * r,
        0.0,
        profile.xi1,
        epsabs=0.0,
        epsrel=1e-12,
        limit=200,
    )
    return float(value)


def _weight_sup(
    nu: float,
    state: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]],
    r_end: float,
) -> tuple[float, float]:
    """Supremum of ``nu theta_+^(nu-1) r^2`` on ``[0, r_end]`` and its maximizer."""

    def weight(r: np.ndarray | float) -> np.ndarray:
        theta: np.ndarray = state(np.atleast_1d(np.asarray(r, dtype=float)))[0]
        return nu * np.power(np.clip(theta, 0.0, None), nu - 1.0) * np.atleast_1d(r) ** 2

    grid: np.ndarray = np.linspace(0.0, r_end, SCAN_POINTS)
    values: np.ndarray = weight(grid)
    k: int = int(np.argmax(values))
    if k == grid.size - 1:
        return float(values[k]), float(grid[k])
    lower, upper = float(grid[max(k - 1, 0)]), float(grid[k + 1])
    r_star: float = float(grid[k])
    try:
        result = minimize_scalar(
            lambda r: -float(weight(r)[0]),
            bracket=(lower, r_star, upper),
            method="golden",
            options={"xtol": 1e-10},
        )
        if lower < result.x < upper:
            r_star = float(result.x)
    except ValueError:
        LOGGER.debug("Golden-section bracket rejected; keeping the scan maximizer.")

    def stationarity(r: float) -> float:
        theta, dtheta = state(np.array([r]))
        return float((nu - 1.0) * r * dtheta[0] + 2.0 * theta[0])

    if nu > 1.0 and stationarity(lower) > 0.0 > stationarity(upper):
        r_star = float(brentq(stationarity, lower, upper, xtol=1e-15 * upper, rtol=4.0 * np.finfo(float).eps))
    return float(weight(r_star)[0]), r_star


def kovetz_sup(profile: LaneEmdenProfile) -> tuple[float, float]:
    """Supremum of ``nu theta^(nu-1) r^2`` over ``[0, xi1]``.

    Args:
        profile (LaneEmdenProfile): The profile.

    Returns:
        tuple[float, float]: ``(m_bar, r_star)``, the supremum and its maximizer.
    """
    return _weight_sup(profile.nu, profile.interior.state, profile.xi1)


def kovetz_sup_unbounded(
    nu: float,
    r_max: float = DEFAULT_R_MAX,
    tol: float = 1e-12,
) -> tuple[float, float]:
    """Supremum of ``nu theta^(nu-1) r^2`` over ``[0, r_max]`` for indices without a finite zero.

    Args:
        nu (float): Polytropic index, typically at least 5.
        r_max (float): End of the scanned interval.
        tol (float): Integration tolerance.

    Returns:
        tuple[float, float]: ``(m_bar, r_star)``.
    """
    integration: LaneEmdenIntegration = integrate_lane_emden(nu=nu, tol=tol, r_max=r_max)
    r_end: float = integration.zero if integration.zero is not None else integration.r_end
    return _weight_sup(nu, integration.state, r_end)


def kovetz_analytic_bound(nu: float) -> float:
    """Closed-form upper bound of ``nu theta^(nu-1) r^2`` at its maximizer.

    ``nu (4 nu - 6) / (nu - 1)**2`` for ``nu >= 3`` and
    ``6 nu (7 nu - 6 - nu**2) / ((nu - 1)(9 nu - 6 - nu**2))`` for ``1 < nu < 3``.

    Args:
        nu (float): Polytropic index, greater than 1.

    Returns:
        float: The bound.

    Raises:
        OutOfDomain: When ``nu <= 1``.
    """
    if nu <= 1.0:
        exc_msg: str = f"The bound is defined for nu > 1, got {nu}."
        LOGGER.error(exc_msg)
        raise OutOfDomain(exc_msg)
    if nu >= 3.0:
        return nu * (4.0 * nu - 6.0) / (nu - 1.0) ** 2
    return 6.0 * nu * (7.0 * nu - 6.0 - nu**2) / ((nu - 1.0) * (9.0 * nu - 6.0 - nu**2))


def milne_ratio(profile: LaneEmdenProfile, r: np.ndarray | float) -> np.ndarray | float:
    """``f(r) = -r theta'(r) / theta(r)`` on ``[0, xi1)``.

    Args:
        profile (LaneEmdenProfile): The profile.
        r (np.ndarray | float): Radii in ``[0, xi1)``.

    Returns:
        np.ndarray | float: The ratio, 0 at the centre.

    Raises:
        OutOfDomain: When a radius reaches ``xi1``.
    """
    radii, _, scalar = _split(profile, r)
    if np.any(radii >= profile.xi1):
        exc_msg: str = f"The ratio is only defined on [0, xi1={profile.xi1:.12g})."
        LOGGER.error(exc_msg)
        raise OutOfDomain(exc_msg)
    theta, dtheta = profile.interior.state(radii)
    return _finish(-radii * dtheta / theta, scalar)


def homology_invariants(profile: LaneEmdenProfile, r: np.ndarray | float) -> tuple[np.ndarray, np.ndarray]:
    """Plane-autonomous variables ``v = -r theta'/theta`` and ``w = r^2 theta^(nu-1)``.

    Along the Lane-Emden orbit they satisfy ``r dv/dr = -v + v^2 + w`` and
    ``r dw/dr = w (2 - (nu - 1) v)``.

    Args:
        profile (LaneEmdenProfile): The profile.
        r (np.ndarray | float): Radii in ``[0, xi1)``.

    Returns:
        tuple[np.ndarray, np.ndarray]: ``(v, w)``.
    """
    radii = np.atleast_1d(np.asarray(r, dtype=float))
    v = np.asarray(milne_ratio(profile, radii))
    theta: np.ndarray = profile.interior.state(radii)[0]
    w = radii**2 * np.power(theta, profile.nu - 1.0)
    return v, w


def q_identity_residual(profile: LaneEmdenProfile, r_star: Optional[float] = None) -> float:
    """Relative gap between both sides of the mass identity at the weight maximizer.

    Left side ``int_0^r1 theta^nu r^2 dr``. Right side
    ``r1^3 theta^nu(r1)/3 + (nu/6)(2/(nu-1))^2 theta(r1) r1 + (nu/6) Q`` with
    ``Q = int_0^r1 (r theta' + theta)/(theta^2 r^2) (int_0^r theta^nu s^2 ds)^2 dr``,
    the inner integral evaluated by its own quadrature.

    Args:
        profile (LaneEmdenProfile): The profile, ``nu > 1``.
        r_star (Optional[float]): Maximizer from :func:`kovetz_sup`; computed when omitted.

    Returns:
        float: ``|left - right| / |left|``.

    Raises:
        OutOfDomain: When ``nu <= 1``.
    """
    nu: float = profile.nu
    if nu <= 1.0:
        exc_msg: str = f"The identity requires nu > 1, got {nu}."
        LOGGER.error(exc_msg)
        raise OutOfDomain(exc_msg)
    r1: float = kovetz_sup(profile)[1] if r_star is None else r_star

    def state(r: float) -> tuple[float, float]:
        theta, dtheta = profile.interior.state(np.array([r]))
        return float(theta[0]), float(dtheta[0])

    def density(s: float) -> float:
        return max(state(s)[0], 0.0) ** nu * s * s

    def inner(r: float) -> float:
        return quad(density, 0.0, r, epsabs=0.0, epsrel=1e-12, limit=200)[0]

    def q_integrand(r: float) -> float:
        if r == 0.0:
            return 0.0
        theta, dtheta = state(r)
        return (r * dtheta + theta) / (theta**2 * r**2) * inner(r) ** 2

    left: float = inner(r1)
    theta1: float = state(r1)[0]
    q_value: float = quad(q_integrand, 0.0, r1, epsabs=0.0, epsrel=1e-11, limit=200)[0]
    right: float = (
        r1**3 * theta1**nu / 3.0 + nu / 6.0 * (2.0 / (nu - 1.0)) ** 2 * theta1 * r1 + nu / 6.0 * q_value
    )
    return abs(left - right) / abs(left)
