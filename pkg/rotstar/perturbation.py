"""First-order response of a polytrope to slow rotation, built from radial ODEs.

Inside ``[0, xi1]`` the first-order enthalpy is ``h0(r) + A2 psi2(r) P2(zeta)``:
``h0`` solves ``h'' + 2h'/r + nu theta^(nu-1) h = 1`` with ``h0(0) = 0`` and ``psi_j``
is the regular solution of ``y'' + 2y'/r - j(j+1) y / r^2 + nu theta^(nu-1) y = 0``
normalized by ``psi_j ~ r^j``. Outside the star mode 2 continues as
``-r^2/6 + C2 r^-3``; ``A2`` and ``C2`` come from matching value and slope at ``xi1``.

Each solution is integrated for ``z = y / r^j``, which is regular at the centre:
``z'' + 2(j + 1) z' / r + nu theta^(nu-1) z = source``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np
from scipy.integrate import quad, solve_ivp

from rotstar.exceptions import DegenerateMatching, InvalidMode, OutOfDomain
from rotstar.lane_emden import LaneEmdenProfile, seed_radius
from rotstar.spectral_grid import ModeSet, RadialGrid, legendre_eval
from rotstar.utils.helper import positive_power

if TYPE_CHECKING:
    from logging import Logger

    from scipy.integrate import OdeSolution

LOGGER = logging.getLogger(__name__)

ODE_RTOL: float = 1e-12
MATCHING_FLOOR: float = 1e-12


@dataclass(frozen=True)
class RadialSolution:
    """``y(r) = r^j z(r)`` with ``z`` integrated from the series ``s0 + s2 r^2 + s4 r^4``.

    Attrs:
        j (int): Power of the leading factor.
        dense (OdeSolution): Dense ``(z, z')`` on ``[r_seed, r_end]``.
        r_seed (float): Seed radius.
        r_end (float): End of the integration, ``xi1``.
        series (tuple[float, float, float]): ``(s0, s2, s4)``.
    """

    j: int
    dense: OdeSolution
    r_seed: float
    r_end: float
    series: tuple[float, float, float]

    def scaled(self, r: np.ndarray | float) -> tuple[np.ndarray, np.ndarray]:
        """``(z, z')`` on ``[0, r_end]``."""
        radii: np.ndarray = np.atleast_1d(np.asarray(r, dtype=float))
        s0, s2, s4 = self.series
        z: np.ndarray = s0 + s2 * radii**2 + s4 * radii**4
        dz: np.ndarray = 2.0 * s2 * radii + 4.0 * s4 * radii**3
        far: np.ndarray = radii >= self.r_seed
        if np.any(far):
            values: np.ndarray = self.dense(np.clip(radii[far], self.r_seed, self.r_end))
            z[far] = values[0]
            dz[far] = values[1]
        return z, dz

    def value(self, r: np.ndarray | float) -> np.ndarray | float:
        """``y(r)``."""
        radii: np.ndarray = np.asarray(r, dtype=float)
        z, _ = self.scaled(radii)
        result: np.ndarray = np.atleast_1d(radii) ** self.j * z
        return result if radii.ndim else float(result[0])

    def deriv(self, r: np.ndarray | float) -> np.ndarray | float:
        """``dy/dr``."""
        radii: np.ndarray = np.asarray(r, dtype=float)
        flat: np.ndarray = np.atleast_1d(radii)
        z, dz = self.scaled(flat)
        if self.j == 0:
            result: np.ndarray = dz
        else:
            result = self.j * flat ** (self.j - 1) * z + flat**self.j * dz
        return result if radii.ndim else float(result[0])


def _integrate_scaled(
    profile: LaneEmdenProfile,
    j: int,
    series: tuple[float, float, float],
    source: float,
) -> RadialSolution:
    nu: float = profile.nu

    def rhs(r: float, state: np.ndarray) -> list[float]:
        theta: float = float(profile.interior.state(np.array([r]))[0][0])
        weight: float = nu * float(positive_power(theta, nu - 1.0))
        return [state[1], -2.0 * (j + 1) * state[1] / r - weight * state[0] + source]

    r_seed: float = seed_radius()
    s0, s2, s4 = series
    start: list[float] = [s0 + s2 * r_seed**2 + s4 * r_seed**4, 2.0 * s2 * r_seed + 4.0 * s4 * r_seed**3]
    sol = solve_ivp(
        fun=rhs,
        t_span=(r_seed, profile.xi1),
        y0=start,
        method="DOP853",
        rtol=ODE_RTOL,
        atol=ODE_RTOL * 1e-2,
        dense_output=True,
    )
    if not sol.success:
        exc_msg: str = f"Radial integration failed for j={j}, nu={nu}: {sol.message}"
        LOGGER.error(exc_msg)
        raise RuntimeError(exc_msg)
    return RadialSolution(j=j, dense=sol.sol, r_seed=r_seed, r_end=profile.xi1, series=series)


def homogeneous_series(nu: float, j: int) -> tuple[float, float, float]:
    """Series of ``z = psi_j / r^j`` normalized to ``z(0) = 1``."""
    c2: float = -nu / (2.0 * (2 * j + 3))
    c4: float = -nu * (c2 - (nu - 1.0) / 6.0) / (8 * j + 20)
    return 1.0, c2, c4


@dataclass(frozen=True)
class ModeODESolution:
    """Regular solution ``psi_j`` of the mode-``j`` equation on ``[0, xi1]``.

    Attrs:
        j (int): Even Legendre index, at least 2.
        nu (float): Polytropic index.
        xi1 (float): Surface radius.
        radial (RadialSolution): The integrated solution, ``psi_j / r^j -> 1``.
    """

    j: int
    nu: float
    xi1: float
    radial: RadialSolution

    def value(self, r: np.ndarray | float) -> np.ndarray | float:
        """``psi_j(r)``."""
        return self.radial.value(r)

    def deriv(self, r: np.ndarray | float) -> np.ndarray | float:
        """``dpsi_j/dr``."""
        return self.radial.deriv(r)


def solve_Ej(profile: LaneEmdenProfile, j: int) -> ModeODESolution:
    """Integrate the mode-``j`` equation from its regular series at the centre to ``xi1``.

    Args:
        profile (LaneEmdenProfile): The profile.
        j (int): Even Legendre index, at least 2.

    Returns:
        ModeODESolution: ``psi_j`` with leading coefficient 1.

    Raises:
        InvalidMode: For odd ``j`` or ``j < 2``.
    """
    if j < 2 or j % 2:
        exc_msg: str = f"Mode j={j} is not an even index of at least 2."
        LOGGER.error(exc_msg)
        raise InvalidMode(exc_msg)
    radial: RadialSolution = _integrate_scaled(profile, j, homogeneous_series(profile.nu, j), source=0.0)
    return ModeODESolution(j=j, nu=profile.nu, xi1=profile.xi1, radial=radial)


def dj_functional(sol: ModeODESolution) -> float:
    """``(j + 1) psi_j / r + dpsi_j/dr`` at ``r = xi1``; positive when no decaying exterior match exists."""
    return float((sol.j + 1) * sol.value(sol.xi1) / sol.xi1 + sol.deriv(sol.xi1))


@dataclass(frozen=True)
class ZeroModeSolution:
    """``h0 = y0 - y1 / nu`` on ``[0, xi1]``.

    Attrs:
        nu (float): Polytropic index.
        particular (RadialSolution): ``y0`` with ``y0(0) = 1 / nu``, solving the equation with source 1.
        homogeneous (RadialSolution): ``y1`` with ``y1(0) = 1``.
    """

    nu: float
    particular: RadialSolution
    homogeneous: RadialSolution

    def value(self, r: np.ndarray | float) -> np.ndarray | float:
        """``h0(r)``."""
        return self.particular.value(r) - self.homogeneous.value(r) / self.nu

    def deriv(self, r: np.ndarray | float) -> np.ndarray | float:
        """``dh0/dr``."""
        return self.particular.deriv(r) - self.homogeneous.deriv(r) / self.nu


def solve_h0(profile: LaneEmdenProfile) -> ZeroModeSolution:
    """Mode 0 of the first-order enthalpy, vanishing at the centre.

    Args:
        profile (LaneEmdenProfile): The profile.

    Returns:
        ZeroModeSolution: ``h0`` with ``-(r^2 h0')' / r^2 = nu theta^(nu-1) h0 - 1``.
    """
    nu: float = profile.nu
    particular: RadialSolution = _integrate_scaled(
        profile, 0, (1.0 / nu, 0.0, (nu - 1.0) / 120.0), source=1.0
    )
    homogeneous: RadialSolution = _integrate_scaled(profile, 0, homogeneous_series(nu, 0), source=0.0)
    return ZeroModeSolution(nu=nu, particular=particular, homogeneous=homogeneous)


@dataclass(frozen=True)
class MatchingCoefficients:
    """Interior amplitude and exterior multipole of mode 2.

    Attrs:
        a2 (float): ``h2 = a2 psi2`` inside the star.
        c2 (float): ``h2 = -r^2 / 6 + c2 r^-3`` outside.
        value_residual (float): Relative mismatch of the two forms at ``xi1``.
        deriv_residual (float): Relative mismatch of their slopes at ``xi1``.
    """

    a2: float
    c2: float
    value_residual: float
    deriv_residual: float


def _matching(profile: LaneEmdenProfile, psi2: ModeODESolution) -> MatchingCoefficients:
    xi: float = profile.xi1
    value: float = float(psi2.value(xi))
    slope: float = float(psi2.deriv(xi))
    denominator: float = 3.0 * value + xi * slope
    if abs(denominator) < MATCHING_FLOOR:
        exc_msg: str = f"Mode-2 matching is degenerate for nu={profile.nu}: 3 psi2 + r psi2' = {denominator:.3g}."
        LOGGER.error(exc_msg)
        raise DegenerateMatching(exc_msg)
    a2: float = -(5.0 / 6.0) * xi**2 / denominator
    c2: float = xi**3 * (a2 * value + xi**2 / 6.0)
    inner_value: float = a2 * value
    outer_value: float = -(xi**2) / 6.0 + c2 / xi**3
    inner_slope: float = a2 * slope
    outer_slope: float = -xi / 3.0 - 3.0 * c2 / xi**4
    return MatchingCoefficients(
        a2=a2,
        c2=c2,
        value_residual=abs(inner_value - outer_value) / max(abs(inner_value), abs(outer_value)),
        deriv_residual=abs(inner_slope - outer_slope) / max(abs(inner_slope), abs(outer_slope)),
    )


def coeff_A2(profile: LaneEmdenProfile) -> MatchingCoefficients:
    """Match ``A2 psi2`` to ``-r^2 / 6 + C2 r^-3`` in value and slope at ``xi1``.

    Args:
        profile (LaneEmdenProfile): The profile.

    Returns:
        MatchingCoefficients: ``A2 = -(5/6) xi1^2 / (3 psi2 + xi1 psi2')``, ``C2`` and the residuals.

    Raises:
        DegenerateMatching: When ``3 psi2 + xi1 psi2'`` vanishes.
    """
    return _matching(profile, solve_Ej(profile, 2))


@dataclass(frozen=True)
class FirstOrderField:
    """``h(r, zeta) = h0(r) + A2 psi2(r) P2(zeta)`` on ``[0, xi1]``.

    Attrs:
        profile (LaneEmdenProfile): The profile.
        h0 (ZeroModeSolution): Mode 0.
        psi2 (ModeODESolution): Regular mode-2 solution.
        matching (MatchingCoefficients): ``A2``, ``C2``.
    """

    profile: LaneEmdenProfile
    h0: ZeroModeSolution
    psi2: ModeODESolution
    matching: MatchingCoefficients

    @property
    def a2(self) -> float:
        """Amplitude of mode 2."""
        return self.matching.a2

    def value(self, r: np.ndarray | float, zeta: np.ndarray | float) -> np.ndarray | float:
        """Field values for radii in ``[0, xi1]``."""
        radii, zetas = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(zeta, dtype=float))
        if np.any(radii > self.profile.xi1 * (1.0 + 1e-12)):
            exc_msg: str = f"The first-order field is represented on [0, xi1={self.profile.xi1:.12g}] only."
            LOGGER.error(exc_msg)
            raise OutOfDomain(exc_msg)
        flat: np.ndarray = np.minimum(radii.ravel(), self.profile.xi1)
        values: np.ndarray = np.asarray(self.h0.value(flat)) + self.a2 * np.asarray(
            self.psi2.value(flat)
        ) * legendre_eval(2, zetas.ravel())
        return values.reshape(radii.shape) if radii.ndim else float(values[0])

    def mode_set(self, radial: RadialGrid, j_max: int) -> ModeSet:
        """Modes of the field on a grid inside ``[0, xi1]``; modes above 2 are zero.

        Raises:
            OutOfDomain: When a node lies beyond ``xi1``.
        """
        if radial.size and radial.nodes[-1] > self.profile.xi1:
            exc_msg: str = "Grid extends beyond xi1; pass the interior grid."
            LOGGER.error(exc_msg)
            raise OutOfDomain(exc_msg)
        coefficients: np.ndarray = np.zeros((j_max // 2 + 1, radial.size))
        coefficients[0] = self.h0.value(radial.nodes)
        if j_max >= 2:
            coefficients[1] = self.a2 * np.asarray(self.psi2.value(radial.nodes))
        return ModeSet(coefficients=coefficients, radial=radial, j_max=j_max)


def frak_h(profile: LaneEmdenProfile, logger: Optional[Logger] = None) -> FirstOrderField:
    """Assemble the first-order enthalpy from ``h0``, ``psi2`` and ``A2``.

    Args:
        profile (LaneEmdenProfile): The profile.
        logger (Optional[Logger]): Logger for the matching summary.

    Returns:
        FirstOrderField: The field; it vanishes at the centre.
    """
    log: Logger = logger or LOGGER
    psi2: ModeODESolution = solve_Ej(profile, 2)
    matching: MatchingCoefficients = _matching(profile, psi2)
    log.info(f"First-order field nu={profile.nu}: A2={matching.a2:.12g}, C2={matching.c2:.12g}")
    return FirstOrderField(profile=profile, h0=solve_h0(profile), psi2=psi2, matching=matching)


def sigma_first_order(profile: LaneEmdenProfile, field: Optional[FirstOrderField] = None) -> float:
    """Oblateness per unit ``eps``: ``-(3/2) (xi1 / mu1) A2 psi2(xi1)``.

    Args:
        profile (LaneEmdenProfile): The profile.
        field (Optional[FirstOrderField]): Precomputed field; built when omitted.

    Returns:
        float: ``sigma1`` with ``sigma = sigma1 eps + O(eps^2)``.
    """
    field = field or frak_h(profile)
    return -1.5 * (profile.xi1 / profile.mu1) * field.a2 * float(field.psi2.value(profile.xi1))


def energy_identity_residual(profile: LaneEmdenProfile, sol: ModeODESolution) -> float:
    """Relative defect of the integrated mode equation multiplied by ``psi_j r^2``.

    ``int psi'^2 r^2 + j(j+1) int psi^2 - int nu theta^(nu-1) psi^2 r^2 - xi1^2 psi psi'(xi1)``
    vanishes for every solution regular at the centre.

    Args:
        profile (LaneEmdenProfile): The profile ``sol`` was built on.
        sol (ModeODESolution): Mode solution.

    Returns:
        float: The defect divided by the sum of the absolute terms.
    """
    nu: float = profile.nu
    xi: float = profile.xi1
    options: dict[str, float] = {"epsabs": 0.0, "epsrel": 1e-11, "limit": 200}

    def weight(r: float) -> float:
        theta: float = float(profile.interior.state(np.array([r]))[0][0])
        return nu * float(positive_power(theta, nu - 1.0))

    kinetic: float = quad(lambda r: float(sol.deriv(r)) ** 2 * r * r, 0.0, xi, **options)[0]
    centrifugal: float = sol.j * (sol.j + 1) * quad(lambda r: float(sol.value(r)) ** 2, 0.0, xi, **options)[0]
    source: float = quad(lambda r: weight(r) * float(sol.value(r)) ** 2 * r * r, 0.0, xi, **options)[0]
    boundary: float = xi**2 * float(sol.value(xi)) * float(sol.deriv(xi))
    terms: list[float] = [kinetic, centrifugal, source, boundary]
    return abs(kinetic + centrifugal - source - boundary) / sum(abs(term) for term in terms)
