"""The nonlinear potential map, its derivative at the Lane-Emden function and the resolvent.

``G(u) = 1 + K u_+^nu - (K u_+^nu)(0, 0)``. Its derivative at ``theta`` acts mode by mode
through the weight ``q = nu theta_+^(nu - 1)``, which vanishes outside ``[0, xi1]``; the
resolvent ``(1 - DG(theta))^-1`` is therefore solved on the interior nodes and continued
outward by one explicit quadrature.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Optional

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from rotstar.exceptions import IndexOutOfTheoryWarning, SingularMode
from rotstar.lane_emden import LaneEmdenProfile, eval_theta
from rotstar.potential import NewtonOperator, apply_newton_modes, newton_operator, origin_value
from rotstar.spectral_grid import (
    AngularGrid,
    GridFunction,
    ModeSet,
    RadialGrid,
    project,
    sample,
    sup_norm,
    synthesize,
)
from rotstar.utils.helper import parallel_map, positive_power

if TYPE_CHECKING:
    from logging import Logger

LOGGER = logging.getLogger(__name__)

CONDITION_LIMIT: float = 1e12
THEORY_NU_MIN: float = 2.0


@dataclass(frozen=True, eq=False)
class OperatorContext:
    """Everything the operators need about ``theta`` on a fixed pair of grids.

    Attrs:
        profile (LaneEmdenProfile): The spherical solution.
        radial (RadialGrid): Radial grid with a break at ``xi1``.
        angular (AngularGrid): Angular grid.
        theta (GridFunction): ``theta`` (harmonically extended) on the grid.
        weight (np.ndarray): ``nu theta_+^(nu - 1)`` at the radial nodes.
        cache (dict[str, Any]): ``G(theta)`` and the origin-corrected matrices, built on use.
    """

    profile: LaneEmdenProfile
    radial: RadialGrid
    angular: AngularGrid
    theta: GridFunction
    weight: np.ndarray
    cache: dict[str, Any] = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, profile: LaneEmdenProfile, radial: RadialGrid, angular: AngularGrid) -> OperatorContext:
        """Sample ``theta`` and its linearization weight on the grids."""
        theta_r: np.ndarray = np.asarray(eval_theta(profile, radial.nodes))
        return cls(
            profile=profile,
            radial=radial,
            angular=angular,
            theta=sample(radial, angular, lambda r, _zeta: np.asarray(eval_theta(profile, r))),
            weight=profile.nu * positive_power(theta_r, profile.nu - 1.0),
        )

    @property
    def nu(self) -> float:
        """Polytropic index."""
        return self.profile.nu

    @property
    def interior(self) -> np.ndarray:
        """Mask of the radial nodes inside ``xi1``."""
        return self.radial.nodes < self.profile.xi1

    @property
    def newton(self) -> NewtonOperator:
        """Product-integration operator of the radial grid."""
        return newton_operator(self.radial)

    def tilde_matrix(self, j: int) -> np.ndarray:
        """Mode-``j`` potential matrix; mode 0 has its value at the origin removed."""
        key: str = f"tilde_{j}"
        matrix: Optional[np.ndarray] = self.cache.get(key)
        if matrix is None:
            matrix = self.newton.matrix(j)
            if j == 0:
                matrix = matrix - np.outer(np.ones(self.radial.size), self.radial.weights * self.radial.nodes)
            self.cache[key] = matrix
        return matrix

    def g_theta(self) -> GridFunction:
        """``G(theta)``, computed once."""
        value: Optional[GridFunction] = self.cache.get("g_theta")
        if value is None:
            value = apply_G(self.theta, self.nu)
            self.cache["g_theta"] = value
        return value


def apply_G(u: GridFunction, nu: float) -> GridFunction:
    """``G(u) = 1 + K u_+^nu - (K u_+^nu)(0, 0)``.

    Args:
        u (GridFunction): Even function with finite values.
        nu (float): Polytropic index.

    Returns:
        GridFunction: ``G(u)``, equal to 1 at the origin.
    """
    density: ModeSet = project(u.like(positive_power(u.values, nu)))
    potential: GridFunction = synthesize(apply_newton_modes(density), u.angular)
    return potential + (1.0 - origin_value(density))


def apply_DG_theta(ctx: OperatorContext, h: GridFunction) -> GridFunction:
    """``DG(theta) h = K(nu theta_+^(nu-1) h) - K(nu theta_+^(nu-1) h)(0, 0)``.

    Args:
        ctx (OperatorContext): Operators at ``theta``.
        h (GridFunction): Even direction.

    Returns:
        GridFunction: The derivative applied to ``h``, 0 at the origin.
    """
    modes: ModeSet = project(h)
    rows: list[np.ndarray] = parallel_map(
        lambda k: ctx.tilde_matrix(2 * k) @ (ctx.weight * modes.coefficients[k]),
        range(modes.coefficients.shape[0]),
    )
    return synthesize(ModeSet(coefficients=np.array(rows), radial=ctx.radial, j_max=modes.j_max), ctx.angular)


def omega(ctx: OperatorContext, h: GridFunction) -> GridFunction:
    """Remainder ``G(theta + h) - G(theta) - DG(theta) h``."""
    return apply_G(ctx.theta + h, ctx.nu) - ctx.g_theta() - apply_DG_theta(ctx, h)


def discrete_defect(ctx: OperatorContext) -> float:
    """``max |G(theta) - theta|`` over the grid nodes."""
    return sup_norm(ctx.g_theta() - ctx.theta)


@dataclass(frozen=True, eq=False)
class ResolventFactorization:
    """LU factors of ``1 - DG(theta)`` per even mode, restricted to the interior nodes.

    Attrs:
        ctx (OperatorContext): Operators the systems were assembled from.
        factors (dict[int, tuple[np.ndarray, np.ndarray]]): ``lu_factor`` output per mode.
        conditions (dict[int, float]): 2-norm condition number per mode.
    """

    ctx: OperatorContext
    factors: dict[int, tuple[np.ndarray, np.ndarray]]
    conditions: dict[int, float]

    @property
    def profile(self) -> LaneEmdenProfile:
        """The profile the factorization linearizes around."""
        return self.ctx.profile

    def full_system_matrix(self, j: int) -> np.ndarray:
        """Matrix of ``1 - DG(theta)`` in mode ``j`` on all radial nodes; exterior columns are identity columns."""
        return np.eye(self.ctx.radial.size) - self.ctx.tilde_matrix(j) * self.ctx.weight[None, :]


def _factorize(ctx: OperatorContext, j: int, log: Logger) -> tuple[tuple[np.ndarray, np.ndarray], float]:
    inside: np.ndarray = ctx.interior
    block: np.ndarray = ctx.tilde_matrix(j)[np.ix_(inside, inside)] * ctx.weight[inside][None, :]
    system: np.ndarray = np.eye(block.shape[0]) - block
    condition: float = float(np.linalg.cond(system))
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        exc_msg: str = (
            f"Mode j={j} of 1 - DG(theta) is numerically singular (condition {condition:.3g}); "
            "refine the radial grid."
        )
        log.error(exc_msg)
        raise SingularMode(exc_msg, mode=j)
    factor: tuple[np.ndarray, np.ndarray] = lu_factor(system, check_finite=True)
    if np.any(np.diag(factor[0]) == 0.0):
        exc_msg = f"Mode j={j} of 1 - DG(theta) has a zero pivot; refine the radial grid."
        log.error(exc_msg)
        raise SingularMode(exc_msg, mode=j)
    return factor, condition


def build_resolvent(ctx: OperatorContext, logger: Optional[Logger] = None) -> ResolventFactorization:
    """Assemble and factorize ``1 - DG(theta)`` for every even mode up to ``j_max``.

    Args:
        ctx (OperatorContext): Operators at ``theta``.
        logger (Optional[Logger]): Logger for progress, warnings and errors.

    Returns:
        ResolventFactorization: Reusable factors.

    Raises:
        SingularMode: When a mode system is numerically singular.
    """
    log: Logger = logger or LOGGER
    if ctx.nu < THEORY_NU_MIN:
        warn_msg: str = f"nu={ctx.nu} is below 2; invertibility of 1 - DG(theta) is not established there."
        log.warning(warn_msg)
        warnings.warn(warn_msg, IndexOutOfTheoryWarning, stacklevel=2)
    modes: list[int] = ctx.angular.modes
    results = parallel_map(lambda j: _factorize(ctx, j, log), modes)
    factors: dict[int, tuple[np.ndarray, np.ndarray]] = {j: result[0] for j, result in zip(modes, results)}
    conditions: dict[int, float] = {j: result[1] for j, result in zip(modes, results)}
    log.info(
        f"Resolvent factorized for nu={ctx.nu}: {int(np.count_nonzero(ctx.interior))} interior nodes, "
        f"max condition {max(conditions.values()):.3g}"
    )
    return ResolventFactorization(ctx=ctx, factors=factors, conditions=conditions)


def resolvent_modes(fact: ResolventFactorization, s: ModeSet) -> ModeSet:
    """Solve ``(1 - DG(theta)) h = s`` mode by mode."""
    ctx: OperatorContext = fact.ctx
    inside: np.ndarray = ctx.interior
    outside: np.ndarray = ~inside

    def solve(k: int) -> np.ndarray:
        j: int = 2 * k
        rhs: np.ndarray = s.coefficients[k]
        solution: np.ndarray = rhs.copy()
        interior: np.ndarray = lu_solve(fact.factors[j], rhs[inside])
        solution[inside] = interior
        coupling: np.ndarray = ctx.tilde_matrix(j)[np.ix_(outside, inside)]
        solution[outside] = rhs[outside] + coupling @ (ctx.weight[inside] * interior)
        return solution

    rows: list[np.ndarray] = parallel_map(solve, range(min(s.coefficients.shape[0], len(fact.factors))))
    return ModeSet(coefficients=np.array(rows), radial=s.radial, j_max=2 * (len(rows) - 1))


def resolvent_apply(fact: ResolventFactorization, s: GridFunction) -> GridFunction:
    """``h = (1 - DG(theta))^-1 s``.

    Args:
        fact (ResolventFactorization): Factors from :func:`build_resolvent`.
        s (GridFunction): Even right-hand side.

    Returns:
        GridFunction: The solution on the grid.
    """
    return synthesize(resolvent_modes(fact, project(s)), fact.ctx.angular)
