"""Distorted Lane-Emden functions by contraction around the spherical solution.

``Theta = theta + eps w`` solves ``Theta = eps g + G(Theta)`` with the centrifugal
source ``g = (1 - zeta^2) r^2 / 4``. The perturbation is iterated as
``w <- (1 - DG(theta))^-1 (g + omega(eps w) / eps)``, starting from ``w = 0``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Iterable, Optional

import numpy as np

from rotstar.config import SolverConfig
from rotstar.exceptions import IndexOutOfTheoryWarning, MaxIterExceeded, NotContracting, OutOfDomain
from rotstar.lane_emden import LaneEmdenProfile, solve_lane_emden
from rotstar.operator_core import (
    THEORY_NU_MIN,
    OperatorContext,
    ResolventFactorization,
    apply_G,
    build_resolvent,
    omega,
    resolvent_apply,
)
from rotstar.potential import eval_potential_at, eval_potential_gradient_at, origin_value
from rotstar.spectral_grid import GridFunction, ModeSet, make_grids, project, sample, sup_norm
from rotstar.utils.helper import positive_power

if TYPE_CHECKING:
    from logging import Logger

__all__ = [
    "DistortedSolution",
    "IterationReport",
    "SolverConfig",
    "SolverContext",
    "eval_Theta",
    "eval_grad_Theta",
    "g_source",
    "perturbation_norm",
    "residual",
    "solve_distorted",
    "sweep",
    "theta_grid",
]

LOGGER = logging.getLogger(__name__)


def g_source(r: np.ndarray | float, zeta: np.ndarray | float) -> np.ndarray | float:
    """Centrifugal source ``(1 - zeta^2) r^2 / 4``."""
    return 0.25 * (1.0 - np.square(zeta)) * np.square(r)


@dataclass(frozen=True, eq=False)
class SolverContext:
    """Profile, grids and operators shared by every ``eps`` of one configuration.

    Attrs:
        config (SolverConfig): The configuration.
        operators (OperatorContext): Operators at ``theta``.
        g (GridFunction): Centrifugal source on the grid.
        cache (dict[str, Any]): Holds the resolvent once factorized.
    """

    config: SolverConfig
    operators: OperatorContext
    g: GridFunction
    cache: dict[str, Any] = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, config: SolverConfig, logger: Optional[Logger] = None) -> SolverContext:
        """Solve the Lane-Emden equation and lay out the grids.

        Args:
            config (SolverConfig): The configuration.
            logger (Optional[Logger]): Logger for progress messages.

        Returns:
            SolverContext: The context; the resolvent is factorized on first use.
        """
        log: Logger = logger or LOGGER
        profile: LaneEmdenProfile = solve_lane_emden(config.nu, tol=config.le_tol, r_max=config.r_max, logger=log)
        radial, angular = make_grids(config, profile.xi1, logger=log)
        return cls(
            config=config,
            operators=OperatorContext.build(profile, radial, angular),
            g=sample(radial, angular, g_source),
        )

    @property
    def profile(self) -> LaneEmdenProfile:
        """The spherical solution."""
        return self.operators.profile

    def resolvent(self, logger: Optional[Logger] = None) -> ResolventFactorization:
        """``(1 - DG(theta))^-1``, factorized once."""
        fact: Optional[ResolventFactorization] = self.cache.get("resolvent")
        if fact is None:
            fact = build_resolvent(self.operators, logger=logger)
            self.cache["resolvent"] = fact
        return fact


@dataclass
class IterationReport:
    """Convergence history of one solve.

    Attrs:
        diffs (list[float]): ``max |w(n+1) - w(n)|`` per iteration.
        ratios (list[float]): Successive ratios of ``diffs``.
        residual (float): ``max |Theta - eps g - G(Theta)|`` at the end.
        iterations (int): Applications of the iteration map.
        converged (bool): Whether the last difference reached ``fp_tol``.
    """

    diffs: list[float] = field(default_factory=list)
    ratios: list[float] = field(default_factory=list)
    residual: float = float("nan")
    iterations: int = 0
    converged: bool = False


@dataclass(frozen=True, eq=False)
class DistortedSolution:
    """A converged distorted Lane-Emden function.

    Attrs:
        nu (float): Polytropic index.
        eps (float): Rotation parameter ``2 Omega^2``.
        profile (LaneEmdenProfile): The spherical solution.
        w (GridFunction): Perturbation, ``Theta = theta + eps w``.
        theta_modes (ModeSet): Modes of ``Theta_+^nu``, the source of the potential.
        report (IterationReport): Convergence history.
        context (SolverContext): Grids and operators the solution lives on.
    """

    nu: float
    eps: float
    profile: LaneEmdenProfile
    w: GridFunction
    theta_modes: ModeSet
    report: IterationReport
    context: SolverContext = field(repr=False)

    @property
    def config(self) -> SolverConfig:
        """Configuration the solution was computed with."""
        return self.context.config


def theta_grid(sol: DistortedSolution) -> GridFunction:
    """``Theta = theta + eps w`` on the grid."""
    return sol.context.operators.theta + sol.eps * sol.w


def perturbation_norm(sol: DistortedSolution) -> float:
    """``max |Theta - theta|`` over the grid."""
    return sol.eps * sup_norm(sol.w)


def _defect(context: SolverContext, eps: float, theta_values: GridFunction) -> float:
    return sup_norm(theta_values - eps * context.g - apply_G(theta_values, context.operators.nu))


def residual(sol: DistortedSolution) -> float:
    """``max |Theta - eps g - G(Theta)|`` over all grid nodes."""
    return _defect(sol.context, sol.eps, theta_grid(sol))


def assemble_solution(
    context: SolverContext, eps: float, w: GridFunction, report: IterationReport
) -> DistortedSolution:
    """Wrap a perturbation into a solution with its potential source modes."""
    theta_values: GridFunction = context.operators.theta + eps * w
    nu: float = context.operators.nu
    return DistortedSolution(
        nu=nu,
        eps=eps,
        profile=context.profile,
        w=w,
        theta_modes=project(theta_values.like(positive_power(theta_values.values, nu))),
        report=report,
        context=context,
    )


def solve_distorted(
    config: SolverConfig,
    eps: float,
    context: Optional[SolverContext] = None,
    logger: Optional[Logger] = None,
) -> DistortedSolution:
    """Iterate ``w <- (1 - DG(theta))^-1 (g + omega(eps w) / eps)`` to a fixed point.

    Args:
        config (SolverConfig): The configuration.
        eps (float): Non-negative rotation parameter.
        context (Optional[SolverContext]): Context built for ``config``; built when omitted.
        logger (Optional[Logger]): Logger for progress and errors.

    Returns:
        DistortedSolution: The converged solution.

    Raises:
        OutOfDomain: For negative ``eps``.
        NotContracting: When the differences grow twice in a row, stop being finite, or
            the iterate leaves the ball ``eps |w| <= max(1, mu1 / xi1)``.
        MaxIterExceeded: When ``max_iter`` iterations do not reach ``fp_tol``.
    """
    log: Logger = logger or LOGGER
    if not eps >= 0.0:
        exc_msg: str = f"eps={eps} is invalid; the rotation parameter must be non-negative."
        log.error(exc_msg)
        raise OutOfDomain(exc_msg)
    if config.nu < THEORY_NU_MIN:
        warn_msg: str = f"nu={config.nu} is below 2; contraction of the iteration is not established there."
        log.warning(warn_msg)
        warnings.warn(warn_msg, IndexOutOfTheoryWarning, stacklevel=2)
    context = context or SolverContext.build(config, logger=log)
    fact: ResolventFactorization = context.resolvent(logger=log)
    ctx: OperatorContext = context.operators
    report = IterationReport()
    w: GridFunction = resolvent_apply(fact, context.g)
    report.iterations = 1

    if eps == 0.0:
        report.diffs.append(0.0)
        report.converged = True
    else:
        radius: float = max(1.0, context.profile.mu1 / context.profile.xi1)
        while True:
            size: float = eps * sup_norm(w)
            if not size <= radius:
                exc_msg = (
                    f"eps={eps}: iterate of size {size:.3g} left the ball of radius {radius:.3g}; "
                    "eps is beyond the contraction range."
                )
                log.error(exc_msg)
                raise NotContracting(exc_msg, report=report)
            updated: GridFunction = resolvent_apply(fact, context.g + omega(ctx, eps * w) / eps)
            diff: float = sup_norm(updated - w)
            report.iterations += 1
            w = updated
            if report.diffs:
                report.ratios.append(diff / report.diffs[-1] if report.diffs[-1] > 0.0 else 0.0)
            report.diffs.append(diff)
            log.debug(f"eps={eps} iteration {report.iterations}: diff={diff:.3e}")
            if not np.isfinite(diff) or (len(report.ratios) >= 2 and min(report.ratios[-2:]) > 1.0):
                exc_msg = f"eps={eps}: the iteration is not contracting (differences {report.diffs[-3:]})."
                log.error(exc_msg)
                raise NotContracting(exc_msg, report=report)
            if diff <= config.fp_tol:
                report.converged = True
                break
            if report.iterations >= config.max_iter:
                exc_msg = f"eps={eps}: no convergence to {config.fp_tol} in {config.max_iter} iterations."
                log.error(exc_msg)
                raise MaxIterExceeded(exc_msg, report=report)

    sol: DistortedSolution = assemble_solution(context, eps, w, report)
    report.residual = residual(sol)
    log.info(
        f"nu={config.nu}, eps={eps}: converged in {report.iterations} iterations, "
        f"residual {report.residual:.3e}"
    )
    return sol


def sweep(
    config: SolverConfig,
    eps_values: Optional[Iterable[float]] = None,
    logger: Optional[Logger] = None,
) -> list[DistortedSolution]:
    """Solve for several ``eps`` on one shared context.

    Args:
        config (SolverConfig): The configuration.
        eps_values (Optional[Iterable[float]]): Values to solve for; ``config.eps_list`` when omitted.
        logger (Optional[Logger]): Logger for progress messages.

    Returns:
        list[DistortedSolution]: One solution per value, in order.
    """
    context: SolverContext = SolverContext.build(config, logger=logger)
    values: list[float] = list(config.eps_list if eps_values is None else eps_values)
    return [solve_distorted(config, eps, context=context, logger=logger) for eps in values]


def eval_Theta(sol: DistortedSolution, r: np.ndarray | float, zeta: np.ndarray | float) -> np.ndarray | float:
    """``eps g + 1 + K Theta_+^nu - (K Theta_+^nu)(0, 0)`` at arbitrary points.

    Args:
        sol (DistortedSolution): The solution.
        r (np.ndarray | float): Non-negative radii, also beyond ``R0``.
        zeta (np.ndarray | float): ``cos`` of the polar angles.

    Returns:
        np.ndarray | float: ``Theta`` values, a float for scalar input.
    """
    potential = eval_potential_at(sol.theta_modes, r, zeta)
    return sol.eps * g_source(r, zeta) + 1.0 - origin_value(sol.theta_modes) + potential


def eval_grad_Theta(sol: DistortedSolution, r: float, zeta: float) -> tuple[float, float]:
    """``(dTheta/dr, dTheta/dzeta)`` from the integral representation.

    Args:
        sol (DistortedSolution): The solution.
        r (float): Positive radius.
        zeta (float): ``cos`` of the polar angle.

    Returns:
        tuple[float, float]: The two partial derivatives.
    """
    d_r, d_zeta = eval_potential_gradient_at(sol.theta_modes, r, zeta)
    return (
        d_r + 0.5 * sol.eps * (1.0 - zeta * zeta) * r,
        d_zeta - 0.5 * sol.eps * zeta * r * r,
    )
