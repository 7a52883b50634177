"""Product grids in ``(r, zeta)``, Legendre modes and the sup norm of even axisymmetric functions."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Callable, Optional

import numpy as np
from scipy.interpolate import BarycentricInterpolator

from rotstar.exceptions import ConfigError
from rotstar.utils.helper import gauss_rule

if TYPE_CHECKING:
    from logging import Logger

    from rotstar.config import SolverConfig

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Composite Gauss-Legendre rule on ``[0, R0]`` with a panel break at ``xi1``.

    Attrs:
        nodes (np.ndarray): Increasing nodes in ``(0, R0)``.
        weights (np.ndarray): Matching weights.
        r0 (float): Outer radius.
        panel_breaks (np.ndarray): Panel ends, including 0, ``xi1`` and ``R0``.
        nodes_per_panel (int): Gauss order of every panel.
        xi1 (float): Radius of the stellar surface, a panel break.
        cache (dict[str, Any]): Operators derived from this grid, built on first use.
    """

    nodes: np.ndarray
    weights: np.ndarray
    r0: float
    panel_breaks: np.ndarray
    nodes_per_panel: int
    xi1: float
    cache: dict[str, Any] = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        """Number of nodes."""
        return int(self.nodes.size)

    @property
    def panel_count(self) -> int:
        """Number of panels."""
        return int(self.panel_breaks.size - 1)

    @property
    def n_interior(self) -> int:
        """Number of nodes in ``[0, xi1]``."""
        return int(np.count_nonzero(self.nodes < self.xi1))

    def panel_slice(self, panel: int) -> slice:
        """Node indices of a panel."""
        start: int = panel * self.nodes_per_panel
        return slice(start, start + self.nodes_per_panel)

    def panel_of(self, r: float) -> Optional[int]:
        """Panel whose open interior contains ``r``, ``None`` at breaks or outside ``(0, R0)``."""
        if r <= 0.0 or r >= self.r0:
            return None
        panel: int = int(np.searchsorted(self.panel_breaks, r, side="right")) - 1
        if self.panel_breaks[panel] == r:
            return None
        return panel

    def interior(self) -> RadialGrid:
        """The sub-grid made of the panels of ``[0, xi1]``."""
        count: int = self.n_interior
        breaks: np.ndarray = self.panel_breaks[self.panel_breaks <= self.xi1]
        return RadialGrid(
            nodes=self.nodes[:count],
            weights=self.weights[:count],
            r0=self.xi1,
            panel_breaks=breaks,
            nodes_per_panel=self.nodes_per_panel,
            xi1=self.xi1,
        )


@dataclass(frozen=True, eq=False)
class AngularGrid:
    """Even-order Gauss-Legendre rule in ``zeta``, stored on the half ``zeta > 0``.

    Attrs:
        order (int): Number of nodes of the full symmetric rule.
        zeta_nodes (np.ndarray): The positive nodes, increasing.
        zeta_weights (np.ndarray): Their weights; each stands for a ``+-`` pair.
        j_max (int): Even Legendre cutoff.
        legendre_table (np.ndarray): ``P_j(zeta_k)`` for ``j = 0, 2, ..., j_max``.
    """

    order: int
    zeta_nodes: np.ndarray
    zeta_weights: np.ndarray
    j_max: int
    legendre_table: np.ndarray

    @property
    def modes(self) -> list[int]:
        """Even Legendre indices kept."""
        return list(range(0, self.j_max + 1, 2))

    @property
    def full_nodes(self) -> np.ndarray:
        """All nodes of the symmetric rule, increasing."""
        return np.concatenate([-self.zeta_nodes[::-1], self.zeta_nodes])

    @property
    def full_weights(self) -> np.ndarray:
        """Weights of :attr:`full_nodes`."""
        return np.concatenate([self.zeta_weights[::-1], self.zeta_weights])


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Even-in-``zeta`` function sampled on the product grid.

    Attrs:
        values (np.ndarray): Shape ``(radial.size, angular.order // 2)``, positive ``zeta`` only.
        radial (RadialGrid): Radial grid.
        angular (AngularGrid): Angular grid.
    """

    values: np.ndarray
    radial: RadialGrid
    angular: AngularGrid

    def full(self) -> np.ndarray:
        """Values on all angular nodes, mirrored, columns ordered as :attr:`AngularGrid.full_nodes`."""
        return np.concatenate([self.values[:, ::-1], self.values], axis=1)

    def like(self, values: np.ndarray) -> GridFunction:
        """New function on the same grids."""
        return GridFunction(values=values, radial=self.radial, angular=self.angular)

    def __add__(self, other: GridFunction | float) -> GridFunction:
        return self.like(self.values + _raw(other))

    __radd__ = __add__

    def __sub__(self, other: GridFunction | float) -> GridFunction:
        return self.like(self.values - _raw(other))

    def __rsub__(self, other: float) -> GridFunction:
        return self.like(other - self.values)

    def __mul__(self, factor: float) -> GridFunction:
        return self.like(self.values * factor)

    __rmul__ = __mul__

    def __truediv__(self, factor: float) -> GridFunction:
        return self.like(self.values / factor)

    def __neg__(self) -> GridFunction:
        return self.like(-self.values)


def _raw(other: GridFunction | float) -> np.ndarray | float:
    return other.values if isinstance(other, GridFunction) else other


@dataclass(frozen=True, eq=False)
class ModeSet:
    """Legendre coefficients ``h_j(r_i)`` of an even function.

    Attrs:
        coefficients (np.ndarray): Shape ``(j_max // 2 + 1, radial.size)``; row ``k`` is mode ``2k``.
        radial (RadialGrid): Grid of the radial samples.
        j_max (int): Even cutoff.
    """

    coefficients: np.ndarray
    radial: RadialGrid
    j_max: int

    def mode(self, j: int) -> np.ndarray:
        """Radial samples of mode ``j``; zeros for odd or truncated modes."""
        if j % 2 or j > self.j_max:
            return np.zeros(self.radial.size)
        return self.coefficients[j // 2]

    @property
    def modes(self) -> dict[int, np.ndarray]:
        """Mapping from even ``j`` to its radial samples."""
        return {2 * k: row for k, row in enumerate(self.coefficients)}


def legendre_eval(j: int, zeta: np.ndarray | float) -> np.ndarray | float:
    """``P_j(zeta)`` by the three-term recurrence.

    Args:
        j (int): Non-negative degree.
        zeta (np.ndarray | float): Arguments in ``[-1, 1]``.

    Returns:
        np.ndarray | float: Values, a float for scalar input.
    """
    z: np.ndarray = np.asarray(zeta, dtype=float)
    previous: np.ndarray = np.ones_like(z)
    if j == 0:
        return previous if z.ndim else float(previous)
    current: np.ndarray = z.copy()
    for k in range(1, j):
        previous, current = current, ((2 * k + 1) * z * current - k * previous) / (k + 1)
    return current if z.ndim else float(current)


def legendre_deriv(j: int, zeta: np.ndarray | float) -> np.ndarray | float:
    """``dP_j/dzeta`` from ``P'_{k+1} = P'_{k-1} + (2k+1) P_k``, valid at ``zeta = +-1``.

    Args:
        j (int): Non-negative degree.
        zeta (np.ndarray | float): Arguments in ``[-1, 1]``.

    Returns:
        np.ndarray | float: Derivatives, a float for scalar input.
    """
    z: np.ndarray = np.asarray(zeta, dtype=float)
    derivs: list[np.ndarray] = [np.zeros_like(z), np.ones_like(z)]
    for k in range(1, j):
        derivs.append(derivs[k - 1] + (2 * k + 1) * np.asarray(legendre_eval(k, z)))
    result: np.ndarray = derivs[j] if j < len(derivs) else derivs[-1]
    return result if z.ndim else float(result)


def lagrange_matrix(nodes: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Barycentric Lagrange interpolation matrix from ``nodes`` to ``targets``.

    Args:
        nodes (np.ndarray): Distinct interpolation nodes.
        targets (np.ndarray): Evaluation points.

    Returns:
        np.ndarray: Shape ``(targets.size, nodes.size)``.
    """
    basis = BarycentricInterpolator(nodes, np.eye(nodes.size), axis=0)
    return np.atleast_2d(basis(np.asarray(targets, dtype=float)))


def make_radial_grid(xi1: float, r0: float, panels_inner: int, panels_outer: int, nodes_per_panel: int) -> RadialGrid:
    """Composite Gauss rule with uniform panels on ``[0, xi1]`` and ``[xi1, r0]``.

    Args:
        xi1 (float): Inner panel break.
        r0 (float): Outer radius, larger than ``xi1``.
        panels_inner (int): Panels on ``[0, xi1]``.
        panels_outer (int): Panels on ``[xi1, r0]``.
        nodes_per_panel (int): Gauss order per panel.

    Returns:
        RadialGrid: The grid.

    Raises:
        ConfigError: On non-positive sizes or ``r0 <= xi1``.
    """
    if min(panels_inner, panels_outer, nodes_per_panel) < 1 or r0 <= xi1 or xi1 <= 0.0:
        exc_msg: str = (
            f"Invalid radial grid: panels=({panels_inner}, {panels_outer}), "
            f"nodes_per_panel={nodes_per_panel}, xi1={xi1}, R0={r0}."
        )
        LOGGER.error(exc_msg)
        raise ConfigError(exc_msg)
    breaks: np.ndarray = np.concatenate(
        [np.linspace(0.0, xi1, panels_inner + 1), np.linspace(xi1, r0, panels_outer + 1)[1:]]
    )
    nodes: list[np.ndarray] = []
    weights: list[np.ndarray] = []
    for lower, upper in zip(breaks[:-1], breaks[1:]):
        x, w = gauss_rule(lower, upper, nodes_per_panel)
        nodes.append(x)
        weights.append(w)
    return RadialGrid(
        nodes=np.concatenate(nodes),
        weights=np.concatenate(weights),
        r0=float(r0),
        panel_breaks=breaks,
        nodes_per_panel=nodes_per_panel,
        xi1=float(xi1),
    )


def make_angular_grid(order: int, j_max: int) -> AngularGrid:
    """Symmetric Gauss-Legendre rule in ``zeta`` with its Legendre table.

    Args:
        order (int): Even number of nodes.
        j_max (int): Even cutoff.

    Returns:
        AngularGrid: The grid.

    Raises:
        ConfigError: On odd or non-positive sizes.
    """
    if order < 2 or order % 2 or j_max < 0 or j_max % 2:
        exc_msg: str = f"Invalid angular grid: order={order}, j_max={j_max}."
        LOGGER.error(exc_msg)
        raise ConfigError(exc_msg)
    nodes, weights = np.polynomial.legendre.leggauss(order)
    half: int = order // 2
    positive: np.ndarray = nodes[half:]
    table: np.ndarray = np.array([legendre_eval(j, positive) for j in range(0, j_max + 1, 2)])
    return AngularGrid(
        order=order,
        zeta_nodes=positive,
        zeta_weights=weights[half:],
        j_max=j_max,
        legendre_table=table,
    )


def make_grids(config: SolverConfig, xi1: float, logger: Optional[Logger] = None) -> tuple[RadialGrid, AngularGrid]:
    """Radial and angular grids of a configuration.

    Args:
        config (SolverConfig): Grid sizes; ``R0 = r0_factor * xi1``.
        xi1 (float): First zero of the Lane-Emden function.
        logger (Optional[Logger]): Logger for the grid summary.

    Returns:
        tuple[RadialGrid, AngularGrid]: The grids.
    """
    log: Logger = logger or LOGGER
    radial: RadialGrid = make_radial_grid(
        xi1=xi1,
        r0=config.r0_factor * xi1,
        panels_inner=config.panels_inner,
        panels_outer=config.panels_outer,
        nodes_per_panel=config.nodes_per_panel,
    )
    angular: AngularGrid = make_angular_grid(order=config.angular_order, j_max=config.j_max)
    log.debug(f"Grids: {radial.size} radial nodes on [0, {radial.r0:.6g}], {angular.order} angular nodes")
    return radial, angular


def sample(radial: RadialGrid, angular: AngularGrid, func: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> GridFunction:
    """Sample ``func(r, zeta)`` on the product grid.

    Args:
        radial (RadialGrid): Radial grid.
        angular (AngularGrid): Angular grid.
        func (Callable[[np.ndarray, np.ndarray], np.ndarray]): Vectorized function, even in ``zeta``.

    Returns:
        GridFunction: The samples.
    """
    r, zeta = np.meshgrid(radial.nodes, angular.zeta_nodes, indexing="ij")
    values: np.ndarray = np.broadcast_to(np.asarray(func(r, zeta), dtype=float), r.shape).copy()
    return GridFunction(values=values, radial=radial, angular=angular)


def project(f: GridFunction) -> ModeSet:
    """Legendre coefficients ``h_j = (j + 1/2) int f P_j dzeta`` of the even modes.

    Args:
        f (GridFunction): Even function.

    Returns:
        ModeSet: Modes ``0, 2, ..., j_max``.
    """
    ag: AngularGrid = f.angular
    factors: np.ndarray = 2.0 * np.arange(0, ag.j_max + 1, 2) + 1.0
    # the half rule carries each +- pair once, hence (2j+1) instead of (j+1/2)
    coefficients: np.ndarray = factors[:, None] * ((ag.legendre_table * ag.zeta_weights) @ f.values.T)
    return ModeSet(coefficients=coefficients, radial=f.radial, j_max=ag.j_max)


def synthesize(m: ModeSet, ag: AngularGrid) -> GridFunction:
    """``f(r_i, zeta_k) = sum_j h_j(r_i) P_j(zeta_k)``.

    Args:
        m (ModeSet): Modes.
        ag (AngularGrid): Angular grid to synthesize on.

    Returns:
        GridFunction: The function.
    """
    rows: int = min(m.coefficients.shape[0], ag.legendre_table.shape[0])
    values: np.ndarray = m.coefficients[:rows].T @ ag.legendre_table[:rows]
    return GridFunction(values=values, radial=m.radial, angular=ag)


def positive_part(f: GridFunction) -> GridFunction:
    """Pointwise ``max(0, f)``."""
    return f.like(np.maximum(f.values, 0.0))


def sup_norm(f: GridFunction) -> float:
    """``max |f|`` over all nodes."""
    return float(np.max(np.abs(f.values))) if f.values.size else 0.0


def origin_spread(f: GridFunction) -> float:
    """Spread in ``zeta`` at the innermost radial node; small for members of the even function space."""
    return float(np.ptp(f.values[0]))
