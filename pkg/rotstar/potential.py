"""Newtonian potential of axisymmetric even densities.

The potential is ``(K rho)(x) = (1 / 4 pi) int rho(x') / |x - x'| dx'``. The primary
path applies it mode by mode with the Green functions
``G_j(r, r') = min(r, r')^j / ((2j + 1) max(r, r')^(j + 1))``; a slow direct path
integrates the azimuthal kernel over the meridional plane and serves as a cross-check.
"""

from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np

from rotstar.exceptions import CoincidentPoints
from rotstar.spectral_grid import (
    GridFunction,
    ModeSet,
    RadialGrid,
    lagrange_matrix,
    legendre_deriv,
    legendre_eval,
)
from rotstar.utils.helper import gauss_rule, parallel_map

if TYPE_CHECKING:
    from logging import Logger

LOGGER = logging.getLogger(__name__)

AGM_TOL: float = 1e-15
AGM_MAX_STEPS: int = 64
COINCIDENT_FLOOR: float = 1e-14
NEAR_SINGULAR_SEPARATION: float = 1e-3
DIRECT_MIN_ORDER: int = 24

_CACHE_LOCK = threading.Lock()


@dataclass(frozen=True)
class KernelEval:
    """Value of the azimuthal kernel.

    Attrs:
        value (float): ``int_0^2pi dbeta / |x - x'|``.
        near_singular (bool): True when the points are closer than
            ``NEAR_SINGULAR_SEPARATION`` relative to their scale.
    """

    value: float
    near_singular: bool


def _separation(
    r: np.ndarray | float, zeta: np.ndarray | float, rp: np.ndarray | float, zetap: np.ndarray | float
) -> tuple[np.ndarray, np.ndarray]:
    """``(a - b, a + b)`` written as sums of squares."""
    phi: np.ndarray = np.arccos(np.clip(zeta, -1.0, 1.0))
    phip: np.ndarray = np.arccos(np.clip(zetap, -1.0, 1.0))
    radial: np.ndarray = (np.asarray(r) - np.asarray(rp)) ** 2
    cross: np.ndarray = 4.0 * np.asarray(r) * np.asarray(rp)
    gap: np.ndarray = radial + cross * np.sin(0.5 * (phi - phip)) ** 2
    total: np.ndarray = radial + cross * np.sin(0.5 * (phi + phip)) ** 2
    return np.asarray(gap, dtype=float), np.asarray(total, dtype=float)


def _agm(g0: np.ndarray) -> np.ndarray:
    """Arithmetic-geometric mean of 1 and ``g0``."""
    a: np.ndarray = np.ones_like(g0)
    g: np.ndarray = g0.copy()
    for _ in range(AGM_MAX_STEPS):
        if np.all(np.abs(a - g) <= AGM_TOL * a):
            break
        a, g = 0.5 * (a + g), np.sqrt(a * g)
    return a


def _kernel_values(
    r: np.ndarray | float, zeta: np.ndarray | float, rp: np.ndarray | float, zetap: np.ndarray | float
) -> tuple[np.ndarray, np.ndarray]:
    """Broadcast kernel values and the coincidence mask; coincident entries are 0."""
    gap, total = _separation(r, zeta, rp, zetap)
    coincident: np.ndarray = gap <= COINCIDENT_FLOOR * total
    safe_total: np.ndarray = np.where(coincident, 1.0, total)
    complement: np.ndarray = np.where(coincident, 1.0, np.sqrt(gap / safe_total))
    # F(m) = pi / (2 AGM(1, sqrt(1 - m))) with 1 - m = (a - b) / (a + b)
    values: np.ndarray = 2.0 * math.pi / (np.sqrt(safe_total) * _agm(complement))
    return np.where(coincident, 0.0, values), coincident


def kernel_eval(r: float, zeta: float, rp: float, zetap: float) -> KernelEval:
    """Azimuthal kernel with its regime flag.

    Args:
        r (float): Radius of the field point.
        zeta (float): ``cos`` of its polar angle.
        rp (float): Radius of the source point.
        zetap (float): ``cos`` of its polar angle.

    Returns:
        KernelEval: Value and near-singular flag.

    Raises:
        CoincidentPoints: When the two points coincide to relative precision.
    """
    values, coincident = _kernel_values(r, zeta, rp, zetap)
    if bool(coincident):
        exc_msg: str = f"Kernel evaluated at coincident points (r={r}, zeta={zeta}), (r'={rp}, zeta'={zetap})."
        LOGGER.error(exc_msg)
        raise CoincidentPoints(exc_msg)
    gap, total = _separation(r, zeta, rp, zetap)
    return KernelEval(
        value=float(values),
        near_singular=bool(gap <= NEAR_SINGULAR_SEPARATION**2 * total),
    )


def azimuthal_kernel(r: float, zeta: float, rp: float, zetap: float) -> float:
    """``int_0^2pi dbeta / |x - x'|`` for two points of the meridional plane.

    Args:
        r (float): Radius of the field point.
        zeta (float): ``cos`` of its polar angle.
        rp (float): Radius of the source point.
        zetap (float): ``cos`` of its polar angle.

    Returns:
        float: The kernel, ``4 / sqrt(a + b) F(2b / (a + b))``.
    """
    return kernel_eval(r, zeta, rp, zetap).value


def mode_green(j: int, r: np.ndarray | float, rp: np.ndarray | float) -> np.ndarray | float:
    """Green function of Legendre mode ``j``: ``min^j / ((2j + 1) max^(j + 1))``."""
    lower: np.ndarray = np.minimum(r, rp)
    upper: np.ndarray = np.maximum(r, rp)
    return lower**j / ((2 * j + 1) * upper ** (j + 1))


def mode_green_dr(j: int, r: np.ndarray | float, rp: np.ndarray | float) -> np.ndarray | float:
    """``dG_j/dr``, one-sided at ``r' = r``.

    ``-(j + 1) r'^j / ((2j + 1) r^(j + 2))`` for ``r' < r`` and
    ``j r^(j - 1) / ((2j + 1) r'^(j + 1))`` for ``r' > r``.
    """
    r_arr: np.ndarray = np.asarray(r, dtype=float)
    rp_arr: np.ndarray = np.asarray(rp, dtype=float)
    outside: np.ndarray = rp_arr < r_arr
    with np.errstate(divide="ignore", invalid="ignore"):
        below: np.ndarray = -(j + 1) * rp_arr**j / ((2 * j + 1) * r_arr ** (j + 2))
        if j == 0:
            above: np.ndarray = np.zeros(np.broadcast(r_arr, rp_arr).shape)
        else:
            above = j * r_arr ** (j - 1) / ((2 * j + 1) * rp_arr ** (j + 1))
    return np.where(outside, below, above)


@dataclass(frozen=True)
class _SplitRule:
    """Gauss rules on both sides of a target inside its panel, with panel interpolation."""

    panel: int
    nodes: np.ndarray
    weights: np.ndarray
    interp: np.ndarray


def _split_rule(radial: RadialGrid, r: float) -> Optional[_SplitRule]:
    panel: Optional[int] = radial.panel_of(r)
    if panel is None:
        return None
    lower: float = float(radial.panel_breaks[panel])
    upper: float = float(radial.panel_breaks[panel + 1])
    left_x, left_w = gauss_rule(lower, r, radial.nodes_per_panel)
    right_x, right_w = gauss_rule(r, upper, radial.nodes_per_panel)
    nodes: np.ndarray = np.concatenate([left_x, right_x])
    return _SplitRule(
        panel=panel,
        nodes=nodes,
        weights=np.concatenate([left_w, right_w]),
        interp=lagrange_matrix(radial.nodes[radial.panel_slice(panel)], nodes),
    )


class NewtonOperator:
    """Product-integration matrices of the mode-wise potential on a radial grid.

    Row ``i`` of :meth:`matrix` maps the samples of a density mode to
    ``int_0^R0 G_j(r_i, r') rho_j(r') r'^2 dr'``. The panel holding ``r_i`` is integrated
    on two sub-rules split at ``r_i`` with the density interpolated from its panel nodes.
    """

    def __init__(self, radial: RadialGrid) -> None:
        """Precompute the split rules of every grid node."""
        self.radial = radial
        self._weights: np.ndarray = radial.weights * radial.nodes**2
        self._splits: list[Optional[_SplitRule]] = [_split_rule(radial, float(r)) for r in radial.nodes]
        self._matrices: dict[int, np.ndarray] = {}
        self._derivative_matrices: dict[int, np.ndarray] = {}

    def _rows(self, j: int, radii: np.ndarray, splits: list[Optional[_SplitRule]], derivative: bool) -> np.ndarray:
        green = mode_green_dr if derivative else mode_green
        result: np.ndarray = np.asarray(green(j, radii[:, None], self.radial.nodes[None, :])) * self._weights
        for k, split in enumerate(splits):
            if split is None:
                continue
            local: np.ndarray = split.weights * np.asarray(green(j, radii[k], split.nodes)) * split.nodes**2
            result[k, self.radial.panel_slice(split.panel)] = local @ split.interp
        return result

    def rows(self, j: int, radii: np.ndarray | float) -> np.ndarray:
        """Quadrature rows of mode ``j`` at arbitrary radii, shape ``(len(radii), n)``."""
        targets: np.ndarray = np.atleast_1d(np.asarray(radii, dtype=float))
        return self._rows(j, targets, [_split_rule(self.radial, float(r)) for r in targets], derivative=False)

    def rows_dr(self, j: int, radii: np.ndarray | float) -> np.ndarray:
        """Rows of the radial derivative of the mode-``j`` potential."""
        targets: np.ndarray = np.atleast_1d(np.asarray(radii, dtype=float))
        return self._rows(j, targets, [_split_rule(self.radial, float(r)) for r in targets], derivative=True)

    def matrix(self, j: int) -> np.ndarray:
        """Square matrix of mode ``j`` on the grid nodes, built once."""
        cached: Optional[np.ndarray] = self._matrices.get(j)
        if cached is None:
            cached = self._rows(j, self.radial.nodes, self._splits, derivative=False)
            self._matrices[j] = cached
        return cached

    def matrix_dr(self, j: int) -> np.ndarray:
        """Radial-derivative matrix of mode ``j`` on the grid nodes, built once."""
        cached: Optional[np.ndarray] = self._derivative_matrices.get(j)
        if cached is None:
            cached = self._rows(j, self.radial.nodes, self._splits, derivative=True)
            self._derivative_matrices[j] = cached
        return cached

    def split(self, index: int) -> Optional[_SplitRule]:
        """Split rule of grid node ``index``."""
        return self._splits[index]


def newton_operator(rg: RadialGrid) -> NewtonOperator:
    """The operator of a grid, created on first use and cached on the grid."""
    with _CACHE_LOCK:
        operator: Optional[NewtonOperator] = rg.cache.get("newton")
        if operator is None:
            operator = NewtonOperator(rg)
            rg.cache["newton"] = operator
    return operator


def apply_newton_modes(density: ModeSet, rg: Optional[RadialGrid] = None) -> ModeSet:
    """Mode-wise potential ``(K rho)_j(r_i) = int G_j(r_i, r') rho_j(r') r'^2 dr'``.

    Args:
        density (ModeSet): Density modes on the grid nodes.
        rg (Optional[RadialGrid]): Grid of the samples, ``density.radial`` by default.

    Returns:
        ModeSet: Potential modes on the same grid.
    """
    grid: RadialGrid = rg or density.radial
    operator: NewtonOperator = newton_operator(grid)
    rows: list[np.ndarray] = parallel_map(
        lambda k: operator.matrix(2 * k) @ density.coefficients[k],
        range(density.coefficients.shape[0]),
    )
    return ModeSet(coefficients=np.array(rows), radial=grid, j_max=density.j_max)


def origin_value(density: ModeSet) -> float:
    """``(K rho)(0, 0) = int rho_0(r') r' dr'``."""
    grid: RadialGrid = density.radial
    return float(np.dot(grid.weights * grid.nodes, density.mode(0)))


def eval_potential_at(density: ModeSet, r: np.ndarray | float, zeta: np.ndarray | float) -> np.ndarray | float:
    """``sum_j (K rho)_j(r) P_j(zeta)`` at arbitrary points, including ``r > R0``.

    Args:
        density (ModeSet): Density modes.
        r (np.ndarray | float): Non-negative radii.
        zeta (np.ndarray | float): ``cos`` of the polar angles, broadcast against ``r``.

    Returns:
        np.ndarray | float: Potential values, a float for scalar input.
    """
    radii, zetas = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(zeta, dtype=float))
    operator: NewtonOperator = newton_operator(density.radial)
    flat_r: np.ndarray = radii.ravel()
    flat_z: np.ndarray = zetas.ravel()
    total: np.ndarray = np.zeros(flat_r.size)
    for j, coefficients in density.modes.items():
        total += (operator.rows(j, flat_r) @ coefficients) * legendre_eval(j, flat_z)
    return total.reshape(radii.shape) if radii.ndim else float(total[0])


def eval_potential_gradient_at(density: ModeSet, r: float, zeta: float) -> tuple[float, float]:
    """``(d/dr, d/dzeta)`` of the potential at one point with ``r > 0``.

    Args:
        density (ModeSet): Density modes.
        r (float): Positive radius.
        zeta (float): ``cos`` of the polar angle.

    Returns:
        tuple[float, float]: The two partial derivatives.
    """
    operator: NewtonOperator = newton_operator(density.radial)
    d_r: float = 0.0
    d_zeta: float = 0.0
    for j, coefficients in density.modes.items():
        d_r += float(operator.rows_dr(j, r)[0] @ coefficients) * float(legendre_eval(j, zeta))
        d_zeta += float(operator.rows(j, r)[0] @ coefficients) * float(legendre_deriv(j, zeta))
    return d_r, d_zeta


def apply_newton_direct(density: GridFunction, logger: Optional[Logger] = None) -> GridFunction:
    """Potential by direct quadrature of the azimuthal kernel; a slow validation path.

    The target value ``rho(x)`` is subtracted under the integral and its exact
    contribution ``rho(x) (R0^2 / 2 - r^2 / 6)`` (the potential of the uniform ball of
    radius ``R0``) is added back. The ``zeta'`` interval is split at the target ``zeta``
    and the radial panel holding the target at ``r``; density values at the new
    ``zeta'`` nodes come from its even Legendre interpolant.

    Args:
        density (GridFunction): Bounded density supported in ``r < R0``.
        logger (Optional[Logger]): Logger for progress messages.

    Returns:
        GridFunction: Potential on the grid nodes.
    """
    log: Logger = logger or LOGGER
    rg: RadialGrid = density.radial
    ag = density.angular
    degrees: np.ndarray = np.arange(0, ag.order - 1, 2)
    half_table: np.ndarray = np.array([legendre_eval(int(j), ag.zeta_nodes) for j in degrees])
    coefficients: np.ndarray = (2.0 * degrees + 1.0)[:, None] * ((half_table * ag.zeta_weights) @ density.values.T)
    order: int = max(ag.order, DIRECT_MIN_ORDER)
    operator: NewtonOperator = newton_operator(rg)
    radial_weights: np.ndarray = rg.weights * rg.nodes**2
    ball: np.ndarray = 0.5 * rg.r0**2 - rg.nodes**2 / 6.0
    result: np.ndarray = np.zeros_like(density.values)
    log.debug(f"Direct potential on {rg.size}x{ag.zeta_nodes.size} targets, {2 * order} zeta' nodes each")

    for k, zeta in enumerate(ag.zeta_nodes):
        left_z, left_w = gauss_rule(-1.0, float(zeta), order)
        right_z, right_w = gauss_rule(float(zeta), 1.0, order)
        zeta_src: np.ndarray = np.concatenate([left_z, right_z])
        zeta_w: np.ndarray = np.concatenate([left_w, right_w])
        table: np.ndarray = np.array([legendre_eval(int(j), zeta_src) for j in degrees])
        rho_src: np.ndarray = coefficients.T @ table
        for i, r in enumerate(rg.nodes):
            target: float = float(density.values[i, k])
            split: Optional[_SplitRule] = operator.split(i)
            if split is None:
                radii, weights, rho = rg.nodes, radial_weights, rho_src
            else:
                own: slice = rg.panel_slice(split.panel)
                keep: np.ndarray = np.ones(rg.size, dtype=bool)
                keep[own] = False
                radii = np.concatenate([rg.nodes[keep], split.nodes])
                weights = np.concatenate([radial_weights[keep], split.weights * split.nodes**2])
                rho = np.vstack([rho_src[keep], split.interp @ rho_src[own]])
            kernel, _ = _kernel_values(r, zeta, radii[:, None], zeta_src[None, :])
            integral: float = float(weights @ (kernel * (rho - target)) @ zeta_w)
            result[i, k] = target * ball[i] + integral / (4.0 * math.pi)
    return density.like(result)
