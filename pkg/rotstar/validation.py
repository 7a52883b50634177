"""Property suite run by ``rotstar validate``.

Every property is a function registered with :func:`check`. It receives the shared
:class:`ValidationContext` and returns ``(passed, detail)``; an exception counts as a failure.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, Callable, Optional, TextIO

import numpy as np

from rotstar.config import SolverConfig
from rotstar.exceptions import NoFiniteZero
from rotstar.fixed_point import (
    DistortedSolution,
    SolverContext,
    eval_Theta,
    perturbation_norm,
    residual,
    solve_distorted,
    theta_grid,
)
from rotstar.lane_emden import (
    KOVETZ_TABLE,
    KOVETZ_TABLE_TOLERANCE,
    LaneEmdenProfile,
    homology_invariants,
    kovetz_analytic_bound,
    kovetz_sup,
    kovetz_sup_unbounded,
    mass_integral,
    q_identity_residual,
    solve_lane_emden,
)
from rotstar.operator_core import OperatorContext, apply_DG_theta, discrete_defect, resolvent_apply
from rotstar.perturbation import (
    FirstOrderField,
    dj_functional,
    energy_identity_residual,
    frak_h,
    sigma_first_order,
    solve_Ej,
)
from rotstar.potential import (
    apply_newton_direct,
    apply_newton_modes,
    azimuthal_kernel,
    eval_potential_at,
    mode_green,
)
from rotstar.snapshot import SolutionSnapshot, rebuild_solution
from rotstar.spectral_grid import (
    GridFunction,
    ModeSet,
    legendre_eval,
    make_grids,
    make_radial_grid,
    project,
    sup_norm,
    synthesize,
)
from rotstar.surface import SurfaceProfile, find_xi1, pole_slope, surface_profile
from rotstar.utils.helper import positive_power

if TYPE_CHECKING:
    from logging import Logger

LOGGER = logging.getLogger(__name__)

CheckFunc = Callable[["ValidationContext"], tuple[bool, str]]

SWEEP_EPS: tuple[float, ...] = (4e-3, 2e-3, 1e-3)
SURFACE_EPS: float = 1e-3
FIRST_ORDER_EPS: float = 5e-4
SURFACE_SAMPLES: int = 9
# Suprema of nu theta^(nu-1) r^2 where the published table disagrees with the definition.
COMPUTED_SUPREMA: dict[float, float] = {2.0: 4.6865, 2.5: 4.3203, 3.0: 4.1098}


@dataclass(frozen=True)
class Check:
    """A registered property."""

    name: str
    func: CheckFunc
    slow: bool


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one property.

    Attrs:
        name (str): Property name.
        passed (bool): Whether it holds; skipped properties count as passed.
        detail (str): Measured quantities or the error raised.
        seconds (float): Wall time spent.
        skipped (bool): Whether ``--quick`` skipped it.
    """

    name: str
    passed: bool
    detail: str
    seconds: float
    skipped: bool = False


CHECKS: list[Check] = []


def check(name: str, slow: bool = False) -> Callable[[CheckFunc], CheckFunc]:
    """Register a property under ``name``; ``slow`` properties are skipped by ``--quick``."""

    def register(func: CheckFunc) -> CheckFunc:
        CHECKS.append(Check(name=name, func=func, slow=slow))
        return func

    return register


class ValidationContext:
    """Objects shared between properties, built on first use."""

    def __init__(self, config: SolverConfig, logger: Optional[Logger] = None) -> None:
        """Keep the configuration of the solver properties."""
        self.config = config
        self.logger = logger or LOGGER
        self._solutions: dict[float, DistortedSolution] = {}
        self._profiles: dict[float, LaneEmdenProfile] = {}

    def lane_emden(self, nu: float) -> LaneEmdenProfile:
        """Profile of index ``nu`` with the suite's integration tolerance."""
        if nu not in self._profiles:
            self._profiles[nu] = solve_lane_emden(nu, tol=1e-12, r_max=1000.0)
        return self._profiles[nu]

    @cached_property
    def context(self) -> SolverContext:
        """Solver context of the configuration."""
        return SolverContext.build(self.config, logger=self.logger)

    @cached_property
    def field(self) -> FirstOrderField:
        """First-order field of the configuration's index."""
        return frak_h(self.context.profile)

    @cached_property
    def first_order_grid(self) -> GridFunction:
        """``(1 - DG(theta))^-1 g`` on the grid."""
        return resolvent_apply(self.context.resolvent(logger=self.logger), self.context.g)

    def solution(self, eps: float) -> DistortedSolution:
        """Converged solution for ``eps``, solved once."""
        if eps not in self._solutions:
            self._solutions[eps] = solve_distorted(self.config, eps, context=self.context, logger=self.logger)
        return self._solutions[eps]

    @cached_property
    def surface(self) -> SurfaceProfile:
        """Surface samples at the reference ``eps``."""
        return surface_profile(self.solution(SURFACE_EPS), SURFACE_SAMPLES, logger=self.logger)


@check("lane_emden_nu1_closed_form")
def _lane_emden_nu1(vc: ValidationContext) -> tuple[bool, str]:
    profile: LaneEmdenProfile = vc.lane_emden(1.0)
    radii: np.ndarray = np.linspace(0.0, math.pi, 100)
    theta: np.ndarray = profile.interior.state(radii)[0]
    error: float = float(np.max(np.abs(theta - np.sinc(radii / math.pi))))
    worst: float = max(abs(profile.xi1 - math.pi), abs(profile.mu1 - math.pi), error)
    return worst <= 1e-8, f"max error {worst:.2e}"


@check("lane_emden_nu5_no_finite_zero")
def _lane_emden_nu5(_vc: ValidationContext) -> tuple[bool, str]:
    try:
        solve_lane_emden(5.0, tol=1e-12, r_max=100.0)
    except NoFiniteZero as error:
        radii: np.ndarray = np.linspace(0.0, 10.0, 200)
        theta: np.ndarray = error.solution.state(radii)[0]
        deviation: float = float(np.max(np.abs(theta - (1.0 + radii**2 / 3.0) ** -0.5)))
        return deviation <= 1e-8, f"NoFiniteZero raised, deviation {deviation:.2e}"
    return False, "a zero was reported"


@check("mass_identity")
def _mass_identity(vc: ValidationContext) -> tuple[bool, str]:
    profile: LaneEmdenProfile = vc.lane_emden(3.0)
    gap: float = abs(profile.mu1 - mass_integral(profile)) / profile.mu1
    return gap <= 1e-9, f"relative gap {gap:.2e}"


@check("kovetz_reference_values")
def _kovetz_reference(vc: ValidationContext) -> tuple[bool, str]:
    suprema: dict[float, float] = {nu: kovetz_sup(vc.lane_emden(nu))[0] for nu in (1.0, 2.0, 2.5, 3.0, 4.0)}
    m5, _ = kovetz_sup_unbounded(5.0, r_max=1000.0)
    if abs(suprema[1.0] - math.pi**2) > 1e-6 or abs(m5 - 3.75) > 1e-4:
        return False, f"m(1)={suprema[1.0]:.6f}, m(5)={m5:.6f}"
    for nu in (1.0, 4.0):
        if abs(suprema[nu] - KOVETZ_TABLE[nu]) > KOVETZ_TABLE_TOLERANCE:
            return False, f"m({nu:g})={suprema[nu]:.4f} against table {KOVETZ_TABLE[nu]}"
    # the published entries for 2, 2.5 and 3 conflict with the definition; hold the computed suprema
    for nu, expected in COMPUTED_SUPREMA.items():
        if abs(suprema[nu] - expected) > 1e-3:
            return False, f"m({nu:g})={suprema[nu]:.4f}, expected {expected}"
    return True, ", ".join(f"m({nu:g})={value:.4f}" for nu, value in suprema.items()) + f", m(5)={m5:.6f}"


@check("kovetz_below_six")
def _kovetz_below_six(vc: ValidationContext) -> tuple[bool, str]:
    worst: float = 0.0
    for nu in np.round(np.arange(2.0, 5.0, 0.1), 10):
        m_bar, _ = kovetz_sup(vc.lane_emden(float(nu)))
        if m_bar >= 6.0 or m_bar > kovetz_analytic_bound(float(nu)) * (1.0 + 1e-9):
            return False, f"nu={nu}: m_bar={m_bar:.6f}"
        worst = max(worst, m_bar)
    return True, f"max m_bar {worst:.4f}"


@check("q_identity")
def _q_identity(vc: ValidationContext) -> tuple[bool, str]:
    gaps: list[float] = [q_identity_residual(vc.lane_emden(nu)) for nu in (2.0, 3.0, 4.0)]
    return max(gaps) <= 1e-6, f"max relative residual {max(gaps):.2e}"


@check("homology_orbit")
def _homology_orbit(vc: ValidationContext) -> tuple[bool, str]:
    profile: LaneEmdenProfile = vc.lane_emden(3.0)
    radii: np.ndarray = np.linspace(0.2, 0.8, 7) * profile.xi1
    step: float = 1e-5
    v_plus, w_plus = homology_invariants(profile, radii + step)
    v_minus, w_minus = homology_invariants(profile, radii - step)
    v, w = homology_invariants(profile, radii)
    dv: np.ndarray = radii * (v_plus - v_minus) / (2.0 * step)
    dw: np.ndarray = radii * (w_plus - w_minus) / (2.0 * step)
    gap: float = float(max(np.max(np.abs(dv - (-v + v**2 + w))), np.max(np.abs(dw - w * (2.0 - (profile.nu - 1.0) * v)))))
    return gap <= 1e-6, f"max defect {gap:.2e}"


@check("corollary_sweep")
def _corollary_sweep(vc: ValidationContext) -> tuple[bool, str]:
    smallest: float = math.inf
    for nu in (2.0, 2.5, 3.0, 4.0, 4.5):
        profile: LaneEmdenProfile = vc.lane_emden(nu)
        radii: np.ndarray = np.linspace(0.01, 1.0, 50) * profile.xi1
        for j in (2, 4, 6):
            sol = solve_Ej(profile, j)
            value: float = dj_functional(sol)
            if value <= 0.0 or np.any(np.asarray(sol.deriv(radii)) <= 0.0):
                return False, f"nu={nu}, j={j}: functional {value:.3e}"
            smallest = min(smallest, value)
    return True, f"min functional {smallest:.3e}"


@check("kovetz_implies_positive_functional")
def _kovetz_implication(vc: ValidationContext) -> tuple[bool, str]:
    for nu in (2.0, 3.0, 4.0):
        profile: LaneEmdenProfile = vc.lane_emden(nu)
        m_bar, _ = kovetz_sup(profile)
        for j in (2, 4, 6):
            if m_bar < j * (j + 1) and dj_functional(solve_Ej(profile, j)) <= 0.0:
                return False, f"nu={nu}, j={j}"
    return True, "holds for nu in {2, 3, 4}, j in {2, 4, 6}"


@check("energy_identity")
def _energy_identity(vc: ValidationContext) -> tuple[bool, str]:
    profile: LaneEmdenProfile = vc.lane_emden(3.0)
    gap: float = max(energy_identity_residual(profile, solve_Ej(profile, j)) for j in (2, 4))
    return gap <= 1e-8, f"relative defect {gap:.2e}"


@check("kernel_vs_trapezoid")
def _kernel_trapezoid(_vc: ValidationContext) -> tuple[bool, str]:
    rng = np.random.default_rng(7)
    beta: np.ndarray = np.linspace(0.0, 2.0 * math.pi, 100_000, endpoint=False)
    worst: float = 0.0
    pairs: int = 0
    while pairs < 50:
        r, rp = rng.uniform(0.1, 2.0, size=2)
        zeta, zetap = rng.uniform(-0.95, 0.95, size=2)
        cos_gamma: np.ndarray = math.sqrt((1 - zeta**2) * (1 - zetap**2)) * np.cos(beta) + zeta * zetap
        distance: np.ndarray = np.sqrt(r * r + rp * rp - 2.0 * r * rp * cos_gamma)
        if distance.min() < 1e-2 * max(r, rp):
            continue
        reference: float = float(np.mean(1.0 / distance)) * 2.0 * math.pi
        worst = max(worst, abs(azimuthal_kernel(r, zeta, rp, zetap) - reference) / reference)
        pairs += 1
    return worst <= 1e-10, f"max relative error {worst:.2e}"


@check("multipole_vs_kernel")
def _multipole_kernel(_vc: ValidationContext) -> tuple[bool, str]:
    rng = np.random.default_rng(11)
    worst: float = 0.0
    for _ in range(50):
        r: float = float(rng.uniform(0.2, 1.0))
        rp: float = r * float(rng.uniform(2.0, 4.0)) if rng.uniform() < 0.5 else r / float(rng.uniform(2.0, 4.0))
        zeta, zetap = (float(value) for value in rng.uniform(-1.0, 1.0, size=2))
        total: float = 0.0
        for j in range(41):
            total += (2 * j + 1) * float(mode_green(j, r, rp)) * float(legendre_eval(j, zeta)) * float(legendre_eval(j, zetap))
        kernel: float = azimuthal_kernel(r, zeta, rp, zetap)
        worst = max(worst, abs(2.0 * math.pi * total - kernel) / kernel)
    return worst <= 1e-8, f"max relative error {worst:.2e}"


@check("shell_theorem")
def _shell_theorem(_vc: ValidationContext) -> tuple[bool, str]:
    radius: float = 1.0
    radial = make_radial_grid(xi1=radius, r0=2.0 * radius, panels_inner=4, panels_outer=2, nodes_per_panel=16)
    density = ModeSet(
        coefficients=np.vstack([np.where(radial.nodes < radius, 1.0, 0.0), np.zeros(radial.size)]),
        radial=radial,
        j_max=2,
    )
    potential: np.ndarray = apply_newton_modes(density).mode(0)
    nodes: np.ndarray = radial.nodes
    exact: np.ndarray = np.where(nodes >= radius, radius**3 / (3.0 * nodes), 0.5 * (radius**2 - nodes**2 / 3.0))
    grid_error: float = float(np.max(np.abs(potential - exact)))
    far: float = 20.0 * radius
    decay_error: float = abs(far * float(eval_potential_at(density, far, 0.3)) - radius**3 / 3.0)
    return max(grid_error, decay_error) <= 1e-10, f"grid error {grid_error:.2e}, decay error {decay_error:.2e}"


@check("fixed_point_identity")
def _fixed_point_identity(vc: ValidationContext) -> tuple[bool, str]:
    defect: float = discrete_defect(vc.context.operators)
    return defect <= 5e-5, f"max |G(theta) - theta| = {defect:.2e}"


@check("defect_refinement")
def _defect_refinement(vc: ValidationContext) -> tuple[bool, str]:
    coarse_config: SolverConfig = vc.config.replace(nodes_per_panel=max(2, vc.config.nodes_per_panel // 2))
    coarse: float = discrete_defect(SolverContext.build(coarse_config).operators)
    fine: float = discrete_defect(vc.context.operators)
    return fine <= max(coarse, 1e-11), f"coarse {coarse:.2e}, fine {fine:.2e}"


@check("resolvent_round_trip")
def _resolvent_round_trip(vc: ValidationContext) -> tuple[bool, str]:
    h: GridFunction = vc.first_order_grid
    gap: float = sup_norm(vc.context.g - (h - apply_DG_theta(vc.context.operators, h)))
    return gap <= 1e-9, f"max defect {gap:.2e}"


@check("resolvent_matches_first_order")
def _resolvent_first_order(vc: ValidationContext) -> tuple[bool, str]:
    inside: np.ndarray = vc.context.operators.interior
    modes: ModeSet = project(vc.first_order_grid)
    reference: ModeSet = vc.field.mode_set(vc.context.operators.radial.interior(), modes.j_max)
    low: float = float(np.max(np.abs(modes.coefficients[:2, inside] - reference.coefficients[:2])))
    high: float = float(np.max(np.abs(modes.coefficients[2:]))) if modes.coefficients.shape[0] > 2 else 0.0
    return low <= 1e-5 and high <= 1e-6, f"modes 0, 2: {low:.2e}; modes >= 4: {high:.2e}"


@check("direct_vs_multipole", slow=True)
def _direct_vs_multipole(vc: ValidationContext) -> tuple[bool, str]:
    reduced: SolverConfig = vc.config.replace(panels_inner=4, panels_outer=2, nodes_per_panel=8, angular_order=16, j_max=8)
    profile: LaneEmdenProfile = vc.context.profile
    radial, angular = make_grids(reduced, profile.xi1)
    theta: GridFunction = OperatorContext.build(profile, radial, angular).theta
    density: GridFunction = theta.like(positive_power(theta.values, profile.nu))
    direct: np.ndarray = apply_newton_direct(density).values
    modes: np.ndarray = synthesize(apply_newton_modes(project(density)), angular).values
    gap: float = float(np.max(np.abs(direct - modes)))
    return gap <= 1e-5, f"max difference {gap:.2e}"


@check("eps_zero_solution")
def _eps_zero(vc: ValidationContext) -> tuple[bool, str]:
    sol: DistortedSolution = vc.solution(0.0)
    gap: float = sup_norm(sol.w - vc.first_order_grid)
    passed: bool = sol.report.iterations == 1 and perturbation_norm(sol) <= 1e-14 and gap <= 1e-14
    return passed, f"iterations {sol.report.iterations}, |w - h| = {gap:.2e}"


@check("contraction_sweep")
def _contraction_sweep(vc: ValidationContext) -> tuple[bool, str]:
    scaled: list[float] = []
    for eps in SWEEP_EPS:
        sol: DistortedSolution = vc.solution(eps)
        if not sol.report.converged or max(sol.report.ratios, default=0.0) >= 0.5 or sol.report.residual > 1e-8:
            return False, f"eps={eps}: ratios {sol.report.ratios}, residual {sol.report.residual:.2e}"
        scaled.append(perturbation_norm(sol) / eps)
    spread: float = (max(scaled) - min(scaled)) / min(scaled)
    return spread <= 0.1, f"|Theta - theta| / eps spread {spread:.2%}"


@check("first_order_law")
def _first_order_law(vc: ValidationContext) -> tuple[bool, str]:
    gaps: list[float] = [sup_norm(vc.solution(eps).w - vc.first_order_grid) for eps in (2e-3, 1e-3)]
    ratio: float = gaps[1] / gaps[0]
    return 0.4 <= ratio <= 0.6, f"ratio {ratio:.3f}"


@check("surface_root_certificate")
def _surface_roots(vc: ValidationContext) -> tuple[bool, str]:
    sol: DistortedSolution = vc.solution(SURFACE_EPS)
    delta: float = 1e-3 * sol.profile.xi1
    for zeta, radius in zip(vc.surface.zeta_samples, vc.surface.xi1_values):
        if not eval_Theta(sol, radius - delta, zeta) > 0.0 > eval_Theta(sol, radius + delta, zeta):
            return False, f"no sign change at zeta={zeta:.4f}"
    return True, f"{vc.surface.zeta_samples.size} certified roots"


@check("physical_vacuum")
def _physical_vacuum(vc: ValidationContext) -> tuple[bool, str]:
    normals: np.ndarray = vc.surface.normal_derivs
    if not np.all(np.isfinite(normals)) or np.any(normals >= 0.0):
        return False, f"normal derivatives {normals}"
    profile: LaneEmdenProfile = vc.context.profile
    spherical: float = -profile.mu1 / profile.xi1**2
    constant: float = float(np.max(np.abs(normals - spherical))) / SURFACE_EPS
    return constant <= 100.0, f"deviation / eps = {constant:.3f}"


@check("oblateness_first_order")
def _oblateness(vc: ValidationContext) -> tuple[bool, str]:
    sol: DistortedSolution = vc.solution(FIRST_ORDER_EPS)
    sigma: float = (find_xi1(sol, 0.0) - find_xi1(sol, 1.0)) / sol.profile.xi1
    sigma1: float = sigma_first_order(vc.context.profile, vc.field)
    gap: float = abs(sigma / FIRST_ORDER_EPS - sigma1) / sigma1
    return sigma > 0.0 and gap <= 0.05, f"sigma/eps={sigma / FIRST_ORDER_EPS:.5f}, sigma1={sigma1:.5f}"


@check("pole_slope_decay")
def _pole_slope(vc: ValidationContext) -> tuple[bool, str]:
    sol: DistortedSolution = vc.solution(SURFACE_EPS)
    proxies: list[float] = [abs(pole_slope(sol, zeta).proxy) for zeta in (0.9, 0.99, 0.999)]
    return proxies[0] > proxies[1] > proxies[2], "proxies " + ", ".join(f"{value:.3e}" for value in proxies)


@check("snapshot_round_trip")
def _snapshot_round_trip(vc: ValidationContext) -> tuple[bool, str]:
    sol: DistortedSolution = vc.solution(SURFACE_EPS)
    text: str = SolutionSnapshot.from_solution(sol).dumps()
    reloaded: SolutionSnapshot = SolutionSnapshot.loads(text)
    gap: float = abs(residual(rebuild_solution(reloaded)) - sol.report.residual)
    return reloaded.dumps() == text and gap <= 1e-12, f"residual reproduced to {gap:.2e}"


@check("theta_even_and_central")
def _theta_even(vc: ValidationContext) -> tuple[bool, str]:
    sol: DistortedSolution = vc.solution(SURFACE_EPS)
    full: np.ndarray = theta_grid(sol).full()
    asymmetry: float = float(np.max(np.abs(full - full[:, ::-1])))
    central: float = max(abs(float(eval_Theta(sol, 0.0, zeta)) - 1.0) for zeta in (0.0, 0.5, 1.0))
    return asymmetry == 0.0 and central <= sol.config.fp_tol, f"asymmetry {asymmetry:.1e}, |Theta(0) - 1| {central:.1e}"


def run_suite(config: SolverConfig, quick: bool = False, logger: Optional[Logger] = None) -> list[CheckResult]:
    """Run every registered property.

    Args:
        config (SolverConfig): Configuration of the solver properties.
        quick (bool): Skip properties registered as slow.
        logger (Optional[Logger]): Logger for progress and failures.

    Returns:
        list[CheckResult]: One result per property, in registration order.
    """
    log: Logger = logger or LOGGER
    vc = ValidationContext(config, logger=log)
    results: list[CheckResult] = []
    for item in CHECKS:
        if quick and item.slow:
            results.append(CheckResult(name=item.name, passed=True, detail="skipped", seconds=0.0, skipped=True))
            continue
        start: float = time.perf_counter()
        try:
            passed, detail = item.func(vc)
        except Exception as error:  # pylint: disable=broad-exception-caught
            passed, detail = False, f"{type(error).__name__}: {error}"
        elapsed: float = time.perf_counter() - start
        log.info(f"{item.name}: {'PASS' if passed else 'FAIL'} ({detail})")
        results.append(CheckResult(name=item.name, passed=bool(passed), detail=detail, seconds=elapsed))
    return results


def print_results(results: list[CheckResult], stream: TextIO) -> None:
    """Write one ``STATUS name seconds detail`` line per property and a summary."""
    width: int = max((len(result.name) for result in results), default=0)
    for result in results:
        status: str = "SKIP" if result.skipped else ("PASS" if result.passed else "FAIL")
        stream.write(f"{status}  {result.name:<{width}}  {result.seconds:7.2f}s  {result.detail}\n")
    failed: int = sum(not result.passed for result in results)
    stream.write(f"{len(results)} properties, {failed} failed\n")
