"""JSON snapshots of distorted solutions."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Any, Optional

import jsonschema
import numpy as np

from rotstar.config import SolverConfig
from rotstar.exceptions import ConfigError, SnapshotError
from rotstar.fixed_point import DistortedSolution, IterationReport, SolverContext, assemble_solution
from rotstar.spectral_grid import GridFunction
from rotstar.surface import SurfaceProfile

if TYPE_CHECKING:
    from logging import Logger

LOGGER = logging.getLogger(__name__)

SCHEMA_VERSION: int = 1
SCHEMA_PATH: Path = Path(__file__).parent.joinpath("snapshot-schema.json")
NODE_TOLERANCE: float = 1e-13


def _floats(values: np.ndarray) -> list[Any]:
    return np.asarray(values, dtype=float).tolist()


@dataclass(frozen=True)
class SolutionSnapshot:
    """Serializable state of a solution.

    Attrs:
        data (dict[str, Any]): Document matching ``snapshot-schema.json``.
    """

    data: dict[str, Any]

    @property
    def schema_version(self) -> int:
        """Version of the document layout."""
        return int(self.data["schema_version"])

    @property
    def config(self) -> SolverConfig:
        """Configuration the solution was computed with."""
        return SolverConfig.from_mapping(self.data["config"])

    @property
    def eps(self) -> float:
        """Rotation parameter."""
        return float(self.data["eps"])

    @property
    def residual(self) -> float:
        """Residual stored at save time."""
        return float(self.data["report"]["residual"])

    def surface(self) -> Optional[SurfaceProfile]:
        """Stored surface samples, if any."""
        stored: Optional[dict[str, Any]] = self.data.get("surface")
        if stored is None:
            return None
        return SurfaceProfile(
            zeta_samples=np.array(stored["zeta_samples"]),
            xi1_values=np.array(stored["xi1_values"]),
            dxi1_dzeta=np.array(stored["dxi1_dzeta"]),
            sigma=float(stored["sigma"]),
            normal_derivs=np.array(stored["normal_derivs"]),
            reference_radius=float(stored["reference_radius"]),
        )

    def dumps(self) -> str:
        """Canonical JSON text; equal documents give identical bytes."""
        return json.dumps(self.data, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_solution(cls, sol: DistortedSolution, surface: Optional[SurfaceProfile] = None) -> SolutionSnapshot:
        """Capture a solution and, optionally, its surface samples."""
        report: IterationReport = sol.report
        data: dict[str, Any] = {
            "schema_version": SCHEMA_VERSION,
            "config": sol.config.to_dict(),
            "profile": {"nu": sol.profile.nu, "xi1": sol.profile.xi1, "mu1": sol.profile.mu1},
            "eps": float(sol.eps),
            "radial_nodes": _floats(sol.w.radial.nodes),
            "angular_nodes": _floats(sol.w.angular.zeta_nodes),
            "w": _floats(sol.w.values),
            "theta_modes": _floats(sol.theta_modes.coefficients),
            "report": {
                "diffs": [float(value) for value in report.diffs],
                "ratios": [float(value) for value in report.ratios],
                "residual": float(report.residual),
                "iterations": int(report.iterations),
                "converged": bool(report.converged),
            },
            "surface": None,
        }
        if surface is not None:
            data["surface"] = {
                "zeta_samples": _floats(surface.zeta_samples),
                "xi1_values": _floats(surface.xi1_values),
                "dxi1_dzeta": _floats(surface.dxi1_dzeta),
                "sigma": float(surface.sigma),
                "normal_derivs": _floats(surface.normal_derivs),
                "reference_radius": float(surface.reference_radius),
            }
        return cls(data=data)

    @classmethod
    def loads(cls, text: str, logger: Optional[Logger] = None) -> SolutionSnapshot:
        """Parse and validate snapshot text.

        Args:
            text (str): JSON document.
            logger (Optional[Logger]): Logger for error messages.

        Returns:
            SolutionSnapshot: The snapshot.

        Raises:
            SnapshotError: On invalid JSON, a schema violation or another schema version.
        """
        log: Logger = logger or LOGGER
        try:
            data: Any = json.loads(text)
        except json.JSONDecodeError as error:
            exc_msg: str = f"Snapshot is not valid JSON: {error}"
            log.error(exc_msg)
            raise SnapshotError(exc_msg) from error
        if isinstance(data, dict) and data.get("schema_version") != SCHEMA_VERSION:
            exc_msg = f"Snapshot schema version {data.get('schema_version')!r} is not supported (expected {SCHEMA_VERSION})."
            log.error(exc_msg)
            raise SnapshotError(exc_msg)
        with open(file=SCHEMA_PATH, mode="r", encoding="utf-8") as file:
            schema: dict[str, Any] = json.load(fp=file)
        try:
            jsonschema.validate(instance=data, schema=schema)
        except jsonschema.ValidationError as error:
            exc_msg = f"Snapshot does not match its schema: {error.message}"
            log.error(exc_msg)
            raise SnapshotError(exc_msg) from error
        return cls(data=data)


def save_snapshot(snapshot: SolutionSnapshot, path: str | Path, logger: Optional[Logger] = None) -> None:
    """Write a snapshot as canonical JSON.

    Raises:
        SnapshotError: When the file cannot be written.
    """
    log: Logger = logger or LOGGER
    try:
        Path(path).write_text(snapshot.dumps(), encoding="utf-8")
    except OSError as error:
        exc_msg: str = f"Cannot write snapshot {path}: {error}"
        log.error(exc_msg)
        raise SnapshotError(exc_msg) from error
    log.info(f"Snapshot written to {path}")


def load_snapshot(path: str | Path, logger: Optional[Logger] = None) -> SolutionSnapshot:
    """Read and validate a snapshot file.

    Raises:
        SnapshotError: When the file is missing, unreadable or invalid.
    """
    log: Logger = logger or LOGGER
    try:
        text: str = Path(path).read_text(encoding="utf-8")
    except OSError as error:
        exc_msg: str = f"Cannot read snapshot {path}: {error}"
        log.error(exc_msg)
        raise SnapshotError(exc_msg) from error
    return SolutionSnapshot.loads(text, logger=log)


def rebuild_solution(snapshot: SolutionSnapshot, logger: Optional[Logger] = None) -> DistortedSolution:
    """Recreate the solution of a snapshot on freshly built grids.

    Args:
        snapshot (SolutionSnapshot): The snapshot.
        logger (Optional[Logger]): Logger for progress and errors.

    Returns:
        DistortedSolution: The solution, with the stored iteration report.

    Raises:
        SnapshotError: When the stored grids differ from the rebuilt ones.
    """
    log: Logger = logger or LOGGER
    try:
        config: SolverConfig = snapshot.config
    except ConfigError as error:
        exc_msg: str = f"Snapshot configuration is invalid: {error}"
        log.error(exc_msg)
        raise SnapshotError(exc_msg) from error
    context: SolverContext = SolverContext.build(config, logger=log)
    radial = context.operators.radial
    angular = context.operators.angular
    stored_radial: np.ndarray = np.array(snapshot.data["radial_nodes"])
    stored_angular: np.ndarray = np.array(snapshot.data["angular_nodes"])
    values: np.ndarray = np.array(snapshot.data["w"], dtype=float)
    if (
        stored_radial.shape != radial.nodes.shape
        or stored_angular.shape != angular.zeta_nodes.shape
        or values.shape != (radial.size, angular.zeta_nodes.size)
        or not np.allclose(stored_radial, radial.nodes, rtol=0.0, atol=NODE_TOLERANCE * radial.r0)
        or not np.allclose(stored_angular, angular.zeta_nodes, rtol=0.0, atol=NODE_TOLERANCE)
    ):
        exc_msg = "Snapshot grids do not match the grids of its configuration."
        log.error(exc_msg)
        raise SnapshotError(exc_msg)
    stored_report: dict[str, Any] = snapshot.data["report"]
    report = IterationReport(
        diffs=list(stored_report["diffs"]),
        ratios=list(stored_report["ratios"]),
        residual=float(stored_report["residual"]),
        iterations=int(stored_report["iterations"]),
        converged=bool(stored_report["converged"]),
    )
    w = GridFunction(values=values, radial=radial, angular=angular)
    return assemble_solution(context, snapshot.eps, w, report)
