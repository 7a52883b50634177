"""Solver configuration shared by the grid, operator and fixed-point layers."""

from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any, Mapping, Optional

import jsonschema

from rotstar.exceptions import ConfigError

if TYPE_CHECKING:
    from logging import Logger

LOGGER = logging.getLogger(__name__)

SCHEMA_PATH: Path = Path(__file__).parent.joinpath("app-config-schema.json")


def load_schema() -> dict[str, Any]:
    """Load the JSON schema of the solver configuration.

    Returns:
        dict[str, Any]: The parsed schema.
    """
    with open(file=SCHEMA_PATH, mode="r", encoding="utf-8") as file:
        schema: dict[str, Any] = json.load(fp=file)
    return schema


@dataclass(frozen=True)
class SolverConfig:
    """Discretization, tolerance and iteration knobs of one solver run.

    Field names are identical to the keys of the JSON configuration file.

    Attrs:
        nu (float): Polytropic index.
        j_max (int): Even Legendre cutoff; modes 0, 2, ..., j_max are kept.
        panels_inner (int): Radial Gauss panels on ``[0, xi1]``.
        panels_outer (int): Radial Gauss panels on ``[xi1, R0]``.
        nodes_per_panel (int): Gauss-Legendre nodes per radial panel.
        angular_order (int): Even Gauss-Legendre order in ``zeta``.
        fp_tol (float): Sup-norm stopping tolerance of the fixed-point iteration.
        max_iter (int): Iteration budget.
        r0_factor (float): Outer radius as a multiple of ``xi1``.
        le_tol (float): Lane-Emden integration tolerance.
        r_max (float): Radius up to which a finite first zero is searched.
        eps_list (tuple[float, ...]): Optional rotation parameters for a sweep.
    """

    nu: float
    j_max: int = 8
    panels_inner: int = 8
    panels_outer: int = 4
    nodes_per_panel: int = 16
    angular_order: int = 32
    fp_tol: float = 1e-10
    max_iter: int = 50
    r0_factor: float = 2.0
    le_tol: float = 1e-12
    r_max: float = 100.0
    eps_list: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        """Validate the configuration against the schema and the cross-field rules."""
        object.__setattr__(self, "eps_list", tuple(float(eps) for eps in self.eps_list))
        self.validate()

    def validate(self, logger: Optional[Logger] = None) -> None:
        """Check the configuration.

        Args:
            logger (Optional[Logger]): Logger to log error messages to.

        Raises:
            ConfigError: When a field violates the schema or the angular order is too low.
        """
        log: Logger = logger or LOGGER
        try:
            jsonschema.validate(instance=self.to_dict(), schema=load_schema())
        except jsonschema.ValidationError as error:
            exc_msg: str = f"Invalid solver configuration: {error.message}"
            log.error(exc_msg)
            raise ConfigError(exc_msg) from error
        if self.angular_order < 2 * self.j_max:
            exc_msg = (
                f"angular_order={self.angular_order} must be at least 2*j_max={2 * self.j_max} "
                "for exact mode projection."
            )
            log.error(exc_msg)
            raise ConfigError(exc_msg)

    def to_dict(self) -> dict[str, Any]:
        """JSON-compatible mapping with the configuration file field names."""
        data: dict[str, Any] = dataclasses.asdict(self)
        data["eps_list"] = list(self.eps_list)
        return data

    def replace(self, **overrides: Any) -> SolverConfig:
        """Copy with the non-``None`` overrides applied.

        Args:
            **overrides (Any): Field values; ``None`` keeps the current value.

        Returns:
            SolverConfig: The updated configuration.
        """
        changes: dict[str, Any] = {key: value for key, value in overrides.items() if value is not None}
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any], **overrides: Any) -> SolverConfig:
        """Build a configuration from a mapping, then apply overrides.

        Args:
            data (Mapping[str, Any]): Configuration fields, e.g. a parsed JSON file.
            **overrides (Any): Field values taking precedence over ``data``; ``None`` is ignored.

        Returns:
            SolverConfig: The validated configuration.

        Raises:
            ConfigError: When ``nu`` is missing or a field is unknown or invalid.
        """
        merged: dict[str, Any] = dict(data)
        merged.update({key: value for key, value in overrides.items() if value is not None})
        known: set[str] = {item.name for item in dataclasses.fields(cls)}
        unknown: list[str] = sorted(set(merged) - known)
        if unknown:
            exc_msg: str = f"Unknown configuration fields: {', '.join(unknown)}"
            LOGGER.error(exc_msg)
            raise ConfigError(exc_msg)
        if "nu" not in merged:
            exc_msg = "The configuration must define the polytropic index `nu`."
            LOGGER.error(exc_msg)
            raise ConfigError(exc_msg)
        if "eps_list" in merged:
            merged["eps_list"] = tuple(merged["eps_list"])
        return cls(**merged)

    @classmethod
    def from_json_file(cls, path: str | Path, **overrides: Any) -> SolverConfig:
        """Read a JSON configuration file and apply overrides.

        Args:
            path (str | Path): Location of the JSON file.
            **overrides (Any): Field values taking precedence over the file.

        Returns:
            SolverConfig: The validated configuration.

        Raises:
            ConfigError: When the file cannot be read or parsed.
        """
        try:
            with open(file=path, mode="r", encoding="utf-8") as file:
                data: dict[str, Any] = json.load(fp=file)
        except (OSError, json.JSONDecodeError) as error:
            exc_msg: str = f"Cannot read configuration file {path}: {error}"
            LOGGER.error(exc_msg)
            raise ConfigError(exc_msg) from error
        if not isinstance(data, dict):
            exc_msg = f"Configuration file {path} must contain a JSON object."
            LOGGER.error(exc_msg)
            raise ConfigError(exc_msg)
        return cls.from_mapping(data, **overrides)
