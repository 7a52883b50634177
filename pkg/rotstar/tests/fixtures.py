"""Create fixtures for tests."""

import json
from pathlib import Path
from typing import Any

from rotstar.config import SolverConfig


def get_json_fixture(folder: str, file_name: str) -> dict[str, Any]:
    """Fixture to return a parsed JSON document for tests.

    Args:
        folder (str): The folder where the JSON file is located.
        file_name (str): The name of the JSON file.

    Returns:
        dict[str, Any]: The parsed document.
    """
    fixture_file: Path = get_fixture_path(folder, file_name)
    with open(file=fixture_file, mode="r", encoding="utf-8") as file:
        content: dict[str, Any] = json.load(fp=file)
    return content


def get_fixture_path(folder: str, file_name: str) -> Path:
    """Location of a fixture file."""
    return Path(__file__).parent.joinpath(
        "fixtures",
        folder,
        file_name,
    )


def small_config(**overrides: Any) -> SolverConfig:
    """Configuration of the reduced grids the solver tests run on."""
    return SolverConfig.from_mapping(get_json_fixture("config", "small.json"), **overrides)
