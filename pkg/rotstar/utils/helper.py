"""Numerical and I/O helpers shared by the solver modules."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import TYPE_CHECKING, Callable, Iterable, Optional, Sequence, TypeVar

import numpy as np

if TYPE_CHECKING:
    from logging import Logger

LOGGER = logging.getLogger(__name__)

THREADS_ENV: str = "ROTSTAR_THREADS"

T = TypeVar("T")
R = TypeVar("R")


def positive_power(values: np.ndarray | float, exponent: float) -> np.ndarray:
    """Power of the positive part, ``max(0, values) ** exponent``.

    Non-positive entries map to exactly 0, also for ``exponent == 0``, so the
    result is the indicator of the positive set in that case.

    Args:
        values (np.ndarray | float): Base values, any sign.
        exponent (float): Non-negative exponent.

    Returns:
        np.ndarray: Array of the same shape as ``values``.
    """
    base: np.ndarray = np.asarray(values, dtype=float)
    result: np.ndarray = np.zeros_like(base)
    mask: np.ndarray = base > 0.0
    result[mask] = np.exp(exponent * np.log(base[mask]))
    return result


def thread_count(logger: Optional[Logger] = None) -> int:
    """Worker count for per-mode parallelism.

    Args:
        logger (Optional[Logger]): Logger to report an unusable environment value to.

    Returns:
        int: ``ROTSTAR_THREADS`` when set to a positive integer, else ``min(4, cpu_count)``.
    """
    log: Logger = logger or LOGGER
    raw: str = os.environ.get(THREADS_ENV, "").strip()
    if raw:
        try:
            count: int = int(raw)
        except ValueError:
            log.warning(f"Ignoring {THREADS_ENV}={raw!r}: not an integer.")
        else:
            if count >= 1:
                return count
            log.warning(f"Ignoring {THREADS_ENV}={raw!r}: must be at least 1.")
    return max(1, min(4, os.cpu_count() or 1))


def parallel_map(func: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Apply ``func`` to every item, results in input order.

    Args:
        func (Callable[[T], R]): Pure function to apply.
        items (Iterable[T]): Inputs, typically Legendre mode indices.

    Returns:
        list[R]: ``[func(item) for item in items]``.
    """
    work: list[T] = list(items)
    workers: int = min(thread_count(), len(work))
    if workers <= 1:
        return [func(item) for item in work]
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="rotstar") as pool:
        return list(pool.map(func, work))


def format_float(value: float) -> str:
    """Locale-independent text with 17 significant digits."""
    return format(float(value), ".17g")


def format_row(values: Sequence[float | str | bool]) -> list[str]:
    """Format a CSV row, numbers with 17 significant digits.

    Args:
        values (Sequence[float | str | bool]): Cells of the row.

    Returns:
        list[str]: Cells ready for ``csv.writer``.
    """
    row: list[str] = []
    for value in values:
        if isinstance(value, bool):
            row.append(str(value).lower())
        elif isinstance(value, (int, float, np.floating, np.integer)):
            row.append(format_float(value))
        else:
            row.append(str(value))
    return row


def gauss_rule(lower: float, upper: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to ``[lower, upper]``.

    Args:
        lower (float): Left end.
        upper (float): Right end.
        order (int): Number of nodes.

    Returns:
        tuple[np.ndarray, np.ndarray]: Nodes in increasing order and their weights.
    """
    nodes, weights = np.polynomial.legendre.leggauss(order)
    half: float = 0.5 * (upper - lower)
    return lower + half * (nodes + 1.0), half * weights
