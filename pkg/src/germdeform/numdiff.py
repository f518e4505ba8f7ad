"""Finite-difference Wirtinger derivatives of black-box complex maps."""

from __future__ import annotations

from typing import Callable

DEFAULT_STEP = 1e-5


def wirtinger_pair(
    fn: Callable[[complex], complex], at: complex, step: float = DEFAULT_STEP
) -> tuple[complex, complex]:
    """(d/dz, d/dzbar) of fn at a point, by 4-point central differences."""
    fe = fn(at + step)
    fw = fn(at - step)
    fn_ = fn(at + 1j * step)
    fs = fn(at - 1j * step)
    fx = (fe - fw) / (2.0 * step)
    fy = (fn_ - fs) / (2.0 * step)
    return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)


def wirtinger_dbar(
    fn: Callable[[complex], complex], at: complex, step: float = DEFAULT_STEP
) -> complex:
    return wirtinger_pair(fn, at, step)[1]
