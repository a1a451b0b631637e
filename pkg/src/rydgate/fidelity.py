"""Trace fidelity against CZ with free single-qubit phases.

For diagonal return amplitudes ``u = (1, u01, u10, u11)``

    F(th1, th2) = |1 + e^{-i th1} u01 + e^{-i th2} u10 - e^{-i(th1+th2)} u11|^2 / 16.

For fixed ``th1`` the ``th2`` maximum aligns two complex numbers, which leaves
a one-dimensional search over ``th1``: a dense grid followed by a bounded
Brent polish.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .model import TWO_PI, GateTarget

_GRID = 256


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class FidelityResult:
    F: float
    theta1: float
    theta2: float
    u: np.ndarray

    @property
    def epsilon(self) -> float:
        return 1.0 - self.F

    @property
    def overlap(self) -> complex:
        """``Tr(U_target^dag U) / 4`` at the optimal phases."""
        return overlap(self.u, self.theta1, self.theta2)


def overlap(u, theta1: float, theta2: float) -> complex:
    u = np.asarray(u, dtype=complex)
    return (
        u[0]
        + np.exp(-1j * theta1) * u[1]
        + np.exp(-1j * theta2) * u[2]
        - np.exp(-1j * (theta1 + theta2)) * u[3]
    ) / 4.0


def fidelity_at(u, theta1: float, theta2: float) -> float:
    return float(abs(overlap(u, theta1, theta2)) ** 2)


def _profile(u, theta1):
    z = np.exp(-1j * np.asarray(theta1))
    return np.abs(u[0] + u[1] * z) + np.abs(u[2] - u[3] * z)


def _abs_derivs(X, dX, d2X):
    m = abs(X)
    re1 = (np.conj(X) * dX).real
    return m, re1 / m, (abs(dX) ** 2 + (np.conj(X) * d2X).real) / m - re1**2 / m**3


def _newton_polish(u, theta, steps=3):
    """Newton steps on the smooth profile; Brent alone stops near sqrt(eps)."""
    for _ in range(steps):
        z = np.exp(-1j * theta)
        A, W = u[0] + u[1] * z, u[2] - u[3] * z
        if abs(A) < 1e-8 or abs(W) < 1e-8:
            break
        _, gA, hA = _abs_derivs(A, -1j * u[1] * z, -u[1] * z)
        _, gW, hW = _abs_derivs(W, 1j * u[3] * z, u[3] * z)
        g, h = gA + gW, hA + hW
        if h >= 0:
            break
        new = theta - g / h
        if _profile(u, new) < _profile(u, theta):
            break
        theta = float(new)
    return theta


def optimal_phases(u) -> tuple[float, float]:
    u = np.asarray(u, dtype=complex)
    grid = np.linspace(0.0, TWO_PI, _GRID, endpoint=False)
    vals = _profile(u, grid)
    k = int(np.argmax(vals))
    h = TWO_PI / _GRID
    res = minimize_scalar(
        lambda t: -_profile(u, t),
        bounds=(grid[k] - h, grid[k] + h),
        method="bounded",
        options={"xatol": 1e-12},
    )
    theta1 = float(res.x) if -res.fun >= vals[k] else float(grid[k])
    theta1 = _newton_polish(u, theta1)
    z = np.exp(-1j * theta1)
    A = u[0] + u[1] * z
    W = u[2] - u[3] * z
    theta2 = float(np.angle(W) - np.angle(A)) if abs(A) and abs(W) else 0.0
    return theta1 % TWO_PI, theta2 % TWO_PI


def fidelity_from_amplitudes(u) -> FidelityResult:
    u = np.asarray(u, dtype=complex)
    t1, t2 = optimal_phases(u)
    F = min(fidelity_at(u, t1, t2), 1.0)
    return FidelityResult(F, t1, t2, u)


def trace_fidelity(result, target: GateTarget | None = None) -> FidelityResult:
    """Maximised trace fidelity of a propagation result.

    ``target`` only selects the gate family; its phases are re-optimised.
    """
    if target is not None and target.kind != "CZ":
        raise ValueError(f"unsupported target {target.kind!r}")
    return fidelity_from_amplitudes(result.diagonal_amplitudes())


def infidelity(result) -> float:
    return trace_fidelity(result).epsilon


def compare_to_ideal(result, ideal) -> float:
    """``eps(result) - eps(ideal)`` for two propagations of the same grid."""
    if result.grid is not None and ideal.grid is not None and result.grid != ideal.grid:
        raise GridMismatchError("results were propagated on different control grids")
    return trace_fidelity(result).epsilon - trace_fidelity(ideal).epsilon
