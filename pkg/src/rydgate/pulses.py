"""Smooth pi-2pi-pi Rabi pulse sequence for the adiabatic dark-state gate.

Each stage uses the shape

    Omega(t) = Omega_max [b(x) - a(x) (exp(-t^2/2s^2) + exp(-(t-T)^2/2s^2))],

with ``x = T/s``, ``a(x) = 1/(1 + e^{-x^2/2} + e^{-x^2/8})`` and
``b(x) = (1 + e^{-x^2/2}) a(x)``, so that the pulse vanishes at both ends.
Because ``s/T`` is held fixed, the duration that realises a pulse area
``Theta`` follows in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .model import OMEGA_MAX, ControlGrid, ParameterError

DEFAULT_SIGMA_RATIO = 0.05


class InfeasiblePulseError(ParameterError):
    pass


def shape_a(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x * x / 2) + math.exp(-x * x / 8))


def shape_b(x: float) -> float:
    return (1.0 + math.exp(-x * x / 2)) * shape_a(x)


def area_factor(sigma_over_T: float) -> float:
    """Mean of Omega(t)/Omega_max over the pulse."""
    x = 1.0 / sigma_over_T
    return shape_b(x) - math.sqrt(2 * math.pi) * sigma_over_T * shape_a(x) * erf(
        x / math.sqrt(2)
    )


@dataclass(frozen=True)
class SmoothPulseSpec:
    Theta: float
    omega_max: float
    sigma_over_T: float
    T: float

    @property
    def sigma(self) -> float:
        return self.sigma_over_T * self.T

    def eval(self, t):
        """Rabi frequency at time(s) ``t`` in ``[0, T]``."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > self.T):
            raise ParameterError(f"t outside the pulse window [0, {self.T:g}]")
        x = 1.0 / self.sigma_over_T
        s2 = 2 * self.sigma**2
        val = self.omega_max * (
            shape_b(x) - shape_a(x) * (np.exp(-(t**2) / s2) + np.exp(-((t - self.T) ** 2) / s2))
        )
        # cancellation at the endpoints can leave -1 ulp; genuine undershoot
        # (large sigma/T) is kept so the area stays exact
        return np.where(np.abs(val) < 1e-12 * self.omega_max, np.abs(val), val)

    __call__ = eval


def solve_duration(
    Theta: float, omega_max: float = OMEGA_MAX, sigma_over_T: float = DEFAULT_SIGMA_RATIO
) -> SmoothPulseSpec:
    if not Theta > 0:
        raise ParameterError("pulse area Theta must be positive")
    if not omega_max > 0:
        raise ParameterError("omega_max must be positive")
    if not 0 < sigma_over_T < 0.5:
        raise ParameterError("sigma_over_T must lie in (0, 0.5)")
    denom = area_factor(sigma_over_T)
    if denom <= 0:
        raise InfeasiblePulseError(
            f"sigma_over_T={sigma_over_T:g} leaves no positive pulse area"
        )
    return SmoothPulseSpec(Theta, omega_max, sigma_over_T, Theta / (omega_max * denom))


@dataclass(frozen=True)
class Stage:
    atom: str  # "C" or "T"
    pulse: SmoothPulseSpec
    start: float

    @property
    def stop(self) -> float:
        return self.start + self.pulse.T


@dataclass(frozen=True)
class PiTwoPiPiSchedule:
    stages: tuple[Stage, Stage, Stage]
    phase: float = 0.0

    @property
    def T(self) -> float:
        return self.stages[-1].stop

    @property
    def omega_peak(self) -> float:
        return max(s.pulse.omega_max for s in self.stages)

    def default_bins(self, max_step: float = 0.02) -> int:
        """Smallest stage-aligned bin count with ``dt * Omega_peak <= max_step``."""
        n = math.ceil(self.T * self.omega_peak / max_step)
        return n + (-n) % 4

    def to_grid(self, N: int | None = None, omega_max: float = OMEGA_MAX) -> ControlGrid:
        """Midpoint-sample the schedule onto ``N`` bins aligned with the stages."""
        if N is None:
            N = self.default_bins()
        dt = self.T / N
        counts = []
        for st in self.stages:
            c = st.pulse.T / dt
            if abs(c - round(c)) > 1e-6:
                raise ParameterError(
                    f"N={N} does not align bins with the stage boundaries"
                )
            counts.append(int(round(c)))
        omega = {"C": np.zeros(N), "T": np.zeros(N)}
        k = 0
        for st, c in zip(self.stages, counts):
            mid = (np.arange(c) + 0.5) * (st.pulse.T / c)
            omega[st.atom][k : k + c] = st.pulse.eval(mid)
            k += c
        phase = np.full(N, float(self.phase))
        return ControlGrid(self.T, omega["C"], omega["T"], phase, phase, omega_max=omega_max)


def make_pi2pipi(
    omega_max: float = OMEGA_MAX,
    sigma_over_T: float = DEFAULT_SIGMA_RATIO,
    slowdown: float = 1.0,
    phase: float = 0.0,
    theta: float = np.pi,
) -> PiTwoPiPiSchedule:
    """pi on control, 2pi on target, pi on control; stages back to back.

    ``slowdown`` stretches every stage by that factor at fixed area, lowering
    the peak amplitude to ``omega_max / slowdown``. ``theta`` sets the outer
    stage area (the middle stage gets ``2 theta``).
    """
    if slowdown < 1:
        raise ParameterError("slowdown factor must be >= 1")
    peak = omega_max / slowdown
    p1 = solve_duration(theta, peak, sigma_over_T)
    p2 = solve_duration(2 * theta, peak, sigma_over_T)
    s1 = Stage("C", p1, 0.0)
    s2 = Stage("T", p2, s1.stop)
    s3 = Stage("C", p1, s2.stop)
    return PiTwoPiPiSchedule((s1, s2, s3), phase=phase)
