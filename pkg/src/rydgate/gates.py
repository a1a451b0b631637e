"""Building the three compared gates at a given interatomic distance.

* ``blockade``: time-optimal pulse for the van der Waals blockade block.
* ``nad``: time-optimal (non-adiabatic) pulse for the dark-state block.
* ``ad``: the smooth pi-2pi-pi sequence on the dark-state block, slowed down
  until it is adiabatic for the local coupling ``B(R)``.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np

from .atomdata import SpeciesData
from .fidelity import trace_fidelity
from .grape import (
    GLOBAL_PHASE,
    OptimizationProblem,
    TimeOptimalScan,
    optimize_multistart,
    scan_time_optimal,
)
from .hamiltonians import GateSystem, Mechanism
from .model import OMEGA_MAX, TWO_PI, ControlGrid, ParameterError
from .propagation import propagate
from .pulses import DEFAULT_SIGMA_RATIO, make_pi2pipi

log = logging.getLogger(__name__)

T_UNIT = TWO_PI / OMEGA_MAX  # 2 pi / Omega_max in us
SLOWDOWN_LADDER = tuple(float(2 ** (k / 2)) for k in range(0, 15))


class GateKind(str, enum.Enum):
    BLOCKADE = "blockade"
    NAD = "nad"
    AD = "ad"
    IDEAL = "ideal"


GATE_KINDS = (GateKind.BLOCKADE, GateKind.NAD, GateKind.AD)


@dataclass
class GateBuild:
    kind: GateKind
    system: GateSystem
    grid: ControlGrid
    epsilon: float
    scan: TimeOptimalScan | None = None
    slowdown: float | None = None

    @property
    def T(self) -> float:
        return self.grid.T

    @property
    def feasible(self) -> bool:
        return self.scan is None or self.scan.T_min is not None


def T_grid(start: float = 2.0, stop: float = 1.0, step: float = 0.01) -> np.ndarray:
    """Descending durations in us from ``start`` to ``stop`` (units of ``T_UNIT``)."""
    if not start > stop > 0 or step <= 0:
        raise ParameterError("need start > stop > 0 and step > 0")
    n = int(round((start - stop) / step)) + 1
    return np.round(start - step * np.arange(n), 10) * T_UNIT


def time_optimal_gate(
    system: GateSystem,
    T_values=None,
    threshold: float = 1e-6,
    N: int = 100,
    seeds: int = 5,
    variables: str = GLOBAL_PHASE,
    kind: GateKind = GateKind.NAD,
    omega_max: float = OMEGA_MAX,
) -> GateBuild:
    """Shortest scanned pulse below ``threshold``.

    When no scanned duration meets the threshold the best pulse found at the
    longest duration is returned and ``feasible`` is false.
    """
    if T_values is None:
        T_values = T_grid()
    problem = OptimizationProblem(
        system, T=float(T_values[0]), N=N, variables=variables, omega_max=omega_max
    )
    scan = scan_time_optimal(problem, T_values, threshold, seeds=seeds)
    rep = scan.best_at_T_min
    if rep is None:
        rep = scan.reports[int(np.argmin(scan.epsilon))]
        log.info("%s: threshold %.1e not met, best eps %.3e", kind.value, threshold, rep.epsilon)
    return GateBuild(kind, system, rep.grid, rep.epsilon, scan=scan)


def fixed_time_gate(
    system: GateSystem, T: float, N: int = 100, seeds: int = 5, kind: GateKind = GateKind.NAD
) -> GateBuild:
    rep = optimize_multistart(OptimizationProblem(system, T=T, N=N), seeds=seeds)
    return GateBuild(kind, system, rep.grid, rep.epsilon)


def adiabatic_gate(
    system: GateSystem,
    slowdown: float | None = None,
    target: float = 1e-6,
    sigma_over_T: float = DEFAULT_SIGMA_RATIO,
    omega_max: float = OMEGA_MAX,
) -> GateBuild:
    """pi-2pi-pi gate; with ``slowdown=None`` the smallest ladder value whose
    coherent error is below ``target`` is used."""
    if system.mechanism is not Mechanism.DARK_STATE:
        raise ParameterError("the adiabatic protocol needs the dark-state mechanism")
    ladder = (slowdown,) if slowdown is not None else SLOWDOWN_LADDER
    for s in ladder:
        grid = make_pi2pipi(omega_max, sigma_over_T, slowdown=s).to_grid(omega_max=omega_max)
        eps = trace_fidelity(propagate(system, grid)).epsilon
        if eps < target or slowdown is not None:
            return GateBuild(GateKind.AD, system, grid, eps, slowdown=s)
    log.warning("no slowdown up to %.0f reaches eps < %.1e", ladder[-1], target)
    return GateBuild(GateKind.AD, system, grid, eps, slowdown=ladder[-1])


def build_gate(
    kind,
    species: SpeciesData,
    R: float,
    threshold: float = 1e-6,
    T_values=None,
    N: int = 100,
    seeds: int = 5,
    ad_target: float = 1e-6,
) -> GateBuild:
    kind = GateKind(kind)
    if kind is GateKind.BLOCKADE:
        sys = GateSystem.from_species(Mechanism.BLOCKADE, species, R)
        return time_optimal_gate(sys, T_values, threshold, N, seeds, kind=kind)
    if kind is GateKind.IDEAL:
        return time_optimal_gate(GateSystem.ideal(), T_values, threshold, N, seeds, kind=kind)
    sys = GateSystem.from_species(Mechanism.DARK_STATE, species, R)
    if kind is GateKind.NAD:
        return time_optimal_gate(sys, T_values, threshold, N, seeds, kind=kind)
    return adiabatic_gate(sys, target=ad_target)


def build_gate_set(species: SpeciesData, R: float, **kw) -> dict:
    return {k: build_gate(k, species, R, **kw) for k in GATE_KINDS}
