"""Core value types shared across the package.

Unit convention (hbar = 1 throughout):

* angular frequencies and energies in rad/us
* times in us
* distances in um

With times in microseconds, ``2*pi*10`` rad/us is a 2pi x 10 MHz Rabi frequency.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

TWO_PI = 2.0 * np.pi

#: Default peak Rabi frequency, 2pi x 10 MHz in rad/us.
OMEGA_MAX = TWO_PI * 10.0

#: kHz -> rad/us
KHZ = TWO_PI * 1e-3


class ParameterError(ValueError):
    """Raised for out-of-range physical or numerical parameters."""


class SubspaceLabel(str, enum.Enum):
    Q00 = "Q00"
    Q01 = "Q01"
    Q10 = "Q10"
    Q11 = "Q11"


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ControlGrid:
    """Piecewise-constant controls on ``N`` equal bins over ``[0, T]``.

    Bin ``k`` covers ``[k*dt, (k+1)*dt)``. Amplitudes are Rabi frequencies in
    rad/us, phases in rad. Arrays are stored read-only.
    """

    T: float
    omega_C: np.ndarray
    omega_T: np.ndarray
    phi_C: np.ndarray
    phi_T: np.ndarray
    omega_max: float = field(default=OMEGA_MAX)

    def __post_init__(self):
        if not np.isfinite(self.T) or self.T <= 0:
            raise ParameterError(f"duration T must be positive, got {self.T!r}")
        arrays = {}
        for name in ("omega_C", "omega_T", "phi_C", "phi_T"):
            arr = _frozen(getattr(self, name))
            if arr.ndim != 1:
                raise ParameterError(f"{name} must be one-dimensional")
            arrays[name] = arr
        n = {a.size for a in arrays.values()}
        if len(n) != 1 or 0 in n:
            raise ParameterError("control arrays must share a positive length")
        for name in ("omega_C", "omega_T"):
            a = arrays[name]
            if np.any(a < 0) or np.any(a > self.omega_max * (1 + 1e-12)):
                raise ParameterError(
                    f"{name} outside the box [0, {self.omega_max:g}] rad/us"
                )
        for name, arr in arrays.items():
            object.__setattr__(self, name, arr)

    @property
    def N(self) -> int:
        return self.omega_C.size

    @property
    def dt(self) -> float:
        return self.T / self.N

    @property
    def times(self) -> np.ndarray:
        """Bin boundaries ``t_0 = 0, ..., t_N = T``."""
        return np.linspace(0.0, self.T, self.N + 1)

    def replace(self, **changes) -> ControlGrid:
        kw = dict(
            T=self.T,
            omega_C=self.omega_C,
            omega_T=self.omega_T,
            phi_C=self.phi_C,
            phi_T=self.phi_T,
            omega_max=self.omega_max,
        )
        kw.update(changes)
        return ControlGrid(**kw)

    def to_dict(self) -> dict:
        return {
            "T": float(self.T),
            "N": int(self.N),
            "omega_C": self.omega_C.tolist(),
            "omega_T": self.omega_T.tolist(),
            "phi_C": self.phi_C.tolist(),
            "phi_T": self.phi_T.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict, omega_max: float = OMEGA_MAX) -> ControlGrid:
        grid = cls(
            T=float(d["T"]),
            omega_C=d["omega_C"],
            omega_T=d["omega_T"],
            phi_C=d["phi_C"],
            phi_T=d["phi_T"],
            omega_max=omega_max,
        )
        if "N" in d and int(d["N"]) != grid.N:
            raise ParameterError(f"N={d['N']} disagrees with array length {grid.N}")
        return grid

    def to_json(self) -> str:
        # repr-based float formatting in json round-trips doubles exactly
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str, omega_max: float = OMEGA_MAX) -> ControlGrid:
        return cls.from_dict(json.loads(text), omega_max=omega_max)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path, omega_max: float = OMEGA_MAX) -> ControlGrid:
        return cls.from_json(Path(path).read_text(), omega_max=omega_max)

    def __eq__(self, other):
        if not isinstance(other, ControlGrid):
            return NotImplemented
        return self.T == other.T and all(
            np.array_equal(getattr(self, n), getattr(other, n))
            for n in ("omega_C", "omega_T", "phi_C", "phi_T")
        )

    __hash__ = None


def make_uniform_grid(
    T: float, N: int, omega: float, phi: float = 0.0, omega_max: float = OMEGA_MAX
) -> ControlGrid:
    """Global pulse with the same constant ``(omega, phi)`` on both atoms."""
    if int(N) != N or N < 1:
        raise ParameterError(f"bin count N must be a positive integer, got {N!r}")
    if not 0 <= omega <= omega_max:
        raise ParameterError(f"omega={omega:g} outside [0, {omega_max:g}]")
    N = int(N)
    amp = np.full(N, float(omega))
    ph = np.full(N, float(phi))
    return ControlGrid(T, amp, amp, ph, ph, omega_max=omega_max)


def global_phase_grid(
    T: float, phi, omega: float = OMEGA_MAX, omega_max: float = OMEGA_MAX
) -> ControlGrid:
    """Global pulse at constant amplitude with a per-bin phase profile."""
    phi = np.asarray(phi, dtype=float)
    amp = np.full(phi.size, float(omega))
    return ControlGrid(T, amp, amp, phi, phi, omega_max=omega_max)


@dataclass(frozen=True)
class GateTarget:
    """CZ target ``diag(1, e^{i th1}, e^{i th2}, e^{i(th1+th2+pi)})``.

    The single-qubit phases are free and fixed only when a fidelity is evaluated.
    """

    kind: str = "CZ"
    theta1: float = 0.0
    theta2: float = 0.0

    def diagonal(self) -> np.ndarray:
        t1, t2 = self.theta1, self.theta2
        return np.exp(1j * np.array([0.0, t1, t2, t1 + t2 + np.pi]))
