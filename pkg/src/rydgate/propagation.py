"""Piecewise-constant propagation of the invariant-subspace blocks."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .hamiltonians import (
    ACTIVE_LABELS,
    RR,
    DecayRates,
    GateSystem,
    block_structure,
    decay_matrix,
)
from .model import ControlGrid, SubspaceLabel


class PropagationError(ArithmeticError):
    def __init__(self, message: str, bin_index: int | None = None):
        super().__init__(message)
        self.bin_index = bin_index


def bin_generators(
    sys: GateSystem, label, grid: ControlGrid, decay: DecayRates | None = None
) -> np.ndarray:
    """Generator of every bin, shape ``(N, d, d)``."""
    st = block_structure(sys, label)
    H = st.matrices(grid.omega_C, grid.omega_T, grid.phi_C, grid.phi_T)
    D = decay_matrix(decay, sys, st.label)
    if D is not None:
        H = H + D
    return H


def hermitian_steps(H: np.ndarray, dt: float):
    """``exp(-i H dt)`` for a stack of Hermitian matrices via eigh.

    Returns ``(U, w, V)`` with ``H = V diag(w) V^dag``.
    """
    w, V = np.linalg.eigh(H)
    phases = np.exp(-1j * w * dt)
    U = (V * phases[:, None, :]) @ np.conj(np.swapaxes(V, -1, -2))
    # one Newton-Schulz step removes the ~1e-16 per-bin bias of the
    # reconstruction, which would otherwise accumulate linearly over bins
    eye = np.eye(U.shape[-1])
    U = U @ (1.5 * eye - 0.5 * (np.conj(np.swapaxes(U, -1, -2)) @ U))
    return U, w, V


def general_steps(G: np.ndarray, dt: float) -> np.ndarray:
    """``exp(-i G dt)`` for non-Hermitian generators (Pade scaling and squaring)."""
    U = scipy.linalg.expm(-1j * dt * G)
    bad = ~np.all(np.isfinite(U), axis=(-1, -2))
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        raise PropagationError(f"matrix exponential failed at bin {k}", k)
    return U


def step_operators(
    sys: GateSystem, label, grid: ControlGrid, decay: DecayRates | None = None
) -> np.ndarray:
    G = bin_generators(sys, label, grid, decay)
    if decay is None:
        return hermitian_steps(G, grid.dt)[0]
    return general_steps(G, grid.dt)


def chain(steps: np.ndarray) -> np.ndarray:
    """Time-ordered product ``U_{N-1} ... U_1 U_0``."""
    U = np.eye(steps.shape[-1], dtype=complex)
    for Uk in steps:
        U = Uk @ U
    return U


@dataclass
class PropagationResult:
    U: dict
    steps: dict | None = None
    decay: DecayRates | None = None
    grid: ControlGrid | None = field(default=None, repr=False)
    system: GateSystem | None = field(default=None, repr=False)

    def diagonal_amplitudes(self) -> np.ndarray:
        """``(u00, u01, u10, u11)``: each block's return amplitude of its
        computational state."""
        return np.array(
            [
                1.0 + 0j,
                self.U[SubspaceLabel.Q01][0, 0],
                self.U[SubspaceLabel.Q10][0, 0],
                self.U[SubspaceLabel.Q11][0, 0],
            ]
        )


def propagate(
    sys: GateSystem,
    grid: ControlGrid,
    decay: DecayRates | None = None,
    store_steps: bool = False,
) -> PropagationResult:
    U, steps = {SubspaceLabel.Q00: np.eye(1, dtype=complex)}, {}
    for label in ACTIVE_LABELS:
        S = step_operators(sys, label, grid, decay)
        U[label] = chain(S)
        if store_steps:
            steps[label] = S
    return PropagationResult(
        U, steps if store_steps else None, decay=decay, grid=grid, system=sys
    )


def evolve_state(
    sys: GateSystem,
    grid: ControlGrid,
    label=SubspaceLabel.Q11,
    initial=0,
    decay: DecayRates | None = None,
) -> np.ndarray:
    """State at every bin boundary, shape ``(N + 1, d)``.

    ``initial`` is a basis index of the block or a full state vector.
    """
    S = step_operators(sys, label, grid, decay)
    d = S.shape[-1]
    if np.ndim(initial) == 0:
        psi = np.zeros(d, dtype=complex)
        psi[int(initial)] = 1.0
    else:
        psi = np.asarray(initial, dtype=complex)
    out = np.empty((grid.N + 1, d), dtype=complex)
    out[0] = psi
    for k, Uk in enumerate(S):
        psi = Uk @ psi
        out[k + 1] = psi
    return out


@dataclass(frozen=True)
class RydbergPopulationTrace:
    times: np.ndarray
    P_rr: np.ndarray
    populations: np.ndarray | None = None

    def write_csv(self, path, all_populations: bool = False) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            header = ["t", "P_rr"]
            if all_populations and self.populations is not None:
                header += [f"P_{i}" for i in range(self.populations.shape[1])]
            w.writerow(header)
            for i, t in enumerate(self.times):
                row = [repr(float(t)), repr(float(self.P_rr[i]))]
                if all_populations and self.populations is not None:
                    row += [repr(float(p)) for p in self.populations[i]]
                w.writerow(row)


def rr_population_trace(
    sys: GateSystem,
    grid: ControlGrid,
    initial=0,
    decay: DecayRates | None = None,
) -> RydbergPopulationTrace:
    """Population of ``|rr>`` at every bin boundary, starting in ``|11>``."""
    traj = evolve_state(sys, grid, SubspaceLabel.Q11, initial, decay)
    pops = np.abs(traj) ** 2
    if traj.shape[1] > RR:
        prr = pops[:, RR]
    else:
        prr = np.zeros(grid.N + 1)
    return RydbergPopulationTrace(grid.times, prr, pops)
