"""Closed-form dark-state spectrum and second-order Schrieffer-Wolff reduction.

For the dark-state Q11 block (Delta = 0) the five eigenvalues are
``{0, +-eps_-, +-eps_+}`` with

    eps_pm = (1/2) sqrt(2 B^2 + Omega_C^2 + Omega_T^2 +- 2 calB^2),
    calB   = (B^4 + Omega_C^2 Omega_T^2)^(1/4).

The textbook eigenvectors divide by ``B Omega_C Omega_T``; here they are
evaluated with the denominators cleared and the one-sided drive limits handled
separately. With the drive convention of :mod:`rydgate.hamiltonians` the
laser phases enter as ``e^{+i phi}``, and the ``|11>`` component of the
bright vectors carries ``e^{i(phi_C + phi_T)}`` relative to ``|(r+r-)>``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonians import GateSystem, Mechanism, block_structure
from .model import ParameterError, SubspaceLabel

LOW = slice(0, 3)


class DegenerateSpectrumError(ArithmeticError):
    """The closed-form eigenvectors are undefined (both drives off)."""


class SingularityError(ArithmeticError):
    """The high-energy block is not invertible."""


def _dark_block(B, omega_C, omega_T, phi_C, phi_T) -> np.ndarray:
    st = block_structure(GateSystem.dark_state(B), SubspaceLabel.Q11)
    return st.matrices(omega_C, omega_T, phi_C, phi_T)[0]


@dataclass(frozen=True)
class ExactSpectrum:
    """Eigen-decomposition of the dark-state block.

    ``eigenvalues`` are ordered ``(0, +eps_-, -eps_-, +eps_+, -eps_+)`` and
    ``vectors[:, k]`` is the normalised eigenvector of ``eigenvalues[k]``
    (``None`` when both drives vanish).
    """

    B: float
    omega_C: float
    omega_T: float
    phi_C: float
    phi_T: float
    eps_minus: float
    eps_plus: float
    calB: float
    vectors: np.ndarray | None

    @property
    def eigenvalues(self) -> np.ndarray:
        em, ep = self.eps_minus, self.eps_plus
        return np.array([0.0, em, -em, ep, -ep])

    @property
    def N0(self) -> float:
        oc2, ot2 = self.omega_C**2, self.omega_T**2
        return float(np.sqrt(oc2 + ot2 + (oc2 - ot2) ** 2 / (4 * self.B**2)))

    def N_pm(self, sign: int) -> float:
        """Norm of the uncleared ``+-eps_+`` (sign=+1) or ``+-eps_-`` (sign=-1)
        vectors."""
        if sign not in (1, -1):
            raise ParameterError("sign must be +1 or -1")
        oc2, ot2, B2, cB2 = self.omega_C**2, self.omega_T**2, self.B**2, self.calB**2
        if oc2 * ot2 == 0:
            raise DegenerateSpectrumError("norm undefined for a one-sided drive")
        return float(
            np.sqrt((oc2 + ot2) * (B2 - sign * cB2) / (oc2 * ot2) + (oc2 + ot2 + 2 * sign * cB2) / B2)
        )

    def eigenvectors(self) -> np.ndarray:
        if self.vectors is None:
            raise DegenerateSpectrumError(
                "eigenvector formulas are singular when both drives vanish"
            )
        return self.vectors

    def matrix(self) -> np.ndarray:
        return _dark_block(self.B, self.omega_C, self.omega_T, self.phi_C, self.phi_T)


def exact_eigensystem(
    B: float, omega_C: float, omega_T: float, phi_C: float = 0.0, phi_T: float = 0.0
) -> ExactSpectrum:
    if not B > 0:
        raise ParameterError("B must be positive")
    if omega_C < 0 or omega_T < 0:
        raise ParameterError("Rabi amplitudes must be non-negative")
    oc, ot = float(omega_C), float(omega_T)
    oc2, ot2, B2 = oc * oc, ot * ot, B * B
    calB2 = np.sqrt(B2 * B2 + oc2 * ot2)
    # K_pm = B^2 +- calB^2; K_- written without cancellation
    K_plus = B2 + calB2
    K_minus = -oc2 * ot2 / K_plus
    eps_minus = 0.5 * np.sqrt(max(oc2 + ot2 + 2 * K_minus, 0.0))
    eps_plus = 0.5 * np.sqrt(oc2 + ot2 + 2 * K_plus)
    calB = float(np.sqrt(calB2))

    if oc == 0 and ot == 0:
        return ExactSpectrum(B, oc, ot, phi_C, phi_T, 0.0, float(B), calB, None)

    eC, eT = np.exp(1j * phi_C), np.exp(1j * phi_T)
    vecs = np.zeros((5, 5), dtype=complex)
    vecs[:, 0] = [0, -eC * oc, eT * ot, 0, (oc2 - ot2) / (2 * B)]

    def cleared(lam, K):
        # (2 B Omega_C Omega_T) times the textbook vector
        return np.array(
            [
                -2 * lam * K * eC * eT,
                -eC * (K - oc2) * ot,
                -eT * (K - ot2) * oc,
                2 * lam * oc * ot,
                2 * B * oc * ot,
            ]
        )

    for k, lam in ((1, eps_minus), (2, -eps_minus)):
        if oc and ot:
            vecs[:, k] = cleared(lam, K_plus)
        elif oc:  # only the control drives: |11> <-> |r1>
            vecs[:, k] = [2 * lam, 0, oc / eC, 0, 0]
        else:
            vecs[:, k] = [2 * lam, ot / eT, 0, 0, 0]
    for k, lam in ((3, eps_plus), (4, -eps_plus)):
        if oc and ot:
            vecs[:, k] = cleared(lam, K_minus)
        elif oc:  # |1r>, |rr>, |(r+r-)> chain
            vecs[:, k] = [0, 0.5 * eC * oc, 0, lam, B]
        else:
            vecs[:, k] = [0, 0, 0.5 * eT * ot, lam, B]
    # rescale before normalising so tiny drives do not underflow
    vecs /= np.max(np.abs(vecs), axis=0)
    vecs /= np.linalg.norm(vecs, axis=0)
    return ExactSpectrum(
        B, oc, ot, phi_C, phi_T, float(eps_minus), float(eps_plus), calB, vecs
    )


@dataclass(frozen=True)
class EffectiveHamiltonian:
    """Second-order reduction onto ``Span{|11>, |1r>, |r1>}``."""

    H_eff: np.ndarray
    H_L: np.ndarray
    H_H: np.ndarray
    V: np.ndarray

    @property
    def correction(self) -> np.ndarray:
        return self.H_eff - self.H_L

    @property
    def T_gen(self) -> np.ndarray:
        """Generator block ``T = i V H_H^{-1}``."""
        return 1j * self.V @ np.linalg.inv(self.H_H)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.H_eff)


def schrieffer_wolff(
    sys: GateSystem,
    omega_C: float,
    omega_T: float,
    phi_C: float = 0.0,
    phi_T: float = 0.0,
    cond_max: float = 1e12,
) -> EffectiveHamiltonian:
    st = block_structure(sys, SubspaceLabel.Q11)
    H = st.matrices(omega_C, omega_T, phi_C, phi_T)[0]
    H_L = H[LOW, LOW]
    if sys.mechanism is Mechanism.IDEAL_BLOCKADE:
        z = np.zeros((0, 0), dtype=complex)
        return EffectiveHamiltonian(H_L.copy(), H_L, z, np.zeros((3, 0), dtype=complex))
    H_H = H[3:, 3:]
    V = H[LOW, 3:]
    if not np.all(np.isfinite(H_H)) or np.linalg.cond(H_H) > cond_max:
        raise SingularityError("high-energy block is singular")
    corr = V @ np.linalg.solve(H_H, np.conj(V.T))
    H_eff = H_L - corr
    H_eff = 0.5 * (H_eff + np.conj(H_eff.T))
    return EffectiveHamiltonian(H_eff, H_L, H_H, V)


@dataclass(frozen=True)
class SWProbeTable:
    coupling: np.ndarray
    distance: np.ndarray
    flagged: np.ndarray

    def rows(self):
        return list(zip(self.coupling.tolist(), self.distance.tolist(), self.flagged.tolist()))

    def slope(self, lo: float | None = None, hi: float | None = None) -> float:
        """Least-squares log-log slope over unflagged rows in ``[lo, hi]``."""
        m = ~self.flagged & (self.distance > 0)
        if lo is not None:
            m &= self.coupling >= lo
        if hi is not None:
            m &= self.coupling <= hi
        if m.sum() < 2:
            raise ValueError("fewer than two usable rows for the slope fit")
        return float(np.polyfit(np.log(self.coupling[m]), np.log(self.distance[m]), 1)[0])


def _with_coupling(sys: GateSystem, value: float) -> GateSystem:
    if sys.mechanism is Mechanism.BLOCKADE:
        return GateSystem.blockade(value)
    if sys.mechanism is Mechanism.DARK_STATE:
        return GateSystem.dark_state(value, sys.Delta)
    raise ParameterError("the probe needs a finite-interaction mechanism")


def sw_accuracy_probe(sys: GateSystem, controls, B_sweep, gap_ratio: float = 2.0) -> SWProbeTable:
    """Distance between the exact low-energy levels and the ``H_eff`` levels.

    ``controls`` is ``(omega_C, omega_T, phi_C, phi_T)``; ``B_sweep`` sets the
    interaction (``B`` for the dark state, ``V`` for the blockade). The low
    levels are the three eigenvalues of smallest magnitude; a row is flagged
    when the next level is not at least ``gap_ratio`` times further out.
    """
    B_sweep = np.asarray(B_sweep, dtype=float)
    if B_sweep.size == 0 or np.any(B_sweep <= 0) or np.any(np.diff(B_sweep) <= 0):
        raise ParameterError("B_sweep must be positive and strictly ascending")
    wC, wT, pC, pT = controls
    dist = np.empty(B_sweep.size)
    flag = np.zeros(B_sweep.size, dtype=bool)
    for i, b in enumerate(B_sweep):
        s = _with_coupling(sys, b)
        H = block_structure(s, SubspaceLabel.Q11).matrices(wC, wT, pC, pT)[0]
        ev = np.linalg.eigvalsh(H)
        order = np.argsort(np.abs(ev))
        low, high = ev[order[:3]], np.abs(ev[order[3:]])
        flag[i] = high.min() < gap_ratio * np.abs(low).max()
        eff = schrieffer_wolff(s, wC, wT, pC, pT).eigenvalues()
        dist[i] = np.max(np.abs(np.sort(low) - np.sort(eff)))
    return SWProbeTable(B_sweep, dist, flag)
