"""Invariant-subspace Hamiltonian blocks for the three gate mechanisms.

Basis orderings:

* Q01: ``|01>, |0r>``  (target driven)
* Q10: ``|10>, |r0>``  (control driven)
* Q11 blockade: ``|11>, |1r>, |r1>, |rr>``
* Q11 dark state: ``|11>, |1r>, |r1>, |rr>, |(r+r-)>``
* Q11 ideal blockade: ``|11>, |1r>, |r1>``

The laser term ``(Omega/2) e^{i phi} |1><r| + h.c.`` places
``(Omega/2) e^{-i phi}`` on the ``<r|H|1>`` element.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .atomdata import SpeciesData
from .model import ControlGrid, ParameterError, SubspaceLabel


class Mechanism(str, enum.Enum):
    BLOCKADE = "blockade"
    DARK_STATE = "darkstate"
    IDEAL_BLOCKADE = "ideal"

    @classmethod
    def parse(cls, value) -> Mechanism:
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("-", "").replace("_", "")
        aliases = {
            "blockade": cls.BLOCKADE,
            "vdw": cls.BLOCKADE,
            "darkstate": cls.DARK_STATE,
            "dark": cls.DARK_STATE,
            "ideal": cls.IDEAL_BLOCKADE,
            "idealblockade": cls.IDEAL_BLOCKADE,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ParameterError(f"unknown mechanism {value!r}") from None


Q11_DIM = {Mechanism.BLOCKADE: 4, Mechanism.DARK_STATE: 5, Mechanism.IDEAL_BLOCKADE: 3}
Q11_BASIS = ("11", "1r", "r1", "rr", "(r+r-)")
RR = 3  # index of |rr> in the Q11 basis


@dataclass(frozen=True)
class GateSystem:
    """Gate mechanism plus its interaction strengths (rad/us).

    ``V`` is used only by the blockade mechanism, ``B`` and ``Delta`` only by
    the dark-state mechanism. ``R`` and ``species`` are bookkeeping.
    """

    mechanism: Mechanism
    V: float = 0.0
    B: float = 0.0
    Delta: float = 0.0
    R: float | None = None
    species: SpeciesData | None = None

    def __post_init__(self):
        object.__setattr__(self, "mechanism", Mechanism.parse(self.mechanism))

    @classmethod
    def ideal(cls) -> GateSystem:
        return cls(Mechanism.IDEAL_BLOCKADE)

    @classmethod
    def blockade(cls, V: float) -> GateSystem:
        return cls(Mechanism.BLOCKADE, V=V)

    @classmethod
    def dark_state(cls, B: float, Delta: float = 0.0) -> GateSystem:
        return cls(Mechanism.DARK_STATE, B=B, Delta=Delta)

    @classmethod
    def from_species(
        cls, mechanism, species: SpeciesData, R: float, Delta: float = 0.0
    ) -> GateSystem:
        if not R > 0:
            raise ParameterError(f"distance R must be positive, got {R!r}")
        mech = Mechanism.parse(mechanism)
        return cls(
            mech,
            V=species.V(R),
            B=species.B(R),
            Delta=Delta,
            R=R,
            species=species,
        )

    def q11_dim(self) -> int:
        return Q11_DIM[self.mechanism]

    def dims(self) -> dict:
        return {
            SubspaceLabel.Q00: 1,
            SubspaceLabel.Q01: 2,
            SubspaceLabel.Q10: 2,
            SubspaceLabel.Q11: self.q11_dim(),
        }


@dataclass(frozen=True)
class DecayRates:
    """Single-atom Rydberg decay rates in rad/us.

    ``Gamma_r`` is for the driven state ``|r>``; ``Gamma_plus``/``Gamma_minus``
    are for the Forster partner states.
    """

    Gamma_r: float = 0.0
    Gamma_plus: float = 0.0
    Gamma_minus: float = 0.0

    def __post_init__(self):
        for name in ("Gamma_r", "Gamma_plus", "Gamma_minus"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be non-negative")

    @classmethod
    def from_species(cls, species: SpeciesData) -> DecayRates:
        return cls(species.Gamma_P, species.Gamma_Splus, species.Gamma_Sminus)

    def scaled(self, factor: float) -> DecayRates:
        return DecayRates(
            self.Gamma_r * factor, self.Gamma_plus * factor, self.Gamma_minus * factor
        )

    def level_rates(self, label: SubspaceLabel, mechanism: Mechanism) -> np.ndarray:
        """Population decay rate of each basis level of a block."""
        g = self.Gamma_r
        if label is SubspaceLabel.Q00:
            return np.zeros(1)
        if label in (SubspaceLabel.Q01, SubspaceLabel.Q10):
            return np.array([0.0, g])
        rates = np.array([0.0, g, g, 2 * g, self.Gamma_plus + self.Gamma_minus])
        return rates[: Q11_DIM[mechanism]]


@dataclass(frozen=True)
class HamiltonianBlock:
    label: SubspaceLabel
    matrix: np.ndarray
    decay: np.ndarray | None = None  # anti-Hermitian part, -i/2 diag(rates)

    @property
    def generator(self) -> np.ndarray:
        """Full (possibly non-Hermitian) generator ``H + decay``."""
        if self.decay is None:
            return self.matrix
        return self.matrix + self.decay


@dataclass(frozen=True)
class BlockStructure:
    """``H = H0 + (wC/2)(e^{-i pC} Mc + h.c.) + (wT/2)(e^{-i pT} Mt + h.c.)``."""

    label: SubspaceLabel
    H0: np.ndarray
    Mc: np.ndarray
    Mt: np.ndarray

    @property
    def dim(self) -> int:
        return self.H0.shape[0]

    def matrices(self, omega_C, omega_T, phi_C, phi_T) -> np.ndarray:
        """Hermitian matrices for arrays of controls, shape ``(N, d, d)``."""
        omega_C = np.atleast_1d(np.asarray(omega_C, dtype=float))
        omega_T = np.atleast_1d(np.asarray(omega_T, dtype=float))
        cC = (0.5 * omega_C * np.exp(-1j * np.atleast_1d(phi_C)))[:, None, None]
        cT = (0.5 * omega_T * np.exp(-1j * np.atleast_1d(phi_T)))[:, None, None]
        lower = cC * self.Mc + cT * self.Mt
        return self.H0 + lower + np.conj(np.swapaxes(lower, -1, -2))


def block_structure(sys: GateSystem, label: SubspaceLabel) -> BlockStructure:
    label = SubspaceLabel(label)
    if label is SubspaceLabel.Q00:
        z = np.zeros((1, 1), dtype=complex)
        return BlockStructure(label, z, z.copy(), z.copy())
    if label in (SubspaceLabel.Q01, SubspaceLabel.Q10):
        z = np.zeros((2, 2), dtype=complex)
        drive = np.zeros((2, 2), dtype=complex)
        drive[1, 0] = 1.0
        if label is SubspaceLabel.Q01:
            return BlockStructure(label, z, z.copy(), drive)
        return BlockStructure(label, z, drive, z.copy())

    d = sys.q11_dim()
    H0 = np.zeros((d, d), dtype=complex)
    Mc = np.zeros((d, d), dtype=complex)
    Mt = np.zeros((d, d), dtype=complex)
    Mt[1, 0] = 1.0  # |11> -> |1r>
    Mc[2, 0] = 1.0  # |11> -> |r1>
    if d > 3:
        Mc[3, 1] = 1.0  # |1r> -> |rr>
        Mt[3, 2] = 1.0  # |r1> -> |rr>
    if sys.mechanism is Mechanism.BLOCKADE:
        H0[RR, RR] = sys.V
    elif sys.mechanism is Mechanism.DARK_STATE:
        H0[RR, RR] = -sys.Delta
        H0[4, RR] = H0[RR, 4] = sys.B
    return BlockStructure(label, H0, Mc, Mt)


def decay_matrix(
    rates: DecayRates | None, sys: GateSystem, label: SubspaceLabel
) -> np.ndarray | None:
    if rates is None:
        return None
    return np.diag(-0.5j * rates.level_rates(SubspaceLabel(label), sys.mechanism))


def build_block(
    sys: GateSystem,
    label,
    omega_C: float,
    omega_T: float,
    phi_C: float = 0.0,
    phi_T: float = 0.0,
    decay: DecayRates | None = None,
) -> HamiltonianBlock:
    if omega_C < 0 or omega_T < 0:
        raise ParameterError("Rabi amplitudes must be non-negative")
    st = block_structure(sys, label)
    H = st.matrices(omega_C, omega_T, phi_C, phi_T)[0]
    return HamiltonianBlock(st.label, H, decay_matrix(decay, sys, st.label))


ACTIVE_LABELS = (SubspaceLabel.Q01, SubspaceLabel.Q10, SubspaceLabel.Q11)


def assemble_full(
    sys: GateSystem, grid: ControlGrid, k: int, decay: DecayRates | None = None
) -> list[HamiltonianBlock]:
    """Blocks Q01, Q10, Q11 at the controls of bin ``k`` (Q00 is trivial)."""
    if not 0 <= k < grid.N:
        raise IndexError(f"bin index {k} out of range for N={grid.N}")
    return [
        build_block(
            sys,
            label,
            grid.omega_C[k],
            grid.omega_T[k],
            grid.phi_C[k],
            grid.phi_T[k],
            decay=decay,
        )
        for label in ACTIVE_LABELS
    ]
