"""Precomputed atomic data: interaction coefficients and Rydberg decay rates.

Species files are JSON with keys ``species, n, C6, C3, Gamma_P_kHz,
Gamma_Sminus_kHz, Gamma_Splus_kHz``. ``C6`` is in rad/us um^6 and ``C3`` in
rad/us um^3; decay rates are tabulated in kHz and converted to rad/us on load.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .model import KHZ, OMEGA_MAX

log = logging.getLogger(__name__)

REQUIRED_KEYS = (
    "species",
    "n",
    "C6",
    "C3",
    "Gamma_P_kHz",
    "Gamma_Sminus_kHz",
    "Gamma_Splus_kHz",
)

BUNDLED_N = (40, 50, 60, 70)


class IngestionError(ValueError):
    """A species file is missing a key, malformed, or holds an invalid value."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


@dataclass(frozen=True)
class SpeciesData:
    species: str
    n: int
    C6: float
    C3: float
    Gamma_P: float
    Gamma_Splus: float
    Gamma_Sminus: float

    def __post_init__(self):
        for key in ("C6", "C3", "Gamma_P", "Gamma_Splus", "Gamma_Sminus"):
            value = getattr(self, key)
            if not value > 0:
                raise IngestionError(f"{key} must be strictly positive, got {value!r}", key)
        if self.n < 1:
            raise IngestionError(f"n must be a positive integer, got {self.n!r}", "n")

    def V(self, R: float) -> float:
        """Van der Waals shift C6/R^6 in rad/us."""
        return self.C6 / R**6

    def B(self, R: float) -> float:
        """Resonant dipole-dipole coupling C3/R^3 in rad/us."""
        return self.C3 / R**3

    def with_rates_scaled(self, factor: float) -> SpeciesData:
        return SpeciesData(
            self.species,
            self.n,
            self.C6,
            self.C3,
            self.Gamma_P * factor,
            self.Gamma_Splus * factor,
            self.Gamma_Sminus * factor,
        )

    def to_dict(self) -> dict:
        return {
            "species": self.species,
            "n": self.n,
            "C6": self.C6,
            "C3": self.C3,
            "Gamma_P_kHz": self.Gamma_P / KHZ,
            "Gamma_Sminus_kHz": self.Gamma_Sminus / KHZ,
            "Gamma_Splus_kHz": self.Gamma_Splus / KHZ,
        }


def parse_species(d: dict) -> SpeciesData:
    if not isinstance(d, dict):
        raise IngestionError("species file must hold a JSON object")
    for key in REQUIRED_KEYS:
        if key not in d:
            raise IngestionError(f"missing key {key!r}", key)
    for key in sorted(set(d) - set(REQUIRED_KEYS)):
        log.warning("ignoring unknown species key %r", key)
    values = {}
    for key in REQUIRED_KEYS[2:]:
        try:
            values[key] = float(d[key])
        except (TypeError, ValueError):
            raise IngestionError(f"key {key!r} is not a number: {d[key]!r}", key) from None
        if not values[key] > 0:
            raise IngestionError(f"key {key!r} must be strictly positive, got {d[key]!r}", key)
    try:
        n = int(d["n"])
    except (TypeError, ValueError):
        raise IngestionError(f"key 'n' is not an integer: {d['n']!r}", "n") from None
    return SpeciesData(
        species=str(d["species"]),
        n=n,
        C6=values["C6"],
        C3=values["C3"],
        Gamma_P=values["Gamma_P_kHz"] * KHZ,
        Gamma_Splus=values["Gamma_Splus_kHz"] * KHZ,
        Gamma_Sminus=values["Gamma_Sminus_kHz"] * KHZ,
    )


def load_species(path) -> SpeciesData:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IngestionError(f"cannot read species file {path}: {exc}") from exc
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IngestionError(f"malformed species file {path}: {exc}") from exc
    return parse_species(d)


def save_species(data: SpeciesData, path) -> None:
    Path(path).write_text(json.dumps(data.to_dict(), indent=2) + "\n")


def bundled_species(n: int = 70) -> SpeciesData:
    """Cs-133 data shipped with the package, for n in 40, 50, 60, 70."""
    if n not in BUNDLED_N:
        raise IngestionError(f"no bundled data for n={n}; available: {BUNDLED_N}", "n")
    text = resources.files("rydgate.data").joinpath(f"cs133_n{n}.json").read_text()
    return parse_species(json.loads(text))


def blockade_radius(data: SpeciesData, omega_max: float = OMEGA_MAX) -> float:
    """Distance in um where the van der Waals shift equals ``omega_max``."""
    if not omega_max > 0:
        raise ValueError("omega_max must be positive")
    return (data.C6 / omega_max) ** (1.0 / 6.0)
