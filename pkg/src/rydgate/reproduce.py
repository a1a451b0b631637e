"""Per-figure data pipelines and the CSV writer they share."""

from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .atomdata import BUNDLED_N, SpeciesData, bundled_species
from .gates import GATE_KINDS, T_UNIT, GateKind, build_gate, build_gate_set
from .grape import OptimizationProblem, optimize_multistart
from .hamiltonians import DecayRates, GateSystem, Mechanism
from .model import ParameterError
from .noise import (
    IntensityNoiseSpec,
    LaserNoiseModel,
    PhaseTraceSampler,
    decay_infidelity,
    intensity_noise_curve,
    phase_noise_infidelity,
    sample_phase_traces,
)
from .propagation import rr_population_trace

log = logging.getLogger(__name__)

FIGURES = ("fig2", "fig3", "fig4", "fig5")
DECAY_R = 4.2  # um, the comparison distance of the decay study


class UnknownFigureError(ParameterError):
    pass


@dataclass(frozen=True)
class Profile:
    name: str
    fig2_R_darkstate: tuple
    fig2_R_blockade: tuple
    fig2_T: tuple  # units of 2 pi / Omega_max
    seeds: int
    fig4_R: tuple
    fig4_samples: int
    sampler: PhaseTraceSampler
    intensity_points: int


PROFILES = {
    "desk": Profile(
        "desk",
        fig2_R_darkstate=(2.0, 4.0, 6.0, 8.0, 10.0),
        fig2_R_blockade=(2.0, 3.0, 4.0, 5.0, 6.0),
        fig2_T=(1.0, 1.2, 1.4, 1.6, 1.8, 2.0),
        seeds=2,
        fig4_R=(2.0, 3.0, 4.0, 5.0, 6.0),
        fig4_samples=50,
        sampler=PhaseTraceSampler.profile("desk"),
        intensity_points=31,
    ),
    "paper": Profile(
        "paper",
        fig2_R_darkstate=tuple(np.round(np.arange(1.0, 12.01, 0.5), 3)),
        fig2_R_blockade=tuple(np.round(np.arange(1.0, 7.01, 0.25), 3)),
        fig2_T=tuple(np.round(np.arange(1.0, 3.001, 0.05), 3)),
        seeds=5,
        fig4_R=tuple(np.round(np.arange(1.0, 9.01, 0.5), 3)),
        fig4_samples=500,
        sampler=PhaseTraceSampler.profile("paper"),
        intensity_points=61,
    ),
}


def get_profile(name: str) -> Profile:
    try:
        return PROFILES[name]
    except KeyError:
        raise ParameterError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}") from None


def worker_count(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("RYDGATE_THREADS")
    return max(1, int(env)) if env else 1


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows, sort: bool = True) -> Path:
    """Header plus rows, sorted by the leading columns for reproducibility."""
    path = Path(path)
    rows = [tuple(r) for r in rows]
    if sort:
        rows.sort(key=lambda r: tuple(str(x) if isinstance(x, str) else float(x) for x in r))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])
    return path


# -- (R, T) sweep -----------------------------------------------------------

SWEEP_HEADER = ("mechanism", "R_um", "T_units", "epsilon", "seeds")


def _sweep_point(args):
    mech, species, R, T_units, N, seeds, stop = args
    sys = GateSystem.from_species(mech, species, R)
    p = OptimizationProblem(sys, T=T_units * T_UNIT, N=N)
    rep = optimize_multistart(p, seeds=seeds, stop_below=stop)
    return (Mechanism.parse(mech).value, float(R), float(T_units), rep.epsilon, seeds)


def sweep_rt(
    mechanism,
    species: SpeciesData,
    R_values,
    T_units,
    N: int = 100,
    seeds: int = 5,
    workers: int | None = None,
    stop_below: float | None = 1e-10,
) -> list:
    """Optimised infidelity on every ``(R, T)`` pair (``T`` in units of ``2 pi/Omega_max``)."""
    R_values, T_units = list(R_values), list(T_units)
    if not R_values or not T_units:
        raise ParameterError("R and T grids must be non-empty")
    jobs = [(mechanism, species, R, T, N, seeds, stop_below) for R in R_values for T in T_units]
    w = worker_count(workers)
    if w == 1:
        rows = [_sweep_point(j) for j in jobs]
    else:
        with ProcessPoolExecutor(w) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    return sorted(rows, key=lambda r: (r[1], r[2]))


# -- figure pipelines -------------------------------------------------------


def fig2(outdir: Path, profile: Profile, seed: int = 0, species=None) -> list[Path]:
    species = species or bundled_species(70)
    out = []
    for mech, Rs in (
        (Mechanism.DARK_STATE, profile.fig2_R_darkstate),
        (Mechanism.BLOCKADE, profile.fig2_R_blockade),
    ):
        rows = sweep_rt(mech, species, Rs, profile.fig2_T, seeds=profile.seeds)
        out.append(write_csv(outdir / f"fig2_{mech.value}.csv", SWEEP_HEADER, rows))
    return out


def decay_gates(species: SpeciesData | None = None, R: float = DECAY_R, seeds: int = 5) -> dict:
    """The three gates used for the decay comparison (threshold 1e-8)."""
    species = species or bundled_species(70)
    return build_gate_set(species, R, threshold=1e-8, seeds=seeds)


def decay_table(gates: dict, n_values=BUNDLED_N) -> list:
    """Rows ``(n, eps_NAd, eps_Ad, eps_blockade)``; the pulses stay fixed and
    only the decay rates follow ``n``."""
    rows = []
    for n in n_values:
        rates = DecayRates.from_species(bundled_species(n))
        eps = {k: decay_infidelity(g.system, g.grid, rates) for k, g in gates.items()}
        rows.append((n, eps[GateKind.NAD], eps[GateKind.AD], eps[GateKind.BLOCKADE]))
    return rows


def fig3(outdir: Path, profile: Profile, seed: int = 0, species=None) -> list[Path]:
    gates = decay_gates(species, seeds=profile.seeds)
    out = [
        write_csv(
            outdir / "fig3_decay.csv",
            ("n", "eps_NAd", "eps_Ad", "eps_blockade"),
            decay_table(gates),
        )
    ]
    for k, g in gates.items():
        tr = rr_population_trace(g.system, g.grid)
        path = outdir / f"fig3_prr_{k.value}.csv"
        tr.write_csv(path)
        out.append(path)
    return out


def fig4(
    outdir: Path, profile: Profile, seed: int = 0, species=None, model=None
) -> list[Path]:
    species = species or bundled_species(70)
    model = model or LaserNoiseModel()
    traces = sample_phase_traces(model, profile.sampler, profile.fig4_samples, seed)
    rows = []
    for R in profile.fig4_R:
        for k, g in build_gate_set(species, R, seeds=profile.seeds).items():
            st = phase_noise_infidelity(g.system, g.grid, traces, profile.sampler.dt, seed=seed)
            rows.append((k.value, float(R), st.mean, st.std, st.count, g.epsilon))
    header = ("gate", "R_um", "eps_mean", "eps_std", "samples", "eps_noiseless")
    return [write_csv(outdir / "fig4_phase_noise.csv", header, rows)]


def fig5(outdir: Path, profile: Profile, seed: int = 0, species=None) -> list[Path]:
    species = species or bundled_species(70)
    spec = IntensityNoiseSpec.symmetric(0.03, profile.intensity_points)
    out = []
    for k in GATE_KINDS:
        g = build_gate(k, species, DECAY_R, seeds=profile.seeds)
        c = intensity_noise_curve(g.system, g.grid, spec)
        rows = list(zip(c.delta.tolist(), c.epsilon.tolist()))
        out.append(write_csv(outdir / f"fig5_intensity_{k.value}.csv", ("delta", "epsilon"), rows))
    return out


PIPELINES = {"fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5}


def reproduce(figure: str, outdir, profile: str = "desk", seed: int = 0) -> list[Path]:
    if figure not in PIPELINES:
        raise UnknownFigureError(
            f"unknown figure id {figure!r}; choose from {', '.join(FIGURES)}"
        )
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    return PIPELINES[figure](outdir, get_profile(profile), seed)
