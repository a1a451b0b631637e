"""Command-line front end.

Every command writes its artefact plus a ``<output>.meta.json`` sidecar with
the inputs, seeds, package version and a timestamp.
"""

from __future__ import annotations

import datetime as _dt
import json
import logging
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .atomdata import IngestionError, bundled_species, load_species
from .gates import GATE_KINDS, T_UNIT, GateKind, build_gate
from .grape import FULL, GLOBAL_PHASE, OptimizationProblem, optimize_multistart, scan_time_optimal
from .hamiltonians import DecayRates, GateSystem, Mechanism
from .model import OMEGA_MAX, ParameterError
from .noise import (
    IntensityNoiseSpec,
    LaserNoiseModel,
    decay_infidelity,
    intensity_noise_curve,
    phase_noise_infidelity,
    sample_phase_traces,
)
from .pulses import DEFAULT_SIGMA_RATIO, make_pi2pipi
from .reproduce import (
    FIGURES,
    SWEEP_HEADER,
    UnknownFigureError,
    get_profile,
    reproduce,
    sweep_rt,
    write_csv,
)
from .spectrum import exact_eigensystem


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {text!r}") from None


def _species(path, n=70):
    try:
        return load_species(path) if path else bundled_species(n)
    except (IngestionError, OSError) as exc:
        raise click.ClickException(f"species data: {exc}") from exc


def _check_writable(path: Path) -> None:
    parent = path.resolve().parent
    if not parent.is_dir():
        raise click.ClickException(f"output directory {parent} does not exist")


def _write_meta(out: Path, command: str, params: dict, failures=()) -> Path:
    meta = {
        "command": command,
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "params": {k: (str(v) if isinstance(v, Path) else v) for k, v in params.items()},
        "failures": list(failures),
    }
    path = out.with_name(out.name + ".meta.json")
    path.write_text(json.dumps(meta, indent=2, sort_keys=True, default=str))
    return path


def _system(mechanism, species_path, R, n=70):
    mech = Mechanism.parse(mechanism)
    if mech is Mechanism.IDEAL_BLOCKADE:
        return GateSystem.ideal()
    if R is None:
        raise click.UsageError("--R is required for finite-interaction mechanisms")
    return GateSystem.from_species(mech, _species(species_path, n), R)


@click.group()
@click.version_option(__version__)
@click.option("-v", "--verbose", count=True, help="Increase log verbosity.")
def main(verbose):
    """Optimal-control CZ gates for Rydberg blockade and dark-state schemes."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


# -- pulse ------------------------------------------------------------------


@main.group()
def pulse():
    """Analytic pulse sequences."""


@pulse.command("pi2pipi")
@click.option("--theta", type=float, default=float(np.pi), show_default=True,
              help="Outer stage area in rad (middle stage gets twice this).")
@click.option("--sigma-ratio", type=float, default=DEFAULT_SIGMA_RATIO, show_default=True)
@click.option("--slowdown", type=float, default=1.0, show_default=True)
@click.option("--omega-max", type=float, default=OMEGA_MAX, show_default=True)
@click.option("--bins", type=int, default=None, help="Bin count (multiple of 4).")
@click.option("--out", type=click.Path(path_type=Path), required=True)
def pulse_pi2pipi(theta, sigma_ratio, slowdown, omega_max, bins, out):
    """Sample the smooth pi-2pi-pi sequence onto a control grid (JSON)."""
    _check_writable(out)
    try:
        sched = make_pi2pipi(omega_max, sigma_ratio, slowdown=slowdown, theta=theta)
        grid = sched.to_grid(bins, omega_max=omega_max)
    except ParameterError as exc:
        raise click.ClickException(str(exc)) from exc
    grid.save(out)
    _write_meta(out, "pulse pi2pipi", dict(theta=theta, sigma_ratio=sigma_ratio,
                slowdown=slowdown, omega_max=omega_max, bins=grid.N, T=grid.T))
    click.echo(f"T = {grid.T:.6g} us, N = {grid.N}")


# -- optimisation -----------------------------------------------------------


@main.command()
@click.option("--mechanism", required=True, help="blockade | darkstate | ideal")
@click.option("--R", "R", type=float, default=None, help="Interatomic distance (um).")
@click.option("--T", "T", type=float, required=True, help="Gate duration (us).")
@click.option("--bins", type=int, default=100, show_default=True)
@click.option("--seeds", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True, help="First seed.")
@click.option("--variables", type=click.Choice([GLOBAL_PHASE, FULL]), default=GLOBAL_PHASE,
              show_default=True)
@click.option("--species", "species_path", type=click.Path(exists=True), default=None)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def optimize(mechanism, R, T, bins, seeds, seed, variables, species_path, out):
    """Optimise a pulse at fixed duration and save the best grid (JSON)."""
    _check_writable(out)
    sys_ = _system(mechanism, species_path, R)
    p = OptimizationProblem(sys_, T=T, N=bins, variables=variables, seed=seed)
    rep = optimize_multistart(p, seeds=seeds)
    rep.grid.save(out)
    _write_meta(out, "optimize", dict(mechanism=mechanism, R=R, T=T, bins=bins, seeds=seeds,
                seed=seed, variables=variables, species=species_path, epsilon=rep.epsilon,
                iterations=rep.iterations, converged=rep.converged))
    click.echo(f"epsilon = {rep.epsilon:.6e}")


@main.command()
@click.option("--mechanism", required=True)
@click.option("--R", "R", type=float, default=None)
@click.option("--tmin", type=float, required=True, help="Units of 2 pi / Omega_max.")
@click.option("--tmax", type=float, required=True)
@click.option("--step", type=float, default=0.005, show_default=True)
@click.option("--threshold", type=float, default=1e-6, show_default=True)
@click.option("--bins", type=int, default=100, show_default=True)
@click.option("--seeds", type=int, default=5, show_default=True)
@click.option("--species", "species_path", type=click.Path(exists=True), default=None)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def scan(mechanism, R, tmin, tmax, step, threshold, bins, seeds, species_path, out):
    """Descending-T scan for the time-optimal gate (CSV)."""
    _check_writable(out)
    if not tmax > tmin > 0:
        raise click.BadParameter("need tmax > tmin > 0")
    sys_ = _system(mechanism, species_path, R)
    n = int(round((tmax - tmin) / step)) + 1
    Tu = np.round(tmax - step * np.arange(n), 10)
    Tu = Tu[Tu >= tmin - 1e-12]
    try:
        res = scan_time_optimal(OptimizationProblem(sys_, T=Tu[0] * T_UNIT, N=bins),
                                Tu * T_UNIT, threshold, seeds=seeds)
    except ParameterError as exc:
        raise click.ClickException(str(exc)) from exc
    rows = [(t / T_UNIT, t, e) for t, e in zip(res.T, res.epsilon)]
    write_csv(out, ("T_units", "T_us", "epsilon"), rows)
    T_min = None if res.T_min is None else res.T_min / T_UNIT
    _write_meta(out, "scan", dict(mechanism=mechanism, R=R, tmin=tmin, tmax=tmax, step=step,
                threshold=threshold, bins=bins, seeds=seeds, species=species_path,
                T_min_units=T_min))
    click.echo("T_min: none" if T_min is None else f"T_min = {T_min:.6g} x 2pi/Omega_max")


@main.command()
@click.option("--mechanism", required=True)
@click.option("--R", "R_list", required=True, help="Comma-separated distances (um).")
@click.option("--T", "T_list", required=True, help="Comma-separated durations (2pi/Omega_max).")
@click.option("--bins", type=int, default=100, show_default=True)
@click.option("--seeds", type=int, default=5, show_default=True)
@click.option("--species", "species_path", type=click.Path(exists=True), default=None)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def sweep(mechanism, R_list, T_list, bins, seeds, species_path, out):
    """Optimised infidelity over an (R, T) grid (CSV)."""
    _check_writable(out)
    Rs, Ts = _floats(R_list), _floats(T_list)
    if not Rs or not Ts:
        raise click.BadParameter("R and T grids must be non-empty")
    rows = sweep_rt(Mechanism.parse(mechanism), _species(species_path), Rs, Ts, N=bins,
                    seeds=seeds)
    write_csv(out, SWEEP_HEADER, rows)
    _write_meta(out, "sweep", dict(mechanism=mechanism, R=Rs, T=Ts, bins=bins, seeds=seeds,
                species=species_path))


# -- spectrum ---------------------------------------------------------------


@main.command()
@click.option("--B", "B", type=float, required=True, help="Forster coupling (rad/us).")
@click.option("--omega-c", type=float, required=True)
@click.option("--omega-t", type=float, required=True)
@click.option("--phi-c", type=float, default=0.0)
@click.option("--phi-t", type=float, default=0.0)
def spectrum(B, omega_c, omega_t, phi_c, phi_t):
    """Closed-form dark-state eigenvalues as JSON."""
    try:
        s = exact_eigensystem(B, omega_c, omega_t, phi_c, phi_t)
    except ParameterError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(json.dumps({
        "B": B, "omega_C": omega_c, "omega_T": omega_t,
        "eigenvalues": s.eigenvalues.tolist(),
        "eps_minus": s.eps_minus, "eps_plus": s.eps_plus, "calB": s.calB,
    }))


# -- noise ------------------------------------------------------------------


def _gate_list(text):
    try:
        return [GateKind(g.strip()) for g in text.split(",") if g.strip()]
    except ValueError:
        raise click.BadParameter(f"gates must be among {[k.value for k in GATE_KINDS]}") from None


@main.group()
def noise():
    """Error-channel analyses."""


@noise.command("phase")
@click.option("--samples", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--R", "R_list", default="4.2", show_default=True)
@click.option("--gates", default="blockade,nad,ad", show_default=True)
@click.option("--profile", type=click.Choice(["desk", "paper"]), default="desk", show_default=True)
@click.option("--a-nu-unit", type=click.Choice(["MHz", "MHz^2", "Hz^2"]), default="MHz",
              show_default=True, help="How the tabulated a_nu = 10 is read.")
@click.option("--independent", is_flag=True, help="Independent noise on the two atoms.")
@click.option("--species", "species_path", type=click.Path(exists=True), default=None)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def noise_phase(samples, seed, R_list, gates, profile, a_nu_unit, independent, species_path,
                out):
    """Phase-noise infidelity statistics per gate and distance (CSV)."""
    _check_writable(out)
    prof = get_profile(profile)
    model = LaserNoiseModel(a_nu_unit=a_nu_unit)
    sp = _species(species_path)
    traces = sample_phase_traces(model, prof.sampler, samples, seed)
    traces_T = (sample_phase_traces(model, prof.sampler, samples, seed + 1_000_003)
                if independent else None)
    rows = []
    for R in _floats(R_list):
        for k in _gate_list(gates):
            g = build_gate(k, sp, R, seeds=prof.seeds)
            st = phase_noise_infidelity(g.system, g.grid, traces, prof.sampler.dt, seed=seed,
                                        traces_T=traces_T)
            rows.append((k.value, R, st.mean, st.std, st.count, g.epsilon))
    write_csv(out, ("gate", "R_um", "eps_mean", "eps_std", "samples", "eps_noiseless"), rows)
    _write_meta(out, "noise phase", dict(samples=samples, seed=seed, R=R_list, gates=gates,
                profile=profile, a_nu_unit=a_nu_unit, independent=independent,
                species=species_path))


@noise.command("intensity")
@click.option("--span", type=float, default=0.03, show_default=True)
@click.option("--points", type=int, default=61, show_default=True)
@click.option("--R", "R", type=float, default=4.2, show_default=True)
@click.option("--gates", default="blockade,nad,ad", show_default=True)
@click.option("--species", "species_path", type=click.Path(exists=True), default=None)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def noise_intensity(span, points, R, gates, species_path, out):
    """Infidelity versus a constant relative amplitude offset (CSV)."""
    _check_writable(out)
    spec = IntensityNoiseSpec.symmetric(span, points)
    sp = _species(species_path)
    kinds = _gate_list(gates)
    cols = []
    for k in kinds:
        g = build_gate(k, sp, R)
        cols.append(intensity_noise_curve(g.system, g.grid, spec).epsilon)
    rows = [(d, *(c[i] for c in cols)) for i, d in enumerate(spec.deltas)]
    write_csv(out, ("delta", *(f"eps_{k.value}" for k in kinds)), rows)
    _write_meta(out, "noise intensity", dict(span=span, points=points, R=R, gates=gates,
                species=species_path))


@noise.command("decay")
@click.option("--n", "n_list", default="40,50,60,70", show_default=True)
@click.option("--R", "R", type=float, default=4.2, show_default=True)
@click.option("--scale", type=float, default=1.0, show_default=True,
              help="Global factor on all decay rates.")
@click.option("--out", type=click.Path(path_type=Path), required=True)
def noise_decay(n_list, R, scale, out):
    """Decay infidelity of the three gates for each principal quantum number (CSV)."""
    _check_writable(out)
    ns = _ints(n_list)
    sp70 = bundled_species(70)
    gates = {k: build_gate(k, sp70, R, threshold=1e-8) for k in GATE_KINDS}
    rows = []
    for n in ns:
        rates = DecayRates.from_species(_species(None, n)).scaled(scale)
        e = {k: decay_infidelity(g.system, g.grid, rates) for k, g in gates.items()}
        rows.append((n, e[GateKind.NAD], e[GateKind.AD], e[GateKind.BLOCKADE]))
    write_csv(out, ("n", "eps_NAd", "eps_Ad", "eps_blockade"), rows)
    _write_meta(out, "noise decay", dict(n=ns, R=R, scale=scale))


# -- reproduce --------------------------------------------------------------


@main.command("reproduce")
@click.argument("figure")
@click.option("--outdir", type=click.Path(path_type=Path), default=Path("results"),
              show_default=True)
@click.option("--profile", type=click.Choice(["desk", "paper"]), default="desk", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def reproduce_cmd(figure, outdir, profile, seed):
    """Regenerate the data behind one figure (fig2 | fig3 | fig4 | fig5)."""
    try:
        paths = reproduce(figure, outdir, profile, seed)
    except UnknownFigureError as exc:
        raise click.BadParameter(str(exc), param_hint="FIGURE") from exc
    _write_meta(Path(outdir) / figure, "reproduce", dict(figure=figure, profile=profile,
                seed=seed, outputs=[p.name for p in paths], figures=list(FIGURES)))
    for p in paths:
        click.echo(str(p))


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
