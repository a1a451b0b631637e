"""Error channels: Rydberg decay, laser phase noise and intensity noise.

Phase-noise spectra are in SI frequency units (Hz, Hz^2/Hz); gate times in
:mod:`rydgate` are in microseconds and are converted when a trace window is
cut out.
"""

from __future__ import annotations

import logging
import math
import os
from collections.abc import Iterable, Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import h as PLANCK

from .fidelity import trace_fidelity
from .hamiltonians import ACTIVE_LABELS, DecayRates, GateSystem
from .model import ControlGrid, ParameterError
from .propagation import propagate, step_operators

log = logging.getLogger(__name__)

__all__ = [
    "DecayRates",
    "decay_infidelity",
    "max_step_gain",
    "norm_is_monotone",
    "A_NU_UNITS",
    "LaserNoiseModel",
    "psd_input",
    "psd_filtered",
    "phase_psd",
    "phase_psd_ssb",
    "filter_response",
    "PhaseTraceSampler",
    "iter_phase_traces",
    "sample_phase_traces",
    "NoiseEnsembleStats",
    "phase_noise_infidelity",
    "IntensityNoiseSpec",
    "IntensityCurve",
    "intensity_noise_curve",
]

US = 1e-6  # seconds per microsecond


# -- Rydberg decay ----------------------------------------------------------


def decay_infidelity(sys: GateSystem, grid: ControlGrid, rates: DecayRates) -> float:
    """Phase-maximised infidelity under the non-Hermitian decay generator."""
    return trace_fidelity(propagate(sys, grid, decay=rates)).epsilon


def max_step_gain(sys: GateSystem, grid: ControlGrid, rates: DecayRates | None) -> float:
    """Largest singular value over all bin propagators of all blocks."""
    gain = 0.0
    for label in ACTIVE_LABELS:
        S = step_operators(sys, label, grid, rates)
        gain = max(gain, float(np.linalg.norm(S, ord=2, axis=(-2, -1)).max()))
    return gain


def norm_is_monotone(
    sys: GateSystem, grid: ControlGrid, rates: DecayRates | None, tol: float = 1e-12
) -> bool:
    """True when no bin propagator can increase the norm of any state."""
    return max_step_gain(sys, grid, rates) <= 1.0 + tol


# -- laser phase noise ------------------------------------------------------

# The white-noise level a_nu is tabulated as "10 (MHz)" but enters the PSD as a
# numerator of 1/f. Each entry maps the tabulated number to Hz^2.
A_NU_UNITS = {"MHz": 1e6, "MHz^2": 1e12, "Hz^2": 1.0}


@dataclass(frozen=True)
class LaserNoiseModel:
    a_nu: float = 10.0
    a_nu_unit: str = "MHz"
    lambda_L: float = 302e-9  # m
    delta_f_cav: float = 4e9  # Hz
    P_bar: float = 0.5  # W
    alpha: float = 5.0
    f_rlx: float = 10e9  # Hz
    gamma: float = 0.125
    a_s: float = 0.1
    a_p: float = 2.0
    f_c: float = 1e6  # Hz
    gamma_p: float = 1.0
    S_QNL_override: float | None = None

    def __post_init__(self):
        if self.a_nu_unit not in A_NU_UNITS:
            raise ParameterError(
                f"a_nu_unit must be one of {sorted(A_NU_UNITS)}, got {self.a_nu_unit!r}"
            )
        if self.P_bar <= 0 or self.lambda_L <= 0:
            raise ParameterError("P_bar and lambda_L must be positive")

    @property
    def a_nu_hz2(self) -> float:
        return self.a_nu * A_NU_UNITS[self.a_nu_unit]

    @property
    def f_cav(self) -> float:
        return SPEED_OF_LIGHT / self.lambda_L

    @property
    def f_p(self) -> float:
        return self.f_c * (1 + 2 * self.gamma_p) * math.sqrt(self.a_p)

    @property
    def S_QNL(self) -> float:
        """Flat quantum-noise floor ``h f_cav delta_f_cav^2 / P_bar`` in Hz^2/Hz."""
        if self.S_QNL_override is not None:
            return self.S_QNL_override
        return PLANCK * self.f_cav * self.delta_f_cav**2 / self.P_bar

    @classmethod
    def silent(cls) -> LaserNoiseModel:
        """A model with every noise source switched off."""
        return cls(a_nu=0.0, delta_f_cav=0.0, S_QNL_override=0.0)


def _positive_freq(f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise ParameterError("PSD frequencies must be positive")
    return f


def psd_input(model: LaserNoiseModel, f):
    """Free-running frequency-noise PSD ``S_nu(f)`` in Hz^2/Hz.

    The relaxation-oscillation denominator is used exactly as written and can
    turn negative close to ``f_rlx``.
    """
    f = _positive_freq(f)
    fr2 = model.f_rlx**2
    denom = (fr2 - f**2) ** 2 - 4 * model.gamma * fr2 * f**2
    with np.errstate(divide="ignore"):
        bracket = 1 + model.alpha**2 * fr2**2 / denom
    return model.a_nu_hz2 / f + model.S_QNL * bracket


def filter_response(model: LaserNoiseModel, f):
    """Filter transfer function ``H_L(s)`` at ``s = i f``."""
    s = 1j * _positive_freq(f)
    hp = s / (s + model.f_c)
    fp, gp = model.f_p, model.gamma_p
    bp = 2 * gp * fp * s / (s**2 + 2 * gp * fp * s + fp**2)
    rs = math.sqrt(model.a_s)
    return rs + (1 - rs) * hp * (1 + (math.sqrt(model.a_p) - 1) * bp)


def psd_filtered(model: LaserNoiseModel, f):
    """Cavity-filtered frequency-noise PSD ``S_nu,out(f)`` in Hz^2/Hz."""
    H2 = np.abs(filter_response(model, f)) ** 2
    q = model.S_QNL
    return H2 * (psd_input(model, f) - q) + q


def phase_psd(model: LaserNoiseModel, f):
    """Two-sided phase PSD ``S_phi = S_nu,out / f^2`` in rad^2/Hz."""
    f = _positive_freq(f)
    return psd_filtered(model, f) / f**2


def phase_psd_ssb(model: LaserNoiseModel, f):
    """Single-side-band phase PSD ``2 S_phi`` for ``f > 0``."""
    return 2 * phase_psd(model, f)


@dataclass(frozen=True)
class PhaseTraceSampler:
    """Frequency-domain synthesis grid: ``2 N_s + 1`` samples over ``T_meas``."""

    T_meas: float = 5e-3  # s
    N_s: int = 5_000_000

    PROFILES = {"paper": (5e-3, 5_000_000), "desk": (50e-6, 50_000)}

    def __post_init__(self):
        if not self.T_meas > 0 or self.N_s < 1:
            raise ParameterError("need T_meas > 0 and N_s >= 1")

    @classmethod
    def profile(cls, name: str) -> PhaseTraceSampler:
        try:
            T, n = cls.PROFILES[name]
        except KeyError:
            raise ParameterError(f"unknown sampler profile {name!r}") from None
        return cls(T, n)

    @property
    def length(self) -> int:
        return 2 * self.N_s + 1

    @property
    def dt(self) -> float:
        return self.T_meas / self.length

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(1, self.N_s + 1) / self.T_meas

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.length) * self.dt

    def sigma(self, model: LaserNoiseModel) -> np.ndarray:
        """Amplitude standard deviation at every positive frequency bin."""
        S = phase_psd_ssb(model, self.frequencies)
        neg = S < 0
        if np.any(neg):
            log.warning("S_SSB negative in %d bins; those bins are left empty", int(neg.sum()))
            S = np.where(neg, 0.0, S)
        return np.sqrt(self.T_meas / (2 * self.dt**2) * S)


def _trace_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def _synthesise(sigma: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    ns = sigma.size
    amp = rng.normal(0.0, 1.0, ns) * sigma
    phase = rng.uniform(0.0, 2 * np.pi, ns)
    spec = np.zeros(2 * ns + 1, dtype=complex)
    spec[1 : ns + 1] = amp * np.exp(1j * phase)
    spec[ns + 1 :] = np.conj(spec[1 : ns + 1][::-1])
    return np.fft.ifft(spec).real


def iter_phase_traces(
    model: LaserNoiseModel, sampler: PhaseTraceSampler, count: int, seed: int = 0, start: int = 0
) -> Iterator[np.ndarray]:
    """Yield ``count`` real phase traces (rad); trace ``i`` depends only on
    ``(seed, i)``."""
    if count < 1:
        raise ParameterError("need at least one trace")
    sigma = sampler.sigma(model)
    for i in range(start, start + count):
        yield _synthesise(sigma, _trace_rng(seed, i))


def sample_phase_traces(
    model: LaserNoiseModel, sampler: PhaseTraceSampler, count: int, seed: int = 0
) -> np.ndarray:
    """Array of shape ``(count, 2 N_s + 1)``."""
    return np.stack(list(iter_phase_traces(model, sampler, count, seed)))


@dataclass(frozen=True)
class NoiseEnsembleStats:
    mean: float
    std: float
    count: int
    samples: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def from_samples(cls, eps, keep: bool = True) -> NoiseEnsembleStats:
        eps = np.asarray(eps, dtype=float)
        std = float(eps.std(ddof=1)) if eps.size > 1 else 0.0
        return cls(float(eps.mean()), std, int(eps.size), eps if keep else None)

    @property
    def sem(self) -> float:
        return self.std / math.sqrt(self.count)


def _workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("RYDGATE_THREADS")
    return max(1, int(env)) if env else 1


def _window(trace: np.ndarray, dt_trace: float, t_mid: np.ndarray, offset: float) -> np.ndarray:
    tt = np.arange(trace.size) * dt_trace
    return np.interp(offset + t_mid, tt, trace)


def phase_noise_infidelity(
    sys: GateSystem,
    grid: ControlGrid,
    traces: Iterable[np.ndarray],
    dt_trace: float,
    seed: int = 0,
    traces_T: Iterable[np.ndarray] | None = None,
    workers: int | None = None,
    keep_samples: bool = True,
) -> NoiseEnsembleStats:
    """Infidelity statistics with phase-noise traces added to the optimal phases.

    Each trace is cut at a random offset (drawn from ``(seed, index)``) to the
    gate length ``grid.T`` and sampled at the bin midpoints. The same noise is
    added to both atoms unless ``traces_T`` supplies independent target traces.
    ``dt_trace`` is the trace spacing in seconds.
    """
    traces = list(traces)
    if not traces:
        raise ParameterError("no phase traces supplied")
    partner = list(traces_T) if traces_T is not None else None
    if partner is not None and len(partner) != len(traces):
        raise ParameterError("control and target trace sets differ in size")
    T_gate = grid.T * US
    t_mid = (np.arange(grid.N) + 0.5) * grid.dt * US

    def one(i: int) -> float:
        tr = np.asarray(traces[i], dtype=float)
        span = (tr.size - 1) * dt_trace
        if T_gate > span:
            raise ParameterError(
                f"gate duration {T_gate:.3e} s exceeds the trace length {span:.3e} s"
            )
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), i, 1]))
        offset = rng.uniform(0.0, span - T_gate)
        dC = _window(tr, dt_trace, t_mid, offset)
        dT = dC if partner is None else _window(np.asarray(partner[i]), dt_trace, t_mid, offset)
        noisy = grid.replace(phi_C=grid.phi_C + dC, phi_T=grid.phi_T + dT)
        return trace_fidelity(propagate(sys, noisy)).epsilon

    n = len(traces)
    w = _workers(workers)
    if w == 1:
        eps = [one(i) for i in range(n)]
    else:
        with ThreadPoolExecutor(w) as pool:
            eps = list(pool.map(one, range(n)))
    return NoiseEnsembleStats.from_samples(eps, keep_samples)


# -- intensity noise --------------------------------------------------------


@dataclass(frozen=True)
class IntensityNoiseSpec:
    deltas: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.deltas, dtype=float)
        if d.ndim != 1 or d.size == 0:
            raise ParameterError("deltas must be a non-empty 1-D grid")
        if np.any(d < -1):
            raise ParameterError("relative deviations below -1 give negative amplitudes")
        object.__setattr__(self, "deltas", d)

    @classmethod
    def symmetric(cls, span: float = 0.03, points: int = 61) -> IntensityNoiseSpec:
        return cls(np.linspace(-span, span, points))


@dataclass(frozen=True)
class IntensityCurve:
    delta: np.ndarray
    epsilon: np.ndarray

    def at(self, delta: float) -> float:
        k = int(np.argmin(np.abs(self.delta - delta)))
        if abs(self.delta[k] - delta) > 1e-12:
            raise KeyError(f"delta={delta} is not on the grid")
        return float(self.epsilon[k])

    def odd_even_ratio(self, window: float = 0.01) -> float:
        """``max|odd part| / max|even part|`` of a quartic fit on ``|delta| <= window``.

        The constant term is excluded from the even part.
        """
        m = np.abs(self.delta) <= window + 1e-15
        if m.sum() < 5:
            raise ValueError("need at least five points inside the fit window")
        c = np.polynomial.polynomial.polyfit(self.delta[m], self.epsilon[m], 4)
        x = self.delta[m]
        odd = c[1] * x + c[3] * x**3
        even = c[2] * x**2 + c[4] * x**4
        return float(np.max(np.abs(odd)) / np.max(np.abs(even)))


def intensity_noise_curve(
    sys: GateSystem, grid: ControlGrid, spec: IntensityNoiseSpec
) -> IntensityCurve:
    """Infidelity with both amplitudes scaled by ``1 + delta`` for the whole gate."""
    eps = np.empty(spec.deltas.size)
    for i, d in enumerate(spec.deltas):
        scale = 1.0 + d
        g = ControlGrid(
            grid.T,
            grid.omega_C * scale,
            grid.omega_T * scale,
            grid.phi_C,
            grid.phi_T,
            omega_max=grid.omega_max * max(scale, 1.0),
        )
        eps[i] = trace_fidelity(propagate(sys, g)).epsilon
    return IntensityCurve(spec.deltas.copy(), eps)
