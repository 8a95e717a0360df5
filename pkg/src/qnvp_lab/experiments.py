"""Initial-condition families and the VP/QNVP comparison experiments.

The command line runner and the acceptance tests both go through these
functions, so they measure the same quantities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import UsageError
from .evolve import RunConfig, integrate, scaling_fit
from .models import build_model, centred_from_f
from .phase_space import PhaseGrid, check_tail, inverse_E, isotropic_equilibrium
from .qnvp import make_qnvp_state
from .spectral import PhysParams, TorusGrid, l2_norm, mode_coefficient
from .state import DistState, FastSlowState, LangmuirState
from .vp import (
    fastslow_inverse,
    fastslow_transform,
    langmuir_frequency,
    make_fastslow_state,
    slow_manifold_n1,
)

FAMILIES = ("maxwellian", "shear_flow", "single_mode")


@dataclass(frozen=True)
class InitialCondition:
    """Named initial-data family.

    ``maxwellian`` is the uniform isotropic Maxwellian at rest,
    ``shear_flow`` carries it with ``pi = n0 (c sin y, 0)`` and
    ``single_mode`` adds ``ntilde = c cos(kx x + ky y)``.  With
    ``slow_manifold`` the density fluctuation is set to ``delta * ntilde*_1``.
    """

    family: str = "maxwellian"
    amplitude: float = 0.2
    kx: int = 1
    ky: int = 0
    n0: float = 1.0
    temperature: float = 1.0
    slow_manifold: bool = False

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise UsageError(f"family must be one of {FAMILIES}")
        if not self.n0 > 0:
            raise UsageError("n0 must be > 0")
        if not self.temperature > 0:
            raise UsageError("temperature must be > 0")
        if self.slow_manifold and self.family == "single_mode":
            raise UsageError("slow-manifold initialization needs ntilde = 0 data")


def initial_fastslow(pg: PhaseGrid, params: PhysParams, ic: InitialCondition,
                     n1_prefactor="1") -> FastSlowState:
    grid = pg.q
    x, y = grid.mesh
    zero = np.zeros(grid.shape)
    rho = np.broadcast_to(isotropic_equilibrium(pg.v, ic.temperature), pg.shape).copy()
    pi = np.zeros((2,) + grid.shape)
    ntilde = zero
    if ic.family == "shear_flow":
        pi[0] = ic.n0 * ic.amplitude * np.sin(y)
    elif ic.family == "single_mode":
        ntilde = ic.amplitude * np.cos(ic.kx * x + ic.ky * y)
    fs = make_fastslow_state(grid, ic.n0, ntilde, zero, pi, rho)
    if ic.slow_manifold:
        n1 = slow_manifold_n1(pg, fs, params, n1_prefactor)
        fs = make_fastslow_state(grid, ic.n0, params.delta * n1, zero, pi, rho)
    return fs


def initial_state(model: str, pg: PhaseGrid, params: PhysParams, ic: InitialCondition,
                  n1_prefactor="1"):
    """Initial state in the variables of ``model``."""
    fs = initial_fastslow(pg, params, ic, n1_prefactor)
    check_tail(pg, fs.rho, "initial rho")
    if model == "vp_fastslow":
        return fs
    if model == "vp_f":
        return DistState(inverse_E(pg, fastslow_inverse(pg, fs, params)).dist)
    if model == "qnvp":
        if ic.family == "single_mode":
            raise UsageError("qnvp carries no density fluctuation; use maxwellian or shear_flow")
        return make_qnvp_state(pg.q, fs.n0, fs.pi, fs.rho)
    if model == "langmuir":
        return LangmuirState(fs.ntilde, fs.phi)
    raise UsageError(f"unknown model {model!r}")


def fast_amplitude(times, values, omega: float, degree: int = 3) -> float:
    """Amplitude of the oscillation at ``omega`` riding on a slow polynomial trend.

    ``values`` may be complex (a Fourier coefficient); real and imaginary
    parts are fitted separately and combined in quadrature.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values)
    s = (t - t[0]) / max(t[-1] - t[0], 1e-300)
    basis = np.stack([s**k for k in range(degree + 1)]
                     + [np.cos(omega * t), np.sin(omega * t)], axis=1)
    total = 0.0
    for part in (y.real, np.imag(y)):
        coef, *_ = np.linalg.lstsq(basis, part, rcond=None)
        total += coef[-2] ** 2 + coef[-1] ** 2
    return float(np.sqrt(total))


@dataclass
class FastSlowRun:
    delta: float
    times: np.ndarray
    phi_mode: np.ndarray  # complex Fourier coefficient of Phi at the tracked mode
    fast_amplitude: float
    snapshots: dict  # sample time -> FastSlowState


def _snapshot_steps(times, dt: float) -> dict:
    steps = {}
    for t in times:
        i = int(round(t / dt))
        if abs(i * dt - t) > 1e-9 * max(1.0, t):
            raise UsageError(f"snapshot time {t:g} is not a multiple of dt = {dt:g}")
        steps[i] = t
    return steps


def run_fastslow(pg: PhaseGrid, params: PhysParams, ic: InitialCondition, t_final: float,
                 dt: float, mode: tuple[int, int] = (0, 1), snapshot_times=(),
                 fastslow_mode: str = "transformed", n1_prefactor="1",
                 rhs_mode: str = "fastslow") -> FastSlowRun:
    """Integrate VP, tracking the ``mode`` Fourier coefficient of ``Phi``.

    ``rhs_mode="fastslow"`` steps the split moment system; ``"f"`` steps the
    kinetic equation for ``f`` and reads ``Phi`` and ``pi`` off its moments.
    Snapshots are fast-slow states either way.  The fast amplitude is fitted
    at the Langmuir frequency.
    """
    if rhs_mode == "fastslow":
        name = "vp_fastslow"
        as_fastslow = lambda st: st  # noqa: E731
    elif rhs_mode == "f":
        name = "vp_f"
        as_fastslow = lambda st: fastslow_transform(pg, centred_from_f(pg, st.f), params)  # noqa: E731
    else:
        raise UsageError("rhs_mode must be 'fastslow' or 'f'")
    model = build_model(name, pg, params, ic.n0, fastslow_mode)
    state = initial_state(name, pg, params, ic, n1_prefactor)
    want = _snapshot_steps(snapshot_times, dt)
    coeffs, snaps = [], {}

    def record(i, st):
        fs = as_fastslow(st)
        coeffs.append(mode_coefficient(pg.q, fs.phi, *mode))
        if i in want:
            snaps[want[i]] = fs

    cfg = RunConfig(dt, t_final, model=name)
    integrate(state, cfg, model.rhs, lambda st: {}, model.project, on_step=record)
    t = dt * np.arange(len(coeffs))
    c = np.asarray(coeffs)
    amp = fast_amplitude(t, c, langmuir_frequency(ic.n0, params))
    return FastSlowRun(params.delta, t, c, amp, snaps)


# RK4 is stable on the imaginary axis up to |omega dt| = 2.83; keep a margin
ADVECTION_CFL = 1.5


def vp_time_step(pg: PhaseGrid, params: PhysParams, n0: float, t_final: float,
                 dt_max: float = np.inf, langmuir_fraction: float = 0.5) -> float:
    """Largest step dividing ``t_final`` that resolves the plasma oscillation
    (``omega_L dt <= langmuir_fraction``) and the fastest in-band streaming
    (``eps kcut vmax dt <= ADVECTION_CFL``)."""
    cap = min(dt_max, langmuir_fraction / langmuir_frequency(n0, params),
              ADVECTION_CFL / (params.epsilon * pg.q.kcut * pg.v.vmax))
    return t_final / math.ceil(t_final / cap - 1e-9)


def amplitude_sweep(pg: PhaseGrid, params: PhysParams, ic: InitialCondition, deltas,
                    t_final: float = 2.0, langmuir_fraction: float = 0.5, **kw) -> dict:
    """Fast ``Phi`` amplitude against ``delta`` with its log-log fit."""
    amps = []
    for d in deltas:
        p = replace(params, delta=float(d))
        dt = vp_time_step(pg, p, ic.n0, t_final, langmuir_fraction=langmuir_fraction)
        amps.append(run_fastslow(pg, p, ic, t_final, dt, **kw).fast_amplitude)
    slope, intercept, r2 = scaling_fit(deltas, amps)
    return {"deltas": [float(d) for d in deltas], "amplitudes": amps, "slope": slope,
            "intercept": intercept, "r2": r2}


def qnvp_pi_history(pg: PhaseGrid, params: PhysParams, ic: InitialCondition, t_final: float,
                    dt: float, sample_times) -> dict:
    """``{t: pi}`` along the QNVP run from the quasineutral part of ``ic``."""
    model = build_model("qnvp", pg, params, ic.n0)
    state = initial_state("qnvp", pg, params, replace(ic, slow_manifold=False))
    want = _snapshot_steps(sample_times, dt)
    out = {}

    def record(i, st):
        if i in want:
            out[want[i]] = st.pi

    integrate(state, RunConfig(dt, t_final), model.rhs, lambda st: {}, model.project,
              on_step=record)
    return out


def relative_pi_difference(grid: TorusGrid, pi_vp: np.ndarray, pi_qn: np.ndarray) -> float:
    return l2_norm(grid, pi_vp - pi_qn) / l2_norm(grid, pi_qn)


def compare_runs(pg: PhaseGrid, params: PhysParams, ic: InitialCondition, t_final: float,
                 dt_vp: float, dt_qnvp: float, sample_times, **kw) -> dict:
    """``{t: relative pi difference}`` between slow-manifold VP and QNVP from matched data."""
    vp = run_fastslow(pg, params, replace(ic, slow_manifold=True), t_final, dt_vp,
                      snapshot_times=sample_times, **kw)
    qn = qnvp_pi_history(pg, params, ic, t_final, dt_qnvp, sample_times)
    return {t: relative_pi_difference(pg.q, vp.snapshots[t].pi, qn[t])
            for t in sample_times if t in vp.snapshots and t in qn}
