"""Per-model wiring of right-hand side, constraint projection and diagnostics.

Diagnostic channels are the same for every model:
``H, mass, div_norm, ntilde_k10_amp, phi_k10_amp, min_rho``.  A channel that
has no meaning for a model is reported as NaN.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import UsageError
from .phase_space import PhaseGrid, moment_map, phase_quad, transform_E
from .qnvp import hamiltonian_sigma, project_qnvp, qnvp_rhs
from .spectral import (
    PhysParams,
    TorusGrid,
    divergence,
    gradient,
    hodge_decompose,
    inner,
    inv_laplacian_zero_mean,
    l2_norm,
    mean,
    mode_amplitude,
    remove_mean,
)
from .state import DistState, FastSlowState, LangmuirState, QnvpState
from .vp import (
    fastslow_inverse,
    fastslow_rhs,
    hamiltonian_E,
    hamiltonian_vp,
    langmuir_rhs,
    project_fastslow,
    vp_rhs_f,
)

CHANNELS = ("H", "mass", "div_norm", "ntilde_k10_amp", "phi_k10_amp", "min_rho")


@dataclass
class Model:
    name: str
    rhs: Callable
    project: Callable | None
    diagnostics: Callable
    fields: Callable  # state -> {name: array} for field dumps


def langmuir_energy(grid: TorusGrid, st: LangmuirState, n0: float) -> float:
    """``1/2 int |grad Phi|^2 - 1/2 n0 int ntilde Lap^{-1} ntilde``, conserved by the fast subsystem."""
    g = gradient(grid, st.phi)
    return 0.5 * inner(grid, g, g) - 0.5 * n0 * inner(grid, st.ntilde,
                                                      inv_laplacian_zero_mean(grid, st.ntilde))


def _vp_f(pg: PhaseGrid, params: PhysParams) -> Model:
    grid = pg.q

    def diagnostics(st: DistState) -> dict:
        m = moment_map(pg, st.f)
        phi, _ = hodge_decompose(grid, m.p)
        ntilde = (m.n - mean(m.n)) / params.delta
        return {
            "H": hamiltonian_vp(pg, st.f, params),
            "mass": phase_quad(pg, st.f),
            "div_norm": l2_norm(grid, divergence(grid, m.p)),
            "ntilde_k10_amp": mode_amplitude(grid, ntilde, 1, 0),
            "phi_k10_amp": mode_amplitude(grid, phi, 1, 0),
            "min_rho": float(np.min(st.f)),
        }

    return Model("vp_f", lambda st: DistState(vp_rhs_f(pg, st.f, params)), None, diagnostics,
                 lambda st: {"f": st.f})


def _vp_fastslow(pg: PhaseGrid, params: PhysParams, mode: str) -> Model:
    grid = pg.q

    def diagnostics(st: FastSlowState) -> dict:
        s = fastslow_inverse(pg, st, params)
        return {
            "H": hamiltonian_E(pg, s, params)[0],
            "mass": st.n0 * grid.area,
            "div_norm": l2_norm(grid, divergence(grid, st.pi)),
            "ntilde_k10_amp": mode_amplitude(grid, st.ntilde, 1, 0),
            "phi_k10_amp": mode_amplitude(grid, st.phi, 1, 0),
            "min_rho": float(np.min(st.rho)),
        }

    def fields(st: FastSlowState) -> dict:
        return {"ntilde": st.ntilde, "phi": st.phi, "pi": st.pi, "rho": st.rho}

    return Model("vp_fastslow", lambda st: fastslow_rhs(pg, st, params, mode),
                 lambda st: project_fastslow(grid, st), diagnostics, fields)


def _qnvp(pg: PhaseGrid, params: PhysParams) -> Model:
    grid = pg.q

    def diagnostics(st: QnvpState) -> dict:
        return {
            "H": hamiltonian_sigma(pg, st)[0],
            "mass": st.n0 * phase_quad(pg, st.rho),
            "div_norm": l2_norm(grid, divergence(grid, st.pi)),
            "ntilde_k10_amp": 0.0,
            "phi_k10_amp": 0.0,
            "min_rho": float(np.min(st.rho)),
        }

    return Model("qnvp", lambda st: qnvp_rhs(pg, st, params), lambda st: project_qnvp(grid, st),
                 diagnostics, lambda st: {"pi": st.pi, "rho": st.rho})


def _langmuir(grid: TorusGrid, params: PhysParams, n0: float) -> Model:
    def rhs(st: LangmuirState) -> LangmuirState:
        return LangmuirState(*langmuir_rhs(grid, st.ntilde, st.phi, n0, params))

    def project(st: LangmuirState) -> LangmuirState:
        return LangmuirState(remove_mean(st.ntilde), remove_mean(st.phi))

    def diagnostics(st: LangmuirState) -> dict:
        return {
            "H": langmuir_energy(grid, st, n0),
            "mass": n0 * grid.area,
            "div_norm": float("nan"),
            "ntilde_k10_amp": mode_amplitude(grid, st.ntilde, 1, 0),
            "phi_k10_amp": mode_amplitude(grid, st.phi, 1, 0),
            "min_rho": float("nan"),
        }

    return Model("langmuir", rhs, project, diagnostics,
                 lambda st: {"ntilde": st.ntilde, "phi": st.phi})


def build_model(name: str, pg: PhaseGrid, params: PhysParams, n0: float = 1.0,
                fastslow_mode: str = "transformed") -> Model:
    if name == "vp_f":
        return _vp_f(pg, params)
    if name == "vp_fastslow":
        return _vp_fastslow(pg, params, fastslow_mode)
    if name == "qnvp":
        return _qnvp(pg, params)
    if name == "langmuir":
        return _langmuir(pg.q, params, n0)
    raise UsageError(f"unknown model {name!r}")


def centred_from_f(pg: PhaseGrid, f: np.ndarray):
    """Centred moment state of a distribution."""
    return transform_E(pg, moment_map(pg, f))
