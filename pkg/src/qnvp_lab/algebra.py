"""Single-particle brackets, the semidirect-product Lie algebra and its dual pairing.

An algebra element is a triple ``(psi, u, chi)``: a scalar field, a vector
field and a phase-space function.  The fluid part ``(psi, u)`` acts on
phase-space functions through the embedding ``psi + v.u`` and the
single-particle bracket.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UsageError
from .phase_space import MomentState, PhaseGrid, dv_observable, phase_quad
from .spectral import PhysParams, gradient, inner

NORM_FLOOR = 1e-300


@dataclass
class AlgebraElement:
    psi: np.ndarray
    u: np.ndarray
    chi: np.ndarray

    @classmethod
    def zeros(cls, pg: PhaseGrid) -> "AlgebraElement":
        nq = pg.q.nq
        return cls(np.zeros((nq, nq)), np.zeros((2, nq, nq)), pg.zeros())

    def __add__(self, other):
        return AlgebraElement(self.psi + other.psi, self.u + other.u, self.chi + other.chi)

    def __sub__(self, other):
        return AlgebraElement(self.psi - other.psi, self.u - other.u, self.chi - other.chi)

    def scale(self, c: float) -> "AlgebraElement":
        return AlgebraElement(c * self.psi, c * self.u, c * self.chi)

    def norm(self, pg: PhaseGrid) -> float:
        sq = inner(pg.q, self.psi, self.psi) + inner(pg.q, self.u, self.u)
        sq += phase_quad(pg, self.chi**2)
        return float(np.sqrt(sq))


@dataclass
class Covector:
    """Functional differential ``(dF/dn, dF/dP, dF/drho)``."""

    dn: np.ndarray
    dp: np.ndarray
    drho: np.ndarray


def _phase_q(a: np.ndarray) -> np.ndarray:
    return a[..., None, None]


def embed(pg: PhaseGrid, psi: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Phase-space function ``psi(q) + v . u(q)``."""
    xi = pg.xi
    return _phase_q(psi) + xi[0] * _phase_q(u[0]) + xi[1] * _phase_q(u[1])


def particle_bracket(
    pg: PhaseGrid,
    h: np.ndarray,
    k: np.ndarray,
    params: PhysParams,
    variant: str = "bracket0",
    omega: np.ndarray | None = None,
) -> np.ndarray:
    """Single-particle bracket of two phase-space functions.

    ``eps (d_q h . d_v k - d_q k . d_v h) + W d_v h . J d_v k`` with
    ``W = B`` for ``bracket0`` and ``W = B - eps*omega`` for ``bracket_e``.
    """
    if variant == "bracket0":
        w = params.b(2)
    elif variant == "bracket_e":
        if omega is None:
            raise UsageError("bracket_e requires the vorticity field omega")
        w = params.b(2) - params.epsilon * _phase_q(omega)
    else:
        raise UsageError(f"unknown bracket variant {variant!r}")
    h = np.broadcast_to(h, pg.shape)
    k = np.broadcast_to(k, pg.shape)
    gq_h = gradient(pg.q, h, dealias=True)
    gq_k = gradient(pg.q, k, dealias=True)
    hx, hy = dv_observable(pg, h, 0), dv_observable(pg, h, 1)
    kx, ky = dv_observable(pg, k, 0), dv_observable(pg, k, 1)
    canonical = gq_h[0] * kx + gq_h[1] * ky - (gq_k[0] * hx + gq_k[1] * hy)
    gyration = hy * kx - hx * ky
    return params.epsilon * canonical + w * gyration


def _advect(grid, u: np.ndarray, field: np.ndarray) -> np.ndarray:
    """``(u . d) field`` for scalar or vector ``field``."""
    if field.ndim == 2:
        g = gradient(grid, field, dealias=True)
        return u[0] * g[0] + u[1] * g[1]
    return np.stack([_advect(grid, u, field[j]) for j in range(2)])


def lie_bracket_h(pg: PhaseGrid, a: AlgebraElement, b: AlgebraElement, params: PhysParams):
    """Fluid sub-bracket; returns ``(psi, u)``."""
    eps = params.epsilon
    b_field = params.b()
    u1, u2 = a.u, b.u
    cross = u1[0] * (-u2[1]) + u1[1] * u2[0]  # u1 . J u2
    psi = -(eps * (_advect(pg.q, u1, b.psi) - _advect(pg.q, u2, a.psi)) - b_field * cross)
    u = -eps * (_advect(pg.q, u1, u2) - _advect(pg.q, u2, u1))
    return psi, u


def act(pg: PhaseGrid, a: AlgebraElement, chi: np.ndarray, params: PhysParams) -> np.ndarray:
    """Action of the fluid part of ``a`` on a phase-space function."""
    return particle_bracket(pg, embed(pg, a.psi, a.u), chi, params)


def lie_bracket_s(pg: PhaseGrid, a: AlgebraElement, b: AlgebraElement, params: PhysParams):
    """Semidirect-product bracket ``([a_h, b_h], {chi_a, chi_b} + a.chi_b - b.chi_a)``."""
    psi, u = lie_bracket_h(pg, a, b, params)
    chi = particle_bracket(pg, a.chi, b.chi, params)
    chi = chi + act(pg, a, b.chi, params) - act(pg, b, a.chi, params)
    return AlgebraElement(psi, u, chi)


def pairing(pg: PhaseGrid, m: MomentState, a: AlgebraElement) -> float:
    """``int psi n + int u . P + int int chi f``."""
    if m.centered:
        raise UsageError("pairing is defined on uncentered states (n, P, f)")
    return inner(pg.q, a.psi, m.n) + inner(pg.q, a.u, m.p) + phase_quad(pg, a.chi * m.dist)


def jacobi_residual(pg, a, b, c, params: PhysParams) -> float:
    """Relative norm of the cyclic Jacobi sum."""
    br = lambda x, y: lie_bracket_s(pg, x, y, params)  # noqa: E731
    total = br(a, br(b, c)) + br(b, br(c, a)) + br(c, br(a, b))
    scale = a.norm(pg) * b.norm(pg) * c.norm(pg) + NORM_FLOOR
    return total.norm(pg) / scale


def vp_bracket_linear(pg: PhaseGrid, f: np.ndarray, a: AlgebraElement, b: AlgebraElement, params):
    """VP bracket of the linear functionals ``f -> <C(f), a>`` and ``f -> <C(f), b>``."""
    da = embed(pg, a.psi, a.u) + a.chi
    db = embed(pg, b.psi, b.u) + b.chi
    return phase_quad(pg, particle_bracket(pg, da, db, params) * f)


def poisson_map_residual(pg, f, a, b, params: PhysParams) -> float:
    """``|{<C,a>, <C,b>}_VP - <C(f), [a, b]>|`` at the distribution ``f``."""
    from .phase_space import moment_map

    lhs = vp_bracket_linear(pg, f, a, b, params)
    rhs = pairing(pg, moment_map(pg, f), lie_bracket_s(pg, a, b, params))
    return abs(lhs - rhs)


def poisson_map_scale(pg, f, a, b) -> float:
    """Normalization for :func:`poisson_map_residual`."""
    return float(np.sqrt(phase_quad(pg, f**2))) * a.norm(pg) * b.norm(pg) + NORM_FLOOR
