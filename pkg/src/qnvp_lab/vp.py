"""Vlasov-Poisson dynamics in three coordinate systems.

* ``f`` coordinates: the kinetic equation with a self-consistent potential.
* centred moment coordinates ``(n, P, rho)``: Hamilton's equations for the
  transformed Hamiltonian, for a general Hamiltonian, and the fast-slow split
  ``n = n0 + delta*ntilde``, ``P = grad Phi + pi``.
* the fast Langmuir subsystem and the first slow-manifold coefficient.

Tensor conventions: ``(xi . dA)_i = xi_j d_j A_i`` and
``((dA) . xi)_i = d_i A_j xi_j``; the divergence of a two-index moment
``M_ij`` contracts the first index, ``(d . M)_j = d_i M_ij``.
"""

from __future__ import annotations

import numpy as np

from .algebra import Covector
from .errors import DensityFloorError, QuasineutralSingularityError, UsageError
from .phase_space import (
    MomentState,
    PhaseGrid,
    div_v_density,
    dv_observable,
    moments,
    phase_quad,
    vquad,
)
from .spectral import (
    PhysParams,
    TorusGrid,
    check_finite,
    curl,
    divergence,
    gradient,
    hodge_decompose,
    inner,
    inv_laplacian_zero_mean,
    laplacian,
    leray,
    mean,
    remove_mean,
    skew,
    solve_electrostatic_potential,
)
from .state import DistState, FastSlowState, LangmuirState, MomentDot

N_FLOOR = 1e-8


def _ph(a):
    """Broadcast a position field against phase-space arrays."""
    return a[..., None, None]


def _require_delta(params: PhysParams) -> None:
    if params.delta == 0:
        raise QuasineutralSingularityError(
            "quasineutral singularity (delta = 0); use the qnvp model"
        )


def _check_floor(n, n_floor: float) -> None:
    if np.min(n) < n_floor:
        raise DensityFloorError(f"density {np.min(n):.3e} below floor {n_floor:.1e}")


def divergence_tensor(grid: TorusGrid, m: np.ndarray) -> np.ndarray:
    """``(d . M)_j = d_i M_ij`` for a ``(2, 2, nq, nq)`` tensor field."""
    return np.stack([divergence(grid, m[:, j], dealias=True) for j in range(2)])


def double_divergence(grid: TorusGrid, m: np.ndarray) -> np.ndarray:
    """``d_i d_j M_ij``."""
    return divergence(grid, divergence_tensor(grid, m), dealias=True)


def jacobian(grid: TorusGrid, v: np.ndarray) -> np.ndarray:
    """``D[i, j] = d_i v_j`` for a vector field ``v``."""
    return np.stack([gradient(grid, v[j], dealias=True) for j in range(2)], axis=1)


def field_energy(grid: TorusGrid, n: np.ndarray, params: PhysParams) -> float:
    """``(delta^2 lam^2 / 2) int |grad phi(n)|^2``."""
    _require_delta(params)
    phi = solve_electrostatic_potential(grid, n, params)
    g = gradient(grid, phi)
    return 0.5 * params.delta**2 * params.lam**2 * inner(grid, g, g)


def field_energy_gradient(grid: TorusGrid, n: np.ndarray, params: PhysParams) -> np.ndarray:
    """Functional derivative of :func:`field_energy` with respect to ``n``.

    Equals ``-lam * phi`` up to Nyquist content; computed as the exact
    derivative of the discrete energy.
    """
    phi = solve_electrostatic_potential(grid, n, params)
    return -params.lam * inv_laplacian_zero_mean(grid, divergence(grid, gradient(grid, phi)))


# ----------------------------------------------------------------------------- f coordinates


def vp_rhs_f(pg: PhaseGrid, f: np.ndarray, params: PhysParams) -> np.ndarray:
    """``-eps v.d_q f - d_v.[(eps lam d_q phi + B J v) f]``."""
    _require_delta(params)
    check_finite(f)
    grid = pg.q
    eps = params.epsilon
    n = vquad(pg, f)
    accel = eps * params.lam * gradient(grid, solve_electrostatic_potential(grid, n, params),
                                        dealias=True)
    vx, vy = pg.xi[0], pg.xi[1]
    gq = gradient(grid, f, dealias=True)
    b = params.b(2)
    flux = np.stack([(_ph(accel[0]) - b * vy) * f, (_ph(accel[1]) + b * vx) * f])
    return -eps * (vx * gq[0] + vy * gq[1]) - div_v_density(pg, flux)


def hamiltonian_vp(pg: PhaseGrid, f: np.ndarray, params: PhysParams) -> float:
    """Kinetic energy plus electrostatic field energy."""
    _require_delta(params)
    vx, vy = pg.xi[0], pg.xi[1]
    kinetic = 0.5 * phase_quad(pg, (vx**2 + vy**2) * f)
    return kinetic + field_energy(pg.q, vquad(pg, f), params)


def hamiltonian_vp_gradient(pg: PhaseGrid, f: np.ndarray, params: PhysParams) -> np.ndarray:
    vx, vy = pg.xi[0], pg.xi[1]
    return 0.5 * (vx**2 + vy**2) + _ph(field_energy_gradient(pg.q, vquad(pg, f), params))


# ----------------------------------------------------------------------------- (n, P, rho)


def hamiltonian_E(pg: PhaseGrid, s: MomentState, params: PhysParams,
                  n_floor: float = N_FLOOR) -> tuple[float, Covector]:
    """Transformed Hamiltonian and its functional gradient.

    Value: ``1/2 int |xi|^2 n rho + 1/2 int |P|^2/n + field energy``.
    Gradient: ``(1/2 <|xi|^2> - 1/2 |P/n|^2 + dW/dn, P/n, 1/2 |xi|^2 n)``.
    """
    if not s.centered:
        raise UsageError("hamiltonian_E expects a centered state")
    _check_floor(s.n, n_floor)
    grid = pg.q
    vx, vy = pg.xi[0], pg.xi[1]
    xi2 = vx**2 + vy**2
    u = s.p / s.n
    value = 0.5 * phase_quad(pg, xi2 * _ph(s.n) * s.dist) + 0.5 * inner(grid, s.p, u)
    value += field_energy(grid, s.n, params)
    dn = 0.5 * vquad(pg, xi2 * s.dist) - 0.5 * np.sum(u**2, axis=0)
    dn = dn + field_energy_gradient(grid, s.n, params)
    drho = 0.5 * xi2 * _ph(s.n)
    return value, Covector(dn=dn, dp=u, drho=drho)


def hamiltonian_vectorfield_E(pg: PhaseGrid, s: MomentState, g: Covector, params: PhysParams,
                              n_floor: float = N_FLOOR) -> MomentDot:
    """Hamiltonian vector field of a general functional in ``(n, P, rho)`` coordinates.

    The density equation carries the factor ``eps``:
    ``dn/dt = -eps div(n dG/dP)``.
    """
    if not s.centered:
        raise UsageError("hamiltonian_vectorfield_E expects a centered state")
    _check_floor(s.n, n_floor)
    grid = pg.q
    eps = params.epsilon
    n, p, rho = s.n, s.p, s.dist
    xi = pg.xi
    u = p / n
    omega = curl(grid, u, dealias=True)
    w_b = params.b() - eps * omega
    gp = g.dp
    gfun = g.drho / _ph(n)

    dxi_g = np.stack([dv_observable(pg, gfun, 0), dv_observable(pg, gfun, 1)])
    dq_g = gradient(grid, gfun, dealias=True)
    avg_dxi_g = vquad(pg, dxi_g * rho)
    avg_dq_g = vquad(pg, dq_g * rho)
    avg_g = vquad(pg, gfun * rho)
    # stress[i, j] = n < d_{xi_i} g  xi_j >
    stress = np.stack([np.stack([vquad(pg, dxi_g[i] * xi[j] * rho) for j in range(2)])
                       for i in range(2)]) * n
    div_stress = divergence_tensor(grid, stress)

    n_gp = n * gp
    div_n_gp = divergence(grid, n_gp, dealias=True)
    ndot = -eps * div_n_gp

    pdot = -eps * n * gradient(grid, np.sum(gp * u, axis=0), dealias=True)
    pdot -= eps * div_n_gp * u
    pdot -= eps * n * omega * skew(gp)
    pdot -= eps * div_stress
    pdot -= eps * n * (gradient(grid, g.dn, dealias=True) - gradient(grid, avg_g, dealias=True)
                       + avg_dq_g)
    pdot += n * params.b() * skew(gp)

    nrho = _ph(n) * rho
    qflux = np.stack([(eps * _ph(gp[i] - avg_dxi_g[i]) + eps * dxi_g[i]) * nrho for i in range(2)])
    jac_gp = jacobian(grid, gp)          # jac_gp[i, j] = d_i gp_j
    jac_a = jacobian(grid, avg_dxi_g)
    wb = _ph(w_b) if np.ndim(w_b) else w_b
    rel = dxi_g - _ph(avg_dxi_g)
    j_rel = np.stack([-rel[1], rel[0]])
    vflux = []
    for i in range(2):
        vel = (-eps * (_ph(jac_gp[i, 0]) * xi[0] + _ph(jac_gp[i, 1]) * xi[1])
               + eps * (_ph(jac_a[i, 0]) * xi[0] + _ph(jac_a[i, 1]) * xi[1])
               + eps * _ph(div_stress[i] / n)
               - eps * dq_g[i] + eps * _ph(avg_dq_g[i])
               + wb * j_rel[i])
        vflux.append(vel * nrho)
    nrho_dot = -divergence(grid, qflux, dealias=True) - div_v_density(pg, np.stack(vflux))
    rho_dot = (nrho_dot - _ph(ndot) * rho) / _ph(n)
    return MomentDot(n=ndot, p=pdot, rho=rho_dot, nrho=nrho_dot)


def moment_equations_rhs(pg: PhaseGrid, n: np.ndarray, p: np.ndarray, rho: np.ndarray,
                         params: PhysParams, n_floor: float = N_FLOOR) -> MomentDot:
    """Hamilton's equations of the transformed Hamiltonian in ``(n, P, rho)`` form."""
    _require_delta(params)
    _check_floor(n, n_floor)
    grid = pg.q
    eps = params.epsilon
    b = params.b()
    xi = pg.xi
    u = p / n
    _, mean_xi, m2 = moments(pg, rho)
    n_m2 = n * m2
    div_nm2 = divergence_tensor(grid, n_m2)
    phi = solve_electrostatic_potential(grid, n, params)

    ndot = -eps * divergence(grid, p, dealias=True)
    pdot = (-eps * divergence_tensor(grid, p[:, None] * u[None, :]) - eps * div_nm2
            + eps * params.lam * n * gradient(grid, phi, dealias=True) + b * skew(p))

    nrho = _ph(n) * rho
    omega = curl(grid, u, dealias=True)
    jac_u = jacobian(grid, u)        # d_i u_j
    jac_m = jacobian(grid, mean_xi)  # d_i <xi_j>
    w_b = b - eps * omega
    qflux = np.stack([eps * (_ph(u[i] - mean_xi[i]) + xi[i]) * nrho for i in range(2)])
    bb = _ph(b) if np.ndim(b) else b
    vflux = []
    for i in range(2):
        # -eps (xi . d u)_i  + B (J xi)_i + eps ((d<xi>) . xi)_i
        lin = (-eps * (_ph(jac_u[0, i]) * xi[0] + _ph(jac_u[1, i]) * xi[1])
               + eps * (_ph(jac_m[i, 0]) * xi[0] + _ph(jac_m[i, 1]) * xi[1]))
        jxi = -xi[1] if i == 0 else xi[0]
        jm = -mean_xi[1] if i == 0 else mean_xi[0]
        const = eps * div_nm2[i] / n - w_b * jm
        vflux.append((lin + bb * jxi + _ph(const)) * nrho)
    nrho_dot = -divergence(grid, qflux, dealias=True) - div_v_density(pg, np.stack(vflux))
    rho_dot = (nrho_dot - _ph(ndot) * rho) / _ph(n)
    return MomentDot(n=ndot, p=pdot, rho=rho_dot, nrho=nrho_dot)


# ----------------------------------------------------------------------------- fast-slow split


def make_fastslow_state(grid: TorusGrid, n0, ntilde, phi, pi, rho, raw_residue=False):
    """Construct a fast-slow state, projecting onto its constraints."""
    return FastSlowState(float(n0), remove_mean(ntilde), remove_mean(phi), leray(grid, pi),
                         np.asarray(rho, dtype=float), raw_residue)


def project_fastslow(grid: TorusGrid, fs: FastSlowState) -> FastSlowState:
    return make_fastslow_state(grid, fs.n0, fs.ntilde, fs.phi, fs.pi, fs.rho, fs.raw_residue)


def fastslow_transform(pg: PhaseGrid, s: MomentState, params: PhysParams) -> FastSlowState:
    """Split ``n = n0 + delta*ntilde`` and ``P = grad Phi + pi``.

    At ``delta = 0`` the raw zero-mean residue ``n - n0`` is stored and the
    state is flagged with ``raw_residue=True``.
    """
    if not s.centered:
        raise UsageError("fastslow_transform expects a centered state")
    n0 = float(mean(s.n))
    resid = s.n - n0
    phi, pi = hodge_decompose(pg.q, s.p)
    if params.delta == 0:
        return FastSlowState(n0, resid, phi, pi, s.dist, raw_residue=True)
    return FastSlowState(n0, resid / params.delta, phi, pi, s.dist)


def fastslow_inverse(pg: PhaseGrid, fs: FastSlowState, params: PhysParams) -> MomentState:
    scale = 1.0 if fs.raw_residue else params.delta
    n = fs.n0 + scale * fs.ntilde
    p = gradient(pg.q, fs.phi) + fs.pi
    return MomentState(n=n, p=p, dist=fs.rho, centered=True)


def fastslow_rhs(pg: PhaseGrid, fs: FastSlowState, params: PhysParams,
                 mode: str = "transformed", n_floor: float = N_FLOOR) -> FastSlowState:
    """Time derivative of a fast-slow state.

    ``transformed`` pushes the exact moment flow through the split;
    ``printed`` evaluates the split equations term by term, which omit the
    ``eps*ntilde^2`` contribution to the potential equation.
    """
    _require_delta(params)
    grid = pg.q
    s = fastslow_inverse(pg, fs, params)
    if mode == "transformed":
        dot = moment_equations_rhs(pg, s.n, s.p, s.dist, params, n_floor)
        ndot_mean = float(mean(dot.n))
        dphi, dpi = hodge_decompose(grid, dot.p)
        return FastSlowState(ndot_mean, (dot.n - ndot_mean) / params.delta, dphi, dpi, dot.rho)
    if mode != "printed":
        raise UsageError(f"unknown fast-slow mode {mode!r}")
    eps, delta, n0 = params.epsilon, params.delta, fs.n0
    n, p = s.n, s.p
    _check_floor(n, n_floor)
    _, _, m2 = moments(pg, fs.rho)
    stress = p[:, None] * p[None, :] / n + n * m2
    g_nt = inv_laplacian_zero_mean(grid, fs.ntilde)
    grad_nt = gradient(grid, fs.ntilde, dealias=True)
    grad_g = gradient(grid, g_nt, dealias=True)
    bjp = params.b() * skew(p)
    ntilde_dot = -(eps / delta) * laplacian(grid, fs.phi)
    lap_phi_dot = (-eps * double_divergence(grid, stress) + (eps / delta) * n0 * fs.ntilde
                   + eps * np.sum(grad_nt * grad_g, axis=0) + divergence(grid, bjp, dealias=True))
    phi_dot = inv_laplacian_zero_mean(grid, lap_phi_dot)
    pi_dot = (-eps * leray(grid, divergence_tensor(grid, stress))
              + eps * leray(grid, fs.ntilde * grad_g) + leray(grid, bjp))
    kin = moment_equations_rhs(pg, n, p, fs.rho, params, n_floor)
    rho_dot = (kin.nrho - _ph(-eps * divergence(grid, p, dealias=True)) * fs.rho) / _ph(n)
    return FastSlowState(0.0, ntilde_dot, phi_dot, pi_dot, rho_dot)


def fastslow_mode_difference(pg: PhaseGrid, fs: FastSlowState, params: PhysParams) -> dict:
    """Compare the two fast-slow modes; the potential rate is expected to differ by
    ``eps * G[ntilde^2]``."""
    a = fastslow_rhs(pg, fs, params, "transformed")
    b = fastslow_rhs(pg, fs, params, "printed")
    grid = pg.q
    expected = params.epsilon * inv_laplacian_zero_mean(grid, fs.ntilde**2)
    norm = lambda x: float(np.sqrt(np.sum(np.asarray(x) ** 2)))  # noqa: E731
    return {
        "phi_rate_difference": norm(a.phi - b.phi),
        "phi_rate_difference_minus_eps_ntilde_sq": norm(a.phi - b.phi - expected),
        "eps_ntilde_sq_term": norm(expected),
        "ntilde_rate_difference": norm(a.ntilde - b.ntilde),
        "pi_rate_difference": norm(a.pi - b.pi),
        "rho_rate_difference": norm(a.rho - b.rho),
    }


def langmuir_rhs(grid: TorusGrid, ntilde: np.ndarray, phi: np.ndarray, n0: float,
                 params: PhysParams) -> tuple[np.ndarray, np.ndarray]:
    """Fast subsystem: ``d_t ntilde = -(eps/delta) Lap Phi``, ``d_t Phi = (eps/delta) n0 G[ntilde]``."""
    _require_delta(params)
    rate = params.epsilon / params.delta
    return -rate * laplacian(grid, phi), rate * n0 * inv_laplacian_zero_mean(grid, ntilde)


def langmuir_frequency(n0: float, params: PhysParams) -> float:
    return params.epsilon / params.delta * np.sqrt(n0)


def slow_manifold_n1(pg: PhaseGrid, fs: FastSlowState, params: PhysParams,
                     n1_prefactor: str | float = 1.0, tol: float = 1e-12) -> np.ndarray:
    """First slow-manifold density coefficient at a point of the quasineutral set.

    ``pref * dd:(P P/n + n <xi xi>) - (1/eps) div(B J pi / n0)`` with ``n = n0``,
    ``P = pi`` and ``pref`` equal to 1 (default) or ``1/n0``.
    """
    scale = max(1.0, float(np.max(np.abs(fs.pi))))
    if np.max(np.abs(fs.ntilde)) > tol * scale or np.max(np.abs(fs.phi)) > tol * scale:
        raise UsageError("slow_manifold_n1 requires a state with ntilde = 0 and Phi = 0")
    if n1_prefactor in (1, 1.0, "1"):
        pref = 1.0
    elif n1_prefactor == "1/n0":
        pref = 1.0 / fs.n0
    else:
        raise UsageError("n1_prefactor must be 1 or '1/n0'")
    grid = pg.q
    n0, pi = fs.n0, fs.pi
    _, _, m2 = moments(pg, fs.rho)
    stress = pi[:, None] * pi[None, :] / n0 + n0 * m2
    out = pref * double_divergence(grid, stress)
    out -= divergence(grid, params.b() * skew(pi) / n0, dealias=True) / params.epsilon
    return remove_mean(out)


def langmuir_state_rhs(grid, params, n0):
    def rhs(st: LangmuirState) -> LangmuirState:
        a, b = langmuir_rhs(grid, st.ntilde, st.phi, n0, params)
        return LangmuirState(a, b)

    return rhs


def dist_rhs(pg, params):
    return lambda st: DistState(vp_rhs_f(pg, st.f, params))
