"""Quasineutral dynamics on the constrained set ``{n = n0 constant, div P = 0}``.

A point of the constrained set is ``(n0, pi, rho)``.  This module provides
the kinetic-Euler right-hand side, the kinetic-energy Hamiltonian, the
induced bracket evaluated two independent ways, the flow generated by an
arbitrary covector, and a dense-linear-algebra certificate for the
transversality condition that makes the induced bracket well defined.

Covector convention: ``dn0`` is the ordinary derivative with respect to the
real number ``n0``; when a constrained covector is extended to the ambient
moment space its density component is ``dn0 / area + psi_G``.  Constants in
the density component never enter the ambient bracket, so this choice only
affects the pairing with ``(delta n0, ...)``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .algebra import Covector
from .errors import ParameterError, ResourceError, UsageError
from .phase_space import (
    MomentState,
    PhaseGrid,
    div_v_density,
    dv_observable_transpose,
    grad_v_observable,
    moments,
    phase_quad,
    vquad,
)
from .spectral import (
    PhysParams,
    TorusGrid,
    _bshape,
    check_finite,
    curl,
    dealias,
    divergence,
    fft_q,
    gradient,
    ifft_q,
    inner,
    inv_laplacian_zero_mean,
    laplacian,
    leray,
    mean,
    remove_mean,
    resample,
    skew,
)
from .state import MomentDot, QnvpState
from .vp import divergence_tensor, double_divergence, hamiltonian_vectorfield_E, jacobian

MAX_CERTIFICATE_NQ = 16
ZERO_MEAN_TOL = 1e-10


def _ph(a):
    return a[..., None, None]


def _check_n0(n0: float) -> None:
    if not np.isfinite(n0) or n0 <= 0:
        raise ParameterError(f"n0 must be > 0, got {n0!r}")


def _wb(params: PhysParams, omega: np.ndarray) -> np.ndarray:
    """Effective gyrofrequency ``B - eps*Omega`` as an ``(nq, nq)`` field."""
    return params.b() - params.epsilon * omega


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[0] * b[0] + a[1] * b[1]


# ----------------------------------------------------------------------------- states, covectors


def make_qnvp_state(grid: TorusGrid, n0: float, pi: np.ndarray, rho: np.ndarray) -> QnvpState:
    """Build a state, re-projecting ``pi`` onto divergence-free fields."""
    _check_n0(float(n0))
    check_finite(pi, rho)
    return QnvpState(float(n0), leray(grid, np.asarray(pi, dtype=float)),
                     np.asarray(rho, dtype=float))


def project_qnvp(grid: TorusGrid, s: QnvpState) -> QnvpState:
    return QnvpState(s.n0, leray(grid, s.pi), s.rho)


@dataclass
class SigmaCovector:
    """Differential of a functional on the constrained set."""

    dn0: float
    dpi: np.ndarray
    drho: np.ndarray


def make_sigma_covector(grid: TorusGrid, dn0: float, dpi: np.ndarray,
                        drho: np.ndarray) -> SigmaCovector:
    return SigmaCovector(float(dn0), leray(grid, np.asarray(dpi, dtype=float)),
                         np.asarray(drho, dtype=float))


@dataclass
class ExtendedCovector:
    """Ambient extension ``(dn0 + psi_G, dpi + grad Phi_G, drho)`` of a constrained covector."""

    base: SigmaCovector
    psi_g: np.ndarray
    phi_g: np.ndarray

    def to_covector(self, grid: TorusGrid) -> Covector:
        dn = self.base.dn0 / grid.area + self.psi_g
        return Covector(dn=dn, dp=self.base.dpi + gradient(grid, self.phi_g), drho=self.base.drho)


def as_moment_state(pg: PhaseGrid, s: QnvpState) -> MomentState:
    nq = pg.q.nq
    return MomentState(n=np.full((nq, nq), s.n0), p=s.pi, dist=s.rho, centered=True)


def sigma_pairing(pg: PhaseGrid, g: SigmaCovector, ds: QnvpState) -> float:
    """Value of ``g`` on the tangent vector ``ds``."""
    return g.dn0 * ds.n0 + inner(pg.q, g.dpi, ds.pi) + phase_quad(pg, g.drho * ds.rho)


def covector_pairing(pg: PhaseGrid, g: Covector, dz: MomentDot) -> float:
    """Ambient pairing ``int g_n dn + int g_P . dP + int int g_rho drho``."""
    return inner(pg.q, g.dn, dz.n) + inner(pg.q, g.dp, dz.p) + phase_quad(pg, g.drho * dz.rho)


# ----------------------------------------------------------------------------- dynamics


_STREAM_SYMBOLS: dict = {}


def _streaming_symbol(pg: PhaseGrid) -> np.ndarray:
    """Masked Fourier symbol of ``xi . d_q`` on phase space (cached per grid)."""
    sym = _STREAM_SYMBOLS.get(pg)
    if sym is None:
        nd = 4
        ikx, iky = pg.q._ik
        mask = _bshape(pg.q.mask, nd)
        sym = mask * (_bshape(ikx, nd) * pg.xi[0] + _bshape(iky, nd) * pg.xi[1])
        _STREAM_SYMBOLS.clear()
        _STREAM_SYMBOLS[pg] = sym
    return sym


def qnvp_rhs(pg: PhaseGrid, s: QnvpState, params: PhysParams) -> QnvpState:
    """Time derivative of the quasineutral kinetic-Euler system.

    ``dn0/dt = 0``,
    ``dpi/dt = -eps Pi(div(pi pi / n0 + n0 <xi xi>)) + Pi(B J pi)``, and the
    centred kinetic equation with ``Omega = curl(pi / n0)``.

    Both rates are truncated to the dealiasing band, so a band-limited state
    stays band-limited and the semi-discrete energy is conserved.
    """
    _check_n0(s.n0)
    check_finite(s.pi, s.rho)
    grid = pg.q
    eps = params.epsilon
    n0, pi, rho = s.n0, s.pi, s.rho
    xi = pg.xi
    b = params.b()
    u = pi / n0
    _, m1, m2 = moments(pg, rho)

    stress = pi[:, None] * pi[None, :] / n0 + n0 * m2
    force = -eps * divergence_tensor(grid, stress) + b * skew(pi)
    pi_dot = leray(grid, np.stack([dealias(grid, force[i]) for i in range(2)]))

    omega = curl(grid, u, dealias=True)
    jac_u = jacobian(grid, u)    # d_i u_j
    jac_m = jacobian(grid, m1)   # d_i <xi_j>
    div_m2 = divergence_tensor(grid, m2)
    w_b = _wb(params, omega)
    jm = skew(m1)

    # Velocity-space flux: a_i0 xi_0 + a_i1 xi_1 + c_i, times rho.
    # -eps (xi . d u)_i + eps ((d <xi>) . xi)_i + B (J xi)_i + eps (d . <xi xi>)_i - W (J <xi>)_i
    a = -eps * np.stack([jac_u[:, 0], jac_u[:, 1]]) + eps * jac_m
    a[0, 1] = a[0, 1] - b
    a[1, 0] = a[1, 0] + b
    c = eps * div_m2 - w_b * jm
    flux = np.stack([(_ph(a[i, 0]) * xi[0] + _ph(a[i, 1]) * xi[1] + _ph(c[i])) * rho
                     for i in range(2)])

    # Position transport eps div_q((u - <xi> + xi) rho) and the velocity
    # divergence share one masked inverse transform.
    nd = rho.ndim
    ikx, iky = grid._ik
    mask = _bshape(grid.mask, nd)
    drift = u - m1
    acc = _streaming_symbol(pg) * fft_q(rho)
    acc += (_bshape(ikx, nd) * mask) * fft_q(_ph(drift[0]) * rho)
    acc += (_bshape(iky, nd) * mask) * fft_q(_ph(drift[1]) * rho)
    acc *= -eps
    acc -= mask * fft_q(div_v_density(pg, flux))
    return QnvpState(0.0, pi_dot, ifft_q(acc, grid))


def hamiltonian_sigma(pg: PhaseGrid, s: QnvpState) -> tuple[float, SigmaCovector]:
    """Kinetic energy on the constrained set and its differential.

    ``H = 1/2 int |xi|^2 n0 rho + 1/2 int |pi|^2 / n0``;
    ``dH/dn0 = 1/2 int |xi|^2 rho - 1/2 int |pi/n0|^2``,
    ``dH/dpi = pi / n0``, ``dH/drho = 1/2 n0 |xi|^2``.
    """
    _check_n0(s.n0)
    grid = pg.q
    xi2 = pg.xi[0] ** 2 + pg.xi[1] ** 2
    u = s.pi / s.n0
    thermal = 0.5 * phase_quad(pg, xi2 * s.rho)
    value = s.n0 * thermal + 0.5 * inner(grid, s.pi, u)
    dn0 = thermal - 0.5 * inner(grid, u, u)
    drho = np.broadcast_to(0.5 * s.n0 * xi2, pg.shape).copy()
    return value, SigmaCovector(dn0, u, drho)


# ----------------------------------------------------------------------------- extension


def psi_source(pg: PhaseGrid, s: QnvpState, g: SigmaCovector, params: PhysParams) -> np.ndarray:
    """Right-hand side of the Poisson problem ``eps Lap psi_G = source``.

    ``div([B - eps Omega] J g_pi) - eps Lap(pi.g_pi / n0) - eps dd:<(d_xi k) xi>
    + eps div <k d_q ln rho>`` with ``k = g_rho / n0``.
    """
    _check_n0(s.n0)
    grid = pg.q
    eps = params.epsilon
    n0, pi, rho = s.n0, s.pi, s.rho
    xi = pg.xi
    omega = curl(grid, pi / n0, dealias=True)
    k = g.drho / n0
    dxi_k = grad_v_observable(pg, k)
    m = np.stack([np.stack([vquad(pg, dxi_k[i] * xi[j] * rho) for j in range(2)])
                  for i in range(2)])
    # <k d_q ln rho> = int k d_q rho dxi, which avoids dividing by rho.
    k_dq = vquad(pg, k * gradient(grid, rho, dealias=True))
    src = divergence(grid, _wb(params, omega) * skew(g.dpi), dealias=True)
    src -= eps * laplacian(grid, _dot(pi, g.dpi) / n0)
    src -= eps * double_divergence(grid, m)
    src += eps * divergence(grid, k_dq, dealias=True)
    return src


def extend_covector(pg: PhaseGrid, s: QnvpState, g: SigmaCovector,
                    params: PhysParams) -> ExtendedCovector:
    """Extension that vanishes on the image of the annihilator.

    ``psi_G`` is assembled from the density substitution
    ``-pi.g_pi/n0 + Lap^{-1} div[(1/eps)(B - eps Omega) J g_pi - div<(d_xi k) xi>
    + d<k> - <d_q k>]`` with its mean removed; ``Phi_G = 0``.
    """
    _check_n0(s.n0)
    grid = pg.q
    eps = params.epsilon
    n0, pi, rho = s.n0, s.pi, s.rho
    xi = pg.xi
    omega = curl(grid, pi / n0, dealias=True)
    k = g.drho / n0
    dxi_k = grad_v_observable(pg, k)
    m = np.stack([np.stack([vquad(pg, dxi_k[i] * xi[j] * rho) for j in range(2)])
                  for i in range(2)])
    inner_vec = _wb(params, omega) * skew(g.dpi) / eps
    inner_vec = inner_vec - divergence_tensor(grid, m)
    inner_vec = inner_vec + gradient(grid, vquad(pg, k * rho), dealias=True)
    inner_vec = inner_vec - vquad(pg, gradient(grid, k, dealias=True) * rho)
    psi = -_dot(pi, g.dpi) / n0 + inv_laplacian_zero_mean(grid, divergence(grid, inner_vec,
                                                                             dealias=True))
    nq = grid.nq
    return ExtendedCovector(g, remove_mean(psi), np.zeros((nq, nq)))


def annihilator_image(pg: PhaseGrid, s: QnvpState, dn_star: np.ndarray, dphi_star: np.ndarray,
                      params: PhysParams, tol: float = ZERO_MEAN_TOL) -> MomentDot:
    """Ambient Hamiltonian vector of the annihilator element ``(dn*, grad dPhi*, 0)``.

    ``dn = -eps div(n0 grad dPhi*)``,
    ``dP = -eps grad(pi . grad dPhi*) - eps Lap(dPhi*) pi - eps n0 Omega J grad dPhi*
    - eps n0 grad dn* + n0 B J grad dPhi*``,
    ``drho = -eps grad dPhi* . d_q rho + d_xi . (eps d_q(xi . grad dPhi*) rho)``.
    """
    _check_n0(s.n0)
    for name, a in (("dn_star", dn_star), ("dphi_star", dphi_star)):
        scale = max(1.0, float(np.max(np.abs(a))))
        if abs(float(mean(a))) > tol * scale:
            raise UsageError(f"{name} must have zero mean")
    grid = pg.q
    eps = params.epsilon
    n0, pi, rho = s.n0, s.pi, s.rho
    xi = pg.xi
    omega = curl(grid, pi / n0, dealias=True)
    gphi = gradient(grid, dphi_star, dealias=True)
    dn = -eps * divergence(grid, n0 * gphi, dealias=True)
    dp = -eps * gradient(grid, _dot(pi, gphi), dealias=True)
    dp -= eps * divergence(grid, gphi, dealias=True) * pi
    dp -= eps * n0 * omega * skew(gphi)
    dp -= eps * n0 * gradient(grid, dn_star, dealias=True)
    dp += n0 * params.b() * skew(gphi)
    jac = jacobian(grid, gphi)  # d_i d_j dPhi*
    flux = np.stack([eps * (_ph(jac[i, 0]) * xi[0] + _ph(jac[i, 1]) * xi[1]) * rho
                     for i in range(2)])
    grad_rho = gradient(grid, rho, dealias=True)
    drho = -eps * (_ph(gphi[0]) * grad_rho[0] + _ph(gphi[1]) * grad_rho[1])
    drho += div_v_density(pg, flux)
    return MomentDot(n=dn, p=dp, rho=drho, nrho=n0 * drho + _ph(dn) * rho)


# ----------------------------------------------------------------------------- bracket


@dataclass
class _Features:
    """Quantities through which a covector enters the induced bracket."""

    w: np.ndarray        # g_pi
    mq: np.ndarray       # <d_q g_rho>
    a: np.ndarray        # <d_xi k>
    s: np.ndarray        # d_q . <(d_xi g_rho) xi>
    bq: np.ndarray       # <d_q k>
    dq_k: np.ndarray     # d_q k on phase space
    dxi_k: np.ndarray    # d_xi k on phase space


def _features(pg: PhaseGrid, s: QnvpState, g: SigmaCovector) -> _Features:
    grid = pg.q
    xi = pg.xi
    rho = s.rho
    chi = g.drho
    k = chi / s.n0
    dq_chi = gradient(grid, chi, dealias=True)
    dxi_chi = grad_v_observable(pg, chi)
    dq_k = gradient(grid, k, dealias=True)
    dxi_k = grad_v_observable(pg, k)
    m = np.stack([np.stack([vquad(pg, dxi_chi[i] * xi[j] * rho) for j in range(2)])
                  for i in range(2)])
    return _Features(
        w=g.dpi,
        mq=vquad(pg, dq_chi * rho),
        a=vquad(pg, dxi_k * rho),
        s=divergence_tensor(grid, m),
        bq=vquad(pg, dq_k * rho),
        dq_k=dq_k,
        dxi_k=dxi_k,
    )


def _bracket_direct(pg: PhaseGrid, s: QnvpState, f: SigmaCovector, g: SigmaCovector,
                    params: PhysParams) -> float:
    grid = pg.q
    eps = params.epsilon
    n0, rho = s.n0, s.rho
    w_b = _wb(params, curl(grid, s.pi / n0, dealias=True))
    ff = _features(pg, s, f)
    fg = _features(pg, s, g)
    q = lambda a: inner(grid, a, 1.0)  # noqa: E731
    total = q(w_b * _dot(ff.w, skew(fg.w)) * n0)
    total -= eps * q(_dot(ff.w, fg.mq) - _dot(fg.w, ff.mq))
    total -= eps * q(_dot(ff.w - ff.a, fg.s) - _dot(fg.w - fg.a, ff.s))
    kin = _dot(ff.dq_k, fg.dxi_k) - _dot(fg.dq_k, ff.dxi_k)
    total += eps * phase_quad(pg, kin * n0 * rho)
    total += phase_quad(pg, _ph(w_b) * _dot(ff.dxi_k, skew(fg.dxi_k)) * n0 * rho)
    # The printed weight of this group is "n"; on the constrained set n = n0.
    total -= eps * q((_dot(ff.bq, fg.a) - _dot(fg.bq, ff.a)) * n0)
    total -= q(w_b * _dot(ff.a, skew(fg.a)) * n0)
    return float(total)


def _bracket_extension(pg: PhaseGrid, s: QnvpState, f: SigmaCovector, g: SigmaCovector,
                       params: PhysParams) -> float:
    grid = pg.q
    ef = extend_covector(pg, s, f, params).to_covector(grid)
    eg = extend_covector(pg, s, g, params).to_covector(grid)
    xg = hamiltonian_vectorfield_E(pg, as_moment_state(pg, s), eg, params)
    return covector_pairing(pg, ef, xg)


def bracket_sigma(pg: PhaseGrid, s: QnvpState, f: SigmaCovector, g: SigmaCovector,
                  params: PhysParams, route: str = "direct") -> float:
    """Induced bracket ``{F, G}`` at ``s`` from the differentials ``f`` and ``g``.

    ``direct`` evaluates the closed-form integral expression; ``extension``
    extends both covectors to the ambient moment space and contracts them
    with the ambient Poisson tensor.
    """
    _check_n0(s.n0)
    if route == "direct":
        return _bracket_direct(pg, s, f, g, params)
    if route == "extension":
        return _bracket_extension(pg, s, f, g, params)
    raise UsageError(f"unknown bracket route {route!r}")


def sigma_flow(pg: PhaseGrid, s: QnvpState, g: SigmaCovector, params: PhysParams,
               route: str = "adjoint", galerkin: bool = True) -> QnvpState:
    """Hamiltonian vector field ``X_G`` of the induced bracket.

    ``adjoint`` transposes the closed-form bracket in its first slot, so that
    ``sigma_pairing(f, X_G) = bracket_sigma(f, g)`` for every band-limited
    ``f`` (every ``f`` when ``galerkin`` is false).
    ``extension`` takes the ambient vector field of the extended covector,
    which is tangent to the constrained set when the extension is correct;
    its momentum part is returned without Leray projection.

    With ``galerkin`` both rates are truncated to the dealiased band, the
    same truncation :func:`qnvp_rhs` applies, so ``X_H`` is the vector
    field of the time-stepped system.
    """
    _check_n0(s.n0)
    grid = pg.q
    if route == "extension":
        eg = extend_covector(pg, s, g, params).to_covector(grid)
        x = hamiltonian_vectorfield_E(pg, as_moment_state(pg, s), eg, params)
        out = QnvpState(float(mean(x.n)), x.p, x.rho)
    elif route == "adjoint":
        out = _flow_adjoint(pg, s, g, params)
    else:
        raise UsageError(f"unknown flow route {route!r}")
    if galerkin:
        out = QnvpState(out.n0, np.stack([dealias(grid, out.pi[i]) for i in range(2)]),
                        dealias(grid, out.rho))
    return out


def _flow_adjoint(pg: PhaseGrid, s: QnvpState, g: SigmaCovector,
                  params: PhysParams) -> QnvpState:
    grid = pg.q
    eps = params.epsilon
    n0, rho = s.n0, s.rho
    xi = pg.xi
    w_b = _wb(params, curl(grid, s.pi / n0, dealias=True))
    fg = _features(pg, s, g)

    c_w = w_b * n0 * skew(fg.w) - eps * fg.mq - eps * fg.s
    c_mq = eps * fg.w
    c_a = eps * fg.s + eps * n0 * fg.bq - w_b * n0 * skew(fg.a)
    c_s = eps * (fg.w - fg.a)
    c_bq = -eps * n0 * fg.a
    c_pq = eps * fg.dxi_k * n0 * rho
    c_pxi = -eps * fg.dq_k * n0 * rho + _ph(w_b) * n0 * rho * skew(fg.dxi_k)

    pi_dot = leray(grid, c_w)
    rho_dot = -divergence(grid, _ph(c_mq) * rho, dealias=True)
    rho_dot -= divergence(grid, _ph(c_bq) * rho, dealias=True) / n0
    rho_dot -= divergence(grid, c_pq, dealias=True) / n0
    jac_s = jacobian(grid, c_s)  # d_i c_j
    for i in range(2):
        rho_dot += dv_observable_transpose(pg, _ph(c_a[i]) * rho + c_pxi[i], i) / n0
        lin = (_ph(jac_s[i, 0]) * xi[0] + _ph(jac_s[i, 1]) * xi[1]) * rho
        rho_dot -= dv_observable_transpose(pg, lin, i)
    return QnvpState(0.0, pi_dot, rho_dot)


# ----------------------------------------------------------------------------- certificate


def _fourier_basis(grid: TorusGrid) -> list[np.ndarray]:
    """L2-orthonormal real Fourier modes with ``0 < |k|`` inside the dealiasing band."""
    x, y = grid.mesh
    kc = grid.kcut
    norm = np.sqrt(grid.area / 2.0)
    out = []
    for ky in range(0, kc + 1):
        for kx in range(-kc, kc + 1):
            if ky == 0 and kx <= 0:
                continue
            arg = kx * x + ky * y
            out.append(np.cos(arg) / norm)
            out.append(np.sin(arg) / norm)
    return out


def restrict_state(pg: PhaseGrid, s: QnvpState, nq: int) -> tuple[PhaseGrid, QnvpState]:
    """Spectral restriction of a state to an ``nq`` grid (same velocity grid)."""
    coarse = PhaseGrid(TorusGrid(nq, pg.q.dealias_fraction), pg.v)
    pi = np.stack([resample(pg.q, s.pi[i], nq) for i in range(2)])
    return coarse, QnvpState(s.n0, leray(coarse.q, pi), resample(pg.q, s.rho, nq))


def poisson_dirac_certificate(pg: PhaseGrid, s: QnvpState, params: PhysParams,
                              coarse_nq: int = 8, include_rho: bool = False) -> float:
    """Smallest singular value of ``(dn*, dPhi*) -> (dn - mean(dn), div dP)``.

    The inputs range over an orthonormal basis of band-limited zero-mean
    fields on a ``coarse_nq`` grid and the outputs are measured in L2.  A
    positive value certifies that no nonzero annihilator element is mapped
    into the tangent space of the constrained set.  With ``include_rho`` the
    kinetic component is appended to the output, which can only increase
    the value and no longer certifies the intersection property by itself.
    """
    _check_n0(s.n0)
    if coarse_nq > MAX_CERTIFICATE_NQ:
        raise ResourceError(f"coarse_nq={coarse_nq} exceeds {MAX_CERTIFICATE_NQ}; "
                            "the dense singular value problem would be too large")
    cpg, cs = restrict_state(pg, s, coarse_nq)
    grid = cpg.q
    if np.ndim(params.b_field):
        params = replace(params, b_field=resample(pg.q, np.asarray(params.b_field), coarse_nq))
    basis = _fourier_basis(grid)
    zero = np.zeros((coarse_nq, coarse_nq))
    wq = np.sqrt(grid.cell_area)
    wp = np.sqrt(cpg.cell_volume)
    cols = []
    for which in ("n", "phi"):
        for e in basis:
            img = annihilator_image(cpg, cs, e if which == "n" else zero,
                                    e if which == "phi" else zero, params)
            parts = [wq * remove_mean(img.n).ravel(), wq * divergence(grid, img.p).ravel()]
            if include_rho:
                parts.append(wp * img.rho.ravel())
            cols.append(np.concatenate(parts))
    mat = np.stack(cols, axis=1)
    return float(np.linalg.svd(mat, compute_uv=False)[-1])


# ----------------------------------------------------------------------------- vector identities


def stress_divergence_identity(grid: TorusGrid, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of ``div(v v) = grad(|v|^2)/2 + curl(v) J v + div(v) v``.

    For solenoidal ``v`` the last term drops; under the Leray projection the
    gradient term drops as well.
    """
    lhs = divergence_tensor(grid, v[:, None] * v[None, :])
    rhs = 0.5 * gradient(grid, _dot(v, v), dealias=True)
    rhs = rhs + curl(grid, v, dealias=True) * skew(v) + divergence(grid, v, dealias=True) * v
    return lhs, rhs


def velocity_gradient_identity(pg: PhaseGrid, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of ``(d v) . xi = xi . d v - curl(v) J xi`` on phase space."""
    xi = pg.xi
    jac = jacobian(pg.q, v)  # d_i v_j
    lhs = np.stack([_ph(jac[i, 0]) * xi[0] + _ph(jac[i, 1]) * xi[1] for i in range(2)])
    xdv = np.stack([_ph(jac[0, i]) * xi[0] + _ph(jac[1, i]) * xi[1] for i in range(2)])
    rhs = xdv - _ph(curl(pg.q, v, dealias=True)) * skew(xi)
    return lhs, rhs
