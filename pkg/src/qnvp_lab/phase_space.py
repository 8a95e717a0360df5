"""Phase-space grids, velocity calculus, moments and the centering transform.

Phase-space arrays have shape ``(nq, nq, nv, nv)`` indexed
``[iy, ix, ivy, ivx]``.  Velocity component 0 (x) lives on axis 3 and
component 1 (y) on axis 2.

Two velocity difference operators are provided.  Both use the 4th-order
centred stencil in the interior:

* :func:`dv_density` treats the field as zero outside the velocity box.  It is
  skew-symmetric and is used for distributions and their fluxes.
* :func:`dv_observable` closes the stencil with one-sided 4th-order rows, so
  polynomials of degree <= 4 are differentiated exactly up to the boundary.
  It is used for test functions (covectors, Lie algebra elements), which are
  not small at the edge of the box.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
import scipy.linalg

from .errors import DensityFloorError, ParameterError, UsageError
from .spectral import TorusGrid, check_finite

_C1 = 8.0 / 12.0
_C2 = 1.0 / 12.0
# One-sided 4th-order rows for the first two cells (mirrored, negated at the far end).
_EDGE0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_EDGE1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0


@dataclass(frozen=True)
class VelocityGrid:
    """Cell-centred grid on ``[-vmax, vmax]^2``.

    Attributes:
        nv: cells per direction (>= 8).
        vmax: half-width of the velocity box.
        tail_tol: boundary-value tolerance used by :func:`check_tail`.
    """

    nv: int
    vmax: float = 6.0
    tail_tol: float = 1e-10

    def __post_init__(self):
        if not isinstance(self.nv, (int, np.integer)) or self.nv < 8:
            raise ParameterError("nv must be an integer >= 8")
        if not self.vmax > 0:
            raise ParameterError("vmax must be > 0")

    @property
    def spacing(self) -> float:
        return 2.0 * self.vmax / self.nv

    @property
    def cell_area(self) -> float:
        return self.spacing**2

    @cached_property
    def points(self) -> np.ndarray:
        return -self.vmax + self.spacing * (np.arange(self.nv) + 0.5)

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """``(VX, VY)`` of shape ``(nv, nv)`` indexed ``[ivy, ivx]``."""
        return np.meshgrid(self.points, self.points, indexing="xy")


@dataclass(frozen=True)
class PhaseGrid:
    """Product of a torus grid and a velocity grid."""

    q: TorusGrid
    v: VelocityGrid

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.q.nq, self.q.nq, self.v.nv, self.v.nv)

    @property
    def cell_volume(self) -> float:
        return self.q.cell_area * self.v.cell_area

    @cached_property
    def xi(self) -> np.ndarray:
        """Velocity coordinates, shape ``(2, 1, 1, nv, nv)``."""
        vx, vy = self.v.mesh
        return np.stack([vx, vy])[:, None, None]

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)


@dataclass
class MomentState:
    """Point of the dual of the semidirect product algebra.

    ``dist`` holds ``f`` when ``centered`` is false and ``rho`` otherwise.
    """

    n: np.ndarray
    p: np.ndarray
    dist: np.ndarray
    centered: bool = False


def _vaxis(comp: int) -> int:
    return 3 - comp


def _shift(a: np.ndarray, s: int, axis: int) -> np.ndarray:
    """``out[i] = a[i + s]`` along ``axis`` with zeros outside."""
    out = np.zeros_like(a)
    n = a.shape[axis]
    src = [slice(None)] * a.ndim
    dst = [slice(None)] * a.ndim
    if s > 0:
        src[axis] = slice(s, n)
        dst[axis] = slice(0, n - s)
    else:
        src[axis] = slice(0, n + s)
        dst[axis] = slice(-s, n)
    out[tuple(dst)] = a[tuple(src)]
    return out


def _dv_centred(a: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Centred 4th-order difference with zeros outside the box."""
    am = np.moveaxis(a, axis, -1)
    om = np.empty(am.shape)
    c1, c2 = _C1 / h, _C2 / h
    np.subtract(am[..., 2:], am[..., :-2], out=om[..., 1:-1])
    om[..., 0] = am[..., 1]
    om[..., -1] = -am[..., -2]
    om *= c1
    om[..., 2:-2] -= c2 * (am[..., 4:] - am[..., :-4])
    om[..., 0] -= c2 * am[..., 2]
    om[..., 1] -= c2 * am[..., 3]
    om[..., -1] += c2 * am[..., -3]
    om[..., -2] += c2 * am[..., -4]
    return np.moveaxis(om, -1, axis)


def dv_density(pg: PhaseGrid, g: np.ndarray, comp: int) -> np.ndarray:
    """Velocity derivative of a distribution-like field (zero extension)."""
    return _dv_centred(g, g.ndim - 4 + _vaxis(comp), pg.v.spacing)


def dv_observable(pg: PhaseGrid, h: np.ndarray, comp: int) -> np.ndarray:
    """Velocity derivative of a test function (polynomial-exact closure)."""
    axis = h.ndim - 4 + _vaxis(comp)
    out = _dv_centred(h, axis, pg.v.spacing)
    hm = np.moveaxis(h, axis, -1)
    om = np.moveaxis(out, axis, -1)
    dv = pg.v.spacing
    om[..., 0] = hm[..., :5] @ _EDGE0 / dv
    om[..., 1] = hm[..., :5] @ _EDGE1 / dv
    om[..., -1] = -(hm[..., ::-1][..., :5] @ _EDGE0) / dv
    om[..., -2] = -(hm[..., ::-1][..., :5] @ _EDGE1) / dv
    return out


def dv_observable_transpose(pg: PhaseGrid, c: np.ndarray, comp: int) -> np.ndarray:
    """Matrix transpose of :func:`dv_observable` along one velocity axis."""
    axis = c.ndim - 4 + _vaxis(comp)
    dv = pg.v.spacing
    cm = np.moveaxis(c, axis, -1)
    # Interior part: the centred rows are skew, so their transpose is the negative.
    interior = np.array(cm)
    interior[..., :2] = 0.0
    interior[..., -2:] = 0.0
    out = -_dv_centred(interior, interior.ndim - 1, dv)
    out[..., :5] += cm[..., 0:1] * _EDGE0 / dv + cm[..., 1:2] * _EDGE1 / dv
    out[..., -5:] -= (cm[..., -1:] * _EDGE0 / dv + cm[..., -2:-1] * _EDGE1 / dv)[..., ::-1]
    return np.moveaxis(out, -1, axis)


def grad_v_observable(pg: PhaseGrid, h: np.ndarray) -> np.ndarray:
    return np.stack([dv_observable(pg, h, 0), dv_observable(pg, h, 1)])


def div_v_density(pg: PhaseGrid, flux: np.ndarray) -> np.ndarray:
    """``d_vx flux[0] + d_vy flux[1]`` with the zero-extension stencil."""
    return dv_density(pg, flux[0], 0) + dv_density(pg, flux[1], 1)


def vquad(pg: PhaseGrid, g: np.ndarray) -> np.ndarray:
    """Rectangle-rule velocity integral (trailing two axes)."""
    return pg.v.cell_area * np.sum(g, axis=(-2, -1))


def phase_quad(pg: PhaseGrid, g: np.ndarray) -> float:
    return float(pg.cell_volume * np.sum(g))


def moments(pg: PhaseGrid, rho: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(<1>, <xi>, <xi xi>)`` with shapes (nq,nq), (2,nq,nq), (2,2,nq,nq)."""
    v = pg.v.points
    w = pg.v.cell_area
    over_y = rho.sum(axis=-2)  # function of vx
    over_x = rho.sum(axis=-1)  # function of vy
    m0 = w * over_x.sum(axis=-1)
    m1 = w * np.stack([over_y @ v, over_x @ v])
    mxy = w * ((rho @ v) @ v)
    m2 = np.empty((2, 2) + m0.shape)
    m2[0, 0] = w * (over_y @ v**2)
    m2[1, 1] = w * (over_x @ v**2)
    m2[0, 1] = m2[1, 0] = mxy
    return m0, m1, m2


_SELECTORS = ("1", "xi", "xixi")


def velocity_moments(pg: PhaseGrid, rho: np.ndarray, q: str):
    """Pointwise velocity moment ``<Q>`` for ``Q`` in ``{"1", "xi", "xixi"}``."""
    if q not in _SELECTORS:
        raise UsageError(f"unknown moment selector {q!r}; expected one of {_SELECTORS}")
    check_finite(rho)
    m0, m1, m2 = moments(pg, rho)
    return {"1": m0, "xi": m1, "xixi": m2}[q]


def moment_map(pg: PhaseGrid, f: np.ndarray) -> MomentState:
    """Density and momentum of ``f`` together with ``f`` itself."""
    check_finite(f)
    n, p, _ = moments(pg, f)
    return MomentState(n=n, p=p, dist=f, centered=False)


def _lagrange_weights(theta: np.ndarray) -> list[np.ndarray]:
    t = theta
    return [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]


def _shift_axis(g: np.ndarray, axis: int, shift: np.ndarray, h: float) -> np.ndarray:
    """Evaluate ``g(xi + shift)`` along one velocity axis by cubic Lagrange."""
    nv = g.shape[axis]
    t = shift / h
    m = np.floor(t)
    theta = t - m
    m = np.clip(m, -(nv + 2), nv + 2).astype(np.int64)
    pad = nv + 4
    gm = np.moveaxis(g, axis, -1)
    padded = np.zeros(gm.shape[:-1] + (nv + 2 * pad,))
    padded[..., pad : pad + nv] = gm
    # m and theta are per q-point; broadcast over the remaining velocity axis.
    m_b = m[:, :, None, None]
    base = np.arange(nv)[None, None, None, :] + m_b + pad
    base = np.broadcast_to(base, gm.shape)
    out = np.zeros_like(gm)
    for offset, w in zip((-1, 0, 1, 2), _lagrange_weights(theta)):
        out += w[:, :, None, None] * np.take_along_axis(padded, base + offset, axis=-1)
    return np.moveaxis(out, -1, axis)


def shift_velocity(pg: PhaseGrid, g: np.ndarray, shift: np.ndarray) -> np.ndarray:
    """Return ``g(q, xi + shift(q))``, zero outside the velocity box."""
    h = pg.v.spacing
    out = _shift_axis(g, 3, shift[0], h)
    return _shift_axis(out, 2, shift[1], h)


def _checked_velocity(n: np.ndarray, p: np.ndarray, n_floor: float) -> np.ndarray:
    if np.min(n) < n_floor:
        raise DensityFloorError(f"density {np.min(n):.3e} below floor {n_floor:.1e}")
    return p / n


def transform_E(pg: PhaseGrid, s: MomentState, n_floor: float = 1e-8) -> MomentState:
    """Centre and normalize: ``rho(q, xi) = f(q, xi + P/n) / n``."""
    if s.centered:
        raise UsageError("transform_E expects an uncentered state")
    u = _checked_velocity(s.n, s.p, n_floor)
    rho = shift_velocity(pg, s.dist, u) / s.n[:, :, None, None]
    return MomentState(n=s.n, p=s.p, dist=rho, centered=True)


def inverse_E(pg: PhaseGrid, s: MomentState, n_floor: float = 1e-8) -> MomentState:
    """Undo :func:`transform_E`: ``f(q, v) = n rho(q, v - P/n)``."""
    if not s.centered:
        raise UsageError("inverse_E expects a centered state")
    u = _checked_velocity(s.n, s.p, n_floor)
    f = s.n[:, :, None, None] * shift_velocity(pg, s.dist, -u)
    return MomentState(n=s.n, p=s.p, dist=f, centered=False)


def maxwellian(vg: VelocityGrid, density=1.0, drift=(0.0, 0.0), temperature=1.0) -> np.ndarray:
    """Sampled Maxwellian on the velocity grid, shape ``(nv, nv)``."""
    vx, vy = vg.mesh
    r2 = (vx - drift[0]) ** 2 + (vy - drift[1]) ** 2
    return density / (2.0 * np.pi * temperature) * np.exp(-r2 / (2.0 * temperature))


def rotation_generator(vg: VelocityGrid) -> np.ndarray:
    """Dense matrix of ``g -> div_v(J v g)`` on flattened ``[ivy, ivx]`` arrays."""
    nv = vg.nv
    d = np.zeros((nv, nv))
    for i in range(nv):
        for off, c in ((-2, _C2), (-1, -_C1), (1, _C1), (2, -_C2)):
            if 0 <= i + off < nv:
                d[i, i + off] = c / vg.spacing
    eye = np.eye(nv)
    vx, vy = vg.mesh
    dx = np.kron(eye, d)
    dy = np.kron(d, eye)
    return -vy.ravel()[:, None] * dx + vx.ravel()[:, None] * dy


@lru_cache(maxsize=8)
def _rotation_kernel(nv: int, vmax: float) -> np.ndarray:
    return scipy.linalg.null_space(rotation_generator(VelocityGrid(nv, vmax)), rcond=1e-12)


def isotropic_equilibrium(vg: VelocityGrid, temperature: float = 1.0) -> np.ndarray:
    """Discrete isotropic Maxwellian with unit mass.

    A sampled Maxwellian is not annihilated by the discrete rotation operator.
    This returns its orthogonal projection onto that operator's kernel,
    symmetrized under ``xi -> -xi`` and rescaled to unit mass, so that the
    gyration term vanishes to round-off.
    """
    g = maxwellian(vg, temperature=temperature).ravel()
    basis = _rotation_kernel(vg.nv, float(vg.vmax))
    p = basis @ (basis.T @ g)
    p = p.reshape(vg.nv, vg.nv)
    p = 0.5 * (p + p[::-1, ::-1])
    return p / (vg.cell_area * p.sum())


def boundary_max(pg: PhaseGrid, g: np.ndarray, width: int = 2) -> float:
    """Largest magnitude in the outermost ``width`` velocity cells."""
    a = np.abs(g)
    edges = [
        a[..., :width, :], a[..., -width:, :], a[..., :, :width], a[..., :, -width:],
    ]
    return float(max(e.max() for e in edges))


def check_tail(pg: PhaseGrid, g: np.ndarray, name: str = "distribution") -> float:
    """Warn when boundary values exceed ``tail_tol`` relative to the peak."""
    peak = float(np.max(np.abs(g)))
    ratio = boundary_max(pg, g) / peak if peak > 0 else 0.0
    if ratio > pg.v.tail_tol:
        warnings.warn(
            f"{name}: boundary/peak ratio {ratio:.2e} exceeds tail_tol {pg.v.tail_tol:.1e}; "
            "increase vmax",
            RuntimeWarning,
            stacklevel=2,
        )
    return ratio


def normalization_defect(pg: PhaseGrid, rho: np.ndarray) -> float:
    """``max |int rho dxi - 1|`` over the torus (diagnostic only)."""
    return float(np.max(np.abs(vquad(pg, rho) - 1.0)))
