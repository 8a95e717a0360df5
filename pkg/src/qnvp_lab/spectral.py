"""Fourier pseudo-spectral calculus on the doubly periodic square [0, 2pi)^2.

Array conventions used throughout the package:

* A scalar field is an ``(nq, nq)`` array indexed ``[iy, ix]`` (x fastest).
* A vector field is a ``(2, nq, nq)`` array; component 0 is x, component 1 is y.
* Any array whose two leading axes are ``(iy, ix)`` can be differentiated, so
  phase-space arrays ``(nq, nq, nv, nv)`` go through the same routines.

Quadrature: ``int f dq`` is approximated by ``(2 pi / nq)^2 * sum(f)``.  This
equals the integral of the trigonometric interpolant exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction

import numpy as np
import scipy.fft as sfft

from .errors import NumericInputError, ParameterError, QuasineutralSingularityError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class TorusGrid:
    """Uniform collocation grid on the 2-torus with period 2pi.

    Attributes:
        nq: points per direction, even and positive.
        dealias_fraction: fraction of the resolved band kept by dealiased
            derivatives; modes with ``|k_i| > floor(fraction * nq / 2)`` are
            discarded.
    """

    nq: int
    dealias_fraction: float = float(Fraction(2, 3))

    def __post_init__(self):
        if not isinstance(self.nq, (int, np.integer)) or self.nq <= 0:
            raise ParameterError("nq must be a positive integer")
        if self.nq % 2:
            raise ParameterError("nq must be even")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise ParameterError("dealias_fraction must lie in (0, 1]")

    @property
    def spacing(self) -> float:
        return TWO_PI / self.nq

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nq, self.nq)

    @property
    def cell_area(self) -> float:
        return self.spacing**2

    @property
    def area(self) -> float:
        return TWO_PI**2

    @cached_property
    def coords(self) -> np.ndarray:
        return self.spacing * np.arange(self.nq)

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """``(X, Y)`` arrays of shape ``(nq, nq)`` indexed ``[iy, ix]``."""
        x = self.coords
        return np.meshgrid(x, x, indexing="xy")

    @cached_property
    def kx(self) -> np.ndarray:
        """Integer x-wavenumbers of the half spectrum (rfft layout)."""
        return np.fft.rfftfreq(self.nq, 1.0 / self.nq)

    @cached_property
    def ky(self) -> np.ndarray:
        return np.fft.fftfreq(self.nq, 1.0 / self.nq)

    @cached_property
    def kcut(self) -> int:
        return int(np.floor(self.dealias_fraction * self.nq / 2 + 1e-12))

    @cached_property
    def _ik(self) -> tuple[np.ndarray, np.ndarray]:
        # Nyquist entries are zeroed so the discrete derivative is real and skew.
        half = self.nq // 2
        ikx = 1j * np.where(np.abs(self.kx) == half, 0.0, self.kx)
        iky = 1j * np.where(np.abs(self.ky) == half, 0.0, self.ky)
        return ikx[None, :], iky[:, None]

    @cached_property
    def mask(self) -> np.ndarray:
        keep_x = np.abs(self.kx) <= self.kcut
        keep_y = np.abs(self.ky) <= self.kcut
        return (keep_y[:, None] & keep_x[None, :]).astype(float)

    @cached_property
    def ksq(self) -> np.ndarray:
        return self.ky[:, None] ** 2 + self.kx[None, :] ** 2

    @cached_property
    def inv_neg_ksq(self) -> np.ndarray:
        """Symbol of the zero-mean inverse Laplacian; the k=0 entry is zero."""
        ksq = self.ksq.copy()
        ksq[0, 0] = 1.0
        out = -1.0 / ksq
        out[0, 0] = 0.0
        return out


@dataclass(frozen=True)
class PhysParams:
    """Dimensionless parameters and the static magnetic field.

    ``b_field`` is either a float (uniform field) or an ``(nq, nq)`` array.
    """

    epsilon: float
    lam: float = 1.0
    delta: float = 0.1
    b_field: float | np.ndarray = field(default=1.0)

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ParameterError("epsilon must be > 0")
        if not self.lam > 0:
            raise ParameterError("lambda must be > 0")
        if not self.delta >= 0:
            raise ParameterError("delta must be >= 0")
        b = np.asarray(self.b_field, dtype=float)
        if not np.all(np.isfinite(b)):
            raise NumericInputError("b_field must be finite")
        if np.any(b == 0.0):
            raise ParameterError("b_field must be nowhere zero")

    def b(self, extra_dims: int = 0):
        """Magnetic field broadcastable against arrays with trailing axes."""
        b = self.b_field
        if np.ndim(b) == 0:
            return float(b)
        return np.asarray(b).reshape(np.shape(b) + (1,) * extra_dims)

    @property
    def b_max(self) -> float:
        return float(np.max(np.abs(self.b_field)))


def check_finite(*arrays) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NumericInputError("non-finite entries in input field")


def _bshape(k: np.ndarray, ndim: int) -> np.ndarray:
    return k.reshape(k.shape + (1,) * (ndim - 2))


def fft_q(f: np.ndarray) -> np.ndarray:
    return sfft.rfft2(f, axes=(0, 1))


def ifft_q(fh: np.ndarray, grid: TorusGrid) -> np.ndarray:
    return sfft.irfft2(fh, s=(grid.nq, grid.nq), axes=(0, 1))


def dealias(grid: TorusGrid, f: np.ndarray) -> np.ndarray:
    """Remove modes outside the dealiasing band."""
    return ifft_q(fft_q(f) * _bshape(grid.mask, f.ndim), grid)


def quad(grid: TorusGrid, f: np.ndarray) -> np.ndarray:
    """Rectangle-rule integral over the torus (leading two axes)."""
    return grid.cell_area * np.sum(f, axis=(0, 1))


def inner(grid: TorusGrid, f: np.ndarray, g: np.ndarray) -> float:
    """``int f g dq``; vector fields are contracted over components."""
    return float(grid.cell_area * np.sum(f * g))


def mean(f: np.ndarray) -> np.ndarray:
    return np.mean(f, axis=(0, 1))


def remove_mean(f: np.ndarray) -> np.ndarray:
    return f - mean(f)


def gradient(grid: TorusGrid, f: np.ndarray, dealias: bool = False) -> np.ndarray:
    """Spectral gradient; returns an array with a new leading component axis.

    Args:
        grid: torus grid.
        f: array whose leading axes are ``(iy, ix)``.
        dealias: apply the dealiasing mask (used inside nonlinear terms).

    Returns:
        ``(2,) + f.shape`` array ``(d_x f, d_y f)``.
    """
    check_finite(f)
    fh = fft_q(f)
    if dealias:
        fh *= _bshape(grid.mask, f.ndim)
    ikx, iky = grid._ik
    return np.stack(
        [ifft_q(fh * _bshape(ikx, f.ndim), grid), ifft_q(fh * _bshape(iky, f.ndim), grid)]
    )


def partial(grid: TorusGrid, f: np.ndarray, comp: int, dealias: bool = False) -> np.ndarray:
    """Single spectral partial derivative along x (comp 0) or y (comp 1)."""
    fh = fft_q(f)
    ik = grid._ik[comp]
    sym = ik * grid.mask if dealias else ik
    return ifft_q(fh * _bshape(sym, f.ndim), grid)


def divergence(grid: TorusGrid, v: np.ndarray, dealias: bool = False) -> np.ndarray:
    """``d_x v[0] + d_y v[1]`` for vector arrays with any trailing axes."""
    check_finite(v)
    ikx, iky = grid._ik
    nd = v.ndim - 1
    acc = fft_q(v[0]) * _bshape(ikx, nd) + fft_q(v[1]) * _bshape(iky, nd)
    if dealias:
        acc *= _bshape(grid.mask, nd)
    return ifft_q(acc, grid)


def curl(grid: TorusGrid, v: np.ndarray, dealias: bool = False) -> np.ndarray:
    """Scalar curl ``d_x v_y - d_y v_x``."""
    check_finite(v)
    ikx, iky = grid._ik
    nd = v.ndim - 1
    acc = fft_q(v[1]) * _bshape(ikx, nd) - fft_q(v[0]) * _bshape(iky, nd)
    if dealias:
        acc *= _bshape(grid.mask, nd)
    return ifft_q(acc, grid)


def divergence_curl(grid: TorusGrid, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return divergence(grid, v), curl(grid, v)


def laplacian(grid: TorusGrid, f: np.ndarray) -> np.ndarray:
    check_finite(f)
    return ifft_q(fft_q(f) * _bshape(-grid.ksq, f.ndim), grid)


def inv_laplacian_zero_mean(grid: TorusGrid, f: np.ndarray) -> np.ndarray:
    """Solve ``Lap u = f - mean(f)`` with ``mean(u) = 0``.

    The mean of the input is discarded silently.
    """
    check_finite(f)
    return ifft_q(fft_q(f) * _bshape(grid.inv_neg_ksq, f.ndim), grid)


def hodge_decompose(grid: TorusGrid, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split ``p = grad(Phi) + pi`` with ``mean(Phi) = 0`` and ``div pi = 0``.

    The constant mode of ``p`` belongs to ``pi``.
    """
    phi = inv_laplacian_zero_mean(grid, divergence(grid, p))
    return phi, p - gradient(grid, phi)


def leray(grid: TorusGrid, p: np.ndarray) -> np.ndarray:
    """Orthogonal projection onto divergence-free fields."""
    return hodge_decompose(grid, p)[1]


def skew(v: np.ndarray) -> np.ndarray:
    """Apply the quarter-turn J, ``J(a, b) = (-b, a)``, on the leading axis."""
    return np.stack([-v[1], v[0]])


def solve_electrostatic_potential(grid: TorusGrid, n: np.ndarray, params: PhysParams) -> np.ndarray:
    """Zero-mean potential with ``delta^2 * lam * Lap(phi) = n - mean(n)``."""
    if params.delta == 0:
        raise QuasineutralSingularityError(
            "electrostatic solve is singular at delta = 0; use the quasineutral model"
        )
    return inv_laplacian_zero_mean(grid, n) / (params.delta**2 * params.lam)


def l2_norm(grid: TorusGrid, f: np.ndarray) -> float:
    return float(np.sqrt(grid.cell_area * np.sum(np.abs(f) ** 2)))


def mode_coefficient(grid: TorusGrid, f: np.ndarray, kx: int, ky: int) -> complex:
    """Complex ``c`` with ``Re(c exp(i(kx x + ky y)))`` the ``(kx, ky)`` content of real ``f``."""
    fh = np.fft.fft2(f) / grid.nq**2
    c = complex(fh[ky % grid.nq, kx % grid.nq])
    return 2.0 * c if (kx, ky) != (0, 0) else c


def mode_amplitude(grid: TorusGrid, f: np.ndarray, kx: int, ky: int) -> float:
    """Amplitude ``a`` of ``a cos(kx x + ky y + phase)`` contained in ``f``."""
    return float(abs(mode_coefficient(grid, f, kx, ky)))


def resample(grid: TorusGrid, f: np.ndarray, nq_new: int) -> np.ndarray:
    """Spectrally resample ``f`` onto an ``nq_new`` grid.

    Modes that do not fit strictly below the new Nyquist wavenumber are
    dropped, so restricting and then prolonging is a projection.
    """
    if nq_new % 2:
        raise ParameterError("nq must be even")
    full = np.fft.fft2(f, axes=(0, 1))
    ks = np.fft.fftfreq(grid.nq, 1.0 / grid.nq)
    keep = np.abs(ks) < min(grid.nq, nq_new) // 2
    out = np.zeros((nq_new, nq_new) + f.shape[2:], dtype=complex)
    idx_old = np.nonzero(keep)[0]
    idx_new = ks[idx_old].astype(int) % nq_new
    out[np.ix_(idx_new, idx_new)] = full[np.ix_(idx_old, idx_old)]
    out *= (nq_new / grid.nq) ** 2
    return np.fft.ifft2(out, axes=(0, 1)).real
