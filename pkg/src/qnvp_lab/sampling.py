"""Random band-limited fields and states used by tests and the verify suite.

Everything here is band-limited in position so that the nonlinear products
evaluated by brackets and right-hand sides stay inside the dealiasing band.
Velocity profiles of centred distributions are Gaussians of width 0.6 times
low-degree polynomials, so their values in the outermost velocity cells are
below 1e-15 at the default ``vmax = 6``.
"""

from __future__ import annotations

import numpy as np

from .algebra import AlgebraElement
from .phase_space import MomentState, PhaseGrid
from .spectral import TorusGrid, gradient, skew

RHO_WIDTH = 0.6


def random_field(grid: TorusGrid, kmax: int, rng: np.random.Generator, amplitude: float = 1.0,
                 zero_mean: bool = False) -> np.ndarray:
    """Real trigonometric polynomial with ``|k_x|, |k_y| <= kmax`` and unit RMS times amplitude."""
    nq = grid.nq
    if kmax >= nq // 2:
        raise ValueError("kmax must be below the Nyquist wavenumber")
    coeffs = np.zeros((nq, nq), dtype=complex)
    ks = np.fft.fftfreq(nq, 1.0 / nq)
    keep = (np.abs(ks)[:, None] <= kmax) & (np.abs(ks)[None, :] <= kmax)
    coeffs[keep] = rng.standard_normal(keep.sum()) + 1j * rng.standard_normal(keep.sum())
    if zero_mean:
        coeffs[0, 0] = 0.0
    f = np.fft.ifft2(coeffs).real
    rms = np.sqrt(np.mean(f**2))
    return amplitude * f / rms if rms > 0 else f


def random_solenoidal(grid: TorusGrid, kmax: int, rng, amplitude: float = 1.0,
                      mean_flow: float = 0.0) -> np.ndarray:
    """Divergence-free field ``J grad(psi)`` plus an optional random constant flow."""
    psi = random_field(grid, kmax, rng, zero_mean=True)
    v = skew(gradient(grid, psi))
    v *= amplitude / np.sqrt(np.mean(v**2))
    if mean_flow:
        v += mean_flow * rng.standard_normal(2)[:, None, None]
    return v


def random_algebra_element(pg: PhaseGrid, kmax: int, rng, degree: int = 2) -> AlgebraElement:
    """Element with band-limited coefficients and ``chi`` polynomial in ``v``."""
    grid = pg.q
    psi = random_field(grid, kmax, rng)
    u = np.stack([random_field(grid, kmax, rng), random_field(grid, kmax, rng)])
    vx, vy = pg.xi[0], pg.xi[1]
    chi = pg.zeros()
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            c = random_field(grid, kmax, rng) / (1.0 + i + j) ** 2
            chi = chi + c[:, :, None, None] * vx**i * vy**j / 3.0 ** (i + j)
    return AlgebraElement(psi, u, chi)


def random_distribution(pg: PhaseGrid, rng, kmax: int = 2, drift: float = 0.3,
                        width: float = 0.8) -> np.ndarray:
    """Smooth uncentered distribution with mean velocity of size about ``drift``.

    ``f = M(v) [n(q) + a(q).v/w^2 + b(q)(|v|^2/(2w^2) - 1)]`` with a Gaussian
    ``M`` of width ``w``; density stays within about 20% of one.
    """
    grid = pg.q
    vx, vy = pg.xi[0] / width, pg.xi[1] / width
    m = np.exp(-(vx**2 + vy**2) / 2.0) / (2.0 * np.pi * width**2)
    n = 1.0 + random_field(grid, kmax, rng, 0.1)
    a = [random_field(grid, kmax, rng, drift / width) for _ in range(2)]
    b = random_field(grid, kmax, rng, 0.1)
    shape = lambda c: c[:, :, None, None]  # noqa: E731
    return m * (shape(n) + shape(a[0]) * vx + shape(a[1]) * vy
                + shape(b) * ((vx**2 + vy**2) / 2.0 - 1.0))


def random_moment_state(pg: PhaseGrid, rng, kmax: int = 2, flow: float = 0.3,
                        density: float = 0.1) -> MomentState:
    """Centred state whose mean velocity ``u = P/n`` is band-limited.

    Built from band-limited ``n`` and ``u`` so that every product formed by
    the moment equations stays inside the dealiasing band.
    """
    grid = pg.q
    n = 1.0 + random_field(grid, kmax, rng, density)
    u = np.stack([random_field(grid, kmax, rng, flow) for _ in range(2)])
    return MomentState(n, n * u, random_rho(pg, rng, kmax), centered=True)


def random_rho(pg: PhaseGrid, rng, kmax: int = 2, amplitude: float = 0.15,
               width: float = RHO_WIDTH) -> np.ndarray:
    """Unit-mass, narrow, band-limited centred distribution (not positivity-checked)."""
    grid = pg.q
    s = width
    x, y = pg.xi[0] / s, pg.xi[1] / s
    m = np.exp(-(x**2 + y**2) / 2.0) / (2.0 * np.pi * s**2)
    shape = lambda c: c[:, :, None, None]  # noqa: E731
    fld = lambda: shape(random_field(grid, kmax, rng, amplitude))  # noqa: E731
    return m * (1.0 + fld() * x + fld() * y + fld() * ((x**2 + y**2) / 2.0 - 1.0) + fld() * x * y)


def random_qnvp_arrays(pg: PhaseGrid, rng, n0: float = 1.0, kmax: int = 2,
                       flow: float = 0.3) -> tuple[float, np.ndarray, np.ndarray]:
    """``(n0, pi, rho)`` with solenoidal band-limited ``pi`` and narrow ``rho``."""
    pi = n0 * random_solenoidal(pg.q, kmax, rng, flow, mean_flow=0.1)
    return n0, pi, random_rho(pg, rng, kmax)


def random_test_function(pg: PhaseGrid, rng, kmax: int = 2, degree: int = 3) -> np.ndarray:
    """Smooth phase-space test function: polynomial in velocity, band-limited in position."""
    vx, vy = pg.xi[0], pg.xi[1]
    out = pg.zeros()
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            c = random_field(pg.q, kmax, rng) / (1.0 + i + j) ** 2
            out = out + c[:, :, None, None] * vx**i * vy**j
    return out
