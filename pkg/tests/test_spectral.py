import numpy as np
import pytest
from conftest import rel
from hypothesis import given
from hypothesis import strategies as st

from qnvp_lab.errors import NumericInputError, ParameterError, QuasineutralSingularityError
from qnvp_lab.sampling import random_field, random_solenoidal
from qnvp_lab.spectral import (
    PhysParams,
    TorusGrid,
    curl,
    divergence,
    divergence_curl,
    gradient,
    hodge_decompose,
    inner,
    inv_laplacian_zero_mean,
    laplacian,
    leray,
    mean,
    mode_amplitude,
    mode_coefficient,
    resample,
    skew,
    solve_electrostatic_potential,
)

seeds = st.integers(0, 2**31 - 1)


def test_grid_rejects_odd_and_nonpositive():
    with pytest.raises(ParameterError, match="even"):
        TorusGrid(33)
    with pytest.raises(ParameterError):
        TorusGrid(0)
    with pytest.raises(ParameterError):
        TorusGrid(16, dealias_fraction=0.0)


def test_gradient_of_cosine(grid16):
    x, _ = grid16.mesh
    g = gradient(grid16, np.cos(x))
    assert np.allclose(g[0], -np.sin(x), atol=1e-13)
    assert np.allclose(g[1], 0.0, atol=1e-13)


def test_gradient_of_constant_is_zero(grid16):
    assert np.max(np.abs(gradient(grid16, np.full(grid16.shape, 3.7)))) < 1e-14


def test_gradient_rejects_nan(grid16):
    f = np.zeros(grid16.shape)
    f[1, 2] = np.nan
    with pytest.raises(NumericInputError):
        gradient(grid16, f)


def _fd4(f, h, axis):
    return (8 * (np.roll(f, -1, axis) - np.roll(f, 1, axis))
            - (np.roll(f, -2, axis) - np.roll(f, 2, axis))) / (12 * h)


def test_gradient_matches_fourth_order_differences_at_rate_four():
    # finite-difference oracle: the error of the FD4 stencil against the
    # spectral derivative drops by ~16 per grid doubling
    errs = []
    for nq in (32, 64, 128):
        grid = TorusGrid(nq)
        x, y = grid.mesh
        f = np.sin(x + 2 * y) + 0.5 * np.cos(3 * x - y)
        g = gradient(grid, f)
        errs.append(max(np.max(np.abs(_fd4(f, grid.spacing, 1) - g[0])),
                        np.max(np.abs(_fd4(f, grid.spacing, 0) - g[1]))))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(rates - 4.0) < 0.2)


def test_divergence_curl_examples(grid16):
    x, y = grid16.mesh
    d, c = divergence_curl(grid16, gradient(grid16, np.sin(x)))
    assert np.allclose(d, -np.sin(x), atol=1e-13) and np.max(np.abs(c)) < 1e-13
    v = skew(gradient(grid16, np.cos(y)))  # J grad cos(y) = (sin y, 0)
    assert np.allclose(v[0], np.sin(y)) and np.allclose(v[1], 0.0)
    d, c = divergence_curl(grid16, v)
    assert np.max(np.abs(d)) < 1e-13
    # curl = d_x v_y - d_y v_x, which equals -div(J v)
    assert np.allclose(c, -np.cos(y), atol=1e-13)
    assert np.allclose(c, -divergence(grid16, skew(v)), atol=1e-13)
    d, c = divergence_curl(grid16, np.zeros((2,) + grid16.shape))
    assert not d.any() and not c.any()


@given(seeds)
def test_curl_grad_and_div_skew_grad_vanish(seed):
    grid = TorusGrid(16)
    f = random_field(grid, 5, np.random.default_rng(seed))
    assert np.max(np.abs(curl(grid, gradient(grid, f)))) < 1e-12
    assert np.max(np.abs(divergence(grid, skew(gradient(grid, f))))) < 1e-12


def test_inverse_laplacian_eigenmode(grid16):
    x, y = grid16.mesh
    f = np.cos(x) * np.cos(y)
    assert np.allclose(inv_laplacian_zero_mean(grid16, f), -f / 2, atol=1e-14)
    assert not inv_laplacian_zero_mean(grid16, np.zeros(grid16.shape)).any()


@given(seeds)
def test_inverse_laplacian_round_trip(seed):
    grid = TorusGrid(16)
    u = random_field(grid, 6, np.random.default_rng(seed)) + 2.0
    back = inv_laplacian_zero_mean(grid, laplacian(grid, u))
    assert rel(back, u - mean(u)) < 1e-12
    f = random_field(grid, 6, np.random.default_rng(seed + 1)) + 1.0
    sol = inv_laplacian_zero_mean(grid, f)
    assert rel(laplacian(grid, sol), f - mean(f)) < 1e-12
    assert abs(mean(sol)) < 1e-14


def test_hodge_examples(grid16):
    x, y = grid16.mesh
    phi, pi = hodge_decompose(grid16, gradient(grid16, np.sin(x)))
    assert np.allclose(phi, np.sin(x), atol=1e-13) and np.max(np.abs(pi)) < 1e-13
    p = np.stack([np.sin(y), np.zeros(grid16.shape)])
    phi, pi = hodge_decompose(grid16, p)
    assert np.max(np.abs(phi)) < 1e-13 and np.allclose(pi, p, atol=1e-13)


@given(seeds)
def test_hodge_round_trip_and_projection_properties(seed):
    grid = TorusGrid(16)
    rng = np.random.default_rng(seed)
    p = np.stack([random_field(grid, 7, rng) for _ in range(2)])
    phi, pi = hodge_decompose(grid, p)
    assert rel(gradient(grid, phi) + pi, p) < 1e-12
    assert abs(mean(phi)) < 1e-14
    assert np.max(np.abs(divergence(grid, pi))) < 1e-12 * np.max(np.abs(p))
    assert rel(leray(grid, leray(grid, p)), leray(grid, p)) < 1e-12
    w = random_solenoidal(grid, 5, rng)
    assert abs(inner(grid, p - leray(grid, p), w)) < 1e-12 * inner(grid, p, p)


def test_gradient_of_hodge_potential_recovers_curl_free_part(grid16, rng):
    p = np.stack([random_field(grid16, 6, rng) for _ in range(2)])
    phi, pi = hodge_decompose(grid16, p)
    curl_free = gradient(grid16, inv_laplacian_zero_mean(grid16, divergence(grid16, p)))
    assert rel(curl_free, p - pi) < 1e-12


def test_electrostatic_eigenmode():
    grid = TorusGrid(16)
    x, _ = grid.mesh
    params = PhysParams(epsilon=1.0, lam=1.0, delta=0.1)
    a = 0.03
    phi = solve_electrostatic_potential(grid, 1.0 + a * np.cos(x), params)
    assert np.allclose(phi, -100 * a * np.cos(x), atol=1e-12)
    assert not solve_electrostatic_potential(grid, np.full(grid.shape, 2.0), params).any()


def test_electrostatic_residual_on_random_density(grid16, rng):
    params = PhysParams(epsilon=1.0, lam=1.7, delta=0.2)
    n = 1.0 + 0.2 * random_field(grid16, 5, rng)
    phi = solve_electrostatic_potential(grid16, n, params)
    lhs = params.delta**2 * params.lam * laplacian(grid16, phi)
    assert rel(lhs, n - mean(n)) < 1e-12 and abs(mean(phi)) < 1e-14


def test_electrostatic_requires_positive_delta(grid16):
    with pytest.raises(QuasineutralSingularityError):
        solve_electrostatic_potential(grid16, np.ones(grid16.shape), PhysParams(1.0, delta=0.0))


def test_params_reject_zero_field():
    with pytest.raises(ParameterError):
        PhysParams(epsilon=1.0, b_field=np.array([[1.0, 0.0]]))
    with pytest.raises(ParameterError):
        PhysParams(epsilon=0.0)


@given(seeds)
def test_quadrature_matches_parseval(seed):
    grid = TorusGrid(16)
    rng = np.random.default_rng(seed)
    f, g = random_field(grid, 7, rng), random_field(grid, 7, rng)
    fh, gh = np.fft.fft2(f), np.fft.fft2(g)
    spectral = float(np.real(np.sum(fh * np.conj(gh)))) * grid.area / grid.nq**4
    assert abs(inner(grid, f, g) - spectral) <= 1e-12 * max(1.0, abs(spectral))


def test_mode_amplitude_and_coefficient(grid16):
    x, y = grid16.mesh
    f = 0.3 * np.cos(x + 0.4) + 0.1 * np.sin(2 * y)
    assert mode_amplitude(grid16, f, 1, 0) == pytest.approx(0.3)
    assert mode_amplitude(grid16, f, 0, 2) == pytest.approx(0.1)
    c = mode_coefficient(grid16, f, 1, 0)
    assert np.allclose(np.real(c * np.exp(1j * x)), 0.3 * np.cos(x + 0.4))


def test_resample_is_exact_on_resolved_modes(rng):
    fine = TorusGrid(32)
    f = random_field(fine, 3, rng)
    coarse = resample(fine, f, 8)
    assert rel(resample(TorusGrid(8), coarse, 32), f) < 1e-13
    with pytest.raises(ParameterError):
        resample(fine, f, 9)
