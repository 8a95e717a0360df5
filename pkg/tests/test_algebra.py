import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qnvp_lab.algebra import (
    AlgebraElement,
    embed,
    jacobi_residual,
    lie_bracket_h,
    lie_bracket_s,
    pairing,
    particle_bracket,
    poisson_map_residual,
    poisson_map_scale,
)
from qnvp_lab.errors import UsageError
from qnvp_lab.phase_space import MomentState, PhaseGrid, VelocityGrid, moment_map
from qnvp_lab.sampling import random_algebra_element, random_distribution, random_test_function
from qnvp_lab.spectral import PhysParams, TorusGrid

seeds = st.integers(0, 2**31 - 1)
PG = PhaseGrid(TorusGrid(16), VelocityGrid(16))


def _params(pg, eps=0.7):
    x, _ = pg.q.mesh
    return PhysParams(epsilon=eps, b_field=1.0 + 0.2 * np.cos(x))


def _norm(pg, a):
    return float(np.sqrt(np.sum(a**2) * pg.q.spacing**2 * pg.v.cell_area))


def test_canonical_term_example():
    x, _ = PG.q.mesh
    vx = PG.xi[0]
    h = np.broadcast_to(np.sin(x)[:, :, None, None], PG.shape)
    out = particle_bracket(PG, h, np.broadcast_to(vx, PG.shape), PhysParams(epsilon=1.0))
    assert np.allclose(out, np.cos(x)[:, :, None, None], atol=1e-13)


def test_gyration_term_example():
    vx, vy = PG.xi[0], PG.xi[1]
    out = particle_bracket(PG, vx, vy, PhysParams(epsilon=1.0, b_field=2.5))
    assert np.allclose(out, -2.5, atol=1e-13)


def test_electron_bracket_uses_shifted_field():
    vx, vy = PG.xi[0], PG.xi[1]
    _, y = PG.q.mesh
    omega = np.sin(y)
    params = PhysParams(epsilon=0.5, b_field=2.0)
    out = particle_bracket(PG, vx, vy, params, "bracket_e", omega=omega)
    assert np.allclose(out, -(2.0 - 0.5 * omega)[:, :, None, None], atol=1e-13)
    with pytest.raises(UsageError):
        particle_bracket(PG, vx, vy, params, "bracket_e")
    with pytest.raises(UsageError):
        particle_bracket(PG, vx, vy, params, "bracket1")


@given(seeds)
def test_particle_bracket_antisymmetry_and_leibniz(seed):
    rng = np.random.default_rng(seed)
    params = _params(PG)
    h, k, m = (random_test_function(PG, rng, kmax=2, degree=2) for _ in range(3))
    hk, kh = particle_bracket(PG, h, k, params), particle_bracket(PG, k, h, params)
    assert _norm(PG, hk + kh) <= 1e-13 * _norm(PG, hk)
    lhs = particle_bracket(PG, h, k * m, params)
    rhs = hk * m + k * particle_bracket(PG, h, m, params)
    assert _norm(PG, lhs - rhs) <= 1e-10 * _norm(PG, lhs)


def test_fluid_elements_without_flow_commute():
    rng = np.random.default_rng(3)
    z = np.zeros((2,) + PG.q.shape)
    a = AlgebraElement(rng.standard_normal(PG.q.shape), z, PG.zeros())
    b = AlgebraElement(rng.standard_normal(PG.q.shape), z, PG.zeros())
    out = lie_bracket_s(PG, a, b, _params(PG))
    assert not out.psi.any() and not out.u.any() and not out.chi.any()


@given(seeds)
def test_embedding_is_a_homomorphism(seed):
    rng = np.random.default_rng(seed)
    params = _params(PG)
    a, b = (random_algebra_element(PG, 2, rng) for _ in range(2))
    lhs = particle_bracket(PG, embed(PG, a.psi, a.u), embed(PG, b.psi, b.u), params)
    psi, u = lie_bracket_h(PG, a, b, params)
    rhs = embed(PG, psi, u)
    assert _norm(PG, lhs - rhs) <= 1e-10 * _norm(PG, lhs)


@given(seeds)
def test_fluid_bracket_closes(seed):
    rng = np.random.default_rng(seed)
    a, b = (random_algebra_element(PG, 2, rng) for _ in range(2))
    a.chi, b.chi = PG.zeros(), PG.zeros()
    assert not lie_bracket_s(PG, a, b, _params(PG)).chi.any()


@given(seeds)
def test_lie_bracket_antisymmetry(seed):
    rng = np.random.default_rng(seed)
    params = _params(PG)
    a, b = (random_algebra_element(PG, 2, rng) for _ in range(2))
    ab, ba = lie_bracket_s(PG, a, b, params), lie_bracket_s(PG, b, a, params)
    assert (ab + ba).norm(PG) <= 1e-13 * ab.norm(PG)


def test_pairing_examples():
    n = np.ones(PG.q.shape)
    m = MomentState(n, np.zeros((2,) + PG.q.shape), PG.zeros())
    a = AlgebraElement.zeros(PG)
    a.psi = np.ones(PG.q.shape)
    assert pairing(PG, m, a) == pytest.approx((2 * np.pi) ** 2, rel=1e-14)
    zero = MomentState(0 * n, np.zeros((2,) + PG.q.shape), PG.zeros())
    assert pairing(PG, zero, random_algebra_element(PG, 2, np.random.default_rng(0))) == 0.0
    with pytest.raises(UsageError):
        pairing(PG, MomentState(n, m.p, m.dist, centered=True), a)


@given(seeds, st.floats(-2, 2), st.floats(-2, 2))
def test_pairing_is_bilinear(seed, s, t):
    rng = np.random.default_rng(seed)
    f1, f2 = random_distribution(PG, rng), random_distribution(PG, rng)
    a, b = random_algebra_element(PG, 2, rng), random_algebra_element(PG, 2, rng)
    m1, m2, m12 = moment_map(PG, f1), moment_map(PG, f2), moment_map(PG, s * f1 + t * f2)
    lhs = pairing(PG, m12, a)
    rhs = s * pairing(PG, m1, a) + t * pairing(PG, m2, a)
    assert lhs == pytest.approx(rhs, rel=1e-13, abs=1e-13)
    lhs = pairing(PG, m1, a.scale(s) + b.scale(t))
    rhs = s * pairing(PG, m1, a) + t * pairing(PG, m1, b)
    assert lhs == pytest.approx(rhs, rel=1e-13, abs=1e-13)


def test_jacobi_degenerate_slots():
    rng = np.random.default_rng(4)
    params = _params(PG)
    a, b = (random_algebra_element(PG, 2, rng) for _ in range(2))
    assert jacobi_residual(PG, a, b, a, params) < 1e-10
    assert jacobi_residual(PG, a, b, AlgebraElement.zeros(PG), params) == 0.0


@pytest.mark.slow
@settings(max_examples=3)
@given(seeds)
def test_jacobi_identity_on_band_limited_triples(seed):
    pg = PhaseGrid(TorusGrid(64), VelocityGrid(16))
    rng = np.random.default_rng(seed)
    a, b, c = (random_algebra_element(pg, 8, rng) for _ in range(3))
    assert jacobi_residual(pg, a, b, c, _params(pg)) < 1e-10


def test_poisson_map_trivial_cases():
    rng = np.random.default_rng(5)
    params = _params(PG)
    f = random_distribution(PG, rng)
    a = random_algebra_element(PG, 2, rng)
    assert poisson_map_residual(PG, f, a, a, params) < 1e-14 * poisson_map_scale(PG, f, a, a)
    assert poisson_map_residual(PG, PG.zeros(), a, random_algebra_element(PG, 2, rng), params) == 0.0


@given(seeds)
def test_poisson_map_on_random_triples(seed):
    rng = np.random.default_rng(seed)
    params = _params(PG)
    f = random_distribution(PG, rng)
    a, b = (random_algebra_element(PG, 2, rng) for _ in range(2))
    assert poisson_map_residual(PG, f, a, b, params) < 1e-9 * poisson_map_scale(PG, f, a, b)
