import numpy as np
import pytest
from conftest import rel
from hypothesis import given
from hypothesis import strategies as st

from qnvp_lab.algebra import Covector
from qnvp_lab.errors import QuasineutralSingularityError, UsageError
from qnvp_lab.evolve import rk4_step
from qnvp_lab.phase_space import (
    MomentState,
    PhaseGrid,
    VelocityGrid,
    isotropic_equilibrium,
    maxwellian,
    moment_map,
    phase_quad,
    transform_E,
    vquad,
)
from qnvp_lab.qnvp import covector_pairing
from qnvp_lab.sampling import (
    random_distribution,
    random_field,
    random_moment_state,
    random_rho,
    random_solenoidal,
)
from qnvp_lab.spectral import (
    PhysParams,
    TorusGrid,
    dealias,
    divergence,
    gradient,
    inner,
    laplacian,
)
from qnvp_lab.state import LangmuirState
from qnvp_lab.vp import (
    fastslow_inverse,
    fastslow_mode_difference,
    fastslow_rhs,
    fastslow_transform,
    field_energy,
    hamiltonian_E,
    hamiltonian_vectorfield_E,
    hamiltonian_vp,
    hamiltonian_vp_gradient,
    langmuir_rhs,
    langmuir_state_rhs,
    make_fastslow_state,
    moment_equations_rhs,
    slow_manifold_n1,
    vp_rhs_f,
)

seeds = st.integers(0, 2**31 - 1)
PG = PhaseGrid(TorusGrid(16), VelocityGrid(32))
X, Y = PG.q.mesh
PARAMS = PhysParams(epsilon=0.7, lam=1.3, delta=0.3, b_field=1.0 + 0.2 * np.cos(X))


def _uniform(g2):
    return np.broadcast_to(g2, PG.shape).copy()


def _band(a):
    if a.ndim == 3:
        return np.stack([dealias(PG.q, c) for c in a])
    return dealias(PG.q, a)


def _zeros_v():
    return np.zeros((2,) + PG.q.shape)


# ----------------------------------------------------------------------------- f coordinates


def test_isotropic_equilibrium_is_stationary():
    eq = _uniform(isotropic_equilibrium(PG.v))
    assert np.max(np.abs(vp_rhs_f(PG, eq, PARAMS))) < 1e-13 * np.max(eq)


def test_delta_zero_is_rejected():
    f = _uniform(maxwellian(PG.v))
    p0 = PhysParams(epsilon=1.0, delta=0.0)
    for fn in (vp_rhs_f, hamiltonian_vp):
        with pytest.raises(QuasineutralSingularityError):
            fn(PG, f, p0)
    with pytest.raises(QuasineutralSingularityError):
        langmuir_rhs(PG.q, X, Y, 1.0, p0)


@given(seeds)
def test_mass_is_conserved_exactly(seed):
    # narrow enough that nothing reaches the velocity edge, where the
    # zero-extended stencil lets mass leave
    f = random_distribution(PG, np.random.default_rng(seed), width=0.6)
    rate = phase_quad(PG, vp_rhs_f(PG, f, PARAMS))
    assert abs(rate) < 1e-13 * phase_quad(PG, np.abs(f))


@given(seeds)
def test_energy_is_stationary_along_the_kinetic_flow(seed):
    f = random_distribution(PG, np.random.default_rng(seed), kmax=1)
    h = hamiltonian_vp(PG, f, PARAMS)
    rate = phase_quad(PG, hamiltonian_vp_gradient(PG, f, PARAMS) * vp_rhs_f(PG, f, PARAMS))
    assert abs(rate) < 1e-9 * abs(h)


def test_hamiltonian_vp_examples():
    assert hamiltonian_vp(PG, PG.zeros(), PARAMS) == 0.0
    f = _uniform(maxwellian(PG.v))
    # truncating the Gaussian at |v| = 6 costs ~6e-8 of the kinetic energy
    assert hamiltonian_vp(PG, f, PARAMS) == pytest.approx((2 * np.pi) ** 2, rel=1e-6)
    a, delta = 0.05, 0.3
    n = 1.0 + a * np.cos(X)
    energy = field_energy(PG.q, n, PhysParams(epsilon=1.0, lam=1.7, delta=delta))
    assert energy == pytest.approx(a**2 * np.pi**2 / delta**2, rel=1e-12)


def test_kinetic_moments_match_moment_vector_field():
    # cross-route: velocity moments of the kinetic rate against Hamilton's
    # equations for the transformed energy; u = P/n is not band-limited, so
    # the two routes alias differently below nq = 32
    pg = PhaseGrid(TorusGrid(32), VelocityGrid(32))
    x, _ = pg.q.mesh
    params = PhysParams(epsilon=0.7, lam=1.3, delta=0.3, b_field=1.0 + 0.2 * np.cos(x))
    f = random_distribution(pg, np.random.default_rng(7), kmax=1)
    s = transform_E(pg, moment_map(pg, f))
    _, grad = hamiltonian_E(pg, s, params)
    dot = hamiltonian_vectorfield_E(pg, s, grad, params)
    m = moment_map(pg, vp_rhs_f(pg, f, params))
    assert rel(m.n, dot.n) < 1e-6
    assert rel(m.p, dot.p) < 1e-6


# ----------------------------------------------------------------------------- (n, P, rho)


def test_hamiltonian_E_examples():
    params = PhysParams(epsilon=1.0, delta=0.1)
    n = np.ones(PG.q.shape)
    rho = _uniform(maxwellian(PG.v))
    value, _ = hamiltonian_E(PG, MomentState(n, _zeros_v(), rho, centered=True), params)
    assert value == pytest.approx((2 * np.pi) ** 2, rel=1e-6)
    value, _ = hamiltonian_E(PG, MomentState(2 * n, _zeros_v(), PG.zeros(), centered=True), params)
    assert value == 0.0
    with pytest.raises(UsageError):
        hamiltonian_E(PG, MomentState(n, _zeros_v(), rho), params)


def test_hamiltonian_E_gradient_matches_finite_differences():
    rng = np.random.default_rng(11)
    s = random_moment_state(PG, rng)
    _, g = hamiltonian_E(PG, s, PARAMS)
    h = 1e-5
    for _ in range(5):
        dn = random_field(PG.q, 2, rng, 0.1)
        dp = np.stack([random_field(PG.q, 2, rng, 0.1) for _ in range(2)])
        dr = random_rho(PG, rng)
        at = lambda t: MomentState(s.n + t * dn, s.p + t * dp, s.dist + t * dr,  # noqa: E731
                                   centered=True)
        fd = (hamiltonian_E(PG, at(h), PARAMS)[0] - hamiltonian_E(PG, at(-h), PARAMS)[0]) / (2 * h)
        exact = inner(PG.q, g.dn, dn) + inner(PG.q, g.dp, dp) + phase_quad(PG, g.drho * dr)
        assert abs(fd - exact) < 1e-6 * abs(exact)


def test_vector_field_of_constant_momentum_covector():
    s = random_moment_state(PG, np.random.default_rng(12))
    u0 = np.array([0.3, -0.8])
    g = Covector(np.zeros(PG.q.shape), np.broadcast_to(u0[:, None, None], (2,) + PG.q.shape),
                 PG.zeros())
    dot = hamiltonian_vectorfield_E(PG, s, g, PARAMS)
    expected = -PARAMS.epsilon * divergence(PG.q, s.n * g.dp, dealias=True)
    assert np.allclose(dot.n, expected, atol=1e-13)
    zero = hamiltonian_vectorfield_E(PG, s, Covector(0 * s.n, 0 * s.p, 0 * s.dist), PARAMS)
    for a in zero.arrays():
        assert not np.any(np.abs(a) > 1e-15)


@given(seeds)
def test_general_vector_field_reproduces_moment_equations(seed):
    s = random_moment_state(PG, np.random.default_rng(seed))
    _, g = hamiltonian_E(PG, s, PARAMS)
    general = hamiltonian_vectorfield_E(PG, s, g, PARAMS)
    direct = moment_equations_rhs(PG, s.n, s.p, s.dist, PARAMS)
    # the two transcriptions differ only above the dealiasing cutoff
    for a, b in zip(general.arrays(), direct.arrays()):
        assert rel(_band(a), _band(b)) < 1e-10


@given(seeds)
def test_energy_is_conserved_at_the_bracket_level(seed):
    s = random_moment_state(PG, np.random.default_rng(seed))
    h, g = hamiltonian_E(PG, s, PARAMS)
    dot = hamiltonian_vectorfield_E(PG, s, g, PARAMS)
    scale = (abs(inner(PG.q, g.dn, dot.n)) + abs(inner(PG.q, g.dp, dot.p))
             + abs(phase_quad(PG, g.drho * dot.rho)))
    assert abs(covector_pairing(PG, g, dot)) < 1e-9 * scale


# ----------------------------------------------------------------------------- fast-slow split


def test_fastslow_transform_examples():
    rho = _uniform(maxwellian(PG.v))
    pi = random_solenoidal(PG.q, 3, np.random.default_rng(1))
    fs = fastslow_transform(PG, MomentState(np.full(PG.q.shape, 1.5), pi, rho, True), PARAMS)
    assert fs.n0 == pytest.approx(1.5)
    assert np.max(np.abs(fs.ntilde)) < 1e-14 and np.max(np.abs(fs.phi)) < 1e-14
    assert rel(fs.pi, pi) < 1e-13
    p = gradient(PG.q, np.sin(X))
    fs = fastslow_transform(PG, MomentState(np.ones(PG.q.shape), p, rho, True), PARAMS)
    assert np.allclose(fs.phi, np.sin(X), atol=1e-13) and np.max(np.abs(fs.pi)) < 1e-13


@given(seeds)
def test_fastslow_round_trip(seed):
    s = random_moment_state(PG, np.random.default_rng(seed))
    back = fastslow_inverse(PG, fastslow_transform(PG, s, PARAMS), PARAMS)
    assert rel(back.n, s.n) < 1e-12 and rel(back.p, s.p) < 1e-12
    assert np.array_equal(back.dist, s.dist)


def _on_sigma(rng, n0=1.0):
    pi = random_solenoidal(PG.q, 2, rng, 0.3, mean_flow=0.1)
    return make_fastslow_state(PG.q, n0, np.zeros(PG.q.shape), np.zeros(PG.q.shape), pi,
                               random_rho(PG, rng))


@pytest.mark.parametrize("mode", ["transformed", "printed"])
def test_fastslow_rhs_on_quasineutral_set(mode):
    fs = _on_sigma(np.random.default_rng(2))
    dot = fastslow_rhs(PG, fs, PARAMS, mode)
    assert abs(dot.n0) < 1e-14
    assert np.max(np.abs(dot.ntilde)) < 1e-12


@pytest.mark.parametrize("mode", ["transformed", "printed"])
def test_fastslow_rhs_vanishes_at_equilibrium(mode):
    fs = make_fastslow_state(PG.q, 1.0, np.zeros(PG.q.shape), np.zeros(PG.q.shape), _zeros_v(),
                             _uniform(isotropic_equilibrium(PG.v)))
    for a in fastslow_rhs(PG, fs, PARAMS, mode).arrays():
        assert np.max(np.abs(a)) < 1e-13


def test_fastslow_mode_is_validated():
    with pytest.raises(UsageError):
        fastslow_rhs(PG, _on_sigma(np.random.default_rng(0)), PARAMS, "exact")


def test_printed_mode_misses_a_quadratic_density_term():
    rng = np.random.default_rng(5)
    base = _on_sigma(rng)
    nt = random_field(PG.q, 2, rng, 1.0)
    diffs = []
    for scale in (0.2, 0.1):
        fs = make_fastslow_state(PG.q, 1.0, scale * nt, base.phi, base.pi, base.rho)
        d = fastslow_mode_difference(PG, fs, PARAMS)
        # the whole difference in the potential rate is the eps*G[ntilde^2] term
        assert d["phi_rate_difference_minus_eps_ntilde_sq"] < 1e-10 * d["eps_ntilde_sq_term"]
        assert d["ntilde_rate_difference"] < 1e-10 * (1 + d["eps_ntilde_sq_term"])
        diffs.append(d["phi_rate_difference"])
    assert diffs[0] / diffs[1] == pytest.approx(4.0, rel=1e-6)


# ----------------------------------------------------------------------------- Langmuir


def test_langmuir_zero_state_stays_zero():
    z = np.zeros(PG.q.shape)
    a, b = langmuir_rhs(PG.q, z, z, 1.0, PARAMS)
    assert not a.any() and not b.any()


def test_langmuir_harmonic_invariant():
    grid = PG.q
    params = PhysParams(epsilon=0.5, delta=0.05)
    n0 = 1.3
    omega = params.epsilon / params.delta * np.sqrt(n0)
    rng = np.random.default_rng(8)
    st = LangmuirState(random_field(grid, 3, rng, zero_mean=True),
                       random_field(grid, 3, rng, zero_mean=True))
    rhs = langmuir_state_rhs(grid, params, n0)

    def invariant(s):
        rate = -(params.epsilon / params.delta) * laplacian(grid, s.phi)
        return np.abs(np.fft.fft2(rate)) ** 2 + omega**2 * np.abs(np.fft.fft2(s.ntilde)) ** 2

    i0 = invariant(st)
    for step in range(200):
        st = rk4_step(st, rhs, 1e-4, step=step)
    assert np.max(np.abs(invariant(st) - i0)) < 1e-10 * np.max(i0)


# ----------------------------------------------------------------------------- slow manifold


def test_slow_manifold_vanishes_for_uniform_state():
    rho = random_rho(PG, np.random.default_rng(0), kmax=1)
    rho = _uniform(rho[0, 0])
    fs = make_fastslow_state(PG.q, 1.0, np.zeros(PG.q.shape), np.zeros(PG.q.shape), _zeros_v(), rho)
    assert np.max(np.abs(slow_manifold_n1(PG, fs, PARAMS))) < 1e-14


@pytest.mark.parametrize("b0,c,eps", [(1.0, 0.2, 1.0), (2.0, 0.1, 0.5)])
def test_slow_manifold_for_shear_flow(b0, c, eps):
    params = PhysParams(epsilon=eps, delta=0.1, b_field=b0)
    pi = np.stack([c * np.sin(Y), np.zeros(PG.q.shape)])
    fs = make_fastslow_state(PG.q, 1.0, np.zeros(PG.q.shape), np.zeros(PG.q.shape), pi,
                             _uniform(maxwellian(PG.v)))
    n1 = slow_manifold_n1(PG, fs, params)
    assert np.allclose(n1, -(b0 * c / eps) * np.cos(Y), atol=1e-12)
    assert np.allclose(slow_manifold_n1(PG, fs, params, "1/n0"), n1)


def test_slow_manifold_rejects_off_sigma_and_bad_prefactor():
    fs = _on_sigma(np.random.default_rng(3))
    with pytest.raises(UsageError):
        slow_manifold_n1(PG, fs, PARAMS, "n0")
    off = make_fastslow_state(PG.q, 1.0, np.cos(X), fs.phi, fs.pi, fs.rho)
    with pytest.raises(UsageError, match="ntilde = 0"):
        slow_manifold_n1(PG, off, PARAMS)


def test_slow_manifold_prefactor_variants_differ_away_from_unit_density():
    fs = _on_sigma(np.random.default_rng(4), n0=2.0)
    a = slow_manifold_n1(PG, fs, PARAMS, "1")
    b = slow_manifold_n1(PG, fs, PARAMS, "1/n0")
    assert rel(a, b) > 1e-3


def test_vquad_of_equilibrium_is_unit_density():
    assert np.allclose(vquad(PG, _uniform(isotropic_equilibrium(PG.v))), 1.0, atol=1e-14)
