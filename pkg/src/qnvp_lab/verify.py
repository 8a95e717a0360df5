"""Named verification checks and the JSON report that aggregates them.

Each check returns one or more :class:`Check` records.  The acceptance
tests call the same functions, so ``qnvp verify`` and ``pytest`` agree on
what is measured.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace

import numpy as np

from .algebra import jacobi_residual, poisson_map_residual, poisson_map_scale
from .evolve import RunConfig, dominant_oscillation, integrate, rk4_step, scaling_fit
from .experiments import (
    InitialCondition,
    qnvp_pi_history,
    relative_pi_difference,
    run_fastslow,
    vp_time_step,
)
from .models import build_model
from .phase_space import (
    MomentState,
    PhaseGrid,
    VelocityGrid,
    boundary_max,
    isotropic_equilibrium,
    moment_map,
    phase_quad,
    transform_E,
)
from .qnvp import (
    _features,
    bracket_sigma,
    hamiltonian_sigma,
    make_qnvp_state,
    make_sigma_covector,
    poisson_dirac_certificate,
    qnvp_rhs,
    sigma_flow,
)
from .sampling import (
    random_algebra_element,
    random_distribution,
    random_field,
    random_qnvp_arrays,
    random_rho,
    random_solenoidal,
    random_test_function,
)
from .spectral import PhysParams, TorusGrid, divergence, inner, l2_norm, mode_coefficient
from .state import DistState, LangmuirState
from .vp import hamiltonian_E, hamiltonian_vp, langmuir_frequency, vp_rhs_f

CERTIFICATE_FLOOR = 1e-10  # singular values below this count as zero


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool
    criterion: int = 0
    detail: str = ""

    def record(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.criterion} {self.name}: value={self.value:.6g} " \
               f"tolerance={self.tolerance:.6g} {self.detail}".rstrip()


def _below(name, value, tol, criterion, detail=""):
    value = float(value)
    return Check(name, value, tol, bool(np.isfinite(value) and value < tol), criterion, detail)


def _rel(a, b) -> float:
    return float(np.linalg.norm(np.ravel(a - b)) / max(np.linalg.norm(np.ravel(b)), 1e-300))


def generic_params(pg: PhaseGrid, epsilon: float = 0.7, lam: float = 1.0,
                   delta: float = 0.3) -> PhysParams:
    """Parameters with a non-uniform field, used where no setup is prescribed."""
    x, _ = pg.q.mesh
    return PhysParams(epsilon, lam, delta, 1.0 + 0.2 * np.cos(x))


# ----------------------------------------------------------------------------- 1


def check_langmuir(nq: int = 32, periods: float = 20.0, steps_per_period: int = 64) -> Check:
    grid = TorusGrid(nq)
    pg = PhaseGrid(grid, VelocityGrid(8))
    params = PhysParams(epsilon=0.5, delta=0.05)
    omega = langmuir_frequency(1.0, params)
    dt = 2 * np.pi / omega / steps_per_period
    x, _ = grid.mesh
    state = LangmuirState(0.01 * np.cos(x), np.zeros(grid.shape))
    model = build_model("langmuir", pg, params, 1.0)
    cfg = RunConfig(dt, periods * 2 * np.pi / omega, model="langmuir")
    _, series = integrate(state, cfg, model.rhs,
                          lambda st: {"n": mode_coefficient(grid, st.ntilde, 1, 0).real},
                          model.project)
    w, _ = dominant_oscillation(series, "n")
    return _below("langmuir_frequency_rel_error", abs(w - 10.0) / 10.0, 0.01, 1,
                  f"omega={w:.6f} expected=10")


# ----------------------------------------------------------------------------- 2 and 8


@dataclass
class SlowManifoldStudy:
    deltas: tuple
    naive: list
    manifold: list
    pi_difference: list  # relative pi difference at t_compare, manifold-initialized VP vs QNVP


def slow_manifold_study(nq: int = 32, nv: int = 32, deltas=(0.02, 0.04, 0.08),
                        amplitude: float = 0.2, t_final: float = 2.0, t_compare: float = 1.0,
                        langmuir_fraction: float = 0.5, qnvp_dt: float = 0.01) -> SlowManifoldStudy:
    """Shear flow over a uniform Maxwellian: eps = 1, Lambda = 1, B = 1.

    The fast amplitude is the Langmuir-frequency component of the (0, 1)
    Fourier coefficient of ``Phi`` over ``[0, t_final]``.
    """
    pg = PhaseGrid(TorusGrid(nq), VelocityGrid(nv))
    ic = InitialCondition("shear_flow", amplitude)
    naive, manifold, diff = [], [], []
    qn = qnvp_pi_history(pg, PhysParams(1.0, 1.0, 0.0, 1.0), ic, t_compare, qnvp_dt, (t_compare,))
    for d in deltas:
        params = PhysParams(1.0, 1.0, float(d), 1.0)
        dt = vp_time_step(pg, params, ic.n0, t_final, langmuir_fraction=langmuir_fraction)
        naive.append(run_fastslow(pg, params, ic, t_final, dt).fast_amplitude)
        on = run_fastslow(pg, params, replace(ic, slow_manifold=True), t_final, dt,
                          snapshot_times=(t_compare,))
        manifold.append(on.fast_amplitude)
        diff.append(relative_pi_difference(pg.q, on.snapshots[t_compare].pi, qn[t_compare]))
    return SlowManifoldStudy(tuple(deltas), naive, manifold, diff)


def checks_slow_manifold(study: SlowManifoldStudy) -> list[Check]:
    s_naive = scaling_fit(study.deltas, study.naive)[0]
    s_man = scaling_fit(study.deltas, study.manifold)[0]
    s_diff = scaling_fit(study.deltas, study.pi_difference)[0]
    d = np.asarray(study.pi_difference)
    monotone = bool(np.all(np.diff(d) > 0))  # deltas ascending
    amps = lambda a: " ".join(f"{x:.3e}" for x in a)  # noqa: E731
    return [
        Check("naive_amplitude_slope", s_naive, 0.3, abs(s_naive - 1.0) <= 0.3, 2,
              f"target 1 +- 0.3; amplitudes {amps(study.naive)}"),
        Check("slow_manifold_amplitude_slope", s_man, 1.7, s_man >= 1.7, 2,
              f"target >= 1.7; amplitudes {amps(study.manifold)}"),
        Check("vp_qnvp_difference_monotone", float(monotone), 1.0, monotone, 8,
              f"differences {amps(study.pi_difference)}"),
        Check("vp_qnvp_difference_slope", s_diff, 0.8, s_diff >= 0.8, 8, "target >= 0.8"),
    ]


# ----------------------------------------------------------------------------- 3


def random_qnvp_state(pg: PhaseGrid, rng, n0: float = 1.0):
    n0, pi, rho = random_qnvp_arrays(pg, rng, n0=n0)
    return make_qnvp_state(pg.q, n0, pi, rho)


def check_flow_equivalence(pg: PhaseGrid, params: PhysParams, seeds=range(5)) -> list[Check]:
    worst_pi = worst_rho = 0.0
    for seed in seeds:
        s = random_qnvp_state(pg, np.random.default_rng(seed), n0=1.0 + 0.25 * seed)
        rhs = qnvp_rhs(pg, s, params)
        flow = sigma_flow(pg, s, hamiltonian_sigma(pg, s)[1], params)
        worst_pi = max(worst_pi, _rel(flow.pi, rhs.pi))
        worst_rho = max(worst_rho, _rel(flow.rho, rhs.rho))
    return [_below("qnvp_rhs_vs_bracket_flow_pi", worst_pi, 1e-10, 3),
            _below("qnvp_rhs_vs_bracket_flow_rho", worst_rho, 1e-10, 3)]


# ----------------------------------------------------------------------------- 4


def check_certificate(pg: PhaseGrid, params: PhysParams, coarse_nq: int = 8,
                      n0s=(0.5, 1.0, 2.0, 0.5, 2.0)) -> Check:
    values = []
    for seed, n0 in enumerate(n0s):
        s = random_qnvp_state(pg, np.random.default_rng(100 + seed), n0=n0)
        values.append(poisson_dirac_certificate(pg, s, params, coarse_nq))
    low = min(values)
    return Check("poisson_dirac_certificate_min", low, CERTIFICATE_FLOOR, low > CERTIFICATE_FLOOR,
                 4, "values " + " ".join(f"{v:.3e}" for v in values))


# ----------------------------------------------------------------------------- 5


def random_sigma_covector(pg: PhaseGrid, rng):
    return make_sigma_covector(pg.q, rng.standard_normal(), random_solenoidal(pg.q, 2, rng),
                               random_test_function(pg, rng))


def corrupted_bracket(pg, s, f, g, params) -> float:
    """Negative control: the bracket with the sign of one cross term flipped."""
    ff, fg = _features(pg, s, f), _features(pg, s, g)
    return bracket_sigma(pg, s, f, g, params) - 2.0 * params.epsilon * inner(pg.q, fg.w, ff.mq)


def check_brackets(pg: PhaseGrid, params: PhysParams, n_pairs: int = 10, seed: int = 7,
                   corrupt_sign: bool = False) -> list[Check]:
    rng = np.random.default_rng(seed)
    s = random_qnvp_state(pg, rng, n0=1.3)
    direct = corrupted_bracket if corrupt_sign else (
        lambda *a: bracket_sigma(*a, route="direct"))
    route = anti = 0.0
    for _ in range(n_pairs):
        f, g = random_sigma_covector(pg, rng), random_sigma_covector(pg, rng)
        fg, gf = direct(pg, s, f, g, params), direct(pg, s, g, f, params)
        ext = bracket_sigma(pg, s, f, g, params, route="extension")
        scale = max(abs(fg), abs(gf), 1e-300)
        route = max(route, abs(fg - ext) / scale)
        anti = max(anti, abs(fg + gf) / scale)
    return [_below("bracket_direct_vs_extension", route, 1e-8, 5),
            _below("bracket_antisymmetry", anti, 1e-12, 5)]


# ----------------------------------------------------------------------------- 6


def check_poisson_map(pg: PhaseGrid, params: PhysParams, n: int = 10, seed: int = 11) -> list[Check]:
    rng = np.random.default_rng(seed)
    kmax = max(1, pg.q.nq // 8)
    pm = jac = 0.0
    for _ in range(n):
        f = random_distribution(pg, rng, kmax=kmax)
        a, b, c = (random_algebra_element(pg, kmax, rng) for _ in range(3))
        pm = max(pm, poisson_map_residual(pg, f, a, b, params) / poisson_map_scale(pg, f, a, b))
        jac = max(jac, jacobi_residual(pg, a, b, c, params))
    return [_below("poisson_map_residual_scaled", pm, 1e-9, 6),
            _below("jacobi_residual", jac, 1e-10, 6)]


# ----------------------------------------------------------------------------- 7


@dataclass
class ConservationRun:
    dt: float
    h_drift: float
    mass_drift: float
    div_max: float
    edge_max: float


def conservation_initial_state(pg: PhaseGrid, seed: int = 11):
    """Smooth random state: weak solenoidal flow, Gaussian velocity profile of width 0.75."""
    rng = np.random.default_rng(seed)
    pi = random_solenoidal(pg.q, 1, rng, 0.1, mean_flow=0.1)
    rho = random_rho(pg, rng, kmax=1, amplitude=0.05, width=0.75)
    return make_qnvp_state(pg.q, 1.0, pi, rho)


def conservation_run(pg: PhaseGrid, params: PhysParams, dt: float, t_final: float = 1.0,
                     seed: int = 11, samples: int = 10) -> ConservationRun:
    s0 = conservation_initial_state(pg, seed)
    model = build_model("qnvp", pg, params)
    stride = max(1, int(round(t_final / dt)) // samples)
    s, series = integrate(s0, RunConfig(dt, t_final, stride), model.rhs, model.diagnostics,
                          model.project)
    h, m = series.array("H"), series.array("mass")
    return ConservationRun(dt, float(np.max(np.abs(h / h[0] - 1))),
                           float(np.max(np.abs(m / m[0] - 1))),
                           float(np.max(series.array("div_norm"))), boundary_max(pg, s.rho))


def checks_conservation(coarse: ConservationRun, fine: ConservationRun) -> list[Check]:
    ratio = coarse.h_drift / max(fine.h_drift, 1e-300)
    detail = f"dt={coarse.dt:g}: H {coarse.h_drift:.3e}, dt={fine.dt:g}: H {fine.h_drift:.3e}; " \
             f"velocity-edge max |rho| {coarse.edge_max:.2e}"
    return [
        _below("energy_drift", coarse.h_drift, 1e-8, 7, detail),
        Check("energy_drift_halving_ratio", ratio, 16.0, 8.0 <= ratio <= 32.0, 7,
              "target 16 within a factor 2"),
        _below("div_pi_max", max(coarse.div_max, fine.div_max), 1e-10, 7),
        _below("mass_drift", coarse.mass_drift, 1e-10, 7,
               f"dt={fine.dt:g}: {fine.mass_drift:.3e}"),
    ]


# ----------------------------------------------------------------------------- 9


def check_collectivization(pg: PhaseGrid, params: PhysParams, n: int = 5, seed: int = 3,
                           h: float = 1e-5) -> list[Check]:
    rng = np.random.default_rng(seed)
    energy = grad = 0.0
    for _ in range(n):
        f = random_distribution(pg, rng)
        s = transform_E(pg, moment_map(pg, f))
        value, g = hamiltonian_E(pg, s, params)
        energy = max(energy, abs(value / hamiltonian_vp(pg, f, params) - 1))
        dn = random_field(pg.q, 2, rng, 0.1)
        dp = np.stack([random_field(pg.q, 2, rng, 0.1) for _ in range(2)])
        dr = random_rho(pg, rng)
        shifted = lambda t: MomentState(s.n + t * dn, s.p + t * dp, s.dist + t * dr,  # noqa: E731
                                        centered=True)
        fd = (hamiltonian_E(pg, shifted(h), params)[0]
              - hamiltonian_E(pg, shifted(-h), params)[0]) / (2 * h)
        exact = inner(pg.q, g.dn, dn) + inner(pg.q, g.dp, dp) + phase_quad(pg, g.drho * dr)
        grad = max(grad, abs(fd - exact) / abs(exact))
    return [_below("collectivized_energy_rel", energy, 1e-6, 9),
            _below("energy_gradient_vs_fd_rel", grad, 1e-6, 9)]


# ----------------------------------------------------------------------------- 10


def check_equilibrium(pg: PhaseGrid, dt: float = 0.01, steps: int = 100) -> list[Check]:
    params = PhysParams(1.0, 1.0, 0.1, 1.0)
    eq = np.broadcast_to(isotropic_equilibrium(pg.v), pg.shape).copy()
    vp0 = DistState(eq)
    vp = vp0
    rhs = lambda st: DistState(vp_rhs_f(pg, st.f, params))  # noqa: E731
    for i in range(steps):
        vp = rk4_step(vp, rhs, dt, step=i)
    q0 = make_qnvp_state(pg.q, 1.0, np.zeros((2,) + pg.q.shape), eq)
    q = q0
    model = build_model("qnvp", pg, params)
    for i in range(steps):
        q = rk4_step(q, model.rhs, dt, model.project, step=i)
    return [_below("equilibrium_vp_change", vp.distance(vp0), 1e-10, 10),
            _below("equilibrium_qnvp_change", q.distance(q0), 1e-10, 10)]


# ----------------------------------------------------------------------------- suite


def verify_suite(nq: int = 32, nv: int = 32, vmax: float = 6.0, deltas=(0.02, 0.04, 0.08),
                 corrupt_sign: bool = False, include_slow: bool = True,
                 log=None) -> list[Check]:
    """Run every check; ``include_slow=False`` skips the long integrations (2, 7, 8)."""
    pg = PhaseGrid(TorusGrid(nq), VelocityGrid(nv, vmax))
    params = generic_params(pg)
    qn_params = replace(params, delta=0.0)
    out: list[Check] = []

    def add(items):
        items = items if isinstance(items, list) else [items]
        out.extend(items)
        if log is not None:
            for c in items:
                log(c.line())

    add(check_langmuir(nq))
    if include_slow:
        add(checks_slow_manifold(slow_manifold_study(nq, nv, deltas)))
    add(check_flow_equivalence(pg, qn_params))
    add(check_certificate(pg, qn_params))
    add(check_brackets(pg, qn_params, corrupt_sign=corrupt_sign))
    add(check_poisson_map(pg, params))
    if include_slow:
        p7 = PhysParams(1.0, 1.0, 0.0, 1.0)
        add(checks_conservation(conservation_run(pg, p7, 1e-3), conservation_run(pg, p7, 5e-4)))
    add(check_collectivization(pg, params))
    add(check_equilibrium(pg))
    return sorted(out, key=lambda c: c.criterion)


def report_json(checks: list[Check]) -> str:
    return json.dumps({"checks": [c.record() for c in checks],
                       "all_pass": all(c.passed for c in checks)}, indent=2)
