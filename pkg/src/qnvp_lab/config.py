"""Experiment configuration: JSON loading and validation.

Every problem is reported as a :class:`ConfigError` naming the offending
key (``grid.nq``, ``run.dt``, ...).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import ConfigError, UsageError
from .evolve import MODELS, RunConfig
from .experiments import FAMILIES, InitialCondition
from .phase_space import PhaseGrid, VelocityGrid
from .spectral import PhysParams, TorusGrid

FASTSLOW_MODES = ("transformed", "printed")
RHS_MODES = ("fastslow", "f")
B_PROFILE = "1+c*cos(x)"


@dataclass(frozen=True)
class BField:
    """Constant ``value`` or the profile ``1 + c cos(x)``."""

    value: float = 1.0
    profile: str | None = None
    c: float = 0.0

    def sample(self, grid: TorusGrid):
        if self.profile is None:
            return self.value
        x, _ = grid.mesh
        return 1.0 + self.c * np.cos(x)


@dataclass(frozen=True)
class ExperimentConfig:
    nq: int
    nv: int
    vmax: float = 6.0
    dealias_fraction: float = float(Fraction(2, 3))
    epsilon: float = 1.0
    lam: float = 1.0
    delta: float = 0.1
    b_field: BField = field(default_factory=BField)
    initial: InitialCondition = field(default_factory=InitialCondition)
    run: RunConfig = field(default_factory=lambda: RunConfig(0.01, 1.0))
    output_dir: str = "out"
    dump_stride: int = 0
    n1_prefactor: str = "1"
    fastslow_mode: str = "transformed"
    rhs_mode: str = "fastslow"
    deltas: tuple = (0.02, 0.04, 0.08)
    compare_times: tuple = ()

    def phase_grid(self) -> PhaseGrid:
        return PhaseGrid(TorusGrid(self.nq, self.dealias_fraction), VelocityGrid(self.nv, self.vmax))

    def params(self, delta: float | None = None) -> PhysParams:
        grid = TorusGrid(self.nq, self.dealias_fraction)
        return PhysParams(self.epsilon, self.lam, self.delta if delta is None else delta,
                          self.b_field.sample(grid))


# section -> allowed keys
_SCHEMA = {
    "grid": {"nq", "nv", "vmax", "dealias_fraction"},
    "params": {"epsilon", "lambda", "delta", "b_field"},
    "initial": {"family", "amplitude", "kx", "ky", "n0", "temperature", "init"},
    "run": {"dt", "t_final", "sample_stride", "model"},
    "output": {"directory", "dump_stride"},
    "switches": {"n1_prefactor", "fastslow_mode", "rhs_mode"},
    "sweep": {"deltas", "compare_times"},
}
_REQUIRED = ("grid", "params", "run")


def _num(sec: dict, name: str, key: str, default=None, *, integer=False, lo=None, hi=None,
         lo_open=False):
    if key not in sec:
        if default is None:
            raise ConfigError(f"{name}.{key} is required")
        return default
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{name}.{key} must be a finite number")
    if integer:
        if int(v) != v:
            raise ConfigError(f"{name}.{key} must be an integer")
        v = int(v)
    if lo is not None and (v <= lo if lo_open else v < lo):
        raise ConfigError(f"{name}.{key} must be {'>' if lo_open else '>='} {lo}")
    if hi is not None and v > hi:
        raise ConfigError(f"{name}.{key} must be <= {hi}")
    return v


def _choice(sec: dict, name: str, key: str, default, choices):
    v = sec.get(key, default)
    if v not in choices:
        raise ConfigError(f"{name}.{key} must be one of {list(choices)}")
    return v


def _b_field(value) -> BField:
    if isinstance(value, bool):
        raise ConfigError("params.b_field must be a number or a profile object")
    if isinstance(value, (int, float)):
        if not math.isfinite(value) or value == 0:
            raise ConfigError("params.b_field must be finite and nonzero")
        return BField(float(value))
    if isinstance(value, dict):
        extra = set(value) - {"profile", "c"}
        if extra:
            raise ConfigError(f"params.b_field: unknown key(s) {sorted(extra)}")
        if value.get("profile") != B_PROFILE:
            raise ConfigError(f"params.b_field.profile must be {B_PROFILE!r}")
        c = _num(value, "params.b_field", "c", 0.0)
        if abs(c) >= 1:
            raise ConfigError("params.b_field.c must satisfy |c| < 1 (B nowhere zero)")
        return BField(profile=B_PROFILE, c=float(c))
    raise ConfigError("params.b_field must be a number or a profile object")


def config_from_dict(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(doc) - set(_SCHEMA)
    if unknown:
        raise ConfigError(f"unknown top-level key(s) {sorted(unknown)}")
    for key in _REQUIRED:
        if key not in doc:
            raise ConfigError(f"{key} section is required")
    for key, allowed in _SCHEMA.items():
        sec = doc.get(key, {})
        if not isinstance(sec, dict):
            raise ConfigError(f"{key} must be an object")
        extra = set(sec) - allowed
        if extra:
            raise ConfigError(f"{key}: unknown key(s) {sorted(extra)}")

    g, p, r = doc["grid"], doc["params"], doc["run"]
    ini, out, sw, sweep = (doc.get(k, {}) for k in ("initial", "output", "switches", "sweep"))

    nq = _num(g, "grid", "nq", integer=True, lo=4)
    if nq % 2:
        raise ConfigError("grid.nq must be even")
    nv = _num(g, "grid", "nv", integer=True, lo=8)
    vmax = _num(g, "grid", "vmax", 6.0, lo=0, lo_open=True)
    dealias = _num(g, "grid", "dealias_fraction", float(Fraction(2, 3)), lo=0, lo_open=True,
                   hi=1)

    eps = _num(p, "params", "epsilon", lo=0, lo_open=True)
    lam = _num(p, "params", "lambda", 1.0, lo=0, lo_open=True)
    delta = _num(p, "params", "delta", lo=0)
    bf = _b_field(p.get("b_field", 1.0))

    model = _choice(r, "run", "model", "qnvp", MODELS)
    if delta == 0 and model != "qnvp":
        raise ConfigError("params.delta = 0 with run.model = "
                          f"{model}: quasineutral singularity; use model qnvp")
    dt = _num(r, "run", "dt", lo=0, lo_open=True)
    t_final = _num(r, "run", "t_final", lo=dt)
    stride = _num(r, "run", "sample_stride", 1, integer=True, lo=1)

    family = _choice(ini, "initial", "family", "maxwellian", FAMILIES)
    init = _choice(ini, "initial", "init", "naive", ("naive", "slow_manifold"))
    try:
        ic = InitialCondition(
            family=family,
            amplitude=float(_num(ini, "initial", "amplitude", 0.2)),
            kx=_num(ini, "initial", "kx", 1, integer=True),
            ky=_num(ini, "initial", "ky", 0, integer=True),
            n0=float(_num(ini, "initial", "n0", 1.0, lo=0, lo_open=True)),
            temperature=float(_num(ini, "initial", "temperature", 1.0, lo=0, lo_open=True)),
            slow_manifold=init == "slow_manifold",
        )
    except UsageError as err:
        raise ConfigError(f"initial: {err}") from err
    if model == "qnvp" and family == "single_mode":
        raise ConfigError("initial.family single_mode has no quasineutral counterpart; "
                          "use model vp_fastslow, vp_f or langmuir")

    n1 = sw.get("n1_prefactor", 1)
    if n1 not in (1, "1", "1/n0"):
        raise ConfigError("switches.n1_prefactor must be 1 or '1/n0'")

    deltas = sweep.get("deltas", [0.02, 0.04, 0.08])
    if (not isinstance(deltas, list) or len(deltas) < 2
            or not all(isinstance(d, (int, float)) and not isinstance(d, bool) and d > 0
                       for d in deltas)):
        raise ConfigError("sweep.deltas must be a list of at least two positive numbers")
    times = sweep.get("compare_times", [t_final])
    if not isinstance(times, list) or not all(
            isinstance(t, (int, float)) and not isinstance(t, bool) and 0 < t <= t_final
            for t in times):
        raise ConfigError("sweep.compare_times must be a list of times in (0, run.t_final]")

    outdir = out.get("directory", "out")
    if not isinstance(outdir, str) or not outdir:
        raise ConfigError("output.directory must be a non-empty string")

    return ExperimentConfig(
        nq=nq, nv=nv, vmax=float(vmax), dealias_fraction=float(dealias),
        epsilon=float(eps), lam=float(lam), delta=float(delta), b_field=bf, initial=ic,
        run=RunConfig(float(dt), float(t_final), stride, model),
        output_dir=outdir,
        dump_stride=_num(out, "output", "dump_stride", 0, integer=True, lo=0),
        n1_prefactor=str(n1),
        fastslow_mode=_choice(sw, "switches", "fastslow_mode", "transformed", FASTSLOW_MODES),
        rhs_mode=_choice(sw, "switches", "rhs_mode", "fastslow", RHS_MODES),
        deltas=tuple(float(d) for d in deltas),
        compare_times=tuple(float(t) for t in times),
    )


def parse_config(path) -> ExperimentConfig:
    """Load and validate a JSON experiment configuration."""
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError as err:
        raise ConfigError(f"config file not found: {path}") from err
    except OSError as err:
        raise ConfigError(f"cannot read config file {path}: {err}") from err
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"malformed JSON in {path}: line {err.lineno}: {err.msg}") from err
    return config_from_dict(doc)
