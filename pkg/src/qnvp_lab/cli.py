"""``qnvp run|compare|sweep|verify --config <path>``.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical
divergence, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import ExperimentConfig, parse_config
from .errors import DivergenceError, QnvpError
from .evolve import integrate, scaling_fit
from .experiments import compare_runs, initial_state, run_fastslow, vp_time_step
from .io import write_csv, write_field
from .models import build_model
from .verify import report_json, verify_suite

EXIT_OK, EXIT_USAGE, EXIT_DIVERGED, EXIT_VERIFY = 0, 1, 2, 3


def _out_dir(cfg: ExperimentConfig, override: str | None) -> Path:
    path = Path(override or cfg.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_run(cfg: ExperimentConfig, out: Path, threads: int) -> int:
    pg = cfg.phase_grid()
    params = cfg.params()
    name = cfg.run.model
    model = build_model(name, pg, params, cfg.initial.n0, cfg.fastslow_mode)
    state = initial_state(name, pg, params, cfg.initial, cfg.n1_prefactor)

    def dump(i, st):
        if cfg.dump_stride and i % cfg.dump_stride == 0:
            for field, arr in model.fields(st).items():
                write_field(out, field, i, arr)

    try:
        _, series = integrate(state, cfg.run, model.rhs, model.diagnostics, model.project,
                              on_step=dump)
    except DivergenceError as err:
        if err.series is not None and len(err.series):
            write_csv(out / "diagnostics.csv", err.series)
        raise
    write_csv(out / "diagnostics.csv", series)
    return EXIT_OK


def _vp_dt(cfg: ExperimentConfig, delta: float) -> float:
    return vp_time_step(cfg.phase_grid(), cfg.params(delta), cfg.initial.n0, cfg.run.t_final,
                        cfg.run.dt)


def cmd_compare(cfg: ExperimentConfig, out: Path, threads: int) -> int:
    pg = cfg.phase_grid()
    diffs = compare_runs(pg, cfg.params(), cfg.initial, cfg.run.t_final,
                         _vp_dt(cfg, cfg.delta), cfg.run.dt, cfg.compare_times,
                         fastslow_mode=cfg.fastslow_mode, n1_prefactor=cfg.n1_prefactor,
                         rhs_mode=cfg.rhs_mode)
    lines = [f"# qnvp-lab v{__version__}", "t,relative_pi_difference"]
    lines += [f"{t:.17g},{d:.17g}" for t, d in sorted(diffs.items())]
    (out / "compare.csv").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def _sweep_entry(cfg: ExperimentConfig, delta: float) -> dict:
    pg = cfg.phase_grid()
    params = cfg.params(delta)
    dt = _vp_dt(cfg, delta)
    kw = dict(fastslow_mode=cfg.fastslow_mode, n1_prefactor=cfg.n1_prefactor,
              rhs_mode=cfg.rhs_mode)
    entry = {"delta": delta, "dt": dt}
    entry["naive_amplitude"] = run_fastslow(pg, params, replace(cfg.initial, slow_manifold=False),
                                            cfg.run.t_final, dt, **kw).fast_amplitude
    if cfg.initial.family != "single_mode":
        entry["slow_manifold_amplitude"] = run_fastslow(
            pg, params, replace(cfg.initial, slow_manifold=True), cfg.run.t_final, dt,
            **kw).fast_amplitude
        diffs = compare_runs(pg, params, cfg.initial, cfg.run.t_final, dt, cfg.run.dt,
                             cfg.compare_times, **kw)
        entry["pi_difference"] = {f"{t:g}": d for t, d in sorted(diffs.items())}
    return entry


def cmd_sweep(cfg: ExperimentConfig, out: Path, threads: int) -> int:
    deltas = sorted(cfg.deltas)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        entries = list(pool.map(lambda d: _sweep_entry(cfg, d), deltas))
    fits = {}
    for key in ("naive_amplitude", "slow_manifold_amplitude"):
        if all(key in e for e in entries):
            slope, intercept, r2 = scaling_fit(deltas, [e[key] for e in entries])
            fits[key] = {"slope": slope, "intercept": intercept, "r2": r2}
    if all("pi_difference" in e for e in entries):
        for t in entries[0]["pi_difference"]:
            slope, intercept, r2 = scaling_fit(deltas, [e["pi_difference"][t] for e in entries])
            fits[f"pi_difference_t{t}"] = {"slope": slope, "intercept": intercept, "r2": r2}
    (out / "sweep.json").write_text(json.dumps({"entries": entries, "fits": fits}, indent=2))
    return EXIT_OK


def cmd_verify(cfg: ExperimentConfig, out: Path, threads: int, skip_long: bool = False) -> int:
    checks = verify_suite(cfg.nq, cfg.nv, cfg.vmax, cfg.deltas, include_slow=not skip_long,
                          log=lambda line: print(line, flush=True))
    (out / "verify.json").write_text(report_json(checks))
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VERIFY


COMMANDS = {"run": cmd_run, "compare": cmd_compare, "sweep": cmd_sweep, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qnvp", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON experiment configuration")
    p.add_argument("--out", help="output directory (overrides output.directory)")
    p.add_argument("--threads", type=int, default=1, help="parallel sweep entries")
    p.add_argument("--deterministic", action="store_true",
                   help="single-threaded, bitwise reproducible execution")
    p.add_argument("--skip-long", action="store_true",
                   help="verify: omit the long integrations (criteria 2, 7, 8)")
    p.add_argument("--version", action="version", version=f"qnvp-lab {__version__}")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits with 2 on usage errors
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    threads = 1 if args.deterministic else args.threads
    if threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = parse_config(args.config)
        out = _out_dir(cfg, args.out)
        if args.command == "verify":
            return cmd_verify(cfg, out, threads, args.skip_long)
        return COMMANDS[args.command](cfg, out, threads)
    except DivergenceError as err:
        print(f"error: numerical divergence: {err}", file=sys.stderr)
        return EXIT_DIVERGED
    except (QnvpError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
