"""Fixed-step RK4 integration, diagnostics and spectral post-processing."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DivergenceError, UsageError

MODELS = ("vp_f", "vp_fastslow", "qnvp", "langmuir")


@dataclass
class TimeSeries:
    """Sampled diagnostics: strictly increasing ``times`` and equal-length channels."""

    times: list = field(default_factory=list)
    channels: dict = field(default_factory=dict)

    def append(self, t: float, values: dict) -> None:
        if self.times and not t > self.times[-1]:
            raise UsageError("sample times must be strictly increasing")
        if self.times and set(values) != set(self.channels):
            raise UsageError("channel set changed between samples")
        self.times.append(float(t))
        for k, v in values.items():
            self.channels.setdefault(k, []).append(float(v))

    def __len__(self) -> int:
        return len(self.times)

    def array(self, name: str) -> np.ndarray:
        if name not in self.channels:
            raise UsageError(f"unknown channel {name!r}")
        return np.asarray(self.channels[name])


@dataclass(frozen=True)
class RunConfig:
    dt: float
    t_final: float
    sample_stride: int = 1
    model: str = "qnvp"

    def __post_init__(self):
        if not self.dt > 0:
            raise UsageError("dt must be > 0")
        if not self.t_final >= self.dt:
            raise UsageError("t_final must be >= dt")
        if int(self.sample_stride) != self.sample_stride or self.sample_stride < 1:
            raise UsageError("sample_stride must be a positive integer")
        if self.model not in MODELS:
            raise UsageError(f"model must be one of {MODELS}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))


def _finite(state) -> bool:
    if hasattr(state, "is_finite"):
        return state.is_finite()
    return bool(np.all(np.isfinite(state)))


def _axpy(y, a, k):
    if hasattr(y, "axpy"):
        return y.axpy(a, k)
    return y + a * k


def rk4_step(state, rhs: Callable, dt: float, project: Callable | None = None, step: int = 0):
    """One classical Runge-Kutta step; ``project`` re-imposes constraints afterwards.

    Works for numpy arrays and for :class:`~qnvp_lab.state.Bundle` states.
    """
    if not dt > 0:
        raise UsageError("dt must be > 0")
    k1 = rhs(state)
    k2 = rhs(_axpy(state, 0.5 * dt, k1))
    k3 = rhs(_axpy(state, 0.5 * dt, k2))
    k4 = rhs(_axpy(state, dt, k3))
    out = _axpy(state, dt / 6.0, k1)
    out = _axpy(out, dt / 3.0, k2)
    out = _axpy(out, dt / 3.0, k3)
    out = _axpy(out, dt / 6.0, k4)
    if not _finite(out):
        raise DivergenceError(f"non-finite state after step {step}", step=step)
    return project(out) if project is not None else out


def integrate(state, config: RunConfig, rhs: Callable, diagnostics: Callable,
              project: Callable | None = None, on_step: Callable | None = None):
    """Advance ``state`` to ``config.t_final``; return ``(state, TimeSeries)``.

    ``diagnostics(state)`` returns a dict of scalars recorded at ``t = 0``
    and every ``sample_stride`` steps.  On divergence the partial series is
    attached to the raised error.  ``on_step(i, state)`` is called after
    every step, and once with ``i = 0`` before the first.
    """
    series = TimeSeries()
    series.append(0.0, diagnostics(state))
    if on_step is not None:
        on_step(0, state)
    for i in range(1, config.n_steps + 1):
        try:
            state = rk4_step(state, rhs, config.dt, project, step=i)
        except DivergenceError as err:
            raise DivergenceError(str(err), step=i, series=series) from err
        if on_step is not None:
            on_step(i, state)
        if i % config.sample_stride == 0 or i == config.n_steps:
            series.append(i * config.dt, diagnostics(state))
    return state, series


def dominant_oscillation(series: TimeSeries | tuple, channel: str | None = None,
                         min_samples: int = 64) -> tuple[float, float]:
    """Angular frequency and amplitude of the strongest spectral peak.

    The mean is removed, a Hann window applied, and the peak of the
    zero-padded real spectrum refined by a parabola through the log
    magnitudes of three bins.  The amplitude is calibrated against the
    window's coherent gain, so ``a sin(w t)`` reports ``a``.

    ``series`` is a :class:`TimeSeries` with ``channel`` or a ``(times,
    values)`` pair.
    """
    if isinstance(series, TimeSeries):
        t = np.asarray(series.times)
        y = series.array(channel)
    else:
        t, y = (np.asarray(a, dtype=float) for a in series)
    if len(t) < min_samples:
        raise UsageError(f"need at least {min_samples} samples, got {len(t)}")
    dt = np.diff(t)
    if np.max(np.abs(dt - dt[0])) > 1e-9 * max(1.0, abs(dt[0])):
        raise UsageError("samples must be uniformly spaced")
    y = y - np.mean(y)
    n = len(y)
    win = np.hanning(n)
    pad = 8 * n
    mag = np.abs(np.fft.rfft(y * win, n=pad))
    if not np.any(mag > 0):
        return 0.0, 0.0
    i = int(np.argmax(mag[1:]) + 1)
    shift = 0.0
    if 0 < i < len(mag) - 1 and min(mag[i - 1], mag[i], mag[i + 1]) > 0:
        a, b, c = np.log(mag[i - 1]), np.log(mag[i]), np.log(mag[i + 1])
        denom = a - 2 * b + c
        if denom != 0:
            shift = 0.5 * (a - c) / denom
            peak = np.exp(b - 0.25 * (a - c) * shift)
        else:
            peak = mag[i]
    else:
        peak = mag[i]
    freq = 2.0 * np.pi * (i + shift) / (pad * dt[0])
    amp = 2.0 * peak / np.sum(win)
    return float(freq), float(amp)


def scaling_fit(xs, ys) -> tuple[float, float, float]:
    """Least-squares line through ``(log x, log y)``: ``(slope, intercept, r^2)``."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise UsageError("xs and ys must be 1-d sequences of equal length")
    if len(x) < 2:
        raise UsageError("scaling_fit needs at least two points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise UsageError("scaling_fit needs positive data")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2
