"""Containers for evolving states and their time derivatives."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

import numpy as np


class Bundle:
    """Mixin giving dataclasses of arrays/floats the linear operations RK4 needs.

    Fields whose names are listed in ``_static`` (flags, metadata) are copied
    from ``self`` rather than combined.
    """

    _static: tuple[str, ...] = ()

    def _linear(self):
        return [f.name for f in fields(self) if f.name not in self._static]

    def axpy(self, a: float, other: "Bundle") -> "Bundle":
        """Return ``self + a * other``."""
        upd = {k: getattr(self, k) + a * getattr(other, k) for k in self._linear()}
        return replace(self, **upd)

    def scaled(self, a: float) -> "Bundle":
        return replace(self, **{k: a * getattr(self, k) for k in self._linear()})

    def arrays(self) -> list[np.ndarray]:
        return [np.asarray(getattr(self, k), dtype=float) for k in self._linear()]

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.arrays())

    def distance(self, other: "Bundle") -> float:
        """Relative l2 distance over all linear fields."""
        num = sum(float(np.sum((a - b) ** 2)) for a, b in zip(self.arrays(), other.arrays()))
        den = sum(float(np.sum(a**2)) for a in other.arrays())
        return float(np.sqrt(num / max(den, 1e-300)))


@dataclass
class DistState(Bundle):
    """Uncentered distribution ``f`` on phase space."""

    f: np.ndarray


@dataclass
class LangmuirState(Bundle):
    ntilde: np.ndarray
    phi: np.ndarray


@dataclass
class MomentDot(Bundle):
    """Time derivative in ``(n, P, rho)`` coordinates, with the raw ``(n rho)`` rate."""

    n: np.ndarray
    p: np.ndarray
    rho: np.ndarray
    nrho: np.ndarray


@dataclass
class FastSlowState(Bundle):
    """``(n0, ntilde, Phi, pi, rho)`` with ``n = n0 + delta*ntilde`` and ``P = grad Phi + pi``."""

    n0: float
    ntilde: np.ndarray
    phi: np.ndarray
    pi: np.ndarray
    rho: np.ndarray
    raw_residue: bool = False

    _static = ("raw_residue",)


@dataclass
class QnvpState(Bundle):
    """Point of the quasineutral submanifold: constant ``n0``, solenoidal ``pi``, ``rho``."""

    n0: float
    pi: np.ndarray
    rho: np.ndarray
