"""Local stability matrices, their spectra, unstable intervals and the product test.

The local deviation equation is xi'' = N xi. Two choices of N are built
from a potential:

* Lyapunov: N = -Hess(V) / m
* GEM:      N = -(3 / (2 (E - V)) grad V grad V^T + Hess(V)) / m

An eigenvalue lambda of N maps to eigenvalues mu = +-sqrt(lambda) of the
first-order system, so lambda > 0 is locally unstable. Along a trajectory
the largest eigenvalue is segmented into unstable intervals, and each
interval's product delta_t * lambda_max is compared against 1: a product
not exceeding 1 anywhere rules chaos out.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels as K
from .models import ModelKind, ModelSpec, evaluate_potential

__all__ = [
    "DEFAULT_TOL",
    "EPS_TURN_FACTOR",
    "Indicator",
    "InvalidSample",
    "LocalSpectrum",
    "StabilityMatrix",
    "StabilityVerdict",
    "UnstableInterval",
    "detect_unstable_intervals",
    "local_spectrum",
    "stability_matrix",
    "symmetric_eigenvalues",
    "uncertainty_verdict",
]

DEFAULT_TOL = 1e-10
EPS_TURN_FACTOR = 1e-9


class InvalidSample(ValueError):
    """Raised when asking for the spectrum of a sample flagged invalid."""


class Indicator(str, enum.Enum):
    LYAPUNOV = "lyapunov"
    GEM = "gem"
    TOY = "toy"

    @property
    def code(self) -> int:
        if self is Indicator.LYAPUNOV:
            return K.IND_LYAPUNOV
        if self is Indicator.GEM:
            return K.IND_GEM
        raise ValueError("the toy matrix is not built from a potential")


def turning_guard(energy: float) -> float:
    """Smallest admissible E - V for the GEM matrix."""
    return EPS_TURN_FACTOR * abs(energy)


@dataclass(frozen=True)
class StabilityMatrix:
    entries: np.ndarray
    kind: Indicator
    t: float = 0.0
    valid: bool = True


@dataclass(frozen=True)
class LocalSpectrum:
    lambda_minus: float
    lambda_plus: float
    mu_set: tuple[complex, complex, complex, complex]

    @property
    def unstable(self) -> bool:
        return self.lambda_plus > 0

    @property
    def classification(self) -> str:
        return "unstable" if self.unstable else "stable"


@dataclass(frozen=True)
class UnstableInterval:
    t_start: float
    t_end: float
    lambda_max: float

    @property
    def delta_t(self) -> float:
        return self.t_end - self.t_start

    @property
    def product(self) -> float:
        return self.delta_t * self.lambda_max

    @property
    def mu_product(self) -> float:
        """delta_t * sqrt(lambda_max): the dimensionless growth-rate variant."""
        return self.delta_t * math.sqrt(self.lambda_max)


@dataclass(frozen=True)
class StabilityVerdict:
    intervals: tuple[UnstableInterval, ...]
    max_product: float
    cumulative_product: float
    max_mu_product: float

    @property
    def chaos_possible(self) -> bool:
        return self.max_product > 1.0


def stability_matrix(
    model: ModelSpec,
    q,
    t: float = 0.0,
    energy: float | None = None,
    kind: Indicator | str = Indicator.LYAPUNOV,
    eps_turn: float | None = None,
) -> StabilityMatrix:
    """Build the Lyapunov or GEM matrix N at position ``q``.

    For GEM, ``energy`` is the conserved orbit energy. If E - V falls below
    ``eps_turn`` (default ``1e-9 |E|``) the result is flagged invalid with
    zeroed entries instead of raising.
    """
    kind = Indicator(kind)
    if model.kind is ModelKind.TOY or kind is Indicator.TOY:
        raise ValueError("use toy_matrix for the toy model")
    if kind is Indicator.GEM and energy is None:
        raise ValueError("the GEM matrix needs the orbit energy")
    v, g, hess = evaluate_potential(model, q, t)
    e = 0.0 if energy is None else float(energy)
    if eps_turn is None:
        eps_turn = turning_guard(e)
    ok, a, b, c = K.stability_entries(kind.code, model.mass, e, eps_turn, v, g[0], g[1],
                                      hess[0, 0], hess[0, 1], hess[1, 1])
    return StabilityMatrix(np.array([[a, b], [b, c]]), kind, float(t), bool(ok))


def _principal_roots(lam: float) -> tuple[complex, complex]:
    root = cmath.sqrt(complex(lam, 0.0))
    return root, -root


def local_spectrum(matrix: StabilityMatrix | np.ndarray) -> LocalSpectrum:
    """Closed-form eigenvalues of a symmetric 2x2 N and the four mu = +-sqrt(lambda).

    Raises
    ------
    InvalidSample
        If ``matrix`` is a :class:`StabilityMatrix` flagged invalid.
    """
    if isinstance(matrix, StabilityMatrix):
        if not matrix.valid:
            raise InvalidSample(f"stability matrix at t={matrix.t} is invalid")
        n = matrix.entries
    else:
        n = np.asarray(matrix, dtype=float)
    if n.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {n.shape}")
    if n[0, 1] != n[1, 0]:
        raise ValueError("matrix must be symmetric")
    lo, hi = K.sym_eigenvalues(n[0, 0], n[0, 1], n[1, 1])
    return LocalSpectrum(lo, hi, (*_principal_roots(hi), *_principal_roots(lo)))


def symmetric_eigenvalues(a, b, c):
    """Vectorized eigenvalues (lo, hi) of [[a, b], [b, c]]."""
    a, b, c = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float), np.asarray(c, float))
    mean = 0.5 * (a + c)
    rad = np.hypot(0.5 * (a - c), b)
    return mean - rad, mean + rad


def _zero_crossing(t0, l0, t1, l1):
    # linear root of lambda between two samples, clamped to the bracket
    if l0 == l1:
        return t0
    s = l0 / (l0 - l1)
    return t0 + min(max(s, 0.0), 1.0) * (t1 - t0)


def detect_unstable_intervals(
    t,
    lambda_plus,
    valid=None,
    tol: float = DEFAULT_TOL,
) -> list[UnstableInterval]:
    """Maximal runs of valid samples with ``lambda_plus > tol``.

    Interval ends are placed at the linearly interpolated zero crossing of
    ``lambda_plus`` when the neighbouring sample is valid, otherwise at the
    outermost positive sample. Invalid samples always end a run.
    ``lambda_max`` is the largest sampled value inside the run. A run whose
    refined extent rounds to zero (a lone sample at the edge of the data)
    is dropped.
    """
    t = np.asarray(t, dtype=float)
    lam = np.asarray(lambda_plus, dtype=float)
    if t.shape != lam.shape or t.ndim != 1:
        raise ValueError("t and lambda_plus must be 1-D arrays of equal length")
    if tol < 0:
        raise ValueError("tol must be non-negative")
    ok = np.ones(t.shape, bool) if valid is None else np.asarray(valid, bool)
    if ok.shape != t.shape:
        raise ValueError("valid must match t")
    if t.size > 1 and not np.all(np.diff(t) > 0):
        raise ValueError("sample times must be strictly increasing")

    hot = ok & (lam > tol)
    if not hot.any():
        return []
    edges = np.diff(np.concatenate([[0], hot.astype(np.int8), [0]]))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1)  # exclusive

    out = []
    for i, j in zip(starts, stops):
        last = j - 1
        t_start = t[i]
        if i > 0 and ok[i - 1]:
            t_start = _zero_crossing(t[i - 1], lam[i - 1], t[i], lam[i])
        t_end = t[last]
        if j < t.size and ok[j]:
            t_end = _zero_crossing(t[last], lam[last], t[j], lam[j])
        if t_end <= t_start:
            continue
        out.append(UnstableInterval(float(t_start), float(t_end), float(lam[i:j].max())))
    return out


def uncertainty_verdict(intervals: Sequence[UnstableInterval]) -> StabilityVerdict:
    """Aggregate intervals: chaos is possible only if some delta_t * lambda_max exceeds 1."""
    intervals = tuple(intervals)
    products = [iv.product for iv in intervals]
    return StabilityVerdict(
        intervals=intervals,
        max_product=max(products, default=0.0),
        cumulative_product=float(sum(products)),
        max_mu_product=max((iv.mu_product for iv in intervals), default=0.0),
    )
