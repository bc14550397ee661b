"""Fixed-step RK4 propagation of the phase flow and of the deviation system.

The deviation state zeta = (xi, eta) obeys zeta' = M zeta with
M = [[0, I], [N(t), 0]], i.e. xi' = eta, eta' = N xi. N is either an
explicit function of time (:func:`propagate_deviation`) or evaluated along
a trajectory from the potential (:func:`propagate_coupled`).

All records store samples on the uniform grid t0 + k h.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels as K
from .models import DomainError, ModelKind, ModelSpec, PhaseState, ToyParams, total_energy, toy_matrix
from .stability import (
    DEFAULT_TOL,
    Indicator,
    UnstableInterval,
    detect_unstable_intervals,
    turning_guard,
)

__all__ = [
    "CoupledRun",
    "DeviationRecord",
    "DeviationState",
    "EigenSeries",
    "TrajectoryRecord",
    "n_steps",
    "propagate_coupled",
    "propagate_deviation",
    "propagate_phase",
]


@dataclass(frozen=True)
class DeviationState:
    """Separation ``xi`` between neighbouring trajectories and its rate ``eta``."""

    xi: tuple[float, float] = (1.0, 0.0)
    eta: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        for name in ("xi", "eta"):
            v = tuple(float(c) for c in np.asarray(getattr(self, name), float).reshape(-1))
            if len(v) != 2 or not all(math.isfinite(c) for c in v):
                raise ValueError(f"{name} must be two finite numbers, got {v}")
            object.__setattr__(self, name, v)

    def as_array(self) -> np.ndarray:
        return np.array([*self.xi, *self.eta])

    def __mul__(self, c: float) -> DeviationState:
        z = c * self.as_array()
        return DeviationState(z[:2], z[2:])

    __rmul__ = __mul__

    def __add__(self, other: DeviationState) -> DeviationState:
        z = self.as_array() + other.as_array()
        return DeviationState(z[:2], z[2:])


@dataclass(frozen=True)
class TrajectoryRecord:
    """Phase-space samples of one orbit on a uniform time grid.

    ``q`` and ``p`` have shape (n, 2); ``energy`` is the total energy at
    each sample.
    """

    model: ModelSpec
    step: float
    t: np.ndarray
    q: np.ndarray
    p: np.ndarray
    energy: np.ndarray

    def __len__(self):
        return self.t.size

    def __getitem__(self, i) -> PhaseState:
        return PhaseState(self.q[i], self.p[i], self.t[i])

    @property
    def samples(self) -> list[PhaseState]:
        return [self[i] for i in range(len(self))]

    @property
    def r(self) -> np.ndarray:
        return np.hypot(self.q[:, 0], self.q[:, 1])

    def max_relative_drift(self) -> float:
        e0 = self.energy[0]
        scale = abs(e0) if e0 != 0 else 1.0
        return float(np.max(np.abs(self.energy - e0)) / scale)


@dataclass(frozen=True)
class DeviationRecord:
    """Deviation samples ``xi``, ``eta`` (shape (n, 2)) and a reference envelope exp(lambda_ref t)."""

    t: np.ndarray
    xi: np.ndarray
    eta: np.ndarray
    lambda_ref: float = 1.0

    def __len__(self):
        return self.t.size

    @property
    def samples(self) -> list[tuple[float, DeviationState]]:
        return [(float(t), DeviationState(x, e)) for t, x, e in zip(self.t, self.xi, self.eta)]

    @property
    def envelope(self) -> np.ndarray:
        return np.exp(self.lambda_ref * (self.t - self.t[0]))

    @property
    def norm(self) -> np.ndarray:
        return np.hypot(self.xi[:, 0], self.xi[:, 1])


@dataclass(frozen=True)
class EigenSeries:
    """Eigenvalues of N sampled along a trajectory; NaN where ``valid`` is false."""

    indicator: Indicator
    t: np.ndarray
    lambda_minus: np.ndarray
    lambda_plus: np.ndarray
    valid: np.ndarray

    def intervals(self, tol: float = DEFAULT_TOL) -> list[UnstableInterval]:
        return detect_unstable_intervals(self.t, self.lambda_plus, self.valid, tol)


@dataclass(frozen=True)
class CoupledRun:
    trajectory: TrajectoryRecord
    deviation: DeviationRecord
    eigen: EigenSeries

    def __iter__(self):
        return iter((self.trajectory, self.deviation, self.eigen))


def n_steps(t0: float, t_final: float, h: float) -> int:
    """Number of uniform steps of size ``h`` covering [t0, t_final]."""
    if not (h > 0 and math.isfinite(h)):
        raise ValueError(f"step must be positive, got {h}")
    span = t_final - t0
    if not span > 0:
        raise ValueError(f"t_final={t_final} must exceed the initial time {t0}")
    x = span / h
    return max(1, math.ceil(x - 1e-9 * max(1.0, x)))


def _check_phase_model(model):
    if model.kind is ModelKind.TOY:
        raise ValueError("the toy model has no phase flow; use propagate_deviation")


def _domain_error(model, t, q, p, k, t0, h):
    last = PhaseState(q[k], p[k], t0 + k * h) if k >= 0 else None
    where = f"after t={last.t}" if last is not None else "at the initial state"
    return DomainError(f"{model.kind.value} orbit left the domain {where}", last_state=last)


def propagate_phase(model: ModelSpec, initial: PhaseState, h: float, t_final: float) -> TrajectoryRecord:
    """Integrate q' = p/m, p' = -grad V with classical RK4 at fixed step ``h``.

    Raises
    ------
    DomainError
        If a stage hits the collision guard. ``last_state`` is the last
        valid sample and ``partial`` the record up to it.
    """
    _check_phase_model(model)
    n = n_steps(initial.t, t_final, h)
    out = np.empty((n + 1, 4))
    energy = np.empty(n + 1)
    status, k = K.phase_rk4(model.kind.code, model.packed, initial.t, initial.as_array(), h, n, out, energy)
    t = initial.t + h * np.arange(n + 1)
    if status != K.STATUS_OK:
        err = _domain_error(model, t, out[:, :2], out[:, 2:], k, initial.t, h)
        if k >= 0:
            err.partial = TrajectoryRecord(model, h, t[: k + 1], out[: k + 1, :2], out[: k + 1, 2:], energy[: k + 1])
        raise err
    return TrajectoryRecord(model, h, t, out[:, :2], out[:, 2:], energy)


MatrixSource = Callable[[float], "np.ndarray"]


def propagate_deviation(
    matrix_source: MatrixSource | ToyParams,
    zeta0: DeviationState,
    h: float,
    t_final: float,
    t0: float = 0.0,
    lambda_ref: float = 1.0,
) -> DeviationRecord:
    """Integrate xi'' = N(t) xi for an explicitly time-dependent N.

    ``matrix_source`` maps a time to a 2x2 matrix; a :class:`ToyParams`
    instance stands for the toy matrix. It is queried on the half-step grid
    t0 + k h / 2, as required by the RK4 stages.
    """
    if isinstance(matrix_source, ToyParams):
        params = matrix_source
        matrix_source = lambda t: toy_matrix(params, t)  # noqa: E731
    n = n_steps(t0, t_final, h)
    half = t0 + 0.5 * h * np.arange(2 * n + 1)
    nhalf = np.empty((2 * n + 1, 2, 2))
    for k, tk in enumerate(half):
        nhalf[k] = matrix_source(float(tk))
    if not np.all(np.isfinite(nhalf)):
        raise ValueError("matrix_source returned non-finite entries")
    out = np.empty((n + 1, 4))
    K.deviation_rk4(nhalf, zeta0.as_array(), h, n, out)
    return DeviationRecord(half[::2].copy(), out[:, :2], out[:, 2:], lambda_ref)


def propagate_coupled(
    model: ModelSpec,
    initial: PhaseState,
    zeta0: DeviationState,
    indicator: Indicator | str,
    h: float,
    t_final: float,
    eps_turn: float | None = None,
    lambda_ref: float = 1.0,
) -> CoupledRun:
    """Advance the orbit and the deviation in lockstep, N evaluated at each RK4 stage.

    The orbit energy E used by the GEM matrix is fixed to the initial
    energy. Samples where E - V < ``eps_turn`` (default 1e-9 |E|) are
    flagged invalid in the eigen series; the deviation sees N = 0 there.
    """
    _check_phase_model(model)
    indicator = Indicator(indicator)
    e0 = total_energy(model, initial)
    if eps_turn is None:
        eps_turn = turning_guard(e0)
    n = n_steps(initial.t, t_final, h)
    out = np.empty((n + 1, 8))
    energy = np.empty(n + 1)
    lam = np.empty((n + 1, 2))
    valid = np.empty(n + 1, dtype=np.bool_)
    s0 = np.concatenate([initial.as_array(), zeta0.as_array()])
    status, k = K.coupled_rk4(
        model.kind.code, model.packed, indicator.code, e0, eps_turn, initial.t, s0, h, n, out, energy, lam, valid
    )
    t = initial.t + h * np.arange(n + 1)
    if status != K.STATUS_OK:
        err = _domain_error(model, t, out[:, :2], out[:, 2:4], k, initial.t, h)
        if k >= 0:
            m = k + 1
            err.partial = _coupled_run(model, h, t[:m], out[:m], energy[:m], lam[:m], valid[:m], indicator, lambda_ref)
        raise err
    return _coupled_run(model, h, t, out, energy, lam, valid, indicator, lambda_ref)


def _coupled_run(model, h, t, out, energy, lam, valid, indicator, lambda_ref):
    return CoupledRun(
        TrajectoryRecord(model, h, t, out[:, 0:2], out[:, 2:4], energy),
        DeviationRecord(t, out[:, 4:6], out[:, 6:8], lambda_ref),
        EigenSeries(indicator, t, lam[:, 0], lam[:, 1], valid),
    )
