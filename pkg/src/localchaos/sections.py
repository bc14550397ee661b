"""Poincaré sections and apsis (perihelion/aphelion) events from sampled orbits."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import _kernels as K
from .integrate import TrajectoryRecord, propagate_phase
from .models import DomainError, ModelSpec, PhaseState

__all__ = [
    "ApsisEvent",
    "ApsisKind",
    "SectionPoint",
    "apsis_events",
    "poincare_section",
    "section_crossings",
]


@dataclass(frozen=True)
class SectionPoint:
    """One crossing of the section plane.

    ``y`` and ``p_y`` are the coordinate and momentum along the axis lying
    in the plane (the y axis for the default x = 0 section).
    """

    y: float
    p_y: float
    t_cross: float


class ApsisKind(str, enum.Enum):
    PERIHELION = "perihelion"
    APHELION = "aphelion"


@dataclass(frozen=True)
class ApsisEvent:
    t: float
    r: float
    kind: ApsisKind


def _hermite(s, h, f0, f1, d0, d1):
    # cubic Hermite on [0, 1] with end slopes d0, d1 given per unit time
    s2 = s * s
    s3 = s2 * s
    return (
        (2 * s3 - 3 * s2 + 1) * f0
        + (s3 - 2 * s2 + s) * h * d0
        + (-2 * s3 + 3 * s2) * f1
        + (s3 - s2) * h * d1
    )


def _force(model, q, t):
    st, _, gx, gy, _, _, _ = K.potential(model.kind.code, model.packed, q[0], q[1], t)
    if st != K.STATUS_OK:
        raise DomainError(f"force evaluation at q={q.tolist()} t={t} is inside the collision guard")
    return -np.array([gx, gy])


def section_crossings(
    trajectory: TrajectoryRecord,
    axis: int = 0,
    offset: float = 0.0,
    direction: int = 1,
) -> list[SectionPoint]:
    """Crossings of the plane q[axis] = offset with sign(p[axis]) = direction.

    Each crossing bracketed by two samples is refined with a cubic Hermite
    interpolant built from positions and velocities at the bracket ends;
    the in-plane coordinate and momentum are interpolated the same way.
    """
    if axis not in (0, 1):
        raise ValueError("axis must be 0 or 1")
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    other = 1 - axis
    model = trajectory.model
    m = model.mass
    h = trajectory.step
    x = direction * (trajectory.q[:, axis] - offset)
    idx = np.flatnonzero((x[:-1] < 0) & (x[1:] >= 0))

    points = []
    for i in idx:
        t0 = trajectory.t[i]
        q0, q1 = trajectory.q[i], trajectory.q[i + 1]
        p0, p1 = trajectory.p[i], trajectory.p[i + 1]
        v0, v1 = p0 / m, p1 / m

        def g(s):
            return _hermite(s, h, q0[axis], q1[axis], v0[axis], v1[axis]) - offset

        s = 1.0 if g(1.0) == 0 else brentq(g, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        f0 = _force(model, q0, t0)
        f1 = _force(model, q1, t0 + h)
        p_axis = _hermite(s, h, p0[axis], p1[axis], f0[axis], f1[axis])
        if direction * p_axis <= 0:
            continue
        y = _hermite(s, h, q0[other], q1[other], v0[other], v1[other])
        py = _hermite(s, h, p0[other], p1[other], f0[other], f1[other])
        points.append(SectionPoint(float(y), float(py), float(t0 + s * h)))
    return points


def poincare_section(
    model: ModelSpec,
    initial: PhaseState,
    h: float,
    t_final: float,
    axis: int = 0,
    offset: float = 0.0,
    direction: int = 1,
) -> list[SectionPoint]:
    """Propagate an orbit and return its section points (default plane x = 0, p_x > 0).

    If the orbit leaves the domain the :class:`DomainError` is re-raised
    with the crossings found so far in ``partial``.
    """
    try:
        traj = propagate_phase(model, initial, h, t_final)
    except DomainError as err:
        err.partial = section_crossings(err.partial, axis, offset, direction) if err.partial is not None else []
        raise
    return section_crossings(traj, axis, offset, direction)


def apsis_events(trajectory: TrajectoryRecord, circular_tol: float = 1e-9) -> list[ApsisEvent]:
    """Local minima (perihelia) and maxima (aphelia) of the heliocentric distance.

    Extremal samples are refined by the vertex of the parabola through the
    sample and its two neighbours. Orbits whose relative variation of r is
    below ``circular_tol`` yield no events.
    """
    r = trajectory.r
    t = trajectory.t
    if r.size < 3 or (r.max() - r.min()) <= circular_tol * r.mean():
        return []
    left, mid, right = r[:-2], r[1:-1], r[2:]
    is_min = (mid < left) & (mid <= right)
    is_max = (mid > left) & (mid >= right)
    h = trajectory.step

    events = []
    for j in np.flatnonzero(is_min | is_max):
        a, b, c = left[j], mid[j], right[j]
        curv = a - 2 * b + c
        shift = 0.5 * (a - c) / curv if curv != 0 else 0.0
        value = b - (a - c) ** 2 / (8 * curv) if curv != 0 else b
        kind = ApsisKind.PERIHELION if is_min[j] else ApsisKind.APHELION
        events.append(ApsisEvent(float(t[j + 1] + shift * h), float(value), kind))
    return events
