"""Potential-energy models with analytic derivatives.

Five model kinds are provided:

* ``toda``      generalized Toda polynomial, V = (x^2+y^2)/2 + x^2 y - y^3/3 + 3x^4/2 + y^4/2
* ``harmonic``  isotropic oscillator V = (x^2+y^2)/2, an integrable test fixture
* ``kepler``    V = -4 pi^2 m_e / r in AU / year / solar-mass units
* ``threebody`` Kepler plus a perturber ("Jupiter") on a prescribed circular orbit
* ``toy``       no potential; carries the parameters of the time-dependent toy
  deviation matrix returned by :func:`toy_matrix`

Celestial units are fixed so that G M_sun = 4 pi^2.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K

UNIT_SYSTEM = "AU-year-Msun, G=4π²"
COLLISION_GUARD = K.COLLISION_GUARD
GM = K.GM

__all__ = [
    "COLLISION_GUARD",
    "GM",
    "UNIT_SYSTEM",
    "DomainError",
    "ModelKind",
    "ModelSpec",
    "PhaseState",
    "ThreeBodyParams",
    "ToyParams",
    "evaluate_potential",
    "toy_matrix",
    "total_energy",
]


class DomainError(ValueError):
    """A state left the physical domain of a model (collision with a point mass).

    ``last_state`` holds the last valid :class:`PhaseState` when the error
    comes from a propagation, and ``partial`` whatever partial result the
    raising routine could salvage.
    """

    def __init__(self, message, last_state=None, partial=None):
        super().__init__(message)
        self.last_state = last_state
        self.partial = partial


class ModelKind(str, enum.Enum):
    TOY = "toy"
    TODA = "toda"
    HARMONIC = "harmonic"
    KEPLER = "kepler"
    THREE_BODY = "threebody"

    @property
    def code(self) -> int:
        return _KIND_CODES[self]

    @property
    def celestial(self) -> bool:
        return self in (ModelKind.KEPLER, ModelKind.THREE_BODY)


_KIND_CODES = {
    ModelKind.TOY: K.KIND_TOY,
    ModelKind.TODA: K.KIND_TODA,
    ModelKind.HARMONIC: K.KIND_HARMONIC,
    ModelKind.KEPLER: K.KIND_KEPLER,
    ModelKind.THREE_BODY: K.KIND_THREE_BODY,
}


def _as_vec2(v, name):
    arr = np.array(v, dtype=float).reshape(-1)
    if arr.shape != (2,):
        raise ValueError(f"{name} must have two components, got shape {np.shape(v)}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {arr}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class PhaseState:
    """Position and momentum of a two-degree-of-freedom system at time ``t``."""

    q: np.ndarray
    p: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "q", _as_vec2(self.q, "q"))
        object.__setattr__(self, "p", _as_vec2(self.p, "p"))
        t = float(self.t)
        if not math.isfinite(t):
            raise ValueError(f"t must be finite, got {t}")
        object.__setattr__(self, "t", t)

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])


@dataclass(frozen=True)
class ToyParams:
    """Parameters of the toy matrix N(t) = a I + b sigma_1 + c sigma_3.

    a = -t / delta_t, b = rho cos(theta), c = rho sin(theta).
    """

    delta_t: float
    rho: float = 1.0
    theta: float = 0.0

    def __post_init__(self):
        if not (self.delta_t > 0 and math.isfinite(self.delta_t)):
            raise ValueError(f"delta_t must be positive, got {self.delta_t}")
        if not (self.rho > 0 and math.isfinite(self.rho)):
            raise ValueError(f"rho must be positive, got {self.rho}")

    def __call__(self, t: float) -> np.ndarray:
        return toy_matrix(self, t)


@dataclass(frozen=True)
class ThreeBodyParams:
    """Earth and Jupiter parameters; ``m_j = 0`` reduces to Kepler.

    Masses in solar masses, ``r_j`` in AU, ``omega_j`` in rad/year.
    """

    m_e: float
    m_j: float
    r_j: float
    omega_j: float

    def __post_init__(self):
        if not self.m_e > 0:
            raise ValueError(f"m_e must be positive, got {self.m_e}")
        if not self.m_j >= 0:
            raise ValueError(f"m_j must be non-negative, got {self.m_j}")
        if self.m_j > 0 and not self.r_j > 0:
            raise ValueError(f"r_j must be positive when m_j > 0, got {self.r_j}")


@dataclass(frozen=True)
class ModelSpec:
    """A model kind, the (common) particle mass and its parameter block.

    Use the named constructors (:meth:`toda`, :meth:`kepler`, ...) rather
    than building one by hand.
    """

    kind: ModelKind
    mass: float = 1.0
    params: ToyParams | ThreeBodyParams | None = None
    packed: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        kind = ModelKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise ValueError(f"mass must be positive, got {self.mass}")
        expected = {ModelKind.TOY: ToyParams, ModelKind.THREE_BODY: ThreeBodyParams}.get(kind)
        if expected is None:
            if self.params is not None:
                raise ValueError(f"{kind.value} model takes no parameter block")
        elif not isinstance(self.params, expected):
            raise ValueError(f"{kind.value} model requires {expected.__name__}")
        if kind is ModelKind.THREE_BODY and self.params.m_e != self.mass:
            raise ValueError("three-body mass must equal params.m_e")

        par = np.zeros(8)
        par[0] = self.mass
        par[1] = self.mass
        if isinstance(self.params, ThreeBodyParams):
            par[2:5] = self.params.m_j, self.params.r_j, self.params.omega_j
        elif isinstance(self.params, ToyParams):
            par[5:8] = self.params.delta_t, self.params.rho, self.params.theta
        par.flags.writeable = False
        object.__setattr__(self, "packed", par)

    @classmethod
    def toda(cls) -> ModelSpec:
        return cls(ModelKind.TODA, 1.0)

    @classmethod
    def harmonic(cls) -> ModelSpec:
        return cls(ModelKind.HARMONIC, 1.0)

    @classmethod
    def kepler(cls, m_e: float = 1.0) -> ModelSpec:
        return cls(ModelKind.KEPLER, m_e)

    @classmethod
    def three_body(
        cls,
        m_e: float = 1.0,
        m_j: float = 9.547919e-4,
        r_j: float = 5.2026,
        omega_j: float | None = None,
    ) -> ModelSpec:
        """Restricted three-body model; ``omega_j`` defaults to the circular Kepler rate 2 pi / r_j^1.5."""
        if omega_j is None:
            omega_j = 2.0 * math.pi / r_j**1.5 if r_j > 0 else 0.0
        return cls(ModelKind.THREE_BODY, m_e, ThreeBodyParams(m_e, m_j, r_j, omega_j))

    @classmethod
    def toy(cls, delta_t: float, rho: float = 1.0, theta: float = 0.0) -> ModelSpec:
        return cls(ModelKind.TOY, 1.0, ToyParams(delta_t, rho, theta))

    def to_dict(self) -> dict:
        out = {"kind": self.kind.value, "mass": self.mass}
        if self.params is not None:
            out["params"] = dict(vars(self.params))
        return out


def evaluate_potential(model: ModelSpec, q, t: float = 0.0):
    """Potential value, gradient and Hessian at position ``q`` and time ``t``.

    Returns
    -------
    value : float
    gradient : ndarray, shape (2,)
    hessian : ndarray, shape (2, 2), exactly symmetric

    Raises
    ------
    DomainError
        If ``q`` is within the collision guard of the Sun or of Jupiter.
    """
    if model.kind is ModelKind.TOY:
        raise ValueError("the toy model has no potential; use toy_matrix")
    q = _as_vec2(q, "q")
    st, v, gx, gy, hxx, hxy, hyy = K.potential(model.kind.code, model.packed, q[0], q[1], float(t))
    if st != K.STATUS_OK:
        raise DomainError(f"{model.kind.value}: q={q.tolist()} at t={t} is inside the collision guard")
    return v, np.array([gx, gy]), np.array([[hxx, hxy], [hxy, hyy]])


def total_energy(model: ModelSpec, state: PhaseState) -> float:
    """Kinetic plus potential energy, p.p / 2m + V(q, t)."""
    v, _, _ = evaluate_potential(model, state.q, state.t)
    return float(state.p @ state.p) / (2.0 * model.mass) + v


def toy_matrix(params: ToyParams, t: float) -> np.ndarray:
    """The toy deviation matrix [[a+c, b], [b, a-c]] with a = -t/delta_t."""
    a = -t / params.delta_t
    b = params.rho * math.cos(params.theta)
    c = params.rho * math.sin(params.theta)
    return np.array([[a + c, b], [b, a - c]])
