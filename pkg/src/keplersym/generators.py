"""Infinitesimal symmetry generators attached to the conserved quantities.

Each conserved quantity C yields a generator whose position characteristic is
P = dC/dv.  The four families handled here:

    energy             P = v                      (time translation)
    angular momentum j P = e_j x r                (rotation about axis j)
    LRL vector j       P_i = 2 v_i r_j - r_i v_j - (r.v) delta_ij
    LRL direction j    the LRL characteristic scaled by 1/|A| plus
                       2 E |A|^-3 A_j (r x L)

Prolongation to phase space appends the on-shell derivative of P.  The
coordinate-space version adds a time component; the gauge is fixed so that the
flow leaves |r| invariant, which makes r . delta_r vanish identically.  The
reported delta_t is -(r x L)_axis, the component whose ray integral defines
the time shift of the finite transformations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .core import (
    KeplerSystem,
    PhaseState,
    Vec3,
    acceleration,
    as_vec3,
    cross,
    energy,
    fd_grad_v,
    fd_step,
    is_circular,
    lrl_vector,
    norm,
)
from .errors import ApsisError, DegenerateDirectionError, UsageError

# |r.v| below this (relative to |r||v|) counts as an apsis for gauge purposes.
APSIS_FLOOR = 1e-12


class GeneratorKind(Enum):
    ENERGY = "energy"
    ANGULAR_MOMENTUM = "angular_momentum"
    LRL = "lrl"
    LRL_DIRECTION = "lrl_direction"


class GeneratorClass(Enum):
    POINT = "point"
    DYNAMICAL = "dynamical"


@dataclass(frozen=True)
class GeneratorId:
    kind: GeneratorKind
    axis: int | None = None

    def __post_init__(self):
        if self.kind is GeneratorKind.ENERGY:
            if self.axis is not None:
                raise UsageError("the energy generator has no axis")
        elif self.axis not in (1, 2, 3):
            raise UsageError(f"axis must be 1, 2, or 3, got {self.axis}")

    @staticmethod
    def energy() -> "GeneratorId":
        return GeneratorId(GeneratorKind.ENERGY)

    @staticmethod
    def angular_momentum(axis: int) -> "GeneratorId":
        return GeneratorId(GeneratorKind.ANGULAR_MOMENTUM, axis)

    @staticmethod
    def lrl(axis: int) -> "GeneratorId":
        return GeneratorId(GeneratorKind.LRL, axis)

    @staticmethod
    def lrl_direction(axis: int) -> "GeneratorId":
        return GeneratorId(GeneratorKind.LRL_DIRECTION, axis)


@dataclass(frozen=True)
class GeneratorValue:
    """One generator evaluated at one state (time, position, velocity parts)."""

    delta_t: float
    delta_r: Vec3
    delta_v: Vec3

    def __post_init__(self):
        object.__setattr__(self, "delta_t", float(self.delta_t))
        object.__setattr__(self, "delta_r", as_vec3(self.delta_r, "delta_r"))
        object.__setattr__(self, "delta_v", as_vec3(self.delta_v, "delta_v"))


def _axis_vec(axis: int) -> Vec3:
    e = np.zeros(3)
    e[axis - 1] = 1.0
    return e


def _direction_scale(state: PhaseState, sys: KeplerSystem) -> tuple[Vec3, float, float]:
    a_vec = lrl_vector(state, sys)
    a_mag = norm(a_vec)
    if is_circular(a_mag, sys.kappa):
        raise DegenerateDirectionError(
            "LRL direction undefined: |A| is at the circular-orbit threshold"
        )
    return a_vec, a_mag, energy(state, sys)


def _lrl_characteristic(state: PhaseState, axis: int) -> Vec3:
    r, v = state.r, state.v
    j = axis - 1
    return 2.0 * v * r[j] - r * v[j] - _axis_vec(axis) * float(np.dot(r, v))


def _lrl_dt_characteristic(state: PhaseState, sys: KeplerSystem, axis: int) -> Vec3:
    r, v = state.r, state.v
    j = axis - 1
    r_mag = state.r_mag
    v_sq = float(np.dot(v, v))
    return (
        v * v[j]
        - sys.kappa / r_mag**3 * r * r[j]
        - _axis_vec(axis) * (v_sq - sys.kappa / r_mag)
    )


def characteristic(gen: GeneratorId, state: PhaseState, sys: KeplerSystem) -> Vec3:
    """Position characteristic P = dC/dv of the generator at the given state.

    For the LRL direction the quotient rule gives

        P[Theta_j] = P[A_j]/|A| + A_j (2E (r x L) - |L|^2 v) / |A|^3

    whose |L|^2 v piece is a multiple of the on-shell flow direction (it drops
    out of every action on constants of motion) but is required for P to be
    the actual velocity gradient of Theta_j.
    """
    if gen.kind is GeneratorKind.ENERGY:
        return np.array(state.v)
    if gen.kind is GeneratorKind.ANGULAR_MOMENTUM:
        return cross(_axis_vec(gen.axis), state.r)
    if gen.kind is GeneratorKind.LRL:
        return _lrl_characteristic(state, gen.axis)
    a_vec, a_mag, e = _direction_scale(state, sys)
    l_vec = cross(state.r, state.v)
    l_sq = float(np.dot(l_vec, l_vec))
    r_cross_l = cross(state.r, l_vec)
    return (
        _lrl_characteristic(state, gen.axis) / a_mag
        + a_vec[gen.axis - 1] / a_mag**3 * (2.0 * e * r_cross_l - l_sq * state.v)
    )


def _dt_characteristic(gen: GeneratorId, state: PhaseState, sys: KeplerSystem) -> Vec3:
    if gen.kind is GeneratorKind.ENERGY:
        return acceleration(state, sys)
    if gen.kind is GeneratorKind.ANGULAR_MOMENTUM:
        return cross(_axis_vec(gen.axis), state.v)
    if gen.kind is GeneratorKind.LRL:
        return _lrl_dt_characteristic(state, sys, gen.axis)
    a_vec, a_mag, e = _direction_scale(state, sys)
    l_vec = cross(state.r, state.v)
    l_sq = float(np.dot(l_vec, l_vec))
    v_cross_l = cross(state.v, l_vec)
    return (
        _lrl_dt_characteristic(state, sys, gen.axis) / a_mag
        + a_vec[gen.axis - 1]
        / a_mag**3
        * (2.0 * e * v_cross_l - l_sq * acceleration(state, sys))
    )


def prolonged_generator(gen: GeneratorId, state: PhaseState, sys: KeplerSystem) -> GeneratorValue:
    """Phase-space prolongation (P, DtP); the time component is zero."""
    return GeneratorValue(
        0.0, characteristic(gen, state, sys), _dt_characteristic(gen, state, sys)
    )


def gauge_fixed_generator(gen: GeneratorId, state: PhaseState, sys: KeplerSystem) -> GeneratorValue:
    """Coordinate-space generator with the radius-preserving gauge.

    delta_t is -(r x L)_axis, the component the time-shift quadrature
    integrates.  delta_r and delta_v carry the velocity-direction completion
    tau = -(r . P)/(r . v), which makes r . delta_r vanish identically.  At an
    apsis that completion is finite only when (r x L)_axis also vanishes, in
    which case the on-shell limit -(A + kappa rhat)_axis / (|v|^2 - kappa/|r|)
    (scaled by 1/|A| for the direction family) is used; otherwise ApsisError.
    """
    if gen.kind not in (GeneratorKind.LRL, GeneratorKind.LRL_DIRECTION):
        raise UsageError("gauge-fixed components exist for the LRL and LRL-direction families")
    r, v = state.r, state.v
    r_mag = state.r_mag
    l_vec = cross(r, v)
    r_cross_l = cross(r, l_vec)
    delta_t = -r_cross_l[gen.axis - 1]

    p = characteristic(gen, state, sys)
    dt_p = _dt_characteristic(gen, state, sys)
    r_dot_v = float(np.dot(r, v))
    num = float(np.dot(r, p))

    if abs(r_dot_v) > APSIS_FLOOR * (r_mag * state.v_mag + 1e-300):
        tau = -num / r_dot_v
    else:
        num_scale = r_mag * (norm(l_vec) + norm(p)) + 1e-300
        if abs(num) > 1e-9 * num_scale:
            raise ApsisError(
                f"r.v = 0 and (r x L)_{gen.axis} != 0: no finite radius-preserving "
                "completion exists at an apsis for this axis"
            )
        beta_v = float(np.dot(v, v)) - sys.kappa / r_mag
        if abs(beta_v) < 1e-12 * (float(np.dot(v, v)) + sys.kappa / r_mag):
            raise ApsisError("apsis limit of the gauge completion is indeterminate here")
        # tau -> -Dt(r.P)/Dt(r.v) as r.v -> 0 along the orbit
        a_vec = lrl_vector(state, sys)
        v_cross_l = a_vec + sys.kappa * r / r_mag
        if gen.kind is GeneratorKind.LRL:
            tau = -v_cross_l[gen.axis - 1] / beta_v
        else:
            a_mag = norm(a_vec)
            l_sq = float(np.dot(l_vec, l_vec))
            tau = (
                -v_cross_l[gen.axis - 1] / (a_mag * beta_v)
                + l_sq * a_vec[gen.axis - 1] / a_mag**3
            )

    return GeneratorValue(delta_t, p + tau * v, dt_p + tau * acceleration(state, sys))


def noether_characteristic(constant: Callable[[PhaseState], float], state: PhaseState) -> Vec3:
    """dC/dv by central finite differences, the Noether-inverse characteristic."""
    return fd_grad_v(constant, state)


def velocity_jacobian(gen: GeneratorId, state: PhaseState, sys: KeplerSystem) -> np.ndarray:
    """Finite-difference matrix dP_i/dv_k of the characteristic."""
    jac = np.zeros((3, 3))
    v = np.array(state.v)
    for k in range(3):
        h = fd_step(v[k])
        vp, vm = v.copy(), v.copy()
        vp[k] += h
        vm[k] -= h
        p_plus = characteristic(gen, PhaseState(state.r, vp), sys)
        p_minus = characteristic(gen, PhaseState(state.r, vm), sys)
        jac[:, k] = (p_plus - p_minus) / (2.0 * h)
    return jac


def classify_generator(
    gen: GeneratorId, state: PhaseState, sys: KeplerSystem, tol: float = 1e-4
) -> GeneratorClass:
    """Point iff dP/dv is a multiple of the identity (strict linearity in v)."""
    jac = velocity_jacobian(gen, state, sys)
    tau_hat = float(np.trace(jac)) / 3.0
    deviation = float(np.max(np.abs(jac - tau_hat * np.eye(3))))
    if not math.isfinite(deviation):
        return GeneratorClass.DYNAMICAL
    return GeneratorClass.POINT if deviation <= tol else GeneratorClass.DYNAMICAL
