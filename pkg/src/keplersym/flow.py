"""Numerical integration oracles.

Two integrators live here.  Orbits are propagated with an embedded
Dormand-Prince 5(4) pair under PI step-size control; this is the trusted
reference dynamics every closed-form result is checked against.  Symmetry
flows (the ray from the identity to a finite LRL or LRL-direction
transformation) are integrated with fixed-step classical RK4 so that runs are
bit-reproducible and convergence-order checks are meaningful.

The symmetry-flow vector field at (t, r, v) for parameter direction eps is

    dr/ds = P_eps + tau v,      dv/ds = DtP_eps + tau a,
    dt/ds = -(r x L) . eps,     tau   = -(r . P_eps) / (r . v)

where P_eps is the contracted characteristic of the family.  The tau
completion keeps |r| exactly invariant along the flow; it is singular at
apsides (r.v = 0), which are therefore rejected as starting points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fields
from .core import (
    CIRCULAR_TOL,
    ExtendedState,
    KeplerSystem,
    PhaseState,
    Vec3,
    as_vec3,
    conserved_set,
    norm,
)
from .errors import (
    CollisionError,
    FlowDegeneracyError,
    StepUnderflowError,
    UsageError,
)
from .generators import GeneratorId, GeneratorKind
from .transforms import TransformResult, direction_lrl_transform, lrl_transform

COLLISION_FLOOR = 1e-8
FLOW_APSIS_FLOOR = 1e-9

CSV_COLUMNS = ("t", "rx", "ry", "rz", "vx", "vy", "vz", "E", "Lx", "Ly", "Lz", "Ax", "Ay", "Az")

# Dormand-Prince 5(4) tableau.
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_ERR = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)


@dataclass(frozen=True)
class Trajectory:
    """Ordered orbit samples plus conserved-quantity drift along them."""

    samples: tuple[ExtendedState, ...]
    drift: dict

    def csv_rows(self, sys: KeplerSystem):
        for s in self.samples:
            c = conserved_set(s.state, sys)
            yield [s.t, *s.r, *s.v, c.E, *c.L, *c.A]

    def write_csv(self, fh, sys: KeplerSystem) -> None:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in self.csv_rows(sys):
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


@dataclass(frozen=True)
class SymmetryFlowResult:
    out: ExtendedState
    r_mag_drift: float


@dataclass(frozen=True)
class FlowReport:
    """Closed-form transform versus its independently integrated flow."""

    closed_form: ExtendedState
    integrated: ExtendedState
    max_component_residual: float
    r_mag_drift: float


@dataclass(frozen=True)
class SolutionMappingReport:
    """Conserved-set deviations of the orbit re-integrated from a transformed state."""

    residuals: dict
    max_residual: float


def _orbit_rhs(y: np.ndarray, kappa: float) -> np.ndarray:
    r = y[:3]
    r_mag = math.sqrt(r @ r)
    if r_mag < COLLISION_FLOOR:
        raise CollisionError(f"|r| = {r_mag:.3e} fell below the collision floor")
    out = np.empty(6)
    out[:3] = y[3:]
    out[3:] = -kappa / r_mag**3 * r
    return out


def _initial_step(y0: np.ndarray, f0: np.ndarray, tol: float, span: float) -> float:
    scale = tol + tol * np.abs(y0)
    d0 = math.sqrt(float(np.mean((y0 / scale) ** 2)))
    d1 = math.sqrt(float(np.mean((f0 / scale) ** 2)))
    h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6
    return min(h, abs(span)) if span != 0 else h


def integrate_orbit(
    state: ExtendedState,
    sys: KeplerSystem,
    t_span: float,
    tol: float = 1e-10,
    max_step: float | None = None,
    dt_out: float | None = None,
) -> Trajectory:
    """Propagate the orbit over t_span (may be negative).

    Samples land on the dt_out grid when given, otherwise at every accepted
    step.  Raises CollisionError if the radius reaches the collision floor and
    StepUnderflowError if adaptive control stalls.
    """
    if t_span == 0.0:
        return _finish_trajectory([state], sys)
    if tol <= 0:
        raise UsageError("tol must be positive")
    direction = 1.0 if t_span > 0 else -1.0
    kappa = sys.kappa
    t0 = state.t
    t_end = t0 + t_span

    if dt_out is not None:
        if dt_out <= 0:
            raise UsageError("dt_out must be positive")
        n_grid = max(1, math.ceil(abs(t_span) / dt_out - 1e-12))
        targets = [t0 + direction * dt_out * k for k in range(1, n_grid)] + [t_end]
    else:
        targets = [t_end]

    y = np.concatenate([state.r, state.v])
    f = _orbit_rhs(y, kappa)
    h = direction * _initial_step(y, f, tol, t_span)
    if max_step is not None:
        h = direction * min(abs(h), max_step)
    h_min = 1e-14 * max(1.0, abs(t_span))
    err_prev = 1.0
    t = t0
    samples = [state]

    for target in targets:
        while direction * (target - t) > 1e-14 * max(1.0, abs(target)):
            h = direction * min(abs(h), abs(target - t))
            if max_step is not None:
                h = direction * min(abs(h), max_step)
            if abs(h) < h_min:
                r_now = math.sqrt(float(y[:3] @ y[:3]))
                if r_now < 1e3 * COLLISION_FLOOR:
                    raise CollisionError(
                        f"|r| = {r_now:.3e} is collapsing onto the singularity at t = {t:.6g}"
                    )
                raise StepUnderflowError(f"step size {h:.3e} underflowed at t = {t:.6g}")

            k = np.empty((7, 6))
            k[0] = f
            for i in range(1, 7):
                k[i] = _orbit_rhs(y + h * (_DP_A[i] @ k[:i]), kappa)
            y_new = y + h * (_DP_B5 @ k)
            err_vec = h * (_DP_ERR @ k)
            scale = tol + tol * np.maximum(np.abs(y), np.abs(y_new))
            err = math.sqrt(float(np.mean((err_vec / scale) ** 2)))

            if err <= 1.0:
                t += h
                y = y_new
                f = k[6]  # FSAL
                factor = 0.9 * max(err, 1e-16) ** -0.14 * max(err_prev, 1e-16) ** 0.08
                err_prev = max(err, 1e-16)
                h *= min(5.0, max(0.2, factor))
                if dt_out is None:
                    samples.append(ExtendedState(t, PhaseState(y[:3], y[3:])))
            else:
                h *= max(0.1, 0.9 * err**-0.2)
        t = target
        if dt_out is not None:
            samples.append(ExtendedState(t, PhaseState(y[:3], y[3:])))
    if dt_out is None and samples[-1].t != t:
        samples.append(ExtendedState(t, PhaseState(y[:3], y[3:])))
    return _finish_trajectory(samples, sys)


def _finish_trajectory(samples: list[ExtendedState], sys: KeplerSystem) -> Trajectory:
    r = np.array([s.r for s in samples])
    v = np.array([s.v for s in samples])
    vals = fields.values(r, v, sys.kappa)
    drift = {
        "dE": float(np.max(np.abs(vals["E"] - vals["E"][0]))),
        "dL": float(np.max(np.linalg.norm(vals["L"] - vals["L"][0], axis=1))),
        "dA": float(np.max(np.linalg.norm(vals["A"] - vals["A"][0], axis=1))),
    }
    return Trajectory(tuple(samples), drift)


def _normalize_kind(gen) -> GeneratorKind:
    kind = gen.kind if isinstance(gen, GeneratorId) else gen
    if kind not in (GeneratorKind.LRL, GeneratorKind.LRL_DIRECTION):
        raise UsageError("symmetry flows exist for the LRL and LRL-direction families")
    return kind


def symmetry_flow_rhs(
    kind: GeneratorKind, r: np.ndarray, v: np.ndarray, eps: np.ndarray, kappa: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batched (dt/ds, dr/ds, dv/ds) of the gauge-fixed symmetry flow."""
    r_mag = np.linalg.norm(r, axis=1)
    v_mag = np.linalg.norm(v, axis=1)
    r_dot_v = np.einsum("ni,ni->n", r, v)
    if np.any(np.abs(r_dot_v) <= FLOW_APSIS_FLOOR * (r_mag * v_mag + 1e-300)):
        raise FlowDegeneracyError(
            "flow reached an apsis (r.v = 0); the radius-preserving field is singular there"
        )
    v_sq = np.einsum("ni,ni->n", v, v)
    r_eps = np.einsum("ni,ni->n", r, eps)
    v_eps = np.einsum("ni,ni->n", v, eps)

    p = 2.0 * r_eps[:, None] * v - v_eps[:, None] * r - r_dot_v[:, None] * eps
    dtp = (
        v_eps[:, None] * v
        - (kappa / r_mag**3 * r_eps)[:, None] * r
        - (v_sq - kappa / r_mag)[:, None] * eps
    )
    if kind is GeneratorKind.LRL_DIRECTION:
        a_vec = (v_sq - kappa / r_mag)[:, None] * r - r_dot_v[:, None] * v
        a_mag = np.linalg.norm(a_vec, axis=1)
        if np.any(a_mag <= CIRCULAR_TOL * kappa):
            raise FlowDegeneracyError("flow reached a circular state; direction undefined")
        e = 0.5 * v_sq - kappa / r_mag
        a_eps = np.einsum("ni,ni->n", a_vec, eps)
        l_vec = np.cross(r, v)
        l_sq = np.einsum("ni,ni->n", l_vec, l_vec)
        accel_dir = -(kappa / r_mag**3)[:, None] * r
        coef = (a_eps / a_mag**3)[:, None]
        p = p / a_mag[:, None] + coef * (
            2.0 * e[:, None] * np.cross(r, l_vec) - l_sq[:, None] * v
        )
        dtp = dtp / a_mag[:, None] + coef * (
            2.0 * e[:, None] * np.cross(v, l_vec) - l_sq[:, None] * accel_dir
        )

    tau = -np.einsum("ni,ni->n", r, p) / r_dot_v
    accel = -(kappa / r_mag**3)[:, None] * r
    dr = p + tau[:, None] * v
    dv = dtp + tau[:, None] * accel
    dt = -np.einsum("ni,ni->n", np.cross(r, np.cross(r, v)), eps)
    return dt, dr, dv


def integrate_symmetry_flows(
    kind: GeneratorKind,
    t: np.ndarray,
    r: np.ndarray,
    v: np.ndarray,
    eps: np.ndarray,
    kappa: float,
    steps: int = 10_000,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Fixed-step RK4 integration of a batch of flows over s in [0, 1].

    Returns (t, r, v, r_mag_drift), each batched over the leading axis.
    """
    if steps < 1:
        raise UsageError("steps must be >= 1")
    t = np.array(t, dtype=float)
    r = np.array(np.atleast_2d(r), dtype=float)
    v = np.array(np.atleast_2d(v), dtype=float)
    eps = np.array(np.atleast_2d(eps), dtype=float)
    r_mag0 = np.linalg.norm(r, axis=1)
    drift = np.zeros_like(t)
    h = 1.0 / steps

    def rhs(state):
        tt, rr, vv = state
        return symmetry_flow_rhs(kind, rr, vv, eps, kappa)

    for _ in range(steps):
        y = (t, r, v)
        k1 = rhs(y)
        k2 = rhs(tuple(a + 0.5 * h * b for a, b in zip(y, k1)))
        k3 = rhs(tuple(a + 0.5 * h * b for a, b in zip(y, k2)))
        k4 = rhs(tuple(a + h * b for a, b in zip(y, k3)))
        t = t + h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        r = r + h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        v = v + h / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(v))):
            raise FlowDegeneracyError("symmetry flow produced a non-finite state")
        drift = np.maximum(drift, np.abs(np.linalg.norm(r, axis=1) - r_mag0))
    return t, r, v, drift


def integrate_symmetry_flow(
    gen,
    state: ExtendedState,
    sys: KeplerSystem,
    eps: Vec3,
    steps: int = 10_000,
) -> SymmetryFlowResult:
    """Integrate one symmetry flow; eps = 0 returns the state unchanged."""
    kind = _normalize_kind(gen)
    eps = as_vec3(eps, "eps")
    if norm(eps) == 0.0:
        return SymmetryFlowResult(state, 0.0)
    t, r, v, drift = integrate_symmetry_flows(
        kind,
        np.array([state.t]),
        state.r[None, :],
        state.v[None, :],
        eps[None, :],
        sys.kappa,
        steps,
    )
    out = ExtendedState(float(t[0]), PhaseState(r[0], v[0]))
    return SymmetryFlowResult(out, float(drift[0]))


def _closed_form(gen, state: ExtendedState, sys: KeplerSystem, eps, quad_panels: int) -> TransformResult:
    kind = _normalize_kind(gen)
    if kind is GeneratorKind.LRL_DIRECTION:
        return direction_lrl_transform(state, sys, eps, quad_panels)
    return lrl_transform(state, sys, eps, quad_panels)


def compare_flow_vs_closed_form(
    gen,
    state: ExtendedState,
    sys: KeplerSystem,
    eps: Vec3,
    steps: int = 10_000,
    quad_panels: int = 64,
) -> FlowReport:
    """Residual between the closed-form transform and its integrated flow."""
    eps = as_vec3(eps, "eps")
    if norm(eps) == 0.0:
        return FlowReport(state, state, 0.0, 0.0)
    closed = _closed_form(gen, state, sys, eps, quad_panels).out
    flown = integrate_symmetry_flow(gen, state, sys, eps, steps)
    residual = max(
        abs(closed.t - flown.out.t),
        float(np.max(np.abs(closed.r - flown.out.r))),
        float(np.max(np.abs(closed.v - flown.out.v))),
    )
    return FlowReport(closed, flown.out, residual, flown.r_mag_drift)


def verify_solution_mapping(
    state: ExtendedState,
    sys: KeplerSystem,
    eps: Vec3,
    gen,
    t_span: float,
    tol: float = 1e-10,
) -> SolutionMappingReport:
    """Re-integrate the orbit from a transformed state and hold it to its
    predicted conserved set."""
    eps = as_vec3(eps, "eps")
    if norm(eps) == 0.0:
        c = conserved_set(state.state, sys)
        traj = integrate_orbit(state, sys, t_span, tol=tol)
        predicted = c
    else:
        result = _closed_form(gen, state, sys, eps, quad_panels=64)
        predicted = result.constants_out
        traj = integrate_orbit(result.out, sys, t_span, tol=tol)
    r = np.array([s.r for s in traj.samples])
    v = np.array([s.v for s in traj.samples])
    vals = fields.values(r, v, sys.kappa)
    residuals = {
        "dE": float(np.max(np.abs(vals["E"] - predicted.E))),
        "dL": float(np.max(np.linalg.norm(vals["L"] - predicted.L, axis=1))),
        "dA": float(np.max(np.linalg.norm(vals["A"] - predicted.A, axis=1))),
    }
    return SolutionMappingReport(residuals, max(residuals.values()))
