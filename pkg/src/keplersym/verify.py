"""Seeded property suites: the algebra, transform-group, and flow checks.

These back both `keplersym verify` and the acceptance tests.  Every suite is
deterministic given (samples, seed) and returns PropertyResult records with
the worst observed residual against its tolerance.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import fields
from .core import ExtendedState, KeplerSystem, PhaseState, conserved_set
from .flow import (
    compare_flow_vs_closed_form,
    integrate_orbit,
    integrate_symmetry_flows,
    verify_solution_mapping,
)
from .generators import (
    GeneratorClass,
    GeneratorId,
    GeneratorKind,
    classify_generator,
    velocity_jacobian,
)
from .sampling import (
    canonical_states,
    sample_flow_pairs,
    sample_parabolic_states,
    sample_states,
)
from .transforms import (
    direction_lrl_transform,
    lrl_transform,
    rotate,
    rotation_matrix,
    time_translate,
)
from .brackets import structure_residuals

DEFAULT_TOLERANCES = {
    "bracket_analytic": 1e-10,
    "bracket_fd": 1e-5,
    "noether": 1e-5,
    "antisymmetry": 1e-12,
    "jacobi": 1e-8,
    "linearity": 1e-5,
    "classification": 0.5,
    "action": 1e-5,
    "transform_exact": 1e-10,
    "constants_match": 1e-9,
    "group_law": 1e-9,
    "flow_residual": 1e-6,
    "r_drift": 1e-8,
    "dt_ds": 1e-6,
    "orbit_closure": 1e-8,
    "energy_drift": 1e-9,
    "monotone_escape": 1e-12,
    "solution_mapping": 1e-8,
}

SUITES = ("algebra", "transforms", "flows")


@dataclass(frozen=True)
class PropertyResult:
    name: str
    worst: float
    tol: float
    passed: bool
    count: int
    seconds: float
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  [{self.note}]" if self.note else ""
        return (
            f"{status}  {self.name:<34} worst={self.worst:.3e}  tol={self.tol:.1e}"
            f"  n={self.count}  {self.seconds:.2f}s{extra}"
        )


def _result(name, worst, tol, count, t0, note="", passed=None) -> PropertyResult:
    if passed is None:
        passed = bool(worst <= tol)
    return PropertyResult(name, float(worst), float(tol), passed, count, time.perf_counter() - t0, note)


def _batched_dtp(label: str, r: np.ndarray, v: np.ndarray, kappa: float) -> np.ndarray:
    """On-shell derivative of the characteristic, vectorized over states."""
    fam, j = fields._family(label)
    n = r.shape[0]
    r_mag = np.linalg.norm(r, axis=1)
    if fam == "E":
        return -(kappa / r_mag**3)[:, None] * r
    e_j = np.broadcast_to(np.eye(3)[j - 1], (n, 3))
    if fam == "L":
        return np.cross(e_j, v)
    v_sq = np.einsum("ni,ni->n", v, v)
    dtp_a = (
        v[:, j - 1][:, None] * v
        - (kappa / r_mag**3 * r[:, j - 1])[:, None] * r
        - (v_sq - kappa / r_mag)[:, None] * e_j
    )
    if fam == "A":
        return dtp_a
    vals = fields.values(r, v, kappa)
    a_vec, a_mag, e = vals["A"], vals["A_mag"], vals["E"]
    l_vec = vals["L"]
    l_sq = np.einsum("ni,ni->n", l_vec, l_vec)
    accel = -(kappa / r_mag**3)[:, None] * r
    coef = (a_vec[:, j - 1] / a_mag**3)[:, None]
    return dtp_a / a_mag[:, None] + coef * (
        2.0 * e[:, None] * np.cross(v, l_vec) - l_sq[:, None] * accel
    )


def _jacobi_worst(r: np.ndarray, v: np.ndarray, kappa: float) -> float:
    """Jacobi identity over triples from {E, L_i, M_i}, analytic gradients.

    The algebra closes: every inner bracket is a structure-constant multiple
    of a single basis element (with the -sgn(E) coefficient locally constant
    away from E = 0), so {f, {g, h}} expands to that multiple of a computed
    analytic bracket.
    """
    labels = ["E", "L1", "L2", "L3", "M1", "M2", "M3"]
    grads = fields.gradients(r, v, kappa)
    sgn_e = np.sign(fields.values(r, v, kappa)["E"])
    n = r.shape[0]

    def closure(g: str, h: str) -> tuple[np.ndarray, str | None]:
        fam_g, i = fields._family(g)
        fam_h, j = fields._family(h)
        if fam_g == "E" or fam_h == "E":
            return np.zeros(n), None
        k = 6 - i - j
        if k not in (1, 2, 3) or i == j:
            return np.zeros(n), None
        sign = fields.levi(i, j, k)
        if (fam_g, fam_h) == ("L", "L"):
            return sign * np.ones(n), f"L{k}"
        if (fam_g, fam_h) in (("L", "M"), ("M", "L")):
            return sign * np.ones(n), f"M{k}"
        return -sign * sgn_e, f"L{k}"

    def outer(f: str, g: str, h: str) -> np.ndarray:
        coef, label = closure(g, h)
        if label is None:
            return np.zeros(n)
        return coef * fields.bracket(grads, f, label)

    worst = 0.0
    for a in range(len(labels)):
        for b in range(a + 1, len(labels)):
            for c in range(b + 1, len(labels)):
                f, g, h = labels[a], labels[b], labels[c]
                res = outer(f, g, h) + outer(g, h, f) + outer(h, f, g)
                worst = max(worst, float(np.max(np.abs(res))))
    return worst


def algebra_suite(
    samples: int, seed: int, kappa: float = 1.0, tolerances: dict | None = None
) -> list[PropertyResult]:
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    sys = KeplerSystem(kappa=kappa)
    out: list[PropertyResult] = []

    n_par = max(samples // 10, 1)
    n_rand = max(samples - n_par, 1)
    r, v = sample_states(n_rand, seed, kappa)
    rp, vp = sample_parabolic_states(n_par, seed + 1, kappa)

    t0 = time.perf_counter()
    worst = max(
        float(np.max(structure_residuals(r, v, kappa, use_fd=False, include_m=True))),
        float(np.max(structure_residuals(rp, vp, kappa, use_fd=False, include_m=False))),
    )
    out.append(_result("algebra.structure_analytic", worst, tol["bracket_analytic"], samples, t0))

    t0 = time.perf_counter()
    from .brackets import FD_M_FLOOR

    big_e = np.abs(fields.values(r, v, kappa)["E"]) >= FD_M_FLOOR
    worst = float(np.max(structure_residuals(rp, vp, kappa, use_fd=True, include_m=False)))
    if np.any(big_e):
        worst = max(
            worst,
            float(np.max(structure_residuals(r[big_e], v[big_e], kappa, use_fd=True, include_m=True))),
        )
    if np.any(~big_e):
        worst = max(
            worst,
            float(
                np.max(structure_residuals(r[~big_e], v[~big_e], kappa, use_fd=True, include_m=False))
            ),
        )
    out.append(_result("algebra.structure_fd", worst, tol["bracket_fd"], samples, t0))

    t0 = time.perf_counter()
    r_all = np.concatenate([r, rp])
    v_all = np.concatenate([v, vp])
    analytic = fields.gradients(r_all, v_all, kappa, include_m=False)
    numeric = fields.fd_gradients(r_all, v_all, kappa, include_m=False)
    worst = max(
        float(np.max(np.abs(analytic[lab][1] - numeric[lab][1])))
        for lab in fields.SCALAR_LABELS
    )
    out.append(_result("algebra.noether_characteristics", worst, tol["noether"], samples, t0))

    t0 = time.perf_counter()
    grads = fields.gradients(r, v, kappa)
    labels = list(fields.SCALAR_LABELS) + list(fields.M_LABELS)
    worst = 0.0
    for a in range(len(labels)):
        for b in range(a + 1, len(labels)):
            s = fields.bracket(grads, labels[a], labels[b]) + fields.bracket(
                grads, labels[b], labels[a]
            )
            worst = max(worst, float(np.max(np.abs(s))))
    out.append(_result("algebra.antisymmetry", worst, tol["antisymmetry"], n_rand, t0))

    t0 = time.perf_counter()
    n_jac = min(40, n_rand)
    mask = np.abs(fields.values(r, v, kappa)["E"]) > 0.05
    rj, vj = r[mask][:n_jac], v[mask][:n_jac]
    worst = _jacobi_worst(rj, vj, kappa)
    out.append(_result("algebra.jacobi_identity", worst, tol["jacobi"], len(rj), t0))

    t0 = time.perf_counter()
    n_lin = min(50, n_rand)
    worst = 0.0
    for ri, vi in zip(r[:n_lin], v[:n_lin]):
        state = PhaseState(ri, vi)
        jac = velocity_jacobian(GeneratorId.energy(), state, sys)
        worst = max(worst, float(np.max(np.abs(jac - np.eye(3)))))
        for axis in (1, 2, 3):
            jac = velocity_jacobian(GeneratorId.angular_momentum(axis), state, sys)
            worst = max(worst, float(np.max(np.abs(jac))))
    out.append(_result("algebra.point_linearity", worst, tol["linearity"], n_lin, t0))

    t0 = time.perf_counter()
    n_cls = min(25, n_rand)
    wrong = 0
    for ri, vi in zip(r[:n_cls], v[:n_cls]):
        state = PhaseState(ri, vi)
        expect = {
            GeneratorId.energy(): GeneratorClass.POINT,
            GeneratorId.angular_momentum(2): GeneratorClass.POINT,
            GeneratorId.lrl(1): GeneratorClass.DYNAMICAL,
            GeneratorId.lrl_direction(3): GeneratorClass.DYNAMICAL,
        }
        for gen, cls in expect.items():
            if classify_generator(gen, state, sys) is not cls:
                wrong += 1
    out.append(_result("algebra.point_vs_dynamical", float(wrong), tol["classification"], n_cls, t0))

    t0 = time.perf_counter()
    n_act = min(500, n_rand)
    ra, va = r[:n_act], v[:n_act]
    vals = fields.values(ra, va, kappa)
    grads_a = fields.gradients(ra, va, kappa, include_m=False)
    h = 1e-6
    worst = 0.0
    gen_labels = list(fields.SCALAR_LABELS)
    for gen_label in gen_labels:
        p = grads_a[gen_label][1]
        dtp = _batched_dtp(gen_label, ra, va, kappa)
        sv_p = fields.scalar_values(ra + h * p, va + h * dtp, kappa, include_m=False)
        sv_m = fields.scalar_values(ra - h * p, va - h * dtp, kappa, include_m=False)
        for target in fields.SCALAR_LABELS:
            fd = (sv_p[target] - sv_m[target]) / (2.0 * h)
            expected = fields.expected_bracket(target, gen_label, vals)
            worst = max(worst, float(np.max(np.abs(fd - expected))))
    out.append(_result("algebra.symmetry_action_fd", worst, tol["action"], n_act, t0))
    return out


def _pairs_arrays(pairs) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    r = np.array([p[0].r for p in pairs])
    v = np.array([p[0].v for p in pairs])
    eps = np.array([p[1] for p in pairs])
    return r, v, eps


def _flow_vs_closed(pairs, kind, sys, rk_steps, quad_panels) -> tuple[float, float]:
    """(max residual closed-vs-flow, max |r| drift) over a batch of pairs."""
    r, v, eps = _pairs_arrays(pairs)
    t_end, r_end, v_end, drift = integrate_symmetry_flows(
        kind, np.zeros(len(pairs)), r, v, eps, sys.kappa, rk_steps
    )
    worst = 0.0
    transform = direction_lrl_transform if kind is GeneratorKind.LRL_DIRECTION else lrl_transform
    for i, (state, eps_i) in enumerate(pairs):
        res = transform(ExtendedState(0.0, state), sys, eps_i, quad_panels)
        worst = max(
            worst,
            abs(res.out.t - t_end[i]),
            float(np.max(np.abs(res.out.r - r_end[i]))),
            float(np.max(np.abs(res.out.v - v_end[i]))),
        )
    return worst, float(np.max(drift))


def transforms_suite(
    samples: int,
    seed: int,
    kappa: float = 1.0,
    rk_steps: int = 10_000,
    quad_panels: int = 64,
    tolerances: dict | None = None,
) -> list[PropertyResult]:
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    sys = KeplerSystem(kappa=kappa)
    out: list[PropertyResult] = []

    pairs_dir = sample_flow_pairs(samples, seed, GeneratorKind.LRL_DIRECTION, kappa=kappa)

    t0 = time.perf_counter()
    worst_exact = 0.0
    worst_match = 0.0
    for state, eps in pairs_dir:
        c0 = conserved_set(state, sys)
        res = direction_lrl_transform(ExtendedState(0.0, state), sys, eps, quad_panels)
        c_out = conserved_set(res.out.state, sys)
        l_expect = c0.L + np.cross(eps, c0.Theta)
        a_expect = math.sqrt(kappa**2 + 2.0 * c0.E * float(l_expect @ l_expect))
        cross_term = float(np.dot(eps, np.cross(c0.Theta, c0.L)))
        display = math.sqrt(
            c0.A_mag**2
            + 2.0 * c0.E * (2.0 * cross_term + float(eps @ eps) - float(np.dot(eps, c0.Theta)) ** 2)
        )
        worst_exact = max(
            worst_exact,
            abs(c_out.E - c0.E),
            float(np.max(np.abs(c_out.Theta - c0.Theta))),
            abs(res.out.state.r_mag - state.r_mag),
            float(np.max(np.abs(res.constants_out.L - l_expect))),
            abs(res.constants_out.A_mag - a_expect),
            abs(res.constants_out.A_mag - display),
        )
        worst_match = max(worst_match, res.diagnostics["reconstruction_residual"])
    out.append(_result("transforms.direction_exact", worst_exact, tol["transform_exact"], len(pairs_dir), t0))
    out.append(
        _result(
            "transforms.direction_constants_match",
            worst_match,
            tol["constants_match"],
            len(pairs_dir),
            time.perf_counter(),  # measured within direction_exact's pass
        )
    )

    t0 = time.perf_counter()
    worst, _ = _flow_vs_closed(pairs_dir, GeneratorKind.LRL_DIRECTION, sys, rk_steps, quad_panels)
    out.append(_result("transforms.direction_vs_flow", worst, tol["flow_residual"], len(pairs_dir), t0))

    t0 = time.perf_counter()
    n2 = max(samples // 4, 10)
    worst = 0.0
    rng = np.random.default_rng(seed + 5)
    count = 0
    for state, eps in pairs_dir:
        if count >= n2:
            break
        eps1, eps2 = 0.5 * eps, 0.5 * eps
        x = ExtendedState(0.0, state)
        once = direction_lrl_transform(x, sys, eps, quad_panels).out
        half = direction_lrl_transform(x, sys, eps1, quad_panels).out
        twice = direction_lrl_transform(half, sys, eps2, quad_panels).out
        worst = max(
            worst,
            abs(once.t - twice.t),
            float(np.max(np.abs(once.r - twice.r))),
            float(np.max(np.abs(once.v - twice.v))),
        )
        count += 1
    out.append(_result("transforms.direction_abelian", worst, tol["group_law"], count, t0))

    t0 = time.perf_counter()
    worst = 0.0
    count = 0
    for state, eps in pairs_dir:
        if count >= n2:
            break
        g = rng.normal(size=3)
        g *= rng.uniform(0.2, 1.4) / np.linalg.norm(g)
        x = ExtendedState(0.0, state)
        lhs = rotate(direction_lrl_transform(x, sys, eps, quad_panels).out, g)
        rhs = direction_lrl_transform(rotate(x, g), sys, rotation_matrix(g) @ eps, quad_panels).out
        worst = max(
            worst,
            abs(lhs.t - rhs.t),
            float(np.max(np.abs(lhs.r - rhs.r))),
            float(np.max(np.abs(lhs.v - rhs.v))),
        )
        count += 1
    out.append(_result("transforms.direction_equivariance", worst, tol["group_law"], count, t0))

    branch_pairs = {
        "neg": sample_flow_pairs(samples, seed + 11, GeneratorKind.LRL, branch="neg", kappa=kappa),
        "pos": sample_flow_pairs(samples, seed + 12, GeneratorKind.LRL, branch="pos", kappa=kappa),
        "zero": sample_flow_pairs(samples, seed + 13, GeneratorKind.LRL, branch="zero", kappa=kappa),
    }

    for branch, pairs in branch_pairs.items():
        t0 = time.perf_counter()
        worst = 0.0
        worst_match = 0.0
        for state, eps in pairs:
            c0 = conserved_set(state, sys)
            res = lrl_transform(ExtendedState(0.0, state), sys, eps, quad_panels)
            c1 = res.constants_out
            worst_match = max(worst_match, res.diagnostics["reconstruction_residual"])
            if branch == "zero":
                worst = max(
                    worst,
                    float(np.max(np.abs(c1.A - c0.A))),
                    float(np.max(np.abs(c1.L - (c0.L + np.cross(eps, c0.A))))),
                )
            elif branch == "neg":
                inv0 = float(c0.L @ c0.L) + float(c0.M @ c0.M)
                inv1 = float(c1.L @ c1.L) + float(c1.M @ c1.M)
                phi = math.sqrt(2.0 * abs(c0.E)) * float(np.linalg.norm(eps))
                rot_p = rotation_matrix(phi * eps / np.linalg.norm(eps))
                rot_m = rotation_matrix(-phi * eps / np.linalg.norm(eps))
                worst = max(
                    worst,
                    abs(inv1 - inv0),
                    abs(float(c1.L @ c1.M)),
                    float(np.max(np.abs((c1.L + c1.M) - rot_p @ (c0.L + c0.M)))),
                    float(np.max(np.abs((c1.L - c1.M) - rot_m @ (c0.L - c0.M)))),
                )
            else:
                inv0 = float(c0.L @ c0.L) - float(c0.M @ c0.M)
                inv1 = float(c1.L @ c1.L) - float(c1.M @ c1.M)
                worst = max(worst, abs(inv1 - inv0))
        out.append(
            _result(f"transforms.lrl_{branch}_invariants", worst, tol["transform_exact"], len(pairs), t0)
        )
        out.append(
            _result(
                f"transforms.lrl_{branch}_constants_match",
                worst_match,
                tol["constants_match"],
                len(pairs),
                time.perf_counter(),  # measured within the invariants pass
            )
        )

        t0 = time.perf_counter()
        worst, _ = _flow_vs_closed(pairs, GeneratorKind.LRL, sys, rk_steps, quad_panels)
        out.append(_result(f"transforms.lrl_{branch}_vs_flow", worst, tol["flow_residual"], len(pairs), t0))

    t0 = time.perf_counter()
    worst = 0.0
    count = 0
    for state, eps in branch_pairs["neg"] + branch_pairs["pos"]:
        if count >= n2:
            break
        x = ExtendedState(0.0, state)
        once = lrl_transform(x, sys, eps, quad_panels).out
        part = lrl_transform(x, sys, 0.4 * eps, quad_panels).out
        full = lrl_transform(part, sys, 0.6 * eps, quad_panels).out
        worst = max(
            worst,
            abs(once.t - full.t),
            float(np.max(np.abs(once.r - full.r))),
            float(np.max(np.abs(once.v - full.v))),
        )
        count += 1
    out.append(_result("transforms.lrl_composition", worst, tol["group_law"], count, t0))
    return out


def flows_suite(
    samples: int,
    seed: int,
    kappa: float = 1.0,
    rk_steps: int = 10_000,
    quad_panels: int = 64,
    tolerances: dict | None = None,
) -> list[PropertyResult]:
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    sys = KeplerSystem(kappa=kappa)
    out: list[PropertyResult] = []
    refs = canonical_states()

    t0 = time.perf_counter()
    circ = ExtendedState(0.0, refs["circ"])
    traj = integrate_orbit(circ, sys, 2.0 * math.pi, tol=1e-10)
    end = traj.samples[-1]
    worst = max(
        float(np.max(np.abs(end.r - circ.r))), float(np.max(np.abs(end.v - circ.v)))
    )
    out.append(_result("flows.circular_closure", worst, tol["orbit_closure"], 1, t0))

    t0 = time.perf_counter()
    ell = ExtendedState(0.0, refs["ell"])
    period = conserved_set(refs["ell"], sys).period
    traj = integrate_orbit(ell, sys, period, tol=1e-10)
    out.append(_result("flows.energy_drift_per_period", traj.drift["dE"], tol["energy_drift"], 1, t0))

    t0 = time.perf_counter()
    hyp = ExtendedState(0.0, refs["hyp"])
    traj = integrate_orbit(hyp, sys, 10.0, tol=1e-10, dt_out=0.05)
    radii = np.array([s.state.r_mag for s in traj.samples])
    worst = max(0.0, float(np.max(radii[:-1] - radii[1:])))
    out.append(_result("flows.hyperbolic_escape", worst, tol["monotone_escape"], len(radii), t0))

    # RK4 radius drift falls like h^4, so 2000 steps bounds the 10^4-step runs
    # used everywhere else with margin to spare.
    n3 = min(max(samples // 8, 6), 25)
    t0 = time.perf_counter()
    worst = 0.0
    for kind, offset in ((GeneratorKind.LRL_DIRECTION, 21), (GeneratorKind.LRL, 22)):
        pairs = sample_flow_pairs(n3, seed + offset, kind, kappa=kappa)
        r0, v0, eps = _pairs_arrays(pairs)
        _, _, _, drift = integrate_symmetry_flows(
            kind, np.zeros(len(pairs)), r0, v0, eps, sys.kappa, steps=min(rk_steps, 2000)
        )
        worst = max(worst, float(np.max(drift)))
    out.append(_result("flows.gauge_r_drift", worst, tol["r_drift"], 2 * n3, t0))

    t0 = time.perf_counter()
    worst = 0.0
    h = 1e-4
    for kind, offset in ((GeneratorKind.LRL_DIRECTION, 31), (GeneratorKind.LRL, 32)):
        pairs = sample_flow_pairs(6, seed + offset, kind, kappa=kappa)
        r0, v0, eps = _pairs_arrays(pairs)
        n = len(pairs)
        for s_node in (0.3, 0.65):
            # state at the interior node of each flow, then short flows +-h;
            # 1000 steps put the node state far below the probe's FD error
            t_n, r_n, v_n, _ = integrate_symmetry_flows(
                kind, np.zeros(n), r0, v0, s_node * eps, sys.kappa, steps=1000
            )
            t_p, _, _, _ = integrate_symmetry_flows(kind, t_n, r_n, v_n, h * eps, sys.kappa, 64)
            t_m, _, _, _ = integrate_symmetry_flows(kind, t_n, r_n, v_n, -h * eps, sys.kappa, 64)
            dt_ds = (t_p - t_m) / (2.0 * h)
            l_n = np.cross(r_n, v_n)
            expected = -np.einsum("ni,ni->n", np.cross(r_n, l_n), eps)
            worst = max(worst, float(np.max(np.abs(dt_ds - expected))))
    out.append(_result("flows.dt_ds_gauge_component", worst, tol["dt_ds"], 12, t0))

    t0 = time.perf_counter()
    n5 = max(samples // 10, 4)
    worst = 0.0
    count = 0
    cases = [
        (GeneratorKind.LRL_DIRECTION, "neg", seed + 41),
        (GeneratorKind.LRL_DIRECTION, "pos", seed + 42),
        (GeneratorKind.LRL, "neg", seed + 43),
        (GeneratorKind.LRL, "pos", seed + 44),
        (GeneratorKind.LRL, "zero", seed + 45),
    ]
    for kind, branch, s in cases:
        for state, eps in sample_flow_pairs(n5, s, kind, branch=branch, kappa=kappa):
            c = conserved_set(state, sys)
            span = c.period if (c.E < 0 and c.period is not None) else 10.0
            report = verify_solution_mapping(ExtendedState(0.0, state), sys, eps, kind, span)
            worst = max(worst, report.max_residual)
            count += 1
    out.append(_result("flows.solution_mapping", worst, tol["solution_mapping"], count, t0))

    t0 = time.perf_counter()
    factor, steps_used = _convergence_factor(sys, quad_panels)
    out.append(
        _result(
            "flows.rk4_order4_convergence",
            factor,
            20.0,
            2,
            t0,
            note=f"expect factor in [12, 20], steps {steps_used} vs {2 * steps_used}",
            passed=(12.0 <= factor <= 20.0),
        )
    )
    return out


def _convergence_factor(sys: KeplerSystem, quad_panels: int) -> tuple[float, int]:
    """Residual ratio when halving the RK4 step on the elliptic reference case."""
    ell = ExtendedState(0.0, canonical_states()["ell"])
    off = time_translate(ell, 0.7, sys)
    from .sampling import _ray_admissible

    eps = None
    for mag in (0.25, 0.2, 0.15, 0.1, 0.06):
        candidate = np.array([0.0, 0.0, mag])
        if _ray_admissible(off.state, candidate, GeneratorKind.LRL, sys, margin=1e-4):
            eps = candidate
            break
    if eps is None:
        raise RuntimeError("no admissible reference eps for the convergence check")
    steps = 64
    res_coarse = compare_flow_vs_closed_form(
        GeneratorKind.LRL, off, sys, eps, steps=steps, quad_panels=quad_panels
    ).max_component_residual
    res_fine = compare_flow_vs_closed_form(
        GeneratorKind.LRL, off, sys, eps, steps=2 * steps, quad_panels=quad_panels
    ).max_component_residual
    return res_coarse / res_fine, steps


def run_suites(
    suite: str,
    samples: int,
    seed: int,
    kappa: float = 1.0,
    rk_steps: int = 10_000,
    quad_panels: int = 64,
    tolerances: dict | None = None,
) -> list[PropertyResult]:
    if suite not in SUITES and suite != "all":
        raise ValueError(f"unknown suite {suite!r}")
    results: list[PropertyResult] = []
    if suite in ("algebra", "all"):
        results += algebra_suite(samples, seed, kappa, tolerances)
    if suite in ("transforms", "all"):
        results += transforms_suite(samples, seed, kappa, rk_steps, quad_panels, tolerances)
    if suite in ("flows", "all"):
        results += flows_suite(samples, seed, kappa, rk_steps, quad_panels, tolerances)
    return results
