"""Vectorized conserved-quantity values and analytic phase-space gradients.

Everything here operates on batches: r and v are (N, 3) arrays and scalar
results are (N,).  The ten scalar fields are labelled

    E, L1..L3, A1..A3, Theta1..Theta3          (plus M1..M3 when E != 0)

and each label maps to a (value, grad_r, grad_v) triple.  These gradients are
the analytic side of every bracket computation; the finite-difference twins
live in `fd_gradients` and exist purely as an independent cross-check.
"""

from __future__ import annotations

import numpy as np

from .core import FD_SCALE

SCALAR_LABELS = (
    "E",
    "L1",
    "L2",
    "L3",
    "A1",
    "A2",
    "A3",
    "Theta1",
    "Theta2",
    "Theta3",
)
M_LABELS = ("M1", "M2", "M3")

_EPS = np.zeros((3, 3, 3))
for _i, _j, _k, _s in [(0, 1, 2, 1), (1, 2, 0, 1), (2, 0, 1, 1), (0, 2, 1, -1), (2, 1, 0, -1), (1, 0, 2, -1)]:
    _EPS[_i, _j, _k] = _s


def levi(i: int, j: int, k: int) -> float:
    """Levi-Civita symbol with 1-based indices."""
    return float(_EPS[i - 1, j - 1, k - 1])


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("ni,ni->n", a, b)


def values(r: np.ndarray, v: np.ndarray, kappa: float) -> dict[str, np.ndarray]:
    """Batched conserved quantities; vector entries have shape (N, 3)."""
    r = np.atleast_2d(np.asarray(r, dtype=float))
    v = np.atleast_2d(np.asarray(v, dtype=float))
    r_mag = np.linalg.norm(r, axis=1)
    v_sq = _dot(v, v)
    r_dot_v = _dot(r, v)
    e = 0.5 * v_sq - kappa / r_mag
    l_vec = np.cross(r, v)
    a_vec = (v_sq - kappa / r_mag)[:, None] * r - r_dot_v[:, None] * v
    a_mag = np.linalg.norm(a_vec, axis=1)
    # Theta and M rows are simply unused by callers at circular or exactly
    # parabolic states; keep the division quiet there.
    with np.errstate(divide="ignore", invalid="ignore"):
        theta = a_vec / a_mag[:, None]
        m_vec = a_vec / np.sqrt(2.0 * np.abs(e))[:, None]
    out = {
        "r_mag": r_mag,
        "r_dot_v": r_dot_v,
        "E": e,
        "L": l_vec,
        "L_mag": np.linalg.norm(l_vec, axis=1),
        "A": a_vec,
        "A_mag": a_mag,
        "Theta": theta,
        "M": m_vec,
    }
    return out


def scalar_values(
    r: np.ndarray, v: np.ndarray, kappa: float, include_m: bool = True
) -> dict[str, np.ndarray]:
    vals = values(r, v, kappa)
    out = {"E": vals["E"]}
    for name, key in (("L", "L"), ("A", "A"), ("Theta", "Theta")):
        for i in range(3):
            out[f"{name}{i + 1}"] = vals[key][:, i]
    if include_m:
        for i in range(3):
            out[f"M{i + 1}"] = vals["M"][:, i]
    return out


def gradients(
    r: np.ndarray, v: np.ndarray, kappa: float, include_m: bool = True
) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Analytic (grad_r, grad_v) for every scalar field, each of shape (N, 3).

    Besides the per-label gradients, the returned table carries the chain-rule
    factorizations of the derived fields,

        grad M_j     = alpha grad A_j + beta_j grad E
        grad Theta_j = a grad A_j + b_j grad E + c_j grad |L|^2,

    under private keys.  `bracket` uses them to evaluate M and Theta rows in a
    numerically stable arrangement.
    """
    r = np.atleast_2d(np.asarray(r, dtype=float))
    v = np.atleast_2d(np.asarray(v, dtype=float))
    n = r.shape[0]
    r_mag = np.linalg.norm(r, axis=1)
    v_sq = _dot(v, v)
    r_dot_v = _dot(r, v)
    e = 0.5 * v_sq - kappa / r_mag
    a_vec = (v_sq - kappa / r_mag)[:, None] * r - r_dot_v[:, None] * v
    a_sq = _dot(a_vec, a_vec)
    a_mag = np.sqrt(a_sq)

    ge_r = (kappa / r_mag**3)[:, None] * r
    ge_v = v.copy()
    out: dict = {"E": (ge_r, ge_v)}

    basis = np.eye(3)
    grads_a = []
    for j in range(3):
        e_j = np.broadcast_to(basis[j], (n, 3))
        # L^j = (r x v)^j
        out[f"L{j + 1}"] = (np.cross(v, e_j), np.cross(e_j, r))
        # A^j = (|v|^2 - kappa/|r|) r^j - (r.v) v^j
        ga_r = (
            (kappa / r_mag**3 * r[:, j])[:, None] * r
            + (v_sq - kappa / r_mag)[:, None] * e_j
            - v[:, j][:, None] * v
        )
        ga_v = 2.0 * r[:, j][:, None] * v - v[:, j][:, None] * r - r_dot_v[:, None] * e_j
        grads_a.append((ga_r, ga_v))
        out[f"A{j + 1}"] = (ga_r, ga_v)

    # |A|^2 = kappa^2 + 2 E |L|^2 with |L|^2 = |r|^2 |v|^2 - (r.v)^2.
    l_sq = r_mag**2 * v_sq - r_dot_v**2
    glsq_r = 2.0 * v_sq[:, None] * r - 2.0 * r_dot_v[:, None] * v
    glsq_v = 2.0 * r_mag[:, None] ** 2 * v - 2.0 * r_dot_v[:, None] * r
    out["_LSQ"] = (glsq_r, glsq_v)
    gasq_r = 2.0 * l_sq[:, None] * ge_r + 2.0 * e[:, None] * glsq_r
    gasq_v = 2.0 * l_sq[:, None] * ge_v + 2.0 * e[:, None] * glsq_v

    theta_a = 1.0 / a_mag
    theta_b = -a_vec * (l_sq / a_mag**3)[:, None]
    theta_c = -a_vec * (e / a_mag**3)[:, None]
    out["_theta_coef"] = (theta_a, theta_b, theta_c)
    for j in range(3):
        ga_r, ga_v = grads_a[j]
        aj = a_vec[:, j]
        # Theta^j = A^j / |A|
        gt_r = ga_r / a_mag[:, None] - (aj / (2.0 * a_sq * a_mag))[:, None] * gasq_r
        gt_v = ga_v / a_mag[:, None] - (aj / (2.0 * a_sq * a_mag))[:, None] * gasq_v
        out[f"Theta{j + 1}"] = (gt_r, gt_v)

    if include_m:
        two_abs_e = 2.0 * np.abs(e)
        sgn = np.sign(e)
        alpha = 1.0 / np.sqrt(two_abs_e)
        beta = -a_vec * (sgn / two_abs_e**1.5)[:, None]
        out["_m_coef"] = (alpha, beta)
        for j in range(3):
            ga_r, ga_v = grads_a[j]
            out[f"M{j + 1}"] = (
                alpha[:, None] * ga_r + beta[:, j][:, None] * ge_r,
                alpha[:, None] * ga_v + beta[:, j][:, None] * ge_v,
            )
    return out


def fd_gradients(
    r: np.ndarray, v: np.ndarray, kappa: float, include_m: bool = True
) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Central-difference twin of `gradients`, h = 1e-6 max(1, |component|)."""
    r = np.atleast_2d(np.asarray(r, dtype=float))
    v = np.atleast_2d(np.asarray(v, dtype=float))
    labels = list(SCALAR_LABELS) + (list(M_LABELS) if include_m else [])
    n = r.shape[0]
    gr = {lab: np.zeros((n, 3)) for lab in labels}
    gv = {lab: np.zeros((n, 3)) for lab in labels}
    for which, base, grad in (("r", r, gr), ("v", v, gv)):
        for i in range(3):
            h = FD_SCALE * np.maximum(1.0, np.abs(base[:, i]))
            plus, minus = base.copy(), base.copy()
            plus[:, i] += h
            minus[:, i] -= h
            if which == "r":
                f_plus = scalar_values(plus, v, kappa, include_m)
                f_minus = scalar_values(minus, v, kappa, include_m)
            else:
                f_plus = scalar_values(r, plus, kappa, include_m)
                f_minus = scalar_values(r, minus, kappa, include_m)
            for lab in labels:
                grad[lab][:, i] = (f_plus[lab] - f_minus[lab]) / (2.0 * h)
    return {lab: (gr[lab], gv[lab]) for lab in labels}


def _raw_bracket(
    grads: dict[str, tuple[np.ndarray, np.ndarray]], left: str, right: str
) -> np.ndarray:
    fr, fv = grads[left]
    gr_, gv_ = grads[right]
    return _dot(fr, gv_) - _dot(gr_, fv)


def _expansion(grads: dict, label: str) -> list[tuple[np.ndarray | float, str]]:
    """Chain-rule expansion of a label into well-conditioned base gradients.

    The grad E pieces of M and Theta are omitted: their bracket with every
    base in the table ({X, E} for X among E, L_i, A_i, |L|^2) is identically
    zero as an algebraic consequence of the closed-form gradients, so keeping
    them only injects |E|^-2-amplified roundoff.
    """
    fam, j = _family(label)
    if fam == "M" and "_m_coef" in grads:
        alpha, _beta = grads["_m_coef"]
        return [(alpha, f"A{j}")]
    if fam == "Theta" and "_theta_coef" in grads:
        a, _b, c = grads["_theta_coef"]
        return [(a, f"A{j}"), (c[:, j - 1], "_LSQ")]
    return [(1.0, label)]


def bracket(
    grads: dict[str, tuple[np.ndarray, np.ndarray]], left: str, right: str
) -> np.ndarray:
    """{left, right} = dF/dr . dG/dv - dG/dr . dF/dv from a gradient table.

    Tables produced by `gradients` evaluate M and Theta rows through their
    factored expansions; finite-difference tables evaluate every pair from
    the raw gradients.
    """
    total = None
    for coef_l, base_l in _expansion(grads, left):
        for coef_r, base_r in _expansion(grads, right):
            term = coef_l * coef_r * _raw_bracket(grads, base_l, base_r)
            total = term if total is None else total + term
    return total


def _family(label: str) -> tuple[str, int]:
    if label == "E":
        return "E", 0
    for fam in ("Theta", "L", "A", "M"):
        if label.startswith(fam):
            return fam, int(label[len(fam):])
    raise KeyError(label)


def expected_bracket(left: str, right: str, vals: dict[str, np.ndarray]) -> np.ndarray:
    """Closed-form value of {left, right} in terms of the state's constants."""
    n = vals["E"].shape[0]
    fam_l, i = _family(left)
    fam_r, j = _family(right)
    if fam_l == "E" or fam_r == "E":
        return np.zeros(n)

    e = vals["E"]
    l_vec, a_vec, theta, m_vec = vals["L"], vals["A"], vals["Theta"], vals["M"]
    a_mag = vals["A_mag"]

    def eps_contract(x: np.ndarray) -> np.ndarray:
        # sum_k eps(i, j, k) x_k
        out = np.zeros(n)
        for k in range(1, 4):
            s = levi(i, j, k)
            if s:
                out += s * x[:, k - 1]
        return out

    pair = (fam_l, fam_r)
    if pair == ("L", "L"):
        return eps_contract(l_vec)
    if pair in (("L", "A"), ("A", "L")):
        return eps_contract(a_vec)
    if pair in (("L", "M"), ("M", "L")):
        return eps_contract(m_vec)
    if pair in (("L", "Theta"), ("Theta", "L")):
        return eps_contract(theta)
    if pair == ("A", "A"):
        return -2.0 * e * eps_contract(l_vec)
    if pair == ("M", "M"):
        return -np.sign(e) * eps_contract(l_vec)
    if pair in (("A", "M"), ("M", "A")):
        return -np.sign(e) * np.sqrt(2.0 * np.abs(e)) * eps_contract(l_vec)
    if pair == ("Theta", "Theta"):
        return np.zeros(n)

    # remaining: the LRL / LRL-direction mixed rows
    theta_cross_l = np.cross(theta, l_vec)
    if pair == ("A", "Theta"):
        return 2.0 * e / a_mag * (theta_cross_l[:, i - 1] * theta[:, j - 1] - eps_contract(l_vec))
    if pair == ("Theta", "A"):
        return -2.0 * e / a_mag * (theta_cross_l[:, j - 1] * theta[:, i - 1]) - 2.0 * e / a_mag * eps_contract(l_vec)
    if pair == ("M", "Theta"):
        scale = np.sqrt(2.0 * np.abs(e))
        return expected_bracket(f"A{i}", right, vals) / scale
    if pair == ("Theta", "M"):
        scale = np.sqrt(2.0 * np.abs(e))
        return expected_bracket(left, f"A{j}", vals) / scale
    raise KeyError((left, right))
