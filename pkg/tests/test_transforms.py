import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from keplersym import (
    DegenerateDirectionError,
    ExtendedState,
    InadmissibleTransformError,
    PhaseState,
    RadialStateError,
    admissibility,
    basis_expand,
    conserved_set,
    direction_lrl_transform,
    lrl_transform,
    rotate,
    rotation_matrix,
    time_shift_quadrature,
    time_translate,
    transform_constants_direction,
    transform_constants_lrl,
    twisted_rotation_params,
)
from keplersym.generators import GeneratorKind
from keplersym.sampling import sample_flow_pairs


def test_rotate_quarter_turn(ksys, ell_x):
    out = rotate(ell_x, (0, 0, math.pi / 2))
    assert_allclose(out.r, [0, 1, 0], atol=1e-15)
    assert_allclose(out.v, [-1.2, 0, 0], atol=1e-15)
    assert out.t == ell_x.t


def test_rotate_identity_and_composition(ell_x):
    out = rotate(ell_x, (0, 0, 0))
    assert_allclose(out.r, ell_x.r)
    a, b = 0.31, 0.57
    once = rotate(ell_x, (0, 0, a + b))
    twice = rotate(rotate(ell_x, (0, 0, a)), (0, 0, b))
    assert_allclose(once.r, twice.r, atol=1e-12)
    assert_allclose(once.v, twice.v, atol=1e-12)


def test_rotation_matrix_orthogonal():
    rot = rotation_matrix((0.3, -0.4, 0.9))
    assert_allclose(rot @ rot.T, np.eye(3), atol=1e-14)
    assert np.linalg.det(rot) == pytest.approx(1.0)


def test_time_translate_identity_and_period(ksys, ell_x):
    assert time_translate(ell_x, 0.0, ksys) is ell_x
    circ = ExtendedState(0.0, PhaseState((1, 0, 0), (0, 1, 0)))
    out = time_translate(circ, 2 * math.pi, ksys)
    assert_allclose(out.r, circ.r, atol=1e-8)
    assert_allclose(out.v, circ.v, atol=1e-8)
    assert out.t == circ.t  # phase-space picture keeps t


def test_time_translate_preserves_constants(ksys, ell_x):
    out = time_translate(ell_x, 3.7, ksys)
    c0 = conserved_set(ell_x.state, ksys)
    c1 = conserved_set(out.state, ksys)
    assert c1.E == pytest.approx(c0.E, abs=1e-9)
    assert_allclose(c1.L, c0.L, atol=1e-9)
    assert_allclose(c1.A, c0.A, atol=1e-9)


def test_basis_expand_ell(ksys, ell):
    exp = basis_expand(ell, ksys)
    assert exp.alpha_r == pytest.approx(0.44)
    assert exp.beta_r == pytest.approx(0.0, abs=1e-15)
    assert exp.alpha_v == pytest.approx(0.0, abs=1e-15)
    assert exp.beta_v == pytest.approx(0.44)
    assert exp.a_mag == pytest.approx(0.44)
    r_back, v_back = exp.reconstruct()
    assert_allclose(r_back, ell.r, atol=1e-10)
    assert_allclose(v_back, ell.v, atol=1e-10)


def test_basis_expand_reconstruction_random(ksys):
    from keplersym.sampling import sample_states

    r, v = sample_states(100, seed=17)
    for ri, vi in zip(r, v):
        state = PhaseState(ri, vi)
        exp = basis_expand(state, ksys)
        r_back, v_back = exp.reconstruct()
        assert_allclose(r_back, ri, atol=1e-10 * max(1.0, np.linalg.norm(ri)))
        assert_allclose(v_back, vi, atol=1e-10 * max(1.0, np.linalg.norm(vi)))


def test_basis_expand_degenerate(ksys, circ):
    with pytest.raises(DegenerateDirectionError):
        basis_expand(circ, ksys)
    with pytest.raises(RadialStateError):
        basis_expand(PhaseState((1, 0, 0), (0.5, 0, 0)), ksys)


def test_admissibility_examples(ksys, ell):
    c = conserved_set(ell, ksys)
    assert admissibility(c, 1.0, 1.44, ksys) is True
    assert admissibility(c, 1.0, 1.53, ksys) is False
    assert admissibility(c, 1.0, 0.81, ksys) is True


def test_transform_constants_direction(ksys, ell):
    c = conserved_set(ell, ksys)
    out = transform_constants_direction(c, np.array([0, 0.3, 0]))
    assert_allclose(out.L, [0, 0, 0.9], atol=1e-15)
    assert out.A_mag == pytest.approx(math.sqrt(0.5464))
    assert out.E == c.E
    assert_allclose(out.Theta, c.Theta, atol=1e-15)
    # identity and parallel parameter
    same = transform_constants_direction(c, np.zeros(3))
    assert_allclose(same.L, c.L)
    parallel = transform_constants_direction(c, 0.7 * np.asarray(c.Theta))
    assert_allclose(parallel.L, c.L, atol=1e-15)


def test_direction_transform_ell(ksys, ell_x):
    res = direction_lrl_transform(ell_x, ksys, (0, 0.3, 0))
    assert_allclose(res.out.r, [-0.25704, 0.96639, 0], atol=2e-5)
    assert_allclose(res.out.v, [-1.07378, 0.53572, 0], atol=2e-5)
    assert res.out.state.r_mag == pytest.approx(1.0, abs=1e-12)
    c_out = conserved_set(res.out.state, ksys)
    assert c_out.E == pytest.approx(-0.28, abs=1e-12)
    assert_allclose(np.cross(res.out.r, res.out.v), [0, 0, 0.9], atol=1e-12)
    assert res.admissible
    assert res.out.t == pytest.approx(res.delta_t)


def test_direction_transform_identity(ksys, ell_x):
    res = direction_lrl_transform(ell_x, ksys, (0, 0, 0))
    assert res.delta_t == 0.0
    assert_allclose(res.out.r, ell_x.r)
    assert res.admissible


def test_direction_transform_inadmissible(ksys, ell_x):
    with pytest.raises(InadmissibleTransformError) as err:
        direction_lrl_transform(ell_x, ksys, (0, 0, 0.2))
    assert err.value.root_argument == pytest.approx(1.44 - 1.48, abs=1e-12)


def test_quadrature_examples(ksys, ell_x, circ):
    assert time_shift_quadrature(ell_x, ksys, (0, 0, 0), GeneratorKind.LRL_DIRECTION) == 0.0
    dt = time_shift_quadrature(ell_x, ksys, (0, 0.01, 0), GeneratorKind.LRL_DIRECTION)
    assert dt == pytest.approx(0.012, abs=1e-3)
    with pytest.raises(DegenerateDirectionError):
        time_shift_quadrature(ExtendedState(0.0, circ), ksys, (0, 0.1, 0), GeneratorKind.LRL)


def test_transform_constants_lrl_parabolic(ksys, par):
    c = conserved_set(par, ksys)
    out = transform_constants_lrl(c, np.array([0, 0, 0.5]), ksys)
    assert_allclose(out.A, [1, 0, 0], atol=1e-15)
    assert_allclose(out.L, [0, 0.5, math.sqrt(2)], atol=1e-12)


def test_transform_constants_lrl_linearization(ksys, ell):
    c = conserved_set(ell, ksys)
    delta = 1e-6
    out = transform_constants_lrl(c, np.array([0, 0, delta]), ksys)
    assert_allclose((out.L - c.L) / delta, [0, 0.44, 0], atol=1e-5)


def test_transform_constants_lrl_isometry(ksys, ell):
    c = conserved_set(ell, ksys)
    rng = np.random.default_rng(8)
    for _ in range(10):
        eps = rng.normal(size=3) * 0.4
        out = transform_constants_lrl(c, eps, ksys)
        total = float(out.L @ out.L) + float(out.M @ out.M)
        assert total == pytest.approx(1 / 0.56, abs=1e-10)
        assert float(out.L @ out.M) == pytest.approx(0.0, abs=1e-10)


def test_lrl_transform_identity(ksys, ell_x):
    res = lrl_transform(ell_x, ksys, (0, 0, 0))
    assert res.delta_t == 0.0
    assert_allclose(res.out.r, ell_x.r)


def test_lrl_transform_periapsis_inadmissible(ksys, par_x, ell_x):
    # from an exact periapsis any eps along z grows |L*|, so the transformed
    # orbit cannot reach the invariant radius
    for state in (par_x, ell_x):
        with pytest.raises(InadmissibleTransformError):
            lrl_transform(state, ksys, (0, 0, 0.1))


def test_lrl_transform_off_apsis(ksys, par_x, ell_x):
    for state, eps in ((par_x, (0, 0, 0.1)), (ell_x, (0, 0, 0.1))):
        off = time_translate(state, 0.9, ksys)
        res = lrl_transform(off, ksys, eps)
        assert res.admissible
        assert res.diagnostics["reconstruction_residual"] <= 1e-10
        c_out = conserved_set(res.out.state, ksys)
        c_pred = transform_constants_lrl(conserved_set(off.state, ksys), np.asarray(eps), ksys)
        assert_allclose(c_out.L, c_pred.L, atol=1e-9)
        assert_allclose(c_out.A, c_pred.A, atol=1e-9)
        assert c_out.E == pytest.approx(c_pred.E, abs=1e-9)


def test_lrl_one_parameter_composition(ksys):
    pairs = sample_flow_pairs(5, seed=31, kind=GeneratorKind.LRL, branch="neg")
    for state, eps in pairs:
        x = ExtendedState(0.0, state)
        once = lrl_transform(x, ksys, eps).out
        part = lrl_transform(x, ksys, 0.4 * eps).out
        full = lrl_transform(part, ksys, 0.6 * eps).out
        assert abs(once.t - full.t) <= 1e-9
        assert_allclose(once.r, full.r, atol=1e-9)
        assert_allclose(once.v, full.v, atol=1e-9)


def test_twisted_rotation_params():
    params = twisted_rotation_params(-0.28, np.array([0, 0, 0.1]))
    assert params.phi == pytest.approx(math.sqrt(0.56) * 0.1)
    assert_allclose(params.axis, [0, 0, 1])
