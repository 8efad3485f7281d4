import math

import numpy as np
import pytest
from hypothesis import given, assume, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from keplersym import (
    ExtendedState,
    KeplerSystem,
    OrbitClass,
    PhaseState,
    SingularOriginError,
    acceleration,
    classify_orbit,
    conserved_set,
    integrate_orbit,
    lagrangian,
    material_derivative,
)
from keplersym.transforms import rotate
from keplersym.sampling import sample_states


def test_acceleration_unit_radius(ksys):
    assert_allclose(acceleration(PhaseState((1, 0, 0), (0, 1, 0)), ksys), [-1, 0, 0])


def test_acceleration_scaling(ksys):
    assert_allclose(acceleration(PhaseState((0, 2, 0), (0, 0, 1)), ksys), [0, -0.25, 0])
    sys2 = KeplerSystem(kappa=2.0)
    assert_allclose(
        acceleration(PhaseState((3, 4, 0), (0, 0, 1)), sys2), [-0.048, -0.064, 0], atol=1e-15
    )


def test_acceleration_origin_floor(ksys):
    with pytest.raises(SingularOriginError):
        acceleration(PhaseState((1e-13, 0, 0), (0, 1, 0)), ksys)
    with pytest.raises(SingularOriginError):
        PhaseState((0, 0, 0), (0, 1, 0))


def test_lagrangian_values(ksys, ell):
    assert lagrangian(PhaseState((1, 0, 0), (0, 1, 0)), ksys) == pytest.approx(1.5)
    assert lagrangian(ell, ksys) == pytest.approx(1.72)


def test_lagrangian_decays_with_radius(ksys):
    values = [lagrangian(PhaseState((x, 0, 0), (0, 0, 0)), ksys) for x in (1, 5, 50, 5000)]
    assert all(a > b > 0 for a, b in zip(values, values[1:]))


def test_conserved_set_circ(ksys, circ):
    c = conserved_set(circ, ksys)
    assert c.E == pytest.approx(-0.5)
    assert_allclose(c.L, [0, 0, 1])
    assert_allclose(c.A, [0, 0, 0], atol=1e-15)
    assert c.eccentricity == pytest.approx(0.0, abs=1e-15)
    assert c.Theta is None
    assert c.orbit_class is OrbitClass.CIRCULAR
    assert c.period == pytest.approx(2 * math.pi)
    assert c.semi_major == pytest.approx(1.0)


def test_conserved_set_ell(ksys, ell):
    c = conserved_set(ell, ksys)
    assert c.E == pytest.approx(-0.28)
    assert_allclose(c.L, [0, 0, 1.2])
    assert_allclose(c.A, [0.44, 0, 0], atol=1e-15)
    assert c.A_mag == pytest.approx(0.44)
    assert_allclose(c.Theta, [1, 0, 0])
    assert c.eccentricity == pytest.approx(0.44)
    assert c.orbit_class is OrbitClass.ELLIPTIC
    # |A|^2 = kappa^2 + 2 E |L|^2
    assert c.A_mag**2 == pytest.approx(1 + 2 * (-0.28) * 1.44)


def test_conserved_set_par(ksys, par):
    c = conserved_set(par, ksys)
    assert abs(c.E) < 1e-15
    assert_allclose(c.A, [1, 0, 0], atol=1e-15)
    assert c.eccentricity == pytest.approx(1.0)
    assert c.M is None
    assert c.orbit_class is OrbitClass.PARABOLIC
    assert c.period is None


def test_conserved_set_hyp(ksys, hyp):
    c = conserved_set(hyp, ksys)
    assert c.E == pytest.approx(1.0)
    assert_allclose(c.L, [0, 0, 2])
    assert_allclose(c.A, [3, 0, 0], atol=1e-14)
    assert c.eccentricity == pytest.approx(3.0)
    assert c.orbit_class is OrbitClass.HYPERBOLIC
    assert c.A_mag**2 == pytest.approx(1 + 2 * 1 * 4)


def test_classify_examples(ksys, circ, hyp):
    assert classify_orbit(conserved_set(circ, ksys)) is OrbitClass.CIRCULAR
    assert classify_orbit(conserved_set(hyp, ksys)) is OrbitClass.HYPERBOLIC
    radial = conserved_set(PhaseState((1, 0, 0), (0.5, 0, 0)), ksys)
    assert radial.orbit_class is OrbitClass.RADIAL
    assert classify_orbit(radial) is OrbitClass.RADIAL


def test_classification_rotation_invariant(ksys):
    r, v = sample_states(50, seed=11)
    rng = np.random.default_rng(2)
    for ri, vi in zip(r, v):
        state = PhaseState(ri, vi)
        cls = conserved_set(state, ksys).orbit_class
        g = rng.normal(size=3)
        rotated = rotate(ExtendedState(0.0, state), g).state
        assert conserved_set(rotated, ksys).orbit_class is cls


def test_conserved_identities_random(ksys):
    r, v = sample_states(1000, seed=5)
    for ri, vi in zip(r[:200], v[:200]):
        c = conserved_set(PhaseState(ri, vi), ksys)
        scale = max(1.0, c.A_mag * c.L_mag)
        assert abs(float(np.dot(c.L, c.A))) <= 1e-12 * scale
        assert abs(c.A_mag**2 - (1 + 2 * c.E * c.L_mag**2)) <= 1e-12 * max(1.0, c.A_mag**2)


@settings(max_examples=60, deadline=None)
@given(
    rx=st.floats(-2, 2), ry=st.floats(-2, 2), rz=st.floats(-2, 2),
    vx=st.floats(-2, 2), vy=st.floats(-2, 2), vz=st.floats(-2, 2),
)
def test_lrl_orthogonality_property(rx, ry, rz, vx, vy, vz):
    r = np.array([rx, ry, rz])
    v = np.array([vx, vy, vz])
    assume(0.3 < np.linalg.norm(r) < 3.0 and 0.2 < np.linalg.norm(v) < 3.0)
    sys = KeplerSystem()
    c = conserved_set(PhaseState(r, v), sys)
    assert abs(float(np.dot(c.L, c.A))) <= 1e-12 * max(1.0, c.A_mag * c.L_mag)


def test_material_derivative_conserved(ksys, ell, circ):
    sys = ksys

    def e_field(state):
        return 0.5 * float(state.v @ state.v) - 1.0 / state.r_mag

    assert abs(material_derivative(e_field, ell, sys)) <= 1e-6
    assert material_derivative(lambda s: float(s.r @ s.r), ell, sys) == pytest.approx(0.0, abs=1e-9)
    assert material_derivative(lambda s: float(s.r @ s.v), circ, sys) == pytest.approx(0.0, abs=1e-9)


def test_material_derivative_conservation_random(ksys):
    from keplersym import fields

    # spot-check the public scalar operator
    r, v = sample_states(10, seed=13)
    for ri, vi in zip(r, v):
        state = PhaseState(ri, vi)
        for lab in fields.SCALAR_LABELS:
            def field(s, lab=lab):
                return float(fields.scalar_values(s.r[None, :], s.v[None, :], 1.0)[lab][0])

            assert abs(material_derivative(field, state, ksys)) <= 1e-5

    # full-scale invariant, batched: v . dC/dr + a . dC/dv with FD gradients
    r, v = sample_states(1000, seed=13)
    fd = fields.fd_gradients(r, v, 1.0, include_m=False)
    accel = -r / np.linalg.norm(r, axis=1)[:, None] ** 3
    for lab in fields.SCALAR_LABELS:
        gr, gv = fd[lab]
        md = np.einsum("ni,ni->n", v, gr) + np.einsum("ni,ni->n", accel, gv)
        assert float(np.max(np.abs(md))) <= 1e-5


def test_period_matches_orbit_closure(ksys, ell):
    c = conserved_set(ell, ksys)
    traj = integrate_orbit(ExtendedState(0.0, ell), ksys, c.period, tol=1e-12)
    end = traj.samples[-1]
    assert_allclose(end.r, ell.r, atol=1e-8)
    assert_allclose(end.v, ell.v, atol=1e-8)
