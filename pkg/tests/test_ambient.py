import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hypersemitoric import ambient as A
from hypersemitoric.errors import DomainError
from hypersemitoric.polygon import VERTEX_MODULI

from conftest import random_interior

S2, S6 = math.sqrt(2), math.sqrt(6)
P1 = np.array([S2, 0, 0, S2, 2, 2 * S2, S6, S6], dtype=complex)
P2 = np.array([2, 2 * S2, S6, S6, S2, 0, 0, S2], dtype=complex)


def random_points(rng, n):
    x = random_interior(rng, n)
    theta = rng.uniform(0, 2 * np.pi, size=(n, 8))
    return A.sample_fiber_point(x, theta), x


@pytest.mark.parametrize("z", [P1, P2])
def test_fixed_points_on_constraints(z):
    np.testing.assert_allclose(A.constraint_residual(z), 0, atol=1e-14)


def test_all_ones_residual():
    # |z_k|^2/2 = 1/2 for every k, so J = H = 1/2
    np.testing.assert_allclose(A.constraint_residual(np.ones(8)), [0.5, -1.5, -2.0, -3.5, -2.0, -1.5])


def test_sample_fiber_point_vertex_values():
    np.testing.assert_allclose(A.sample_fiber_point((1, 0)), P1, atol=1e-15)
    z = A.sample_fiber_point((0, 1), np.arange(8.0))
    assert z[0] == 0 and z[1] == 0


def test_sample_fiber_point_interior():
    z = A.sample_fiber_point((1.5, 1.5))
    np.testing.assert_allclose(np.abs(z) ** 2 / 2, [1.5, 2, 1.5, 2, 1.5, 2, 1.5, 2])


def test_sample_fiber_point_outside():
    with pytest.raises(DomainError):
        A.sample_fiber_point((0, 0))


def test_momentum_of_samples(rng):
    z, x = random_points(rng, 500)
    obs = A.eval_observables(z)
    np.testing.assert_allclose(obs.J, x[:, 0], atol=1e-12)
    np.testing.assert_allclose(obs.H, x[:, 1], atol=1e-12)
    np.testing.assert_allclose(A.constraint_residual(z), 0, atol=1e-12)


def test_observables_at_first_vertex():
    obs = A.eval_observables(P1, (0.3, -1, 2, 0.5))
    assert obs.J == pytest.approx(1) and obs.H == pytest.approx(0) and obs.gamma1 == 0


def test_observables_at_centre():
    z = A.sample_fiber_point((1.5, 1.5))
    obs = A.eval_observables(z, (1, 0, 0, 0))
    assert obs.gamma1 == pytest.approx(0.96)
    assert obs.Ht == pytest.approx(-1.5 + 0.96)


def test_zero_perturbation_is_H(rng):
    z, _ = random_points(rng, 100)
    obs = A.eval_observables(z, (0, 0, 0, 0))
    np.testing.assert_array_equal(obs.Ht, obs.H)


def test_perturbation_params_validation():
    with pytest.raises(DomainError):
        A.PerturbationParams(math.inf, 0, 0, 0)
    with pytest.raises(DomainError):
        A.PerturbationParams.coerce([1, 2, 3])


@pytest.mark.parametrize("name", A.OBSERVABLES)
def test_analytic_gradient_matches_differences(rng, name):
    z, _ = random_points(rng, 1)
    t = rng.uniform(-2, 2, 4)
    G = A.observable_gradient(name, z[0], t)
    N = A.numeric_gradient(name, z[0], t, richardson=True)
    np.testing.assert_allclose(G, N, atol=1e-7 * max(1, np.max(np.abs(G))))


def test_integrable_bracket(rng):
    z, _ = random_points(rng, 40)
    for t in rng.uniform(-2, 2, size=(3, 4)):
        for zz in z[:10]:
            assert abs(A.poisson_bracket_num("J", "Ht", zz, t)) < 1e-8
        assert np.max(np.abs(A.poisson_bracket("J", "Ht", z, t))) < 1e-12


def test_bracket_antisymmetry(rng):
    z, _ = random_points(rng, 5)
    for zz in z:
        assert abs(A.poisson_bracket_num("J", "J", zz)) < 1e-14
        a = A.poisson_bracket("H", "gamma1", zz)
        b = A.poisson_bracket("gamma1", "H", zz)
        assert a == pytest.approx(-b)


@pytest.mark.parametrize("g", ["gamma1", "gamma2", "gamma3", "gamma4"])
def test_J_commutes_with_perturbations(rng, g):
    z, _ = random_points(rng, 50)
    assert np.max(np.abs(A.poisson_bracket("J", g, z))) < 1e-12


def test_H_gamma1_bracket_vanishes_on_real_points():
    z = A.sample_fiber_point((1.5, 1.5))
    assert abs(A.poisson_bracket_num("H", "gamma1", z)) < 1e-9
    theta = np.zeros(8)
    theta[5] = 0.7
    z2 = A.sample_fiber_point((1.5, 1.5), theta)
    nb = A.poisson_bracket_num("H", "gamma1", z2)
    assert abs(nb) > 1e-2
    # the bracket is proportional to the sine of the monomial angle
    assert nb == pytest.approx(A.poisson_bracket("H", "gamma1", z2), rel=1e-6)
    theta[5] = 1.4
    ratio = A.poisson_bracket("H", "gamma1", A.sample_fiber_point((1.5, 1.5), theta)) / nb
    assert ratio == pytest.approx(math.sin(1.4) / math.sin(0.7), rel=1e-10)


def test_orbit_basis_is_kernel():
    np.testing.assert_array_equal(A.ORBIT_BASIS @ A.WEIGHTS, 0)
    assert np.linalg.matrix_rank(A.ORBIT_BASIS) == 6
    np.testing.assert_array_equal(A.ORBIT_BASIS @ A.GAMMA1_WEIGHTS, 0)


def test_gamma1_monomial_has_zero_J_weight():
    # the monomial is fixed by the J-circle, but not by the H-circle
    np.testing.assert_array_equal(A.GAMMA1_WEIGHTS @ A.WEIGHTS, [0, -6])


@pytest.mark.parametrize("name", ["J", "H", "gamma1", "gamma2", "gamma3", "gamma4", "Ht"])
def test_invariance_of_observables(rng, name):
    z, _ = random_points(rng, 200)
    assert np.max(A.n_invariance_residual(z, name, (0.4, 0.3, -1, 2))) < 1e-9


def test_gamma2_invariance_tight(rng):
    z, _ = random_points(rng, 20)
    assert np.max(A.n_invariance_residual(z, "gamma2")) < 1e-12


def test_non_invariant_control():
    z = A.sample_fiber_point((1.5, 1.5), 0.1 * np.arange(8))
    assert A.n_invariance_residual(z, lambda zz: np.real(zz[..., 1])) > 1e-2


def test_fixed_points_rank_zero(rng):
    for v, z in A.fixed_point_representatives().items():
        assert v in VERTEX_MODULI
        for t in rng.uniform(-2, 2, size=(20, 4)):
            assert A.dFt_rank(z, t) == 0


def test_generic_rank_two():
    z = A.sample_fiber_point((1.5, 1.5), 0.3 * np.arange(1, 9))
    assert A.dFt_rank(z, (0, 0, 0, 0)) == 2


def test_edge_rank_one():
    z = A.sample_fiber_point((0, 1.5), 0.3 * np.arange(1, 9))
    assert A.dFt_rank(z, (0, 0, 0, 0)) == 1


def test_rank_off_constraint():
    with pytest.raises(DomainError):
        A.dFt_rank(np.ones(8), (0, 0, 0, 0))


@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6))
def test_rank_invariant_under_orbit_phases(shift):
    theta = 0.3 * np.arange(1, 9) + np.asarray(shift) @ A.ORBIT_BASIS
    z = A.sample_fiber_point((1.5, 1.5), theta)
    z0 = A.sample_fiber_point((1.5, 1.5), 0.3 * np.arange(1, 9))
    t = (0.7, 0.2, -0.3, 0.1)
    np.testing.assert_allclose(A.dFt_singular_values(z, t), A.dFt_singular_values(z0, t), atol=1e-10)


def test_J_flow_period(rng):
    z, _ = random_points(rng, 5)
    for zz in z:
        zt = A.flow("J", zz, 2 * np.pi)
        assert np.max(np.abs(zt - zz)) < 1e-6
        # only the first phase moves, at unit rate
        zq = A.flow("J", zz, np.pi / 2)
        np.testing.assert_allclose(zq[1:], zz[1:], atol=1e-9)
        assert zq[0] == pytest.approx(zz[0] * np.exp(-0.5j * np.pi), abs=1e-8)


def test_lift_reproduces_monomial_angle(rng):
    for _ in range(20):
        x = random_interior(rng, 1)[0]
        phi = rng.uniform(0, 2 * np.pi)
        z = A.lift(x[0], x[1], phi, gauge=rng.uniform(0, 6, 8))
        m = np.conj(z[1] * z[2] * z[3]) * z[5] * z[6] * z[7]
        assert np.angle(m) == pytest.approx(np.angle(np.exp(1j * phi)), abs=1e-10)


def test_facet_indexing_self_test(monkeypatch):
    A.check_facet_indexing()
    bad = {(1, 0): np.roll(P1, 1)}
    monkeypatch.setattr(A, "fixed_point_representatives", lambda: bad)
    with pytest.raises(RuntimeError):
        A.check_facet_indexing()
