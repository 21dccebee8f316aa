import numpy as np
import pytest

from ftvn.automorphisms import (
    automorphism_sampler,
    is_automorphism,
    min_pivot,
    nds_check,
    orbit_transport,
)
from ftvn.core import LinearMap, commute
from ftvn.errors import OrbitMismatchError, UnsupportedError, ValidationError
from ftvn.instances import permutation_matrix, system

SAMPLED = [("rn-down", 4), ("rn-abs", 4), ("sym", 3), ("sing-val", 3), ("spin", 3), ("norm", 3), ("discrete", 3), ("finite-seq", 4)]


def test_permutation_and_signed_permutation_examples():
    p = permutation_matrix(np.array([2, 0, 1]))
    assert is_automorphism(system("rn-down", 3), p).passed
    signed = np.diag([-1.0, 1.0, 1.0]) @ p
    assert is_automorphism(system("rn-abs", 3), signed).passed
    assert not is_automorphism(system("rn-down", 2), np.diag([-1.0, 1.0])).passed


def test_singular_and_shape_errors():
    rep = is_automorphism(system("rn-down", 2), np.array([[1.0, 1.0], [1.0, 1.0]]))
    assert not rep.passed and rep.details["invertible"] == 1.0
    with pytest.raises(ValidationError):
        is_automorphism(system("rn-down", 3), np.eye(2))


def test_min_pivot_against_determinant():
    rng = np.random.default_rng(0)
    for _ in range(50):
        a = rng.standard_normal((4, 4))
        assert (min_pivot(a) > 1e-10) == (abs(np.linalg.det(a)) > 1e-10)
    assert min_pivot(np.zeros((3, 3))) == 0.0


@pytest.mark.parametrize("kind,dim", SAMPLED)
def test_sampler_draws_automorphisms(kind, dim):
    s = system(kind, dim)
    for seed in range(5):
        a = automorphism_sampler(s, seed)
        assert np.linalg.norm(a.matrix.T @ a.matrix - np.eye(s.dim_v)) < 1e-10
        assert is_automorphism(s, a, n_samples=30, seed=seed).passed


def test_discrete_group_is_trivial():
    for seed in range(3):
        np.testing.assert_array_equal(automorphism_sampler(system("discrete", 3), seed).matrix, np.eye(3))


def test_product_sampler_is_block_diagonal():
    s = system("product", parts=[{"kind": "rn-down", "dim": 2}, {"kind": "sym", "dim": 2}])
    a = automorphism_sampler(s, 0)
    assert is_automorphism(s, a, n_samples=20).passed


@pytest.mark.parametrize("kind,dim", SAMPLED[:5])
def test_group_closure(kind, dim):
    s = system(kind, dim)
    a, b = automorphism_sampler(s, 1), automorphism_sampler(s, 2)
    assert is_automorphism(s, a @ b, n_samples=30).passed
    assert is_automorphism(s, LinearMap(np.linalg.inv(a.matrix)), n_samples=30).passed


@pytest.mark.parametrize("kind,dim", SAMPLED[:5])
def test_automorphisms_preserve_commutation(kind, dim):
    s = system(kind, dim)
    rng = np.random.default_rng(3)
    a = automorphism_sampler(s, 7)
    for _ in range(30):
        x = s.sample(rng)
        y = s.witness(x, s.lam(s.sample(rng)))
        assert commute(s, x, y)[0]
        assert commute(s, a(x), a(y))[0]


def test_orbit_transport_examples():
    s = system("rn-down", 3)
    a = orbit_transport(s, [1, 3, 2], [2, 1, 3])
    np.testing.assert_array_equal(a([1.0, 3, 2]), [2, 1, 3])
    sym2 = system("sym", 2)
    a = orbit_transport(sym2, np.diag([3.0, 1.0]), [[2, 1], [1, 2]])
    np.testing.assert_allclose(a(np.diag([3.0, 1.0]).reshape(-1)), [2, 1, 1, 2], atol=1e-12)
    with pytest.raises(OrbitMismatchError):
        orbit_transport(system("rn-down", 2), [1, 0], [0, 2])


@pytest.mark.parametrize("kind,dim", SAMPLED)
def test_orbit_transport_random(kind, dim):
    s = system(kind, dim)
    rng = np.random.default_rng(4)
    for _ in range(20):
        x = s.sample(rng)
        y = s.witness(s.sample(rng), s.lam(x))
        a = orbit_transport(s, x, y)
        assert np.linalg.norm(a(x) - y) <= 1e-8 * (1 + np.linalg.norm(x))


def test_orbit_transport_degenerate_sym():
    s = system("sym", 3)
    q, _ = np.linalg.qr(np.random.default_rng(5).standard_normal((3, 3)))
    x = np.diag([2.0, 2.0, -1.0])
    y = q @ x @ q.T
    a = orbit_transport(s, x, y)
    np.testing.assert_allclose(a(x.reshape(-1)), y.reshape(-1), atol=1e-12)


def test_shared_frame_pairs_attain_equality():
    s = system("sym", 3)
    rng = np.random.default_rng(6)
    for _ in range(20):
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        a, b = np.sort(rng.standard_normal(3))[::-1], np.sort(rng.standard_normal(3))[::-1]
        x, y = q @ np.diag(a) @ q.T, q @ np.diag(b) @ q.T
        assert abs(np.sum(x * y) - a @ b) < 1e-12


@pytest.mark.parametrize("kind,dim", [("rn-down", 4), ("rn-abs", 4), ("spin", 3), ("finite-seq", 4), ("norm", 3)])
def test_nds_check_passes(kind, dim):
    assert nds_check(system(kind, dim), n_samples=50).passed


def test_nds_check_unsupported():
    with pytest.raises(UnsupportedError):
        nds_check(system("subspace-counterexample"), n_samples=5)
