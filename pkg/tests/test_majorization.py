from itertools import permutations, product

import numpy as np
import pytest

from ftvn.errors import SizeGuardError, UnsupportedError, ValidationError
from ftvn.instances import system
from ftvn.majorization import (
    hlp_majorize,
    hull_oracle_rn,
    lidskii_campaign,
    lidskii_sum_check,
    majorize_in_v,
    mutual_majorization_check,
    support_test,
    w_majorize,
)
from ftvn.numerics import hull_membership


def random_ds(rng, n, k=None):
    k = k or n
    w = rng.dirichlet(np.ones(k))
    m = np.zeros((n, n))
    for wi in w:
        m[np.arange(n), rng.permutation(n)] += wi
    return m


def test_hlp_examples():
    v = hlp_majorize([1, 1, 1], [3, 0, 0])
    assert v.holds and v.weak_holds and v.margin == 1
    v = hlp_majorize([2, 2, -1], [3, 0, 0])
    assert not v.holds and v.margin < 0
    assert hlp_majorize([4, 1], [3, 2]).weak_holds is False
    assert hlp_majorize([1, 2], [2, 1]).holds
    with pytest.raises(ValidationError):
        hlp_majorize([1, 2], [1, 2, 3])


def test_weak_without_equal_sums():
    v = hlp_majorize([1, 0], [2, 0])
    assert v.weak_holds and not v.holds and v.margin == -1


def test_hull_oracle_examples():
    v = hull_oracle_rn([1, 1], [2, 0])
    assert v.holds
    np.testing.assert_allclose(v.witness["weights"], [0.5, 0.5], atol=1e-12)
    assert not hull_oracle_rn([2.1, -0.1], [2, 0]).holds
    v = hull_oracle_rn([0, 3, 1], [3, 1, 0])
    assert v.holds and len(v.witness["weights"]) == 1
    with pytest.raises(SizeGuardError):
        hull_oracle_rn(np.ones(7), np.ones(7))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_hlp_agrees_with_hull_oracle(n):
    rng = np.random.default_rng(n)
    for i in range(150):
        y = rng.standard_normal(n)
        x = random_ds(rng, n) @ y if i % 2 else rng.standard_normal(n)
        if i % 4 == 1:
            x = x - x.mean() + y.mean()
        h = hlp_majorize(x, y)
        if abs(h.margin) <= 1e-7:
            continue
        assert h.holds == hull_oracle_rn(x, y).holds


def signed_hull(x, y):
    n = len(y)
    verts = {tuple(s * p for s, p in zip(signs, perm)) for perm in permutations(y) for signs in product([-1, 1], repeat=n)}
    return hull_membership(x, np.array(sorted(verts))).inside


def test_abs_rule_matches_signed_permutation_hull():
    rng = np.random.default_rng(9)
    for _ in range(150):
        y = rng.standard_normal(3)
        x = rng.standard_normal(3) * rng.uniform(0.2, 1.2)
        v = w_majorize("abs", x, y)
        if abs(v.margin) <= 1e-7:
            continue
        assert v.holds == signed_hull(x, y)


def test_equality_rule():
    assert w_majorize("identity", [1, 2], [1, 2]).holds
    assert not w_majorize("identity", [2, 1], [1, 2]).holds
    with pytest.raises(ValidationError):
        w_majorize("nope", [1], [1])


def test_majorize_in_v_examples():
    sym2 = system("sym", 2)
    q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((2, 2)))
    y = q @ np.diag([3.0, 1.0]) @ q.T
    assert majorize_in_v(sym2, 2 * np.eye(2), y).holds
    v = majorize_in_v(system("rn-down", 2), [1.5, 0.5], [2, 0])
    assert v.holds
    np.testing.assert_allclose(v.witness["weights"], [0.75, 0.25], atol=1e-12)
    np.testing.assert_allclose(v.witness["vertices"], [[2, 0], [0, 2]])
    rng = np.random.default_rng(1)
    for kind, dim in [("sym", 3), ("sing-val", 2), ("spin", 2), ("rn-abs", 3), ("discrete", 3)]:
        s = system(kind, dim)
        x = s.sample(rng)
        assert majorize_in_v(s, x, x).holds


def test_majorize_in_v_needs_reduced_pair():
    with pytest.raises(UnsupportedError):
        majorize_in_v(system("norm", 3), [1, 0, 0], [0, 1, 0])


def test_support_test_examples():
    s = system("rn-down", 2)
    rep = support_test(s, [2, 0], [1, 1])
    assert not rep.passed
    assert support_test(s, [1, 1], [2, 0]).passed
    sym = system("sym", 3)
    x = sym.sample(np.random.default_rng(2))
    assert support_test(sym, x, x, n_dirs=50).passed


@pytest.mark.parametrize("kind,dim", [("sym", 3), ("rn-down", 4), ("sing-val", 3), ("spin", 3)])
def test_majorized_pairs_pass_support_battery(kind, dim):
    s = system(kind, dim)
    rng = np.random.default_rng(3)
    for _ in range(10):
        y = s.sample(rng)
        # averaging orbit points of y lands in conv[y]
        pts = [s.witness(s.sample(rng), s.lam(y)) for _ in range(3)]
        x = sum(w * p for w, p in zip(rng.dirichlet(np.ones(3)), pts))
        assert majorize_in_v(s, x, y).holds
        assert support_test(s, x, y, n_dirs=40, seed=1).passed


def test_mutual_majorization():
    s = system("rn-down", 3)
    assert mutual_majorization_check(s, [1, 3, 2], [3, 2, 1])
    assert not mutual_majorization_check(system("rn-down", 2), [1, 1], [2, 0])
    sym = system("sym", 3)
    rng = np.random.default_rng(4)
    x = sym.sample(rng).reshape(3, 3)
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    assert mutual_majorization_check(sym, x, q @ x @ q.T)


def test_norm_bound_and_transitivity():
    rng = np.random.default_rng(5)
    for _ in range(200):
        z = rng.standard_normal(4)
        y = random_ds(rng, 4) @ z
        x = random_ds(rng, 4) @ y
        assert hlp_majorize(x, y).holds and hlp_majorize(y, z).holds
        assert hlp_majorize(x, z).holds
        assert np.linalg.norm(x) <= np.linalg.norm(y) + 1e-9


def test_lidskii_examples():
    sym2 = system("sym", 2)
    v = lidskii_sum_check(sym2, [np.diag([1.0, -1.0]), [[0, 1], [1, 0]]])
    assert v.holds and abs(v.margin - (2 - np.sqrt(2))) < 1e-12
    x = sym2.sample(np.random.default_rng(6))
    assert lidskii_sum_check(sym2, [x, x, x]).holds
    with pytest.raises(ValidationError):
        lidskii_sum_check(sym2, [])


@pytest.mark.parametrize("kind,dim", [("sym", 3), ("sing-val", 3), ("spin", 3), ("rn-down", 4), ("rn-abs", 4), ("finite-seq", 4)])
def test_lidskii_campaign(kind, dim):
    assert lidskii_campaign(system(kind, dim), n_samples=150, seed=2).passed


def test_sing_val_sums_are_only_weakly_majorized():
    s = system("sing-val", 2)
    x = np.eye(2).reshape(-1)
    lhs, rhs = s.lam(x + -x), s.lam(x) + s.lam(-x)
    assert not hlp_majorize(lhs, rhs).holds
    assert hlp_majorize(lhs, rhs).weak_holds
    assert lidskii_sum_check(s, [x, -x]).holds
