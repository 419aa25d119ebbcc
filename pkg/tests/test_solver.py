import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bandext.kernel import InvalidParams, build_operator
from bandext.solver import (NearSingular, condition_estimate, solve_direct,
                            solve_neumann, tail_extension)
from oracles import exact_operator_entries, jacobi_eigenvalues


def test_zero_rhs():
    op = build_operator(1.0, 10)
    for rho in (0.0, 0.4):
        rep = solve_direct(op, np.zeros(10), rho)
        assert not np.any(rep.y_head) and rep.residual_norm == 0.0
    for depth in (0, 5, 50):
        assert not np.any(solve_neumann(op, np.zeros(10), 0.4, depth).y_head)


def test_scalar_system():
    rep = solve_direct(build_operator(math.pi / 2, 1), np.array([1.0]), 0.0)
    np.testing.assert_allclose(rep.y_head, [2.0], rtol=1e-15)
    assert rep.method == "direct(cholesky)"


def test_direct_matches_neumann():
    rng = np.random.default_rng(3)
    op = build_operator(math.pi / 3, 32)
    b = rng.standard_normal(32)
    d = solve_direct(op, b, 0.4).y_head
    nm = solve_neumann(op, b, 0.4, 200).y_head
    assert np.max(np.abs(d - nm)) <= 1e-9


def test_neumann_depth_zero():
    b = np.arange(1.0, 6.0)
    rep = solve_neumann(build_operator(0.7, 5), b, 0.4, 0)
    np.testing.assert_array_equal(rep.y_head, b / 1.4)


def test_neumann_rejects_unregularized():
    with pytest.raises(InvalidParams):
        solve_neumann(build_operator(1.0, 4), np.ones(4), 0.0, 10)
    with pytest.raises(InvalidParams):
        solve_neumann(build_operator(1.0, 4), np.ones(4), 0.4, -1)


def test_tail():
    b = np.arange(1.0, 9.0)
    np.testing.assert_array_equal(tail_extension(b, 0.0, 5, 8), [6.0, 7.0, 8.0])
    np.testing.assert_array_equal(tail_extension(b, 1.0, 5, 8), [3.0, 3.5, 4.0])
    b[5:] = 0.0
    assert not np.any(tail_extension(b, 0.4, 5, 8))
    with pytest.raises(InvalidParams):
        tail_extension(b, 0.4, 5, 5)


def test_condition_scalar_and_bound():
    assert condition_estimate(build_operator(math.pi / 2, 1), 0.0) == 1.0
    for omega in (0.3, math.pi / 2, 2.8):
        for n in (2, 16, 64, 200):
            assert condition_estimate(build_operator(omega, n), 0.4) <= 1.4 / 0.4


def test_condition_grows_with_n_unregularized():
    est = [condition_estimate(build_operator(math.pi / 2, n), 0.0) for n in (8, 16, 32, 64)]
    assert all(a <= b for a, b in zip(est, est[1:]))
    # Oracle: the true condition number at n = 8 from an extended-precision spectrum.
    eig, _ = jacobi_eigenvalues(exact_operator_entries(Fraction(1, 2), 8))
    true = float((1 - eig[0]) / (1 - eig[-1]))
    # Rayleigh quotients bound the estimate from below.
    assert 0.99 * true <= est[0] <= true * (1 + 1e-9)


def test_near_singular_raised_and_bypassed():
    op = build_operator(math.pi / 2, 64)
    with pytest.raises(NearSingular) as info:
        solve_direct(op, np.ones(64), 0.0)
    assert info.value.condition > 1e12
    rep = solve_direct(op, np.ones(64), 0.0, cond_threshold=None)
    assert np.all(np.isfinite(rep.y_head))


def test_rhs_too_short():
    with pytest.raises(InvalidParams):
        solve_direct(build_operator(1.0, 5), np.ones(3), 0.4)


def test_direct_neumann_converge_at_large_depth():
    rng = np.random.default_rng(11)
    for rho in (0.1, 0.4, 1.0):
        depth = math.ceil(100 * (1 + 1 / rho))
        op = build_operator(1.3, 40)
        b = rng.standard_normal(40)
        diff = solve_direct(op, b, rho).y_head - solve_neumann(op, b, rho, depth).y_head
        assert np.max(np.abs(diff)) <= 1e-8


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(1, 64),
       omega=st.floats(0.05, 3.1), rho=st.floats(0.01, 2.0))
def test_residual_and_norm_bounds(seed, n, omega, rho):
    rng = np.random.default_rng(seed)
    op = build_operator(omega, n)
    b = rng.standard_normal(n) * 10 ** rng.uniform(-3, 3)
    rep = solve_direct(op, b, rho)
    nb = np.linalg.norm(b)
    assert rep.residual_norm <= 1e-8 * max(1.0, nb)
    assert np.linalg.norm(rep.y_head) <= (1 + rho) / rho * nb * (1 + 1e-12)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(1, 64), rho=st.floats(0.05, 2.0))
def test_perturbation_bound(seed, n, rho):
    rng = np.random.default_rng(seed)
    op = build_operator(1.2, n)
    b = rng.standard_normal(n)
    eta = rng.standard_normal(n) * 10 ** rng.uniform(-6, 1)
    dy = solve_direct(op, b + eta, rho).y_head - solve_direct(op, b, rho).y_head
    assert np.linalg.norm(dy) <= (1 + rho) / rho * np.linalg.norm(eta) * (1 + 1e-9)
