"""Leggett family: positivity bounds, inequality, LP maximization, checkers."""

import numpy as np
import pytest

from hvlab.hvmodels import check_cpi, check_oi, check_pi, check_reproduction, check_triviality
from hvlab.leggett import (
    DirectionTriple,
    LeggettLambda,
    c_bounds,
    fibonacci_sphere,
    leggett_bound,
    leggett_context_pairs,
    leggett_hv_model,
    leggett_joint,
    max_lhs_lp,
    product_correlation,
    quantum_lhs,
    quantum_singlet_correlation,
    violation_region,
)

EX = np.array([1.0, 0.0, 0.0])
EY = np.array([0.0, 1.0, 0.0])
EZ = np.array([0.0, 0.0, 1.0])


def const_correlation(value):
    return lambda lam, a, b: value


def four_outcomes(lam, c, a, b):
    return {
        (alpha, beta): leggett_joint(lam, c, a, b, alpha, beta)
        for alpha in (1, -1)
        for beta in (1, -1)
    }


def test_lambda_validation():
    with pytest.raises(ValueError):
        LeggettLambda(mu=np.array([1.0, 1.0, 0.0]), nu=EZ)
    with pytest.raises(ValueError):
        LeggettLambda(mu=EZ, nu=EZ, eta=0.0)


def test_c_bounds_flat():
    lam = LeggettLambda(mu=EZ, nu=EZ)
    lo, hi = c_bounds(lam, EX, EY)  # u = v = 0
    assert (lo, hi) == (-1.0, 1.0)


def test_c_bounds_forced_extremes():
    lam = LeggettLambda(mu=EZ, nu=EZ)
    lo, hi = c_bounds(lam, EZ, EZ)  # u = v = 1
    assert (lo, hi) == (1.0, 1.0)
    lo, hi = c_bounds(lam, EZ, EX)  # u = 1, v = 0
    assert (lo, hi) == (0.0, 0.0)


def test_c_bounds_enumeration_oracle():
    # soundness: any C inside the bounds keeps all four outcomes non-negative;
    # tightness: C at each bound zeroes exactly one outcome (generic u, v)
    rng = np.random.default_rng(0)
    for _ in range(200):
        mu = rng.standard_normal(3)
        mu /= np.linalg.norm(mu)
        nu = rng.standard_normal(3)
        nu /= np.linalg.norm(nu)
        eta = rng.uniform(0.1, 1.0)
        lam = LeggettLambda(mu=mu, nu=nu, eta=eta)
        a, b = EX, EZ
        lo, hi = c_bounds(lam, a, b)
        assert lo <= hi + 1e-15
        for cval in (lo, hi, (lo + hi) / 2):
            probs = four_outcomes(lam, const_correlation(cval), a, b)
            assert min(probs.values()) >= -1e-12
        for cval, expect_zero in ((lo, 1), (hi, 1)):
            probs = four_outcomes(lam, const_correlation(cval), a, b)
            zeros = sum(1 for p in probs.values() if p < 1e-12)
            assert zeros == expect_zero


def test_joint_forced_perfect_correlation():
    # u = v = 1 forces C = 1; the (+,+) outcome takes all the probability
    lam = LeggettLambda(mu=EZ, nu=EZ)
    probs = four_outcomes(lam, const_correlation(1.0), EZ, EZ)
    assert probs[(1, 1)] == 1.0
    assert probs[(1, -1)] == probs[(-1, 1)] == probs[(-1, -1)] == 0.0


def test_joint_flat_case():
    lam = LeggettLambda(mu=EZ, nu=EZ)
    probs = four_outcomes(lam, const_correlation(0.0), EX, EY)
    assert all(p == 0.25 for p in probs.values())


def test_joint_rejects_inadmissible():
    lam = LeggettLambda(mu=EZ, nu=EZ)
    with pytest.raises(ValueError):
        leggett_joint(lam, const_correlation(0.5), EZ, EZ, 1, 1)  # bounds force C=1


def test_joint_product_correlation_factorizes():
    rng = np.random.default_rng(1)
    for _ in range(50):
        mu = rng.standard_normal(3)
        mu /= np.linalg.norm(mu)
        nu = rng.standard_normal(3)
        nu /= np.linalg.norm(nu)
        lam = LeggettLambda(mu=mu, nu=nu, eta=rng.uniform(0.2, 1.0))
        a, b = EX, EY
        u = lam.eta * (a @ lam.mu)
        v = lam.eta * (b @ lam.nu)
        probs = four_outcomes(lam, product_correlation, a, b)
        for (alpha, beta), p in probs.items():
            assert abs(p - (1 + alpha * u) * (1 + beta * v) / 4) <= 1e-14


def test_joint_normalization_exact():
    rng = np.random.default_rng(2)
    for _ in range(100):
        mu = rng.standard_normal(3)
        mu /= np.linalg.norm(mu)
        nu = rng.standard_normal(3)
        nu /= np.linalg.norm(nu)
        lam = LeggettLambda(mu=mu, nu=nu, eta=rng.uniform(0.1, 1.0))
        a, b = EZ, EX
        lo, hi = c_bounds(lam, a, b)
        c = const_correlation(rng.uniform(lo, hi))
        assert abs(sum(four_outcomes(lam, c, a, b).values()) - 1) <= 1e-15


def test_marginals_context_free():
    rng = np.random.default_rng(3)
    for _ in range(50):
        mu = rng.standard_normal(3)
        mu /= np.linalg.norm(mu)
        lam = LeggettLambda(mu=mu, nu=-mu, eta=0.7)
        a, b = EY, EZ
        lo, hi = c_bounds(lam, a, b)
        c = const_correlation((lo + hi) / 2)
        probs = four_outcomes(lam, c, a, b)
        u = lam.eta * (a @ lam.mu)
        for alpha in (1, -1):
            marg = probs[(alpha, 1)] + probs[(alpha, -1)]
            assert abs(marg - (1 + alpha * u) / 2) <= 1e-12


def test_leggett_bound_values():
    assert leggett_bound(0.0) == 2.0
    assert abs(leggett_bound(np.pi) - 4 / 3) < 1e-14
    assert abs(leggett_bound(0.2) - (2 - (2 / 3) * np.sin(0.1))) < 1e-14
    assert abs(leggett_bound(0.2) - 1.9334443889021147) < 1e-12


def test_quantum_lhs_values():
    assert quantum_lhs(DirectionTriple.canonical(0.0)) == 2.0
    assert abs(quantum_lhs(DirectionTriple.canonical(np.pi))) < 1e-12
    got = quantum_lhs(DirectionTriple.canonical(0.2))
    assert abs(got - 2 * np.cos(0.1)) < 1e-12
    assert abs(got - 1.9900083305560516) < 1e-12


def test_quantum_lhs_is_2cos_for_any_valid_triple():
    rng = np.random.default_rng(4)
    for phi in (0.3, 1.0, 2.0):
        # rotate the canonical triple by a random orthogonal matrix
        m = rng.standard_normal((3, 3))
        q, r = np.linalg.qr(m)
        q = q * np.sign(np.diagonal(r))
        base = DirectionTriple.canonical(phi)
        d = DirectionTriple(
            a=base.a @ q.T, b=base.b @ q.T, b_prime=base.b_prime @ q.T, phi=phi
        )
        assert abs(quantum_lhs(d) - 2 * abs(np.cos(phi / 2))) <= 1e-10


def test_direction_triple_invariants_enforced():
    base = DirectionTriple.canonical(0.5)
    with pytest.raises(ValueError):
        DirectionTriple(a=base.a, b=base.b, b_prime=base.b_prime, phi=0.6)


def test_violation_region_against_oracle():
    # independent oracle: plain bisection on the gap written out longhand
    def gap(phi):
        return 2 * np.cos(phi / 2) - (2 - (2 / 3) * abs(np.sin(phi / 2)))

    lo, hi = 1e-9, np.pi
    for _ in range(200):
        mid = (lo + hi) / 2
        if gap(mid) > 0:
            lo = mid
        else:
            hi = mid
    oracle = (lo + hi) / 2

    phi0, phi_star = violation_region()
    assert phi0 == 0.0
    assert abs(phi_star - oracle) <= 1e-10
    assert abs(phi_star - 4 * np.arctan(1 / 3)) <= 1e-10
    assert gap(phi_star / 2) > 0
    assert gap((phi_star + np.pi) / 2) < 0


def test_fibonacci_sphere_properties():
    grid = fibonacci_sphere(128, seed=7)
    assert grid.shape == (128, 3)
    assert np.max(np.abs(np.linalg.norm(grid, axis=1) - 1)) < 1e-12
    assert np.max(np.abs(grid[:64] + grid[64:])) == 0  # exact antipodes
    assert np.array_equal(grid, fibonacci_sphere(128, seed=7))
    with pytest.raises(ValueError):
        fibonacci_sphere(129, seed=0)


def test_lp_attains_bound_at_phi_zero():
    d = DirectionTriple.canonical(0.0)
    res = max_lhs_lp(d, fibonacci_sphere(128, seed=0), eta=1.0)
    assert abs(res.value - 2.0) <= 1e-6
    assert abs(res.weights.sum() - 1) <= 1e-9


def test_lp_respects_bound():
    for phi in (np.pi / 2, 1.0):
        d = DirectionTriple.canonical(phi)
        res = max_lhs_lp(d, fibonacci_sphere(256, seed=1), eta=1.0)
        assert res.value <= leggett_bound(phi) + 1e-7


def test_lp_c_choices_admissible():
    d = DirectionTriple.canonical(0.8)
    grid = fibonacci_sphere(64, seed=2)
    res = max_lhs_lp(d, grid, eta=1.0)
    for g, mu in enumerate(grid):
        lam = LeggettLambda(mu=mu, nu=-mu, eta=1.0)
        for p, (a, b) in enumerate(d.pairs()):
            lo, hi = c_bounds(lam, a, b)
            assert lo - 1e-12 <= res.c_values[g, p] <= hi + 1e-12


def test_lp_eta_zero_limit_reaches_quantum_value():
    # tiny eta widens the bounds to nearly [-1, 1]: quantum correlations admissible
    phi = 1.0
    d = DirectionTriple.canonical(phi)
    res = max_lhs_lp(d, fibonacci_sphere(64, seed=3), eta=1e-6)
    assert res.value >= 2 * abs(np.cos(phi / 2)) - 1e-5


def test_leggett_model_in_checkers():
    grid = fibonacci_sphere(32, seed=4)
    lambdas = [LeggettLambda(mu=m, nu=-m, eta=1.0) for m in grid]
    w = np.full(len(lambdas), 1 / len(lambdas))
    model = leggett_hv_model(lambdas, w, product_correlation)
    pairs = leggett_context_pairs(DirectionTriple.canonical(0.8))

    assert check_oi(model, pairs, tol=1e-12).passed  # C = uv factorizes
    assert check_pi(model, pairs, tol=1e-12).passed
    assert check_cpi(model, pairs, tol=1e-12).passed
    assert not check_reproduction(model, pairs, tol=1e-10).passed
    assert not check_triviality(model, pairs, tol=1e-10).passed


def test_leggett_model_oi_fails_for_non_product_c():
    grid = fibonacci_sphere(16, seed=5)
    lambdas = [LeggettLambda(mu=m, nu=-m, eta=1e-6) for m in grid]
    w = np.full(len(lambdas), 1 / len(lambdas))
    model = leggett_hv_model(lambdas, w, quantum_singlet_correlation)
    pairs = leggett_context_pairs(DirectionTriple.canonical(0.8))
    assert not check_oi(model, pairs, tol=1e-12).passed
    assert check_pi(model, pairs, tol=1e-12).passed
    assert check_cpi(model, pairs, tol=1e-12).passed


def test_eta_to_zero_quantum_c_model_is_trivial():
    grid = fibonacci_sphere(16, seed=6)
    eta = 1e-7
    lambdas = [LeggettLambda(mu=m, nu=-m, eta=eta) for m in grid]
    w = np.full(len(lambdas), 1 / len(lambdas))
    model = leggett_hv_model(lambdas, w, quantum_singlet_correlation)
    pairs = leggett_context_pairs(DirectionTriple.canonical(0.8))
    rep = check_triviality(model, pairs, tol=1e-6)
    assert rep.passed  # per-λ deviation from Born is O(eta)


def test_cpi_skips_zero_probability_conditionals():
    # eta = 1 with mu on the z axis makes the -z outcome impossible: those
    # conditioning tuples are skipped and counted, not divided by zero
    lam = LeggettLambda(mu=EZ, nu=-EZ, eta=1.0)
    model = leggett_hv_model([lam], np.array([1.0]), product_correlation)
    pairs = leggett_context_pairs(DirectionTriple.canonical(0.0))
    rep = check_cpi(model, pairs, tol=1e-10)
    assert rep.passed
    assert rep.skipped > 0


def test_leggett_model_nontrivial_marginal_distance():
    # pure-marginal (eta = 1) hidden states sit far from the flat Born marginal
    lam = LeggettLambda(mu=EZ, nu=-EZ, eta=1.0)
    model = leggett_hv_model([lam], np.array([1.0]), product_correlation)
    pairs = leggett_context_pairs(DirectionTriple.canonical(0.8))
    rep = check_triviality(model, pairs, tol=1e-10)
    assert rep.violation >= 0.25  # a·mu = 1 outcome: |3/4·... - born| large
