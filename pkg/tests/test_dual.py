import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from gldual.dual import (
    TheoremCase,
    applicable_cases,
    build_dual_point,
    duality_slack,
    eval_Fstar,
    eval_Gstar,
    eval_Jstar,
    global_criterion_sample,
    in_Astar,
    inner_argmax_v0,
    membership_C,
    reduced_J1,
    reduced_J2_global,
    reduced_J2_over_v1,
    reduced_Jtilde,
    sample_C_feasible,
    stationarity_residuals,
    verify_gap,
    verify_second_derivative_correspondence,
    weak_duality_sample,
)
from gldual.errors import DomainError, HypothesisError, IndefiniteOperatorError
from gldual.grid_ops import Grid, extremal_eigs, inner
from gldual.primal import (
    GLProblem,
    HessianClass,
    eval_J,
    find_critical_point,
    initial_guess,
    manufactured_source,
)
from oracles import fstar_oracle, gstar_oracle

small_grids = st.sampled_from([
    ((1.0,), (1,)), ((3.0,), (2,)), ((2.0,), (3,)), ((5.0,), (4,)),
    ((1.0, 1.0), (1, 1)), ((2.0, 3.0), (1, 2)), ((3.0, 1.5), (2, 1)), ((3.0, 3.0), (2, 2)),
])


def unit_spacing(n, **kw):
    return GLProblem.create(Grid((n + 1.0,), (n,)), **kw)


def certified(p, start="zero", seed=0):
    return find_critical_point(p, initial_guess(p, start, seed=seed))


# ----------------------------------------------------------------------------
# conjugates


@given(small_grids, st.integers(0, 2**31 - 1))
def test_Fstar_matches_oracle(grid, seed):
    rng = np.random.default_rng(seed)
    g = Grid(*grid)
    p = GLProblem.create(g, gamma=rng.uniform(0.2, 3.0))
    v1 = rng.standard_normal(g.N) * rng.uniform(0.1, 10)
    expected = fstar_oracle(g.extent, g.n_interior, p.gamma, p.K, v1)
    assert eval_Fstar(p, v1) == pytest.approx(expected, rel=1e-8)


@given(small_grids, st.integers(0, 2**31 - 1))
def test_Gstar_matches_oracle(grid, seed):
    rng = np.random.default_rng(seed)
    g = Grid(*grid)
    p = GLProblem.create(g, gamma=rng.uniform(0.2, 3.0), alpha=rng.uniform(0.2, 3.0),
                         beta=rng.uniform(0.1, 2.0), f=rng.standard_normal(g.N))
    v1 = rng.standard_normal(g.N) * 3
    v0 = -0.5 * p.K + p.K * rng.uniform(0.05, 2.0, g.N)
    expected = gstar_oracle(g.extent, g.n_interior, p.alpha, p.beta, p.K, p.f, v1, v0)
    assert eval_Gstar(p, v1, v0) == pytest.approx(expected, rel=1e-8)


def test_Fstar_examples():
    p = GLProblem.create(Grid((1.0,), (1,)))
    assert p.K == pytest.approx(10.0)
    assert eval_Fstar(p, np.array([2.0])) == pytest.approx(0.5, rel=1e-12)
    assert eval_Fstar(GLProblem.create(Grid.unit(5)), np.zeros(5)) == 0.0


def test_Gstar_and_Jstar_examples():
    g = Grid.unit(6)
    a, b = 0.8, 1.7
    p = GLProblem.create(g, alpha=a, beta=b)
    v0 = np.full(6, -a * b)
    assert eval_Gstar(p, np.zeros(6), v0) == pytest.approx(-0.5 * a * b**2 * g.volume, rel=1e-14)
    assert eval_Jstar(p, np.zeros(6), v0) == pytest.approx(eval_J(p, np.zeros(6)), rel=1e-14)

    f = np.random.default_rng(0).standard_normal(6)
    q = p.with_params(f=f)
    assert eval_Gstar(q, -f, np.zeros(6)) == 0.0
    assert eval_Jstar(q, -f, np.zeros(6)) == eval_Fstar(q, -f)


def test_Gstar_domain_error_names_worst_node():
    p = GLProblem.create(Grid.unit(5))
    v0 = np.zeros(5)
    v0[3] = -0.6 * p.K
    with pytest.raises(DomainError) as info:
        eval_Gstar(p, np.zeros(5), v0)
    assert info.value.node == 3


@given(small_grids, st.integers(0, 2**31 - 1))
def test_fenchel_young_inequality(grid, seed):
    # G*(v1, v0) >= <u, v1> + <v, v0> - G(u, v) for every (u, v)
    rng = np.random.default_rng(seed)
    g = Grid(*grid)
    p = GLProblem.create(g, beta=rng.uniform(0.1, 2), f=rng.standard_normal(g.N))
    v1 = rng.standard_normal(g.N)
    v0 = -0.5 * p.K + p.K * rng.uniform(0.01, 2.0, g.N)
    u, v = rng.standard_normal(g.N), rng.standard_normal(g.N)
    G = (0.5 * p.alpha * g.weight * np.sum((u**2 - p.beta + v) ** 2)
         + 0.5 * p.K * inner(g, u, u) - inner(g, u, p.f))
    assert eval_Gstar(p, v1, v0) >= inner(g, u, v1) + inner(g, v, v0) - G - 1e-12


# ----------------------------------------------------------------------------
# dual point and inner supremum


def test_dual_point_examples():
    g = Grid.unit(4)
    f = np.array([0.1, -0.2, 0.3, 0.0])
    p = GLProblem.create(g, alpha=1.3, beta=0.7, f=f)
    dp = build_dual_point(p, np.zeros(4))
    assert_allclose(dp.v0s, -1.3 * 0.7)
    assert_allclose(dp.v1s, -f)
    dp = build_dual_point(p, np.full(4, np.sqrt(0.7)))
    assert_allclose(dp.v0s, 0.0, atol=1e-15)
    assert_allclose(dp.v1s, p.K * np.sqrt(0.7) - f, rtol=1e-14)


@given(small_grids, st.integers(0, 2**31 - 1))
def test_inner_argmax_is_stationary_and_maximal(grid, seed):
    rng = np.random.default_rng(seed)
    g = Grid(*grid)
    p = GLProblem.create(g, beta=rng.uniform(0.1, 2), f=rng.standard_normal(g.N))
    v1 = rng.standard_normal(g.N) * 2
    value, t = reduced_Jtilde(p, v1)
    assert in_Astar(p, t)
    _, d0 = stationarity_residuals(p, v1, t)
    assert np.max(np.abs(d0)) <= 1e-8 * max(1.0, p.beta)
    for _ in range(5):
        other = -0.5 * p.K + p.K * rng.uniform(1e-3, 2.0, g.N)
        assert eval_Jstar(p, v1, other) <= value + 1e-12 * max(1.0, abs(value))


def test_inner_argmax_zero_source():
    g = Grid.unit(3)
    p = GLProblem.create(g, alpha=0.5, beta=2.0)
    value, t = reduced_Jtilde(p, np.zeros(3))
    assert_allclose(t, -1.0, rtol=1e-14)
    assert value == pytest.approx(0.5 * 0.5 * 4.0 * g.volume, rel=1e-12)


def test_inner_argmax_degenerate_raises():
    p = unit_spacing(4, beta=3.0)
    assert p.alpha * p.beta > 0.5 * p.K
    with pytest.raises(DomainError):
        inner_argmax_v0(p, np.zeros(4))


# ----------------------------------------------------------------------------
# reduced functionals over v1


def test_reduced_J1_zero_source():
    g = Grid.unit(6)
    p = GLProblem.create(g, beta=0.5)
    value, v1 = reduced_J1(p, np.full(6, -0.5))
    assert_allclose(v1, 0.0, atol=1e-15)
    assert value == pytest.approx(0.5 * 0.25 * g.volume, rel=1e-12)


@given(st.integers(0, 2**31 - 1))
def test_reduced_J1_is_infimum(seed):
    rng = np.random.default_rng(seed)
    p = unit_spacing(6, beta=0.5, f=rng.standard_normal(6))
    v0 = sample_C_feasible(p, rng)
    value, arg = reduced_J1(p, v0)
    d1, _ = stationarity_residuals(p, arg, v0)
    assert np.max(np.abs(d1)) <= 1e-10 * max(1.0, np.max(np.abs(arg)))
    for _ in range(5):
        v1 = arg + rng.standard_normal(6) * rng.uniform(0.01, 3)
        assert eval_Jstar(p, v1, v0) >= value - 1e-12


@given(st.integers(0, 2**31 - 1))
def test_reduced_J2_over_v1_is_supremum(seed):
    rng = np.random.default_rng(seed)
    p = unit_spacing(6, gamma=0.25, f=rng.standard_normal(6))
    lam_max = p.gamma * p.grid.laplacian_extremes[1]
    # -K < 2 v0 < -gamma lambda_max(-L): A* holds and -gamma L + 2 v0 < 0
    v0 = 0.5 * (-p.K + (p.K - lam_max) * rng.uniform(0.05, 0.95, 6))
    value, arg = reduced_J2_over_v1(p, v0)
    for _ in range(5):
        v1 = arg + rng.standard_normal(6) * rng.uniform(0.01, 3)
        assert eval_Jstar(p, v1, v0) <= value + 1e-12


def test_reduced_v1_problems_reject_wrong_sign():
    p = unit_spacing(6)
    with pytest.raises(IndefiniteOperatorError, match="reduced_J2"):
        reduced_J1(p, np.full(6, -0.45 * p.K))
    with pytest.raises(IndefiniteOperatorError):
        reduced_J2_over_v1(p, np.zeros(6))


def test_reduced_J2_global_exact_when_feasible():
    p = unit_spacing(6, beta=0.02, f=0.05)
    v1 = build_dual_point(p, certified(p).u0).v1s
    sup = reduced_J2_global(p, v1)
    assert sup.exact
    assert sup.value == reduced_Jtilde(p, v1).value


@given(st.integers(0, 2**31 - 1))
def test_reduced_J2_global_monotone_in_budget(seed):
    rng = np.random.default_rng(seed)
    p = unit_spacing(5, beta=1.0, f=0.1 * rng.standard_normal(5))
    v1 = 3.0 * rng.standard_normal(5)
    values = [reduced_J2_global(p, v1, sampler_budget=b).value for b in (1, 4, 16)]
    assert values[0] <= values[1] <= values[2]
    # a constrained supremum never exceeds the unconstrained one
    assert values[2] <= reduced_Jtilde(p, v1).value + 1e-12


# ----------------------------------------------------------------------------
# gap checks


def test_gap_zero_source_origin():
    p = unit_spacing(8, beta=0.02)
    cp = certified(p)
    rep = verify_gap(p, cp, "T1_item1", gap_tol=1e-10)
    assert rep.passed and abs(rep.gap) <= 1e-10
    assert rep.details["argmax_deviation"] <= 1e-8


def test_gap_global_case_nonzero_source():
    p = unit_spacing(8, beta=1.0, f=0.1)
    cp = certified(p, "plus_bump")
    assert TheoremCase.T1_ITEM2 in applicable_cases(p, cp)
    rep = verify_gap(p, cp, TheoremCase.T1_ITEM2)
    assert rep.passed and rep.rel_gap <= 1e-8
    assert rep.details["constrained_sup_exact"]


def test_gap_local_maximum():
    p = unit_spacing(8, beta=2.13, f=0.01)
    cp = certified(p)
    assert cp.hessian_class == HessianClass.NEGATIVE_DEFINITE
    for case in ("T1_item3", "T2_case3"):
        assert verify_gap(p, cp, case).rel_gap <= 1e-8


def test_gap_minimum_with_negative_operator():
    g = Grid((9.0,), (8,))
    u0 = np.full(8, 0.68)
    p = GLProblem.create(g, gamma=0.25, f=manufactured_source(g, 0.25, 1.0, 1.0, u0))
    cp = find_critical_point(p, u0)
    assert TheoremCase.T2_CASE2 in applicable_cases(p, cp)
    assert verify_gap(p, cp, "T2_case2").rel_gap <= 1e-8


def test_gap_rejects_perturbed_point():
    p = unit_spacing(8, beta=1.0, f=0.1)
    cp = certified(p, "plus_bump")
    noisy = type(cp)(cp.u0 + 1e-2 * np.random.default_rng(0).standard_normal(8),
                     cp.residual_norm, cp.hessian_class, cp.lam_min, cp.lam_max)
    with pytest.raises(HypothesisError, match="residual"):
        verify_gap(p, noisy, "T1_item1")


def test_gap_rejects_unmet_hypothesis():
    p = unit_spacing(8, beta=0.02, f=0.05)
    cp = certified(p)
    with pytest.raises(HypothesisError, match="negative definite"):
        verify_gap(p, cp, "T1_item3")


# ----------------------------------------------------------------------------
# second variations


def test_second_variation_origin_positive():
    p = unit_spacing(8, beta=0.02)
    rep = verify_second_derivative_correspondence(p, certified(p))
    assert rep.primal_class == HessianClass.POSITIVE_DEFINITE
    assert rep.jtilde_class == HessianClass.POSITIVE_DEFINITE
    assert rep.passed
    assert rep.symmetry_defect <= 1e-6


def test_second_variation_origin_negative():
    p = unit_spacing(8, beta=2.13)
    rep = verify_second_derivative_correspondence(p, certified(p))
    assert rep.primal_class == HessianClass.NEGATIVE_DEFINITE
    assert rep.jtilde_class == HessianClass.NEGATIVE_DEFINITE
    assert rep.v0_reduced_class == HessianClass.NEGATIVE_DEFINITE
    assert rep.passed


def test_second_variation_closed_form_denominator():
    p = unit_spacing(8, beta=1.0, f=0.1)
    rep = verify_second_derivative_correspondence(p, certified(p, "plus_bump"))
    assert rep.closed_form_defect <= 1e-6
    assert rep.alt_denominator_defect > 1e3 * rep.closed_form_defect
    assert rep.v0_closed_form_defect <= 1e-6


def test_second_variation_value_mode_agrees():
    p = unit_spacing(6, beta=0.5, f=0.1)
    cp = certified(p, "plus_bump")
    a = verify_second_derivative_correspondence(p, cp)
    b = verify_second_derivative_correspondence(p, cp, probe_eps=1e-3, mode="value")
    assert a.jtilde_class == b.jtilde_class
    assert a.v0_reduced_class == b.v0_reduced_class


def test_second_variation_size_limit():
    p = GLProblem.create(Grid.unit(65))
    with pytest.raises(ValueError):
        verify_second_derivative_correspondence(p, certified(p))


# ----------------------------------------------------------------------------
# feasible set and sampled statements


def test_membership_examples():
    p = unit_spacing(6, gamma=0.7)
    assert membership_C(p, np.ones(6)) == (True, True)
    assert membership_C(p, np.full(6, -0.5 * p.K))[0] is False
    v0 = np.zeros(6)
    v0[2] = -0.45 * p.K
    op = 0.5 * p.stiffness.toarray() + np.diag(v0)
    assert extremal_eigs(op)[0] < 0
    assert membership_C(p, v0) == (True, False)


@given(st.integers(0, 2**31 - 1))
def test_Jstar_convex_in_v1_on_feasible_set(seed):
    rng = np.random.default_rng(seed)
    p = unit_spacing(5, beta=1.0, f=rng.standard_normal(5))
    v0 = sample_C_feasible(p, rng)
    a, b = rng.standard_normal(5) * 3, rng.standard_normal(5) * 3
    mid = eval_Jstar(p, 0.5 * (a + b), v0)
    assert mid <= 0.5 * (eval_Jstar(p, a, v0) + eval_Jstar(p, b, v0)) + 1e-12


def test_weak_duality_samples():
    p = unit_spacing(8, beta=1.0, f=0.1)
    rep = weak_duality_sample(p, n_samples=200, seed=3)
    assert rep.passed and rep.min_slack >= -1e-10


@given(st.integers(0, 1000), st.integers(1, 40))
def test_weak_duality_prefix_stable(seed, n):
    p = unit_spacing(5, beta=0.7, f=0.2)
    small = weak_duality_sample(p, n_samples=n, seed=seed)
    large = weak_duality_sample(p, n_samples=2 * n, seed=seed)
    assert_allclose(large.slacks[:n], small.slacks, rtol=0, atol=0)
    assert large.min_slack <= small.min_slack


def test_weak_duality_tight_at_minimizer():
    p = unit_spacing(8, beta=1.0, f=0.1)
    cp = certified(p, "plus_bump")
    dp = build_dual_point(p, cp.u0)
    assert all(membership_C(p, dp.v0s))
    assert abs(duality_slack(p, cp.u0, dp.v0s)) <= 1e-12 * max(1.0, abs(eval_J(p, cp.u0)))


def test_global_criterion():
    p = unit_spacing(8, beta=1.0, f=0.1)
    rep = global_criterion_sample(p, certified(p, "plus_bump"), n_samples=300)
    assert rep.passed
    q = unit_spacing(8, beta=0.5)
    with pytest.raises(HypothesisError):
        global_criterion_sample(q, certified(q))
