"""Conjugate functionals of the real Ginzburg-Landau problem and the duality
checks built on them.

With M = K I + gamma L (SPD by the choice of K) the primal functional splits
as J(u) = G(u, 0) - F(u) where

    F(u)    = 1/2 <u, M u>
    G(u, v) = alpha/2 sum_w (u^2 - beta + v)^2 + K/2 <u, u> - <u, f>.

Their conjugates have the closed forms

    F*(v1)     = 1/2 <v1, M^-1 v1>
    G*(v1, v0) = sum_w [ (v1 + f)^2 / (2 (2 v0 + K)) + v0^2 / (2 alpha) + beta v0 ]

(the latter on A* = {2 v0 + K > 0}) and J*(v1, v0) = F*(v1) - G*(v1, v0).
A critical point u0 of J maps to the dual pair

    v0_hat = alpha (u0^2 - beta),   v1_hat = (2 v0_hat + K) u0 - f.

All reduced functionals below return values of the same scale as J, and
Euclidean derivatives carry the quadrature weight.
"""

from __future__ import annotations

import enum
import logging
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    DomainError,
    FiniteDifferenceError,
    HypothesisError,
    IndefiniteOperatorError,
)
from .grid_ops import SPDFactor, extremal_eigs, inner
from .primal import (
    HessianClass,
    classify_spectrum,
    default_class_tol,
    eval_J,
    grad_J,
    hess_J,
)

log = logging.getLogger(__name__)

# strictness margins for the open sets A* and B*
ASTAR_RTOL = 1e-10
BSTAR_RTOL = 1e-10


class TheoremCase(str, enum.Enum):
    T1_ITEM1 = "T1_item1"
    T1_ITEM2 = "T1_item2"
    T1_ITEM3 = "T1_item3"
    T2_CASE1 = "T2_case1"
    T2_CASE2 = "T2_case2"
    T2_CASE3 = "T2_case3"
    T4_GLOBAL = "T4_global"


@dataclass(frozen=True, eq=False)
class DualPoint:
    v0s: np.ndarray
    v1s: np.ndarray
    in_Astar: bool
    in_Bstar: bool
    bstar_lam_min: float = float("nan")


@dataclass
class GapReport:
    J_primal: float
    J_dual: float
    gap: float
    rel_gap: float
    theorem_case: TheoremCase
    passed: bool
    gap_tol: float
    details: dict = field(default_factory=dict)


class ReducedValue(NamedTuple):
    value: float
    arg: np.ndarray


class ConstrainedSup(NamedTuple):
    """Best value of the A*-and-B*-constrained supremum found so far.

    ``exact`` is True when the unconstrained maximiser was feasible, in which
    case ``value`` is the supremum itself; otherwise it is a lower bound.
    """

    value: float
    arg: np.ndarray
    exact: bool


# ----------------------------------------------------------------------------
# membership tests


def astar_margin(p, v0s, coeff=2.0):
    """min over nodes of ``coeff * v0 + K``; A* uses coeff 2 by default."""
    return float(np.min(coeff * np.asarray(v0s) + p.K))


def in_Astar(p, v0s, coeff=2.0):
    return bool(astar_margin(p, v0s, coeff) > ASTAR_RTOL * p.K)


def bstar_operator(p, v0s):
    """-gamma L + 2 diag(v0), the operator whose positivity defines B*."""
    return (p.stiffness + sp.diags(2.0 * np.asarray(v0s, dtype=float))).tocsr()


def _definite_tol(lam_min, lam_max, rtol):
    return rtol * max(abs(lam_min), abs(lam_max), 1e-300)


def in_Bstar(p, v0s):
    lam_min, lam_max = extremal_eigs(bstar_operator(p, v0s))
    return bool(lam_min > _definite_tol(lam_min, lam_max, BSTAR_RTOL))


def membership_C(p, v0s):
    """Flags (in_B1, in_B2) of the feasible set C* = B1 and B2.

    B1 is node-wise ``2 v0 + K > 0``; B2 asks that
    ``gamma/2 <u, -L u> + <v0 u, u>`` be positive for u != 0, i.e. that
    ``-(gamma/2) L + diag(v0)`` be positive definite.
    """
    v0s = np.asarray(v0s, dtype=float)
    p.grid.check(v0s)
    op = (0.5 * p.stiffness + sp.diags(v0s)).tocsr()
    lam_min, lam_max = extremal_eigs(op)
    return in_Astar(p, v0s), bool(lam_min > _definite_tol(lam_min, lam_max, BSTAR_RTOL))


def _is_positive_definite(op):
    try:
        SPDFactor(op)
    except IndefiniteOperatorError:
        return False
    return True


def _feasible(p, v0s):
    """Cheap strict A* and B* test by attempted factorisation."""
    if not in_Astar(p, v0s):
        return False
    op = bstar_operator(p, v0s)
    scale = max(1.0, float(abs(op).max()))
    return _is_positive_definite(op - BSTAR_RTOL * scale * sp.identity(p.grid.N))


# ----------------------------------------------------------------------------
# conjugates


def eval_Fstar(p, v1s):
    v1s = np.asarray(v1s, dtype=float)
    p.grid.check(v1s)
    return 0.5 * inner(p.grid, v1s, p.shifted_factor.solve(v1s))


def _check_Astar_domain(p, v0s):
    s = 2.0 * v0s + p.K
    if not np.all(s > 0.0):
        node = int(np.argmin(s))
        raise DomainError(
            f"2*v0 + K must be positive at every node; node {node} has {s[node]:.3e}",
            node=node,
        )
    return s


def eval_Gstar(p, v1s, v0s):
    v1s = np.asarray(v1s, dtype=float)
    v0s = np.asarray(v0s, dtype=float)
    p.grid.check(v1s, v0s)
    s = _check_Astar_domain(p, v0s)
    c = v1s + p.f
    dens = c**2 / (2.0 * s) + v0s**2 / (2.0 * p.alpha) + p.beta * v0s
    return p.grid.weight * float(np.sum(dens))


def eval_Jstar(p, v1s, v0s):
    return eval_Fstar(p, v1s) - eval_Gstar(p, v1s, v0s)


def stationarity_residuals(p, v1s, v0s):
    """Node-wise partial derivatives of J* divided by the quadrature weight.

    Returns ``(M^-1 v1 - (v1 + f)/(2 v0 + K),
    (v1 + f)^2/(2 v0 + K)^2 - v0/alpha - beta)``.
    """
    v1s = np.asarray(v1s, dtype=float)
    v0s = np.asarray(v0s, dtype=float)
    s = _check_Astar_domain(p, v0s)
    c = v1s + p.f
    d1 = p.shifted_factor.solve(v1s) - c / s
    d0 = (c / s) ** 2 - v0s / p.alpha - p.beta
    return d1, d0


# ----------------------------------------------------------------------------
# dual point and reduced functionals


def build_dual_point(p, u0):
    u0 = np.asarray(u0, dtype=float)
    p.grid.check(u0)
    v0s = p.alpha * (u0**2 - p.beta)
    v1s = (2.0 * v0s + p.K) * u0 - p.f
    lam_min, lam_max = extremal_eigs(bstar_operator(p, v0s))
    return DualPoint(
        v0s=v0s,
        v1s=v1s,
        in_Astar=in_Astar(p, v0s),
        in_Bstar=bool(lam_min > _definite_tol(lam_min, lam_max, BSTAR_RTOL)),
        bstar_lam_min=float(lam_min),
    )


def inner_argmax_v0(p, v1s, iters=200):
    """Node-wise maximiser over A* of ``v0 -> J*(v1, v0)``.

    Each node minimises the convex function
    ``c^2 / (2 (2t + K)) + t^2 / (2 alpha) + beta t`` on ``t > -K/2`` with
    ``c = v1 + f``.  Its derivative ``t/alpha + beta - c^2/(2t + K)^2`` is
    increasing, so bisection on a bracket ``(-K/2, t_hi]`` followed by a
    Newton polish finds the unique stationary point.
    """
    v1s = np.asarray(v1s, dtype=float)
    p.grid.check(v1s)
    K, alpha, beta = p.K, p.alpha, p.beta
    c2 = (v1s + p.f) ** 2

    def slope(t):
        return c2 / (2.0 * t + K) ** 2 - t / alpha - beta

    lo = np.full_like(v1s, -0.5 * K)
    hi = np.maximum(0.0, alpha * (c2 / K**2 - beta))
    # with c = 0 the sup is attained only if -alpha*beta lies inside A*
    degenerate = (c2 == 0.0) & (-alpha * beta <= -0.5 * K * (1.0 - ASTAR_RTOL))
    if np.any(degenerate):
        node = int(np.flatnonzero(degenerate)[0])
        raise DomainError(
            f"no stationary point inside A* at node {node}: the supremum over v0 "
            "is approached on the boundary 2*v0 + K = 0",
            node=node,
        )
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        with np.errstate(divide="ignore"):
            pos = slope(mid) > 0.0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
        if np.all(hi - lo <= 4.0 * np.finfo(float).eps * np.maximum(np.abs(mid), 1.0)):
            break
    t = 0.5 * (lo + hi)
    for _ in range(2):
        s = 2.0 * t + K
        d = -4.0 * c2 / s**3 - 1.0 / alpha
        t_new = t - slope(t) / d
        t = np.where((t_new > -0.5 * K) & np.isfinite(t_new), t_new, t)
    return t


def reduced_Jtilde(p, v1s):
    """``sup over v0 in A*`` of J*(v1, v0), with its maximiser."""
    t = inner_argmax_v0(p, v1s)
    if not in_Astar(p, t):
        node = int(np.argmin(2.0 * t + p.K))
        raise DomainError("inner maximiser left A*", node=node)
    return ReducedValue(eval_Jstar(p, v1s, t), t)


def _solve_v1_stationarity(p, v0s, sign):
    """Stationary v1 of ``v1 -> J*(v1, v0)``.

    The condition ``M^-1 v1 = (v1 + f)/(2 v0 + K)`` becomes, with
    ``u = M^-1 v1``, the sparse system ``(-gamma L + 2 diag(v0)) u = f``.
    ``sign`` is +1 when that operator must be positive definite (an infimum)
    and -1 when it must be negative definite (a supremum).
    """
    v0s = np.asarray(v0s, dtype=float)
    p.grid.check(v0s)
    _check_Astar_domain(p, v0s)
    op = bstar_operator(p, v0s)
    try:
        factor = SPDFactor(sign * op)
    except IndefiniteOperatorError as exc:
        if sign > 0:
            msg = ("-gamma L + 2 v0 is not positive definite, so the infimum over v1 "
                   "is -inf; use reduced_J2_over_v1 when it is negative definite")
        else:
            msg = ("-gamma L + 2 v0 is not negative definite, so the supremum over v1 "
                   "is +inf; use reduced_J1 when it is positive definite")
        raise IndefiniteOperatorError(msg) from exc
    u = factor.solve(sign * p.f)
    v1 = p.shifted @ u
    return ReducedValue(eval_Jstar(p, v1, v0s), v1)


def reduced_J1(p, v0s):
    """``inf over v1`` of J*(v1, v0) when ``-gamma L + 2 v0`` is positive definite."""
    return _solve_v1_stationarity(p, v0s, +1.0)


def reduced_J2_over_v1(p, v0s):
    """``sup over v1`` of J*(v1, v0) when ``-gamma L + 2 v0`` is negative definite."""
    return _solve_v1_stationarity(p, v0s, -1.0)


def reduced_J2_global(p, v1s, sampler_budget=64, seed=0):
    """Lower bound on ``sup over v0 in A* and B*`` of J*(v1, v0).

    Start from the unconstrained maximiser; when it is infeasible, pull it
    back toward the strictly feasible centre v0 = 0 by halving until
    feasible.  Then ``sampler_budget`` seeded random perturbations of the
    incumbent are tried.  Candidate k depends only on candidates before it,
    so the result is monotone in the budget.
    """
    if sampler_budget < 1:
        raise ValueError("sampler_budget must be at least 1")
    v1s = np.asarray(v1s, dtype=float)
    p.grid.check(v1s)
    center = np.zeros(p.grid.N)
    try:
        target = inner_argmax_v0(p, v1s)
    except DomainError:
        target = center
    if _feasible(p, target):
        return ConstrainedSup(eval_Jstar(p, v1s, target), target, True)

    best = None
    theta = 1.0
    while theta > 1e-8:
        cand = center + theta * (target - center)
        if _feasible(p, cand):
            best = cand
            break
        theta *= 0.5
    if best is None:
        best = center
    if not _feasible(p, best):
        raise HypothesisError("no point of A* and B* found")
    best_val = eval_Jstar(p, v1s, best)
    step_scale = np.abs(target - best) + 1e-3 * (np.abs(best) + 1.0)
    for k in range(sampler_budget):
        rng = np.random.default_rng([seed, k])
        cand = best + rng.standard_normal(p.grid.N) * step_scale * 0.5 ** (k % 8)
        if _feasible(p, cand):
            val = eval_Jstar(p, v1s, cand)
            if val > best_val:
                best, best_val = cand, val
    return ConstrainedSup(best_val, best, False)


# ----------------------------------------------------------------------------
# theorem checks


def _hessian_spectrum(p, u0):
    lam_min, lam_max = extremal_eigs(hess_J(p, u0))
    return lam_min, lam_max, classify_spectrum(lam_min, lam_max, default_class_tol(lam_max))


def _operator_class(op):
    lam_min, lam_max = extremal_eigs(op)
    return lam_min, lam_max, classify_spectrum(lam_min, lam_max, _definite_tol(lam_min, lam_max, BSTAR_RTOL))


def case_hypotheses(p, u0):
    """Every flag that enters the hypotheses of the theorem cases."""
    dp = build_dual_point(p, u0)
    lam_min, lam_max, hclass = _hessian_spectrum(p, u0)
    b_min, b_max, bclass = _operator_class(bstar_operator(p, dp.v0s))
    return {
        "dual_point": dp,
        "in_Astar": dp.in_Astar,
        "in_Bstar": bclass == HessianClass.POSITIVE_DEFINITE,
        "bstar_negative": bclass == HessianClass.NEGATIVE_DEFINITE,
        "bstar_class": bclass,
        "hessian_class": hclass,
        "hessian_lam_min": lam_min,
        "hessian_lam_max": lam_max,
        "bstar_lam_min": b_min,
        "bstar_lam_max": b_max,
    }


def _case_requirements(case, h):
    pd = h["hessian_class"] == HessianClass.POSITIVE_DEFINITE
    nd = h["hessian_class"] == HessianClass.NEGATIVE_DEFINITE
    req = {"v0_hat in A*": h["in_Astar"]}
    if case == TheoremCase.T1_ITEM1:
        req["second variation positive definite"] = pd
    elif case == TheoremCase.T1_ITEM2:
        req["v0_hat in B*"] = h["in_Bstar"]
    elif case == TheoremCase.T1_ITEM3:
        req["second variation negative definite"] = nd
    elif case == TheoremCase.T2_CASE1:
        req["second variation positive definite"] = pd
        req["v0_hat in B*"] = h["in_Bstar"]
    elif case == TheoremCase.T2_CASE2:
        req["second variation positive definite"] = pd
        req["-gamma L + 2 v0_hat negative definite"] = h["bstar_negative"]
    elif case == TheoremCase.T2_CASE3:
        req["second variation negative definite"] = nd
        req["-gamma L + 2 v0_hat negative definite"] = h["bstar_negative"]
    elif case == TheoremCase.T4_GLOBAL:
        req["v0_hat in B2"] = h["in_Bstar"]
    return req


def applicable_cases(p, cp):
    """Theorem cases whose hypotheses hold at a critical point."""
    h = case_hypotheses(p, cp.u0)
    return [c for c in TheoremCase if all(_case_requirements(c, h).values())]


def verify_gap(p, cp, which, gap_tol=1e-8, newton_tol=1e-8, sampler_budget=64):
    """Compare J(u0) with the dual value the named theorem case pairs it with.

    The residual of ``cp.u0`` is recomputed, so a perturbed point fails the
    precondition even if ``cp`` still carries the old residual.
    """
    which = TheoremCase(which)
    u0 = np.asarray(cp.u0, dtype=float)
    res = float(np.linalg.norm(grad_J(p, u0)))
    if res > newton_tol:
        raise HypothesisError(
            f"not a certified critical point: residual {res:.3e} exceeds {newton_tol:g}"
        )
    h = case_hypotheses(p, u0)
    failed = [name for name, ok in _case_requirements(which, h).items() if not ok]
    if failed:
        raise HypothesisError(f"{which.value}: hypothesis failed: {', '.join(failed)}")
    dp = h["dual_point"]

    details = {
        "residual_norm": res,
        "hessian_class": h["hessian_class"].value,
        "hessian_lam_min": float(h["hessian_lam_min"]),
        "bstar_lam_min": float(h["bstar_lam_min"]),
        "in_Astar": h["in_Astar"],
        "in_Bstar": h["in_Bstar"],
    }
    if which in (TheoremCase.T1_ITEM1, TheoremCase.T1_ITEM3):
        dual, arg = reduced_Jtilde(p, dp.v1s)
        details["argmax_deviation"] = float(np.max(np.abs(arg - dp.v0s)))
    elif which == TheoremCase.T1_ITEM2:
        sup = reduced_J2_global(p, dp.v1s, sampler_budget=sampler_budget)
        dual = sup.value
        details["argmax_deviation"] = float(np.max(np.abs(sup.arg - dp.v0s)))
        details["constrained_sup_exact"] = sup.exact
    elif which in (TheoremCase.T2_CASE1, TheoremCase.T4_GLOBAL):
        dual, arg = reduced_J1(p, dp.v0s)
        details["argmin_deviation"] = float(np.max(np.abs(arg - dp.v1s)))
    else:
        dual, arg = reduced_J2_over_v1(p, dp.v0s)
        details["argmax_deviation"] = float(np.max(np.abs(arg - dp.v1s)))

    primal = float(eval_J(p, u0))
    dual = float(dual)
    gap = primal - dual
    rel = abs(gap) / max(1.0, abs(primal))
    return GapReport(
        J_primal=primal,
        J_dual=dual,
        gap=gap,
        rel_gap=rel,
        theorem_case=which,
        passed=bool(rel <= gap_tol),
        gap_tol=gap_tol,
        details=details,
    )


# ----------------------------------------------------------------------------
# second variations of the reduced functionals


def jtilde_gradient(p, v1s):
    """Euclidean gradient of v1 -> sup_v0 J*(v1, v0), by the envelope theorem."""
    t = inner_argmax_v0(p, v1s)
    c = v1s + p.f
    return p.grid.weight * (p.shifted_factor.solve(v1s) - c / (2.0 * t + p.K))


def v0_reduced_gradient(p, v0s):
    """Euclidean gradient of v0 -> J*(v1(v0), v0) with v1 stationary.

    This is J1* where ``-gamma L + 2 v0`` is positive definite and the
    v1-supremum J2* where it is negative definite.
    """
    op = bstar_operator(p, v0s).tocsc()
    with np.errstate(all="raise"), warnings.catch_warnings():
        warnings.simplefilter("error", spla.MatrixRankWarning)
        u = spla.spsolve(op, p.f)
    if not np.all(np.isfinite(u)):
        raise FloatingPointError("singular inner system")
    return p.grid.weight * (u**2 - v0s / p.alpha - p.beta)


def fd_hessian(grad, x, eps):
    """Central differences of a gradient map, one column per coordinate."""
    n = x.shape[0]
    H = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = eps
        try:
            H[:, j] = (grad(x + e) - grad(x - e)) / (2.0 * eps)
        except (DomainError, FloatingPointError, RuntimeError, np.linalg.LinAlgError,
                spla.MatrixRankWarning) as exc:
            raise FiniteDifferenceError(f"inner solve failed at probe {j}: {exc}", probe_index=j) from exc
    return H


def fd_hessian_values(fun, x, eps):
    """Four-point central second differences of a scalar function."""
    n = x.shape[0]
    H = np.empty((n, n))
    E = np.eye(n) * eps
    f0 = fun(x)
    for i in range(n):
        for j in range(i, n):
            if i == j:
                val = (fun(x + 2 * E[i]) - 2 * f0 + fun(x - 2 * E[i])) / (4 * eps**2)
            else:
                val = (fun(x + E[i] + E[j]) - fun(x + E[i] - E[j])
                       - fun(x - E[i] + E[j]) + fun(x - E[i] - E[j])) / (4 * eps**2)
            H[i, j] = H[j, i] = val
    return H


@dataclass
class SecondVariationReport:
    primal_class: HessianClass
    primal_lam: tuple
    bstar_class: HessianClass
    jtilde_class: HessianClass
    jtilde_lam: tuple
    v0_reduced_class: HessianClass | None
    v0_reduced_lam: tuple
    symmetry_defect: float
    closed_form_defect: float
    alt_denominator_defect: float
    v0_closed_form_defect: float
    correspondences: dict
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        return all(self.correspondences.values())


def _fd_class(H, rtol):
    lam = np.linalg.eigvalsh(0.5 * (H + H.T))
    tol = rtol * max(np.max(np.abs(lam)), 1e-300)
    return classify_spectrum(lam[0], lam[-1], tol), (float(lam[0]), float(lam[-1]))


def _rel(A, B):
    return float(np.linalg.norm(A - B, 2) / max(np.linalg.norm(B, 2), 1e-300))


def verify_second_derivative_correspondence(p, cp, probe_eps=None, fd_rtol=1e-6, mode="gradient"):
    """Finite-difference second variations of the reduced dual functionals
    at the dual point of ``cp``, classified and matched against the sign of
    the primal second variation.

    ``probe_eps`` is relative: the step is ``probe_eps * max(1, |x|_inf)``.
    ``mode="gradient"`` differences the envelope gradients (default step
    1e-5), ``mode="value"`` uses four-point differences of the functional
    values (default step 1e-3, since rounding grows like 1/eps^2 there).
    """
    if probe_eps is None:
        probe_eps = 1e-3 if mode == "value" else 1e-5
    N = p.grid.N
    if N > 64:
        raise ValueError("dense finite-difference Hessians are limited to N <= 64")
    u0 = np.asarray(cp.u0, dtype=float)
    h = case_hypotheses(p, u0)
    if not h["in_Astar"]:
        raise HypothesisError("v0_hat is not in A*; the reduced functionals are undefined")
    dp = h["dual_point"]
    w = p.grid.weight

    bclass = h["bstar_class"]
    v0_defined = bclass in (HessianClass.POSITIVE_DEFINITE, HessianClass.NEGATIVE_DEFINITE)
    notes = ["closed form uses the factor (2*v0 + K) * H; the (v0 + K) * H variant "
             "is reported as alt_denominator_defect"]

    eps1 = probe_eps * max(1.0, float(np.max(np.abs(dp.v1s))))
    eps0 = probe_eps * max(1.0, float(np.max(np.abs(dp.v0s))))
    if mode == "gradient":
        H1 = fd_hessian(lambda v: jtilde_gradient(p, v), dp.v1s, eps1)
        H0 = fd_hessian(lambda v: v0_reduced_gradient(p, v), dp.v0s, eps0) if v0_defined else None
    elif mode == "value":
        def jt(v):
            return reduced_Jtilde(p, v).value

        def j0(v):
            op = bstar_operator(p, v).tocsc()
            u = spla.spsolve(op, p.f)
            return eval_Jstar(p, p.shifted @ u, v)

        H1 = fd_hessian_values(jt, dp.v1s, eps1)
        H0 = fd_hessian_values(j0, dp.v0s, eps0) if v0_defined else None
    else:
        raise ValueError(f"unknown mode {mode!r}")

    c1, lam1 = _fd_class(H1, fd_rtol)
    sym = _rel(H1, H1.T)
    c0, lam0, closed0_defect = None, (float("nan"), float("nan")), float("nan")
    if v0_defined:
        sym = max(sym, _rel(H0, H0.T))
        c0, lam0 = _fd_class(H0, fd_rtol)
        B = bstar_operator(p, dp.v0s).toarray()
        U = np.diag(u0)
        closed0 = w * (-np.eye(N) / p.alpha - 4.0 * U @ np.linalg.solve(B, U))
        closed0_defect = _rel(H0, closed0)
    else:
        notes.append(f"-gamma L + 2 v0_hat is {bclass.value}; J1*/J2* are not defined "
                     "near v0_hat and their Hessian is skipped")

    # closed form: w (M^-1 - D^-1) with D = (2 v0 + K) H_fac, and the same
    # with (v0 + K) in place of (2 v0 + K) for comparison
    Minv = np.linalg.inv(p.shifted.toarray())
    hfac = 1.0 + 4.0 * p.alpha * u0**2 / (2.0 * dp.v0s + p.K)
    closed = w * (Minv - np.diag(1.0 / ((2.0 * dp.v0s + p.K) * hfac)))
    with np.errstate(divide="ignore"):
        alt = w * (Minv - np.diag(1.0 / ((dp.v0s + p.K) * hfac)))

    pd = h["hessian_class"] == HessianClass.POSITIVE_DEFINITE
    nd = h["hessian_class"] == HessianClass.NEGATIVE_DEFINITE
    HC = HessianClass
    corr = {
        "T1_item1": (not pd) or c1 == HC.POSITIVE_DEFINITE,
        "T1_item3": (not nd) or c1 == HC.NEGATIVE_DEFINITE,
        "T2_case1": (not (pd and h["in_Bstar"])) or c0 == HC.NEGATIVE_DEFINITE,
        "T2_case2": (not (pd and h["bstar_negative"])) or c0 == HC.POSITIVE_DEFINITE,
        "T2_case3": (not nd) or c0 == HC.NEGATIVE_DEFINITE,
    }
    return SecondVariationReport(
        primal_class=h["hessian_class"],
        primal_lam=(float(h["hessian_lam_min"]), float(h["hessian_lam_max"])),
        bstar_class=bclass,
        jtilde_class=c1,
        jtilde_lam=lam1,
        v0_reduced_class=c0,
        v0_reduced_lam=lam0,
        symmetry_defect=sym,
        closed_form_defect=_rel(H1, closed),
        alt_denominator_defect=_rel(H1, alt),
        v0_closed_form_defect=closed0_defect,
        correspondences=corr,
        notes=notes,
    )


# ----------------------------------------------------------------------------
# sampled weak duality and global optimality


@dataclass
class SampleReport:
    n_samples: int
    min_slack: float
    argmin: int
    violations: int
    tol: float
    slacks: np.ndarray = field(repr=False)

    @property
    def passed(self):
        return self.violations == 0


def sample_C_feasible(p, rng, spread=None):
    """Random v0 in C*: every node above ``-gamma lambda_min(-L) / 2``.

    Such a v0 makes ``-gamma L + 2 v0`` positive definite and, because
    K > gamma lambda_max(-L), also satisfies ``2 v0 + K > 0``.
    """
    floor = -0.5 * p.gamma * p.grid.laplacian_extremes[0]
    if spread is None:
        spread = 2.0 * p.alpha * p.beta + abs(floor)
    return floor * (1.0 - 1e-3) + spread * rng.uniform(0.0, 1.0, p.grid.N)


def sample_u(p, rng, center=None):
    """Random primal field: uniform noise around ``center`` at a random scale."""
    scale = np.sqrt(p.beta) * 10.0 ** rng.uniform(-3.0, 0.5)
    base = np.zeros(p.grid.N) if center is None else center
    return base + scale * rng.uniform(-1.0, 1.0, p.grid.N)


def duality_slack(p, u, v0s):
    """J(u) - J1*(v0); nonnegative for every u when v0 lies in C*."""
    return eval_J(p, u) - reduced_J1(p, v0s).value


def weak_duality_sample(p, n_samples=1000, seed=0, tol=1e-10):
    """Seeded check of ``J(u) >= inf_v1 J*(v1, v0)`` over u and v0 in C*.

    Sample k is drawn from ``default_rng([seed, k])`` so a larger
    ``n_samples`` extends, never changes, the sample set.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    slacks = np.empty(n_samples)
    for k in range(n_samples):
        rng = np.random.default_rng([seed, k])
        v0 = sample_C_feasible(p, rng)
        u = sample_u(p, rng)
        slacks[k] = duality_slack(p, u, v0)
    k_min = int(np.argmin(slacks))
    return SampleReport(n_samples, float(slacks[k_min]), k_min,
                        int(np.sum(slacks < -tol)), tol, slacks)


def global_criterion_sample(p, cp, n_samples=1000, seed=0, tol=1e-8):
    """Sampled surrogate of global minimality at a point with v0_hat in A* and B*.

    Returns the distribution of ``J(u) - J(u0)`` over random u (perturbations
    of u0 at many scales, plus unrelated fields).
    """
    dp = build_dual_point(p, cp.u0)
    if not (dp.in_Astar and dp.in_Bstar):
        raise HypothesisError("v0_hat must lie in A* and B* for the global criterion")
    J0 = eval_J(p, cp.u0)
    slacks = np.empty(n_samples)
    for k in range(n_samples):
        rng = np.random.default_rng([seed, k])
        center = cp.u0 if k % 2 == 0 else None
        slacks[k] = eval_J(p, sample_u(p, rng, center)) - J0
    k_min = int(np.argmin(slacks))
    return SampleReport(n_samples, float(slacks[k_min]), k_min,
                        int(np.sum(slacks < -tol)), tol, slacks)
