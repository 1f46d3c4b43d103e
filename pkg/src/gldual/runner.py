"""Verification pipelines behind the command line.

Each configured check becomes one or more records (one per start and
theorem case where those apply) with a status of ``pass``, ``fail``,
``not_applicable`` (a named theorem case whose hypotheses do not hold) or
``error`` (the Newton solver failed).
"""

from __future__ import annotations

import logging
import math

import numpy as np

from . import complex_gl as cgl
from . import dual
from .errors import ConvergenceError, FiniteDifferenceError, HypothesisError
from .grid_ops import Grid
from .primal import (
    GLProblem,
    bump,
    eval_J,
    find_critical_point,
    initial_guess,
    manufactured_source,
)

log = logging.getLogger(__name__)


def clean(x):
    """JSON-ready copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(x, dict):
        return {str(k): clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return [clean(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if hasattr(x, "value"):  # enums
        return x.value
    return x


def _record(exp, check, status, values=None, tolerances=None, case=None, start=None, message=None):
    return {
        "experiment": exp["name"],
        "check": check,
        "case": case,
        "start": start,
        "status": status,
        "values": clean(values or {}),
        "tolerances": clean(tolerances or {}),
        "message": message,
    }


# ----------------------------------------------------------------------------
# scalar problems


def build_scalar_problem(exp):
    g = exp["grid"]
    grid = Grid(tuple(g["extent"]), tuple(g["n"]))
    prm = exp["params"]
    src = exp["source"]
    u_exact = None
    if src["type"] == "zero":
        f = 0.0
    elif src["type"] == "constant":
        f = src["value"]
    elif src["type"] == "random":
        f = src["amplitude"] * np.random.default_rng(src["seed"]).uniform(-1.0, 1.0, grid.N)
    else:
        u0 = src["u0"]
        u_exact = np.full(grid.N, u0["value"]) if u0["type"] == "constant" else u0["value"] * bump(grid)
        f = manufactured_source(grid, prm["gamma"], prm["alpha"], prm["beta"], u_exact)
    p = GLProblem.create(grid, prm["gamma"], prm["alpha"], prm["beta"], f=f, margin=exp["K_margin"])
    return p, u_exact


def _start_vector(p, start, seed, u_exact):
    if start == "manufactured":
        if u_exact is None:
            raise HypothesisError("start 'manufactured' needs a manufactured source")
        return u_exact
    return initial_guess(p, start, seed=seed)


def _grid_values(p):
    return {"h": p.grid.h[0], "N": p.grid.N, "gamma": p.gamma, "alpha": p.alpha,
            "beta": p.beta, "K": p.K}


def _gap_records(exp, p, start, cp, spec):
    if spec["cases"] == "auto":
        cases = [c.value for c in dual.applicable_cases(p, cp)]
        if not cases:
            return [_record(exp, "gap", "not_applicable", _grid_values(p), start=start,
                            message="no theorem case applies at this critical point")]
    else:
        cases = spec["cases"]
    out = []
    for case in cases:
        try:
            r = dual.verify_gap(p, cp, case, gap_tol=spec["tol"],
                                newton_tol=max(exp["newton_tol"], 1e-12),
                                sampler_budget=spec["sampler_budget"])
        except HypothesisError as exc:
            out.append(_record(exp, "gap", "not_applicable", _grid_values(p), case=case,
                               start=start, message=str(exc)))
            continue
        vals = dict(_grid_values(p), J_primal=r.J_primal, J_dual=r.J_dual, gap=r.gap,
                    rel_gap=r.rel_gap, **r.details)
        out.append(_record(exp, "gap", "pass" if r.passed else "fail", vals,
                           {"gap_tol": spec["tol"]}, case=case, start=start))
    return out


def _second_variation_record(exp, p, start, cp, spec):
    tol = {"symmetry": 1e-6, "probe_eps": spec["probe_eps"]}
    try:
        r = dual.verify_second_derivative_correspondence(p, cp, probe_eps=spec["probe_eps"],
                                                         mode=spec["mode"])
    except HypothesisError as exc:
        return _record(exp, "second_variation", "not_applicable", _grid_values(p), tol,
                       start=start, message=str(exc))
    except (ValueError, FiniteDifferenceError) as exc:
        return _record(exp, "second_variation", "fail", _grid_values(p), tol, start=start,
                       message=str(exc))
    vals = dict(
        _grid_values(p),
        primal_class=r.primal_class,
        primal_lam_min=r.primal_lam[0],
        bstar_class=r.bstar_class,
        jtilde_class=r.jtilde_class,
        v0_reduced_class=r.v0_reduced_class,
        symmetry_defect=r.symmetry_defect,
        closed_form_defect=r.closed_form_defect,
        alt_denominator_defect=r.alt_denominator_defect,
        v0_closed_form_defect=r.v0_closed_form_defect,
        correspondences=r.correspondences,
        notes=r.notes,
    )
    ok = r.passed and r.symmetry_defect <= 1e-6
    return _record(exp, "second_variation", "pass" if ok else "fail", vals, tol, start=start)


def _histogram(slacks, bins=20):
    counts, edges = np.histogram(slacks, bins=bins)
    return {"edges": edges, "counts": counts}


def _global_record(exp, p, start, cp, spec):
    try:
        r = dual.global_criterion_sample(p, cp, n_samples=spec["n_samples"], seed=exp["seed"],
                                         tol=spec["tol"])
    except HypothesisError as exc:
        return _record(exp, "global_criterion", "not_applicable", _grid_values(p), start=start,
                       message=str(exc))
    vals = dict(_grid_values(p), n_samples=r.n_samples, min_slack=r.min_slack,
                violations=r.violations)
    return _record(exp, "global_criterion", "pass" if r.passed else "fail", vals,
                   {"tol": spec["tol"]}, start=start)


def run_scalar(exp):
    p, u_exact = build_scalar_problem(exp)
    records = []
    points = {}
    for start in exp["starts"]:
        try:
            u_init = _start_vector(p, start, exp["seed"], u_exact)
            points[start] = find_critical_point(p, u_init, newton_tol=exp["newton_tol"],
                                                max_iters=exp["max_iters"])
        except (ConvergenceError, HypothesisError) as exc:
            records.append(_record(exp, "newton", "error", _grid_values(p), start=start,
                                   message=str(exc)))
    for spec in exp["checks"]:
        name = spec["check"]
        if name == "analytic_zero":
            records.append(_analytic_zero_record(exp, p, spec))
        elif name == "weak_duality":
            r = dual.weak_duality_sample(p, n_samples=spec["n_samples"], seed=exp["seed"],
                                         tol=spec["tol"])
            vals = dict(_grid_values(p), n_samples=r.n_samples, min_slack=r.min_slack,
                        violations=r.violations, slack_histogram=_histogram(r.slacks))
            records.append(_record(exp, "weak_duality", "pass" if r.passed else "fail", vals,
                                   {"tol": spec["tol"]}))
        else:
            for start, cp in points.items():
                if name == "gap":
                    records.extend(_gap_records(exp, p, start, cp, spec))
                elif name == "second_variation":
                    records.append(_second_variation_record(exp, p, start, cp, spec))
                elif name == "global_criterion":
                    records.append(_global_record(exp, p, start, cp, spec))
    return records


def _analytic_zero_record(exp, p, spec):
    tol = spec["tol"]
    if np.any(p.f != 0.0):
        return _record(exp, "analytic_zero", "fail", _grid_values(p), {"tol": tol},
                       message="the analytic zero-gap case needs f = 0")
    J0 = eval_J(p, np.zeros(p.grid.N))
    expected = 0.5 * p.alpha * p.beta**2 * p.grid.volume
    Jstar = dual.eval_Jstar(p, -p.f, np.full(p.grid.N, -p.alpha * p.beta))
    vals = dict(_grid_values(p), J_primal=J0, expected=expected, J_dual=Jstar, gap=J0 - Jstar)
    ok = (abs(J0 - expected) <= tol * max(1.0, abs(expected))
          and abs(J0 - Jstar) <= tol * max(1.0, abs(J0)))
    return _record(exp, "analytic_zero", "pass" if ok else "fail", vals, {"tol": tol})


# ----------------------------------------------------------------------------
# complex problems


def build_complex_problem(exp, refine=1, zero_source=False):
    g = exp["grid"]
    prm = dict(exp["params"])
    t = prm.pop("temperature")
    if t is not None:
        prm.update(cgl.gl_temperature_params(t))
    if prm["magnetic_weight"] is None:
        prm["magnetic_weight"] = cgl.MAGNETIC_WEIGHT
    cells = tuple(c * refine for c in g["cells"])
    p = cgl.ComplexGLProblem.create(cells, extent=tuple(g["extent"]), margin=g["margin"] * refine,
                                    edges=g["edges"], **prm)
    src = exp["source"]
    if zero_source or src["type"] == "zero":
        return p
    if src["type"] == "constant":
        f = np.full(p.n_omega, src["value"], dtype=complex)
    else:
        rng = np.random.default_rng(src["seed"])
        f = src["amplitude"] * (rng.uniform(-1, 1, p.n_omega) + 1j * rng.uniform(-1, 1, p.n_omega))
    return cgl.ComplexGLProblem(p.mesh, p.block, p.gamma, p.alpha, p.beta, p.rho, f, p.B0,
                                p.magnetic_weight, p.edges)


def _complex_values(p):
    return {"h": p.mesh.h[0], "N_omega": p.n_omega, "gamma": p.gamma, "alpha": p.alpha,
            "beta": p.beta, "rho": p.rho, "magnetic_weight": p.magnetic_weight}


def _gauge_record(exp, spec):
    defects, hs = [], []
    mod_err = curl_err = 0.0
    for k in range(spec["levels"]):
        # the source pairing is not gauge invariant, so f = 0 here
        pk = build_complex_problem(exp, refine=2**k, zero_source=True)
        phi, A, chi = cgl.smooth_fields(pk, seed=exp["seed"])
        phi2, A2 = cgl.gauge_transform(pk, phi, A, chi)
        mod_err = max(mod_err, float(np.max(np.abs(np.abs(phi2) - np.abs(phi)))))
        curl_err = max(curl_err, float(np.max(np.abs(pk.mesh.curl @ (A2 - A)))))
        defects.append(cgl.gauge_defect(pk, phi, A, chi))
        hs.append(pk.mesh.h[0])
    ratios = [a / b if b > 0 else math.inf for a, b in zip(defects, defects[1:])]
    ok = all(r >= spec["factor"] for r in ratios) and mod_err <= 1e-12 and curl_err <= 1e-10
    vals = {"h": hs, "defect": defects, "ratios": ratios, "modulus_error": mod_err,
            "curl_error": curl_err}
    return _record(exp, "gauge", "pass" if ok else "fail", vals, {"factor": spec["factor"]})


def _coulomb_record(exp, p, spec):
    rng = np.random.default_rng(exp["seed"])
    A = rng.standard_normal(p.mesh.n_edges)
    Ap = cgl.coulomb_project(p, A)
    nrm = float(np.linalg.norm(A))
    div_res = cgl.div_residual(p, Ap)
    idem = float(np.max(np.abs(cgl.coulomb_project(p, Ap) - Ap)))
    curl = float(np.max(np.abs(p.mesh.curl @ (Ap - A))))
    ok = div_res <= spec["tol"] * nrm and idem <= 1e-10 and curl <= 1e-10
    vals = dict(_complex_values(p), div_residual=div_res, A_norm=nrm, idempotence=idem,
                curl_change=curl)
    return _record(exp, "coulomb", "pass" if ok else "fail", vals, {"tol": spec["tol"]})


def _conjugates_record(exp, p, spec):
    """Fenchel-Young equality at a pair built to be dual to (phi, A)."""
    rng = np.random.default_rng(exp["seed"])
    z = rng.standard_normal(p.n_omega) + 1j * rng.standard_normal(p.n_omega)
    phi = z / np.abs(z) * np.sqrt(abs(p.beta) + rng.uniform(0.5, 1.5, p.n_omega))
    A = cgl.coulomb_project(p, rng.standard_normal(p.mesh.n_edges))
    v1 = p.gamma * (p.covariant_operator(A) @ phi)
    v3 = p.alpha * (np.abs(phi) ** 2 - p.beta)
    f = p.covariant_adjoint(A, v1) + 2.0 * v3 * phi
    q = cgl.ComplexGLProblem(p.mesh, p.block, p.gamma, p.alpha, p.beta, p.rho, f, p.B0,
                             p.magnetic_weight, p.edges)
    J = cgl.eval_J_complex(q, phi, A)
    bound = cgl.dual_lower_bound(q, v1, v3, A)
    gap = J - bound
    ok = abs(gap) <= spec["tol"] * max(1.0, abs(J))
    vals = dict(_complex_values(p), J_primal=J, J_dual=bound, gap=gap)
    return _record(exp, "conjugates", "pass" if ok else "fail", vals, {"tol": spec["tol"]})


def run_complex(exp):
    p = build_complex_problem(exp)
    records = []
    for spec in exp["checks"]:
        name = spec["check"]
        if name == "gauge":
            records.append(_gauge_record(exp, spec))
        elif name == "coulomb":
            records.append(_coulomb_record(exp, p, spec))
        elif name == "conjugates":
            records.append(_conjugates_record(exp, p, spec))
        elif name == "weak_duality":
            r = cgl.weak_duality_complex(p, n_samples=spec["n_samples"], seed=exp["seed"],
                                         tol=spec["tol"], reduced_every=spec["reduced_every"])
            vals = dict(_complex_values(p), n_samples=r.n_samples, min_slack=r.min_slack,
                        violations=r.violations, min_reduced_slack=r.min_reduced_slack,
                        b2_certified=r.b2_certified, slack_histogram=_histogram(r.slacks))
            records.append(_record(exp, "weak_duality", "pass" if r.passed else "fail", vals,
                                   {"tol": spec["tol"]}))
    return records


def run_experiment(exp):
    log.info("running experiment %s", exp["name"])
    if exp["kind"] == "scalar":
        return run_scalar(exp)
    return run_complex(exp)
