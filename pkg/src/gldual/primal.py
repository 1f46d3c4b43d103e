"""The real Ginzburg-Landau functional

    J(u) = gamma/2 <u, -L u> + alpha/2 sum_w (u^2 - beta)^2 - <u, f>

on a Dirichlet grid, its derivatives, a damped Newton search for critical
points and classification of the second variation.

Convention: :func:`grad_J` and :func:`hess_J` return the Euler-Lagrange
residual and its Jacobian.  The Euclidean gradient of :func:`eval_J` with
respect to the nodal values is ``grid.weight * grad_J`` and the Euclidean
Hessian is ``grid.weight * hess_J``.
"""

from __future__ import annotations

import enum
import logging
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, IndefiniteOperatorError
from .grid_ops import DEFAULT_K_MARGIN, Grid, SPDFactor, choose_K, extremal_eigs, inner

log = logging.getLogger(__name__)


class HessianClass(str, enum.Enum):
    POSITIVE_DEFINITE = "PositiveDefinite"
    NEGATIVE_DEFINITE = "NegativeDefinite"
    INDEFINITE = "Indefinite"
    SINGULAR = "Singular"


@dataclass(frozen=True, eq=False)
class GLProblem:
    """Data of the real functional: grid, gamma, alpha, beta, source f and
    the shift K that makes ``F(u) = 1/2 <u, (K I + gamma L) u>`` positive."""

    grid: Grid
    gamma: float
    alpha: float
    beta: float
    f: np.ndarray
    K: float

    def __post_init__(self):
        f = np.asarray(self.f, dtype=float)
        if f.ndim == 0:
            f = np.full(self.grid.N, float(f))
        self.grid.check(f)
        object.__setattr__(self, "f", f)
        for name in ("gamma", "alpha", "beta", "K"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        # K I + gamma L is definite iff K exceeds gamma * lambda_max(-L)
        if self.K <= self.gamma * self.grid.laplacian_extremes[1]:
            raise ValueError(
                f"K={self.K:g} does not make K I + gamma L positive definite "
                f"(needs K > {self.gamma * self.grid.laplacian_extremes[1]:g})"
            )

    @classmethod
    def create(cls, grid, gamma=1.0, alpha=1.0, beta=1.0, f=0.0, K=None, margin=DEFAULT_K_MARGIN):
        if K is None:
            K = choose_K(grid, gamma, margin)
        return cls(grid, float(gamma), float(alpha), float(beta), f, float(K))

    def with_params(self, **changes):
        """Copy with some of gamma/alpha/beta/f/K replaced (K kept unless given)."""
        data = dict(grid=self.grid, gamma=self.gamma, alpha=self.alpha,
                    beta=self.beta, f=self.f, K=self.K)
        data.update(changes)
        return GLProblem(**data)

    @property
    def L(self):
        return self.grid.laplacian

    @cached_property
    def shifted(self):
        """The sparse SPD matrix K I + gamma L."""
        return (self.K * sp.identity(self.grid.N, format="csr") + self.gamma * self.L).tocsr()

    @cached_property
    def shifted_factor(self):
        return SPDFactor(self.shifted)

    @cached_property
    def stiffness(self):
        """-gamma L."""
        return (-self.gamma * self.L).tocsr()


@dataclass(frozen=True, eq=False)
class CriticalPoint:
    u0: np.ndarray
    residual_norm: float
    hessian_class: HessianClass
    lam_min: float
    lam_max: float
    iterations: int = 0
    residual_history: tuple = field(default=(), repr=False)


def eval_J(p, u):
    u = np.asarray(u, dtype=float)
    p.grid.check(u)
    w = p.grid.weight
    dirichlet = 0.5 * p.gamma * inner(p.grid, u, -(p.L @ u))
    well = 0.5 * p.alpha * w * np.sum((u**2 - p.beta) ** 2)
    return float(dirichlet + well - inner(p.grid, u, p.f))


def grad_J(p, u):
    u = np.asarray(u, dtype=float)
    p.grid.check(u)
    return -p.gamma * (p.L @ u) + 2.0 * p.alpha * (u**2 - p.beta) * u - p.f


def hess_J(p, u):
    u = np.asarray(u, dtype=float)
    p.grid.check(u)
    diag = 6.0 * p.alpha * u**2 - 2.0 * p.alpha * p.beta
    return (p.stiffness + sp.diags(diag)).tocsr()


def manufactured_source(grid, gamma, alpha, beta, u0):
    """Source f for which ``u0`` is an exact critical point."""
    u0 = np.asarray(u0, dtype=float)
    grid.check(u0)
    return -gamma * (grid.laplacian @ u0) + 2.0 * alpha * (u0**2 - beta) * u0


def bump(grid):
    """Product of half-sines: one at the domain centre, zero at the boundary."""
    out = np.ones(grid.N)
    for x, ext in zip(grid.coordinates(), grid.extent):
        out *= np.sin(np.pi * x / ext)
    return out


def initial_guess(p, kind, seed=0, amplitude=None):
    """Named Newton starts: zero, plus_bump, minus_bump, random."""
    root = np.sqrt(p.beta)
    if kind == "zero":
        return np.zeros(p.grid.N)
    if kind == "plus_bump":
        return root * bump(p.grid)
    if kind == "minus_bump":
        return -root * bump(p.grid)
    if kind == "random":
        amp = root if amplitude is None else amplitude
        return amp * np.random.default_rng(seed).uniform(-1.0, 1.0, p.grid.N)
    raise ValueError(f"unknown initial guess {kind!r}")


def default_class_tol(lam_max):
    return 1e-8 * max(1.0, abs(lam_max))


def classify_spectrum(lam_min, lam_max, tol):
    if min(abs(lam_min), abs(lam_max)) <= tol:
        return HessianClass.SINGULAR
    if lam_min > tol:
        return HessianClass.POSITIVE_DEFINITE
    if lam_max < -tol:
        return HessianClass.NEGATIVE_DEFINITE
    return HessianClass.INDEFINITE


def classify_hessian(M, tol=None):
    """Definiteness class of a symmetric operator from its extremal eigenvalues."""
    lam_min, lam_max = extremal_eigs(M)
    if tol is None:
        tol = default_class_tol(lam_max)
    return classify_spectrum(lam_min, lam_max, tol)


def _newton_step(H, r):
    try:
        with np.errstate(all="raise"), warnings.catch_warnings():
            warnings.simplefilter("error", spla.MatrixRankWarning)
            du = spla.spsolve(H.tocsc(), -r)
    except (RuntimeError, FloatingPointError, np.linalg.LinAlgError, spla.MatrixRankWarning):
        return None
    if not np.all(np.isfinite(du)):
        return None
    return du


def _newton_backtrack(p, u, r, rn, H):
    """Damped Newton step with sufficient decrease of the residual norm."""
    du = _newton_step(H, r)
    if du is None:
        return None
    t = 1.0
    while t >= 1.0 / 64:
        trial = u + t * du
        r_trial = grad_J(p, trial)
        rn_trial = float(np.linalg.norm(r_trial))
        if rn_trial <= (1.0 - 1e-4 * t) * rn:
            return trial, r_trial, rn_trial
        t *= 0.5
    return None


def _flow_step(p, u, r, rn, H, dt):
    """Implicit gradient-flow step ``(H + I/dt) du = -r``.

    ``dt`` shrinks until ``H + I/dt`` is positive definite and the step
    lowers the energy or halves the residual; returns the new point and the
    time step to try next (doubled, so the iteration turns into Newton near a
    nondegenerate minimum).
    """
    eye = sp.identity(p.grid.N, format="csr")
    J0 = eval_J(p, u)
    while dt > 1e-14:
        try:
            factor = SPDFactor(H + eye / dt)
        except IndefiniteOperatorError:
            dt *= 0.25
            continue
        trial = u - factor.solve(r)
        r_trial = grad_J(p, trial)
        rn_trial = float(np.linalg.norm(r_trial))
        if eval_J(p, trial) < J0 or rn_trial < 0.5 * rn:
            return (trial, r_trial, rn_trial), min(2.0 * dt, 1e12)
        dt *= 0.25
    return None, dt


def find_critical_point(p, u_init, newton_tol=1e-10, max_iters=200, class_tol=None):
    """Globalised Newton iteration for ``grad_J(p, u) = 0``.

    A Newton step is accepted when backtracking (down to 1/64 of the full
    step) gives sufficient decrease of the residual norm, so the residual
    falls monotonically over Newton steps.  When no such step exists, an
    implicit gradient-flow step ``(H + I/dt) du = -r`` (a Levenberg shift of
    the Hessian) that lowers the energy is taken instead.  After the
    tolerance is met, up to three plain Newton steps polish the point while
    each still halves the residual.
    """
    if newton_tol <= 0:
        raise ValueError("newton_tol must be positive")
    u = np.array(u_init, dtype=float)
    p.grid.check(u)
    r = grad_J(p, u)
    rn = float(np.linalg.norm(r))
    history = [("start", rn)]
    dt = None
    it = 0
    while rn > newton_tol:
        if it >= max_iters:
            raise ConvergenceError(
                f"Newton did not converge in {max_iters} iterations (residual {rn:.3e})",
                residual=rn,
                iterate=u,
            )
        it += 1
        H = hess_J(p, u)
        step = None
        if dt is None:
            step = _newton_backtrack(p, u, r, rn, H)
            kind = "newton"
            if step is None:
                dt = 1.0 / max(1.0, abs(H).max())
        if step is None:
            step, dt = _flow_step(p, u, r, rn, H, dt)
            kind = "flow"
        if step is None:
            raise ConvergenceError(f"Newton stalled at residual {rn:.3e}", residual=rn, iterate=u)
        u, r, rn = step
        history.append((kind, rn))
    log.debug("Newton reached %.3e after %d iterations", rn, it)

    for _ in range(3):
        du = _newton_step(hess_J(p, u), r)
        if du is None or rn == 0.0:
            break
        trial = u + du
        r_trial = grad_J(p, trial)
        rn_trial = float(np.linalg.norm(r_trial))
        if not rn_trial < 0.5 * rn:
            break
        u, r, rn = trial, r_trial, rn_trial
        history.append(("newton", rn))

    lam_min, lam_max = extremal_eigs(hess_J(p, u))
    tol = default_class_tol(lam_max) if class_tol is None else class_tol
    return CriticalPoint(
        u0=u,
        residual_norm=rn,
        hessian_class=classify_spectrum(lam_min, lam_max, tol),
        lam_min=lam_min,
        lam_max=lam_max,
        iterations=it,
        residual_history=tuple(history),
    )
