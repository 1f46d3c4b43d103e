"""Finite-difference substrate: grids, the Dirichlet Laplacian, quadrature,
SPD linear solves and extremal eigenvalues.

Fields are plain 1-D numpy arrays holding one value per interior node, in
C order (the last axis varies fastest).  Operators are scipy sparse matrices
or dense arrays; every routine here accepts either.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, GridMismatchError, IndefiniteOperatorError

DEFAULT_K_MARGIN = 0.25


@dataclass(frozen=True)
class Grid:
    """Uniform Cartesian mesh of interior nodes with Dirichlet boundary.

    ``extent`` holds the physical side lengths and ``n_interior`` the number
    of interior nodes per axis; boundary nodes are eliminated.
    """

    extent: tuple
    n_interior: tuple

    def __post_init__(self):
        extent = tuple(float(e) for e in np.atleast_1d(self.extent))
        n = tuple(int(k) for k in np.atleast_1d(self.n_interior))
        if len(extent) != len(n) or len(n) not in (1, 2):
            raise ValueError("grid must be 1D or 2D with one extent per axis")
        if min(n) < 1:
            raise ValueError("every axis needs at least one interior node")
        if min(extent) <= 0:
            raise ValueError("extents must be positive")
        object.__setattr__(self, "extent", extent)
        object.__setattr__(self, "n_interior", n)

    @classmethod
    def unit(cls, n, dim=1):
        """Unit interval/square with ``n`` interior nodes per axis."""
        return cls((1.0,) * dim, (n,) * dim)

    @property
    def dim(self):
        return len(self.n_interior)

    @property
    def h(self):
        return tuple(e / (k + 1) for e, k in zip(self.extent, self.n_interior))

    @property
    def weight(self):
        return float(np.prod(self.h))

    @property
    def N(self):
        return int(np.prod(self.n_interior))

    @property
    def volume(self):
        """Discrete measure |Omega_h| = weight * N."""
        return self.weight * self.N

    @property
    def shape(self):
        return self.n_interior

    def coordinates(self):
        """Node coordinates, one array per axis, each of length N."""
        axes = [np.arange(1, k + 1) * hk for k, hk in zip(self.n_interior, self.h)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return [m.ravel() for m in mesh]

    def check(self, *fields):
        for a in fields:
            if np.shape(a) != (self.N,):
                raise GridMismatchError(
                    f"field of shape {np.shape(a)} does not match grid with N={self.N}"
                )

    @cached_property
    def laplacian(self):
        return build_laplacian(self)

    @cached_property
    def laplacian_extremes(self):
        """Exact (lambda_min, lambda_max) of -L from the separable spectrum."""
        lo = hi = 0.0
        for k, hk in zip(self.n_interior, self.h):
            lo += 4.0 / hk**2 * np.sin(np.pi / (2 * (k + 1))) ** 2
            hi += 4.0 / hk**2 * np.sin(k * np.pi / (2 * (k + 1))) ** 2
        return lo, hi


def _second_difference(n, h):
    e = np.ones(n)
    return sp.diags([e[:-1], -2.0 * e, e[:-1]], [-1, 0, 1], format="csr") / h**2


def build_laplacian(grid):
    """Sparse Dirichlet Laplacian on the interior nodes of ``grid``.

    Missing neighbours across the boundary are dropped (zero Dirichlet data),
    so the matrix is symmetric negative definite.
    """
    ops = [_second_difference(n, h) for n, h in zip(grid.n_interior, grid.h)]
    if grid.dim == 1:
        return ops[0].tocsr()
    nx, ny = grid.n_interior
    lap = sp.kron(ops[0], sp.identity(ny)) + sp.kron(sp.identity(nx), ops[1])
    return lap.tocsr()


def inner(grid, a, b):
    """Discrete L2 pairing ``weight * sum(a * b)``."""
    grid.check(a, b)
    return grid.weight * float(np.dot(a, b))


def as_matrix(M):
    if sp.issparse(M):
        return M
    return np.asarray(M, dtype=float)


def _matvec(M):
    if sp.issparse(M) or isinstance(M, np.ndarray):
        return lambda x: M @ x
    return M.matvec


def _cg(M, rhs, tol, maxiter):
    apply = _matvec(M)
    x = np.zeros_like(rhs)
    r = rhs.copy()
    bnorm = np.linalg.norm(rhs)
    if bnorm == 0.0:
        return x
    p = r.copy()
    rr = r @ r
    for _ in range(maxiter):
        Mp = apply(p)
        curv = p @ Mp
        if curv <= 0.0:
            raise IndefiniteOperatorError(
                "operator is not positive definite: CG met a direction with "
                f"non-positive curvature ({curv:.3e})"
            )
        step = rr / curv
        x += step * p
        r -= step * Mp
        rr_new = r @ r
        if np.sqrt(rr_new) <= tol * bnorm:
            # guard against drift in the recursive residual
            true_res = np.linalg.norm(rhs - apply(x))
            if true_res <= tol * bnorm:
                return x
            r = rhs - apply(x)
            rr_new = r @ r
            p = r.copy()
            rr = rr_new
            continue
        p = r + (rr_new / rr) * p
        rr = rr_new
    res = np.linalg.norm(rhs - apply(x))
    raise ConvergenceError(
        f"CG did not reach rtol {tol:g} in {maxiter} iterations "
        f"(relative residual {res / bnorm:.3e})",
        residual=res,
        iterate=x,
    )


class SPDFactor:
    """Sparse LU of an SPD matrix without pivoting.

    With natural ordering and no pivoting the LU pivots are the LDL^T pivots,
    so positivity of every pivot certifies positive definiteness.
    """

    def __init__(self, M):
        M = sp.csc_matrix(as_matrix(M), dtype=float)
        self.shape = M.shape
        try:
            self._lu = spla.splu(
                M,
                permc_spec="NATURAL",
                diag_pivot_thresh=0.0,
                options={"SymmetricMode": True},
            )
        except RuntimeError as exc:  # exactly singular
            raise IndefiniteOperatorError(f"operator is singular: {exc}") from exc
        pivots = self._lu.U.diagonal()
        if np.any(self._lu.perm_r != np.arange(M.shape[0])):
            raise IndefiniteOperatorError("operator is not positive definite (row pivoting needed)")
        if not np.all(pivots > 0.0):
            worst = int(np.argmin(pivots))
            raise IndefiniteOperatorError(
                f"operator is not positive definite (pivot {worst} = {pivots[worst]:.3e})"
            )

    def solve(self, rhs):
        return self._lu.solve(np.asarray(rhs, dtype=float))

    __call__ = solve


def spd_solve(M, rhs, tol=1e-10, method="cg", maxiter=None):
    """Solve ``M x = rhs`` for symmetric positive definite ``M``.

    ``method`` is ``"cg"`` (conjugate gradients, default cap ``10 N``),
    ``"dense"`` (Cholesky, meant as the reference path for N <= 256) or
    ``"direct"`` (sparse LU without pivoting).  All three raise
    :class:`IndefiniteOperatorError` when ``M`` is detectably not SPD.
    """
    rhs = np.asarray(rhs, dtype=float)
    n = rhs.shape[0]
    if method == "cg":
        if maxiter is None:
            maxiter = max(10 * n, 10)
        return _cg(M, rhs, tol, maxiter)
    if method == "dense":
        A = M.toarray() if sp.issparse(M) else np.asarray(M, dtype=float)
        try:
            c = sla.cho_factor(A)
        except np.linalg.LinAlgError as exc:
            raise IndefiniteOperatorError(f"operator is not positive definite: {exc}") from exc
        return sla.cho_solve(c, rhs)
    if method == "direct":
        return SPDFactor(M).solve(rhs)
    raise ValueError(f"unknown method {method!r}")


def gershgorin_bounds(M):
    if sp.issparse(M):
        A = sp.csr_matrix(M)
        d = A.diagonal()
        radius = np.asarray(abs(A).sum(axis=1)).ravel() - np.abs(d)
    else:
        A = np.asarray(M, dtype=float)
        d = np.diag(A)
        radius = np.abs(A).sum(axis=1) - np.abs(d)
    return float(np.min(d - radius)), float(np.max(d + radius))


def _lanczos_largest(apply, n, tol, maxiter, seed=0):
    """Largest eigenvalue of a symmetric positive definite operator.

    Lanczos with full reorthogonalisation; an invariant subspace is handled
    by restarting with a fresh vector, so ``n`` steps always give the exact
    answer.
    """
    rng = np.random.default_rng(seed)
    Q = np.zeros((n, min(n, maxiter) + 1))
    alphas, betas = [], []
    q = rng.standard_normal(n)
    q /= np.linalg.norm(q)
    Q[:, 0] = q
    beta = 0.0
    theta = 0.0
    for k in range(min(n, maxiter)):
        w = apply(Q[:, k])
        alpha = Q[:, k] @ w
        w -= alpha * Q[:, k]
        if k > 0:
            w -= beta * Q[:, k - 1]
        # two passes of Gram-Schmidt keep the basis orthogonal to rounding
        for _ in range(2):
            w -= Q[:, : k + 1] @ (Q[:, : k + 1].T @ w)
        alphas.append(alpha)
        T = np.diag(alphas)
        if k > 0:
            T += np.diag(betas, 1) + np.diag(betas, -1)
        evals, evecs = np.linalg.eigh(T)
        theta = evals[-1]
        beta = np.linalg.norm(w)
        if k + 1 == n:
            return theta
        if abs(beta * evecs[-1, -1]) <= tol * abs(theta):
            return theta
        if beta <= 1e-14 * max(abs(theta), 1.0):
            # invariant subspace: continue with a new orthogonal direction
            w = rng.standard_normal(n)
            for _ in range(2):
                w -= Q[:, : k + 1] @ (Q[:, : k + 1].T @ w)
            Q[:, k + 1] = w / np.linalg.norm(w)
            beta = 0.0
        else:
            Q[:, k + 1] = w / beta
        betas.append(beta)
    raise ConvergenceError(f"Lanczos did not converge in {maxiter} steps", residual=beta)


def extremal_eigs(M, tol=1e-12, maxiter=None):
    """Smallest and largest eigenvalue of a symmetric matrix.

    Each end is obtained by Lanczos on a shift-inverted operator
    ``(M - s I)^-1`` with ``s`` just outside the Gershgorin interval, which
    turns the wanted eigenvalue into the dominant one of an SPD operator.
    """
    M = as_matrix(M)
    n = M.shape[0]
    if maxiter is None:
        maxiter = n
    lo, hi = gershgorin_bounds(M)
    span = hi - lo
    delta = 1e-2 * span if span > 0 else max(1.0, abs(lo))
    eye = sp.identity(n, format="csc")
    Ms = sp.csc_matrix(M)

    low_factor = SPDFactor(Ms - (lo - delta) * eye)
    theta = _lanczos_largest(low_factor.solve, n, tol, maxiter, seed=1)
    lam_min = (lo - delta) + 1.0 / theta

    high_factor = SPDFactor((hi + delta) * eye - Ms)
    theta = _lanczos_largest(high_factor.solve, n, tol, maxiter, seed=2)
    lam_max = (hi + delta) - 1.0 / theta
    return lam_min, max(lam_min, lam_max)


def choose_K(grid, gamma, margin=DEFAULT_K_MARGIN):
    """Shift K = (1 + margin) * gamma * lambda_max(-L), making K I + gamma L SPD."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if margin <= 0:
        raise ValueError("margin must be positive so that K I + gamma L is definite")
    return (1.0 + margin) * gamma * grid.laplacian_extremes[1]
