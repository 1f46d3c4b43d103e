"""Complex Ginzburg-Landau energy with a magnetic potential on a staggered
2-D mesh, gauge operations and the conjugate functionals of its dual.

The outer region Omega_1 is a rectangle of ``nx * ny`` square-ish cells.
Gauge functions live on its nodes, the potential A on its edges (one real
tangential component per edge) and curl A on its cells, so that
``curl(grad chi) = 0`` holds exactly and ``div = -grad^T``.  The sample
Omega is a rectangular block of nodes at least two cells away from the
outer boundary; the order parameter phi lives there.

On an edge e = (a, b) the covariant gradient is

    (D_A phi)_e = (phi_b - phi_a) / h_e - i rho A_e (phi_a + phi_b) / 2,

and with quadrature weight w = hx * hy for nodes, edges and cells

    J(phi, A) = w [ gamma/2 sum_e |D_A phi|^2 + alpha/2 sum (|phi|^2 - beta)^2
                    - sum Re(conj(phi) f) ] + mw * w sum_cells (curl A - B0)^2.

Pairings of complex fields are ``w * sum Re(conj(a) b)``; since all weights
agree, adjoints are plain conjugate transposes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import DomainError, GridMismatchError
from .grid_ops import Grid, SPDFactor
from .primal import GLProblem

log = logging.getLogger(__name__)

MAGNETIC_WEIGHT = 1.0 / (8.0 * np.pi)


def gl_temperature_params(t):
    """Dimensionless coefficients at reduced temperature t = T / T_c."""
    return {"gamma": 1.0, "alpha": 1.0 / (2.0 * (1.0 + t**2) ** 2), "beta": 1.0 - t**4}


@dataclass(frozen=True)
class StaggeredMesh:
    """Nodes, edges and cells of a rectangle split into ``nx * ny`` cells."""

    extent: tuple
    cells: tuple

    def __post_init__(self):
        extent = tuple(float(e) for e in self.extent)
        cells = tuple(int(c) for c in self.cells)
        if len(extent) != 2 or len(cells) != 2:
            raise ValueError("the magnetic mesh is two-dimensional")
        if min(cells) < 1 or min(extent) <= 0:
            raise ValueError("need positive extents and at least one cell per axis")
        object.__setattr__(self, "extent", extent)
        object.__setattr__(self, "cells", cells)

    @property
    def h(self):
        return (self.extent[0] / self.cells[0], self.extent[1] / self.cells[1])

    @property
    def weight(self):
        return self.h[0] * self.h[1]

    @property
    def n_nodes(self):
        nx, ny = self.cells
        return (nx + 1) * (ny + 1)

    @property
    def n_xedges(self):
        nx, ny = self.cells
        return nx * (ny + 1)

    @property
    def n_edges(self):
        nx, ny = self.cells
        return nx * (ny + 1) + (nx + 1) * ny

    @property
    def n_cells(self):
        return self.cells[0] * self.cells[1]

    def node(self, i, j):
        return i * (self.cells[1] + 1) + j

    def node_coordinates(self):
        nx, ny = self.cells
        hx, hy = self.h
        X, Y = np.meshgrid(np.arange(nx + 1) * hx, np.arange(ny + 1) * hy, indexing="ij")
        return X.ravel(), Y.ravel()

    def edge_midpoints(self):
        """Midpoints and unit directions (0 for x, 1 for y) of every edge."""
        nx, ny = self.cells
        hx, hy = self.h
        X, Y = np.meshgrid((np.arange(nx) + 0.5) * hx, np.arange(ny + 1) * hy, indexing="ij")
        Xy, Yy = np.meshgrid(np.arange(nx + 1) * hx, (np.arange(ny) + 0.5) * hy, indexing="ij")
        xs = np.concatenate([X.ravel(), Xy.ravel()])
        ys = np.concatenate([Y.ravel(), Yy.ravel()])
        axis = np.concatenate([np.zeros(X.size, int), np.ones(Xy.size, int)])
        return xs, ys, axis

    @cached_property
    def edge_ends(self):
        """(tail, head) node indices of every edge; heads lie in +x or +y."""
        nx, ny = self.cells
        I, J = np.meshgrid(np.arange(nx), np.arange(ny + 1), indexing="ij")
        tx, hx_ = self.node(I, J).ravel(), self.node(I + 1, J).ravel()
        I, J = np.meshgrid(np.arange(nx + 1), np.arange(ny), indexing="ij")
        ty, hy_ = self.node(I, J).ravel(), self.node(I, J + 1).ravel()
        return np.concatenate([tx, ty]), np.concatenate([hx_, hy_])

    @cached_property
    def edge_length(self):
        return np.concatenate([np.full(self.n_xedges, self.h[0]),
                               np.full(self.n_edges - self.n_xedges, self.h[1])])

    @cached_property
    def grad(self):
        """Nodes to edges: difference quotient along each edge."""
        tail, head = self.edge_ends
        E = self.n_edges
        rows = np.concatenate([np.arange(E), np.arange(E)])
        vals = np.concatenate([-1.0 / self.edge_length, 1.0 / self.edge_length])
        return sp.csr_matrix((vals, (rows, np.concatenate([tail, head]))),
                             shape=(E, self.n_nodes))

    @cached_property
    def average(self):
        """Nodes to edges: mean of the two endpoint values."""
        tail, head = self.edge_ends
        E = self.n_edges
        rows = np.concatenate([np.arange(E), np.arange(E)])
        return sp.csr_matrix((np.full(2 * E, 0.5), (rows, np.concatenate([tail, head]))),
                             shape=(E, self.n_nodes))

    @cached_property
    def curl(self):
        """Edges to cells: dA_y/dx - dA_x/dy around each cell."""
        nx, ny = self.cells
        hx, hy = self.h
        I, J = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
        cell = (I * ny + J).ravel()
        I, J = I.ravel(), J.ravel()
        x_bottom = I * (ny + 1) + J
        x_top = I * (ny + 1) + J + 1
        off = self.n_xedges
        y_left = off + I * ny + J
        y_right = off + (I + 1) * ny + J
        rows = np.concatenate([cell] * 4)
        cols = np.concatenate([y_right, y_left, x_top, x_bottom])
        vals = np.concatenate([np.full(cell.size, 1.0 / hx), np.full(cell.size, -1.0 / hx),
                               np.full(cell.size, -1.0 / hy), np.full(cell.size, 1.0 / hy)])
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.n_cells, self.n_edges))

    def div(self, A):
        """Discrete divergence ``-grad^T A`` on nodes (boundary flux included)."""
        return -(self.grad.T @ A)

    @cached_property
    def neumann_factor(self):
        """Factor of grad^T grad with the first node pinned."""
        lap = (self.grad.T @ self.grad).tocsr()
        return SPDFactor(lap[1:, 1:])

    @cached_property
    def divfree_basis(self):
        """Orthonormal basis of {A : div A = 0} (dense; small meshes only)."""
        return sla.null_space(self.grad.T.toarray())


@dataclass(frozen=True, eq=False)
class ComplexGLProblem:
    """Complex GL data: mesh of Omega_1, the Omega node block
    ``[i0, i1) x [j0, j1)``, coefficients, source f on Omega and applied
    field B0 (a scalar or one value per cell).

    ``edges`` selects which edges carry the covariant gradient: ``"free"``
    uses edges with both ends in Omega, ``"dirichlet"`` also edges leaving
    Omega, with phi taken as zero outside.
    """

    mesh: StaggeredMesh
    block: tuple
    gamma: float = 1.0
    alpha: float = 1.0
    beta: float = 1.0
    rho: float = 1.0
    f: np.ndarray = 0.0
    B0: np.ndarray = 0.0
    magnetic_weight: float = MAGNETIC_WEIGHT
    edges: str = "free"

    def __post_init__(self):
        nx, ny = self.mesh.cells
        i0, i1, j0, j1 = (int(b) for b in self.block)
        if not (2 <= i0 < i1 <= nx - 1 and 2 <= j0 < j1 <= ny - 1):
            raise ValueError("the Omega block needs a margin of at least two cells inside Omega_1")
        object.__setattr__(self, "block", (i0, i1, j0, j1))
        for name in ("gamma", "alpha"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        # rho = 0 decouples phi from A; kept for the reduction to the real problem
        if not self.rho >= 0:
            raise ValueError("rho must be nonnegative")
        if self.magnetic_weight <= 0:
            raise ValueError("magnetic_weight must be positive")
        if self.edges not in ("free", "dirichlet"):
            raise ValueError("edges must be 'free' or 'dirichlet'")
        f = np.asarray(self.f, dtype=complex)
        if f.ndim == 0:
            f = np.full(self.n_omega, complex(f))
        if f.shape != (self.n_omega,):
            raise GridMismatchError(f"f has shape {f.shape}, expected ({self.n_omega},)")
        object.__setattr__(self, "f", f)
        B0 = np.asarray(self.B0, dtype=float)
        if B0.ndim == 0:
            B0 = np.full(self.mesh.n_cells, float(B0))
        if B0.shape != (self.mesh.n_cells,):
            raise GridMismatchError(f"B0 has shape {B0.shape}, expected ({self.mesh.n_cells},)")
        object.__setattr__(self, "B0", B0)

    @classmethod
    def create(cls, cells=(8, 8), extent=None, margin=2, **kwargs):
        """Square-celled mesh with Omega the node block ``margin`` cells in."""
        cells = tuple(int(c) for c in cells)
        if extent is None:
            extent = tuple(float(c) for c in cells)
        nx, ny = cells
        block = (margin, nx - margin + 1, margin, ny - margin + 1)
        return cls(StaggeredMesh(extent, cells), block, **kwargs)

    @property
    def weight(self):
        return self.mesh.weight

    @property
    def omega_shape(self):
        i0, i1, j0, j1 = self.block
        return (i1 - i0, j1 - j0)

    @property
    def n_omega(self):
        a, b = self.omega_shape
        return a * b

    @cached_property
    def omega_nodes(self):
        """Mesh node index of each Omega node, in C order."""
        i0, i1, j0, j1 = self.block
        I, J = np.meshgrid(np.arange(i0, i1), np.arange(j0, j1), indexing="ij")
        return self.mesh.node(I, J).ravel()

    @cached_property
    def extension(self):
        """Zero extension from Omega nodes to all mesh nodes."""
        n = self.n_omega
        return sp.csr_matrix((np.ones(n), (self.omega_nodes, np.arange(n))),
                             shape=(self.mesh.n_nodes, n))

    @cached_property
    def omega_edges(self):
        inside = np.zeros(self.mesh.n_nodes, bool)
        inside[self.omega_nodes] = True
        tail, head = self.mesh.edge_ends
        if self.edges == "free":
            sel = inside[tail] & inside[head]
        else:
            sel = inside[tail] | inside[head]
        return np.flatnonzero(sel)

    @property
    def n_omega_edges(self):
        return self.omega_edges.size

    @cached_property
    def grad_omega(self):
        return (self.mesh.grad[self.omega_edges] @ self.extension).tocsr()

    @cached_property
    def average_omega(self):
        return (self.mesh.average[self.omega_edges] @ self.extension).tocsr()

    def covariant_operator(self, A):
        """Sparse complex matrix phi -> D_A phi on the Omega edges."""
        A_e = np.asarray(A, dtype=float)[self.omega_edges]
        return (self.grad_omega - 1j * self.rho * sp.diags(A_e) @ self.average_omega).tocsr()

    def covariant_adjoint(self, A, v1s):
        """D_A^H v1 = grad^T v1 + i rho avg^T (A v1)."""
        A_e = np.asarray(A, dtype=float)[self.omega_edges]
        return self.grad_omega.T @ v1s + 1j * self.rho * (self.average_omega.T @ (A_e * v1s))

    def check(self, phi=None, A=None, v1s=None, omega_field=None):
        if phi is not None and np.shape(phi) != (self.n_omega,):
            raise GridMismatchError(f"phi has shape {np.shape(phi)}, expected ({self.n_omega},)")
        if A is not None and np.shape(A) != (self.mesh.n_edges,):
            raise GridMismatchError(f"A has shape {np.shape(A)}, expected ({self.mesh.n_edges},)")
        if v1s is not None and np.shape(v1s) != (self.n_omega_edges,):
            raise GridMismatchError(
                f"v1 has shape {np.shape(v1s)}, expected ({self.n_omega_edges},)"
            )
        if omega_field is not None and np.shape(omega_field) != (self.n_omega,):
            raise GridMismatchError(
                f"field has shape {np.shape(omega_field)}, expected ({self.n_omega},)"
            )

    def scalar_problem(self, K=None):
        """The real problem on Omega's nodes (Dirichlet), used for rho = 0 checks."""
        a, b = self.omega_shape
        hx, hy = self.mesh.h
        grid = Grid(((a + 1) * hx, (b + 1) * hy), (a, b))
        f = self.f.real
        return GLProblem.create(grid, self.gamma, self.alpha, self.beta, f=f, K=K)


# ----------------------------------------------------------------------------
# energy


def kinetic_energy(p, phi, A):
    Dphi = p.covariant_operator(A) @ phi
    return 0.5 * p.gamma * p.weight * float(np.sum(np.abs(Dphi) ** 2))


def potential_energy(p, phi):
    return 0.5 * p.alpha * p.weight * float(np.sum((np.abs(phi) ** 2 - p.beta) ** 2))


def source_pairing(p, phi):
    """<phi, f> = w sum(Re phi Re f + Im phi Im f)."""
    return p.weight * float(np.sum((np.conj(phi) * p.f).real))


def eval_G2(p, A):
    """Magnetic energy mw * w * sum_cells (curl A - B0)^2 over Omega_1."""
    b = p.mesh.curl @ A - p.B0
    return p.magnetic_weight * p.weight * float(b @ b)


def eval_J_complex(p, phi, A):
    phi = np.asarray(phi, dtype=complex)
    A = np.asarray(A, dtype=float)
    p.check(phi=phi, A=A)
    return kinetic_energy(p, phi, A) + potential_energy(p, phi) - source_pairing(p, phi) + eval_G2(p, A)


# ----------------------------------------------------------------------------
# gauge


def gauge_transform(p, phi, A, chi):
    """``phi' = phi exp(i rho chi)`` on Omega and ``A' = A + grad chi`` on Omega_1."""
    phi = np.asarray(phi, dtype=complex)
    A = np.asarray(A, dtype=float)
    chi = np.asarray(chi, dtype=float)
    p.check(phi=phi, A=A)
    if chi.shape != (p.mesh.n_nodes,):
        raise GridMismatchError(f"chi has shape {chi.shape}, expected ({p.mesh.n_nodes},)")
    return phi * np.exp(1j * p.rho * chi[p.omega_nodes]), A + p.mesh.grad @ chi


def coulomb_gauge_function(mesh, A):
    """Mean-zero chi with ``div(A + grad chi) = 0`` (Neumann problem)."""
    rhs = -(mesh.grad.T @ A)
    chi = np.zeros(mesh.n_nodes)
    # the pinned row is implied: every row sum of grad^T grad vanishes
    chi[1:] = mesh.neumann_factor.solve(rhs[1:])
    return chi - chi.mean()


def coulomb_project(p, A):
    """Representative of A's gauge class with zero discrete divergence.

    Since ``div = -grad^T`` includes the boundary nodes, the projected field
    also carries zero net normal flux through every boundary node.
    """
    A = np.asarray(A, dtype=float)
    p.check(A=A)
    return A + p.mesh.grad @ coulomb_gauge_function(p.mesh, A)


def div_residual(p, A):
    return float(np.linalg.norm(p.mesh.div(A)))


# ----------------------------------------------------------------------------
# conjugates


def eval_G0star(p, v1s):
    v1s = np.asarray(v1s, dtype=complex)
    p.check(v1s=v1s)
    return p.weight / (2.0 * p.gamma) * float(np.sum(np.abs(v1s) ** 2))


def eval_G1star(p, v1s, v3s, A):
    """``sup over (phi, v)`` of ``-<v1, D_A phi> + <v3, v> - G1(phi, v)`` where
    ``G1(phi, v) = alpha/2 sum_w (|phi|^2 - beta + v)^2 - <phi, f>``:

        w sum [ |D_A^H v1 - f|^2 / (4 v3) + v3^2 / (2 alpha) + beta v3 ],

    finite on v3 > 0.
    """
    v1s = np.asarray(v1s, dtype=complex)
    v3s = np.asarray(v3s, dtype=float)
    A = np.asarray(A, dtype=float)
    p.check(v1s=v1s, A=A, omega_field=v3s)
    if not np.all(v3s > 0.0):
        node = int(np.argmin(v3s))
        raise DomainError(f"v3 must be positive; node {node} has {v3s[node]:.3e}", node=node)
    q = p.covariant_adjoint(A, v1s) - p.f
    dens = np.abs(q) ** 2 / (4.0 * v3s) + v3s**2 / (2.0 * p.alpha) + p.beta * v3s
    return p.weight * float(np.sum(dens))


def eval_Jstar_complex(p, v1s, v3s, A):
    return -eval_G0star(p, v1s) - eval_G1star(p, v1s, v3s, A)


def dual_lower_bound(p, v1s, v3s, A):
    """``J*(v, A) + G2(A)``, a lower bound for ``J(phi, A)`` at every phi."""
    return eval_Jstar_complex(p, v1s, v3s, A) + eval_G2(p, A)


def phi_from_dual(p, v1s, v3s, A):
    """Maximiser of the phi-problem inside G1*: ``(f - D_A^H v1) / (2 v3)``."""
    return (p.f - p.covariant_adjoint(A, v1s)) / (2.0 * np.asarray(v3s, dtype=float))


# ----------------------------------------------------------------------------
# inner infimum over the Coulomb-gauge potentials


class ReducedComplexDual(NamedTuple):
    value: float
    A_arg: np.ndarray
    in_B2: bool
    b2_lam_min: float


def _potential_quadratic(p, v1s, v3s):
    """Matrices of ``A -> J*(v, A) + G2(A)`` as ``w (A^T Q A + 2 g^T A) + c``."""
    E = p.mesh.n_edges
    sel = sp.csr_matrix((np.ones(p.n_omega_edges), (np.arange(p.n_omega_edges), p.omega_edges)),
                        shape=(p.n_omega_edges, E))
    P = (1j * p.rho * (p.average_omega.T @ sp.diags(v1s) @ sel)).toarray()
    b = p.grad_omega.T @ v1s - p.f
    Wv = 1.0 / (4.0 * v3s)
    C = p.mesh.curl.toarray()
    mw = p.magnetic_weight
    Q = mw * C.T @ C - (P.conj().T @ (Wv[:, None] * P)).real
    g = -(P.conj().T @ (Wv * b)).real - mw * C.T @ p.B0
    return Q, g


def b2_form(p, v1s, v3s, A):
    """``mw |curl A|^2 - 1/2 sum |rho v1 . A|^2 / (2 v3)``, weighted."""
    v1s = np.asarray(v1s, dtype=complex)
    v3s = np.asarray(v3s, dtype=float)
    A_e = np.asarray(A, dtype=float)[p.omega_edges]
    pa = p.rho * (p.average_omega.T @ (A_e * v1s))
    curl = p.mesh.curl @ A
    return p.weight * (p.magnetic_weight * float(curl @ curl)
                       - float(np.sum(np.abs(pa) ** 2 / (4.0 * v3s))))


def b2_sampled(p, v1s, v3s, n_probe=32, seed=0):
    """B2 tested on ``n_probe`` seeded Coulomb-gauge probes only (not a proof)."""
    rng = np.random.default_rng(seed)
    for _ in range(n_probe):
        A = coulomb_project(p, rng.standard_normal(p.mesh.n_edges))
        if not b2_form(p, v1s, v3s, A) > 0.0:
            return False
    return True


def reduced_complex_dual(p, v1s, v3s, rtol=1e-10):
    """``inf over A in D*`` of ``J*(v, A) + G2(A)`` on small meshes.

    D* is spanned by a dense orthonormal basis of ker(div), so the B2
    condition is certified by the smallest eigenvalue of the restricted
    quadratic form.  When B2 fails the infimum is ``-inf``.
    """
    v1s = np.asarray(v1s, dtype=complex)
    v3s = np.asarray(v3s, dtype=float)
    p.check(v1s=v1s, omega_field=v3s)
    if not np.all(v3s > 0.0):
        node = int(np.argmin(v3s))
        raise DomainError("v3 must be positive", node=node)
    Z = p.mesh.divfree_basis
    Q, g = _potential_quadratic(p, v1s, v3s)
    Qz = Z.T @ Q @ Z
    lam = np.linalg.eigvalsh(Qz)
    in_B2 = bool(lam[0] > rtol * max(abs(lam[-1]), 1e-300))
    if not in_B2:
        return ReducedComplexDual(-np.inf, np.zeros(p.mesh.n_edges), False, float(lam[0]))
    c = -np.linalg.solve(Qz, Z.T @ g)
    A = Z @ c
    return ReducedComplexDual(dual_lower_bound(p, v1s, v3s, A), A, True, float(lam[0]))


# ----------------------------------------------------------------------------
# sampled weak duality


@dataclass
class ComplexSampleReport:
    n_samples: int
    min_slack: float
    argmin: int
    violations: int
    tol: float
    min_reduced_slack: float = float("nan")
    b2_certified: int = 0
    slacks: np.ndarray = field(default=None, repr=False)

    @property
    def passed(self):
        return self.violations == 0


def random_phi(p, rng):
    scale = np.sqrt(abs(p.beta)) * 10.0 ** rng.uniform(-2.0, 0.5)
    return scale * (rng.standard_normal(p.n_omega) + 1j * rng.standard_normal(p.n_omega))


def random_potential(p, rng):
    return coulomb_project(p, 10.0 ** rng.uniform(-2.0, 0.5) * rng.standard_normal(p.mesh.n_edges))


def random_dual(p, rng):
    """Seeded (v1, v3) with v3 > 0, so v lies in B1."""
    s1 = 10.0 ** rng.uniform(-2.0, 0.5)
    v1 = s1 * (rng.standard_normal(p.n_omega_edges) + 1j * rng.standard_normal(p.n_omega_edges))
    v3 = 10.0 ** rng.uniform(-2.0, 1.0, p.n_omega)
    return v1, v3


def weak_duality_complex(p, n_samples=1000, seed=0, tol=1e-10, reduced_every=0):
    """Seeded check of ``J(phi, A) >= J*(v, A) + G2(A)`` with A in D*.

    With ``reduced_every = m > 0`` every m-th sample also compares
    ``J(phi, A)`` against the exact inner infimum over D* whenever B2 is
    certified there (small meshes only).
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    slacks = np.empty(n_samples)
    reduced = []
    certified = 0
    for k in range(n_samples):
        rng = np.random.default_rng([seed, k])
        phi = random_phi(p, rng)
        A = random_potential(p, rng)
        v1, v3 = random_dual(p, rng)
        J = eval_J_complex(p, phi, A)
        slacks[k] = J - dual_lower_bound(p, v1, v3, A)
        if reduced_every and k % reduced_every == 0:
            red = reduced_complex_dual(p, v1, v3)
            if red.in_B2:
                certified += 1
                reduced.append(J - red.value)
    k_min = int(np.argmin(slacks))
    return ComplexSampleReport(
        n_samples=n_samples,
        min_slack=float(slacks[k_min]),
        argmin=k_min,
        violations=int(np.sum(slacks < -tol)),
        tol=tol,
        min_reduced_slack=float(min(reduced)) if reduced else float("nan"),
        b2_certified=certified,
        slacks=slacks,
    )


def gauge_defect(p, phi, A, chi):
    """``|J(phi', A') - J(phi, A)|`` for the gauge image under chi."""
    phi2, A2 = gauge_transform(p, phi, A, chi)
    return abs(eval_J_complex(p, phi2, A2) - eval_J_complex(p, phi, A))


def smooth_fields(p, seed=0, modes=3):
    """Seeded smooth (phi, A, chi) sampled from trigonometric series.

    The same seed gives the same continuum fields on every mesh of the same
    extent, which is what refinement studies need.
    """
    rng = np.random.default_rng(seed)
    Lx, Ly = p.mesh.extent
    coef = rng.standard_normal((4, modes, modes))
    phase = rng.uniform(0.0, 2.0 * np.pi, (4, modes, modes))

    def series(k, x, y):
        out = np.zeros_like(x)
        for a in range(modes):
            for b in range(modes):
                out += coef[k, a, b] / (1 + a + b) ** 2 * np.cos(
                    np.pi * (a * x / Lx + b * y / Ly) + phase[k, a, b])
        return out

    x, y = p.mesh.node_coordinates()
    nodes = p.omega_nodes
    phi = series(0, x, y)[nodes] + 1j * series(1, x, y)[nodes]
    ex, ey, axis = p.mesh.edge_midpoints()
    A = np.where(axis == 0, series(2, ex, ey), series(3, ex, ey))
    chi = series(2, x, y) * series(3, x, y)
    return phi, A, chi


__all__ = [
    "MAGNETIC_WEIGHT",
    "StaggeredMesh",
    "ComplexGLProblem",
    "gl_temperature_params",
    "eval_J_complex",
    "eval_G0star",
    "eval_G1star",
    "eval_G2",
    "eval_Jstar_complex",
    "dual_lower_bound",
    "phi_from_dual",
    "gauge_transform",
    "coulomb_project",
    "coulomb_gauge_function",
    "div_residual",
    "reduced_complex_dual",
    "b2_form",
    "b2_sampled",
    "weak_duality_complex",
    "gauge_defect",
    "smooth_fields",
]
