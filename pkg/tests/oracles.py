"""Independent reference computations for the tests.

Nothing here calls into gldual's operators: Laplacians and covariant
gradients are assembled by explicit loops over node coordinates, and
conjugates are computed as suprema of concave quadratics recovered by
probing, then solved densely.
"""

import itertools

import numpy as np


def dense_laplacian(extent, n):
    """Dirichlet 3/5-point Laplacian by looping over nodes and neighbours."""
    extent = np.atleast_1d(extent).astype(float)
    n = np.atleast_1d(n).astype(int)
    h = extent / (n + 1)
    nodes = list(itertools.product(*[range(k) for k in n]))
    index = {node: i for i, node in enumerate(nodes)}
    L = np.zeros((len(nodes), len(nodes)))
    for node, i in index.items():
        for axis in range(len(n)):
            L[i, i] -= 2.0 / h[axis] ** 2
            for step in (-1, 1):
                nb = list(node)
                nb[axis] += step
                j = index.get(tuple(nb))
                if j is not None:
                    L[i, j] += 1.0 / h[axis] ** 2
    return L, float(np.prod(h))


def quadratic_sup(fun, n):
    """``sup_x fun(x)`` for a concave quadratic ``fun`` on R^n.

    Coefficients are recovered exactly (up to rounding) from values at the
    unit vectors and their pairwise sums, then the stationarity system is
    solved densely.
    """
    f0 = fun(np.zeros(n))
    E = np.eye(n)
    fp = np.array([fun(E[i]) for i in range(n)])
    fm = np.array([fun(-E[i]) for i in range(n)])
    g = 0.5 * (fp - fm)
    H = np.empty((n, n))
    for i in range(n):
        H[i, i] = fp[i] + fm[i] - 2.0 * f0
        for j in range(i + 1, n):
            H[i, j] = H[j, i] = fun(E[i] + E[j]) - fp[i] - fp[j] + f0
    if np.linalg.eigvalsh(H)[-1] >= 0:
        raise ValueError("the probed quadratic is not strictly concave")
    x = -np.linalg.solve(H, g)
    return f0 + 0.5 * g @ x, x


def fstar_oracle(extent, n, gamma, K, v1):
    """``sup_u <u, v1> - 1/2 <u, (K I + gamma L) u>``."""
    L, w = dense_laplacian(extent, n)
    M = K * np.eye(L.shape[0]) + gamma * L

    def fun(u):
        return w * (u @ v1) - 0.5 * w * (u @ M @ u)

    return quadratic_sup(fun, L.shape[0])[0]


def gstar_oracle(extent, n, alpha, beta, K, f, v1, v0):
    """``sup_{u, v} <u, v1> + <v, v0> - G(u, v)`` with
    ``G(u, v) = alpha/2 sum_w (u^2 - beta + v)^2 + K/2 <u, u> - <u, f>``.

    The change of variables y = u^2 - beta + v makes the objective a
    quadratic in (u, y).
    """
    _, w = dense_laplacian(extent, n)
    N = len(v1)

    def fun(x):
        u, y = x[:N], x[N:]
        v = y - u**2 + beta
        G = 0.5 * alpha * w * np.sum(y**2) + 0.5 * K * w * (u @ u) - w * (u @ f)
        return w * (u @ v1) + w * (v @ v0) - G

    return quadratic_sup(fun, 2 * N)[0]


# ----------------------------------------------------------------------------
# complex case


def staggered_layout(cells):
    """Node and edge numbering of the staggered mesh, rebuilt from scratch:
    nodes (i, j) row-major over j, x-edges first (i-major), then y-edges."""
    nx, ny = cells
    node = {(i, j): i * (ny + 1) + j for i in range(nx + 1) for j in range(ny + 1)}
    edges = []
    for i in range(nx):
        for j in range(ny + 1):
            edges.append(((i, j), (i + 1, j), 0))
    for i in range(nx + 1):
        for j in range(ny):
            edges.append(((i, j), (i, j + 1), 1))
    return node, edges


def dense_covariant(cells, extent, block, edge_mode, rho, A):
    """Dense D_A on the Omega edges: (phi_b - phi_a)/h - i rho A (phi_a + phi_b)/2."""
    nx, ny = cells
    h = (extent[0] / nx, extent[1] / ny)
    i0, i1, j0, j1 = block
    omega = [(i, j) for i in range(i0, i1) for j in range(j0, j1)]
    col = {nd: k for k, nd in enumerate(omega)}
    _, edges = staggered_layout(cells)
    rows = []
    for e, (a, b, axis) in enumerate(edges):
        ina, inb = a in col, b in col
        keep = (ina and inb) if edge_mode == "free" else (ina or inb)
        if not keep:
            continue
        row = np.zeros(len(omega), dtype=complex)
        for nd, sgn in ((a, -1.0), (b, 1.0)):
            if nd in col:
                row[col[nd]] += sgn / h[axis] - 0.5j * rho * A[e]
        rows.append(row)
    return np.array(rows).reshape(len(rows), len(omega)), h[0] * h[1]


def g0star_oracle(gamma, w, v1):
    """``sup_z <v1, z> - gamma/2 |z|^2`` over complex z (realified)."""
    m = len(v1)

    def fun(x):
        z = x[:m] + 1j * x[m:]
        return w * np.sum((np.conj(v1) * z).real) - 0.5 * gamma * w * np.sum(np.abs(z) ** 2)

    return quadratic_sup(fun, 2 * m)[0]


def g1star_oracle(D, w, alpha, beta, f, v1, v3):
    """``sup_{phi, v} -<v1, D phi> + <v3, v> - G1(phi, v)`` with
    ``G1 = alpha/2 sum_w (|phi|^2 - beta + v)^2 - <phi, f>``; quadratic after
    y = |phi|^2 - beta + v."""
    N = D.shape[1]

    def fun(x):
        phi = x[:N] + 1j * x[N:2 * N]
        y = x[2 * N:]
        v = y - np.abs(phi) ** 2 + beta
        pair = w * np.sum((np.conj(v1) * (D @ phi)).real) if D.size else 0.0
        G1 = 0.5 * alpha * w * np.sum(y**2) - w * np.sum((np.conj(phi) * f).real)
        return -pair + w * (v3 @ v) - G1

    return quadratic_sup(fun, 3 * N)[0]


def central_gradient(fun, x, eps):
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = eps
        g[i] = (fun(x + e) - fun(x - e)) / (2.0 * eps)
    return g
