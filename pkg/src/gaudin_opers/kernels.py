"""Hot numeric kernels for the Bethe equations.

Each kernel exists twice: a loop version compiled with numba when available,
and a vectorized numpy version. ``bae_residual`` / ``bae_jacobian`` /
``min_separation`` dispatch on ``_accel.HAVE_NUMBA``; the explicit
``*_numpy`` / ``*_loops`` names stay importable so tests and the benchmark can
compare both paths.

Array conventions (all kernels):
    w      : (m,) complex roots
    colors : (m,) int64, 0-based simple-root index of each root
    z      : (N,) complex sites
    pair   : (N, l) float, pair[i, a] = <alpha_a, lambda_i>
    A      : (l, l) float Cartan matrix, A[i, j] = <alpha_j, coroot_i>
"""

import numpy as np

from ._accel import HAVE_NUMBA, njit


def bae_residual_numpy(w, colors, z, pair, A):
    if w.shape[0] == 0:
        return np.zeros(0, dtype=np.complex128)
    site_part = (pair[:, colors].T / (w[:, None] - z[None, :])).sum(axis=1)
    dw = w[:, None] - w[None, :]
    np.fill_diagonal(dw, 1.0)
    # coupling[j, s] = <alpha_{c(j)}, coroot_{c(s)}> = A[c(s), c(j)]
    coupling = A[colors][:, colors].T.copy()
    np.fill_diagonal(coupling, 0.0)
    return site_part - (coupling / dw).sum(axis=1)


def bae_jacobian_numpy(w, colors, z, pair, A):
    m = w.shape[0]
    if m == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    dw = w[:, None] - w[None, :]
    np.fill_diagonal(dw, 1.0)
    coupling = A[colors][:, colors].T.copy()
    np.fill_diagonal(coupling, 0.0)
    off = -coupling / dw**2
    diag = -(pair[:, colors].T / (w[:, None] - z[None, :]) ** 2).sum(axis=1)
    diag = diag - off.sum(axis=1)
    jac = off
    jac[np.arange(m), np.arange(m)] = diag
    return jac


def min_separation_numpy(w, z):
    """Smallest distance from any root to a site or to another root."""
    best = np.inf
    if w.shape[0] and z.shape[0]:
        best = np.abs(w[:, None] - z[None, :]).min()
    if w.shape[0] > 1:
        dw = np.abs(w[:, None] - w[None, :])
        np.fill_diagonal(dw, np.inf)
        best = min(best, dw.min())
    return float(best)


@njit(cache=True)
def bae_residual_loops(w, colors, z, pair, A):
    m = w.shape[0]
    out = np.zeros(m, dtype=np.complex128)
    for j in range(m):
        cj = colors[j]
        acc = 0j
        for i in range(z.shape[0]):
            acc += pair[i, cj] / (w[j] - z[i])
        for s in range(m):
            if s != j:
                acc -= A[colors[s], cj] / (w[j] - w[s])
        out[j] = acc
    return out


@njit(cache=True)
def bae_jacobian_loops(w, colors, z, pair, A):
    m = w.shape[0]
    jac = np.zeros((m, m), dtype=np.complex128)
    for j in range(m):
        cj = colors[j]
        d = 0j
        for i in range(z.shape[0]):
            d -= pair[i, cj] / (w[j] - z[i]) ** 2
        for s in range(m):
            if s != j:
                term = A[colors[s], cj] / (w[j] - w[s]) ** 2
                d += term
                jac[j, s] = -term
        jac[j, j] = d
    return jac


@njit(cache=True)
def min_separation_loops(w, z):
    best = np.inf
    for j in range(w.shape[0]):
        for i in range(z.shape[0]):
            d = abs(w[j] - z[i])
            if d < best:
                best = d
        for s in range(j + 1, w.shape[0]):
            d = abs(w[j] - w[s])
            if d < best:
                best = d
    return best


if HAVE_NUMBA:
    bae_residual = bae_residual_loops
    bae_jacobian = bae_jacobian_loops
    min_separation = min_separation_loops
else:
    bae_residual = bae_residual_numpy
    bae_jacobian = bae_jacobian_numpy
    min_separation = min_separation_numpy

BACKEND = "numba" if HAVE_NUMBA else "numpy"
