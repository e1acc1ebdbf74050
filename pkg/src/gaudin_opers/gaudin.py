"""Gaudin hamiltonians and Bethe vectors for sl_n on tensor products of Verma modules.

Vectors are sparse dicts from basis keys to coefficients.  A key is an
N-tuple of monomials, one per tensor factor; a monomial is a sorted tuple of
lowering generators (a, b), a > b, standing for E_ab, applied to the highest
weight vector of that factor.  Sorting is lexicographic in (a, b).

Weights are given by Dynkin labels <lam, coroot_a>; internally they are
lifted to gl_n with lam_n = 0.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (CollisionError, DimensionCapError, NumericError,
                     ValidationError)
from .miura import connection_from_solution, miura_scalar_oper
from .ratfun import sample_points

__all__ = [
    "weight_basis", "act", "gaudin_hamiltonian", "bethe_vector", "eigencheck",
    "casimir_scalar", "casimir_via_action", "eigenvalue_vs_oper", "LinearOperator",
    "WeightSpace", "gl_lift", "vacuum", "raise_total", "trace_form", "calibrate_kappa",
    "sl2_finite_hamiltonian", "bethe_weight_drop", "DEFAULT_CUTOFF",
]

DEFAULT_CUTOFF = 8


def gl_lift(lam):
    """gl_n weight (lam_1, ..., lam_n) with lam_a - lam_(a+1) = labels[a], lam_n = 0."""
    labels = [int(x) for x in lam]
    out = [0] * (len(labels) + 1)
    for a in range(len(labels) - 1, -1, -1):
        out[a] = out[a + 1] + labels[a]
    return tuple(out)


def trace_form(n, lam, mu):
    """Invariant form on weights induced by the trace form of sl_n."""
    a, b = np.array(gl_lift(lam), float), np.array(gl_lift(mu), float)
    return float(a @ b - a.sum() * b.sum() / n)


def _positive_roots(n):
    """Lowering generators (a, b), a > b, in lexicographic order (1-based)."""
    return [(a, b) for a in range(1, n + 1) for b in range(1, a)]


def _content(n, gen):
    a, b = gen
    out = [0] * (n - 1)
    for k in range(b, a):
        out[k - 1] += 1
    return out


# -- normal ordering -------------------------------------------------------------

def _bracket(x, y):
    """[E_ab, E_cd] = d_bc E_ad - d_da E_cb as a list of (coeff, gen)."""
    (a, b), (c, d) = x, y
    out = []
    if b == c:
        out.append((1, (a, d)))
    if d == a:
        out.append((-1, (c, b)))
    return out


def _lowering(g):
    return g[0] > g[1]


@lru_cache(maxsize=None)
def _normalize(word, lam):
    """word (a tuple of generators, rightmost acts first) applied to v_lam,
    as a tuple of (normal-ordered monomial, coeff)."""
    if not word:
        return (((), 1.0),)
    # longest normal-ordered lowering suffix
    p = len(word)
    while p > 0:
        g = word[p - 1]
        if not _lowering(g) or (p < len(word) and g > word[p]):
            break
        p -= 1
    if p == 0:
        return ((word, 1.0),)
    q = p - 1
    x = word[q]
    if q == len(word) - 1:
        # x acts on v_lam directly
        a, b = x
        if a < b:
            return ()
        if a == b:
            coeff = float(lam[a - 1])
            if coeff == 0:
                return ()
            return tuple((m, coeff * c) for m, c in _normalize(word[:-1], lam))
    y = word[q + 1]
    acc = {}
    _accumulate(acc, _normalize(word[:q] + (y, x) + word[q + 2:], lam), 1.0)
    for c, g in _bracket(x, y):
        _accumulate(acc, _normalize(word[:q] + (g,) + word[q + 2:], lam), c)
    return tuple((m, c) for m, c in acc.items() if c != 0)


def _accumulate(acc, terms, scale):
    for m, c in terms:
        acc[m] = acc.get(m, 0.0) + scale * c


def vacuum(N):
    return {tuple(() for _ in range(N)): 1.0}


def act(gen, k, vec, lams):
    """E_ab acting on tensor factor k (0-based) of ``vec``.

    ``lams`` are the gl_n lifts of the factors' highest weights.
    """
    out = {}
    lam = tuple(lams[k])
    for key, c in vec.items():
        for mono, d in _normalize((tuple(gen),) + key[k], lam):
            new = key[:k] + (mono,) + key[k + 1:]
            out[new] = out.get(new, 0) + c * d
    return {key: c for key, c in out.items() if c != 0}


def _add(u, v, scale=1.0):
    out = dict(u)
    for key, c in v.items():
        out[key] = out.get(key, 0) + scale * c
    return {key: c for key, c in out.items() if c != 0}


# -- weight spaces -------------------------------------------------------------------

@dataclass(frozen=True)
class WeightSpace:
    n: int
    lams: tuple      # Dynkin labels per factor
    beta: tuple      # simple-root counts of the weight drop
    keys: tuple

    @property
    def dim(self):
        return len(self.keys)

    @property
    def lifts(self):
        return tuple(gl_lift(l) for l in self.lams)

    def index(self):
        return {k: i for i, k in enumerate(self.keys)}

    def to_array(self, vec):
        idx = self.index()
        out = np.zeros(self.dim, complex)
        for key, c in vec.items():
            if key not in idx:
                raise ValidationError(f"vector component {key} outside the weight space")
            out[idx[key]] = c
        return out


def weight_basis(n, lams, beta, cutoff=DEFAULT_CUTOFF):
    beta = tuple(int(b) for b in beta)
    if len(beta) != n - 1 or any(b < 0 for b in beta):
        raise ValidationError(f"weight drop must be {n - 1} nonnegative counts")
    if sum(beta) > cutoff:
        raise DimensionCapError(f"weight drop {beta} exceeds cutoff {cutoff}")
    N = len(lams)
    roots = _positive_roots(n)
    contents = [np.array(_content(n, r)) for r in roots]
    slots = [(k, r) for k in range(N) for r in range(len(roots))]
    found = []

    def rec(s, remaining, counts):
        if not remaining.any():
            found.append(dict(counts))
            return
        if s == len(slots):
            return
        k, r = slots[s]
        c = contents[r]
        mult = 0
        rem = remaining.copy()
        while True:
            if mult:
                counts[(k, r)] = mult
            rec(s + 1, rem, counts)
            rem = rem - c
            if np.any(rem < 0):
                break
            mult += 1
        counts.pop((k, r), None)

    rec(0, np.array(beta), {})
    keys = []
    for counts in found:
        key = []
        for k in range(N):
            mono = []
            for r in range(len(roots)):
                mono += [roots[r]] * counts.get((k, r), 0)
            key.append(tuple(mono))
        keys.append(tuple(key))
    keys.sort()
    return WeightSpace(n, tuple(tuple(int(x) for x in l) for l in lams), beta, tuple(keys))


# -- operators ------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LinearOperator:
    space: WeightSpace
    matrix: np.ndarray

    def __call__(self, vec):
        if isinstance(vec, dict):
            vec = self.space.to_array(vec)
        return self.matrix @ vec

    def __sub__(self, other):
        return LinearOperator(self.space, self.matrix - other.matrix)

    def __add__(self, other):
        return LinearOperator(self.space, self.matrix + other.matrix)

    def __matmul__(self, other):
        return LinearOperator(self.space, self.matrix @ other.matrix)


def _omega(n, i, j, vec, lifts):
    """Casimir tensor sum_a J_a^(i) J^a(j) under the trace form."""
    out = {}
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            if a == b:
                continue
            out = _add(out, act((a, b), i, act((b, a), j, vec, lifts), lifts))
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            w = (1.0 if a == b else 0.0) - 1.0 / n
            out = _add(out, act((a, a), i, act((b, b), j, vec, lifts), lifts), w)
    return out


def gaudin_hamiltonian(n, lams, z, i, space=None, beta=None):
    """Matrix of Xi_i = sum_{j != i} Omega^(ij) / (z_i - z_j) (i is 0-based)."""
    z = np.asarray(z, complex)
    if len(set(z.tolist())) != len(z):
        raise ValidationError("sites must be distinct")
    if space is None:
        space = weight_basis(n, lams, beta)
    lifts = space.lifts
    idx = space.index()
    M = np.zeros((space.dim, space.dim), complex)
    for col, key in enumerate(space.keys):
        vec = {}
        for j in range(len(z)):
            if j != i:
                vec = _add(vec, _omega(n, i, j, {key: 1.0}, lifts), 1 / (z[i] - z[j]))
        for k2, c in vec.items():
            M[idx[k2], col] += c
    return LinearOperator(space, M)


def raise_total(a, vec, lifts):
    """e_a = E_(a, a+1) acting diagonally on the tensor product."""
    out = {}
    for k in range(len(lifts)):
        out = _add(out, act((a, a + 1), k, vec, lifts))
    return out


def sl2_finite_hamiltonian(spins, z, i):
    """Xi_i on the full finite-dimensional tensor product of sl_2 irreps.

    ``spins`` are Dynkin labels p_k (module dimension p_k + 1); the basis is
    the tensor product of f^j v bases, used as an independent check.
    """
    mats = []
    for p in spins:
        d = p + 1
        e = np.zeros((d, d)); f = np.zeros((d, d)); h = np.diag([p - 2.0 * j for j in range(d)])
        for j in range(d - 1):
            f[j + 1, j] = 1.0
            e[j, j + 1] = (j + 1) * (p - j)
        mats.append((e, f, h))
    dims = [p + 1 for p in spins]

    def embed(k, m):
        out = np.array([[1.0]])
        for s, d in enumerate(dims):
            out = np.kron(out, m if s == k else np.eye(d))
        return out

    total = np.zeros((int(np.prod(dims)),) * 2, complex)
    for j in range(len(spins)):
        if j == i:
            continue
        ei, fi, hi = (embed(i, m) for m in mats[i])
        ej, fj, hj = (embed(j, m) for m in mats[j])
        # trace form dual bases: e <-> f, h <-> h/2
        omega = ei @ fj + fi @ ej + 0.5 * hi @ hj
        total += omega / (z[i] - z[j])
    return total


# -- Bethe vectors ---------------------------------------------------------------------

def bethe_vector(n, lams, z, colors, roots, coll_tol=1e-10):
    """Sum over ordered partitions of the roots among the N factors."""
    z = np.asarray(z, complex)
    roots = np.asarray(roots, complex)
    m, N = len(roots), len(z)
    for j in range(m):
        if N and np.abs(roots[j] - z).min() < coll_tol:
            raise CollisionError(f"root {roots[j]} sits on a site", pair=(j, "site"))
        for s in range(j):
            if abs(roots[j] - roots[s]) < coll_tol:
                raise CollisionError(f"roots {s + 1} and {j + 1} coincide", pair=(s, j))
    lifts = tuple(gl_lift(l) for l in lams)
    out = {}
    for assign in itertools.product(range(N), repeat=m):
        groups = [[j for j in range(m) if assign[j] == k] for k in range(N)]
        for orders in itertools.product(*(itertools.permutations(g) for g in groups)):
            coeff = 1.0 + 0j
            for k, seq in enumerate(orders):
                for a in range(len(seq)):
                    nxt = roots[seq[a + 1]] if a + 1 < len(seq) else z[k]
                    coeff /= roots[seq[a]] - nxt
            vec = vacuum(N)
            for k, seq in enumerate(orders):
                for j in reversed(seq):
                    c = colors[j]
                    vec = act((c + 1, c), k, vec, lifts)
            out = _add(out, vec, coeff)
    return out


def bethe_weight_drop(n, colors):
    beta = [0] * (n - 1)
    for c in colors:
        beta[c - 1] += 1
    return tuple(beta)


def eigencheck(op, vec):
    v = op.space.to_array(vec) if isinstance(vec, dict) else np.asarray(vec, complex)
    nv = np.linalg.norm(v)
    if nv == 0:
        raise NumericError("eigencheck of the zero vector")
    Av = op.matrix @ v
    theta = np.vdot(v, Av) / np.vdot(v, v)
    return complex(theta), float(np.linalg.norm(Av - theta * v) / nv)


def casimir_scalar(n, lam):
    rho = [1] * (n - 1)
    return 0.5 * trace_form(n, lam, [l + 2 * r for l, r in zip(lam, rho)])


def casimir_via_action(n, lam):
    """Eigenvalue of 1/2 sum J_a J^a on v_lam, computed by the module action."""
    lifts = (gl_lift(lam),)
    v = vacuum(1)
    out = {}
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            w = 1.0 if a != b else 0.0
            if a != b:
                out = _add(out, act((a, b), 0, act((b, a), 0, v, lifts), lifts), 0.5 * w)
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            w = (1.0 if a == b else 0.0) - 1.0 / n
            out = _add(out, act((a, a), 0, act((b, b), 0, v, lifts), lifts), 0.5 * w)
    key = ((),)
    if set(out) - {key}:
        raise NumericError("Casimir did not act by a scalar on the highest weight vector")
    return complex(out.get(key, 0.0))


# -- eigenvalues and opers --------------------------------------------------------------

def _psi(thetas, deltas, z, u):
    u = np.asarray(u, complex)
    out = np.zeros_like(u)
    for th, de, zi in zip(thetas, deltas, z):
        out += th / (u - zi) + de / (u - zi) ** 2
    return out


@lru_cache(maxsize=None)
def calibrate_kappa(n):
    """kappa with Delta(lam)/u^2 = kappa * v_1(u) for one site at 0 and no roots."""
    from .bethe import BetheProblem
    from .rootdata import load_cartan
    lam = [1] + [0] * (n - 2)
    problem = BetheProblem(load_cartan(f"A{n - 1}"), ((0.0, lam),))
    oper = miura_scalar_oper(connection_from_solution(problem, np.zeros(0)))
    v1 = oper.evaluate(1, np.array([1.0]))[0]
    return float(np.real(casimir_scalar(n, lam) / v1))


def eigenvalue_vs_oper(problem, solution, thetas, deltas=None, kappa=None, points=None):
    """Compare sum theta_i/(u-z_i) + Delta_i/(u-z_i)^2 with kappa * v_1(u)."""
    n = problem.rank + 1
    if problem.cartan.kind not in ("A1", "A2") and n not in (2, 3):
        raise ValidationError("eigenvalue/oper matching is implemented for sl_2 and sl_3")
    if deltas is None:
        deltas = [casimir_scalar(n, lam) for _, lam in problem.sites]
    if kappa is None:
        kappa = calibrate_kappa(n)
    roots = solution.roots if hasattr(solution, "roots") else np.asarray(solution, complex)
    oper = miura_scalar_oper(connection_from_solution(problem, roots))
    if points is None:
        points = sample_points(10, np.random.default_rng(11), avoid=list(problem.z) + list(roots), min_dist=0.3)
    psi = _psi(thetas, deltas, problem.z, points)
    v1 = oper.evaluate(1, points)
    dev = np.abs(psi - kappa * v1)
    return {
        "kappa": kappa,
        "max_deviation": float(dev.max()),
        "points": points,
        "psi": psi,
        "v1": v1,
    }
