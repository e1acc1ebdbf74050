"""Bethe Ansatz equations for an arbitrary (generalized) Cartan matrix.

Equation j of a problem with sites (z_i, lam_i) and colored roots w_j reads

    sum_i <alpha_c(j), lam_i> / (w_j - z_i)
        - sum_{s != j} <alpha_c(j), coroot_c(s)> / (w_j - w_s) = 0,

with <alpha_c(j), coroot_c(s)> = A[c(s), c(j)].  Colors are 1-based.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import kernels
from .errors import (CollisionError, DivergenceError, GaudinOpersError,
                     InconsistencyError, LinearSolveError, ValidationError)
from .rootdata import GeneralizedCartanMatrix, load_cartan, rho, to_dominant

logger = logging.getLogger(__name__)

__all__ = [
    "BetheProblem", "BetheSolution", "residual", "jacobian", "newton_solve",
    "multi_start_solve", "residue_at_infinity", "classify_cell",
    "canonical_roots", "same_roots",
]


@dataclass(frozen=True, eq=False)
class BetheProblem:
    cartan: GeneralizedCartanMatrix
    sites: tuple  # ((z, lam), ...) with lam an int array of pairings
    colors: tuple = ()

    def __post_init__(self):
        A = load_cartan(self.cartan)
        object.__setattr__(self, "cartan", A)
        sites = []
        for z, lam in self.sites:
            lam = np.asarray(lam)
            if lam.shape != (A.rank,):
                raise ValidationError(f"site coweight {lam.tolist()} must have {A.rank} pairings")
            if not np.all(lam == np.round(lam)) or np.any(lam < 0):
                raise ValidationError(f"site coweight {lam.tolist()} must be dominant integral")
            lam = lam.astype(np.int64)
            lam.setflags(write=False)
            sites.append((complex(z), lam))
        zs = [z for z, _ in sites]
        for i in range(len(zs)):
            for j in range(i + 1, len(zs)):
                if zs[i] == zs[j]:
                    raise ValidationError(f"sites {i + 1} and {j + 1} coincide at {zs[i]}")
        object.__setattr__(self, "sites", tuple(sites))
        colors = tuple(int(c) for c in self.colors)
        for c in colors:
            if not 1 <= c <= A.rank:
                raise ValidationError(f"color {c} outside 1..{A.rank}")
        object.__setattr__(self, "colors", colors)

    @property
    def rank(self):
        return self.cartan.rank

    @property
    def m(self):
        return len(self.colors)

    @property
    def z(self):
        return np.array([z for z, _ in self.sites], dtype=np.complex128)

    @property
    def pairings(self):
        """(N, l) float array of <alpha_a, lam_i>."""
        if not self.sites:
            return np.zeros((0, self.rank))
        return np.array([lam for _, lam in self.sites], dtype=np.float64)

    @property
    def colors0(self):
        return np.array(self.colors, dtype=np.int64) - 1

    def default_coll_tol(self):
        z = self.z
        diam = float(np.abs(z[:, None] - z[None, :]).max()) if len(z) > 1 else 0.0
        return 1e-6 * (diam if diam > 0 else max(1.0, float(np.abs(z).max(initial=0.0))))

    def with_colors(self, colors):
        return BetheProblem(self.cartan, self.sites, tuple(colors))

    def _args(self, roots):
        w = np.asarray(roots, dtype=np.complex128).ravel()
        if w.shape[0] != self.m:
            raise ValidationError(f"expected {self.m} roots, got {w.shape[0]}")
        A = self.cartan.entries.astype(np.float64)
        return w, self.colors0, self.z, self.pairings, A


def canonical_roots(colors, roots):
    """Roots re-ordered within each color class by (real, imag).

    Positions of each color are preserved, so the result still lines up with
    ``colors``.
    """
    colors = np.asarray(colors, dtype=np.int64)
    roots = np.array(roots, dtype=np.complex128)
    out = roots.copy()
    for c in np.unique(colors):
        idx = np.flatnonzero(colors == c)
        sub = roots[idx]
        order = np.lexsort((np.round(sub.imag, 9), np.round(sub.real, 9)))
        out[idx] = sub[order]
    return out


def same_roots(colors, a, b, tol):
    """True when a and b agree up to a color-preserving permutation."""
    colors = np.asarray(colors)
    a = np.asarray(a, complex)
    b = np.asarray(b, complex)
    if a.shape != b.shape:
        return False
    for c in np.unique(colors):
        sel = colors == c
        d = np.abs(a[sel][:, None] - b[sel][None, :])
        r, k = linear_sum_assignment(d)
        if d[r, k].max(initial=0.0) > tol:
            return False
    return True


@dataclass(eq=False)
class BetheSolution:
    problem: BetheProblem
    roots: np.ndarray
    residual: float
    jacobian_rank: int | None = None
    iterations: int = 0
    info: dict = field(default_factory=dict)

    @property
    def isolated(self):
        return self.jacobian_rank is None or self.jacobian_rank == self.problem.m

    def canonical(self):
        return canonical_roots(self.problem.colors, self.roots)

    def roots_of_color(self, c):
        return self.roots[np.asarray(self.problem.colors, dtype=int) == c]

    def same_as(self, other, tol=1e-8):
        return (self.problem.colors == other.problem.colors
                and same_roots(self.problem.colors, self.roots, other.roots, tol))

    def __eq__(self, other):
        if not isinstance(other, BetheSolution):
            return NotImplemented
        return self.same_as(other)

    __hash__ = None


def _collision_pair(problem, w, eps):
    z = problem.z
    for j in range(len(w)):
        for i in range(len(z)):
            if abs(w[j] - z[i]) < eps:
                return ("root", j + 1, "site", i + 1)
        for s in range(j + 1, len(w)):
            if abs(w[j] - w[s]) < eps:
                return ("root", j + 1, "root", s + 1)
    return None


def _guard(problem, w, eps):
    if len(w) and kernels.min_separation(w, problem.z) < eps:
        pair = _collision_pair(problem, w, eps)
        raise CollisionError(f"collision within {eps:.3g}: {pair[0]} {pair[1]} and {pair[2]} {pair[3]}",
                             pair=pair)


def residual(problem, roots, coll_tol=None):
    """Values of the m Bethe equations at ``roots``."""
    args = problem._args(roots)
    eps = problem.default_coll_tol() if coll_tol is None else coll_tol
    _guard(problem, args[0], eps)
    return kernels.bae_residual(*args)


def jacobian(problem, roots, coll_tol=None):
    """Analytic m x m derivative of :func:`residual`."""
    args = problem._args(roots)
    eps = problem.default_coll_tol() if coll_tol is None else coll_tol
    _guard(problem, args[0], eps)
    return kernels.bae_jacobian(*args)


def _numerical_rank(jac):
    if jac.size == 0:
        return 0
    s = np.linalg.svd(jac, compute_uv=False)
    return int(np.sum(s > 1e-7 * max(1.0, s[0])))


def newton_solve(problem, start, max_iter=100, tol=1e-12, coll_tol=None, damping=1.0,
                 blowup=1e8, max_step=0.5):
    """Damped Newton iteration from ``start``.

    Newton runs on the weighted system G_j = F_j * (w_j - z_1), which has the
    same zeros away from the collision guard.  When every site sits at z_1 the
    raw equations are homogeneous of degree -1 and plain Newton exactly
    doubles the iterate; the weight makes G scale invariant instead, and the
    least-squares step then lands on the solution family.  The returned
    solution carries the numerical rank of the raw Jacobian there.

    Steps are capped at ``max_step`` times the current problem size and
    halved while they enter the collision guard ball or fail to decrease |G|.
    """
    w = np.array(start, dtype=np.complex128).ravel()
    args = list(problem._args(w))
    eps = problem.default_coll_tol() if coll_tol is None else coll_tol
    _guard(problem, w, eps)
    if problem.m == 0:
        return BetheSolution(problem, w, 0.0, jacobian_rank=0)
    rest = args[1:]
    z = args[2]
    anchor = z[0] if len(z) else 0j
    scale = max(1.0, float(np.abs(z).max(initial=0.0)))
    f = kernels.bae_residual(w, *rest)
    norm = np.abs(f).max()
    for it in range(max_iter):
        if norm < tol:
            jac = kernels.bae_jacobian(w, *rest)
            return BetheSolution(problem, w, float(norm), _numerical_rank(jac), it)
        jac = kernels.bae_jacobian(w, *rest)
        d = w - anchor if len(z) else np.ones_like(w)
        g = f * d
        jac_g = d[:, None] * jac
        if len(z):
            jac_g[np.diag_indices_from(jac_g)] += f
        step, *_ = np.linalg.lstsq(jac_g, g, rcond=1e-12)
        if not np.all(np.isfinite(step)):
            raise LinearSolveError(f"non-finite Newton step at iteration {it}")
        # bounded steps plus a decrease test on |G| (which, unlike |F|, does
        # not vanish at infinity) keep iterates from running off
        g_norm = np.linalg.norm(g)
        cap = max_step * (scale + float(np.abs(w - anchor).max()))
        t = damping * min(1.0, cap / max(np.abs(step).max(), 1e-300))
        for _ in range(60):
            trial = w - t * step
            if kernels.min_separation(trial, z) >= eps:
                f_trial = kernels.bae_residual(trial, *rest)
                d_trial = trial - anchor if len(z) else np.ones_like(trial)
                if np.linalg.norm(f_trial * d_trial) <= (1 - 1e-4 * t) * g_norm or np.abs(f_trial).max() < tol:
                    break
            t *= 0.5
        else:
            raise DivergenceError(f"no admissible step at iteration {it}",
                                  last_iterate=w, residual=norm)
        w = trial
        f = f_trial
        norm = np.abs(f).max()
        if not np.isfinite(norm) or np.abs(w).max() > blowup * scale:
            raise DivergenceError(f"iterates escaped to infinity (|w| = {np.abs(w).max():.3g})",
                                  last_iterate=w, residual=norm)
    if norm < tol:
        jac = kernels.bae_jacobian(w, *rest)
        return BetheSolution(problem, w, float(norm), _numerical_rank(jac), max_iter)
    raise DivergenceError(f"no convergence after {max_iter} iterations (residual {norm:.3g})",
                          last_iterate=w, residual=norm)


def _start_radius(problem):
    z = problem.z
    if len(z) == 0:
        return 2.0
    c = z.mean()
    return 1.0 + 2.0 * float(np.abs(z - c).max())


def multi_start_solve(problem, num_starts=64, seed=0, dedup_tol=1e-6, radius=None,
                      workers=None, starts=None, failures=None, **newton_opts):
    """Newton from many random starts; deduplicated solutions in canonical order.

    Start k is drawn from its own child of ``SeedSequence(seed)``, so the
    result does not depend on ``workers``.  Extra explicit ``starts`` are
    tried first.  If ``failures`` is a list, (start index, "ErrorType: message")
    pairs are appended to it for starts that did not converge.
    """
    if problem.m == 0:
        return [BetheSolution(problem, np.zeros(0, complex), 0.0, jacobian_rank=0)]
    z = problem.z
    center = z.mean() if len(z) else 0j
    radius = _start_radius(problem) if radius is None else radius
    children = np.random.SeedSequence(seed).spawn(num_starts)

    def draw(ss):
        rng = np.random.default_rng(ss)
        r = radius * np.sqrt(rng.uniform(size=problem.m))
        phi = rng.uniform(0, 2 * np.pi, size=problem.m)
        return center + r * np.exp(1j * phi)

    all_starts = [np.asarray(s, complex) for s in (starts or [])] + [draw(ss) for ss in children]

    def run(item):
        k, s = item
        try:
            return newton_solve(problem, s, **newton_opts)
        except GaudinOpersError as exc:
            logger.debug("start %d dropped: %s", k, exc)
            if failures is not None:
                failures.append((k, f"{type(exc).__name__}: {exc}"))
            return None

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, enumerate(all_starts)))
    else:
        results = [run(item) for item in enumerate(all_starts)]

    found = []
    for sol in results:
        if sol is None:
            continue
        if not any(sol.same_as(other, dedup_tol) for other in found):
            found.append(sol)
    for sol in found:
        sol.roots = canonical_roots(problem.colors, sol.roots)
    found.sort(key=lambda s: tuple((round(r.real, 9), round(r.imag, 9)) for r in s.roots))
    return found


def residue_at_infinity(problem, solution=None):
    """sum_k lam_k - sum_j coroot_c(j), in pairing coordinates."""
    A = problem.cartan.entries
    mu = np.zeros(problem.rank, dtype=np.int64)
    for _, lam in problem.sites:
        mu = mu + lam
    for c in problem.colors:
        mu = mu - A[c - 1]
    return mu


def classify_cell(problem, solution=None, cap=10_000, mu=None):
    """(lam_inf, y) with residue at infinity = y(lam_inf + rho) - rho."""
    A = problem.cartan if problem is not None else None
    if mu is None:
        mu = residue_at_infinity(problem, solution)
    mu = np.asarray(mu)
    if np.any(mu == -1):
        bad = [int(a) + 1 for a in np.flatnonzero(mu == -1)]
        raise InconsistencyError(
            f"residue at infinity {mu.tolist()} pairs to -1 with alpha_{bad}: not a Bethe solution")
    r = rho(A)
    dom, word = to_dominant(A, mu + r, cap=cap)
    lam_inf = dom - r
    if np.any(lam_inf < 0):
        raise InconsistencyError(
            f"mu_inf + rho = {(mu + r).tolist()} lies on a wall; no dominant lam_inf")
    return lam_inf, word
