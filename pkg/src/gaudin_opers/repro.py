"""Reproduction of polynomial tuples, the Riccati gauge action and populations.

A tuple (y_1, ..., y_l) of monic polynomials encodes colored roots: the roots
of y_i are the roots of color i.  Reproduction in direction i replaces y_i by
y_i * (integral of T_i prod_j y_j^(-a_ji) / y_i^2 + c), which is again a
polynomial exactly when the integrand has no residues, i.e. when the Bethe
equations for color i hold.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .bethe import BetheProblem, classify_cell
from .errors import (CollisionError, GaudinOpersError, InfertileError,
                     NumericError, ValidationError)
from .miura import connection_from_solution
from .ratfun import (DEFAULT_TOL, Poly, RatFun, find_roots, hermite_integrate,
                     poly_from_roots, sample_points)

logger = logging.getLogger(__name__)

__all__ = [
    "PolyTuple", "tuple_from_solution", "master_integrand", "reproduce",
    "riccati_gauge", "explore_population", "Population", "PopulationNode",
    "PopulationEdge", "DEFAULT_C_SAMPLES",
]

DEFAULT_C_SAMPLES = (0.0, 1.0, -1.0, 1j, 0.37)


@dataclass(frozen=True, eq=False)
class PolyTuple:
    problem: BetheProblem
    polys: tuple
    # per component: list of (root, multiplicity); filled from the polynomial if absent
    roots: tuple = None

    def __post_init__(self):
        if len(self.polys) != self.problem.rank:
            raise ValidationError(f"need {self.problem.rank} polynomials, got {len(self.polys)}")
        polys = []
        for p in self.polys:
            p = p if isinstance(p, Poly) else Poly(p)
            if p.is_zero():
                raise ValidationError("tuple component is the zero polynomial")
            polys.append(p.monic())
        object.__setattr__(self, "polys", tuple(polys))
        if self.roots is None:
            object.__setattr__(self, "roots", tuple(find_roots(p) for p in polys))

    @property
    def degrees(self):
        return tuple(p.degree for p in self.polys)

    def root_list(self, i):
        """Roots of y_i (1-based) repeated by multiplicity."""
        return [r for r, k in self.roots[i - 1] for _ in range(k)]

    def colors(self):
        return tuple(i for i in range(1, len(self.polys) + 1) for _ in range(self.polys[i - 1].degree))

    def as_solution(self):
        """(problem with matching colors, roots) for the Bethe machinery."""
        colors = self.colors()
        roots = [r for i in range(1, len(self.polys) + 1) for r in self.root_list(i)]
        return self.problem.with_colors(colors), np.array(roots, dtype=complex)

    def mu_inf(self):
        A = self.problem.cartan.entries
        mu = np.zeros(self.problem.rank, dtype=np.int64)
        for _, lam in self.problem.sites:
            mu = mu + lam
        for i, d in enumerate(self.degrees):
            mu = mu - d * A[i]
        return mu

    def is_degenerate(self, coll_tol=None):
        """Multiple roots, or a root at a site."""
        eps = self.problem.default_coll_tol() if coll_tol is None else coll_tol
        _, roots = self.as_solution()
        z = self.problem.z
        if any(k > 1 for comp in self.roots for _, k in comp):
            return True
        if roots.size and z.size and np.abs(roots[:, None] - z[None, :]).min() < eps:
            return True
        return False

    def same_as(self, other, tol=1e-8):
        if self.degrees != other.degrees:
            return False
        for i in range(1, len(self.polys) + 1):
            a, b = np.array(self.root_list(i)), np.array(other.root_list(i))
            if a.size == 0:
                continue
            cost = np.abs(a[:, None] - b[None, :])
            r, c = linear_sum_assignment(cost)
            if cost[r, c].max() > tol * max(1.0, np.abs(a).max()):
                return False
        return True

    def sort_key(self):
        keys = []
        for i in range(1, len(self.polys) + 1):
            keys.append(tuple(sorted((round(r.real, 9), round(r.imag, 9)) for r in self.root_list(i))))
        return (self.degrees, tuple(keys))


def tuple_from_solution(problem, solution):
    roots = solution.roots if hasattr(solution, "roots") else np.asarray(solution, complex)
    colors = np.asarray(problem.colors, dtype=int)
    polys, root_data = [], []
    for i in range(1, problem.rank + 1):
        ri = [complex(r) for r in np.asarray(roots)[colors == i]]
        polys.append(poly_from_roots(ri))
        root_data.append([(r, 1) for r in ri])
    base = problem.with_colors(()) if problem.m else problem
    return PolyTuple(base, tuple(polys), tuple(root_data))


def master_integrand(problem, tup, i):
    """T_i prod_{a_ji < 0} y_j^(-a_ji) / y_i^2 (i is 1-based)."""
    A = problem.cartan.entries
    num = Poly([1])
    for z, lam in problem.sites:
        k = int(lam[i - 1])
        if k:
            num = num * poly_from_roots([z] * k)
    for j in range(problem.rank):
        a = int(A[j, i - 1])
        if j != i - 1 and a < 0:
            num = num * tup.polys[j] ** (-a)
    return RatFun(num, tup.polys[i - 1] ** 2)


def _integrate(problem, tup, i, tol):
    f = master_integrand(problem, tup, i)
    poles = [(r, 2 * k) for r, k in tup.roots[i - 1]]
    h = hermite_integrate(f, tol=tol, poles=poles)
    if h.residues:
        rel = []
        for p, res in h.residues:
            # double-pole coefficient at a simple root: h(p) with h = f*(x-p)^2
            g = f.num(p) / tup.polys[i - 1].deflate(p)(p) ** 2
            rel.append((p, res / g if g != 0 else np.inf))
        big = [(p, res) for (p, res), (_, r) in zip(h.residues, rel)
               if not np.isfinite(r) or abs(r) > tol]
        if big:
            raise InfertileError(
                f"direction {i} is infertile: integrand has residues "
                + ", ".join(f"{res:.3e} at {p:.6g}" for p, res in big),
                residues=h.residues, relative=rel)
    return f, h


def _times_y(y, roots, h, c):
    """y * (F + c) as an exact polynomial, dividing y by each pole term's denominator."""
    out = y * (h.polynomial_part.integ() + Poly([c]))
    mult = {r: k for r, k in roots}
    rp = h.rational_part
    # rational part is sum coeff/(x-p)^k recovered from partial fractions of F itself
    from .ratfun import partial_fractions
    if rp.num.is_zero():
        return out
    pf = partial_fractions(rp, poles=[(r, k) for r, k in roots], verify=False)
    if not pf.polynomial.is_zero() and np.abs(pf.polynomial.coef).max() > 1e-12:
        raise NumericError("rational part of the primitive has a polynomial component")
    for p, k, coeff in pf.terms:
        if k > mult.get(p, 0):
            raise NumericError(f"pole of order {k} at {p} exceeds root multiplicity of y")
        q = y
        for _ in range(k):
            q = q.deflate(p)
        out = out + q * coeff
    return out


def reproduce(problem, tup, i, c, tol=DEFAULT_TOL, certify=True):
    """New tuple with y_i replaced by monic(y_i (F + c))."""
    if not 1 <= i <= problem.rank:
        raise ValidationError(f"direction {i} outside 1..{problem.rank}")
    y = tup.polys[i - 1]
    f, h = _integrate(problem, tup, i, tol)
    new = _times_y(y, tup.roots[i - 1], h, complex(c))
    if certify:
        pts = sample_points(10, avoid=[r for r, _ in tup.roots[i - 1]], min_dist=0.2)
        F = h.primitive()
        want = y(pts) * (F(pts) + c)
        err = np.abs(new(pts) - want) / np.maximum(1.0, np.abs(want))
        if err.max() > 1e-9 * max(1.0, np.abs(new.coef).max()):
            raise NumericError(f"y_i (F + c) failed to be polynomial (deviation {err.max():.2e})")
    # the degree is fixed by the pairing n: it moves by n + 1 unless n < 0 and c != 0;
    # leading coefficients beyond it cancel only up to rounding
    n = int(tup.mu_inf()[i - 1])
    deg = y.degree + n + 1 if n >= 0 or abs(c) <= 1e-12 else y.degree
    coef = new.coef
    scale = np.abs(coef).max()
    if scale == 0:
        raise NumericError("reproduction produced the zero polynomial")
    if coef.size > deg + 1:
        if np.abs(coef[deg + 1:]).max() > 1e-6 * scale:
            raise NumericError(f"expected degree {deg} but leading coefficients did not cancel")
        coef = coef[:deg + 1]
    polys = list(tup.polys)
    polys[i - 1] = Poly(coef).monic()
    roots = list(tup.roots)
    roots[i - 1] = find_roots(polys[i - 1])
    return PolyTuple(tup.problem, tuple(polys), tuple(roots))


# -- Riccati gauge ---------------------------------------------------------------

def _tuple_from_connection(conn, tol=1e-12):
    A = conn.cartan.entries
    sites, roots = [], {c: [] for c in range(1, conn.cartan.rank + 1)}
    for pole, res in conn.terms:
        hit = [c for c in range(1, conn.cartan.rank + 1) if np.all(np.abs(res - A[c - 1]) <= tol)]
        if hit:
            roots[hit[0]].append(pole)
        elif np.all(np.asarray(res) <= tol):
            lam = np.rint(-np.asarray(res, float)).astype(np.int64)
            if np.any(np.abs(-np.asarray(res, float) - lam) > tol):
                raise ValidationError(f"residue {res} at {pole} is not an integral coweight")
            sites.append((pole, lam))
        else:
            raise ValidationError(
                f"residue {np.asarray(res).tolist()} at {pole} is neither a simple coroot nor minus a dominant coweight")
    problem = BetheProblem(conn.cartan, tuple(sites))
    polys = tuple(poly_from_roots(roots[c]) for c in sorted(roots))
    rdata = tuple([(r, 1) for r in roots[c]] for c in sorted(roots))
    return problem, PolyTuple(problem, polys, rdata)


def _connection_from_tuple(tup):
    problem, roots = tup.as_solution()
    return connection_from_solution(problem, roots)


def riccati_gauge(conn, i, a, tol=DEFAULT_TOL, base=0.0, c=None, coll_tol=None):
    """Gauge by exp(f e_i): u -> u + f coroot_i with f' + f^2 + f u_i = 0.

    f = d/dx log(y_i_new / y_i) = g / (F + c) where g is the master integrand,
    so f(base) = a fixes c = g(base)/a - F(base); a = 0 is the c -> infinity
    limit and returns ``conn`` unchanged.  ``c`` may be passed directly
    instead, which is needed when g(base) = 0.
    Returns (new connection, f).
    """
    problem, tup = _tuple_from_connection(conn)
    g, h = _integrate(problem, tup, i, tol)
    F = h.primitive()
    if c is None:
        if a == 0:
            return conn, RatFun(Poly([0]))
        gb, Fb = g(base), F(base)
        if not np.isfinite(Fb):
            raise ValidationError(f"base point {base} is a root of y_{i}")
        if gb == 0:
            raise ValidationError(
                f"master integrand vanishes at base point {base}: f({base}) = 0 for every c; pass c explicitly")
        c = gb / a - Fb
    new = reproduce(problem, tup, i, c, tol=tol)
    if new.is_degenerate(coll_tol):
        raise CollisionError(f"reproduced roots collide for c = {c}")
    y_old, y_new = tup.polys[i - 1], new.polys[i - 1]
    f = RatFun(y_new.deriv() * y_old - y_new * y_old.deriv(), y_new * y_old)
    u_i = conn.component(i)
    pts = sample_points(10, avoid=list(conn.poles) + [r for r, _ in new.roots[i - 1]], min_dist=0.2)
    fv = f(pts)
    res = fv * 0
    dfv = f.deriv()(pts)
    res = dfv + fv ** 2 + fv * u_i(pts)
    scale = np.maximum(1.0, np.abs(dfv) + np.abs(fv) ** 2)
    if np.max(np.abs(res) / scale) > max(tol, 1e-9) * 1e2:
        raise NumericError(f"Riccati residual {np.max(np.abs(res)):.2e} exceeds tolerance")
    return _connection_from_tuple(new), f


# -- populations -------------------------------------------------------------------

@dataclass
class PopulationNode:
    tuple: PolyTuple
    depth: int
    mu_inf: np.ndarray
    lam_inf: np.ndarray | None
    word: tuple | None
    degenerate: bool


@dataclass(frozen=True)
class PopulationEdge:
    source: int
    target: int
    direction: int
    c: complex


@dataclass
class Population:
    nodes: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    skipped: list = field(default_factory=list)  # (node, direction, reason)

    def degree_classes(self):
        return sorted({n.tuple.degrees for n in self.nodes})


def _label(tup, cap):
    mu = tup.mu_inf()
    try:
        lam, word = classify_cell(tup.problem, mu=mu, cap=cap)
    except GaudinOpersError as exc:
        logger.info("no cell label for degrees %s: %s", tup.degrees, exc)
        return mu, None, None
    return mu, lam, tuple(word)


def explore_population(problem, seed, depth, c_samples=DEFAULT_C_SAMPLES, tol=DEFAULT_TOL,
                       coll_tol=None, dedup_tol=1e-8, cap=10_000, max_nodes=500):
    """Breadth-first closure of ``seed`` under reproduction, to ``depth`` steps.

    Degenerate tuples (multiple roots, or roots at sites) are kept with a
    flag but never expanded.  Nodes are merged by degree vector and root
    multiset; expansion order is deterministic.
    """
    if depth < 0:
        raise ValidationError("depth must be >= 0")
    samples = []
    for c in list(c_samples) + [0.0]:
        if all(abs(complex(c) - s) > 0 for s in samples):
            samples.append(complex(c))
    pop = Population()

    def add(tup, d):
        for idx, node in enumerate(pop.nodes):
            if node.tuple.same_as(tup, dedup_tol):
                return idx, False
        mu, lam, word = _label(tup, cap)
        pop.nodes.append(PopulationNode(tup, d, mu, lam, word, tup.is_degenerate(coll_tol)))
        return len(pop.nodes) - 1, True

    add(seed, 0)
    frontier = [0]
    for d in range(1, depth + 1):
        nxt = []
        for idx in sorted(frontier, key=lambda k: pop.nodes[k].tuple.sort_key()):
            node = pop.nodes[idx]
            if node.degenerate:
                continue
            for i in range(1, problem.rank + 1):
                for c in samples:
                    try:
                        new = reproduce(problem, node.tuple, i, c, tol=tol)
                    except InfertileError as exc:
                        pop.skipped.append((idx, i, str(exc)))
                        logger.info("node %d direction %d infertile", idx, i)
                        break
                    except NumericError as exc:
                        pop.skipped.append((idx, i, f"c={c}: {exc}"))
                        continue
                    j, fresh = add(new, d)
                    pop.edges.append(PopulationEdge(idx, j, i, c))
                    if fresh:
                        nxt.append(j)
                    if len(pop.nodes) >= max_nodes:
                        logger.warning("population truncated at %d nodes", max_nodes)
                        return pop
        frontier = nxt
    return pop
