"""Cartan connections on the projective line and the Miura transformation.

A Cartan connection is ``d/dt + sum_k residue_k / (t - pole_k)`` with
coweight residues.  For the classical types it maps to a scalar operator

    A_{n-1}:  (d + u_1) ... (d + u_n)
    C_n:      (d + u_1) ... (d + u_n) (d - u_n) ... (d - u_1)
    B_n:      (d + u_1) ... (d + u_n) d (d - u_n) ... (d - u_1)

where u_1..u_n are the epsilon coordinates of the connection.  With residues
-lam at sites and +coroot at roots this ordering makes the singularities at
the roots disappear exactly when the Bethe equations hold (for sl_2,
v_1 = -u_1^2 - u_1').
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import InconsistencyError, ValidationError
from .ratfun import LocalJet, Poly, RatFun, local_jet, poly_from_roots
from .rootdata import GeneralizedCartanMatrix, load_cartan, rho

__all__ = [
    "CartanConnection", "ScalarOper", "connection_from_solution",
    "epsilon_coordinates", "miura_scalar_oper", "regularity_report",
    "residue_at_infinity_connection", "expand_factors", "RegularityReport",
]


@dataclass(frozen=True, eq=False)
class CartanConnection:
    cartan: GeneralizedCartanMatrix
    terms: tuple  # ((pole, residue pairings), ...)

    def __post_init__(self):
        A = load_cartan(self.cartan)
        object.__setattr__(self, "cartan", A)
        terms = []
        for pole, res in self.terms:
            res = np.asarray(res)
            if res.shape != (A.rank,):
                raise ValidationError(f"residue {res.tolist()} must have {A.rank} pairings")
            terms.append((complex(pole), res))
        poles = [p for p, _ in terms]
        if len(set(poles)) != len(poles):
            raise ValidationError("connection poles must be pairwise distinct")
        object.__setattr__(self, "terms", tuple(terms))

    @property
    def poles(self):
        return np.array([p for p, _ in self.terms], dtype=complex)

    def component_terms(self, a):
        """Simple-pole data of u_a(t) = <alpha_a, u(t)> (a is 1-based)."""
        return [(p, float(res[a - 1])) for p, res in self.terms]

    def component(self, a):
        return RatFun.simple_poles(self.component_terms(a))

    def residue_at(self, pole, tol=1e-12):
        for p, res in self.terms:
            if abs(p - pole) <= tol:
                return res
        return np.zeros(self.cartan.rank, dtype=np.int64)

    def __call__(self, t):
        """(len(t), l) array of u_a(t)."""
        t = np.atleast_1d(np.asarray(t, complex))
        out = np.zeros((t.size, self.cartan.rank), complex)
        for p, res in self.terms:
            out += np.outer(1 / (t - p), res)
        return out


def connection_from_solution(problem, solution):
    """d/dt - sum lam_i/(t - z_i) + sum coroot_c(j)/(t - w_j)."""
    A = problem.cartan.entries
    roots = solution.roots if hasattr(solution, "roots") else np.asarray(solution, complex)
    terms = [(z, -lam) for z, lam in problem.sites]
    terms += [(w, A[c - 1].copy()) for w, c in zip(roots, problem.colors)]
    return CartanConnection(problem.cartan, tuple(terms))


def residue_at_infinity_connection(conn):
    """2 rho + sum of all residues (coordinate t -> 1/t at infinity)."""
    out = 2 * rho(conn.cartan)
    for _, res in conn.terms:
        out = out + res
    return out


# -- epsilon coordinates ------------------------------------------------------

def _type_of(conn, type_tag):
    tag = type_tag if type_tag is not None else conn.cartan.kind
    tag = tag.replace("_", "").upper()
    if tag == "GENERAL" or not tag:
        raise ValidationError("Miura transformation needs a classical type tag (A_n, B_n, C_n)")
    letter, n = tag[0], int(tag[1:])
    if letter == "D":
        raise ValidationError("so_2n (type D) Miura opers are pseudo-differential; not supported")
    if letter not in "ABC":
        raise ValidationError(f"no scalar Miura form for type {tag}")
    expected = load_cartan(letter + str(n))
    if conn.cartan != expected:
        raise ValidationError(f"connection Cartan matrix does not match type {tag}")
    return letter, n


def _epsilon_matrix(letter, n):
    """M with u_eps = M @ d, where d are the simple-root pairings."""
    if letter == "A":
        size = n + 1
        M = np.zeros((size, n))
        # u_1 = sum_j (size - j) d_j / size, then u_{k+1} = u_k - d_k
        M[0] = [(size - j) / size for j in range(1, n + 1)]
        for k in range(1, size):
            M[k] = M[k - 1]
            M[k, k - 1] -= 1
        return M
    M = np.zeros((n, n))
    M[n - 1, n - 1] = 0.5 if letter == "C" else 1.0
    for k in range(n - 2, -1, -1):
        M[k] = M[k + 1]
        M[k, k] += 1
    return M


def _epsilon_terms(conn, letter, n):
    M = _epsilon_matrix(letter, n)
    out = []
    for row in M:
        out.append([(p, complex(row @ res)) for p, res in conn.terms])
    return out


def epsilon_coordinates(conn, n):
    """(u_1, ..., u_n) with u_k - u_{k+1} = u-component k and sum u_k = 0 (type A)."""
    A = conn.cartan
    if A.rank != n - 1:
        raise ValidationError(f"connection has rank {A.rank}, expected {n - 1} for sl_{n}")
    if A != load_cartan("A", n - 1):
        raise ValidationError("epsilon_coordinates is defined for type A only")
    return [RatFun.simple_poles(t) for t in _epsilon_terms(conn, "A", n - 1)]


# -- operator expansion over any differential ring -------------------------------

def expand_factors(factors, zero, one):
    """Expand (d + a_1)(d + a_2)...(d + a_r) into coefficients c_0..c_r of d^j.

    ``factors`` entries must support +, * and ``.deriv()``; ``None`` stands for
    a bare ``d``.  Uses d o f = f o d + f'.
    """
    coeffs = [one]  # the operator 1
    for a in factors:
        # right-multiply by d
        new = [zero] + list(coeffs)
        if a is not None:
            # right-multiply by a:  sum_j c_j d^j a = sum_j c_j sum_i C(j,i) a^(i) d^(j-i)
            derivs = [a]
            for _ in range(len(coeffs)):
                derivs.append(derivs[-1].deriv())
            for j, c in enumerate(coeffs):
                for i in range(j + 1):
                    new[j - i] = new[j - i] + c * derivs[i] * comb(j, i)
        coeffs = new
    return coeffs


class _DenPower:
    """num / base^power with a fixed base polynomial; keeps Miura expansions
    on one growing denominator instead of cross-multiplying."""

    __slots__ = ("num", "power", "base")

    def __init__(self, num, power, base):
        self.num, self.power, self.base = num, power, base

    def _lift(self, other):
        if isinstance(other, _DenPower):
            return other
        return _DenPower(Poly(other), 0, self.base)

    def _raise(self, k):
        return self.num * self.base ** k if k else self.num

    def __add__(self, other):
        other = self._lift(other)
        p = max(self.power, other.power)
        return _DenPower(self._raise(p - self.power) + other._raise(p - other.power), p, self.base)

    __radd__ = __add__

    def __mul__(self, other):
        if np.isscalar(other):
            return _DenPower(self.num * other, self.power, self.base)
        other = self._lift(other)
        return _DenPower(self.num * other.num, self.power + other.power, self.base)

    __rmul__ = __mul__

    def deriv(self):
        num = self.num.deriv() * self.base - self.num * self.base.deriv() * self.power
        return _DenPower(num, self.power + 1, self.base)

    def to_ratfun(self):
        return RatFun(self.num, self.base ** self.power)


@dataclass(eq=False)
class ScalarOper:
    """L = d^n + v_1 d^(n-2) + ... + v_(n-1).

    ``factors`` keeps the first-order factors (as simple-pole data, ``None``
    for a bare d) when the operator came from a Miura transformation; jets
    and point values are then computed from them directly.
    """

    order: int
    coefficients: list  # v_1 .. v_(n-1) as RatFun
    type_tag: str = "A"
    factors: list | None = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.coefficients) != self.order - 1:
            raise ValidationError(f"order {self.order} operator needs {self.order - 1} coefficients")

    def jets(self, center, K):
        """Laurent jets of v_1..v_(n-1) at ``center`` through (t-center)^K."""
        if self.factors is None:
            return [local_jet(v, center, K) for v in self.coefficients]
        depth = K + self.order + 2
        one = LocalJet.constant(1, center, 10**6)
        zero = LocalJet(center, 10**6 + 1, [], 10**6)
        fac = []
        for terms in self.factors:
            if terms is None:
                fac.append(None)
                continue
            jet = zero
            for p, r in terms:
                if r != 0:
                    jet = jet + local_jet(RatFun(Poly([r]), Poly([-p, 1])), center, depth)
            fac.append(jet.truncate(depth))
        coeffs = expand_factors(fac, zero, one)
        n = self.order
        return [coeffs[n - 1 - k].truncate(K) for k in range(1, n)]

    def evaluate(self, k, t):
        """v_k at the points t (k is 1-based)."""
        t = np.atleast_1d(np.asarray(t, complex))
        if self.factors is None:
            return self.coefficients[k - 1](t)
        return np.array([self.jets(ti, 0)[k - 1].coeff(0) for ti in t])


def miura_scalar_oper(conn, type_tag=None, check_points=None, tol=1e-10):
    """Scalar operator obtained from ``conn`` by the Miura transformation."""
    letter, n = _type_of(conn, type_tag)
    eps = _epsilon_terms(conn, letter, n)
    if letter == "A":
        factors = list(eps)
    else:
        neg = [[(p, -r) for p, r in terms] for terms in reversed(eps)]
        factors = list(eps) + ([None] if letter == "B" else []) + neg
    order = len(factors)

    poles = [p for p, _ in conn.terms]
    base = poly_from_roots(poles)
    ring = []
    for terms in factors:
        if terms is None:
            ring.append(None)
            continue
        rf = RatFun.simple_poles(terms) if terms else RatFun(Poly([0]))
        # simple_poles uses the same pole order, so its denominator is ``base``
        ring.append(_DenPower(rf.num, 1 if terms else 0, base))
    zero = _DenPower(Poly([0]), 0, base)
    one = _DenPower(Poly([1]), 0, base)
    coeffs = expand_factors(ring, zero, one)
    sub = coeffs[order - 1].to_ratfun()
    pts = check_points if check_points is not None else _probe_points(poles)
    if np.abs(sub(pts)).max() > tol:
        raise InconsistencyError("Miura product has a nonzero d^(n-1) coefficient")
    coefficients = [coeffs[order - 1 - k].to_ratfun() for k in range(1, order)]
    tag = f"{letter}{n}"
    return ScalarOper(order, coefficients, tag, factors=factors)


def _probe_points(poles, count=10):
    rng = np.random.default_rng(7)
    poles = np.asarray(poles, complex)
    out = []
    while len(out) < count:
        t = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        if poles.size == 0 or np.abs(poles - t).min() > 0.1:
            out.append(t)
    return np.array(out)


@dataclass
class RegularityReport:
    point: complex
    tails: list  # per v_k: {order: coefficient} for negative orders
    erased: bool

    @property
    def max_tail(self):
        vals = [abs(c) for tail in self.tails for c in tail.values()]
        return max(vals, default=0.0)

    def simple_pole(self, k=1):
        return self.tails[k - 1].get(-1, 0j)


def regularity_report(oper, points, tol=1e-9, K=None):
    """Negative-order Laurent coefficients of every v_k at each point."""
    K = oper.order + 2 if K is None else K
    out = []
    for x in np.atleast_1d(np.asarray(points, complex)):
        jets = oper.jets(complex(x), K)
        tails = [jet.principal_part() for jet in jets]
        mags = [abs(c) for tail in tails for c in tail.values()]
        out.append(RegularityReport(complex(x), tails, bool(max(mags, default=0.0) < tol)))
    return out
