"""Complex polynomials, rational functions, local Laurent jets, and rational
integration.

Coefficients are complex floats.  Exactness is replaced by evaluation checks:
results that must be identities (partial fractions, Hermite reduction) are
re-verified at random sample points and raise when the check fails.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import IllConditionedError, NumericError, ValidationError

DEFAULT_TOL = 1e-9
# radius (relative to max(1, |root|)) under which eigenvalue roots are merged
CLUSTER_RADIUS = 1e-4
# truncation order standing in for 'exact' (constants, polynomials)
_EXACT = 10**6

__all__ = [
    "Poly", "RatFun", "LocalJet", "rat_normalize", "partial_fractions",
    "hermite_integrate", "local_jet", "HermiteResult", "PartialFractions",
    "series_divide", "sample_points", "poly_from_roots", "find_roots",
]


def _trim(c):
    c = np.asarray(c, dtype=np.complex128).ravel()
    if c.size == 0:
        return np.zeros(1, dtype=np.complex128)
    nz = np.flatnonzero(c)
    if nz.size == 0:
        return np.zeros(1, dtype=np.complex128)
    return c[: nz[-1] + 1].copy()


class Poly:
    """Dense polynomial, ascending coefficients."""

    __slots__ = ("coef",)

    def __init__(self, coef=(0,)):
        if isinstance(coef, Poly):
            coef = coef.coef
        elif np.isscalar(coef):
            coef = [coef]
        self.coef = _trim(coef)

    @classmethod
    def x(cls):
        return cls([0, 1])

    @classmethod
    def const(cls, c):
        return cls([c])

    @property
    def degree(self) -> int:
        return -1 if self.is_zero() else len(self.coef) - 1

    def is_zero(self) -> bool:
        return len(self.coef) == 1 and self.coef[0] == 0

    @property
    def lead(self):
        return self.coef[-1]

    def __call__(self, t):
        return P.polyval(t, self.coef)

    def __add__(self, other):
        if isinstance(other, RatFun):
            return NotImplemented
        other = _as_poly(other)
        return Poly(P.polyadd(self.coef, other.coef))

    __radd__ = __add__

    def __neg__(self):
        return Poly(-self.coef)

    def __sub__(self, other):
        if isinstance(other, RatFun):
            return NotImplemented
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        if isinstance(other, RatFun):
            return NotImplemented
        if np.isscalar(other):
            return Poly(self.coef * other)
        return Poly(P.polymul(self.coef, _as_poly(other).coef))

    __rmul__ = __mul__

    def __pow__(self, k):
        if k < 0:
            raise ValidationError("negative power of a Poly; use RatFun")
        return Poly(P.polypow(self.coef, k)) if k else Poly([1])

    def __truediv__(self, other):
        if np.isscalar(other):
            return Poly(self.coef / other)
        return RatFun(self, other)

    def __divmod__(self, other):
        q, r = P.polydiv(self.coef, _as_poly(other).coef)
        return Poly(q), Poly(r)

    def deriv(self, k=1):
        if self.degree < k:
            return Poly([0])
        return Poly(P.polyder(self.coef, k))

    def integ(self):
        """Antiderivative vanishing at 0."""
        return Poly(P.polyint(self.coef))

    def monic(self):
        if self.is_zero():
            return self
        return Poly(self.coef / self.lead)

    def roots(self):
        return find_roots(self)

    def taylor(self, center, K):
        """Coefficients of (t - center)^k for k = 0..K."""
        b = self.coef.copy()
        d = len(b) - 1
        for i in range(d):
            for j in range(d - 1, i - 1, -1):
                b[j] += center * b[j + 1]
        out = np.zeros(K + 1, dtype=np.complex128)
        n = min(K + 1, len(b))
        out[:n] = b[:n]
        return out

    def deflate(self, root):
        """Quotient by (x - root), discarding the remainder."""
        c = self.coef
        if len(c) == 1:
            return Poly([0])
        q = np.zeros(len(c) - 1, dtype=np.complex128)
        acc = 0j
        for k in range(len(c) - 1, 0, -1):
            acc = c[k] + acc * root
            q[k - 1] = acc
        return Poly(q)

    def allclose(self, other, tol=DEFAULT_TOL):
        other = _as_poly(other)
        n = max(len(self.coef), len(other.coef))
        a = np.zeros(n, complex)
        b = np.zeros(n, complex)
        a[: len(self.coef)] = self.coef
        b[: len(other.coef)] = other.coef
        scale = max(1.0, np.abs(a).max(), np.abs(b).max())
        return bool(np.abs(a - b).max() <= tol * scale)

    def __repr__(self):
        return f"Poly({np.round(self.coef, 12).tolist()})"


def _as_poly(x):
    if isinstance(x, Poly):
        return x
    if np.isscalar(x):
        return Poly([x])
    return Poly(x)


def poly_from_roots(roots, lead=1.0):
    roots = list(roots)
    if not roots:
        return Poly([lead])
    return Poly(P.polyfromroots(roots) * lead)


def find_roots(p, cluster=CLUSTER_RADIUS):
    """Roots of ``p`` by companion-matrix eigenvalues, with multiplicities.

    Returns a list of ``(root, multiplicity)``; eigenvalues closer than
    ``cluster * max(1, |root|)`` are merged and replaced by their mean.
    """
    p = _as_poly(p)
    if p.degree <= 0:
        return []
    raw = P.polyroots(p.coef)
    if not np.all(np.isfinite(raw)):
        raise NumericError(f"root finding produced non-finite values for {p!r}")
    order = np.argsort(raw.real)
    raw = raw[order]
    clusters = []
    used = np.zeros(len(raw), bool)
    for i in range(len(raw)):
        if used[i]:
            continue
        members = [i]
        used[i] = True
        rad = cluster * max(1.0, abs(raw[i]))
        for j in range(i + 1, len(raw)):
            if not used[j] and abs(raw[j] - raw[i]) < rad:
                members.append(j)
                used[j] = True
        clusters.append((_polish(p, complex(np.mean(raw[members])), len(members)), len(members)))
    return clusters


def _polish(p, r, mult, steps=3):
    """Newton steps on the (mult-1)th derivative, where r is a simple root."""
    q = p.deriv(mult - 1)
    dq = q.deriv()
    for _ in range(steps):
        d = dq(r)
        if d == 0:
            break
        step = q(r) / d
        if not np.isfinite(step) or abs(step) > 1e-3 * max(1.0, abs(r)):
            break
        r = r - step
    return complex(r)


def sample_points(n, rng=None, radius=3.0, avoid=(), min_dist=0.05):
    rng = np.random.default_rng(12345) if rng is None else rng
    out = []
    avoid = np.asarray(list(avoid), dtype=complex)
    while len(out) < n:
        t = complex(rng.uniform(-radius, radius), rng.uniform(-radius, radius))
        if avoid.size and np.abs(avoid - t).min() < min_dist:
            continue
        out.append(t)
    return np.array(out)


class RatFun:
    """numerator / denominator; arithmetic does not cancel common factors
    except through :func:`rat_normalize`.

    When the denominator is known in factored form (``poles``: root ->
    multiplicity, denominator monic), sums use the least common multiple and
    derivatives raise each multiplicity by one, so repeated arithmetic on
    functions sharing poles does not cross-multiply denominators.
    """

    __slots__ = ("num", "den", "poles")

    def __init__(self, num, den=None, poles=None):
        self.num = _as_poly(num)
        if poles is not None:
            poles = {complex(p): int(k) for p, k in poles.items() if k > 0}
            self.den = _den_from_poles(poles)
            self.poles = poles
            return
        self.den = Poly([1]) if den is None else _as_poly(den)
        if self.den.is_zero():
            raise ValidationError("zero denominator")
        self.poles = None
        if self.den.degree == 0:
            self.num = self.num * (1 / self.den.coef[0])
            self.den = Poly([1])
            self.poles = {}

    @classmethod
    def simple_poles(cls, terms, const=0):
        """sum_k r_k / (t - p_k) + const, over a common denominator."""
        terms = [(complex(p), complex(r)) for p, r in terms]
        if len({p for p, _ in terms}) != len(terms):
            raise ValidationError("simple_poles needs distinct poles")
        den = poly_from_roots([p for p, _ in terms])
        num = Poly(const) * den
        for k, (p, r) in enumerate(terms):
            num = num + r * poly_from_roots([q for j, (q, _) in enumerate(terms) if j != k])
        return cls(num, poles={p: 1 for p, _ in terms})

    def __call__(self, t):
        return self.num(t) / self.den(t)

    def _coerce(self, other):
        if isinstance(other, RatFun):
            return other
        return RatFun(_as_poly(other))

    def __add__(self, other):
        other = self._coerce(other)
        if self.poles is not None and other.poles is not None:
            lcm = dict(self.poles)
            for p, k in other.poles.items():
                lcm[p] = max(lcm.get(p, 0), k)
            return RatFun(self.num * _cofactor(lcm, self.poles) + other.num * _cofactor(lcm, other.poles),
                          poles=lcm)
        if self.den.degree == other.den.degree and self.den.allclose(other.den, 1e-14):
            return RatFun(self.num + other.num, self.den)
        if other.den.degree == 0:
            return RatFun(self.num + other.num * (self.den * (1 / other.den.coef[0])), self.den)
        if self.den.degree == 0:
            return RatFun(self.num * (other.den * (1 / self.den.coef[0])) + other.num, other.den)
        return RatFun(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFun(-self.num, self.den) if self.poles is None else RatFun(-self.num, poles=self.poles)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if np.isscalar(other):
            if self.poles is not None:
                return RatFun(self.num * other, poles=self.poles)
            return RatFun(self.num * other, self.den)
        other = self._coerce(other)
        if self.poles is not None and other.poles is not None:
            both = dict(self.poles)
            for p, k in other.poles.items():
                both[p] = both.get(p, 0) + k
            return RatFun(self.num * other.num, poles=both)
        return RatFun(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if np.isscalar(other):
            return self * (1 / other)
        other = self._coerce(other)
        if other.num.degree == 0:
            return self * (1 / other.num.coef[0]) * RatFun(other.den)
        return RatFun(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, k):
        if k >= 0:
            if self.poles is not None:
                return RatFun(self.num ** k, poles={p: m * k for p, m in self.poles.items()})
            return RatFun(self.num ** k, self.den ** k)
        return RatFun(self.den ** -k, self.num ** -k)

    def deriv(self):
        if self.poles is not None:
            if not self.poles:
                return RatFun(self.num.deriv(), poles={})
            # (N / prod (x-p)^m)' = (N' R - N sum m R/(x-p)) / (prod (x-p)^m R),  R = prod (x-p)
            radical = poly_from_roots(list(self.poles))
            acc = Poly([0])
            for p, m in self.poles.items():
                acc = acc + poly_from_roots([q for q in self.poles if q != p]) * m
            num = self.num.deriv() * radical - self.num * acc
            return RatFun(num, poles={p: m + 1 for p, m in self.poles.items()})
        return RatFun(self.num.deriv() * self.den - self.num * self.den.deriv(), self.den * self.den)

    def is_zero(self):
        return self.num.is_zero()

    def monic(self):
        if self.poles is not None:
            return self
        lead = self.den.lead
        return RatFun(self.num * (1 / lead), self.den * (1 / lead))

    def agrees(self, other, points, tol=DEFAULT_TOL):
        """Max deviation at ``points`` relative to max(1, |value|)."""
        other = self._coerce(other)
        a, b = self(points), other(points)
        return bool(np.all(np.abs(a - b) <= tol * np.maximum(1.0, np.abs(a))))

    def __repr__(self):
        return f"RatFun({self.num!r} / {self.den!r})"


def _den_from_poles(poles):
    return poly_from_roots([p for p, k in poles.items() for _ in range(k)])


def _cofactor(lcm, poles):
    """prod (x-p)^(lcm[p] - poles.get(p, 0))."""
    return poly_from_roots([p for p, k in lcm.items() for _ in range(k - poles.get(p, 0))])


def _as_ratfun(f):
    if isinstance(f, RatFun):
        return f
    return RatFun(_as_poly(f))


def rat_normalize(f, tol=DEFAULT_TOL):
    """Cancel common roots of numerator and denominator; make denominator monic."""
    f = _as_ratfun(f)
    if f.num.is_zero():
        return RatFun(Poly([0]), Poly([1]))
    num, den = f.num, f.den
    try:
        nroots = find_roots(num)
        droots = find_roots(den)
    except (np.linalg.LinAlgError, NumericError) as exc:
        raise NumericError(f"root finding failed during normalization of {f!r}: {exc}") from exc
    pair_tol = max(tol, CLUSTER_RADIUS)
    remaining = list(droots)
    for r, mult in nroots:
        for idx, (s, dm) in enumerate(remaining):
            if abs(r - s) < pair_tol * max(1.0, abs(s)):
                k = min(mult, dm)
                root = 0.5 * (r + s)
                for _ in range(k):
                    num = num.deflate(root)
                    den = den.deflate(root)
                remaining[idx] = (s, dm - k)
                break
    return RatFun(num, den).monic()


class PartialFractions(NamedTuple):
    polynomial: Poly
    terms: list  # (pole, order, coefficient)

    def __call__(self, t):
        t = np.asarray(t, dtype=complex)
        out = self.polynomial(t).astype(complex)
        for p, k, c in self.terms:
            out = out + c / (t - p) ** k
        return out


def _resolve_poles(den, poles):
    if poles is None:
        return find_roots(den)
    out = []
    for item in poles:
        if isinstance(item, tuple):
            out.append((complex(item[0]), int(item[1])))
        else:
            out.append((complex(item), 1))
    return out


def _check_separation(poles):
    for i in range(len(poles)):
        for j in range(i + 1, len(poles)):
            p, q = poles[i][0], poles[j][0]
            if abs(p - q) < 10 * CLUSTER_RADIUS * max(1.0, abs(p)):
                raise IllConditionedError(f"poles {p} and {q} are too close to separate")


def partial_fractions(f, tol=DEFAULT_TOL, poles=None, verify=True):
    """Decompose f = polynomial + sum c / (x - p)^k.

    ``poles`` may supply the denominator's roots (with multiplicities as
    ``(root, mult)`` pairs) when they are known more accurately than
    eigenvalue root-finding would give them.
    """
    f = _as_ratfun(f)
    q, r = divmod(f.num, f.den)
    poles = _resolve_poles(f.den, poles)
    if sum(m for _, m in poles) != f.den.degree:
        raise ValidationError(
            f"pole multiplicities sum to {sum(m for _, m in poles)}, denominator degree {f.den.degree}")
    _check_separation(poles)
    terms = []
    for p, mult in poles:
        rest = f.den
        for _ in range(mult):
            rest = rest.deflate(p)
        g = series_divide(r.taylor(p, mult - 1), rest.taylor(p, mult - 1), mult)
        for j in range(mult):
            terms.append((p, mult - j, complex(g[j])))
    scale = max([1.0] + [abs(c) for _, _, c in terms])
    terms = [t for t in terms if abs(t[2]) > tol * scale]
    pf = PartialFractions(q, terms)
    if verify:
        pts = sample_points(20, avoid=[p for p, _ in poles], min_dist=0.2)
        exact = f(pts)
        err = np.abs(pf(pts) - exact) / np.maximum(1.0, np.abs(exact))
        if err.max() > max(tol, 1e-9) * 1e3:
            raise IllConditionedError(f"partial fraction recombination error {err.max():.3e}")
    return pf


def series_divide(a, b, K):
    """First K Taylor coefficients of a/b (b[0] != 0)."""
    a = np.asarray(a, complex)
    b = np.asarray(b, complex)
    if b[0] == 0:
        raise NumericError("series division by a series with zero constant term")
    out = np.zeros(K, dtype=complex)
    for k in range(K):
        acc = a[k] if k < len(a) else 0
        for j in range(1, min(k, len(b) - 1) + 1):
            acc -= b[j] * out[k - j]
        out[k] = acc / b[0]
    return out


class HermiteResult(NamedTuple):
    rational_part: RatFun
    residues: list  # (pole, residue) with |residue| > tol
    polynomial_part: Poly

    def primitive(self):
        """rational_part + antiderivative of polynomial_part (log terms excluded)."""
        return self.rational_part + RatFun(self.polynomial_part.integ())


def hermite_integrate(f, tol=DEFAULT_TOL, poles=None):
    """Split the integral of f into a rational part and log (residue) terms.

    Each pole term c/(x-p)^k with k >= 2 integrates in closed form to
    c/((1-k)(x-p)^(k-1)); what remains are the simple-pole coefficients, which
    are reported when their magnitude exceeds ``tol``.
    """
    pf = partial_fractions(f, tol=tol, poles=poles)
    rational = []
    residues = []
    for p, k, c in pf.terms:
        if k == 1:
            if abs(c) > tol:
                residues.append((p, c))
        else:
            rational.append((p, k - 1, c / (1 - k)))
    return HermiteResult(_sum_pole_terms(rational), residues, pf.polynomial)


def _sum_pole_terms(terms):
    """Sum of c/(x-p)^k over one common denominator prod (x-p)^kmax."""
    if not terms:
        return RatFun(Poly([0]))
    top = {}
    for p, k, _ in terms:
        top[p] = max(top.get(p, 0), k)
    den = Poly([1])
    for p, k in top.items():
        den = den * poly_from_roots([p] * k)
    num = Poly([0])
    for p, k, c in terms:
        part = Poly([c])
        for q, kq in top.items():
            e = kq - k if q == p else kq
            if e:
                part = part * poly_from_roots([q] * e)
        num = num + part
    return RatFun(num, den)


@dataclass(frozen=True)
class LocalJet:
    """Truncated Laurent series sum_k c_k (t - center)^k.

    ``coeffs[j]`` multiplies ``(t - center)^(lowest_order + j)``; the series is
    known through exponent ``order`` inclusive.
    """

    center: complex
    lowest_order: int
    coeffs: np.ndarray
    order: int

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128).ravel()
        n = self.order - self.lowest_order + 1
        if n <= 0:
            c = np.zeros(0, complex)
        else:
            c = c[:n]
        nz = np.flatnonzero(c)
        low = self.lowest_order
        if nz.size:
            c = c[nz[0]:]
            low += int(nz[0])
        else:
            c = np.zeros(0, complex)
            low = self.order + 1
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "lowest_order", low)
        object.__setattr__(self, "center", complex(self.center))

    @classmethod
    def constant(cls, c, center, order):
        return cls(center, 0, [c], order)

    @classmethod
    def variable(cls, center, order):
        """The jet of t itself."""
        return cls(center, 0, [center, 1], order)

    def is_zero(self):
        return self.coeffs.size == 0

    def coeff(self, k):
        if k > self.order:
            raise ValidationError(f"coefficient {k} beyond truncation order {self.order}")
        j = k - self.lowest_order
        return complex(self.coeffs[j]) if 0 <= j < len(self.coeffs) else 0j

    def dense(self, lo, hi):
        if hi > self.order:
            raise ValidationError(f"coefficient {hi} beyond truncation order {self.order}")
        out = np.zeros(max(0, hi - lo + 1), complex)
        a = max(lo, self.lowest_order)
        b = min(hi, self.lowest_order + len(self.coeffs) - 1)
        if a <= b:
            out[a - lo:b - lo + 1] = self.coeffs[a - self.lowest_order:b - self.lowest_order + 1]
        return out

    def _top(self):
        """Highest exponent with a stored coefficient."""
        return self.lowest_order + len(self.coeffs) - 1

    def principal_part(self):
        """{k: c_k} for k < 0."""
        return {k: self.coeff(k) for k in range(self.lowest_order, 0)}

    def _check(self, other):
        if abs(self.center - other.center) > 1e-14 * max(1.0, abs(self.center)):
            raise ValidationError("jets at different centers")

    def _lift(self, other):
        if isinstance(other, LocalJet):
            self._check(other)
            return other
        return LocalJet.constant(other, self.center, self.order)

    def __add__(self, other):
        other = self._lift(other)
        order = min(self.order, other.order)
        lo = min(self.lowest_order, other.lowest_order)
        if lo > order:
            return LocalJet(self.center, order + 1, [], order)
        hi = min(order, max(self._top(), other._top()))
        return LocalJet(self.center, lo, self.dense(lo, hi) + other.dense(lo, hi), order)

    __radd__ = __add__

    def __neg__(self):
        return LocalJet(self.center, self.lowest_order, -self.coeffs, self.order)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if np.isscalar(other):
            return LocalJet(self.center, self.lowest_order, self.coeffs * other, self.order)
        other = self._lift(other)
        order = min(self.order + other.lowest_order, other.order + self.lowest_order)
        if self.is_zero() or other.is_zero():
            return LocalJet(self.center, order + 1, [], order)
        prod = np.convolve(self.coeffs, other.coeffs)
        return LocalJet(self.center, self.lowest_order + other.lowest_order, prod, order)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise NumericError("inverse of a zero jet")
        v = self.lowest_order
        n = self.order - v + 1
        inv = series_divide([1.0], self.coeffs, n)
        return LocalJet(self.center, -v, inv, self.order - 2 * v)

    def __truediv__(self, other):
        if np.isscalar(other):
            return self * (1 / other)
        return self * self._lift(other).inverse()

    def __rtruediv__(self, other):
        return self._lift(other) * self.inverse()

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        out = LocalJet.constant(1, self.center, _EXACT)
        for _ in range(k):
            out = out * self
        return out

    def deriv(self):
        ks = np.arange(self.lowest_order, self.lowest_order + len(self.coeffs))
        return LocalJet(self.center, self.lowest_order - 1, self.coeffs * ks, self.order - 1)

    def compose(self, inner):
        """self(inner(s)) as a jet in s.

        ``inner`` is a jet whose constant term equals ``self.center`` and whose
        linear coefficient is nonzero (a local coordinate change).
        """
        if inner.lowest_order < 0:
            raise ValidationError("inner jet must be regular")
        delta = inner - self.center
        if delta.is_zero() or delta.lowest_order != 1:
            raise NumericError("coordinate change has vanishing derivative at the point")
        out = LocalJet(inner.center, _EXACT + 1, [], _EXACT)
        power = delta ** self.lowest_order if self.lowest_order >= 0 else delta.inverse() ** (-self.lowest_order)
        for k, c in enumerate(self.coeffs):
            out = out + power * c
            power = power * delta
        # delta has valuation 1, so the unknown tail of self starts at s^(order+1)
        return out.truncate(self.order)

    def truncate(self, order):
        return LocalJet(self.center, self.lowest_order, self.coeffs, min(order, self.order))

    def __call__(self, t):
        """Evaluate the truncated series (approximation near the center)."""
        s = np.asarray(t, complex) - self.center
        ks = np.arange(self.lowest_order, self.lowest_order + len(self.coeffs))
        return sum(c * s ** k for c, k in zip(self.coeffs, ks))

    def allclose(self, other, tol=DEFAULT_TOL, through=None):
        other = self._lift(other)
        hi = min(self.order, other.order) if through is None else through
        lo = min(self.lowest_order, other.lowest_order, 0)
        if lo > hi:
            return True
        return bool(np.abs(self.dense(lo, hi) - other.dense(lo, hi)).max() <= tol)


def local_jet(f, center, K, tol=1e-11):
    """Laurent expansion of a rational function at ``center`` through (t-center)^K.

    The denominator's order of vanishing at ``center`` is read off its Taylor
    coefficients: a coefficient is treated as zero when it is below
    ``tol`` times the largest one (poles placed exactly at ``center`` give
    roundoff-level values there).
    """
    f = _as_ratfun(f)
    if K < 0:
        raise ValidationError("truncation order must be >= 0")
    dn = f.den.taylor(center, f.den.degree)
    scale = np.abs(dn).max()
    v = 0
    while v < len(dn) - 1 and abs(dn[v]) <= tol * scale:
        v += 1
    n_terms = K + v + 1
    num = f.num.taylor(center, n_terms)
    den = dn[v:]
    c = series_divide(num, den, n_terms)
    return LocalJet(center, -v, c, K)
