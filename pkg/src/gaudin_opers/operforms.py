"""sl_n matrix opers, their canonical (companion) form, coordinate changes and
regular-singularity residues.

A matrix oper is d/dt + M(t) with -1 on the subdiagonal, 0 below it and
arbitrary rational entries on and above the diagonal.  Upper unipotent gauge
transformations g act by  g M g^-1 - g' g^-1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError, ValidationError
from .ratfun import LocalJet, Poly, RatFun, local_jet, sample_points

__all__ = [
    "MatrixOper", "CanonicalOper", "gauge_transform", "canonical_form",
    "oper_coordinate_change", "schwarzian", "rs_residue", "companion_oper",
    "diagonal_oper", "mat_mul", "unipotent_inverse", "scalar_operator",
]


def _rf(x):
    if isinstance(x, RatFun):
        return x
    if isinstance(x, Poly):
        return RatFun(x)
    return RatFun(Poly([x]))


def _is_const(f, value, pts, tol=1e-12):
    vals = f(pts)
    return bool(np.all(np.abs(vals - value) <= tol * max(1.0, abs(value))))


_PROBE = sample_points(6, np.random.default_rng(2024), radius=5.0)


@dataclass(eq=False)
class MatrixOper:
    entries: list  # n x n nested lists of RatFun

    def __post_init__(self):
        self.entries = [[_rf(e) for e in row] for row in self.entries]
        n = len(self.entries)
        if any(len(row) != n for row in self.entries):
            raise ValidationError("matrix oper must be square")
        pts = _PROBE
        for r in range(n):
            for c in range(r):
                want = -1.0 if c == r - 1 else 0.0
                if not _is_const(self.entries[r][c], want, pts):
                    raise ValidationError(
                        f"entry ({r + 1},{c + 1}) must be identically {want:g} in an oper")

    @property
    def n(self):
        return len(self.entries)

    def __call__(self, t):
        return np.array([[e(t) for e in row] for row in self.entries])

    def trace(self):
        out = RatFun(Poly([0]))
        for k in range(self.n):
            out = out + self.entries[k][k]
        return out


@dataclass(eq=False)
class CanonicalOper:
    """First-row entries v_1..v_(n-1) of the companion form."""

    coefficients: list
    gauge: list | None = field(default=None, repr=False)

    @property
    def n(self):
        return len(self.coefficients) + 1

    def matrix(self):
        return companion_oper(self.coefficients)


def companion_oper(coefficients):
    n = len(coefficients) + 1
    zero = RatFun(Poly([0]))
    rows = [[zero] * n for _ in range(n)]
    for k, v in enumerate(coefficients, start=1):
        rows[0][k] = _rf(v)
    for r in range(1, n):
        rows[r][r - 1] = RatFun(Poly([-1]))
    return MatrixOper(rows)


def diagonal_oper(diag):
    """d/dt + p_-1 + diag(u_1, ..., u_n)."""
    n = len(diag)
    zero = RatFun(Poly([0]))
    rows = [[zero] * n for _ in range(n)]
    for r in range(n):
        rows[r][r] = _rf(diag[r])
        if r:
            rows[r][r - 1] = RatFun(Poly([-1]))
    return MatrixOper(rows)


def mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    zero = RatFun(Poly([0]))
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = zero
            for l in range(k):
                if not a[i][l].is_zero() and not b[l][j].is_zero():
                    acc = acc + a[i][l] * b[l][j]
            row.append(acc)
        out.append(row)
    return out


def unipotent_inverse(g):
    """Inverse of an upper unipotent matrix by back substitution."""
    n = len(g)
    zero = RatFun(Poly([0]))
    one = RatFun(Poly([1]))
    inv = [[one if i == j else zero for j in range(n)] for i in range(n)]
    # solve g X = I column by column, bottom row first
    for j in range(n):
        for i in range(j - 1, -1, -1):
            acc = zero
            for l in range(i + 1, j + 1):
                if not g[i][l].is_zero() and not inv[l][j].is_zero():
                    acc = acc + g[i][l] * inv[l][j]
            inv[i][j] = -acc
    return inv


def _check_unipotent(g, pts=_PROBE):
    n = len(g)
    for i in range(n):
        if not _is_const(g[i][i], 1.0, pts):
            raise ValidationError("gauge matrix must have 1's on the diagonal")
        for j in range(i):
            if not _is_const(g[i][j], 0.0, pts):
                raise ValidationError("gauge matrix must be upper triangular")


def gauge_transform(oper, g):
    """g (d + M) g^-1 = d + g M g^-1 - g' g^-1."""
    g = [[_rf(e) for e in row] for row in g]
    _check_unipotent(g)
    ginv = unipotent_inverse(g)
    conj = mat_mul(mat_mul(g, oper.entries), ginv)
    dg = [[e.deriv() for e in row] for row in g]
    corr = mat_mul(dg, ginv)
    out = [[conj[i][j] - corr[i][j] if not corr[i][j].is_zero() else conj[i][j]
            for j in range(oper.n)] for i in range(oper.n)]
    return MatrixOper(out)


def canonical_form(oper, check=True):
    """Gauge ``oper`` into companion form, diagonal by diagonal.

    At step k the diagonal-k entries below the first row are cleared with a
    generator on diagonal k+1; because ad(p_-1) maps diagonal k+1 injectively
    into diagonal k, the generator's entries follow by a bottom-up
    recursion.  Returns the first-row entries together with the accumulated
    gauge matrix.
    """
    n = oper.n
    zero = RatFun(Poly([0]))
    one = RatFun(Poly([1]))
    tr = oper.trace()
    if np.abs(tr(_PROBE)).max() > 1e-9:
        raise ValidationError("oper is not traceless (not an sl_n oper)")
    current = oper
    total = [[one if i == j else zero for j in range(n)] for i in range(n)]
    for k in range(n - 1):
        d = [current.entries[r][r + k] for r in range(n - k)]
        x = [zero] * (n - k - 1)
        nxt = zero
        for r in range(n - k - 1, 0, -1):
            x[r - 1] = nxt - d[r]
            nxt = x[r - 1]
        if all(xi.is_zero() for xi in x):
            continue
        g = [[one if i == j else zero for j in range(n)] for i in range(n)]
        for r in range(n - k - 1):
            g[r][r + k + 1] = x[r]
        current = gauge_transform(current, g)
        total = mat_mul(g, total)
    coeffs = [current.entries[0][k] for k in range(1, n)]
    if check:
        _verify_companion(current)
    return CanonicalOper(coeffs, gauge=total)


def _verify_companion(oper, tol=1e-9):
    n = oper.n
    pts = _PROBE
    for r in range(n):
        for c in range(r, n):
            if r == 0 and c > 0:
                continue
            vals = oper.entries[r][c](pts)
            if np.abs(vals).max() > tol * max(1.0, np.abs(vals).max() ** 0):
                raise NumericError(f"canonical form left entry ({r + 1},{c + 1}) nonzero")


def scalar_operator(oper):
    """Coefficients c_0..c_n of the operator killing the last component.

    Row r >= 1 of (d + M) phi = 0 gives phi_(r-1) = phi_r' + sum_(c>=r) M[r][c] phi_c,
    so every component is a differential operator applied to phi_(n-1); row 0
    then yields L phi_(n-1) = 0.  Upper unipotent gauge leaves the last
    component alone, so L is a gauge invariant.
    """
    n = oper.n
    zero = RatFun(Poly([0]))
    one = RatFun(Poly([1]))
    M = oper.entries

    def apply_d(op):
        # d o (sum a_j d^j) = sum (a_j' d^j + a_j d^(j+1))
        out = [zero] * (len(op) + 1)
        for j, a in enumerate(op):
            out[j] = out[j] + a.deriv()
            out[j + 1] = out[j + 1] + a
        return out

    def add(a, b):
        m = max(len(a), len(b))
        a = a + [zero] * (m - len(a))
        b = b + [zero] * (m - len(b))
        return [x + y for x, y in zip(a, b)]

    def scale(f, op):
        return [f * a for a in op]

    comps = [None] * n
    comps[n - 1] = [one]
    for r in range(n - 1, 0, -1):
        op = apply_d(comps[r])
        for c in range(r, n):
            if not M[r][c].is_zero():
                op = add(op, scale(M[r][c], comps[c]))
        comps[r - 1] = op
    L = apply_d(comps[0])
    for c in range(n):
        if not M[0][c].is_zero():
            L = add(L, scale(M[0][c], comps[c]))
    return L


# -- coordinate changes ---------------------------------------------------------

def _require_regular_coordinate(phi):
    if phi.lowest_order < 0:
        raise ValidationError("coordinate change must be regular at the point")
    if abs(phi.coeff(1)) == 0:
        raise NumericError("coordinate change has a critical point (phi' = 0)")


def schwarzian(phi, K):
    """{phi, s} = phi'''/phi' - 3/2 (phi''/phi')^2 as a jet through s^K."""
    _require_regular_coordinate(phi)
    if phi.order < K + 3:
        raise ValidationError(f"need phi through order {K + 3}, have {phi.order}")
    d1 = phi.deriv()
    d2 = d1.deriv()
    d3 = d2.deriv()
    inv = d1.inverse()
    ratio = d2 * inv
    return (d3 * inv - ratio * ratio * 1.5).truncate(K)


def oper_coordinate_change(v, phi, K):
    """Coefficient jets of the oper in the new coordinate s, t = phi(s).

    v_1 -> v_1(phi) phi'^2 - 1/2 {phi, s};   v_j -> v_j(phi) phi'^(j+1), j > 1.
    ``v`` is a CanonicalOper (or a list of RatFun / jets centered at phi(s0)).
    """
    _require_regular_coordinate(phi)
    coeffs = v.coefficients if isinstance(v, CanonicalOper) else list(v)
    t0 = phi.coeff(0)
    d1 = phi.deriv()
    out = []
    for j, f in enumerate(coeffs, start=1):
        jet = f if isinstance(f, LocalJet) else local_jet(_rf(f), t0, K + 2)
        term = jet.compose(phi) * d1 ** (j + 1)
        if j == 1:
            term = term - schwarzian(phi, K) * 0.5
        out.append(term.truncate(K))
    return out


def rs_residue(c):
    """(c_1(0) + 1/4, c_2(0), ..., c_l(0)) from leading Laurent data."""
    c = np.asarray(c, dtype=complex).ravel()
    if c.size == 0:
        raise ValidationError("need at least c_1(0)")
    out = c.copy()
    out[0] += 0.25
    return out
