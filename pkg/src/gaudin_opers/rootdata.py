"""Cartan matrices, coweights in pairing coordinates, and Weyl group actions.

Conventions
-----------
``A[i, j] = <alpha_j, coroot_i>`` (Kac/Bourbaki).  A coweight is stored only
through its pairings ``p[a] = <alpha_a, mu>``; the simple coroot ``coroot_a``
therefore has coordinate vector ``A[a]`` (row a) and rho-check is all ones.

Simple-root indices and Weyl words are 1-based everywhere in the public API,
matching alpha_1 .. alpha_l.  A word ``(i1, ..., ik)`` stands for the group
element ``s_i1 s_i2 ... s_ik``, so ``weyl_act`` applies its rightmost letter
first.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import NonTerminationError, ValidationError

__all__ = [
    "GeneralizedCartanMatrix", "load_cartan", "reflect", "to_dominant",
    "weyl_act", "residue_to_weyl", "rho", "coroot", "is_dominant",
    "longest_word", "apply_w0", "langlands_dual", "reduce_word",
]

DEFAULT_CAP = 10_000
_OVERFLOW = 2 ** 50


@dataclass(frozen=True)
class GeneralizedCartanMatrix:
    entries: np.ndarray = field(repr=False)
    kind: str = "general"

    def __post_init__(self):
        a = np.array(self.entries, dtype=np.int64)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        _validate(a)

    @property
    def rank(self) -> int:
        return self.entries.shape[0]

    def __eq__(self, other):
        if not isinstance(other, GeneralizedCartanMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    def __repr__(self):
        return f"GeneralizedCartanMatrix({self.kind!r}, {self.entries.tolist()})"

    def is_symmetric(self) -> bool:
        return np.array_equal(self.entries, self.entries.T)


def _validate(a):
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValidationError(f"Cartan matrix must be square and nonempty, got shape {a.shape}")
    if not np.all(np.diag(a) == 2):
        raise ValidationError(f"Cartan matrix diagonal must be 2, got {np.diag(a).tolist()}")
    off = a - np.diag(np.diag(a))
    if np.any(off > 0):
        i, j = np.argwhere(off > 0)[0]
        raise ValidationError(f"positive off-diagonal entry a[{i + 1},{j + 1}] = {a[i, j]}")
    zero = off == 0
    if not np.array_equal(zero, zero.T):
        i, j = np.argwhere(zero != zero.T)[0]
        raise ValidationError(
            f"zero pattern not symmetric: a[{i + 1},{j + 1}]={a[i, j]}, a[{j + 1},{i + 1}]={a[j, i]}")


def _chain(n):
    a = 2 * np.eye(n, dtype=np.int64)
    for i in range(n - 1):
        a[i, i + 1] = a[i + 1, i] = -1
    return a


def _finite(letter, n):
    if letter == "A":
        if n < 1:
            raise ValidationError("A_n needs n >= 1")
        return _chain(n)
    if letter == "B":
        if n < 2:
            raise ValidationError("B_n needs n >= 2")
        a = _chain(n)
        a[n - 1, n - 2] = -2  # alpha_n short: <alpha_{n-1}, coroot_n> = -2
        return a
    if letter == "C":
        if n < 2:
            raise ValidationError("C_n needs n >= 2")
        a = _chain(n)
        a[n - 2, n - 1] = -2
        return a
    if letter == "D":
        if n < 3:
            raise ValidationError("D_n needs n >= 3")
        a = _chain(n)
        a[n - 2, n - 1] = a[n - 1, n - 2] = 0
        a[n - 3, n - 1] = a[n - 1, n - 3] = -1
        return a
    if letter == "E":
        if n not in (6, 7, 8):
            raise ValidationError("E_n needs n in {6, 7, 8}")
        # Bourbaki numbering: 1-3-4-5-...-n chain, node 2 attached to 4
        a = 2 * np.eye(n, dtype=np.int64)
        edges = [(1, 3), (3, 4), (2, 4)] + [(k, k + 1) for k in range(4, n)]
        for i, j in edges:
            a[i - 1, j - 1] = a[j - 1, i - 1] = -1
        return a
    if letter == "F":
        if n != 4:
            raise ValidationError("F_n needs n = 4")
        a = _chain(4)
        a[2, 1] = -2  # alpha_1, alpha_2 long; alpha_3, alpha_4 short
        return a
    if letter == "G":
        if n != 2:
            raise ValidationError("G_n needs n = 2")
        return np.array([[2, -3], [-1, 2]], dtype=np.int64)  # alpha_1 short
    raise ValidationError(f"unknown Cartan type {letter!r}")


_LABEL = re.compile(r"^\s*([A-Ga-g])\s*_?\s*(\d+)\s*$")


def load_cartan(label, rank=None) -> GeneralizedCartanMatrix:
    """Build a validated Cartan matrix.

    ``label`` may be a type string (``"A2"``, ``"B_3"``), a ``(letter, rank)``
    pair, a letter plus ``rank``, an explicit integer matrix, or an existing
    :class:`GeneralizedCartanMatrix`.
    """
    if isinstance(label, GeneralizedCartanMatrix):
        return label
    if isinstance(label, (tuple, list)) and len(label) == 2 and isinstance(label[0], str):
        label, rank = label
    if isinstance(label, str):
        if rank is not None:
            letter, n = label.strip().upper(), int(rank)
        else:
            m = _LABEL.match(label)
            if m is None:
                raise ValidationError(f"cannot parse Cartan type {label!r}")
            letter, n = m.group(1).upper(), int(m.group(2))
        return GeneralizedCartanMatrix(_finite(letter, n), kind=f"{letter}{n}")
    arr = np.asarray(label)
    if arr.dtype.kind not in "iu":
        if arr.dtype.kind == "f" and np.all(arr == np.round(arr)):
            arr = arr.astype(np.int64)
        else:
            raise ValidationError("explicit Cartan matrix must have integer entries")
    return GeneralizedCartanMatrix(arr, kind="general")


def langlands_dual(A) -> GeneralizedCartanMatrix:
    A = load_cartan(A)
    kind = A.kind
    swap = {"B": "C", "C": "B"}
    if kind[:1] in swap:
        kind = swap[kind[0]] + kind[1:]
    return GeneralizedCartanMatrix(A.entries.T.copy(), kind=kind)


def _as_pairings(mu, rank):
    p = np.asarray(mu)
    if p.dtype.kind in "iu":
        p = p.astype(np.int64)
    elif p.dtype.kind == "f" and np.all(p == np.round(p)):
        p = p.astype(np.int64)
    elif p.dtype.kind not in "f":
        p = p.astype(np.float64)
    if p.shape != (rank,):
        raise ValidationError(f"coweight must have {rank} pairings, got shape {p.shape}")
    return p


def rho(A) -> np.ndarray:
    return np.ones(load_cartan(A).rank, dtype=np.int64)


def coroot(A, i) -> np.ndarray:
    A = load_cartan(A)
    return A.entries[i - 1].copy()


def is_dominant(mu) -> bool:
    return bool(np.all(np.asarray(mu) >= 0))


def reflect(A, i, mu) -> np.ndarray:
    """s_i(mu) = mu - <alpha_i, mu> coroot_i."""
    A = load_cartan(A)
    if not 1 <= i <= A.rank:
        raise ValidationError(f"reflection index {i} outside 1..{A.rank}")
    p = _as_pairings(mu, A.rank)
    return p - p[i - 1] * A.entries[i - 1]


def weyl_act(A, word, mu) -> np.ndarray:
    A = load_cartan(A)
    p = _as_pairings(mu, A.rank)
    for i in reversed(tuple(word)):
        p = reflect(A, i, p)
    return p


def to_dominant(A, mu, cap=DEFAULT_CAP):
    """Reflect ``mu`` into the dominant chamber.

    Returns ``(dominant, word)`` with ``weyl_act(A, word, dominant) == mu``.
    Always reflects at the smallest index with a negative pairing.
    """
    A = load_cartan(A)
    p = _as_pairings(mu, A.rank)
    word = []
    while True:
        neg = np.flatnonzero(p < 0)
        if neg.size == 0:
            return p, tuple(word)
        if len(word) >= cap:
            raise NonTerminationError(
                f"no dominant representative after {cap} reflections (outside the Tits cone?)")
        i = int(neg[0]) + 1
        p = reflect(A, i, p)
        word.append(i)
        if p.dtype.kind == "i" and np.abs(p).max() > _OVERFLOW:
            # int64 would wrap around long before the cap on indefinite types
            raise NonTerminationError(
                f"pairings exceed {_OVERFLOW:.0e} after {len(word)} reflections (outside the Tits cone?)")


def residue_to_weyl(A, r, lam, cap=DEFAULT_CAP):
    """Solve r = -y(lam + rho) + rho for y; None when no such y exists."""
    A = load_cartan(A)
    lam = _as_pairings(lam, A.rank)
    if not is_dominant(lam):
        raise ValidationError(f"highest weight {lam.tolist()} is not dominant")
    target = lam + 1
    dom, word = to_dominant(A, rho(A) - _as_pairings(r, A.rank), cap=cap)
    if np.array_equal(dom, target) or (dom.dtype.kind == "f" and np.allclose(dom, target)):
        return word
    return None


def reduce_word(A, word):
    """Drop letters until the word is reduced (checked on a regular element).

    Uses deletion: a word is reduced iff its length equals the number of
    reflecting hyperplanes it crosses, detected here by tracking where rho
    goes.  Works for finite types; for general matrices it is a heuristic.
    """
    A = load_cartan(A)
    word = list(word)
    changed = True
    while changed:
        changed = False
        target = weyl_act(A, word, rho(A))
        for k in range(len(word)):
            for l in range(k + 1, len(word)):
                trial = word[:k] + word[k + 1:l] + word[l + 1:]
                if np.array_equal(weyl_act(A, trial, rho(A)), target):
                    word = trial
                    changed = True
                    break
            if changed:
                break
    return tuple(word)


def longest_word(A, cap=DEFAULT_CAP):
    """Reduced word for w_0 (finite types): the element sending rho to -rho."""
    A = load_cartan(A)
    dom, word = to_dominant(A, -rho(A), cap=cap)
    if not np.array_equal(dom, rho(A)):
        raise ValidationError("-rho has no dominant representative rho: not a finite type")
    return word


def apply_w0(A, mu, cap=DEFAULT_CAP):
    A = load_cartan(A)
    return weyl_act(A, longest_word(A, cap=cap), mu)
