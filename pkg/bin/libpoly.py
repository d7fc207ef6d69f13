#!/usr/bin/env python3

# platkh - polynomial arithmetic
# Copyright (C) 2024  Maurice (mausy5043) Hendrix
# AGPL-3.0-or-later  - see LICENSE

"""Exact polynomial arithmetic for the diagram algebra.

Two kinds of polynomials live here:

* ``Poly2``: the coefficient ring of the diagram algebra, ℤ[u, ħ] localised
  at u and ħ (Laurent polynomials). Homology is read off at u = ħ = 1 where
  both act invertibly.
* "y-polynomials": plain dicts mapping a monomial tuple
  ``(e_1, ..., e_d, a_u, b_h, t)`` to a nonzero integer. They are the
  coefficients of the divided-difference operators that realise diagrams
  (see ``libklrw``). ``t`` tracks net winding and may be negative.

Operators are dicts ``perm -> y-polynomial`` standing for ``Σ p_w ∂_w``
where ``perm`` is a permutation of ``range(d)`` in one-line notation.
"""

import logging
from collections.abc import Iterator, Mapping
from fractions import Fraction
from types import MappingProxyType

LOGGER: logging.Logger = logging.getLogger(__name__)

Mono = tuple[int, ...]
YPoly = dict[Mono, int]
Operator = dict[tuple[int, ...], YPoly]


class Poly2:
    """An element of ℤ[u^{±1}, ħ^{±1}] stored as ``{(a, b): c}`` meaning Σ c·u^a·ħ^b.

    Exponents may be negative. Zero coefficients are never stored; instances
    are treated as immutable.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[tuple[int, int], int] | None = None) -> None:
        clean: dict[tuple[int, int], int] = {}
        for (a, b), c in (terms or {}).items():
            if c:
                clean[(a, b)] = clean.get((a, b), 0) + c
                if not clean[(a, b)]:
                    del clean[(a, b)]
        self._terms = MappingProxyType(clean)
        self._hash: int | None = None

    @classmethod
    def const(cls, c: int) -> "Poly2":
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, a: int = 0, b: int = 0, c: int = 1) -> "Poly2":
        return cls({(a, b): c})

    @property
    def terms(self) -> Mapping[tuple[int, int], int]:
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __iter__(self) -> Iterator[tuple[tuple[int, int], int]]:
        return iter(sorted(self._terms.items()))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = Poly2.const(other)
        if not isinstance(other, Poly2):
            return NotImplemented
        return dict(self._terms) == dict(other._terms)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __add__(self, other: "Poly2 | int") -> "Poly2":
        if isinstance(other, int):
            other = Poly2.const(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0) + c
        return Poly2(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly2":
        return Poly2({k: -c for k, c in self._terms.items()})

    def __sub__(self, other: "Poly2 | int") -> "Poly2":
        if isinstance(other, int):
            other = Poly2.const(other)
        return self + (-other)

    def __mul__(self, other: "Poly2 | int") -> "Poly2":
        if isinstance(other, int):
            return Poly2({k: c * other for k, c in self._terms.items()})
        out: dict[tuple[int, int], int] = {}
        for (a1, b1), c1 in self._terms.items():
            for (a2, b2), c2 in other._terms.items():
                key = (a1 + a2, b1 + b2)
                out[key] = out.get(key, 0) + c1 * c2
        return Poly2(out)

    __rmul__ = __mul__

    def evaluate(self, u: int = 1, hbar: int = 1) -> int:
        """Specialise the parameters; ``evaluate()`` is the u = ħ = 1 point.

        Raises:
            ValueError: a negative power of a parameter does not divide out.
        """
        total = Fraction(0)
        for (a, b), c in self._terms.items():
            total += c * Fraction(u) ** a * Fraction(hbar) ** b
        if total.denominator != 1:
            raise ValueError(f"{self!r} is not integral at u={u}, h={hbar}")
        return int(total)

    def constant_term(self) -> int:
        return self._terms.get((0, 0), 0)

    def to_json(self) -> list[list[int]]:
        return [[a, b, c] for (a, b), c in sorted(self._terms.items())]

    @classmethod
    def from_json(cls, data: list[list[int]]) -> "Poly2":
        return cls({(a, b): c for a, b, c in data})

    def __repr__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for (a, b), c in sorted(self._terms.items()):
            mono = _power("u", a) + _power("h", b)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{c}{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def _power(name: str, e: int) -> str:
    if e in (0, 1):
        return name if e else ""
    return f"{name}^{e}" if e > 0 else f"{name}^({e})"


# y-polynomials ------------------------------------------------------------


def ypoly_add(p: YPoly, q: YPoly, scale: int = 1) -> YPoly:
    """Return p + scale·q."""
    out = dict(p)
    for m, c in q.items():
        v = out.get(m, 0) + scale * c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def mono_mul(m1: Mono, m2: Mono) -> Mono:
    return tuple(a + b for a, b in zip(m1, m2, strict=True))


def ypoly_mul(p: YPoly, q: YPoly) -> YPoly:
    out: YPoly = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = mono_mul(m1, m2)
            v = out.get(m, 0) + c1 * c2
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


def ypoly_mul_mono(p: YPoly, m: Mono, c: int = 1) -> YPoly:
    return {mono_mul(k, m): v * c for k, v in p.items()}


def unit_mono(d: int, var: int | None = None, u: int = 0, h: int = 0, t: int = 0) -> Mono:
    """Monomial y_var·u^u·ħ^h·t^t in ``d`` variables (``var`` is 0-based)."""
    exps = [0] * d
    if var is not None:
        exps[var] += 1
    return tuple(exps) + (u, h, t)


def ypoly_swap(p: YPoly, i: int) -> YPoly:
    """Apply s_i: exchange y_i and y_{i+1} (0-based ``i``)."""
    out: YPoly = {}
    for m, c in p.items():
        lst = list(m)
        lst[i], lst[i + 1] = lst[i + 1], lst[i]
        out[tuple(lst)] = c
    return out


def _divdiff_mono(m: Mono, i: int) -> YPoly:
    a, b = m[i], m[i + 1]
    if a == b:
        return {}
    sign = 1
    if a < b:
        a, b, sign = b, a, -1
    out: YPoly = {}
    # (y_i^a y_j^b - y_i^b y_j^a)/(y_i - y_j) = (y_i y_j)^b Σ_{k<a-b} y_i^{a-b-1-k} y_j^k
    for k in range(a - b):
        lst = list(m)
        lst[i] = b + (a - b - 1 - k)
        lst[i + 1] = b + k
        out[tuple(lst)] = sign
    return out


def ypoly_divdiff(p: YPoly, i: int) -> YPoly:
    """Divided difference ∂_i p = (p - s_i p)/(y_i - y_{i+1})."""
    out: YPoly = {}
    for m, c in p.items():
        for mm, cc in _divdiff_mono(m, i).items():
            v = out.get(mm, 0) + c * cc
            if v:
                out[mm] = v
            else:
                out.pop(mm, None)
    return out


# permutations --------------------------------------------------------------


def perm_length(w: tuple[int, ...]) -> int:
    """Number of inversions."""
    return sum(1 for x in range(len(w)) for y in range(x + 1, len(w)) if w[x] > w[y])


def _left_mul_s(i: int, w: tuple[int, ...]) -> tuple[int, ...] | None:
    """Return s_i∘w when the length goes up, else None."""
    pos_i = w.index(i)
    pos_j = w.index(i + 1)
    if pos_i > pos_j:
        return None
    lst = list(w)
    lst[pos_i], lst[pos_j] = i + 1, i
    return tuple(lst)


# operators ----------------------------------------------------------------


def op_identity(d: int, poly: YPoly | None = None) -> Operator:
    ident = tuple(range(d))
    if poly is None:
        poly = {(0,) * (d + 3): 1}
    return {ident: dict(poly)} if poly else {}


def op_add(a: Operator, b: Operator, scale: int = 1) -> Operator:
    out = {w: dict(p) for w, p in a.items()}
    for w, p in b.items():
        q = ypoly_add(out.get(w, {}), p, scale)
        if q:
            out[w] = q
        else:
            out.pop(w, None)
    return out


def op_left_poly(op: Operator, p: YPoly) -> Operator:
    """p ∘ op."""
    out: Operator = {}
    for w, q in op.items():
        r = ypoly_mul(p, q)
        if r:
            out[w] = r
    return out


def op_left_divdiff(op: Operator, i: int) -> Operator:
    """∂_i ∘ op, using ∂_i q = s_i(q) ∂_i + ∂_i(q) and the nil-Hecke rule."""
    out: Operator = {}
    for w, q in op.items():
        lifted = _left_mul_s(i, w)
        if lifted is not None:
            out[lifted] = ypoly_add(out.get(lifted, {}), ypoly_swap(q, i))
        dq = ypoly_divdiff(q, i)
        if dq:
            out[w] = ypoly_add(out.get(w, {}), dq)
    return {w: p for w, p in out.items() if p}



def op_left_swap(op: Operator, i: int) -> Operator:
    """s_i ∘ op, written as 1 - (y_i - y_{i+1})·∂_i so it stays an operator."""
    if not op:
        return {}
    d = len(next(iter(op)))
    diff = ypoly_add({unit_mono(d, i): 1}, {unit_mono(d, i + 1): 1}, -1)
    return op_add(op, op_left_poly(op_left_divdiff(op, i), diff), -1)
