#!/usr/bin/env python3

# platkh - complexes of projectives
# Copyright (C) 2024  Maurice (mausy5043) Hendrix
# AGPL-3.0-or-later  - see LICENSE

"""Bounded complexes of shifted projectives P_θ{a}[h] over the diagram algebra.

Conventions:

* the differential raises ``hdeg`` by one;
* an entry from ``P{a}`` to ``P'{b}`` is a ``LinComb`` with bottom = source
  layout, top = target layout, homogeneous of grade ``b - a``;
* ``compose(g, f)`` means "f first".
"""

import hashlib
import json
import logging
import os
from collections import defaultdict
from collections.abc import Hashable, Iterable, Mapping
from dataclasses import dataclass, field
from typing import Any, NamedTuple

import libklrw as kl
import liblinalg as la
from libklrw import GradeVector, Layout, LinComb
from libpoly import Poly2

LOGGER: logging.Logger = logging.getLogger(__name__)

CACHE_FORMAT = 4


class ComplexError(ValueError):
    """Malformed complex: wrong degrees, wrong grades, or d² ≠ 0."""


@dataclass(frozen=True, order=True)
class Term:
    """One summand ``P_obj{shift}`` placed in homological degree ``hdeg``."""

    obj: Layout
    shift: GradeVector = kl.ZERO_GRADE
    hdeg: int = 0

    def shifted(self, hdeg: int = 0, grade: GradeVector = kl.ZERO_GRADE) -> "Term":
        return Term(self.obj, self.shift + grade, self.hdeg + hdeg)

    def label(self) -> str:
        return f"{self.obj}{{{','.join(str(g) for g in self.shift)}}}@{self.hdeg}"

    def to_json(self) -> dict:
        return {"counts": list(self.obj.counts), "shift": list(self.shift), "hdeg": self.hdeg}

    @classmethod
    def from_json(cls, n_pairs: int, data: Mapping) -> "Term":
        obj = Layout(n_pairs, tuple(data["counts"]))
        return cls(obj, GradeVector(*data["shift"]), data["hdeg"])


Entries = dict[tuple[int, int], LinComb]


class ChainComplex:
    """Terms plus a sparse differential ``(source, target) -> LinComb``."""

    __slots__ = ("n_pairs", "terms", "_entries")

    def __init__(
        self,
        n_pairs: int,
        terms: Iterable[Term],
        entries: Mapping[tuple[int, int], LinComb] | None = None,
        check: bool = True,
    ) -> None:
        self.n_pairs = n_pairs
        self.terms: tuple[Term, ...] = tuple(terms)
        self._entries: Entries = {k: v for k, v in (entries or {}).items() if v}
        if check:
            validate(self, squares=False)

    @classmethod
    def zero(cls, n_pairs: int) -> "ChainComplex":
        return cls(n_pairs, ())

    @classmethod
    def single(cls, term: Term) -> "ChainComplex":
        return cls(term.obj.n_pairs, (term,))

    @property
    def entries(self) -> Mapping[tuple[int, int], LinComb]:
        return self._entries

    def entry(self, s: int, t: int) -> LinComb:
        found = self._entries.get((s, t))
        if found is None:
            return LinComb.zero(self.terms[s].obj, self.terms[t].obj)
        return found

    def __len__(self) -> int:
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def successors(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = defaultdict(list)
        for s, t in sorted(self._entries):
            out[s].append(t)
        return out

    def predecessors(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = defaultdict(list)
        for s, t in sorted(self._entries):
            out[t].append(s)
        return out

    def hdegs(self) -> list[int]:
        return sorted({t.hdeg for t in self.terms})

    def indices_in(self, hdeg: int) -> list[int]:
        return [i for i, t in enumerate(self.terms) if t.hdeg == hdeg]

    def size(self) -> tuple[int, int]:
        """(term count, entry count), the telemetry numbers."""
        return len(self.terms), len(self._entries)

    def d_squared(self) -> Entries:
        """Nonzero components of d∘d."""
        succ = self.successors()
        out: Entries = {}
        for s in range(len(self.terms)):
            acc: dict[int, LinComb] = {}
            for t in succ.get(s, []):
                first = self._entries[(s, t)]
                for u in succ.get(t, []):
                    part = kl.compose(self._entries[(t, u)], first)
                    acc[u] = acc[u] + part if u in acc else part
            for u, value in acc.items():
                if value:
                    out[(s, u)] = value
        return out

    def with_entries(
        self, entries: Mapping[tuple[int, int], LinComb], check: bool = True
    ) -> "ChainComplex":
        return ChainComplex(self.n_pairs, self.terms, entries, check=check)

    def to_json(self) -> dict:
        return {
            "format": CACHE_FORMAT,
            "n": self.n_pairs,
            "terms": [t.to_json() for t in self.terms],
            "entries": [
                [s, t, self._entries[(s, t)].to_json()] for s, t in sorted(self._entries)
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "ChainComplex":
        n_pairs = data["n"]
        terms = [Term.from_json(n_pairs, t) for t in data["terms"]]
        entries = {
            (s, t): LinComb.from_json(terms[s].obj, terms[t].obj, value)
            for s, t, value in data["entries"]
        }
        return cls(n_pairs, terms, entries, check=False)

    def digest(self) -> str:
        text = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    def describe(self) -> str:
        """Multi-line listing of terms and entries for debugging."""
        lines = [f"{i}: {t.label()}" for i, t in enumerate(self.terms)]
        lines += [f"{s}->{t}: {self._entries[(s, t)]!r}" for s, t in sorted(self._entries)]
        return "\n".join(lines)

    def __repr__(self) -> str:
        terms, entries = self.size()
        return f"ChainComplex(n={self.n_pairs}, terms={terms}, entries={entries})"


def validate(C: ChainComplex, squares: bool = True) -> None:
    """Check degrees, objects, grades and (optionally) d² = 0.

    Raises:
        ComplexError: naming the first offending entry.
    """
    for (s, t), value in sorted(C.entries.items()):
        if not (0 <= s < len(C.terms) and 0 <= t < len(C.terms)):
            raise ComplexError(f"entry {s}->{t} refers to a missing term")
        src, tgt = C.terms[s], C.terms[t]
        if tgt.hdeg != src.hdeg + 1:
            raise ComplexError(f"entry {s}->{t} goes from hdeg {src.hdeg} to {tgt.hdeg}")
        if value.bottom != src.obj or value.top != tgt.obj:
            raise ComplexError(f"entry {s}->{t} does not connect the objects of its terms")
        expected = tgt.shift - src.shift
        for grade in value.grades():
            if grade != expected:
                raise ComplexError(
                    f"entry {s}->{t} has a summand of grade {tuple(grade)},"
                    f" expected {tuple(expected)}"
                )
    if squares:
        residue = C.d_squared()
        if residue:
            (s, u), value = min(residue.items())
            raise ComplexError(f"d² is not zero: component {s}->{u} is {value!r}")


# chain maps ------------------------------------------------------------------


@dataclass
class ChainMap:
    """Components ``(source index, target index) -> LinComb``, hdeg preserving.

    A component ``P{a} -> P'{b}`` has grade ``b - a + grade``.
    """

    source: ChainComplex
    target: ChainComplex
    comps: dict[tuple[int, int], LinComb] = field(default_factory=dict)
    grade: GradeVector = kl.ZERO_GRADE

    def component(self, i: int, j: int) -> LinComb:
        found = self.comps.get((i, j))
        if found is None:
            return LinComb.zero(self.source.terms[i].obj, self.target.terms[j].obj)
        return found

    def defect(self) -> Entries:
        """Nonzero components of d∘f - f∘d (shape source hdeg -> target hdeg + 1)."""
        out: Entries = {}
        succ_s = self.source.successors()
        succ_t = self.target.successors()
        for i in range(len(self.source.terms)):
            acc: dict[int, LinComb] = {}
            for (a, j), f in self.comps.items():
                if a != i or not f:
                    continue
                for k in succ_t.get(j, []):
                    part = kl.compose(self.target.entries[(j, k)], f)
                    acc[k] = acc[k] + part if k in acc else part
            for m in succ_s.get(i, []):
                first = self.source.entries[(i, m)]
                for (a, k), f in self.comps.items():
                    if a != m or not f:
                        continue
                    part = -kl.compose(f, first)
                    acc[k] = acc[k] + part if k in acc else part
            for k, value in acc.items():
                if value:
                    out[(i, k)] = value
        return out

    def check(self) -> None:
        for (i, j), f in sorted(self.comps.items()):
            src, tgt = self.source.terms[i], self.target.terms[j]
            if src.hdeg != tgt.hdeg:
                raise ComplexError(f"map component {i}->{j} changes hdeg")
            expected = tgt.shift - src.shift + self.grade
            for grade in f.grades():
                if grade != expected:
                    raise ComplexError(f"map component {i}->{j} has grade {tuple(grade)}")
        bad = self.defect()
        if bad:
            (i, k), value = min(bad.items())
            raise ComplexError(f"map does not commute with d at {i}->{k}: {value!r}")


def identity_map(C: ChainComplex) -> ChainMap:
    return ChainMap(C, C, {(i, i): kl.identity(t.obj) for i, t in enumerate(C.terms)})


# constructions -----------------------------------------------------------------


def shift(C: ChainComplex, hdeg: int = 0, grade: GradeVector = kl.ZERO_GRADE) -> ChainComplex:
    """Move every term by ``hdeg`` and ``grade``; the differential is unchanged."""
    return ChainComplex(
        C.n_pairs, [t.shifted(hdeg, grade) for t in C.terms], C.entries, check=False
    )


def direct_sum(A: ChainComplex, B: ChainComplex) -> ChainComplex:
    offset = len(A.terms)
    entries = dict(A.entries)
    entries.update({(s + offset, t + offset): v for (s, t), v in B.entries.items()})
    return ChainComplex(A.n_pairs, A.terms + B.terms, entries, check=False)


def cone(f: ChainMap, check: bool = True) -> ChainComplex:
    """Cone of a degree-0 chain map: source moved to hdeg - 1, ``d = [[-d_A, 0], [f, d_B]]``."""
    if f.grade != kl.ZERO_GRADE:
        raise ComplexError("cone needs a chain map of internal degree zero")
    if check:
        f.check()
    A, B = f.source, f.target
    offset = len(A.terms)
    terms = [t.shifted(-1) for t in A.terms] + list(B.terms)
    entries: Entries = {(s, t): -v for (s, t), v in A.entries.items()}
    entries.update({(s + offset, t + offset): v for (s, t), v in B.entries.items()})
    entries.update({(i, j + offset): v for (i, j), v in f.comps.items() if v})
    out = ChainComplex(A.n_pairs, terms, entries, check=False)
    if check:
        validate(out)
    return out


def _black_span(C: ChainComplex) -> tuple[int, int] | None:
    segs = [s for t in C.terms for s, c in enumerate(t.obj.counts) if c]
    return (min(segs), max(segs)) if segs else None


def merge_layouts(*layouts: Layout | None) -> Layout:
    present = [lay for lay in layouts if lay is not None]
    n_pairs = present[0].n_pairs
    columns = zip(*(lay.counts for lay in present), strict=True)
    return Layout(n_pairs, tuple(sum(c) for c in columns))


def _embed_diagram(
    diagram: kl.NormalDiagram, left: Layout | None, right: Layout | None, coeff: Poly2
) -> LinComb:
    """Juxtapose spectator strands (identity) to the left and right of ``diagram``."""
    bottom = merge_layouts(left, diagram.bottom, right)
    top = merge_layouts(left, diagram.top, right)
    offset = left.d if left is not None else 0
    events = []
    for event in diagram.events():
        if event[0] in ("bb", "dot"):
            events.append((event[0], event[1] + offset))
        else:
            events.append(event)
    return kl.normalize(kl.SliceWord(bottom, top, tuple(events))).scale(coeff)


def embed(value: LinComb, left: Layout | None = None, right: Layout | None = None) -> LinComb:
    """Extend a morphism by identity strands placed left and/or right of it."""
    bottom = merge_layouts(left, value.bottom, right)
    out = LinComb.zero(bottom, merge_layouts(left, value.top, right))
    for diagram, coeff in value.items():
        out = out + _embed_diagram(diagram, left, right, coeff)
    return out


def product_complex(C1: ChainComplex, C2: ChainComplex, check: bool = True) -> ChainComplex:
    """Side-by-side product, C1 strands to the left of C2 strands.

    The Koszul sign ``(-1)^{hdeg of the C1 term}`` goes on C2's differential.

    Raises:
        ComplexError: when some black of C1 can sit right of a black of C2.
    """
    if C1.n_pairs != C2.n_pairs:
        raise ComplexError("factors live on different red configurations")
    span1, span2 = _black_span(C1), _black_span(C2)
    if span1 is not None and span2 is not None and span1[1] > span2[0]:
        raise ComplexError(f"black supports {span1} and {span2} interleave")
    terms: list[Term] = []
    index: dict[tuple[int, int], int] = {}
    for i, a in enumerate(C1.terms):
        for j, b in enumerate(C2.terms):
            index[(i, j)] = len(terms)
            terms.append(Term(merge_layouts(a.obj, b.obj), a.shift + b.shift, a.hdeg + b.hdeg))
    entries: Entries = {}
    for (i, i2), value in C1.entries.items():
        for j, b in enumerate(C2.terms):
            entries[(index[(i, j)], index[(i2, j)])] = embed(value, right=b.obj)
    for (j, j2), value in C2.entries.items():
        for i, a in enumerate(C1.terms):
            sign = -1 if a.hdeg % 2 else 1
            entries[(index[(i, j)], index[(i, j2)])] = embed(value, left=a.obj).scale(sign)
    out = ChainComplex(C1.n_pairs, terms, entries, check=False)
    if check:
        validate(out)
    return out


def simplify(C: ChainComplex) -> ChainComplex:
    """Gaussian elimination of ±identity entries, lowest (source, target) first."""
    entries: Entries = dict(C.entries)
    alive = set(range(len(C.terms)))
    succ: dict[int, set[int]] = defaultdict(set)
    pred: dict[int, set[int]] = defaultdict(set)
    for s, t in entries:
        succ[s].add(t)
        pred[t].add(s)
    cancelled = 0
    while True:
        pick = None
        for s, t in sorted(entries):
            if C.terms[s].shift != C.terms[t].shift:
                continue
            eps = entries[(s, t)].is_unit()
            if eps:
                pick = (s, t, eps)
                break
        if pick is None:
            break
        s, t, eps = pick
        for x in sorted(pred[t] - {s}):
            into_t = entries[(x, t)]
            for y in sorted(succ[s] - {t}):
                zig = kl.compose(entries[(s, y)], into_t).scale(eps)
                value = entries.get((x, y))
                value = -zig if value is None else value - zig
                if value:
                    entries[(x, y)] = value
                    succ[x].add(y)
                    pred[y].add(x)
                elif (x, y) in entries:
                    del entries[(x, y)]
                    succ[x].discard(y)
                    pred[y].discard(x)
        for gone in (s, t):
            for y in list(succ[gone]):
                entries.pop((gone, y), None)
                pred[y].discard(gone)
            for x in list(pred[gone]):
                entries.pop((x, gone), None)
                succ[x].discard(gone)
            succ.pop(gone, None)
            pred.pop(gone, None)
            alive.discard(gone)
        cancelled += 1
    if not cancelled:
        return C
    LOGGER.debug(f"cancelled {cancelled} pairs, {len(alive)} terms left")
    keep = sorted(alive)
    new_index = {old: new for new, old in enumerate(keep)}
    return ChainComplex(
        C.n_pairs,
        [C.terms[i] for i in keep],
        {(new_index[s], new_index[t]): v for (s, t), v in entries.items()},
        check=False,
    )


# Hom into the simple module -----------------------------------------------------


class HomGraded:
    """Free bigraded ℤ-complex: generators at (h, J), differential lowering h by one."""

    def __init__(self, gens: Iterable[tuple[int, int]], matrix: Mapping[tuple[int, int], int]):
        self.gens: tuple[tuple[int, int], ...] = tuple(gens)
        # (from generator, to generator) -> coefficient
        self.matrix: dict[tuple[int, int], int] = {k: v for k, v in matrix.items() if v}
        for (a, b) in self.matrix:
            ha, ja = self.gens[a]
            hb, jb = self.gens[b]
            if hb != ha - 1:
                raise ComplexError(f"generator map {a}->{b} does not lower h by one")
            if ja != jb:
                raise ComplexError(f"generator map {a}->{b} is not J-homogeneous")

    def bidegrees(self) -> list[tuple[int, int]]:
        return sorted(set(self.gens))

    def piece(self, h: int, j: int) -> list[int]:
        return [k for k, g in enumerate(self.gens) if g == (h, j)]

    def _block(self, src: list[int], dst: list[int]) -> la.SparseIntMatrix:
        pos_s = {g: k for k, g in enumerate(src)}
        pos_d = {g: k for k, g in enumerate(dst)}
        out = la.SparseIntMatrix(len(dst), len(src))
        for (a, b), v in self.matrix.items():
            if a in pos_s and b in pos_d:
                out.add(pos_d[b], pos_s[a], v)
        return out

    def homology_at(self, h: int, j: int) -> la.HomologyGroup:
        here = self.piece(h, j)
        above = self.piece(h + 1, j)
        below = self.piece(h - 1, j)
        return la.homology_at(self._block(above, here), self._block(here, below), len(here))

    def homology(self, executor: Any = None) -> dict[tuple[int, int], la.HomologyGroup]:
        """Nonzero homology groups; ``executor`` may map the pieces in parallel."""
        keys = self.bidegrees()
        if executor is None:
            groups = [self.homology_at(h, j) for h, j in keys]
        else:
            groups = list(executor.map(lambda key: self.homology_at(*key), keys))
        return {k: g for k, g in zip(keys, groups, strict=True) if not g.is_zero()}

    def euler(self) -> dict[int, int]:
        """Σ_h (-1)^h rank per J."""
        out: dict[int, int] = defaultdict(int)
        for h, j in self.gens:
            out[j] += -1 if h % 2 else 1
        return {j: v for j, v in sorted(out.items()) if v}


def hom_eval_simple(C: ChainComplex, shift_n: int | None = None) -> HomGraded:
    """Hom(C, S_Π(n)) at u = ħ = 1.

    One generator per term on the cup layout Π(n), at ``(hdeg, -(J + 2n))``.
    An entry s -> t between such terms contributes the identity coefficient of
    the diagram, evaluated at u = ħ = 1, as a map from t's generator to s's.
    """
    n = C.n_pairs
    cup = Layout.cups(n)
    offset = 2 * n if shift_n is None else shift_n
    gen_of: dict[int, int] = {}
    gens: list[tuple[int, int]] = []
    for i, t in enumerate(C.terms):
        if t.obj == cup:
            gen_of[i] = len(gens)
            gens.append((t.hdeg, -(t.shift.J + offset)))
    matrix: dict[tuple[int, int], int] = {}
    for (s, t), value in sorted(C.entries.items()):
        if s in gen_of and t in gen_of:
            lam = value.identity_coefficient().evaluate()
            if lam:
                matrix[(gen_of[t], gen_of[s])] = lam
    return HomGraded(gens, matrix)


homEvalSimple = hom_eval_simple
productComplex = product_complex


# linear systems in Hom spaces ------------------------------------------------------


class HomTerm(NamedTuple):
    """``sign · after ∘ X[key] ∘ before``; missing factors are identities."""

    key: Hashable
    after: LinComb | None = None
    before: LinComb | None = None
    sign: int = 1


@dataclass
class _Slot:
    bottom: Layout
    top: Layout
    basis: tuple[LinComb, ...]
    offset: int


class HomSystem:
    """Integer linear equations whose unknowns are morphisms of a fixed grade.

    Each unknown ranges over the ℤ-span of ``basis_in_degree``; equations read
    ``Σ sign·after∘X∘before + constant = 0`` and are expanded in the
    (diagram, monomial) coordinates of their target Hom space.
    """

    def __init__(self) -> None:
        self._slots: dict[Hashable, _Slot] = {}
        self._order: list[Hashable] = []
        self._ncols = 0
        self._rows: dict[Hashable, int] = {}
        self._entries: dict[tuple[int, int], int] = defaultdict(int)
        self._rhs: dict[int, int] = defaultdict(int)

    def add_unknown(
        self, key: Hashable, bottom: Layout, top: Layout, grade: GradeVector, planar: bool = True
    ) -> int:
        if key in self._slots:
            raise ComplexError(f"unknown {key!r} declared twice")
        basis = tuple(
            LinComb.basis(diagram, Poly2.monomial(a, b))
            for diagram, (a, b) in kl.basis_in_degree(bottom, top, grade, planar)
        )
        self._slots[key] = _Slot(bottom, top, basis, self._ncols)
        self._order.append(key)
        self._ncols += len(basis)
        return len(basis)

    @property
    def unknown_count(self) -> int:
        return self._ncols

    def _row(self, label: Hashable, coord: tuple) -> int:
        key = (label, coord)
        if key not in self._rows:
            self._rows[key] = len(self._rows)
        return self._rows[key]

    def add_equation(
        self, label: Hashable, terms: Iterable[HomTerm], constant: LinComb | None = None
    ) -> None:
        for term in terms:
            slot = self._slots[term.key]
            for k, element in enumerate(slot.basis):
                value = element
                if term.before is not None:
                    value = kl.compose(value, term.before)
                if term.after is not None:
                    value = kl.compose(term.after, value)
                for coord, c in value.coordinates().items():
                    self._entries[(self._row(label, coord), slot.offset + k)] += term.sign * c
        if constant is not None:
            for coord, c in constant.coordinates().items():
                self._rhs[self._row(label, coord)] -= c

    def _matrix(self) -> tuple[la.SparseIntMatrix, list[int]]:
        rows = len(self._rows)
        mat = la.SparseIntMatrix.from_entries(rows, self._ncols, self._entries)
        rhs = [self._rhs.get(i, 0) for i in range(rows)]
        return mat, rhs

    def _unpack(self, vector: list[int]) -> dict[Hashable, LinComb]:
        out: dict[Hashable, LinComb] = {}
        for key in self._order:
            slot = self._slots[key]
            value = LinComb.zero(slot.bottom, slot.top)
            for k, element in enumerate(slot.basis):
                c = vector[slot.offset + k]
                if c:
                    value = value + element.scale(c)
            out[key] = value
        return out

    def solve(self) -> dict[Hashable, LinComb] | None:
        """A particular solution (free coordinates zero), or None."""
        mat, rhs = self._matrix()
        vector = la.solve_z(mat, rhs)
        if vector is None:
            return None
        return self._unpack(vector)

    def kernel(self) -> list[dict[Hashable, LinComb]]:
        """ℤ-basis of the homogeneous solutions."""
        mat, _ = self._matrix()
        if self._ncols == 0:
            return []
        return [self._unpack(vec) for vec in la.kernel_basis(mat)]


# graded pieces ------------------------------------------------------------------------


@dataclass
class IntComplex:
    """Finite free ℤ-complex: ``dims[h]`` and maps ``maps[h]: C^h -> C^{h+1}``."""

    dims: dict[int, int]
    maps: dict[int, la.SparseIntMatrix]

    def homology(self) -> dict[int, la.HomologyGroup]:
        out = {}
        for h, dim in sorted(self.dims.items()):
            d_in = self.maps.get(h - 1, la.SparseIntMatrix(dim, self.dims.get(h - 1, 0)))
            d_out = self.maps.get(h, la.SparseIntMatrix(self.dims.get(h + 1, 0), dim))
            group = la.homology_at(d_in, d_out, dim)
            if not group.is_zero():
                out[h] = group
        return out

    def is_exact(self) -> bool:
        return not self.homology()


def graded_piece_complex(C: ChainComplex, source: Layout, grade: GradeVector) -> IntComplex:
    """Hom(P_source, C) in internal degree ``grade`` as an integer complex."""
    bases: dict[int, list[tuple[kl.NormalDiagram, tuple[int, int]]]] = {}
    for i, t in enumerate(C.terms):
        bases[i] = list(kl.basis_in_degree(source, t.obj, t.shift + grade, False))
    offsets: dict[int, int] = {}
    dims: dict[int, int] = defaultdict(int)
    for i, t in enumerate(C.terms):
        offsets[i] = dims[t.hdeg]
        dims[t.hdeg] += len(bases[i])
    for h in C.hdegs():
        dims.setdefault(h, 0)
    entries: dict[int, dict[tuple[int, int], int]] = defaultdict(lambda: defaultdict(int))
    for (s, t), value in C.entries.items():
        h = C.terms[s].hdeg
        position = {coord: k for k, coord in enumerate(bases[t])}
        for k, (diagram, (a, b)) in enumerate(bases[s]):
            image = kl.compose(value, LinComb.basis(diagram, Poly2.monomial(a, b)))
            for (d2, mono), c in image.coordinates().items():
                row = position.get((d2, mono))
                if row is None:
                    raise ComplexError(f"image of a basis element leaves the piece at {s}->{t}")
                entries[h][(offsets[t] + row, offsets[s] + k)] += c
    maps = {
        h: la.SparseIntMatrix.from_entries(dims.get(h + 1, 0), dims[h], dict(block))
        for h, block in entries.items()
    }
    return IntComplex(dict(dims), maps)


gradedPieceComplex = graded_piece_complex


# on-disk cache ----------------------------------------------------------------------


class ChainCache:
    """Complexes stored as JSON under a content key; wrong format = miss."""

    def __init__(self, directory: str | None) -> None:
        self.directory = directory
        if directory:
            os.makedirs(directory, exist_ok=True)

    @staticmethod
    def key(payload: Any) -> str:
        text = json.dumps({"format": CACHE_FORMAT, "payload": payload}, sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()

    def _path(self, key: str) -> str:
        assert self.directory
        return os.path.join(self.directory, f"{key}.json")

    def get(self, key: str) -> ChainComplex | None:
        if not self.directory:
            return None
        try:
            with open(self._path(key), encoding="utf-8") as fp:
                data = json.load(fp)
        except (OSError, ValueError):
            return None
        if data.get("format") != CACHE_FORMAT:
            LOGGER.info(f"ignoring cache entry {key[:12]} with format {data.get('format')}")
            return None
        return ChainComplex.from_json(data)

    def put(self, key: str, C: ChainComplex) -> None:
        if not self.directory:
            return
        tmp = self._path(key) + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fp:
            json.dump(C.to_json(), fp, sort_keys=True, separators=(",", ":"))
        os.replace(tmp, self._path(key))

    def load_json(self, name: str) -> Any:
        if not self.directory:
            return None
        try:
            with open(os.path.join(self.directory, name), encoding="utf-8") as fp:
                return json.load(fp)
        except (OSError, ValueError):
            return None

    def save_json(self, name: str, payload: Any) -> None:
        if not self.directory:
            return
        path = os.path.join(self.directory, name)
        with open(path + ".tmp", "w", encoding="utf-8") as fp:
            json.dump(payload, fp, sort_keys=True, indent=1)
        os.replace(path + ".tmp", path)

