#!/usr/bin/env python3

# platkh - diagram algebra
# Copyright (C) 2024  Maurice (mausy5043) Hendrix
# AGPL-3.0-or-later  - see LICENSE

"""Cylindrical KLRW diagrams for the one-vertex quiver.

Red points sit at integer coordinates 1..2n on a line, the marked point φ at
0 (identified with 2n+1, the cylinder is cut there). Black points live in
*segments*: segment 0 is (0, 1), segment j is (j, j+1), so segment 2n and
segment 0 together form the circle arc through φ.

Diagrams are realised exactly by their action on polynomials: a diagram
with d black strands becomes an operator Σ p_w ∂_w on
ℤ[u^{±1}, ħ^{±1}][y_1..y_d][t^{±1}] built from

    dot on slot k           -> y_k
    black crossing k, k+1   -> ħ·∂_k
    black crosses red rightwards -> 1
    black crosses red leftwards  -> u·y_k
    φ crossing              -> t^{±1} and a cyclic shift of the slots

This action satisfies all the local relations (bigon = 0, red bigon = u·dot,
dot slide = ħ, red triple point = uħ) and the normal form of a diagram is
read off by peeling leading terms against the canonical basis diagrams.
Winding parts on several strands are solved for over the graded piece.
"""

import functools
import itertools
import logging
import math
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import NamedTuple

import constants
import liblinalg as la
import libpoly as lp
from libpoly import Poly2

LOGGER: logging.Logger = logging.getLogger(__name__)


class KlrwError(ValueError):
    """Base class for errors raised by the diagram algebra."""


class ObjectMismatchError(KlrwError):
    """Raised when composing diagrams whose objects do not agree."""


class NormalFormError(KlrwError):
    """Raised when a diagram cannot be expanded in the basis."""


class GradeVector(NamedTuple):
    J: int = 0
    u2: int = 0
    hbar: int = 0
    C: int = 0

    def __add__(self, other: tuple) -> "GradeVector":  # type: ignore[override]
        return GradeVector(*(a + b for a, b in zip(self, other, strict=True)))

    def __sub__(self, other: tuple) -> "GradeVector":
        return GradeVector(*(a - b for a, b in zip(self, other, strict=True)))

    def __neg__(self) -> "GradeVector":
        return GradeVector(*(-a for a in self))

    def times(self, k: int) -> "GradeVector":
        return GradeVector(*(k * a for a in self))


# fmt: off
ZERO_GRADE  = GradeVector(0, 0, 0, 0)
RB_GRADE    = GradeVector(*constants.GRADES["red_black"])
BB_GRADE    = GradeVector(*constants.GRADES["black_black"])
DOT_GRADE   = GradeVector(*constants.GRADES["dot"])
U_GRADE     = GradeVector(*constants.GRADES["u"])
HBAR_GRADE  = GradeVector(*constants.GRADES["hbar"])
# fmt: on


def monomial_grade(a: int, b: int) -> GradeVector:
    """Grade of u^a·ħ^b."""
    return U_GRADE.times(a) + HBAR_GRADE.times(b)


@dataclass(frozen=True, order=True)
class Layout:
    """Concrete placement of black points: ``counts[s]`` blacks in segment s."""

    n_pairs: int
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n_pairs < 1:
            raise KlrwError(f"need at least one pair of red points, got {self.n_pairs}")
        if len(self.counts) != 2 * self.n_pairs + 1:
            raise KlrwError(f"layout needs {2 * self.n_pairs + 1} segment counts: {self.counts}")
        if any(c < 0 for c in self.counts):
            raise KlrwError(f"negative black count in {self.counts}")

    @classmethod
    def cups(cls, n_pairs: int) -> "Layout":
        """One black between each pair of reds 2i-1, 2i: the cup object."""
        return cls(n_pairs, tuple(1 if s % 2 else 0 for s in range(2 * n_pairs + 1)))

    @classmethod
    def from_segments(cls, n_pairs: int, segments: Iterable[int]) -> "Layout":
        counts = [0] * (2 * n_pairs + 1)
        for s in segments:
            counts[s] += 1
        return cls(n_pairs, tuple(counts))

    @property
    def d(self) -> int:
        return sum(self.counts)

    @property
    def reds(self) -> int:
        return 2 * self.n_pairs

    def segment_of(self, slot: int) -> int:
        """Segment holding the black in 1-based ``slot``."""
        seen = 0
        for s, c in enumerate(self.counts):
            seen += c
            if slot <= seen:
                return s
        raise KlrwError(f"slot {slot} out of range for {self.counts}")

    def segments(self) -> tuple[int, ...]:
        """Segment of every black, left to right."""
        return tuple(s for s, c in enumerate(self.counts) for _ in range(c))

    def first_slot(self, segment: int) -> int:
        """0-based index of the leftmost black in ``segment``."""
        return sum(self.counts[:segment])

    def moved(self, source: int, target: int, k: int = 1) -> "Layout":
        counts = list(self.counts)
        counts[source] -= k
        counts[target] += k
        return Layout(self.n_pairs, tuple(counts))

    def __str__(self) -> str:
        parts = []
        for s, c in enumerate(self.counts):
            parts.append("o" * c or ".")
            if s < self.reds:
                parts.append("|")
        return " ".join(parts)


Event = tuple  # ("bb", k) | ("rb", red, direction) | ("dot", k) | ("phi", direction)


def _apply_event(counts: list[int], event: Event, n_pairs: int) -> int:
    """Advance ``counts`` past ``event``; return the 0-based slot it acts on."""
    kind = event[0]
    d = sum(counts)
    if kind == "dot":
        k = event[1]
        if not 1 <= k <= d:
            raise KlrwError(f"dot on absent strand {k}")
        return k - 1
    if kind == "bb":
        k = event[1]
        if not 1 <= k < d:
            raise KlrwError(f"crossing of absent strands {k}, {k + 1}")
        lay = Layout(n_pairs, tuple(counts))
        if lay.segment_of(k) != lay.segment_of(k + 1):
            raise KlrwError(f"strands {k}, {k + 1} are separated by a red point")
        return k - 1
    if kind == "rb":
        _, red, direction = event
        if not 1 <= red <= 2 * n_pairs:
            raise KlrwError(f"no red point {red}")
        if direction > 0:
            if counts[red - 1] == 0:
                raise KlrwError(f"no black left of red {red}")
            counts[red - 1] -= 1
            counts[red] += 1
            return sum(counts[:red])
        if counts[red] == 0:
            raise KlrwError(f"no black right of red {red}")
        slot = sum(counts[:red])
        counts[red] -= 1
        counts[red - 1] += 1
        return slot
    if kind == "phi":
        direction = event[1]
        if direction < 0:
            if counts[0] == 0:
                raise KlrwError("no black next to the marked point")
            counts[0] -= 1
            counts[-1] += 1
            return 0
        if counts[-1] == 0:
            raise KlrwError("no black next to the marked point")
        counts[-1] -= 1
        counts[0] += 1
        return d - 1
    raise KlrwError(f"unknown event {event!r}")


@dataclass(frozen=True)
class SliceWord:
    """A raw diagram: events applied bottom to top."""

    bottom: Layout
    top: Layout
    events: tuple[Event, ...] = ()

    def replay(self) -> Layout:
        counts = list(self.bottom.counts)
        for event in self.events:
            _apply_event(counts, event, self.bottom.n_pairs)
        return Layout(self.bottom.n_pairs, tuple(counts))

    def check(self) -> None:
        if self.bottom.n_pairs != self.top.n_pairs:
            raise KlrwError("bottom and top live on different red configurations")
        reached = self.replay()
        if reached != self.top:
            raise KlrwError(f"events lead to {reached.counts}, expected {self.top.counts}")

    def then(self, other: "SliceWord") -> "SliceWord":
        """Stack ``other`` on top of this word."""
        if self.top != other.bottom:
            raise ObjectMismatchError(f"{self.top.counts} != {other.bottom.counts}")
        return SliceWord(self.bottom, other.top, self.events + other.events)

    def grade(self) -> GradeVector:
        g = ZERO_GRADE
        for event in self.events:
            g = g + _event_grade(event)
        return g


def _event_grade(event: Event) -> GradeVector:
    kind = event[0]
    if kind == "rb":
        return RB_GRADE
    if kind == "bb":
        return BB_GRADE
    if kind == "dot":
        return DOT_GRADE
    return GradeVector(0, 0, 0, 1 if event[1] < 0 else -1)


@dataclass(frozen=True, order=True)
class NormalDiagram:
    """A basis diagram: canonical routing of a matching with windings, dots at the bottom.

    ``matching[i]`` is the top slot (0-based) reached by the strand starting in
    bottom slot i; ``windings[i]`` counts its net leftward passes of φ.
    """

    bottom: Layout
    top: Layout
    matching: tuple[int, ...]
    windings: tuple[int, ...]
    dots: tuple[int, ...]

    def __post_init__(self) -> None:
        d = self.bottom.d
        if self.top.d != d or sorted(self.matching) != list(range(d)):
            raise KlrwError(f"matching {self.matching} is not a bijection of {d} strands")
        if len(self.windings) != d or len(self.dots) != d or min(self.dots, default=0) < 0:
            raise KlrwError("windings and dots need one entry per strand")

    @classmethod
    def identity(cls, layout: Layout) -> "NormalDiagram":
        d = layout.d
        return cls(layout, layout, tuple(range(d)), (0,) * d, (0,) * d)

    @property
    def is_identity(self) -> bool:
        return (
            self.bottom == self.top
            and self.matching == tuple(range(self.bottom.d))
            and not any(self.windings)
            and not any(self.dots)
        )

    @property
    def planar(self) -> bool:
        return not any(self.windings)

    def events(self) -> tuple[Event, ...]:
        """Dots first, then the canonical routing."""
        dots = tuple(("dot", k + 1) for k, m in enumerate(self.dots) for _ in range(m))
        return dots + _route(self.bottom, self.top, self.matching, self.windings)

    def slice_word(self) -> SliceWord:
        return SliceWord(self.bottom, self.top, self.events())

    def to_json(self) -> list:
        return [list(self.matching), list(self.windings), list(self.dots)]


# canonical routing ----------------------------------------------------------


def _positions(layout: Layout) -> list[Fraction]:
    out: list[Fraction] = []
    for seg, c in enumerate(layout.counts):
        for j in range(c):
            out.append(Fraction(seg) + Fraction(j + 1, c + 1))
    return out


@functools.lru_cache(maxsize=None)
def _route(
    bottom: Layout, top: Layout, matching: tuple[int, ...], windings: tuple[int, ...]
) -> tuple[Event, ...]:
    """Straight-line routing in the universal cover, read off as slice events.

    Strand i runs from its bottom position to its top position shifted by
    ``windings[i]`` periods. It meets every translate of every other strand at
    most once; each meeting is one black crossing.
    """
    period = 2 * bottom.n_pairs + 1
    d = bottom.d
    xs = _positions(bottom)
    ys = _positions(top)
    # tiny generic shift of the endpoints so no three events coincide
    ends = [
        ys[matching[i]] + Fraction(i * i + i + 1, 10**9) - windings[i] * period for i in range(d)
    ]
    raw: list[tuple[Fraction, Fraction, int, tuple]] = []
    for i in range(d):
        x, y = xs[i], ends[i]
        lo, hi = (x, y) if x < y else (y, x)
        p = math.floor(lo) + 1
        while p < hi:
            tau = (p - x) / (y - x)
            raw.append((tau, Fraction(p % period), 0, ("cross", i, p)))
            p += 1
    for i, j in itertools.combinations(range(d), 2):
        vi, vj = ends[i] - xs[i], ends[j] - xs[j]
        if vi == vj:
            continue
        gap = xs[i] - xs[j]
        lo, hi = sorted((gap, gap + vi - vj))
        for k in range(math.floor(lo / period), math.ceil(hi / period) + 1):
            tau = (xs[j] + k * period - xs[i]) / (vi - vj)
            if 0 < tau < 1:
                raw.append((tau, (xs[i] + tau * vi) % period, 1, ("pair", i, j)))
    raw.sort(key=lambda item: (item[0], item[1], item[2]))

    order = list(range(d))
    events: list[Event] = []
    for _, _, _, info in raw:
        if info[0] == "cross":
            _, i, p = info
            direction = 1 if ends[i] > xs[i] else -1
            red = p % period
            if red == 0:
                order.remove(i)
                if direction < 0:
                    order.append(i)
                else:
                    order.insert(0, i)
                events.append(("phi", direction))
            else:
                events.append(("rb", red, direction))
        else:
            _, i, j = info
            a, b = order.index(i), order.index(j)
            if abs(a - b) != 1:
                raise NormalFormError(f"routing of {matching} crosses non-adjacent strands")
            k = min(a, b)
            order[k], order[k + 1] = order[k + 1], order[k]
            events.append(("bb", k + 1))
    return tuple(events)


# polynomial action ----------------------------------------------------------


def _operator(
    bottom: Layout, events: Iterable[Event], start: lp.YPoly | None = None
) -> lp.Operator:
    d = bottom.d
    counts = list(bottom.counts)
    op = lp.op_identity(d, start)
    for event in events:
        slot = _apply_event(counts, event, bottom.n_pairs)
        kind = event[0]
        if kind == "dot":
            op = lp.op_left_poly(op, {lp.unit_mono(d, slot): 1})
        elif kind == "bb":
            op = lp.op_left_divdiff(op, slot)
            op = lp.op_left_poly(op, {lp.unit_mono(d, h=1): 1})
        elif kind == "rb":
            if event[2] < 0:
                op = lp.op_left_poly(op, {lp.unit_mono(d, slot, u=1): 1})
        else:
            op = lp.op_left_poly(op, {lp.unit_mono(d, t=1 if event[1] < 0 else -1): 1})
            # the strand passing φ changes ends: cyclic relabelling of the slots
            swaps = range(d - 1) if event[1] < 0 else reversed(range(d - 1))
            for i in swaps:
                op = lp.op_left_swap(op, i)
    return op


@functools.lru_cache(maxsize=None)
def _basis_operator(diagram: NormalDiagram) -> lp.Operator:
    return _operator(diagram.bottom, diagram.events())


class _Lead(NamedTuple):
    matching: tuple[int, ...]
    windings: tuple[int, ...]
    perm: tuple[int, ...]
    mono: lp.Mono


def _lead_of(diagram: NormalDiagram) -> _Lead:
    op = _basis_operator(diagram)
    top_len = max(lp.perm_length(w) for w in op)
    perms = [w for w in op if lp.perm_length(w) == top_len]
    if len(perms) != 1 or len(op[perms[0]]) != 1:
        raise NormalFormError(f"basis diagram {diagram.matching} has no monomial leading term")
    ((mono, coeff),) = op[perms[0]].items()
    if coeff != 1:
        raise NormalFormError(f"basis diagram {diagram.matching} leads with {coeff}")
    return _Lead(diagram.matching, diagram.windings, perms[0], mono)


@functools.lru_cache(maxsize=None)
def _planar_leads(bottom: Layout, top: Layout) -> Mapping[tuple[int, ...], _Lead]:
    d = bottom.d
    table: dict[tuple[int, ...], _Lead] = {}
    for sigma in itertools.permutations(range(d)):
        lead = _lead_of(NormalDiagram(bottom, top, sigma, (0,) * d, (0,) * d))
        if lead.perm in table:
            raise NormalFormError(f"two basis diagrams lead with {lead.perm}")
        table[lead.perm] = lead
    return MappingProxyType(table)


def _lead_for(bottom: Layout, top: Layout, perm: tuple[int, ...], t: int) -> _Lead:
    if t == 0:
        try:
            return _planar_leads(bottom, top)[perm]
        except KeyError as her:
            raise NormalFormError(f"no basis diagram leads with {perm}") from her
    return _lead_of(NormalDiagram(bottom, top, (0,), (t,), (0,)))


def _split_winding(op: lp.Operator, d: int) -> tuple[lp.Operator, lp.Operator]:
    """Separate the t^0 part of ``op`` from the winding part."""
    planar: lp.Operator = {}
    winding: lp.Operator = {}
    for w, p in op.items():
        for mono, c in p.items():
            side = winding if mono[d + 2] else planar
            side.setdefault(w, {})[mono] = c
    return planar, winding


def _solve_winding(
    op: lp.Operator, bottom: Layout, top: Layout, grade: GradeVector
) -> dict["NormalDiagram", Poly2]:
    """Expand the winding part of an operator on several strands.

    Different windings can share a leading term here, so the coefficients come
    from one integer system over the basis of the graded piece instead.

    Raises:
        NormalFormError: the operator is not in the span of the basis.
    """
    d = bottom.d
    by_t: dict[int, lp.Operator] = {}
    for w, p in op.items():
        for mono, c in p.items():
            by_t.setdefault(mono[d + 2], {}).setdefault(w, {})[mono] = c
    result: dict[NormalDiagram, Poly2] = {}
    for t, part in sorted(by_t.items()):
        candidates = basis_in_degree(bottom, top, grade._replace(C=t), planar=False)
        rows: dict[tuple, int] = {}
        entries: dict[tuple[int, int], int] = {}
        for col, (diagram, (a, b)) in enumerate(candidates):
            shift = (0,) * d + (a, b, 0)
            for w, p in _basis_operator(diagram).items():
                for mono, c in p.items():
                    row = rows.setdefault((w, lp.mono_mul(mono, shift)), len(rows))
                    entries[(row, col)] = c
        rhs_keys = [(w, mono) for w, p in sorted(part.items()) for mono in sorted(p)]
        for key in rhs_keys:
            rows.setdefault(key, len(rows))
        rhs = [0] * len(rows)
        for w, mono in rhs_keys:
            rhs[rows[(w, mono)]] = part[w][mono]
        matrix = la.SparseIntMatrix.from_entries(len(rows), len(candidates), entries)
        x = la.solve_z(matrix, rhs)
        if x is None:
            raise NormalFormError(f"winding part with t^{t} is outside the basis span")
        for (diagram, (a, b)), c in zip(candidates, x, strict=True):
            if c:
                result[diagram] = result.get(diagram, Poly2()) + Poly2.monomial(a, b, c)
    return result


def _peel(op: lp.Operator, bottom: Layout, top: Layout, grade: GradeVector) -> "LinComb":
    d = bottom.d
    result: dict[NormalDiagram, Poly2] = {}
    if d > 1:
        op, winding = _split_winding(op, d)
        if winding:
            result = _solve_winding(winding, bottom, top, grade)
    guard = 0
    while op:
        guard += 1
        if guard > 100_000:
            raise NormalFormError("normal form expansion does not terminate")
        perm = max(op, key=lambda w: (lp.perm_length(w), w))
        for mono, coeff in sorted(op[perm].items()):
            t = mono[d + 2]
            lead = _lead_for(bottom, top, perm, t)
            rest = lp.mono_mul(mono, tuple(-e for e in lead.mono))
            if min(rest[:d]) < 0:
                raise NormalFormError(f"{mono} is not divisible by the leading term {lead.mono}")
            # dots live at the bottom: the leading term carries w(y^dots)
            dots = tuple(rest[perm[j]] for j in range(d))
            diagram = NormalDiagram(bottom, top, lead.matching, lead.windings, dots)
            scalar = Poly2.monomial(rest[d], rest[d + 1], coeff)
            result[diagram] = result.get(diagram, Poly2()) + scalar
            shift = (0,) * d + (rest[d], rest[d + 1], 0)
            basis = {
                w: lp.ypoly_mul_mono(p, shift, coeff) for w, p in _basis_operator(diagram).items()
            }
            op = lp.op_add(op, basis, -1)
    return LinComb(bottom, top, result)


# linear combinations --------------------------------------------------------


class LinComb:
    """Finite ℤ[u^{±1}, ħ^{±1}]-combination of basis diagrams with common bottom and top."""

    __slots__ = ("bottom", "top", "_terms")

    def __init__(
        self,
        bottom: Layout,
        top: Layout,
        terms: Mapping[NormalDiagram, Poly2 | int] | None = None,
    ) -> None:
        self.bottom = bottom
        self.top = top
        clean: dict[NormalDiagram, Poly2] = {}
        for diagram, coeff in (terms or {}).items():
            if diagram.bottom != bottom or diagram.top != top:
                raise ObjectMismatchError(
                    f"diagram {diagram.bottom.counts}->{diagram.top.counts} "
                    f"in a combination {bottom.counts}->{top.counts}"
                )
            poly = coeff if isinstance(coeff, Poly2) else Poly2.const(coeff)
            if poly:
                clean[diagram] = poly
        self._terms = MappingProxyType(clean)

    @classmethod
    def zero(cls, bottom: Layout, top: Layout) -> "LinComb":
        return cls(bottom, top)

    @classmethod
    def basis(cls, diagram: NormalDiagram, coeff: Poly2 | int = 1) -> "LinComb":
        return cls(diagram.bottom, diagram.top, {diagram: coeff})

    @property
    def terms(self) -> Mapping[NormalDiagram, Poly2]:
        return self._terms

    def items(self) -> Iterator[tuple[NormalDiagram, Poly2]]:
        return iter(sorted(self._terms.items()))

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LinComb):
            return NotImplemented
        return (
            self.bottom == other.bottom
            and self.top == other.top
            and dict(self._terms) == dict(other._terms)
        )

    def __hash__(self) -> int:
        return hash((self.bottom, self.top, frozenset(self._terms.items())))

    def _check_same(self, other: "LinComb") -> None:
        if self.bottom != other.bottom or self.top != other.top:
            raise ObjectMismatchError(
                f"cannot add {self.bottom.counts}->{self.top.counts} "
                f"and {other.bottom.counts}->{other.top.counts}"
            )

    def __add__(self, other: "LinComb") -> "LinComb":
        self._check_same(other)
        out = dict(self._terms)
        for diagram, coeff in other._terms.items():
            out[diagram] = out.get(diagram, Poly2()) + coeff
        return LinComb(self.bottom, self.top, out)

    def __neg__(self) -> "LinComb":
        return LinComb(self.bottom, self.top, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other: "LinComb") -> "LinComb":
        return self + (-other)

    def scale(self, coeff: Poly2 | int) -> "LinComb":
        if isinstance(coeff, int):
            coeff = Poly2.const(coeff)
        return LinComb(self.bottom, self.top, {k: c * coeff for k, c in self._terms.items()})

    def coefficient(self, diagram: NormalDiagram) -> Poly2:
        return self._terms.get(diagram, Poly2())

    def identity_coefficient(self) -> Poly2:
        if self.bottom != self.top:
            return Poly2()
        return self.coefficient(NormalDiagram.identity(self.bottom))

    def is_unit(self) -> int:
        """Return ±1 when this is ±identity with a constant coefficient, else 0."""
        if self.bottom != self.top or len(self._terms) != 1:
            return 0
        coeff = self.identity_coefficient()
        if coeff == 1:
            return 1
        if coeff == -1:
            return -1
        return 0

    def grades(self) -> set[GradeVector]:
        out = set()
        for diagram, coeff in self._terms.items():
            base = grade_of(diagram)
            for (a, b), _ in coeff:
                out.add(base + monomial_grade(a, b))
        return out

    def coordinates(self) -> dict[tuple[NormalDiagram, tuple[int, int]], int]:
        """Integer coordinates in the ℤ-basis diagram × monomial."""
        return {
            (diagram, mono): c for diagram, coeff in self._terms.items() for mono, c in coeff
        }

    def to_json(self) -> list:
        return [[diagram.to_json(), coeff.to_json()] for diagram, coeff in self.items()]

    @classmethod
    def from_json(cls, bottom: Layout, top: Layout, data: list) -> "LinComb":
        terms = {}
        for (matching, windings, dots), coeff in data:
            diagram = NormalDiagram(bottom, top, tuple(matching), tuple(windings), tuple(dots))
            terms[diagram] = Poly2.from_json(coeff)
        return cls(bottom, top, terms)

    def __repr__(self) -> str:
        if not self._terms:
            return f"0[{self.bottom}->{self.top}]"
        parts = [f"({coeff!r})*D{diagram.to_json()}" for diagram, coeff in self.items()]
        return f"[{self.bottom} -> {self.top}] " + " + ".join(parts)


# operations -----------------------------------------------------------------


def normalize(raw: SliceWord, strategy: str = "sequential") -> LinComb:
    """Expand a raw diagram in the basis.

    Args:
        raw: the slice word to reduce.
        strategy: ``"sequential"`` acts with the events bottom to top;
            ``"split"`` normalises the two halves separately and composes the
            results, which rewrites in a different order.

    Raises:
        KlrwError: the word does not replay or references absent strands.
        NormalFormError: the word leaves the supported cylindrical range.
    """
    raw.check()
    if strategy == "split" and len(raw.events) > 1:
        half = len(raw.events) // 2
        counts = list(raw.bottom.counts)
        for event in raw.events[:half]:
            _apply_event(counts, event, raw.bottom.n_pairs)
        middle = Layout(raw.bottom.n_pairs, tuple(counts))
        lower = normalize(SliceWord(raw.bottom, middle, raw.events[:half]), strategy)
        upper = normalize(SliceWord(middle, raw.top, raw.events[half:]), strategy)
        return compose(upper, lower)
    return _peel(_operator(raw.bottom, raw.events), raw.bottom, raw.top, raw.grade())


@functools.lru_cache(maxsize=1 << 16)
def _compose_basis(upper: NormalDiagram, lower: NormalDiagram) -> LinComb:
    word = SliceWord(lower.bottom, upper.top, lower.events() + upper.events())
    return _peel(_operator(word.bottom, word.events), word.bottom, word.top, word.grade())


def compose(g: LinComb, f: LinComb) -> LinComb:
    """Stack ``g`` on top of ``f`` (apply f first) and normalise.

    Raises:
        ObjectMismatchError: when top(f) differs from bottom(g).
    """
    if f.top != g.bottom:
        raise ObjectMismatchError(f"cannot stack {g.bottom.counts} on {f.top.counts}")
    out: dict[NormalDiagram, Poly2] = {}
    for dg, cg in g.terms.items():
        for df, cf in f.terms.items():
            coeff = cg * cf
            if dg.is_identity:
                out[df] = out.get(df, Poly2()) + coeff
                continue
            if df.is_identity:
                out[dg] = out.get(dg, Poly2()) + coeff
                continue
            for diagram, c in _compose_basis(dg, df).terms.items():
                out[diagram] = out.get(diagram, Poly2()) + c * coeff
    return LinComb(f.bottom, g.top, out)


def realize(value: LinComb) -> lp.Operator:
    """The operator by which ``value`` acts on the polynomial representation."""
    d = value.bottom.d
    out: lp.Operator = {}
    for diagram, coeff in value.items():
        poly = {lp.unit_mono(d, u=a, h=b): c for (a, b), c in coeff}
        out = lp.op_add(out, lp.op_left_poly(_basis_operator(diagram), poly))
    return out


def word_operator(raw: SliceWord) -> lp.Operator:
    raw.check()
    return _operator(raw.bottom, raw.events)


@functools.lru_cache(maxsize=None)
def grade_of(diagram: NormalDiagram) -> GradeVector:
    """Sum of generator degrees over the canonical presentation."""
    return diagram.slice_word().grade()


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first, *rest)


def _winding_vectors(total: int, d: int) -> Iterator[tuple[int, ...]]:
    """Windings of one sign per strand adding up to ``total``."""
    sign = 1 if total >= 0 else -1
    for parts in _compositions(abs(total), d):
        yield tuple(sign * p for p in parts)


@functools.lru_cache(maxsize=1 << 14)
def basis_in_degree(
    bottom: Layout, top: Layout, g: GradeVector, planar: bool = True
) -> tuple[tuple[NormalDiagram, tuple[int, int]], ...]:
    """All basis elements ``diagram × u^a ħ^b`` from ``bottom`` to ``top`` of grade ``g``.

    The exponents a, b may be negative: the dots fix J, then u and ħ make up
    the rest. Planar enumeration uses windings zero. With ``planar=False`` the
    strands wind, all in the direction of the C-grade and adding up to it.
    """
    d = bottom.d
    if top.d != d or bottom.n_pairs != top.n_pairs:
        return ()
    winding_options = [(0,) * d] if planar else list(_winding_vectors(g.C, d))
    found: list[tuple[NormalDiagram, tuple[int, int]]] = []
    for windings in winding_options:
        for sigma in itertools.permutations(range(d)):
            base = NormalDiagram(bottom, top, sigma, windings, (0,) * d)
            delta = g - grade_of(base)
            if delta.C or delta.J % 2 or delta.J < 0:
                continue
            m = delta.J // 2
            if (delta.u2 - 2 * m) % 2:
                continue
            b = (delta.u2 - 2 * m) // 2
            a = delta.hbar + m
            for dots in _compositions(m, d):
                found.append((NormalDiagram(bottom, top, sigma, windings, dots), (a, b)))
    return tuple(sorted(found))


# generators -------------------------------------------------------------------


def identity(layout: Layout) -> LinComb:
    return LinComb.basis(NormalDiagram.identity(layout))


def from_events(bottom: Layout, events: Iterable[Event]) -> LinComb:
    events = tuple(events)
    counts = list(bottom.counts)
    for event in events:
        _apply_event(counts, event, bottom.n_pairs)
    return normalize(SliceWord(bottom, Layout(bottom.n_pairs, tuple(counts)), events))


def dot(layout: Layout, k: int) -> LinComb:
    return from_events(layout, [("dot", k)])


def red_cross(layout: Layout, red: int, direction: int) -> LinComb:
    """The adjacent black crosses red ``red`` (1-based) to the right (+1) or left (-1)."""
    return from_events(layout, [("rb", red, direction)])


def full_wind(layout: Layout, winding: int = 1, slot: int = 0) -> LinComb:
    """The strand in 0-based ``slot`` winds around the cylinder, the others stay put.

    Positive ``winding`` winds leftwards; the C-grade of the result is ``winding``.
    """
    if not 0 <= slot < layout.d:
        raise KlrwError(f"no black strand in slot {slot} of {layout.counts}")
    windings = tuple(winding if i == slot else 0 for i in range(layout.d))
    return LinComb.basis(
        NormalDiagram(layout, layout, tuple(range(layout.d)), windings, (0,) * layout.d)
    )


def diagram(
    bottom: Layout,
    top: Layout,
    matching: Iterable[int],
    dots: Iterable[int] | None = None,
    coeff: Poly2 | int = 1,
) -> LinComb:
    """Planar basis element with the given matching and bottom dots."""
    d = bottom.d
    dots_t = tuple(dots) if dots is not None else (0,) * d
    return LinComb.basis(NormalDiagram(bottom, top, tuple(matching), (0,) * d, dots_t), coeff)


def moving_strand(bottom: Layout, top: Layout, source_slot: int, target_slot: int) -> LinComb:
    """Basis diagram moving one strand (0-based slots), all others keeping their order."""
    d = bottom.d
    others_src = [i for i in range(d) if i != source_slot]
    others_tgt = [j for j in range(d) if j != target_slot]
    matching = [0] * d
    matching[source_slot] = target_slot
    for i, j in zip(others_src, others_tgt, strict=True):
        matching[i] = j
    return diagram(bottom, top, matching)


# debugging ----------------------------------------------------------------------


def render(item: SliceWord | NormalDiagram) -> str:
    """ASCII picture of a diagram, bottom line last."""
    word = item.slice_word() if isinstance(item, NormalDiagram) else item
    counts = list(word.bottom.counts)
    n_pairs = word.bottom.n_pairs
    lines = [f"{Layout(n_pairs, tuple(counts))}    (bottom)"]
    for event in word.events:
        _apply_event(counts, event, n_pairs)
        label = " ".join(str(x) for x in event)
        lines.append(f"{Layout(n_pairs, tuple(counts))}    {label}")
    return "\n".join(reversed(lines))
