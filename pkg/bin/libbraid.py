#!/usr/bin/env python3

# platkh - braid functor
# Copyright (C) 2024  Maurice (mausy5043) Hendrix
# AGPL-3.0-or-later  - see LICENSE

"""Half twists of adjacent red points acting on complexes of projectives.

A complex is braided term by term. Terms with two or more blacks between the
twisted reds are first replaced by their Λ resolution. Every term is then
replaced by its braided block, which comes with its natural map to the term
(positive twist) or from it (negative twist). Each differential entry is
lifted to a chain map between blocks that commutes with these anchors, and
homotopies between blocks two degrees apart close up the total complex.
"""

import logging
import time
from collections.abc import Callable, Hashable, Iterable, Mapping
from dataclasses import dataclass
from typing import Any, NamedTuple

import libcomplex as lc
import libklrw as kl
from libcomplex import ChainComplex, ChainMap, HomSystem, HomTerm, Term
from libklrw import BB_GRADE, RB_GRADE, ZERO_GRADE, GradeVector, Layout, LinComb

LOGGER: logging.Logger = logging.getLogger(__name__)


class LiftError(ValueError):
    """A morphism could not be transported: the linear system has no solution."""


class LiftAmbiguityError(LiftError):
    """The transported morphism is not unique in the required degree."""


# braid words -------------------------------------------------------------------


class HalfTwist(NamedTuple):
    """Half twist of the red points ``index`` and ``index + 1``."""

    index: int
    sign: int = 1

    @property
    def token(self) -> str:
        return f"s{self.index}" if self.sign > 0 else f"S{self.index}"

    def inverse(self) -> "HalfTwist":
        return HalfTwist(self.index, -self.sign)


@dataclass(frozen=True)
class BraidWord:
    n_pairs: int
    twists: tuple[HalfTwist, ...] = ()

    def __post_init__(self) -> None:
        if self.n_pairs < 1:
            raise ValueError(f"a plat needs at least one pair of strands, got {self.n_pairs}")
        for pos, twist in enumerate(self.twists):
            if twist.sign not in (1, -1):
                raise ValueError(f"twist {pos} has sign {twist.sign}")
            if not 1 <= twist.index <= self.max_index:
                raise ValueError(
                    f"twist {pos} uses index {twist.index}, valid range is 1..{self.max_index}"
                )

    @property
    def strands(self) -> int:
        return 2 * self.n_pairs

    @property
    def max_index(self) -> int:
        return 2 * self.n_pairs - 1

    def __len__(self) -> int:
        return len(self.twists)

    def __iter__(self):
        return iter(self.twists)

    def inverse(self) -> "BraidWord":
        return BraidWord(self.n_pairs, tuple(t.inverse() for t in reversed(self.twists)))

    def mirror(self) -> "BraidWord":
        return BraidWord(self.n_pairs, tuple(t.inverse() for t in self.twists))

    def writhe(self) -> int:
        return sum(t.sign for t in self.twists)

    def text(self) -> str:
        return " ".join(t.token for t in self.twists)


# reflection ----------------------------------------------------------------------


def reflect_layout(layout: Layout) -> Layout:
    return Layout(layout.n_pairs, layout.counts[::-1])


def reflect_lincomb(value: LinComb) -> LinComb:
    """Left-right mirror image turned upside down: a map ``top' -> bottom'``."""
    bottom = reflect_layout(value.top)
    top = reflect_layout(value.bottom)
    reds = value.bottom.reds
    d = value.bottom.d
    out = LinComb.zero(bottom, top)
    for diagram, coeff in value.items():
        events = []
        crossings = 0
        for event in reversed(diagram.events()):
            kind = event[0]
            if kind == "dot":
                events.append(("dot", d + 1 - event[1]))
            elif kind == "bb":
                events.append(("bb", d - event[1]))
                crossings += 1
            elif kind == "rb":
                events.append(("rb", reds + 1 - event[1], event[2]))
            else:
                raise kl.NormalFormError("cannot reflect a diagram passing the marked point")
        word = kl.SliceWord(bottom, top, tuple(events))
        out = out + kl.normalize(word).scale(coeff).scale(-1 if crossings % 2 else 1)
    return out


def reflect_complex(C: ChainComplex) -> ChainComplex:
    """Mirror a complex: reflected objects, negated shifts and degrees, reversed arrows."""
    terms = [Term(reflect_layout(t.obj), -t.shift, -t.hdeg) for t in C.terms]
    entries = {(t, s): reflect_lincomb(value) for (s, t), value in C.entries.items()}
    return ChainComplex(C.n_pairs, terms, entries)


# local templates -----------------------------------------------------------------


def _check_pair(layout: Layout, pair: int) -> None:
    if not 1 <= pair < layout.reds:
        raise ValueError(f"pair {pair} is not an adjacent red pair among {layout.reds} reds")


def _solve_single(
    bottom: Layout, top: Layout, grade: GradeVector, terms: Iterable[HomTerm], constant: LinComb
) -> LinComb:
    system = HomSystem()
    system.add_unknown("x", bottom, top, grade)
    system.add_equation("eq", terms, constant)
    solution = system.solve()
    if solution is None:
        raise LiftError(f"no morphism {bottom} -> {top} of grade {tuple(grade)} fits")
    return solution["x"]


def lambda_complex(layout: Layout, pair: int) -> tuple[ChainComplex, dict[int, LinComb]]:
    """Λₖ for the k blacks between the reds of ``pair`` and its augmentation.

    Terms, in order: A_1..A_k (all k blacks right of the pair, hdeg -1),
    B_1..B_k (one black left behind, hdeg 0), T (all right, hdeg 0). The
    augmentation maps the hdeg 0 terms onto ``layout{k·RB}``.
    """
    _check_pair(layout, pair)
    k = layout.counts[pair]
    if k == 0:
        return ChainComplex.single(Term(layout)), {0: kl.identity(layout)}
    a = layout.first_slot(pair)
    plus = layout.moved(pair, pair + 1, k)
    mixed = layout.moved(pair, pair + 1, k - 1)
    a21 = kl.red_cross(plus, pair + 1, -1)
    aug_t = kl.moving_strand(plus, layout, a, a)
    terms = [Term(plus, -BB_GRADE.times(c), -1) for c in range(k)]
    terms += [Term(mixed, RB_GRADE - BB_GRADE.times(c), 0) for c in range(k)]
    terms.append(Term(plus, ZERO_GRADE, 0))
    top = 2 * k
    entries: dict[tuple[int, int], LinComb] = {}
    aug: dict[int, LinComb] = {top: aug_t}
    for c in range(k):
        aug_b = kl.moving_strand(mixed, layout, a, a + c)
        aug[k + c] = aug_b
        entries[(c, k + c)] = -a21
        entries[(c, top)] = _solve_single(
            plus,
            plus,
            BB_GRADE.times(c),
            [HomTerm("x", after=aug_t)],
            -kl.compose(aug_b, a21),
        )
    return ChainComplex(layout.n_pairs, terms, entries), aug


def lambda_prime_complex(layout: Layout, pair: int) -> ChainComplex:
    """Λ′ₖ: the braided Λₖ, each υ₊ replaced by υ₋{-1} and each dᵢ by d′ᵢ."""
    _check_pair(layout, pair)
    k = layout.counts[pair]
    if k == 0:
        return ChainComplex.single(Term(layout))
    a = layout.first_slot(pair)
    plus = layout.moved(pair, pair + 1, k)
    mixed = layout.moved(pair, pair + 1, k - 1)
    left = mixed.moved(pair, pair - 1, 1)
    copy = -kl.red_cross(mixed, pair, -1)
    terms = [Term(mixed, -(RB_GRADE + BB_GRADE.times(c)), -1) for c in range(k)]
    terms += [Term(left, -BB_GRADE.times(c), 0) for c in range(k)]
    terms.append(Term(plus, ZERO_GRADE, 0))
    entries: dict[tuple[int, int], LinComb] = {}
    for c in range(k):
        entries[(c, k + c)] = copy
        entries[(c, 2 * k)] = kl.moving_strand(mixed, plus, a, a + c)
    return ChainComplex(layout.n_pairs, terms, entries)


def upsilon_plus(layout: Layout, pair: int) -> ChainComplex:
    """υ₊ = θ₊{-1} -> θ: the single black of ``pair`` comes back over the right red."""
    _check_pair(layout, pair)
    plus = layout.moved(pair, pair + 1)
    terms = [Term(plus, -RB_GRADE, 0), Term(layout, ZERO_GRADE, 1)]
    return ChainComplex(layout.n_pairs, terms, {(0, 1): kl.red_cross(plus, pair + 1, -1)})


def braid_object_local(layout: Layout, pair: int, sign: int = 1) -> ChainComplex:
    """Image of ``P_layout`` under the half twist of ``pair``.

    No blacks between the reds: the object itself. Otherwise Λ′ₖ shifted by
    -k·RB; for k = 1 this is θ{-2} -> θ₋{-1} ⊕ θ₊{-1}. The negative twist is
    the mirror image of the positive one.
    """
    _check_pair(layout, pair)
    k = layout.counts[pair]
    if k == 0:
        return ChainComplex.single(Term(layout))
    if sign > 0:
        return lc.shift(lambda_prime_complex(layout, pair), 0, -RB_GRADE.times(k))
    mirrored = braid_object_local(reflect_layout(layout), layout.reds - pair, 1)
    return reflect_complex(mirrored)


def braid_template(k: int, sign: int = 1) -> ChainComplex:
    """braid_object_local for k blacks between the two reds of a single pair."""
    if k < 0:
        raise ValueError(f"negative black count {k}")
    return braid_object_local(Layout(1, (0, k, 0)), 1, sign)


# lifting ---------------------------------------------------------------------------


Constraint = tuple[Hashable, list[HomTerm], LinComb | None]


def lift_morphism(
    source: ChainComplex,
    target: ChainComplex,
    grade: GradeVector = ZERO_GRADE,
    pinned: Mapping[tuple[int, int], LinComb] | None = None,
    constraints: Iterable[Constraint] | None = None,
) -> ChainMap:
    """Chain map ``source -> target`` of internal degree ``grade``.

    Components listed in ``pinned`` are fixed; ``constraints`` are extra linear
    equations ``Σ terms + constant = 0`` on the unknown components (keys are
    ``(source index, target index)``). With pins or constraints the solution
    with free coordinates zero is returned. Without either, the chain map must
    be unique up to sign; its first nonzero coefficient is made positive.

    Raises:
        LiftError: no chain map satisfies the conditions.
        LiftAmbiguityError: unconstrained and the solutions have rank >= 2.
    """
    fixed = dict(pinned or {})
    constraints = list(constraints or [])
    system = HomSystem()
    unknown: set[tuple[int, int]] = set()
    for i, s in enumerate(source.terms):
        for j, t in enumerate(target.terms):
            if s.hdeg != t.hdeg or (i, j) in fixed:
                continue
            system.add_unknown((i, j), s.obj, t.obj, t.shift - s.shift + grade)
            unknown.add((i, j))
    succ_s = source.successors()
    pred_t = target.predecessors()
    for i, s in enumerate(source.terms):
        for k, t in enumerate(target.terms):
            if t.hdeg != s.hdeg + 1:
                continue
            terms: list[HomTerm] = []
            constant = LinComb.zero(s.obj, t.obj)
            for j in pred_t.get(k, []):
                if (i, j) in unknown:
                    terms.append(HomTerm((i, j), after=target.entries[(j, k)]))
                elif (i, j) in fixed:
                    constant = constant + kl.compose(target.entries[(j, k)], fixed[(i, j)])
            for m in succ_s.get(i, []):
                if (m, k) in unknown:
                    terms.append(HomTerm((m, k), before=source.entries[(i, m)], sign=-1))
                elif (m, k) in fixed:
                    constant = constant - kl.compose(fixed[(m, k)], source.entries[(i, m)])
            if terms or constant:
                system.add_equation(("chain", i, k), terms, constant)
    for label, terms, constant in constraints:
        system.add_equation(("extra", label), terms, constant)
    if fixed or constraints:
        solution = system.solve()
        if solution is None:
            raise LiftError(
                f"no chain map of grade {tuple(grade)} between complexes of"
                f" {len(source.terms)} and {len(target.terms)} terms meets the constraints"
            )
        comps = dict(fixed)
        comps.update({pair: value for pair, value in solution.items() if value})
    else:
        kernel = system.kernel()
        if not kernel:
            raise LiftError(f"no nonzero chain map of grade {tuple(grade)}")
        if len(kernel) > 1:
            raise LiftAmbiguityError(
                f"chain maps of grade {tuple(grade)} form a rank {len(kernel)} lattice"
            )
        comps = {pair: value for pair, value in kernel[0].items() if value}
        if _leading_sign(comps) < 0:
            comps = {pair: -value for pair, value in comps.items()}
    result = ChainMap(source, target, comps, grade)
    result.check()
    return result


def _leading_sign(comps: Mapping[tuple[int, int], LinComb]) -> int:
    for pair in sorted(comps):
        for _, coeff in comps[pair].items():
            for _, c in coeff:
                return 1 if c > 0 else -1
    return 1




# twisting a complex -----------------------------------------------------------


class _Block(NamedTuple):
    """A resolved or braided term with its anchor to the original object.

    ``outgoing`` anchors map the hdeg 0 block terms onto the original term
    (augmentations, the positive twist); incoming ones map the original term
    into them (the negative twist). Keys are block term indices.
    """

    chain: ChainComplex
    anchor: dict[int, LinComb]
    outgoing: bool = True


def _single_block(term: Term, outgoing: bool = True) -> _Block:
    return _Block(
        ChainComplex.single(Term(term.obj, term.shift, 0)), {0: kl.identity(term.obj)}, outgoing
    )


def _anchored_lift(f: LinComb, source: _Block, target: _Block) -> ChainMap:
    """Lift ``f`` to a chain map between the blocks that commutes with the anchors."""
    S, T = source.chain, target.chain
    if len(S.terms) == 1 and len(T.terms) == 1:
        return ChainMap(S, T, {(0, 0): f})
    constraints: list[Constraint] = []
    if source.outgoing:
        for a, eps_s in sorted(source.anchor.items()):
            terms = [HomTerm((a, b), after=eps_t) for b, eps_t in sorted(target.anchor.items())]
            constraints.append((("anchor", a), terms, -kl.compose(f, eps_s)))
    else:
        for b, eta_t in sorted(target.anchor.items()):
            terms = [HomTerm((a, b), before=eta_s) for a, eta_s in sorted(source.anchor.items())]
            constraints.append((("anchor", b), terms, -kl.compose(eta_t, f)))
    return lift_morphism(S, T, constraints=constraints)


Homotopy = dict[tuple[int, int], LinComb]


def _homotopies(
    C: ChainComplex, blocks: list[ChainComplex], maps: Mapping[tuple[int, int], ChainMap]
) -> dict[tuple[int, int], Homotopy]:
    """Components between blocks two degrees apart that make the total d² vanish.

    The lifted maps compose to zero only up to homotopy. For terms i, k of C
    with a path i -> j -> k the unknown H_ik lowers the block degree by one and
    solves ``d_k H + H d_i = -(-1)^{hdeg i} Σ_j F_jk F_ij``; the three-step
    components ``Σ F H + H F`` must vanish as well.

    Raises:
        LiftError: the system has no solution.
    """
    succ = C.successors()
    pred = C.predecessors()
    paths: dict[tuple[int, int], list[int]] = {}
    for i in range(len(C.terms)):
        for j in succ.get(i, []):
            for k in succ.get(j, []):
                paths.setdefault((i, k), []).append(j)
    if not paths:
        return {}
    system = HomSystem()
    for (i, k) in sorted(paths):
        for a, sa in enumerate(blocks[i].terms):
            for b, sb in enumerate(blocks[k].terms):
                if sb.hdeg == sa.hdeg - 1:
                    system.add_unknown((i, k, a, b), sa.obj, sb.obj, sb.shift - sa.shift)
    if not system.unknown_count:
        LOGGER.debug(f"{len(paths)} two-step paths, no room for a homotopy")
    for (i, k), middles in sorted(paths.items()):
        sign = -1 if C.terms[i].hdeg % 2 else 1
        Bi, Bk = blocks[i], blocks[k]
        for a, sa in enumerate(Bi.terms):
            for c, sc in enumerate(Bk.terms):
                if sc.hdeg != sa.hdeg:
                    continue
                terms = [
                    HomTerm((i, k, a, b), after=value)
                    for (b, c2), value in sorted(Bk.entries.items())
                    if c2 == c
                ]
                terms += [
                    HomTerm((i, k, m, c), before=value)
                    for (a2, m), value in sorted(Bi.entries.items())
                    if a2 == a
                ]
                constant = LinComb.zero(sa.obj, sc.obj)
                for j in middles:
                    first, second = maps[(i, j)].comps, maps[(j, k)].comps
                    for (a2, x), f1 in first.items():
                        if a2 != a:
                            continue
                        f2 = second.get((x, c))
                        if f2 is not None:
                            constant = constant + kl.compose(f2, f1)
                if terms or constant:
                    system.add_equation(("square", i, k, a, c), terms, constant.scale(sign))
    cubes = sorted({(i, end) for (i, k) in paths for end in succ.get(k, [])})
    for i, end in cubes:
        for a, sa in enumerate(blocks[i].terms):
            for c, sc in enumerate(blocks[end].terms):
                if sc.hdeg != sa.hdeg - 1:
                    continue
                terms: list[HomTerm] = []
                for k in pred.get(end, []):
                    if (i, k) in paths:
                        terms += [
                            HomTerm((i, k, a, b), after=value)
                            for (b, c2), value in sorted(maps[(k, end)].comps.items())
                            if c2 == c and blocks[k].terms[b].hdeg == sa.hdeg - 1
                        ]
                for j in succ.get(i, []):
                    if (j, end) in paths:
                        terms += [
                            HomTerm((j, end, m, c), before=value)
                            for (a2, m), value in sorted(maps[(i, j)].comps.items())
                            if a2 == a
                        ]
                if terms:
                    system.add_equation(("cube", i, end, a, c), terms)
    solution = system.solve()
    if solution is None:
        raise LiftError(f"no homotopy closes the {len(paths)} two-step paths")
    out: dict[tuple[int, int], Homotopy] = {}
    for (i, k, a, b), value in solution.items():
        if value:
            out.setdefault((i, k), {})[(a, b)] = value
    LOGGER.debug(f"homotopy on {len(out)} of {len(paths)} two-step paths")
    return out


def _totalize(
    C: ChainComplex,
    blocks: list[ChainComplex],
    maps: Mapping[tuple[int, int], ChainMap],
    homotopies: Mapping[tuple[int, int], Homotopy] | None = None,
) -> ChainComplex:
    """Total complex of blocks placed on the terms of C, joined by maps and homotopies."""
    offsets = []
    terms: list[Term] = []
    for term, block in zip(C.terms, blocks, strict=True):
        offsets.append(len(terms))
        terms += [Term(bt.obj, bt.shift, bt.hdeg + term.hdeg) for bt in block.terms]
    entries: dict[tuple[int, int], LinComb] = {}
    for idx, (term, block) in enumerate(zip(C.terms, blocks, strict=True)):
        sign = -1 if term.hdeg % 2 else 1
        for (a, b), value in block.entries.items():
            entries[(offsets[idx] + a, offsets[idx] + b)] = value.scale(sign)
    links = [(pair, m.comps) for pair, m in maps.items()]
    links += list((homotopies or {}).items())
    for (s, t), comps in links:
        for (i, j), value in comps.items():
            key = (offsets[s] + i, offsets[t] + j)
            entries[key] = entries[key] + value if key in entries else value
    return ChainComplex(C.n_pairs, terms, entries)


def _assemble(C: ChainComplex, blocks: list[_Block]) -> ChainComplex:
    maps = {
        (s, t): _anchored_lift(f, blocks[s], blocks[t]) for (s, t), f in sorted(C.entries.items())
    }
    chains = [b.chain for b in blocks]
    total = _totalize(C, chains, maps, _homotopies(C, chains, maps))
    lc.validate(total)
    return lc.simplify(total)


def lambda_resolve(C: ChainComplex, pair: int) -> ChainComplex:
    """Replace every term with k >= 2 blacks between the reds of ``pair`` by Λₖ.

    Differentials are lifted through the augmentations and the total complex is
    closed up with homotopies, validated and simplified.
    """
    counts = [t.obj.counts[pair] for t in C.terms]
    if all(k <= 1 for k in counts):
        return C
    blocks: list[_Block] = []
    for term, k in zip(C.terms, counts, strict=True):
        if k <= 1:
            blocks.append(_single_block(term))
            continue
        template, aug = lambda_complex(term.obj, pair)
        blocks.append(_Block(lc.shift(template, 0, term.shift - RB_GRADE.times(k)), aug))
    return _assemble(C, blocks)


def _twist_block(term: Term, pair: int, sign: int) -> _Block:
    """Braided image of one term with its natural map to (sign +) or from (sign -) it."""
    k = term.obj.counts[pair]
    if k == 0:
        return _single_block(term, sign > 0)
    if k > 1:
        raise LiftError(f"term {term.label()} has {k} blacks at pair {pair}; resolve first")
    chain = lc.shift(braid_object_local(term.obj, pair, sign), 0, term.shift)
    layouts = [t.obj for t in chain.terms]
    plus = term.obj.moved(pair, pair + 1)
    minus = term.obj.moved(pair, pair - 1)
    if sign > 0:
        anchor = {
            layouts.index(plus): kl.red_cross(plus, pair + 1, -1),
            layouts.index(minus): kl.red_cross(minus, pair, 1),
        }
    else:
        anchor = {
            layouts.index(plus): kl.red_cross(term.obj, pair + 1, 1),
            layouts.index(minus): kl.red_cross(term.obj, pair, -1),
        }
    return _Block(chain, anchor, sign > 0)


def apply_twist(C: ChainComplex, twist: HalfTwist) -> ChainComplex:
    """Braid C by one half twist; the result is validated and simplified."""
    pair, sign = twist.index, twist.sign
    if all(t.obj.counts[pair] == 0 for t in C.terms):
        return C
    R = lambda_resolve(C, pair)
    return _assemble(R, [_twist_block(t, pair, sign) for t in R.terms])


StepHook = Callable[[int, HalfTwist, ChainComplex, float], Any]


def apply_word(
    C: ChainComplex,
    word: BraidWord | Iterable[HalfTwist],
    on_step: StepHook | None = None,
    guard: Callable[[int, HalfTwist, ChainComplex], Any] | None = None,
) -> ChainComplex:
    """Fold ``apply_twist`` over the word, left to right.

    ``guard(step, twist, C)`` runs before each twist and may raise to abort;
    ``on_step(step, twist, result, ms)`` reports each finished twist.
    """
    for step, twist in enumerate(word, start=1):
        if guard is not None:
            guard(step, twist, C)
        start = time.perf_counter()
        C = apply_twist(C, twist)
        ms = (time.perf_counter() - start) * 1000.0
        terms, entries = C.size()
        LOGGER.debug(f"step {step} {twist.token}: {terms} terms, {entries} entries, {ms:.0f} ms")
        if on_step is not None:
            on_step(step, twist, C, ms)
    return C


# camelCase names of the operations
braidObjectLocal = braid_object_local
lambdaResolve = lambda_resolve
liftMorphism = lift_morphism
applyTwist = apply_twist
applyWord = apply_word
lambdaComplex = lambda_complex
lambdaPrimeComplex = lambda_prime_complex
