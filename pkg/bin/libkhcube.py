#!/usr/bin/env python3

# platkh - cube of resolutions
# Copyright (C) 2024  Maurice (mausy5043) Hendrix
# AGPL-3.0-or-later  - see LICENSE

"""Khovanov homology of small plat diagrams from the cube of resolutions.

This is the independent reference the plat pipeline is checked and
calibrated against. Normalisation: the unknot has ℤ at (0, ±1),

    h = r - n₋,   q = #v₊ - #v₋ + r + n₊ - 2n₋,

with r the number of 1-smoothings. The over strand of a positive half
twist runs SW-NE, and its 0-smoothing keeps the strands vertical.

A diagram lives on the grid of (position, level) nodes: positions 1..2n,
levels 0..m for m crossings; crossing t sits between levels t and t+1.
"""

import itertools
import logging
from collections import defaultdict
from dataclasses import dataclass

import constants
import liblinalg as la
import libplat as lp
from libbraid import BraidWord
from libplat import KhTable, Laurent, ResourceAbort

LOGGER: logging.Logger = logging.getLogger(__name__)

Node = tuple[int, int]


@dataclass(frozen=True)
class Crossing:
    """A half twist of positions ``position``, ``position + 1`` between two levels.

    ``ports`` are the arc ids at SW, SE, NE, NW; ``sign`` is the oriented
    crossing sign, ``twist`` the sign of the half twist in the word.
    """

    level: int
    position: int
    twist: int
    sign: int
    ports: tuple[int, int, int, int]


@dataclass(frozen=True)
class PlanarDiagram:
    n_pairs: int
    crossings: tuple[Crossing, ...]
    arcs: int
    components: int

    @property
    def height(self) -> int:
        return len(self.crossings)

    def writhe(self) -> int:
        return sum(c.sign for c in self.crossings)

    def signs(self) -> tuple[int, int]:
        """(n₊, n₋)"""
        plus = sum(1 for c in self.crossings if c.sign > 0)
        return plus, len(self.crossings) - plus


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict[Node, Node] = {}

    def find(self, x: Node) -> Node:
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: Node, b: Node) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _nodes(n_pairs: int, height: int) -> list[Node]:
    return [(j, t) for t in range(height + 1) for j in range(1, 2 * n_pairs + 1)]


def _caps(uf: _UnionFind, n_pairs: int, height: int) -> None:
    for j in range(1, 2 * n_pairs + 1, 2):
        uf.union((j, 0), (j + 1, 0))
        uf.union((j, height), (j + 1, height))


def _straight(uf: _UnionFind, n_pairs: int, level: int, skip: int) -> None:
    for j in range(1, 2 * n_pairs + 1):
        if j not in (skip, skip + 1):
            uf.union((j, level), (j, level + 1))


def plat_to_diagram(word: BraidWord) -> PlanarDiagram:
    """Close the braid with cups at the bottom and caps at the top, pairing (2i-1, 2i)."""
    m = len(word)
    uf = _UnionFind()
    for node in _nodes(word.n_pairs, m):
        uf.find(node)
    _caps(uf, word.n_pairs, m)
    for t, twist in enumerate(word):
        _straight(uf, word.n_pairs, t, twist.index)
    roots = sorted({uf.find(node) for node in uf.parent})
    arc_of = {root: a for a, root in enumerate(roots)}
    signs, count = lp.orientation(word)
    crossings = []
    for t, twist in enumerate(word):
        k = twist.index
        corners = ((k, t), (k + 1, t), (k + 1, t + 1), (k, t + 1))
        ports = tuple(arc_of[uf.find(node)] for node in corners)
        crossings.append(Crossing(t, k, twist.sign, signs[t], ports))  # type: ignore[arg-type]
    return PlanarDiagram(word.n_pairs, tuple(crossings), len(roots), count)


def writhe(diagram: PlanarDiagram) -> int:
    return diagram.writhe()


def components(diagram: PlanarDiagram) -> int:
    return diagram.components


# resolutions -------------------------------------------------------------------------


def _circles(diagram: PlanarDiagram, state: int) -> dict[Node, int]:
    """Circle index of every node in the resolution ``state`` (bit t = 1-smoothing at t)."""
    m = diagram.height
    uf = _UnionFind()
    nodes = _nodes(diagram.n_pairs, m)
    for node in nodes:
        uf.find(node)
    _caps(uf, diagram.n_pairs, m)
    for c in diagram.crossings:
        t, k = c.level, c.position
        _straight(uf, diagram.n_pairs, t, k)
        one = bool(state >> t & 1)
        # a positive twist keeps the strands vertical in its 0-smoothing
        vertical = one != (c.twist > 0)
        if vertical:
            uf.union((k, t), (k, t + 1))
            uf.union((k + 1, t), (k + 1, t + 1))
        else:
            uf.union((k, t), (k + 1, t))
            uf.union((k, t + 1), (k + 1, t + 1))
    roots: dict[Node, int] = {}
    out = {}
    for node in nodes:
        root = uf.find(node)
        out[node] = roots.setdefault(root, len(roots))
    return out


def _check_size(diagram: PlanarDiagram) -> None:
    limit = constants.ORACLE["max_crossings"]
    if diagram.height > limit:
        raise ResourceAbort(f"cube of {diagram.height} crossings exceeds the limit of {limit}")


def kauffman_jones(diagram: PlanarDiagram) -> Laurent:
    """Unnormalised Jones polynomial from the bracket state sum.

    ``Σ_states (-q)^r (q + q⁻¹)^{#circles}``, shifted by ``(-1)^{n₋} q^{n₊ - 2n₋}``.
    """
    _check_size(diagram)
    plus, minus = diagram.signs()
    total: dict[int, int] = defaultdict(int)
    for state in range(1 << diagram.height):
        r = bin(state).count("1")
        k = len(set(_circles(diagram, state).values()))
        sign = -1 if (r + minus) % 2 else 1
        # (q + q⁻¹)^k = Σ C(k, i) q^{k - 2i}
        for i in range(k + 1):
            total[r + k - 2 * i + plus - 2 * minus] += sign * _binomial(k, i)
    return {q: c for q, c in sorted(total.items()) if c}


def _binomial(k: int, i: int) -> int:
    out = 1
    for x in range(i):
        out = out * (k - x) // (x + 1)
    return out


# the complex ---------------------------------------------------------------------------


class _Vertex:
    __slots__ = ("state", "circle_of", "count", "ones")

    def __init__(self, diagram: PlanarDiagram, state: int) -> None:
        self.state = state
        self.circle_of = _circles(diagram, state)
        self.count = len(set(self.circle_of.values()))
        self.ones = bin(state).count("1")


class _EdgeRule:
    """How one edge of the cube moves circles: a merge or a split plus a bijection."""

    __slots__ = ("fixed", "merge", "sources", "targets", "size")

    def __init__(self, source: _Vertex, target: _Vertex) -> None:
        to_target: dict[int, set[int]] = defaultdict(set)
        to_source: dict[int, set[int]] = defaultdict(set)
        for node, a in source.circle_of.items():
            b = target.circle_of[node]
            to_target[a].add(b)
            to_source[b].add(a)
        merged = [b for b, a_set in to_source.items() if len(a_set) > 1]
        self.merge = bool(merged)
        if self.merge:
            self.targets = tuple(merged)
            self.sources = tuple(sorted(to_source[merged[0]]))
        else:
            self.sources = tuple(a for a, b_set in to_target.items() if len(b_set) > 1)
            self.targets = tuple(sorted(to_target[self.sources[0]]))
        self.fixed = [
            (a, next(iter(b_set)))
            for a, b_set in to_target.items()
            if len(b_set) == 1 and a not in self.sources
        ]
        self.size = target.count

    def images(self, labels: tuple[int, ...]) -> list[tuple[int, ...]]:
        """Image of the generator ``labels`` (±1 per circle); v+ is the unit."""
        base = [0] * self.size
        for a, b in self.fixed:
            base[b] = labels[a]
        if self.merge:
            x, y = (labels[a] for a in self.sources)
            if x < 0 and y < 0:
                return []
            base[self.targets[0]] = -1 if min(x, y) < 0 else 1
            return [tuple(base)]
        b1, b2 = self.targets
        pairs = ((1, -1), (-1, 1)) if labels[self.sources[0]] > 0 else ((-1, -1),)
        out = []
        for x, y in pairs:
            base[b1], base[b2] = x, y
            out.append(tuple(base))
        return out


def cube_homology(diagram: PlanarDiagram, word: str = "") -> KhTable:
    """Integral Khovanov homology of ``diagram``.

    Raises:
        ResourceAbort: more crossings than the oracle handles.
    """
    _check_size(diagram)
    m = diagram.height
    plus, minus = diagram.signs()
    vertices = [_Vertex(diagram, state) for state in range(1 << m)]
    index: dict[tuple[int, tuple[int, ...]], int] = {}
    degree: list[tuple[int, int]] = []
    for v in vertices:
        for labels in itertools.product((1, -1), repeat=v.count):
            index[(v.state, labels)] = len(degree)
            degree.append((v.ones - minus, sum(labels) + v.ones + plus - 2 * minus))
    by_degree: dict[tuple[int, int], list[int]] = defaultdict(list)
    for g, key in enumerate(degree):
        by_degree[key].append(g)
    position = {g: i for gens in by_degree.values() for i, g in enumerate(gens)}
    # (h, q) -> {(target, source): coefficient} for the map out of bidegree (h, q)
    maps: dict[tuple[int, int], dict[tuple[int, int], int]] = defaultdict(dict)
    for v in vertices:
        for t in range(m):
            if v.state >> t & 1:
                continue
            w = vertices[v.state | 1 << t]
            sign = -1 if bin(v.state & ((1 << t) - 1)).count("1") % 2 else 1
            rule = _EdgeRule(v, w)
            for labels in itertools.product((1, -1), repeat=v.count):
                g = index[(v.state, labels)]
                for image in rule.images(labels):
                    g2 = index[(w.state, image)]
                    block = maps[degree[g]]
                    key = (position[g2], position[g])
                    block[key] = block.get(key, 0) + sign
    groups = {}
    for (h, q), gens in sorted(by_degree.items()):
        below = by_degree.get((h - 1, q), [])
        above = by_degree.get((h + 1, q), [])
        d_in = la.SparseIntMatrix.from_entries(len(gens), len(below), maps.get((h - 1, q), {}))
        d_out = la.SparseIntMatrix.from_entries(len(above), len(gens), maps.get((h, q), {}))
        group = la.homology_at(d_in, d_out, len(gens))
        if not group.is_zero():
            groups[(h, q)] = group
    LOGGER.debug(f"cube of {m} crossings: {len(degree)} generators, {len(groups)} groups")
    return KhTable(diagram.n_pairs, word, groups, calibrated=True)


def oracle_table(word: BraidWord) -> KhTable:
    return cube_homology(plat_to_diagram(word), word.text())


# camelCase names of the operations
platToDiagram = plat_to_diagram
cubeHomology = cube_homology
kauffmanJones = kauffman_jones
