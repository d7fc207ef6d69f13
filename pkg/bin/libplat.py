#!/usr/bin/env python3

# platkh - plat closures
# Copyright (C) 2024  Maurice (mausy5043) Hendrix
# AGPL-3.0-or-later  - see LICENSE

"""Khovanov homology of plat closures, end to end.

A plat word on ``n`` pairs is read, the cup complex is braided by the
reversed and inverted word and paired with the simple module. The
resulting integral homology lives in raw (h, J) bidegrees; a
:class:`Calibration` maps those to the usual Khovanov (h, q).
"""

import functools
import json
import logging
import re
from collections import defaultdict
from collections.abc import Callable, Iterable, Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import pandas as pd

import constants
import libbraid as lb
import libcomplex as lc
import libklrw as kl
import liblinalg as la
from libbraid import BraidWord, HalfTwist
from libcomplex import ChainCache, ChainComplex, Term
from libklrw import RB_GRADE, ZERO_GRADE, Layout

LOGGER: logging.Logger = logging.getLogger(__name__)

Bidegree = tuple[int, int]
Laurent = dict[int, int]
Features = tuple[int, int, int, int]


class WordParseError(ValueError):
    """A braid word could not be read; ``position`` is the 1-based token number."""

    def __init__(self, message: str, position: int = 0, token: str = "") -> None:
        where = f" at token {position} '{token}'" if position else ""
        super().__init__(f"{message}{where}")
        self.position = position
        self.token = token


class ResourceAbort(RuntimeError):
    """The term budget ran out; ``telemetry`` holds the steps done so far."""

    def __init__(self, message: str, telemetry: list[dict] | None = None) -> None:
        super().__init__(message)
        self.telemetry = list(telemetry or [])


class CalibrationError(ValueError):
    pass


# words -------------------------------------------------------------------------------

_TOKEN = re.compile(r"(?P<letter>[sS])(?P<index>\d+)(?P<inverse>\^-1)?")


def parse_word(text: str, n_pairs: int) -> BraidWord:
    """Read a whitespace separated plat word.

    ``s<k>`` is the positive half twist of reds k, k+1; ``S<k>`` and
    ``s<k>^-1`` are negative.

    Raises:
        WordParseError: unknown token, or an index outside 1..2n-1.
    """
    if n_pairs < 1:
        raise WordParseError(f"need at least one pair of strands, got {n_pairs}")
    max_index = 2 * n_pairs - 1
    twists = []
    for position, match in enumerate(re.finditer(r"\S+", text), start=1):
        token = match.group()
        parsed = _TOKEN.fullmatch(token)
        if parsed is None:
            raise WordParseError(f"unknown token (column {match.start() + 1})", position, token)
        index = int(parsed["index"])
        if not 1 <= index <= max_index:
            raise WordParseError(
                f"index {index} out of range, valid range is 1..{max_index}", position, token
            )
        sign = -1 if parsed["letter"] == "S" else 1
        if parsed["inverse"]:
            sign = -sign
        twists.append(HalfTwist(index, sign))
    return BraidWord(n_pairs, tuple(twists))


def mirror(word: BraidWord) -> BraidWord:
    return word.mirror()


def stabilize(word: BraidWord) -> BraidWord:
    """Same plat link on one more pair: append ``s_{2n}`` on ``n + 1`` pairs."""
    n = word.n_pairs
    return BraidWord(n + 1, tuple(word.twists) + (HalfTwist(2 * n, 1),))


def twisted_word(word: BraidWord, chi: int = 1) -> BraidWord:
    """The word acting on the cups: reversed, and inverted unless ``chi`` is -1."""
    if chi > 0:
        return word.inverse()
    return BraidWord(word.n_pairs, tuple(reversed(word.twists)))


def _partner(position: int) -> int:
    """The other end of the cup or cap at ``position``."""
    return position + 1 if position % 2 else position - 1


def orientation(word: BraidWord) -> tuple[tuple[int, ...], int]:
    """Oriented sign of every crossing of the plat closure, and its component count.

    Each component is walked from its lowest-leftmost point on the bottom
    level, going up. A crossing is positive when the over strand and the
    under strand run the same vertical way under a positive half twist.
    """
    m = len(word)
    positions = [t.index for t in word]
    seen: set[tuple[int, int]] = set()
    # (level, "sw" | "se") -> +1 when that strand runs up
    runs: dict[tuple[int, str], int] = {}
    components = 0
    for t0 in range(m + 1):
        for j0 in range(1, word.strands + 1):
            if (j0, t0) in seen:
                continue
            components += 1
            j, t, up = j0, t0, 1
            while (j, t) not in seen:
                seen.add((j, t))
                if up > 0:
                    if t == m:
                        j, up = _partner(j), -1
                        continue
                    k = positions[t]
                    if j in (k, k + 1):
                        runs[(t, "sw" if j == k else "se")] = 1
                        j = k + 1 if j == k else k
                    t += 1
                else:
                    if t == 0:
                        j, up = _partner(j), 1
                        continue
                    k = positions[t - 1]
                    if j in (k, k + 1):
                        # coming down into NE means the SW strand runs down
                        runs[(t - 1, "sw" if j == k + 1 else "se")] = -1
                        j = k + 1 if j == k else k
                    t -= 1
    signs = tuple(
        twist.sign * (1 if runs[(t, "sw")] == runs[(t, "se")] else -1)
        for t, twist in enumerate(word)
    )
    return signs, components


def features(word: BraidWord) -> Features:
    """(1, word writhe, antiparallel writhe, n): what the grading offsets depend on.

    The antiparallel writhe sums the twist signs of the crossings whose strands
    run opposite ways, i.e. half the difference of the word and oriented writhes.
    """
    signs, _ = orientation(word)
    antiparallel = sum(t.sign for t, s in zip(word, signs, strict=True) if s != t.sign)
    return 1, word.writhe(), antiparallel, word.n_pairs


# tables ------------------------------------------------------------------------------


def _group(free: int, torsion: Iterable[int]) -> la.HomologyGroup:
    return la.HomologyGroup(free, tuple(sorted(torsion)))


@dataclass(frozen=True)
class Calibration:
    """Affine change of bidegree from raw (h, J) to Khovanov (h, q).

    ``h' = epsilon*h + alpha*J + c_h·f`` and ``q' = scale*J + c_q·f`` where
    ``f = (1, word writhe, antiparallel writhe, n)`` are the :func:`features`
    of the plat. ``chi`` fixes which way the half twists act on the cups.
    """

    epsilon: int = 1
    alpha: Fraction = Fraction(0)
    scale: int = 1
    chi: int = 1
    c_h: Features = (0, 0, 0, 0)
    c_q: Features = (0, 0, 0, 0)

    def offsets(self, feats: Features) -> Bidegree:
        ch = sum(c * f for c, f in zip(self.c_h, feats, strict=True))
        cq = sum(c * f for c, f in zip(self.c_q, feats, strict=True))
        return ch, cq

    def linear(self, h: int, j: int) -> Bidegree | None:
        """Bidegree before offsets; None when ``alpha*J`` is not integral."""
        hh = self.epsilon * h + self.alpha * j
        if hh.denominator != 1:
            return None
        return int(hh), self.scale * j

    def apply(self, h: int, j: int, feats: Features) -> Bidegree | None:
        base = self.linear(h, j)
        if base is None:
            return None
        ch, cq = self.offsets(feats)
        return base[0] + ch, base[1] + cq

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "alpha": str(self.alpha),
            "scale": self.scale,
            "chi": self.chi,
            "c_h": list(self.c_h),
            "c_q": list(self.c_q),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Calibration":
        return cls(
            int(data["epsilon"]),
            Fraction(data["alpha"]),
            int(data["scale"]),
            int(data["chi"]),
            tuple(data["c_h"]),  # type: ignore[arg-type]
            tuple(data["c_q"]),  # type: ignore[arg-type]
        )


@dataclass
class KhTable:
    """Bigraded integral homology; zero groups are never stored.

    ``raw`` maps every calibrated bidegree back to the raw (h, J) it came from.
    """

    n_pairs: int
    word: str
    groups: dict[Bidegree, la.HomologyGroup]
    calibrated: bool = True
    calibration: Calibration | None = None
    raw: dict[Bidegree, Bidegree] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.groups = {
            key: _group(g.free, g.torsion)
            for key, g in sorted(self.groups.items())
            if not la.HomologyGroup(g.free, tuple(g.torsion)).is_zero()
        }

    def total_rank(self) -> int:
        return sum(g.free for g in self.groups.values())

    def torsion(self) -> list[tuple[Bidegree, int]]:
        return [(key, order) for key, g in self.groups.items() for order in g.torsion]

    def same_groups(self, other: "KhTable") -> bool:
        return self.groups == other.groups

    def shifted(self, dh: int, dq: int) -> "KhTable":
        return KhTable(
            self.n_pairs,
            self.word,
            {(h + dh, q + dq): g for (h, q), g in self.groups.items()},
            self.calibrated,
            self.calibration,
        )

    def to_json(self) -> dict:
        groups = []
        for (h, q), g in self.groups.items():
            item: dict[str, Any] = {"h": h, "q": q, "free": g.free, "torsion": list(g.torsion)}
            if (h, q) in self.raw:
                item["raw_h"], item["raw_j"] = self.raw[(h, q)]
            groups.append(item)
        return {
            "n": self.n_pairs,
            "word": self.word,
            "calibrated": self.calibrated,
            "calibration": self.calibration.to_json() if self.calibration else None,
            "groups": groups,
            "jones": [{"exp": e, "coef": c} for e, c in euler_characteristic(self).items()],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, data: Mapping) -> "KhTable":
        groups = {
            (int(g["h"]), int(g["q"])): _group(int(g["free"]), g["torsion"])
            for g in data["groups"]
        }
        raw = {
            (int(g["h"]), int(g["q"])): (int(g["raw_h"]), int(g["raw_j"]))
            for g in data["groups"]
            if "raw_h" in g
        }
        cal = data.get("calibration")
        return cls(
            int(data["n"]),
            data["word"],
            groups,
            bool(data.get("calibrated", True)),
            Calibration.from_json(cal) if cal else None,
            raw,
        )

    def to_frame(self) -> pd.DataFrame:
        """One row per q, one column per h; cells read like ``Z^2+Z/2``."""
        if not self.groups:
            return pd.DataFrame()
        hs = sorted({h for h, _ in self.groups})
        qs = sorted({q for _, q in self.groups}, reverse=True)
        frame = pd.DataFrame("", index=pd.Index(qs, name="q"), columns=pd.Index(hs, name="h"))
        for (h, q), g in self.groups.items():
            frame.loc[q, h] = _cell(g)
        return frame

    def to_text(self) -> str:
        title = f"n={self.n_pairs} word='{self.word}'"
        if not self.groups:
            return f"{title}\n(zero)"
        poly = format_laurent(euler_characteristic(self))
        return f"{title}\n{self.to_frame().to_markdown()}\n\njones: {poly}"


def _cell(g: la.HomologyGroup) -> str:
    parts = []
    if g.free == 1:
        parts.append("Z")
    elif g.free:
        parts.append(f"Z^{g.free}")
    parts.extend(f"Z/{t}" for t in g.torsion)
    return "+".join(parts)


def euler_characteristic(table: KhTable) -> Laurent:
    """Σ (-1)^h rank q^deg over the free parts."""
    out: dict[int, int] = defaultdict(int)
    for (h, q), g in table.groups.items():
        out[q] += -g.free if h % 2 else g.free
    return {q: c for q, c in sorted(out.items()) if c}


def jones(table: KhTable) -> Laurent:
    """Unnormalised Jones polynomial (unknot = q + q^-1) of a calibrated table."""
    if not table.calibrated:
        LOGGER.warning("Jones polynomial taken from a raw table")
    return euler_characteristic(table)


def format_laurent(poly: Mapping[int, int], var: str = "q") -> str:
    if not poly:
        return "0"
    out = ""
    for exp, coef in sorted(poly.items()):
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        power = var if exp == 1 else "1" if exp == 0 else f"{var}^{exp}"
        body = power if mag == 1 else str(mag) if exp == 0 else f"{mag}{power}"
        out += f" {sign} {body}" if out else f"{'-' if coef < 0 else ''}{body}"
    return out


def dual_table(table: KhTable) -> KhTable:
    """Table of the mirror link: free parts at (-h, -q), torsion at (1-h, -q)."""
    groups: dict[Bidegree, list] = defaultdict(lambda: [0, []])
    for (h, q), g in table.groups.items():
        if g.free:
            groups[(-h, -q)][0] += g.free
        for t in g.torsion:
            groups[(1 - h, -q)][1].append(t)
    return KhTable(
        table.n_pairs,
        table.word,
        {key: _group(free, tors) for key, (free, tors) in groups.items()},
        table.calibrated,
    )


# the computation ---------------------------------------------------------------------


def cup_factor(n_pairs: int, cup: int) -> ChainComplex:
    """Resolution of the 0-based ``cup`` alone: ``θ{-2} -> θ₋{-1} ⊕ θ₊{-1} -> θ``.

    θ has one black between the reds of the cup, θ₋ and θ₊ have it pushed
    over the left or the right red. The first map is ``(-a, b)``, the second
    ``(b', a')`` with a, a' crossing the left red and b, b' the right one;
    both composites are ``u·y`` so the signs make d² vanish.
    """
    if not 0 <= cup < n_pairs:
        raise ValueError(f"cup {cup} out of range for {n_pairs} pair(s)")
    segment = 2 * cup + 1
    theta = Layout.from_segments(n_pairs, [segment])
    minus = theta.moved(segment, segment - 1)
    plus = theta.moved(segment, segment + 1)
    terms = [
        Term(theta, -RB_GRADE.times(2), 0),
        Term(minus, -RB_GRADE, 1),
        Term(plus, -RB_GRADE, 1),
        Term(theta, ZERO_GRADE, 2),
    ]
    entries = {
        (0, 1): -kl.red_cross(theta, segment, -1),
        (0, 2): kl.red_cross(theta, segment + 1, 1),
        (1, 3): kl.red_cross(minus, segment, 1),
        (2, 3): kl.red_cross(plus, segment + 1, -1),
    }
    factor = ChainComplex(n_pairs, terms, entries)
    lc.validate(factor)
    return factor


def cup_complex(n_pairs: int) -> ChainComplex:
    """Resolution of the cup module: the product of the :func:`cup_factor` of every cup."""
    if n_pairs < 1:
        raise ValueError(f"need at least one pair, got {n_pairs}")
    out = functools.reduce(lc.product_complex, (cup_factor(n_pairs, c) for c in range(n_pairs)))
    LOGGER.debug(f"cup complex n={n_pairs}: {out.describe()}")
    return out


StepRecord = dict[str, Any]


def _record(step: int, twist: HalfTwist, terms: int, entries: int, ms: float) -> StepRecord:
    return {"step": step, "twist": twist.token, "terms": terms, "entries": entries, "ms": ms}


def _braid(
    n_pairs: int,
    word: BraidWord,
    budget: int | None,
    telemetry: list[StepRecord],
    on_step: Callable[[StepRecord], Any] | None,
) -> ChainComplex:
    def guard(step: int, twist: HalfTwist, C: ChainComplex) -> None:
        terms = C.size()[0]
        if budget is not None and terms > budget:
            raise ResourceAbort(
                f"step {step} ({twist.token}) starts from {terms} terms, budget is {budget}",
                telemetry,
            )

    def report(step: int, twist: HalfTwist, C: ChainComplex, ms: float) -> None:
        terms, entries = C.size()
        record = _record(step, twist, terms, entries, ms)
        telemetry.append(record)
        if on_step is not None:
            on_step(record)
        if budget is not None and terms > budget:
            raise ResourceAbort(
                f"step {step} ({twist.token}) produced {terms} terms, budget is {budget}",
                telemetry,
            )

    return lb.apply_word(cup_complex(n_pairs), word, on_step=report, guard=guard)


def braided_cups(
    word: BraidWord,
    chi: int = 1,
    cache: ChainCache | None = None,
    budget: int | None = None,
    on_step: Callable[[StepRecord], Any] | None = None,
) -> ChainComplex:
    """The cup complex braided by ``twisted_word(word, chi)``, one lifted twist at a time.

    Telemetry records carry the size of the complex after each step. Cached
    complexes are keyed by the acting word.

    Raises:
        ResourceAbort: a step needs more terms than ``budget``.
    """
    n = word.n_pairs
    acting = twisted_word(word, chi)
    cache = cache or ChainCache(None)
    key = ChainCache.key({"n": n, "word": acting.text()})
    C = cache.get(key)
    if C is not None:
        LOGGER.debug(f"cache hit {key[:12]} for '{word.text()}'")
        return C
    telemetry: list[StepRecord] = []
    C = _braid(n, acting, budget, telemetry, on_step)
    cache.put(key, C)
    return C


def khovanov(
    word: BraidWord,
    chi: int = 1,
    cache: ChainCache | None = None,
    threads: int = 1,
    budget: int | None = None,
    on_step: Callable[[StepRecord], Any] | None = None,
) -> KhTable:
    """Raw bigraded homology of Hom(braided cups, simple module).

    The homology pieces are independent and run on ``threads`` workers; the
    table does not depend on their number.
    """
    C = braided_cups(word, chi, cache, budget, on_step)
    hom = lc.hom_eval_simple(C)
    LOGGER.debug(f"'{word.text()}': {len(hom.gens)} generators, {len(hom.matrix)} entries")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            groups = hom.homology(pool)
    else:
        groups = hom.homology()
    return KhTable(word.n_pairs, word.text(), groups, calibrated=False)


def apply_calibration(raw: KhTable, calibration: Calibration, word: BraidWord) -> KhTable:
    """Move a raw table to Khovanov bidegrees, remembering where each group came from.

    Raises:
        CalibrationError: a bidegree does not map to integers, or two collide.
    """
    feats = features(word)
    groups: dict[Bidegree, la.HomologyGroup] = {}
    back: dict[Bidegree, Bidegree] = {}
    for (h, j), g in raw.groups.items():
        key = calibration.apply(h, j, feats)
        if key is None or key in groups:
            raise CalibrationError(f"raw bidegree {(h, j)} has no place under {calibration}")
        groups[key] = g
        back[key] = (h, j)
    return KhTable(raw.n_pairs, raw.word, groups, True, calibration, back)


def compute(word: BraidWord, calibration: Calibration, **options: Any) -> KhTable:
    """Calibrated Khovanov homology of the plat closure of ``word``."""
    raw = khovanov(word, chi=calibration.chi, **options)
    return apply_calibration(raw, calibration, word)


# calibration -------------------------------------------------------------------------

Sample = tuple[BraidWord, KhTable]


def _offset(raw: KhTable, oracle: KhTable, linear: Callable) -> Bidegree | None:
    """Translation taking the linearly mapped raw table onto the oracle, if one exists."""
    moved: dict[Bidegree, la.HomologyGroup] = {}
    for (h, j), g in raw.groups.items():
        key = linear(h, j)
        if key is None or key in moved:
            return None
        moved[key] = g
    if not moved or len(moved) != len(oracle.groups):
        return None
    low_raw, low_oracle = min(moved), min(oracle.groups)
    dh, dq = low_oracle[0] - low_raw[0], low_oracle[1] - low_raw[1]
    for (h, q), g in moved.items():
        if oracle.groups.get((h + dh, q + dq)) != g:
            return None
    return dh, dq


def _fit(design: list[Features], values: list[int]) -> Features | None:
    solution = la.solve_z(design, values)
    if solution is None:
        return None
    return tuple(int(x) for x in solution)  # type: ignore[return-value]


def calibrate(
    samples: list[Sample],
    raw_of: Callable[[BraidWord, int], KhTable] | None = None,
    grid: Mapping[str, Any] | None = None,
) -> Calibration:
    """Find the unique affine map making every raw sample table equal its oracle.

    ``raw_of(word, chi)`` computes a raw table (default :func:`khovanov`).

    Raises:
        CalibrationError: no samples, no consistent map, or more than one.
    """
    if not samples:
        raise CalibrationError("calibration needs at least one sample")
    grid = grid or constants.CALIBRATION
    raw_of = raw_of or (lambda w, chi: khovanov(w, chi=chi))
    design = [features(word) for word, _ in samples]
    determined = la.rank(design) == len(design[0])
    survivors: list[Calibration] = []
    for chi in grid["chis"]:
        raws = [raw_of(word, chi) for word, _ in samples]
        for eps in grid["epsilons"]:
            for alpha in (Fraction(a) for a in grid["alphas"]):
                for scale in grid["scales"]:
                    trial = Calibration(eps, alpha, scale, chi)
                    offsets = []
                    for (_, oracle), raw in zip(samples, raws, strict=True):
                        off = _offset(raw, oracle, trial.linear)
                        if off is None:
                            break
                        offsets.append(off)
                    else:
                        c_h = _fit(design, [o[0] for o in offsets])
                        c_q = _fit(design, [o[1] for o in offsets])
                        if c_h is not None and c_q is not None:
                            survivors.append(Calibration(eps, alpha, scale, chi, c_h, c_q))
    LOGGER.info(f"{len(survivors)} calibration candidate(s) from {len(samples)} sample(s)")
    if not survivors:
        raise CalibrationError("no calibration matches every sample")
    if len(survivors) > 1 or not determined:
        raise CalibrationError(
            f"calibration is ambiguous ({len(survivors)} candidates); add samples"
        )
    return survivors[0]


def load_calibration(cache: ChainCache | None = None) -> Calibration | None:
    """Frozen calibration from the constants, else the one cached on disk."""
    frozen = constants.CALIBRATION["frozen"]
    if frozen:
        return Calibration.from_json(frozen)
    if cache is None:
        return None
    data = cache.load_json(constants.CALIBRATION["file"])
    if not data or data.get("format") != constants.CALIBRATION["format"]:
        return None
    return Calibration.from_json(data["calibration"])


def save_calibration(cache: ChainCache, calibration: Calibration) -> None:
    cache.save_json(
        constants.CALIBRATION["file"],
        {"format": constants.CALIBRATION["format"], "calibration": calibration.to_json()},
    )


def sample_words() -> list[BraidWord]:
    return [parse_word(text, n) for n, text in constants.CALIBRATION["samples"]]


# camelCase names of the operations
parseWord = parse_word
cupComplex = cup_complex
eulerCharacteristic = euler_characteristic
