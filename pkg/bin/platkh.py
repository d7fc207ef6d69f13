#!/usr/bin/env python3

# platkh - command line
# Copyright (C) 2024  Maurice (mausy5043) Hendrix
# AGPL-3.0-or-later  - see LICENSE

"""Compute the Khovanov homology of a plat closure.

    platkh --pairs 2 --word "s2 s2 s2" --format json
    platkh selftest
"""

import argparse
import itertools
import logging
import math
import os
import sys
import time
import traceback
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from typing import Any, TextIO

import numpy as np
import pandas as pd

import constants
import libbraid as lb
import libcomplex as lc
import libkhcube as kc
import libklrw as kl
import liblinalg as la
import libplat as lp
from libbraid import HalfTwist
from libcomplex import ChainCache, ChainComplex, Term
from libklrw import RB_GRADE, Layout
from libpoly import Poly2

logging.basicConfig(
    level=logging.INFO,
    format="%(module)s.%(funcName)s [%(levelname)s] - %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
    handlers=[logging.StreamHandler(sys.stderr)],
)
LOGGER: logging.Logger = logging.getLogger(__name__)

EXIT: dict = constants.EXIT
INTERNAL_ERRORS = (kl.KlrwError, lc.ComplexError, lb.LiftError, lp.CalibrationError)


@dataclass(frozen=True)
class RunConfig:
    n_pairs: int
    word: str = ""
    fmt: str = constants.PLATKH["default_format"]
    trace: bool = False
    threads: int = 1
    budget_terms: int = constants.PLATKH["budget_terms"]
    cache: str | None = None

    def __post_init__(self) -> None:
        if self.fmt not in constants.PLATKH["formats"]:
            raise ValueError(f"format must be one of {constants.PLATKH['formats']}")
        if self.threads < 1:
            raise ValueError(f"thread count must be positive, got {self.threads}")
        if self.budget_terms < 1:
            raise ValueError(f"term budget must be positive, got {self.budget_terms}")


def build_parser() -> argparse.ArgumentParser:
    # fmt: off
    parser = argparse.ArgumentParser(description="Khovanov homology of plat closures.")
    parser.add_argument("command",
                        nargs="?",
                        choices=["run", "selftest"],
                        default="run",
                        help="compute one word (default) or run the self-test matrix"
                        )
    parser.add_argument("--pairs", "-n",
                        type=int,
                        default=1,
                        help="number of cup pairs, the plat has 2n strands"
                        )
    parser.add_argument("--word", "-w",
                        type=str,
                        default="",
                        help="plat word, e.g. 's2 s2 s2'; S<k> or s<k>^-1 is a negative twist"
                        )
    parser.add_argument("--format", "-f",
                        choices=constants.PLATKH["formats"],
                        default=constants.PLATKH["default_format"],
                        help="output format"
                        )
    parser.add_argument("--trace",
                        action="store_true",
                        help="write one telemetry line per half twist to stderr"
                        )
    parser.add_argument("--threads",
                        type=int,
                        default=None,
                        help=f"worker threads (default ${constants.PLATKH['threads_env']},"
                             f" else {constants.PLATKH['threads']})"
                        )
    parser.add_argument("--budget-terms",
                        type=int,
                        default=constants.PLATKH["budget_terms"],
                        help="abort when a braided complex needs more terms than this"
                        )
    parser.add_argument("--cache",
                        type=str,
                        default=constants.PLATKH["cache"],
                        help="cache directory; an empty string disables the cache"
                        )
    parser.add_argument("--version",
                        action="store_true",
                        help="print the version and exit"
                        )
    parser.add_argument("--debug",
                        action="store_true",
                        help="start in debugging mode"
                        )
    # fmt: on
    return parser


def _threads(args: argparse.Namespace, environ: Mapping[str, str]) -> int:
    """The --threads flag, else the environment, else the number of CPUs."""
    if args.threads is not None:
        return int(args.threads)
    env = environ.get(constants.PLATKH["threads_env"])
    if env:
        try:
            return int(env)
        except ValueError:
            LOGGER.warning(f"ignoring {constants.PLATKH['threads_env']}={env!r}")
    return int(constants.PLATKH["threads"])


def config_from_args(
    args: argparse.Namespace, environ: Mapping[str, str] = os.environ
) -> RunConfig:
    return RunConfig(
        n_pairs=args.pairs,
        word=args.word,
        fmt=args.format,
        trace=args.trace,
        threads=_threads(args, environ),
        budget_terms=args.budget_terms,
        cache=args.cache or None,
    )


def set_debug() -> None:
    """Send every platkh logger to stdout at DEBUG level."""
    root = logging.getLogger()
    if not any(
        isinstance(h, logging.StreamHandler) and h.stream is sys.stdout for h in root.handlers
    ):
        root.addHandler(logging.StreamHandler(sys.stdout))
    root.setLevel(logging.DEBUG)
    LOGGER.debug("Debugging on.")


def open_cache(directory: str | None) -> ChainCache:
    try:
        return ChainCache(directory)
    except OSError as her:
        LOGGER.warning(f"cache {directory} unavailable ({her}); continuing without")
        return ChainCache(None)


def obtain_calibration(cache: ChainCache) -> lp.Calibration:
    """The frozen calibration, else the one a selftest left in the cache.

    Raises:
        CalibrationError: neither is available.
    """
    calibration = lp.load_calibration(cache)
    if calibration is None:
        raise lp.CalibrationError("no calibration on record; run 'platkh selftest' first")
    return calibration


def _tracer(err: TextIO) -> Callable[[dict], None]:
    def emit(record: dict) -> None:
        err.write(constants.PLATKH["trace_format"].format(**record) + "\n")
        err.flush()

    return emit


def run(config: RunConfig, out: TextIO | None = None, err: TextIO | None = None) -> int:
    """Compute one word and print it; the return value is the exit status."""
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        word = lp.parse_word(config.word, config.n_pairs)
    except lp.WordParseError as her:
        LOGGER.error(f"{her}")
        err.write(f"platkh: {her}\n")
        return EXIT["parse"]
    cache = open_cache(config.cache)
    try:
        calibration = obtain_calibration(cache)
        on_step = _tracer(err) if config.trace else None
        table = lp.compute(
            word,
            calibration,
            cache=cache,
            on_step=on_step,
            threads=config.threads,
            budget=config.budget_terms,
        )
    except lp.ResourceAbort as her:
        LOGGER.error(f"{her}")
        err.write(f"platkh: resource abort: {her}\n")
        if not config.trace:
            for record in her.telemetry:
                err.write(constants.PLATKH["trace_format"].format(**record) + "\n")
        return EXIT["resource"]
    except INTERNAL_ERRORS as her:
        LOGGER.critical(f"Internal consistency failure for '{word.text()}'!")
        LOGGER.error(traceback.format_exc())
        err.write(f"platkh: internal consistency failure: {type(her).__name__}: {her}\n")
        return EXIT["internal"]
    except Exception:  # noqa
        LOGGER.critical("Unexpected error while trying to do some work!")
        raise
    out.write(table.dumps() if config.fmt == "json" else table.to_text())
    out.write("\n")
    return EXIT["ok"]


# self-test -----------------------------------------------------------------------------


def _random_events(rng: np.random.Generator, layout: Layout, length: int) -> list[tuple]:
    """A random valid slice word without winding."""
    counts = list(layout.counts)
    events: list[tuple] = []
    for _ in range(length):
        lay = Layout(layout.n_pairs, tuple(counts))
        moves: list[tuple] = [("dot", k) for k in range(1, lay.d + 1)]
        moves += [
            ("bb", k) for k in range(1, lay.d) if lay.segment_of(k) == lay.segment_of(k + 1)
        ]
        for red in range(1, lay.reds + 1):
            if counts[red - 1]:
                moves.append(("rb", red, 1))
            if counts[red]:
                moves.append(("rb", red, -1))
        event = moves[int(rng.integers(len(moves)))]
        if event[0] == "rb":
            _, red, direction = event
            src, dst = (red - 1, red) if direction > 0 else (red, red - 1)
            counts[src] -= 1
            counts[dst] += 1
        events.append(event)
    return events


def _random_word(rng: np.random.Generator, layout: Layout, length: int) -> kl.SliceWord:
    events = tuple(_random_events(rng, layout, length))
    return kl.SliceWord(layout, kl.SliceWord(layout, layout, events).replay(), events)


def _random_layout(rng: np.random.Generator, n_pairs: int, blacks: int) -> Layout:
    segments = rng.integers(0, 2 * n_pairs + 1, size=blacks)
    return Layout.from_segments(n_pairs, [int(s) for s in segments])


def check_relations(samples: int, seed: int = 1) -> str:
    """Local relations in random contexts; raises AssertionError on a miss.

    Black bigon, both dot slides, red bigon and the black crossing passing a
    red point, which moves by ``u·ħ``.
    """
    rng = np.random.default_rng(seed)
    u, hbar = Poly2.monomial(1, 0), Poly2.monomial(0, 1)
    for _ in range(samples):
        layout = _random_layout(rng, 2, int(rng.integers(2, 4)))
        one = kl.identity(layout)
        for k in range(1, layout.d):
            if layout.segment_of(k) != layout.segment_of(k + 1):
                continue
            assert not kl.from_events(layout, [("bb", k), ("bb", k)]), "bigon"
            slide = kl.from_events(layout, [("dot", k), ("bb", k)]) - kl.from_events(
                layout, [("bb", k), ("dot", k + 1)]
            )
            assert slide == one.scale(hbar), "dot slide"
            mirrored = kl.from_events(layout, [("bb", k), ("dot", k)]) - kl.from_events(
                layout, [("dot", k + 1), ("bb", k)]
            )
            assert mirrored == one.scale(hbar), "mirrored dot slide"
        for red in range(1, layout.reds + 1):
            k = sum(layout.counts[:red])
            if layout.counts[red - 1]:
                bigon = kl.from_events(layout, [("rb", red, 1), ("rb", red, -1)])
                assert bigon == kl.dot(layout, k).scale(u), "red bigon"
            if layout.counts[red - 1] and layout.counts[red]:
                right = kl.from_events(layout, [("rb", red, 1), ("bb", k), ("rb", red, -1)])
                left = kl.from_events(layout, [("rb", red, -1), ("bb", k), ("rb", red, 1)])
                assert right - left == one.scale(u * hbar), "crossing past a red point"
    return f"{samples} contexts"


def check_confluence(samples: int, seed: int = 2) -> str:
    """Normal forms do not depend on the rewriting order.

    Each random word is normalised in one pass, by halves, and cut at a random
    point with the pieces composed; the result must also act on polynomials
    exactly like the raw word.
    """
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        layout = _random_layout(rng, 2, int(rng.integers(1, 4)))
        word = _random_word(rng, layout, int(rng.integers(1, 7)))
        value = kl.normalize(word)
        assert value == kl.normalize(word, "split"), f"split {word.events}"
        cut = int(rng.integers(0, len(word.events) + 1))
        lower = kl.from_events(layout, word.events[:cut])
        upper = kl.from_events(lower.top, word.events[cut:])
        assert kl.compose(upper, lower) == value, f"cut at {cut} of {word.events}"
        assert kl.realize(value) == kl.word_operator(word), f"action of {word.events}"
    return f"{samples} words"


def check_algebra(samples: int, seed: int = 3) -> str:
    """Composition is associative and adds grades."""
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        layout = _random_layout(rng, 2, int(rng.integers(1, 4)))
        words = []
        bottom = layout
        for _ in range(3):
            words.append(_random_word(rng, bottom, int(rng.integers(1, 4))))
            bottom = words[-1].top
        f, g, h = (kl.normalize(w) for w in words)
        left = kl.compose(kl.compose(h, g), f)
        assert left == kl.compose(h, kl.compose(g, f)), "associativity"
        grade = words[0].grade() + words[1].grade() + words[2].grade()
        assert left.grades() <= {grade}, f"grades {left.grades()} != {grade}"
    return f"{samples} triples"


def _minors_invariants(matrix: np.ndarray) -> tuple[int, ...]:
    """Invariant factors from the gcds of the k×k minors."""
    rows, cols = matrix.shape
    divisors = [1]
    for k in range(1, min(rows, cols) + 1):
        g = 0
        for rs in itertools.combinations(range(rows), k):
            for cs in itertools.combinations(range(cols), k):
                minor = matrix[np.ix_(rs, cs)].astype(float)
                g = math.gcd(g, int(round(np.linalg.det(minor))))
        if not g:
            break
        divisors.append(g)
    return tuple(divisors[k] // divisors[k - 1] for k in range(1, len(divisors)))


def check_linalg(samples: int, seed: int = 4) -> str:
    """Smith forms against the determinantal divisors of small random matrices."""
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        shape = (int(rng.integers(1, 5)), int(rng.integers(1, 5)))
        matrix = rng.integers(-4, 5, size=shape)
        found = la.smith(matrix).diagonal
        assert found == _minors_invariants(matrix), f"{matrix.tolist()}: {found}"
    return f"{samples} matrices"


def check_templates() -> str:
    lc.validate(lp.cup_complex(2))
    for k in (1, 2):
        for sign in (1, -1):
            lc.validate(lb.braid_template(k, sign))
    factor = lp.cup_factor(1, 0)
    flipped = dict(factor.entries)
    flipped[(1, 3)] = -flipped[(1, 3)]
    try:
        lc.validate(ChainComplex(1, factor.terms, flipped))
    except lc.ComplexError:
        pass
    else:
        raise AssertionError("a cup factor with one sign flipped passed validation")
    theta = Layout(1, (0, 1, 0))
    braided = lb.apply_twist(lb.upsilon_plus(theta, 1), HalfTwist(1, 1))
    expected = [Term(theta, -RB_GRADE.times(2), 0), Term(theta.moved(1, 0), -RB_GRADE, 1)]
    assert sorted(braided.terms) == sorted(expected), "twist of θ₊{-1} -> θ"
    resolution, _ = lb.lambda_complex(theta, 1)
    braided = lb.apply_twist(resolution, HalfTwist(1, 1))
    expected = list(lb.lambda_prime_complex(theta, 1).terms)
    assert sorted(braided.terms) == sorted(expected), "twist of Λ₁"
    braided = lb.apply_word(lp.cup_complex(1), [HalfTwist(1, 1), HalfTwist(1, -1)])
    hom = lc.hom_eval_simple(braided).homology()
    assert hom == lc.hom_eval_simple(lp.cup_complex(1)).homology(), "s1 S1 is not the identity"
    return "cups, sign flip, Λ templates, υ₊, Λ₁, s1 S1"


def check_calibration(cache: ChainCache) -> lp.Calibration:
    """Calibrate against the cube oracle; a frozen calibration must agree."""
    samples = [(word, kc.oracle_table(word)) for word in lp.sample_words()]
    found = lp.calibrate(samples, raw_of=lambda w, chi: lp.khovanov(w, chi=chi, cache=cache))
    frozen = constants.CALIBRATION["frozen"]
    if frozen:
        assert found == lp.Calibration.from_json(frozen), f"oracle gives {found.to_json()}"
    lp.save_calibration(cache, found)
    return found


def check_knot(calibration: lp.Calibration, n_pairs: int, text: str, **options: Any) -> str:
    word = lp.parse_word(text, n_pairs)
    diagram = kc.plat_to_diagram(word)
    oracle = kc.cube_homology(diagram, text)
    assert lp.euler_characteristic(oracle) == kc.kauffman_jones(diagram), "oracle Euler != Jones"
    table = lp.compute(word, calibration, **options)
    assert table.same_groups(oracle), f"{table.groups} != {oracle.groups}"
    return lp.format_laurent(lp.jones(table))


def check_symmetries(calibration: lp.Calibration, **options: Any) -> str:
    """Mirror words give the dual table and stabilising a plat changes nothing."""
    word = lp.parse_word("s2 s2", 2)
    table = lp.compute(word, calibration, **options)
    mirrored = lp.compute(lp.mirror(word), calibration, **options)
    assert mirrored.same_groups(lp.dual_table(table)), "mirror"
    unknot = lp.parse_word("", 1)
    stable = lp.compute(lp.stabilize(unknot), calibration, **options)
    assert stable.same_groups(lp.compute(unknot, calibration, **options)), "stabilisation"
    return "mirror hopf, stabilised unknot"


def selftest(out: TextIO | None = None, cache_dir: str | None = None) -> int:
    """Run the check matrix and print it; 0 when everything passes."""
    out = out or sys.stdout
    rows = []

    def attempt(name: str, check: Callable[[], str]) -> None:
        start = time.perf_counter()
        try:
            detail, ok = check(), True
        except AssertionError as her:
            detail, ok = f"failed: {her}", False
        except Exception as her:  # noqa
            LOGGER.error(traceback.format_exc())
            detail, ok = f"{type(her).__name__}: {her}", False
        seconds = round(time.perf_counter() - start, 2)
        result = "pass" if ok else "FAIL"
        rows.append({"check": name, "result": result, "detail": detail, "seconds": seconds})

    samples = constants.SELFTEST["relation_samples"]
    attempt("relations", lambda: check_relations(samples))
    attempt("confluence", lambda: check_confluence(samples))
    attempt("algebra", lambda: check_algebra(constants.SELFTEST["algebra_samples"]))
    attempt("linear algebra", lambda: check_linalg(constants.SELFTEST["matrix_samples"]))
    attempt("complexes", check_templates)
    cache = open_cache(cache_dir)
    holder: dict[str, lp.Calibration] = {}

    def calibrate() -> str:
        holder["calibration"] = check_calibration(cache)
        return str(holder["calibration"].to_json())

    attempt("calibration", calibrate)
    checks: list[tuple[str, Callable[[lp.Calibration], str]]] = [
        (name, lambda c, n=n_pairs, t=text: check_knot(c, n, t, cache=cache))
        for name, n_pairs, text in constants.SELFTEST["knots"]
    ]
    checks.append(("symmetries", lambda c: check_symmetries(c, cache=cache)))
    for name, check in checks:
        if "calibration" not in holder:
            rows.append({"check": name, "result": "FAIL", "detail": "uncalibrated", "seconds": 0})
            continue
        attempt(name, lambda check=check: check(holder["calibration"]))
    frame = pd.DataFrame(rows)
    out.write(frame.to_markdown(index=False) + "\n")
    return EXIT["ok"] if all(r["result"] == "pass" for r in rows) else 1


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.debug:
        set_debug()
    if args.version:
        print(f"platkh {constants.get_app_version()}")
        return EXIT["ok"]
    if args.command == "selftest":
        return selftest(cache_dir=args.cache or None)
    try:
        config = config_from_args(args)
    except ValueError as her:
        LOGGER.error(f"{her}")
        return EXIT["parse"]
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
