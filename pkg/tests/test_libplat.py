import json
from fractions import Fraction

import pytest

import libbraid as lb
import libkhcube as kc
import libplat as lp
from libbraid import BraidWord, HalfTwist
from libcomplex import ChainCache
from liblinalg import HomologyGroup
from libplat import Calibration, CalibrationError, KhTable, WordParseError

Z = HomologyGroup(1, ())
T2 = HomologyGroup(0, (2,))

TREFOIL = {(0, 1): Z, (0, 3): Z, (2, 5): Z, (3, 7): T2, (3, 9): Z}


def test_parse_word():
    word = lp.parse_word("s1  S2\ts3^-1 S1^-1", 2)
    assert word.twists == (HalfTwist(1, 1), HalfTwist(2, -1), HalfTwist(3, -1), HalfTwist(1, 1))
    assert lp.parse_word("", 3) == BraidWord(3)
    assert lp.parseWord("s1", 1).text() == "s1"


def test_parse_word_index_out_of_range():
    with pytest.raises(WordParseError, match="valid range is 1..3") as caught:
        lp.parse_word("s1 s9", 2)
    assert caught.value.position == 2
    assert caught.value.token == "s9"


@pytest.mark.parametrize("text", ["x1", "s", "s0", "s1^2", "s-1"])
def test_parse_word_rejects_bad_tokens(text):
    with pytest.raises(WordParseError) as caught:
        lp.parse_word(f"s1 {text}", 2)
    assert caught.value.position == 2


def test_parse_word_needs_a_pair():
    with pytest.raises(WordParseError):
        lp.parse_word("", 0)


def test_word_operations():
    word = lp.parse_word("s1 S2", 2)
    assert lp.mirror(word).text() == "S1 s2"
    assert lp.stabilize(word) == BraidWord(3, word.twists + (HalfTwist(4, 1),))
    assert lp.twisted_word(word, 1).text() == "s2 S1"
    assert lp.twisted_word(word, -1).text() == "S2 s1"


def test_orientation():
    signs, count = lp.orientation(lp.parse_word("s2 s2 s2", 2))
    assert signs == (1, 1, 1)
    assert count == 1
    signs, count = lp.orientation(lp.parse_word("s2 s2", 2))
    assert count == 2
    assert sum(signs) == -2
    assert lp.orientation(lp.parse_word("", 2)) == ((), 2)


def test_features():
    assert lp.features(lp.parse_word("", 1)) == (1, 0, 0, 1)
    # both crossings of the Hopf link join strands running opposite ways
    assert lp.features(lp.parse_word("s2 s2", 2)) == (1, 2, 2, 2)
    assert lp.features(lp.parse_word("S2 S2", 2)) == (1, -2, -2, 2)
    assert lp.features(lp.parse_word("S2 S2 S2", 2)) == (1, -3, 0, 2)


def test_format_laurent():
    assert lp.format_laurent({-1: 1, 1: 1}) == "q^-1 + q"
    assert lp.format_laurent({0: 2, 1: -1}) == "2 - q"
    assert lp.format_laurent({3: -2}) == "-2q^3"
    assert lp.format_laurent({}) == "0"
    assert lp.format_laurent({2: 1}, var="t") == "t^2"


def test_table_drops_zero_groups_and_sorts_torsion():
    table = KhTable(1, "", {(1, 1): HomologyGroup(0, ()), (0, 1): HomologyGroup(0, (4, 2))})
    assert table.groups == {(0, 1): HomologyGroup(0, (2, 4))}
    assert table.torsion() == [((0, 1), 2), ((0, 1), 4)]
    assert table.total_rank() == 0


def test_euler_characteristic():
    assert lp.euler_characteristic(KhTable(1, "", {})) == {}
    table = KhTable(2, "s2 s2 s2", TREFOIL)
    assert lp.eulerCharacteristic(table) == {1: 1, 3: 1, 5: 1, 9: -1}


def test_table_json():
    table = KhTable(2, "s2 s2 s2", TREFOIL)
    data = json.loads(table.dumps())
    assert sorted(data) == ["calibrated", "calibration", "groups", "jones", "n", "word"]
    assert data["groups"][-1] == {"h": 3, "q": 9, "free": 1, "torsion": []}
    assert {"h": 3, "q": 7, "free": 0, "torsion": [2]} in data["groups"]
    assert data["jones"][0] == {"exp": 1, "coef": 1}
    assert KhTable.from_json(data).same_groups(table)


def test_table_json_keeps_raw_bidegrees():
    cal = Calibration(1, Fraction(0), 1, 1, (0, 0, 0, 0), (1, 0, 0, 0))
    table = KhTable(1, "", {(0, 1): Z}, True, cal, {(0, 1): (0, 0)})
    data = table.to_json()
    assert data["groups"][0]["raw_h"] == 0
    assert data["groups"][0]["raw_j"] == 0
    again = KhTable.from_json(data)
    assert again.raw == {(0, 1): (0, 0)}
    assert again.calibration == cal


def test_table_text():
    table = KhTable(2, "s2 s2 s2", TREFOIL)
    frame = table.to_frame()
    assert list(frame.index) == [9, 7, 5, 3, 1]
    assert list(frame.columns) == [0, 2, 3]
    assert frame.loc[7, 3] == "Z/2"
    assert frame.loc[3, 0] == "Z"
    text = table.to_text()
    assert text.startswith("n=2 word='s2 s2 s2'")
    assert text.endswith("jones: q + q^3 + q^5 - q^9")
    assert KhTable(1, "s1", {}).to_text().endswith("(zero)")


def test_dual_table():
    dual = lp.dual_table(KhTable(2, "s2 s2 s2", TREFOIL))
    assert dual.groups == {
        (-3, -9): Z,
        (-2, -7): T2,
        (-2, -5): Z,
        (0, -3): Z,
        (0, -1): Z,
    }


def test_calibration_maps():
    cal = Calibration(-1, Fraction(1, 2), 2, 1, (1, 0, 0, 0), (0, 1, 0, 1))
    assert cal.linear(1, 3) is None
    assert cal.linear(1, 2) == (0, 4)
    assert cal.offsets((1, 3, 3, 2)) == (1, 5)
    assert cal.apply(1, 2, (1, 3, 3, 2)) == (1, 9)
    assert Calibration.from_json(json.loads(json.dumps(cal.to_json()))) == cal


def test_apply_calibration_rejects_collisions():
    raw = KhTable(1, "", {(0, 0): Z, (1, 0): Z}, calibrated=False)
    squash = Calibration(1, Fraction(0), 1, 1, (0, 0, 0, 0), (0, 0, 0, 0))
    assert lp.apply_calibration(raw, squash, BraidWord(1)).groups == raw.groups
    bad = Calibration(0, Fraction(0), 1, 1)
    with pytest.raises(CalibrationError):
        lp.apply_calibration(raw, bad, BraidWord(1))


# calibration search -------------------------------------------------------------------

GRID = {"chis": [1], "epsilons": [1], "alphas": ["0"], "scales": [1]}
ORACLE = {(0, -1): Z, (0, 1): Z}


def _samples(texts):
    return [(lp.parse_word(t, n), KhTable(n, t, ORACLE)) for n, t in texts]


def _raw(word, chi):
    # every raw table sits one q-step below its oracle
    return KhTable(word.n_pairs, word.text(), {(h, q - 1): g for (h, q), g in ORACLE.items()})


def test_calibrate_needs_samples():
    with pytest.raises(CalibrationError, match="at least one"):
        lp.calibrate([], raw_of=_raw, grid=GRID)


def test_calibrate_finds_the_unique_map():
    samples = _samples(lp.constants.CALIBRATION["samples"])
    cal = lp.calibrate(samples, raw_of=_raw, grid=GRID)
    assert cal == Calibration(1, Fraction(0), 1, 1, (0, 0, 0, 0), (1, 0, 0, 0))


def test_calibrate_with_too_few_samples_is_ambiguous():
    with pytest.raises(CalibrationError, match="ambiguous"):
        lp.calibrate(_samples([(1, "")]), raw_of=_raw, grid=GRID)


def test_calibrate_without_a_match():
    def raw(word, chi):
        return KhTable(word.n_pairs, word.text(), {(0, 0): Z})

    with pytest.raises(CalibrationError, match="no calibration"):
        lp.calibrate(_samples([(1, "")]), raw_of=raw, grid=GRID)


def test_calibration_cache(cache_dir, monkeypatch):
    monkeypatch.setitem(lp.constants.CALIBRATION, "frozen", None)
    cache = ChainCache(cache_dir)
    assert lp.load_calibration(cache) is None
    cal = Calibration(1, Fraction(1, 2), -1, -1, (1, 2, 3, 4), (0, 0, 0, 1))
    lp.save_calibration(cache, cal)
    assert lp.load_calibration(cache) == cal
    assert lp.load_calibration(None) is None


def test_frozen_calibration_wins(cache_dir, monkeypatch):
    cal = Calibration(1, Fraction(0), 1, 1, (0, 0, 0, 0), (0, 0, 0, 0))
    monkeypatch.setitem(lp.constants.CALIBRATION, "frozen", cal.to_json())
    assert lp.load_calibration(None) == cal


def test_sample_words():
    words = lp.sample_words()
    assert [w.n_pairs for w in words] == [1, 2, 2, 2, 2]
    assert words[3].text() == "s2 s2 s2"


# the plat computation --------------------------------------------------------------


def test_cup_complex_sizes():
    assert len(lp.cup_complex(1)) == 4
    assert len(lp.cupComplex(2)) == 16
    with pytest.raises(ValueError):
        lp.cup_complex(0)


def test_unknot_raw_table():
    raw = lp.khovanov(lp.parse_word("", 1))
    assert not raw.calibrated
    assert raw.groups == {(0, 0): Z, (2, -2): Z}


def test_braided_cups_reports_steps():
    records = []
    lp.braided_cups(lp.parse_word("s1 s1", 1), on_step=records.append)
    assert [r["step"] for r in records] == [1, 2]
    assert [r["twist"] for r in records] == ["S1", "S1"]
    assert set(records[0]) == {"step", "twist", "terms", "entries", "ms"}


def test_term_budget_aborts_before_a_step():
    with pytest.raises(lp.ResourceAbort, match="starts from 16 terms") as caught:
        lp.braided_cups(lp.parse_word("s2 s2 s2", 2), budget=1)
    assert caught.value.telemetry == []


def test_term_budget_checks_the_size_after_a_step(monkeypatch):
    monkeypatch.setattr(lb, "apply_twist", lambda C, twist: lp.cup_complex(2))
    with pytest.raises(lp.ResourceAbort, match="produced 16 terms") as caught:
        lp.braided_cups(lp.parse_word("s1", 1), budget=10)
    assert [r["terms"] for r in caught.value.telemetry] == [16]


def test_braided_cups_are_cached(cache_dir):
    cache = ChainCache(cache_dir)
    word = lp.parse_word("s2", 2)
    first = lp.braided_cups(word, cache=cache)
    second = lp.braided_cups(word, cache=cache)
    assert first.digest() == second.digest()


@pytest.mark.slow
def test_threads_do_not_change_the_table():
    word = lp.parse_word("s2 s2 s2", 2)
    assert lp.khovanov(word, threads=1).dumps() == lp.khovanov(word, threads=4).dumps()


FROZEN = Calibration.from_json(lp.constants.CALIBRATION["frozen"])


def test_frozen_calibration_on_trivial_plats():
    unknot = lp.compute(lp.parse_word("", 1), FROZEN)
    assert unknot.groups == {(0, -1): Z, (0, 1): Z}
    unlink = lp.compute(lp.parse_word("", 2), FROZEN)
    assert unlink.groups == {(0, -2): Z, (0, 0): HomologyGroup(2, ()), (0, 2): Z}


@pytest.mark.slow
@pytest.mark.parametrize(
    "n_pairs, text",
    [
        (1, "s1"),
        (1, "S1"),
        (2, "s2"),
        (2, "s2 s2"),
        (2, "S2 S2"),
        (2, "s2 S2"),
        (2, "s1 s3"),
        (2, "s2 s2 s2"),
        (2, "S2 S2 S2"),
    ],
)
def test_frozen_calibration_matches_the_cube(cache_dir, n_pairs, text):
    word = lp.parse_word(text, n_pairs)
    table = lp.compute(word, FROZEN, cache=ChainCache(cache_dir))
    assert table.same_groups(kc.oracle_table(word)), text


@pytest.mark.slow
def test_calibrating_against_the_cube_gives_the_frozen_map(cache_dir):
    samples = [(word, kc.oracle_table(word)) for word in lp.sample_words()]
    cache = ChainCache(cache_dir)
    assert lp.calibrate(samples, raw_of=lambda w, chi: lp.khovanov(w, chi, cache)) == FROZEN


@pytest.mark.slow
def test_figure_eight_through_the_whole_pipeline(cache_dir):
    word = lp.parse_word("s2 s2 S1 s2 s4", 3)
    table = lp.compute(word, FROZEN, cache=ChainCache(cache_dir))
    assert table.groups == {
        (-2, -5): Z,
        (-1, -3): T2,
        (-1, -1): Z,
        (0, -1): Z,
        (0, 1): Z,
        (1, 1): Z,
        (2, 3): T2,
        (2, 5): Z,
    }
    assert lp.jones(table) == {-5: 1, 5: 1}


@pytest.mark.slow
def test_mirror_and_stabilisation(cache_dir):
    cache = ChainCache(cache_dir)
    trefoil = lp.parse_word("s2 s2 s2", 2)
    table = lp.compute(trefoil, FROZEN, cache=cache)
    mirrored = lp.compute(lp.mirror(trefoil), FROZEN, cache=cache)
    assert mirrored.same_groups(lp.dual_table(table))
    stable = lp.compute(lp.stabilize(trefoil), FROZEN, cache=cache)
    assert stable.same_groups(table)
