import json
import os

import pytest

import libcomplex as lc
import libklrw as kl
import liblinalg as la
import libplat as lp
from libcomplex import ChainCache, ChainComplex, Term
from libklrw import Layout

CUP = Layout.cups(1)


def test_cup_complex_is_a_complex():
    C = lp.cup_complex(1)
    lc.validate(C)
    assert len(C) == 4
    assert C.hdegs() == [0, 1, 2]
    assert len(lp.cup_complex(2)) == 16


def test_entry_must_raise_hdeg_by_one():
    terms = [Term(CUP, hdeg=0), Term(CUP, hdeg=0)]
    with pytest.raises(lc.ComplexError, match="hdeg"):
        ChainComplex(1, terms, {(0, 1): kl.identity(CUP)})


def test_entry_must_match_the_grade_shift():
    terms = [Term(CUP, hdeg=0), Term(CUP, hdeg=1)]
    with pytest.raises(lc.ComplexError, match="grade"):
        ChainComplex(1, terms, {(0, 1): kl.dot(CUP, 1)})
    shifted = [Term(CUP, hdeg=0), Term(CUP, kl.DOT_GRADE, 1)]
    assert ChainComplex(1, shifted, {(0, 1): kl.dot(CUP, 1)}).size() == (2, 1)


def test_shift_moves_every_term():
    C = lc.shift(lp.cup_complex(1), 2, kl.U_GRADE)
    assert C.hdegs() == [2, 3, 4]
    assert all(t.shift.hbar >= 1 for t in C.terms)


def test_cone_of_the_identity_is_contractible():
    C = ChainComplex.single(Term(CUP))
    cone = lc.cone(lc.identity_map(C))
    assert [t.hdeg for t in cone.terms] == [-1, 0]
    hom = lc.hom_eval_simple(cone)
    assert hom.gens == ((-1, -2), (0, -2))
    assert hom.homology() == {}
    assert hom.euler() == {}


def test_direct_sum_keeps_both_differentials():
    A = lp.cup_complex(1)
    total = lc.direct_sum(A, A)
    assert total.size() == (8, 2 * A.size()[1])
    lc.validate(total)


def test_hom_graded_rejects_bad_maps():
    with pytest.raises(lc.ComplexError, match="lower h"):
        lc.HomGraded([(0, 0), (0, 0)], {(0, 1): 1})
    with pytest.raises(lc.ComplexError, match="J-homogeneous"):
        lc.HomGraded([(1, 0), (0, 2)], {(0, 1): 1})


def test_hom_graded_homology():
    # ℤ --2--> ℤ at J = 0
    hom = lc.HomGraded([(1, 0), (0, 0)], {(0, 1): 2})
    assert hom.homology() == {(0, 0): la.HomologyGroup(0, (2,))}
    assert hom.euler() == {}


def test_chain_cache_round_trip(cache_dir):
    cache = ChainCache(cache_dir)
    C = lp.cup_complex(1)
    key = ChainCache.key({"test": 1})
    assert cache.get(key) is None
    cache.put(key, C)
    again = cache.get(key)
    assert again is not None
    assert again.digest() == C.digest()


def test_chain_cache_ignores_other_formats(cache_dir):
    key = ChainCache.key("old")
    with open(os.path.join(cache_dir, f"{key}.json"), "w", encoding="utf-8") as fp:
        json.dump({"format": 0}, fp)
    assert ChainCache(cache_dir).get(key) is None


def test_disabled_cache_stores_nothing():
    cache = ChainCache(None)
    cache.put("anything", lp.cup_complex(1))
    cache.save_json("x.json", {"a": 1})
    assert cache.get("anything") is None
    assert cache.load_json("x.json") is None


def test_chain_cache_json_files(cache_dir):
    cache = ChainCache(cache_dir)
    cache.save_json("calibration.json", {"format": 1})
    assert cache.load_json("calibration.json") == {"format": 1}
    assert cache.load_json("missing.json") is None


def test_simplify_cancels_identity_entries():
    cone = lc.cone(lc.identity_map(ChainComplex.single(Term(CUP))))
    assert len(lc.simplify(cone)) == 0
    C = lp.cup_complex(1)
    assert lc.simplify(C) is C


def test_product_of_cups_squares_to_zero():
    C = lp.cup_complex(2)
    lc.validate(C)
    assert C.hdegs() == [0, 1, 2, 3, 4]


def test_graded_piece_of_a_contractible_complex_is_exact():
    cone = lc.cone(lc.identity_map(ChainComplex.single(Term(CUP))))
    piece = lc.graded_piece_complex(cone, CUP, kl.ZERO_GRADE)
    assert piece.dims == {-1: 1, 0: 1}
    assert piece.is_exact()


def test_save_json_replaces_the_file_in_one_step(cache_dir, monkeypatch):
    cache = ChainCache(cache_dir)
    cache.save_json("calibration.json", {"format": 1})
    assert os.listdir(cache_dir) == ["calibration.json"]

    def broken(*args, **kwargs):
        raise ValueError("disk full")

    monkeypatch.setattr(lc.json, "dump", broken)
    with pytest.raises(ValueError, match="disk full"):
        cache.save_json("calibration.json", {"format": 2})
    assert cache.load_json("calibration.json") == {"format": 1}


def test_cup_factor_entries():
    C = lp.cup_factor(2, 1)
    theta = Layout(2, (0, 0, 0, 1, 0))
    minus, plus = Layout(2, (0, 0, 1, 0, 0)), Layout(2, (0, 0, 0, 0, 1))
    assert [t.obj for t in C.terms] == [theta, minus, plus, theta]
    assert C.entry(0, 1) == -kl.red_cross(theta, 3, -1)
    assert C.entry(0, 2) == kl.red_cross(theta, 4, 1)
    assert C.entry(1, 3) == kl.red_cross(minus, 3, 1)
    assert C.entry(2, 3) == kl.red_cross(plus, 4, -1)
    with pytest.raises(ValueError):
        lp.cup_factor(2, 2)


@pytest.mark.parametrize("flip", [(0, 1), (0, 2), (1, 3), (2, 3)])
def test_cup_factor_with_a_flipped_sign_is_rejected(flip):
    C = lp.cup_factor(1, 0)
    entries = dict(C.entries)
    entries[flip] = -entries[flip]
    mutated = ChainComplex(1, C.terms, entries)
    with pytest.raises(lc.ComplexError):
        lc.validate(mutated)
