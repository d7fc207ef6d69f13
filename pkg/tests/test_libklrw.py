import pytest

import libklrw as kl
from libklrw import Layout
from libpoly import Poly2

U = Poly2.monomial(1, 0)
HBAR = Poly2.monomial(0, 1)
TWO = Layout(1, (0, 2, 0))


def test_layout_validation():
    with pytest.raises(kl.KlrwError):
        Layout(1, (0, 1))
    with pytest.raises(kl.KlrwError):
        Layout(1, (0, -1, 0))
    assert Layout.cups(2).counts == (0, 1, 0, 1, 0)
    assert Layout.from_segments(2, [3, 1, 3]).counts == (0, 1, 0, 2, 0)


def test_layout_slots():
    layout = Layout(2, (1, 0, 2, 0, 1))
    assert layout.segment_of(1) == 0
    assert layout.segment_of(3) == 2
    assert layout.segments() == (0, 2, 2, 4)
    assert layout.first_slot(4) == 3
    with pytest.raises(kl.KlrwError):
        layout.segment_of(5)


def test_black_bigon_vanishes():
    assert not kl.from_events(TWO, [("bb", 1), ("bb", 1)])


def test_dot_slide():
    slide = kl.from_events(TWO, [("dot", 1), ("bb", 1)]) - kl.from_events(
        TWO, [("bb", 1), ("dot", 2)]
    )
    assert slide == kl.identity(TWO).scale(HBAR)


def test_mirrored_dot_slide():
    slide = kl.from_events(TWO, [("bb", 1), ("dot", 1)]) - kl.from_events(
        TWO, [("dot", 2), ("bb", 1)]
    )
    assert slide == kl.identity(TWO).scale(HBAR)


def test_crossing_moves_past_a_red_point_at_the_cost_of_u_hbar():
    layout = Layout(1, (1, 1, 0))
    right = kl.from_events(layout, [("rb", 1, 1), ("bb", 1), ("rb", 1, -1)])
    left = kl.from_events(layout, [("rb", 1, -1), ("bb", 1), ("rb", 1, 1)])
    assert right - left == kl.identity(layout).scale(U * HBAR)


def test_red_bigon_is_u_times_dot():
    layout = Layout(1, (1, 0, 0))
    bigon = kl.from_events(layout, [("rb", 1, 1), ("rb", 1, -1)])
    assert bigon == kl.dot(layout, 1).scale(U)
    assert not bigon.identity_coefficient()


def test_crossing_through_a_red_point_is_rejected():
    with pytest.raises(kl.KlrwError):
        kl.from_events(Layout(1, (1, 1, 0)), [("bb", 1)])
    with pytest.raises(kl.KlrwError):
        kl.red_cross(Layout(1, (0, 0, 1)), 1, 1)


def test_compose_needs_matching_objects():
    with pytest.raises(kl.ObjectMismatchError):
        kl.compose(kl.identity(TWO), kl.identity(Layout.cups(1)))


def test_identity_is_a_unit():
    one = kl.identity(TWO)
    assert one.is_unit() == 1
    assert (-one).is_unit() == -1
    assert kl.dot(TWO, 1).is_unit() == 0
    assert kl.compose(one, kl.dot(TWO, 2)) == kl.dot(TWO, 2)


def test_grades():
    assert kl.identity(TWO).grades() == {kl.ZERO_GRADE}
    assert kl.dot(TWO, 1).grades() == {kl.DOT_GRADE}
    assert kl.dot(TWO, 1).scale(U).grades() == {kl.DOT_GRADE + kl.U_GRADE}


def test_split_normalisation_agrees():
    events = (("dot", 1), ("bb", 1), ("dot", 2), ("bb", 1), ("dot", 1))
    word = kl.SliceWord(TWO, TWO, events)
    assert kl.normalize(word) == kl.normalize(word, "split")


def test_slice_word_must_reach_its_top():
    word = kl.SliceWord(Layout(1, (1, 0, 0)), Layout(1, (1, 0, 0)), (("rb", 1, 1),))
    with pytest.raises(kl.KlrwError):
        word.check()


def test_lincomb_json():
    value = kl.dot(TWO, 1).scale(U) + kl.identity(TWO).scale(3)
    assert kl.LinComb.from_json(TWO, TWO, value.to_json()) == value


def test_render_lists_events_top_down():
    word = kl.SliceWord(Layout(1, (1, 0, 0)), Layout(1, (0, 1, 0)), (("rb", 1, 1),))
    picture = kl.render(word)
    assert picture.splitlines() == [". | o | .    rb 1 1", "o | . | .    (bottom)"]


def test_basis_in_degree():
    # degree zero holds ħ^{-1} times a dotted crossing besides the identity
    assert kl.basis_in_degree(TWO, TWO, kl.ZERO_GRADE) == (
        (kl.NormalDiagram.identity(TWO), (0, 0)),
        (kl.NormalDiagram(TWO, TWO, (1, 0), (0, 0), (0, 1)), (0, -1)),
        (kl.NormalDiagram(TWO, TWO, (1, 0), (0, 0), (1, 0)), (0, -1)),
    )
    dotted = kl.basis_in_degree(TWO, TWO, kl.DOT_GRADE)
    assert sorted(d.dots for d, _ in dotted if d.matching == (0, 1)) == [(0, 1), (1, 0)]
    assert all(ab == (0, -1) for d, ab in dotted if d.matching == (1, 0))
    assert kl.basis_in_degree(TWO, Layout.cups(1), kl.ZERO_GRADE) == ()


def test_full_wind_grade_on_one_strand():
    layout = Layout(1, (1, 0, 0))
    wind = kl.full_wind(layout)
    assert wind.grades() == {kl.GradeVector(2, 2, 0, 1)}
    (diagram,) = wind.terms
    assert diagram.slice_word().events == (("phi", -1), ("rb", 2, -1), ("rb", 1, -1))
    assert kl.full_wind(layout, -1).grades() == {kl.GradeVector(2, 2, 0, -1)}


def test_winding_strand_among_two():
    wind = kl.full_wind(TWO, 1, slot=0)
    (diagram,) = wind.terms
    word = diagram.slice_word()
    word.check()
    assert word.events == (("rb", 1, -1), ("phi", -1), ("rb", 2, -1), ("bb", 1))
    assert wind.grades() == {kl.GradeVector(0, 2, 1, 1)}
    assert kl.normalize(word) == wind
    assert kl.normalize(word, "split") == wind
    with pytest.raises(kl.KlrwError):
        kl.full_wind(TWO, 1, slot=2)


def test_windings_of_two_strands_are_distinct():
    first = kl.full_wind(TWO, 1, slot=0)
    second = kl.full_wind(TWO, 1, slot=1)
    assert first != second
    assert first.grades() == second.grades()
    winding_piece = kl.basis_in_degree(TWO, TWO, kl.GradeVector(0, 2, 1, 1), planar=False)
    windings = {d.windings for d, _ in winding_piece}
    assert windings == {(1, 0), (0, 1)}


def _word(bottom, events):
    top = kl.SliceWord(bottom, bottom, tuple(events)).replay()
    return kl.SliceWord(bottom, top, tuple(events))


LOWER = _word(Layout(1, (1, 1, 0)), [("rb", 1, 1), ("dot", 1)])
MIDDLE = _word(LOWER.top, [("bb", 1), ("dot", 2)])
UPPER = _word(MIDDLE.top, [("rb", 2, 1), ("rb", 1, -1), ("dot", 2)])


def test_composition_is_associative():
    f, g, h = (kl.normalize(w) for w in (LOWER, MIDDLE, UPPER))
    assert kl.compose(kl.compose(h, g), f) == kl.compose(h, kl.compose(g, f))


def test_composition_adds_grades():
    f, g, h = (kl.normalize(w) for w in (LOWER, MIDDLE, UPPER))
    grade = LOWER.grade() + MIDDLE.grade() + UPPER.grade()
    assert kl.compose(h, kl.compose(g, f)).grades() == {grade}
    assert grade == kl.RB_GRADE.times(3) + kl.BB_GRADE + kl.DOT_GRADE.times(3)


def test_normal_form_acts_like_the_raw_word():
    word = LOWER.then(MIDDLE).then(UPPER)
    assert kl.realize(kl.normalize(word)) == kl.word_operator(word)
    assert kl.realize(kl.normalize(word, "split")) == kl.word_operator(word)
