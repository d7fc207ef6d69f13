import pytest

import libkhcube as kc
import libplat as lp
from liblinalg import HomologyGroup
from libplat import ResourceAbort

Z = HomologyGroup(1, ())
Z2 = HomologyGroup(2, ())
T2 = HomologyGroup(0, (2,))


def oracle(n_pairs, text):
    return kc.oracle_table(lp.parse_word(text, n_pairs))


def test_unknot():
    assert oracle(1, "").groups == {(0, -1): Z, (0, 1): Z}


def test_unlink():
    expected = {(0, -2): Z, (0, 0): Z2, (0, 2): Z}
    assert oracle(2, "").groups == expected
    # Reidemeister II
    assert oracle(2, "s2 S2").groups == expected


def test_reidemeister_one():
    assert oracle(2, "s2").groups == oracle(1, "").groups
    assert oracle(2, "S2").groups == oracle(1, "").groups


def test_right_trefoil():
    table = oracle(2, "s2 s2 s2")
    assert table.groups == {(0, 1): Z, (0, 3): Z, (2, 5): Z, (3, 7): T2, (3, 9): Z}
    assert lp.jones(table) == {1: 1, 3: 1, 5: 1, 9: -1}


def test_left_trefoil_is_the_mirror():
    table = oracle(2, "S2 S2 S2")
    assert table.groups == {
        (-3, -9): Z,
        (-2, -7): T2,
        (-2, -5): Z,
        (0, -3): Z,
        (0, -1): Z,
    }
    assert lp.dual_table(oracle(2, "s2 s2 s2")).same_groups(table)


def test_hopf_links():
    negative = oracle(2, "s2 s2")
    assert negative.groups == {(-2, -6): Z, (-2, -4): Z, (0, -2): Z, (0, 0): Z}
    positive = oracle(2, "S2 S2")
    assert positive.groups == {(0, 0): Z, (0, 2): Z, (2, 4): Z, (2, 6): Z}
    assert positive.total_rank() == 4


def test_figure_eight():
    table = oracle(3, "s2 s2 S1 s2 s4")
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


def test_stabilisation_keeps_the_link():
    word = lp.parse_word("s2 s2 s2", 2)
    assert kc.oracle_table(lp.stabilize(word)).same_groups(kc.oracle_table(word))


@pytest.mark.parametrize(
    "n_pairs, text",
    [(1, ""), (2, "s2 s2"), (2, "s2 s2 s2"), (2, "s1 s2 S3 s2"), (3, "s2 s2 S1 s2 s4")],
)
def test_euler_characteristic_is_the_jones_polynomial(n_pairs, text):
    diagram = kc.plat_to_diagram(lp.parse_word(text, n_pairs))
    table = kc.cube_homology(diagram, text)
    assert lp.euler_characteristic(table) == kc.kauffman_jones(diagram)


def test_diagram_of_the_trefoil():
    diagram = kc.plat_to_diagram(lp.parse_word("s2 s2 s2", 2))
    assert diagram.height == 3
    assert kc.writhe(diagram) == 3
    assert kc.components(diagram) == 1
    assert diagram.signs() == (3, 0)


def test_hopf_link_has_two_components():
    diagram = kc.plat_to_diagram(lp.parse_word("s2 s2", 2))
    assert kc.components(diagram) == 2
    assert kc.writhe(diagram) == -2


def test_crossing_limit():
    word = lp.parse_word(" ".join(["s1"] * 15), 1)
    diagram = kc.plat_to_diagram(word)
    with pytest.raises(ResourceAbort):
        kc.cube_homology(diagram)
    with pytest.raises(ResourceAbort):
        kc.kauffman_jones(diagram)
