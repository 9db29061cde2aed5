from __future__ import annotations

import pytest

from stonegpd import catalog
from stonegpd.duality import stable_opens
from stonegpd.errors import VerificationError
from stonegpd.logic.parser import parse_in_context
from stonegpd.logic.syntax import CoherenceError, SortCheckError
from stonegpd.logical import logical_groupoid
from stonegpd.sheaves import (EquivariantSheaf, basic_open_sheaf, check_action_axioms, check_formal_conditions,
                              coproduct_sheaf, cover_by_definables, decompose_stable_open, definable_sheaf,
                              equalizer, extension, identity_morphism, identity_witness, image, is_stable,
                              product_sheaf, stabilize, stabilize_formula, subsheaf, terminal_sheaf)
from stonegpd.topology import FiniteTopology, bits
from stonegpd.verify import decomposition_suite, stabilization_suite


def F(g, text):
    return parse_in_context(text, g.theory.signature)


@pytest.fixture(scope="module")
def V(teq2):
    return definable_sheaf(teq2, F(teq2, "[x:V | true]"))


@pytest.fixture(scope="module")
def NE(teq2):
    return definable_sheaf(teq2, F(teq2, "[x:V, y:V | x != y]"))


def test_definable_sheaf_points(V, NE):
    assert V.points == ((1, 0), (2, 1), (3, 0), (3, 1))
    assert NE.points == ((3, (0, 1)), (3, (1, 0)))
    assert [len(V.fibers[x]) for x in range(4)] == [0, 1, 1, 2]


def test_definable_sheaf_topology(V):
    # a section through (M, a) extends to every larger model containing a
    assert V.top.nbhd == (0b0101, 0b1010, 0b0100, 0b1000)


def test_definable_sheaf_is_a_sheaf(V, NE, graph2):
    assert check_action_axioms(V).ok
    assert check_action_axioms(NE).ok
    for f in catalog.tracked(graph2.theory):
        assert check_action_axioms(definable_sheaf(graph2, f)).ok


def test_definable_sheaf_rejections(teq2):
    bare = logical_groupoid(catalog.load("t_eq"), 2)
    with pytest.raises(CoherenceError):
        definable_sheaf(teq2, parse_in_context("[x:V | forall y:V. x = y]", teq2.theory.signature))
    g0 = bare.with_topology(None, None)
    with pytest.raises(ValueError):
        definable_sheaf(g0, F(bare, "[x:V | true]"))


def test_extension_and_basic_opens(teq2, V):
    assert extension(V, F(teq2, "[x:V | exists y:V. x != y]")) == 0b1100
    psi = F(teq2, "[x:V, y:V | x = y]")
    assert basic_open_sheaf(V, psi, (1,)) == 0b1010
    with pytest.raises(SortCheckError):
        basic_open_sheaf(V, psi, (0, 1))


def test_stabilize_is_the_orbit_closure(V):
    assert stabilize(V, 0b0001) == 0b0011
    assert stabilize(V, 0b0100) == 0b1100
    assert is_stable(V, 0b1100) and not is_stable(V, 0b0100)


def test_stabilize_formula_shape(teq2):
    xi = stabilize_formula(F(teq2, "[x:V | true]"), F(teq2, "[x:V, y:V | x != y]"), (1,),
                           teq2.theory.signature)
    assert str(xi) == "[x:V | exists y:V. x != y]"


def test_stabilize_formula_merges_and_separates(teq2):
    sig = teq2.theory.signature
    psi = F(teq2, "[x:V, y:V, z:V | x != y & x != z]")
    merged = stabilize_formula(F(teq2, "[x:V | true]"), psi, (1, 1), sig)
    assert "z" not in str(merged)
    apart = stabilize_formula(F(teq2, "[x:V | true]"), psi, (0, 1), sig)
    assert "y != z" in str(apart)


def test_stabilize_formula_rejects_bad_input(teq2):
    sig = teq2.theory.signature
    with pytest.raises(SortCheckError):
        stabilize_formula(F(teq2, "[x:V | true]"), F(teq2, "[x:V, y:V | x != y]"), (), sig)
    with pytest.raises(CoherenceError):
        psi = parse_in_context("[x:V, y:V | not x = y]", sig)
        stabilize_formula(F(teq2, "[x:V | true]"), psi, (0,), sig)


def test_stabilization_matches_orbit_closure(teq2, graph2):
    for g in (teq2, graph2):
        rep = stabilization_suite(g, catalog.tracked(g.theory))
        assert rep.ok, rep.lines()
        assert rep["stabilization-oracle"].note.split("/")[0] == rep["stabilization-oracle"].note.split("/")[1]


def test_stable_opens_of_V(V):
    assert stable_opens(V) == [0, 0b1100, 0b1111]


def test_decomposition_examples(teq2, V):
    assert [str(f) for f in decompose_stable_open(V, 0)] == ["[x:V | false]"]
    assert [str(f) for f in decompose_stable_open(V, V.full)] == ["[x:V | true]"]
    parts = decompose_stable_open(V, 0b1100)
    assert len(parts) == 1 and extension(V, parts[0]) == 0b1100


def test_decomposition_rejects_unstable_or_closed(V):
    with pytest.raises(VerificationError, match="stable"):
        decompose_stable_open(V, 0b0100)
    with pytest.raises(VerificationError, match="open"):
        decompose_stable_open(V, 0b0011)


def test_decomposition_is_exact(teq2, graph2):
    for g in (teq2, graph2):
        assert decomposition_suite(g, catalog.tracked(g.theory)).ok


def test_cover_by_definables(teq2, NE, V):
    cover = cover_by_definables(NE, teq2)
    assert [m.label for m in cover] == ["[x0:V, x1:V | x0 != x1]"]
    for sh in (V, NE):
        union = 0
        for m in cover_by_definables(sh, teq2):
            assert m.check().ok
            union |= m.image_mask()
        assert union == sh.full


def test_formal_conditions_hold_for_definables(V, NE):
    for sh in (V, NE):
        rep = check_formal_conditions(sh)
        assert rep.ok, rep.lines()


def test_indiscrete_fiber_is_not_decidable(V):
    # both points over {0,1} glued together
    nb = (0b1101, 0b1110, 0b1100, 0b1100)
    bad = EquivariantSheaf(V.base, V.points, FiniteTopology(4, nb), V.action, "glued", universe=2)
    rep = check_formal_conditions(bad)
    assert not rep["(i) decidable"].ok
    assert rep["(i) decidable"].witness["points"] == [2, 3]
    assert not check_action_axioms(bad)["local homeomorphism"].ok


def test_values_outside_universe(V, NE):
    rep = check_formal_conditions(V, universe=1)
    assert not rep["(ii) fibers in universe"].ok
    assert check_formal_conditions(V, mode="atoms").ok
    assert not check_formal_conditions(NE, mode="atoms")["(ii) fibers in universe"].ok
    with pytest.raises(ValueError):
        check_formal_conditions(V, mode="bags")


def test_wrong_fiber_action_is_caught(V):
    action = dict(V.action)
    g = next(a for a in range(V.base.n_arrows) if V.base.src[a] == 1 and V.base.tgt[a] == 2)
    action[(g, 0)] = 0
    bad = EquivariantSheaf(V.base, V.points, V.top, action, "bad", universe=2)
    rep = check_action_axioms(bad)
    assert not rep["compatibility"].ok
    assert rep["compatibility"].witness["arrow"] == g


def test_products_and_coproducts(V, NE):
    p, p1, p2 = product_sheaf(V, V)
    assert len(p) == 6 and check_action_axioms(p).ok
    assert p1.check().ok and p2.check().ok
    c, i1, i2 = coproduct_sheaf(V, NE)
    assert len(c) == len(V) + len(NE) and check_action_axioms(c).ok
    assert i1.check().ok and i2.check().ok


def test_terminal_sheaf(teq2):
    one = terminal_sheaf(teq2.gpd, 2)
    assert len(one) == teq2.n_objects and check_action_axioms(one).ok


def test_subsheaf_equalizer_image(V):
    s, incl = subsheaf(V, 0b1100)
    assert incl.check().ok and incl.is_injective()
    with pytest.raises(VerificationError):
        subsheaf(V, 0b0100)
    ident = identity_morphism(V)
    e, _ = equalizer(ident, ident)
    assert len(e) == len(V)
    im, _ = image(incl)
    assert bits(incl.image_mask()) == [2, 3] and len(im) == 2


def test_identity_witness(teq2, V):
    again = definable_sheaf(teq2, F(teq2, "[y:V | true]"))
    assert identity_witness(V, again) == (0, 1, 2, 3)
    assert identity_witness(V, definable_sheaf(teq2, F(teq2, "[x:V | exists y:V. x != y]"))) is None


def test_sheaf_json(V):
    data = V.to_json()
    assert len(data["points"]) == 4
