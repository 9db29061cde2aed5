from __future__ import annotations

import pytest

from stonegpd import catalog
from stonegpd.duality import (CoherentFunctorData, SyntacticObject, _joined, adequacy_probe, check_functor,
                              check_triangle_identities, compose_arrows, counit_eval, form_category,
                              generator_objects, hom_set, identity_arrow, identity_functor, induced_morphism,
                              is_functional_relation, mod_functor, objects_equal, reduct, triangle_one,
                              triangle_two, unit)
from stonegpd.errors import VerificationError
from stonegpd.groupoid import GroupoidMorphism, empty_groupoid, one_point_groupoid
from stonegpd.logic.parser import parse_in_context
from stonegpd.logic.syntax import CoherenceError, FormulaInContext, SortCheckError, TOP
from stonegpd.logical import logical_groupoid
from stonegpd.sheaves import definable_sheaf
from stonegpd.verify import corrupted_unit

import oracle


def F(g, text):
    return parse_in_context(text, g.theory.signature)


# --------------------------------------------------------------------------
# the syntactic side


def test_objects_equal_is_semantic(teq2):
    assert objects_equal(F(teq2, "[x:V | true]"), F(teq2, "[x:V | x = x]"), teq2)
    assert objects_equal(F(teq2, "[x:V | exists y:V. x != y & y != x]"),
                         F(teq2, "[x:V | exists y:V. x != y]"), teq2)
    assert not objects_equal(F(teq2, "[x:V | true]"), F(teq2, "[x:V | false]"), teq2)
    with pytest.raises(SortCheckError):
        objects_equal(F(teq2, "[x:V | true]"), F(teq2, "[ | true]"), teq2)


def test_syntactic_objects_hash_by_extension(teq2):
    a = SyntacticObject(F(teq2, "[x:V | true]"), teq2)
    b = SyntacticObject(F(teq2, "[y:V | y = y]"), teq2)
    assert a == b and len({a, b}) == 1


def test_functional_relation_witness(teq2):
    one, other = F(teq2, "[x:V | true]"), F(teq2, "[y:V | true]")
    assert is_functional_relation(F(teq2, "[x:V, y:V | x = y]"), one, other, teq2)
    v = is_functional_relation(F(teq2, "[x:V, y:V | x != y]"), one, other, teq2)
    assert not v
    assert v.witness == {"model": 1, "tuple": (0,), "sequent": "phi |- exists y. sigma"}
    with pytest.raises(SortCheckError):
        is_functional_relation(F(teq2, "[x:V, y:V | x = y]"), one, one, teq2)


@pytest.mark.parametrize("src,tgt,count", [
    ("[ | false]", "[ | true]", 1),
    ("[ | true]", "[ | true]", 1),
    ("[x:V, y:V | x != y]", "[ | true]", 1),
    ("[x:V, y:V | x != y]", "[x:V | true]", 2),
    ("[x:V | true]", "[x:V | true]", 1),
    ("[x:V, y:V | x != y]", "[x:V, y:V | x != y]", 2),
    ("[ | true]", "[x:V, y:V | x != y]", 0),
])
def test_hom_set_sizes(teq2, src, tgt, count):
    arrows = hom_set(F(teq2, src), F(teq2, tgt), teq2)
    assert len(arrows) == count
    for a in arrows:
        x, y, _ = _joined(a.source, a.target)
        assert is_functional_relation(a.sigma, x, y, teq2)


def test_hom_set_counts_match_equivariant_maps(teq2, graph2):
    for g in (teq2, graph2):
        forms = catalog.tracked(g.theory)
        shs = [definable_sheaf(g, f) for f in forms]
        for i, a in enumerate(forms):
            for j, b in enumerate(forms):
                assert len(hom_set(a, b, g)) == len(oracle.equivariant_maps(shs[i], shs[j]))


def test_identity_and_composition(teq2):
    ne = F(teq2, "[x:V, y:V | x != y]")
    swap = [a for a in hom_set(ne, ne, teq2) if a.table != (0, 1)][0]
    ident = identity_arrow(ne)
    twice = compose_arrows(swap, swap)
    da = definable_sheaf(teq2, ne)
    assert induced_morphism(twice, da, da).map == (0, 1)
    assert induced_morphism(ident, da, da).map == (0, 1)
    assert induced_morphism(compose_arrows(swap, ident), da, da).map == swap.table


# --------------------------------------------------------------------------
# coherent functors and Mod


@pytest.fixture(scope="module")
def graph_to_eq():
    tg, te = catalog.load("t_graph"), catalog.load("t_eq")
    return CoherentFunctorData(tg, te, relations={"E": parse_in_context("[a:V, b:V | a != b]", te.signature)},
                               name="E=neq")


def test_translation(graph_to_eq):
    f = parse_in_context("[x:V | exists y:V. E(x, y)]", graph_to_eq.source.signature)
    assert str(graph_to_eq.translate(f)) == "[x:V | exists u1:V. x != u1]"


def test_terminal_must_map_to_terminal():
    t = catalog.load("t_eq")
    with pytest.raises(CoherenceError, match="terminal"):
        CoherentFunctorData(t, t, objects={FormulaInContext((), TOP): parse_in_context("[ | false]", t.signature)})


def test_functor_rejects_wrong_arity():
    tg, te = catalog.load("t_graph"), catalog.load("t_eq")
    with pytest.raises(SortCheckError):
        CoherentFunctorData(tg, te, relations={"E": parse_in_context("[a:V | true]", te.signature)})


def test_functor_rejects_non_coherent_images():
    tg, te = catalog.load("t_graph"), catalog.load("t_eq")
    with pytest.raises(CoherenceError):
        CoherentFunctorData(tg, te, relations={"E": parse_in_context("[a:V, b:V | not a = b]", te.signature)})


def test_mod_of_graph_to_eq(graph_to_eq, teq2, graph2):
    assert check_functor(graph_to_eq, teq2).ok
    mor, rep = mod_functor(graph_to_eq, teq2, graph2)
    assert rep.ok, rep.lines()
    # every T_EQ model becomes the complete graph on its carrier
    for i, j in enumerate(mor.f0):
        m = graph2.models[j]
        assert m.C["V"] == teq2.models[i].C["V"]
        assert len(m.rel("E")) == len(m.C["V"]) * (len(m.C["V"]) - 1)


def test_mod_of_identity_is_identity(graph2):
    mor, rep = mod_functor(identity_functor(graph2.theory), graph2, graph2)
    assert rep.ok
    assert mor.f0 == tuple(range(graph2.n_objects)) and mor.f1 == tuple(range(graph2.n_arrows))


def test_mod_reverses_composition(graph_to_eq, teq2, graph2):
    te, tg = teq2.theory, graph2.theory
    incl = CoherentFunctorData(te, tg, name="incl")
    both = incl.then(graph_to_eq)
    m_incl, _ = mod_functor(incl, graph2, teq2)
    m_f, _ = mod_functor(graph_to_eq, teq2, graph2)
    m_both, rep = mod_functor(both, teq2, teq2)
    assert rep.ok
    assert m_both.f0 == m_f.then(m_incl).f0
    assert m_both.f1 == m_f.then(m_incl).f1


def test_reduct_rejects_non_functional_graph():
    tp, te = catalog.load("t_pointed"), catalog.load("t_eq")
    bad = CoherentFunctorData(tp, te, functions={"c": parse_in_context("[r:V | true]", te.signature)})
    g = logical_groupoid(te, 2)
    with pytest.raises(VerificationError):
        reduct(bad, g.models[3])


# --------------------------------------------------------------------------
# formal sheaves


def test_form_of_one_point_groupoid():
    fc = form_category(one_point_groupoid(), 2, cap=2)
    assert len(fc.objects) == 4
    assert [len(c) for c in fc.iso_classes()] == [1, 2, 1]


def test_form_of_empty_groupoid():
    fc = form_category(empty_groupoid(), 2, cap=2)
    assert len(fc.objects) == 1 and len(fc.objects[0]) == 0


def test_form_of_teq(teq2):
    fc = form_category(teq2.gpd, 2, cap=2)
    assert (len(fc.objects), len(fc.iso_classes())) == (20, 13)
    assert fc.closure_report().ok
    assert all(m.functoriality() == [] for m in fc.classifiers)


def test_form_needs_topology(teq2):
    with pytest.raises(ValueError):
        form_category(teq2.gpd.with_topology(None, None), 2)


# --------------------------------------------------------------------------
# counit, unit and triangles


def test_generator_objects(theories):
    assert [str(f) for f in generator_objects(theories["t_graph"])] == [
        "[x0:V | true]", "[x0:V, x1:V | E(x0, x1)]", "[x0:V, x1:V | x0 != x1]"]
    assert len(generator_objects(theories["two_sorted"])) == 5


@pytest.mark.parametrize("name,n", [("t_eq", 2), ("t_eq", 3), ("t_graph", 2), ("t_pointed", 2)])
def test_counit(name, n):
    t = catalog.load(name)
    ce = counit_eval(t, n, catalog.tracked(t))
    assert ce.report.ok, ce.report.lines()


@pytest.mark.parametrize("name,n", [("t_eq", 2), ("t_graph", 2), ("two_sorted", 2)])
def test_triangle_identities(name, n):
    t = catalog.load(name)
    rep = check_triangle_identities(t, n, catalog.tracked(t))
    assert rep.ok, rep.lines()


def test_unit_on_formal_sheaves(teq2):
    fc = form_category(teq2.gpd, 2, cap=2)
    data = unit(teq2.gpd, fc.objects[:3])
    assert (data.target.n_objects, data.target.n_arrows) == (2, 2)
    assert data.target.check_laws() == []
    assert triangle_one(data).ok


def test_unit_on_generators(teq2):
    data = unit(teq2.gpd, [definable_sheaf(teq2, f) for f in generator_objects(teq2.theory)])
    assert (data.target.n_objects, data.target.n_arrows) == (4, 7)
    assert data.eta0 == (0, 1, 2, 3)


def test_corrupted_unit_is_localized(teq2):
    data = corrupted_unit(teq2)
    rep = triangle_two(teq2, data)
    assert not rep["arrows"].ok
    assert rep["arrows"].witness == {"arrow": 5, "read back": 6}


def test_reversed_unit_is_not_functorial(teq2):
    V = definable_sheaf(teq2, F(teq2, "[x:V | true]"))
    data = unit(teq2.gpd, [V])
    bad = GroupoidMorphism(teq2.gpd, data.target, data.eta0[::-1], data.eta1)
    assert bad.functoriality()


def test_adequacy_probe():
    t = catalog.load("t_eq")
    assert adequacy_probe(t, catalog.tracked(t), 2).ok
    g = catalog.load("t_graph")
    rep = adequacy_probe(g, catalog.tracked(g), 2)
    assert not rep["hom counts stable"].ok
    assert adequacy_probe(g, catalog.tracked(g), 3).ok
