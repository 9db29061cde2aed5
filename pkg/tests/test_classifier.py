from __future__ import annotations

from math import comb, factorial

import pytest

from stonegpd import catalog
from stonegpd.classifier import classifier, classifying_morphism, pullback_sheaf, recode, teq_isomorphism
from stonegpd.errors import VerificationError
from stonegpd.groupoid import GroupoidMorphism
from stonegpd.logic.parser import parse_in_context
from stonegpd.logical import logical_groupoid
from stonegpd.sheaves import check_action_axioms, definable_sheaf, identity_witness


@pytest.mark.parametrize("n", [1, 2, 3])
def test_classifier_sizes(n):
    S = classifier(n)
    assert S.n_objects == 2 ** n
    assert S.n_arrows == sum(comb(n, k) ** 2 * factorial(k) for k in range(n + 1))
    assert S.gpd.check_laws() == []
    assert all(bool(c) for c in S.gpd.continuity_report().values())


def test_classifier_is_cached():
    assert classifier(2) is classifier(2)


def test_bijections_and_lookup():
    S = classifier(2)
    full = S.object_of([0, 1])
    g = S.arrow_of(full, full, {0: 1, 1: 0})
    assert S.bijection(g) == {0: 1, 1: 0}
    assert S.gpd.inverse[g] == g


def test_generic_object_is_a_sheaf():
    U = classifier(2).generic_object()
    assert U.points == ((1, 0), (2, 1), (3, 0), (3, 1))
    assert check_action_axioms(U).ok


@pytest.mark.parametrize("n", [1, 2, 3])
def test_S_is_the_teq_groupoid(n):
    S = classifier(n)
    g = logical_groupoid(catalog.load("t_eq"), n)
    mor, rep = teq_isomorphism(S, g)
    assert rep.ok, rep.lines()
    assert mor.functoriality() == []


def test_teq_isomorphism_reports_mismatch():
    g = logical_groupoid(catalog.load("t_graph"), 2)
    _, rep = teq_isomorphism(classifier(2), g)
    assert not rep.ok


def test_classifying_the_generic_sheaf_is_the_identity():
    S = classifier(2)
    c = classifying_morphism(S.generic_object())
    assert c.morphism.f0 == tuple(range(S.n_objects))
    assert c.morphism.f1 == tuple(range(S.n_arrows))


def test_pullback_of_generic_object_recovers_sheaf(teq2):
    V = definable_sheaf(teq2, parse_in_context("[x:V | true]", teq2.theory.signature))
    c = classifying_morphism(V)
    back = pullback_sheaf(c.morphism, c.S.generic_object())
    assert identity_witness(back, V) is not None


def test_pair_values_need_recoding(teq2):
    NE = definable_sheaf(teq2, parse_in_context("[x:V, y:V | x != y]", teq2.theory.signature))
    with pytest.raises(VerificationError):
        classifying_morphism(NE)
    c = classifying_morphism(NE, recode_values=True)
    assert c.code == {(0, 1): 0, (1, 0): 1}
    coded, _ = recode(NE)
    assert identity_witness(pullback_sheaf(c.morphism, c.S.generic_object()), coded) is not None


def test_pullback_rejects_non_functorial_maps(teq2):
    S = classifier(2)
    # arrows all sent to the identity of the empty subset
    bad = GroupoidMorphism(teq2.gpd, S.gpd, (0, 0, 0, 1), tuple(0 for _ in range(teq2.n_arrows)))
    with pytest.raises(VerificationError):
        pullback_sheaf(bad, S.generic_object())


def test_pullback_rejects_discontinuous_maps(teq2):
    # complement of the carrier: functorial, but it reverses inclusions
    S = classifier(2)
    f0 = tuple(3 - S.object_of(m.C["V"]) for m in teq2.models)
    f1 = []
    for a in teq2.arrows:
        src, tgt = S.subsets[f0[a.source]], S.subsets[f0[a.target]]
        mapping = dict(zip(src, tgt)) if len(src) < 2 else {0: 0, 1: 1}
        f1.append(S.arrow_of(f0[a.source], f0[a.target], mapping))
    m = GroupoidMorphism(teq2.gpd, S.gpd, f0, tuple(f1))
    assert m.functoriality() == []
    assert not m.continuity()["f0 continuous"]
    with pytest.raises(VerificationError, match="continuous"):
        pullback_sheaf(m, S.generic_object())
