from __future__ import annotations

import pytest

import oracle
from stonegpd import catalog
from stonegpd.errors import GuardError
from stonegpd.logic.parser import parse_in_context
from stonegpd.models import (AtomUniverse, build_groupoid, check_semantic_decidability, definable_set,
                             enumerate_maps, enumerate_models, make_model, satisfies)

# (models, isomorphisms) at n = 1, 2, 3, from the brute-force oracle
COUNTS = {
    "t_eq": [(2, 2), (4, 7), (8, 34)],
    "t_graph": [(2, 2), (5, 9), (18, 94)],
    "t_pointed": [(1, 1), (4, 8), (12, 63)],
    "two_sorted": [(3, 3), (18, 63), (170, 4921)],
    "at_least_three": [(0, 0), (0, 0), (1, 6)],
    "inconsistent": [(0, 0), (0, 0), (0, 0)],
    "unary_p": [(3, 3), (9, 17), (27, 139)],
    "classical_p": [(3, 3), (9, 17), (27, 139)],
    "classical_all_or_none": [(3, 3), (7, 13), (15, 67)],
}


@pytest.mark.parametrize("name", sorted(COUNTS))
@pytest.mark.parametrize("n", [1, 2, 3])
def test_frozen_counts(name, n):
    g = build_groupoid(catalog.load(name), n)
    assert (g.n_objects, g.n_arrows) == COUNTS[name][n - 1]


@pytest.mark.parametrize("name", ["t_eq", "t_graph", "t_pointed", "unary_p", "classical_all_or_none"])
def test_counts_agree_with_oracle(name):
    t = catalog.load(name)
    ms = oracle.models(t, 2)
    g = build_groupoid(t, 2)
    assert g.n_objects == len(ms)
    assert g.n_arrows == oracle.iso_count(t, ms)


def test_teq_models_are_the_subsets(theories):
    ms = enumerate_models(theories["t_eq"], 2)
    assert [m.C["V"] for m in ms] == [(), (0,), (1,), (0, 1)]


def test_graph_models_at_two(theories):
    ms = enumerate_models(theories["t_graph"], 2)
    edges = sorted(sorted(m.rel("E")) for m in ms if m.C["V"] == (0, 1))
    assert edges == [[], [(0, 1), (1, 0)]]


def test_enumeration_is_deterministic(theories):
    t = theories["t_graph"]
    assert enumerate_models(t, 3) == enumerate_models(t, 3)


def test_guard_fires(theories):
    with pytest.raises(GuardError):
        enumerate_models(theories["two_sorted"], 3, ceiling=50)


def test_universe_must_be_positive():
    with pytest.raises(ValueError):
        AtomUniverse(0)


def test_satisfaction_examples(theories):
    t = theories["t_graph"]
    m = make_model(t, {"V": [0, 1]}, {"E": [(0, 1), (1, 0)]})
    assert satisfies(m, parse_in_context("[x:V | exists y:V. E(x, y)]", t.signature), (0,))
    assert satisfies(m, parse_in_context("[x:V | true]", t.signature), (1,))
    assert not satisfies(m, parse_in_context("[x:V | false]", t.signature), (1,))


def test_definable_sets(theories):
    t = theories["t_eq"]
    m2 = make_model(t, {"V": [0, 1]})
    m1 = make_model(t, {"V": [0]})
    assert definable_set(m2, parse_in_context("[x:V | true]", t.signature)) == {(0,), (1,)}
    assert definable_set(m2, parse_in_context("[x:V, y:V | x != y]", t.signature)) == {(0, 1), (1, 0)}
    assert definable_set(m1, parse_in_context("[x:V | exists y:V. x != y]", t.signature)) == frozenset()


def test_make_model_checks_axioms(theories):
    with pytest.raises(ValueError):
        make_model(theories["t_graph"], {"V": [0]}, {"E": [(0, 0)]})


def test_maps_examples(theories):
    t = theories["t_eq"]
    ms = enumerate_models(t, 2)
    assert len(enumerate_maps(ms, 3, 3, only_isos=True)) == 2
    assert all(len(enumerate_maps(ms, 0, j)) == 1 for j in range(4))
    assert enumerate_maps(ms, 1, 3, only_isos=True) == []


def test_groupoid_laws(theories):
    for name in ("t_eq", "t_graph", "two_sorted"):
        g = build_groupoid(theories[name], 2)
        assert g.gpd.check_laws() == []


def test_isomorphisms_preserve_definable_sets(theories):
    t = theories["t_graph"]
    g = build_groupoid(t, 3)
    f = parse_in_context("[x:V | exists y:V. E(x, y)]", t.signature)
    for k, a in enumerate(g.arrows):
        src = definable_set(g.models[a.source], f)
        tgt = definable_set(g.models[a.target], f)
        assert {(g.apply(k, "V", x),) for (x,) in src} == tgt


@pytest.mark.parametrize("name", catalog.DECIDABLE)
def test_decidable_theories_have_injective_homs(name):
    assert check_semantic_decidability(catalog.load(name), 4) == []


def test_unary_p_has_a_collapse(theories):
    t = theories["unary_p"]
    rep = check_semantic_decidability(t, 2)
    assert rep
    ms = enumerate_models(t, 2)
    w = rep[0]
    assert len(set(w.images)) < len(ms[w.source].C[w.sort])
    assert oracle.has_non_injective_hom(t, 2)


def test_inconsistent_theory_is_vacuous(theories):
    assert check_semantic_decidability(theories["inconsistent"], 2) == []
    assert build_groupoid(theories["inconsistent"], 2).n_objects == 0


def test_json_export_is_stable(theories):
    g = build_groupoid(theories["t_graph"], 2)
    assert g.to_json() == build_groupoid(theories["t_graph"], 2).to_json()
    assert g.to_dot().startswith("digraph")


@pytest.mark.parametrize("name", catalog.NAMES)
def test_initial_segment_search_agrees_with_full_search(name):
    t = catalog.load(name)
    fast = check_semantic_decidability(t, 2)
    full = check_semantic_decidability(t, 2, all_models=True)
    assert bool(fast) == bool(full)
    assert {(w.sort, len(set(w.images))) for w in fast} <= {(w.sort, len(set(w.images))) for w in full}
