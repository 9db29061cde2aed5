"""End-to-end acceptance checks, each with a wall-clock budget.

Every check prints a single ``PASS``/``FAIL`` line (with the elapsed time) so
that ``pytest -s`` or the captured log shows the whole table at a glance.
"""
from __future__ import annotations

import time
from collections import Counter

import pytest

from stonegpd import catalog
from stonegpd.classifier import classifier, teq_isomorphism
from stonegpd.errors import GuardError
from stonegpd.logical import logical_groupoid
from stonegpd.models import check_semantic_decidability, enumerate_models
from stonegpd.stone import all_boolean_algebras, ba_round_trip, ba_sub1_round_trip, space_round_trip, spectrum
from stonegpd.topology import FiniteTopology
from stonegpd.verify import (RunConfig, decomposition_suite, duality_suite, stabilization_suite,
                             topology_suite)

pytestmark = pytest.mark.acceptance

# pairs (theory, n) where the adequacy probe is stable and the groupoid stays small
STABLE_PAIRS = [("t_eq", 2), ("t_eq", 3), ("t_graph", 3), ("t_pointed", 2), ("t_pointed", 3),
                ("two_sorted", 2), ("at_least_three", 3), ("at_least_three", 4), ("inconsistent", 3)]

# models per carrier size at n = 3: C(3,k)·2^k, and C(3,k)·2 (once for k = 0)
MORLEY_COUNTS = {"classical_p": [1, 6, 12, 8], "classical_all_or_none": [1, 6, 6, 2]}


def _subjects():
    out = [(catalog.load(n), catalog.tracked(catalog.load(n))) for n in ("t_eq", "t_graph")]
    return out + [catalog.morleyized_sample()]


def _finish(capsys, label, start, limit, problems):
    elapsed = time.perf_counter() - start
    ok = not problems and elapsed < limit
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} [{label}] {elapsed:.2f}s (limit {limit}s)"
              + ("" if not problems else f" {problems[:3]}"))
    assert not problems, problems
    assert elapsed < limit, f"{label} took {elapsed:.2f}s"


def test_classifier_and_teq_groupoid(capsys):
    start = time.perf_counter()
    problems = []
    g = logical_groupoid(catalog.load("t_eq"), 2)
    if (g.n_objects, g.n_arrows) != (4, 7):
        problems.append(("t_eq", g.n_objects, g.n_arrows))
    S = classifier(2)
    if (S.n_objects, S.n_arrows) != (4, 7):
        problems.append(("S", S.n_objects, S.n_arrows))
    _, rep = teq_isomorphism(S, g)
    problems += [e.name for e in rep.violations()]
    _finish(capsys, "1 S = G_TEQ at n=2", start, 1, problems)


def test_topology_lemmas(capsys):
    start = time.perf_counter()
    problems = []
    for theory, tracked in _subjects():
        for n in (1, 2, 3):
            rep = topology_suite(logical_groupoid(theory, n, tracked), tracked)
            problems += [(theory.name, n, e.name) for e in rep.violations()]
    _finish(capsys, "2 topology lemmas", start, 60, problems)


def test_stabilization_oracle(capsys):
    start = time.perf_counter()
    problems = []
    for theory, tracked in _subjects():
        for n in (1, 2, 3):
            rep = stabilization_suite(logical_groupoid(theory, n, tracked), tracked)
            if rep["star-of-david"].status != "PASS" or rep["stabilization-oracle"].status != "PASS":
                problems.append((theory.name, n, rep.lines()))
    _finish(capsys, "3 stabilization", start, 60, problems)


def test_stable_open_decomposition(capsys):
    start = time.perf_counter()
    problems = []
    for theory, tracked in _subjects():
        for n in (1, 2, 3):
            rep = decomposition_suite(logical_groupoid(theory, n, tracked), tracked)
            problems += [(theory.name, n, e.witness) for e in rep.violations()]
    _finish(capsys, "4 decomposition", start, 60, problems)


def test_duality_on_stable_pairs(capsys):
    start = time.perf_counter()
    problems = []
    for name, n in STABLE_PAIRS:
        t = catalog.load(name)
        rep = duality_suite(RunConfig(t, n, catalog.tracked(t)))
        wanted = ["adequacy", "counit-functorial", "counit-faithful", "counit-full", "triangle-identities"]
        wanted += [e.name for e in rep.entries if e.name.startswith("counit-")]
        bad = [w for w in wanted if rep[w].status != "PASS"]
        if bad:
            problems.append((name, n, bad))
    _finish(capsys, "5 counit and triangles", start, 120, problems)


def test_stone_duality(capsys):
    start = time.perf_counter()
    problems = []
    algs = all_boolean_algebras(16)
    if len(algs) != 5:
        problems.append(("algebras", len(algs)))
    for B in algs:
        if len(spectrum(B).points) != len(B.atoms()) or not ba_round_trip(B).ok:
            problems.append(("ba", B.name))
        if not ba_sub1_round_trip(B).ok:
            problems.append(("sub1", B.name))
    for k in range(5):
        if not space_round_trip(FiniteTopology.discrete(k), boolean=True).ok:
            problems.append(("space", k))
    _finish(capsys, "6 Stone", start, 30, problems)


def test_morleyization_counts(capsys):
    start = time.perf_counter()
    problems = []
    for name, expected in MORLEY_COUNTS.items():
        for t in (catalog.load(name), catalog.load(name + "+m")):
            sizes = Counter(len(m.C["V"]) for m in enumerate_models(t, 3))
            got = [sizes[k] for k in range(4)]
            if got != expected:
                problems.append((t.name, got))
    _finish(capsys, "7 Morleyization", start, 60, problems)


def test_semantic_decidability(capsys):
    start = time.perf_counter()
    problems = []
    for name in catalog.DECIDABLE:
        t = catalog.load(name)
        for n in range(1, 5):
            found = check_semantic_decidability(t, n)
            if found:
                problems.append((name, n, found[0]))
    t = catalog.load("unary_p")
    witnesses = check_semantic_decidability(t, 2, first_only=True)
    if not witnesses:
        problems.append(("unary_p", "no witness"))
    else:
        w = witnesses[0]
        ms = enumerate_models(t, 2)
        if len(set(w.images)) == len(ms[w.source].C[w.sort]):
            problems.append(("unary_p", "witness is injective"))
    _finish(capsys, "8 semantic decidability", start, 30, problems)


def test_guard_instead_of_exhaustion():
    t = catalog.load("two_sorted")
    with pytest.raises(GuardError):
        duality_suite(RunConfig(t, 3, catalog.tracked(t)))
