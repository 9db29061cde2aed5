"""Property tests over random inputs."""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations

from hypothesis import assume, given
from hypothesis import strategies as st

import oracle
from stonegpd import catalog
from stonegpd.duality import compose_arrows, hom_set, identity_arrow, induced_morphism, objects_equal, stable_opens
from stonegpd.logic.parser import parse_in_context
from stonegpd.logic.simplify import simplify_in_context
from stonegpd.logic.syntax import (BOT, TOP, And, Eq, Exists, FormulaInContext, Neq, Or, Rel, Var)
from stonegpd.logical import _permute, logical_groupoid
from stonegpd.models import definable_set
from stonegpd.sheaves import definable_sheaf, is_stable, stabilize
from stonegpd.stone import DistributiveLattice, spectrum
from stonegpd.topology import FiniteTopology, bits, is_continuous

X, Y, Z = Var("x", "V"), Var("y", "V"), Var("z", "V")


@lru_cache(maxsize=None)
def graph3():
    t = catalog.load("t_graph")
    return logical_groupoid(t, 3, catalog.tracked(t))


@lru_cache(maxsize=None)
def teq3():
    t = catalog.load("t_eq")
    return logical_groupoid(t, 3, catalog.tracked(t))


# --------------------------------------------------------------------------
# strategies


@st.composite
def topologies(draw, max_points=6):
    n = draw(st.integers(1, max_points))
    sub = draw(st.lists(st.integers(0, (1 << n) - 1), max_size=6))
    return FiniteTopology.from_subbasis(n, sub)


def coherent_bodies(free, depth=2, with_e=False):
    """Coherent formulas over ``free`` in the language of T_GRAPH (or T_EQ)."""
    vs = st.sampled_from(free)
    atoms = [st.just(TOP), st.just(BOT),
             st.builds(Eq, vs, vs), st.builds(Neq, vs, vs)]
    if with_e:
        atoms.append(st.builds(lambda a, b: Rel("E", (a, b)), vs, vs))
    base = st.one_of(*atoms)
    if depth == 0:
        return base
    sub = coherent_bodies(free, depth - 1, with_e)
    bound = Z if Z not in free else Var(f"w{depth}", "V")
    return st.one_of(
        base,
        st.builds(lambda a, b: And((a, b)), sub, sub),
        st.builds(lambda a, b: Or((a, b)), sub, sub),
        st.builds(lambda b: Exists(bound, b), coherent_bodies(free + (bound,), depth - 1, with_e)),
    )


def unary(with_e=False):
    return coherent_bodies((X,), 2, with_e).map(lambda b: FormulaInContext((X,), b))


@st.composite
def lattices(draw):
    """Rings of sets on up to 4 points: unions and intersections of random generators."""
    gens = draw(st.lists(st.integers(0, 15), min_size=1, max_size=4))
    fam = {0, 15}
    frontier = set(gens)
    while frontier - fam:
        fam |= frontier
        frontier = {a | b for a in fam for b in fam} | {a & b for a in fam for b in fam}
    return DistributiveLattice.of_sets(sorted(fam))


# --------------------------------------------------------------------------
# finite topology


@given(topologies(), st.integers(0, 63), st.integers(0, 63))
def test_opens_form_a_topology(t, a, b):
    a &= t.full
    b &= t.full
    ia, ib = t.interior(a), t.interior(b)
    assert t.is_open(ia) and ia & ~a == 0
    assert t.is_open(ia | ib) and t.is_open(ia & ib)
    hull = t.open_hull(a)
    assert t.is_open(hull) and a & ~hull == 0
    assert t.interior(ia) == ia


@given(topologies())
def test_regeneration_is_stable(t):
    assert t.regenerate().nbhd == t.nbhd
    assert is_continuous(list(range(t.size)), t, t)


@given(topologies(), st.data())
def test_continuity_composes(t, data):
    n = t.size
    f = data.draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    g = data.draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    if is_continuous(f, t, t) and is_continuous(g, t, t):
        assert is_continuous([g[x] for x in f], t, t)


# --------------------------------------------------------------------------
# syntax and semantics


@given(unary(with_e=True))
def test_printer_parser_round_trip(f):
    sig = catalog.load("t_graph").signature
    assert parse_in_context(str(f), sig).alpha_equal(f)


@given(unary(with_e=True))
def test_simplify_preserves_extensions(f):
    g = graph3()
    s = simplify_in_context(f)
    for m in g.models:
        assert definable_set(m, f) == definable_set(m, s)


@given(unary(), unary(), unary())
def test_objects_equal_is_an_equivalence(a, b, c):
    g = teq3()
    assert objects_equal(a, a, g)
    assert objects_equal(a, b, g) == objects_equal(b, a, g)
    if objects_equal(a, b, g) and objects_equal(b, c, g):
        assert objects_equal(a, c, g)


@given(unary(with_e=True), st.permutations(range(3)))
def test_extensions_are_isomorphism_invariant(f, perm):
    g = graph3()
    for m in g.models[:8]:
        pm = _permute(m, {"V": tuple(perm)})
        assert g.find_model(pm) is not None
        assert definable_set(pm, f) == {(perm[a],) for (a,) in definable_set(m, f)}


# --------------------------------------------------------------------------
# sheaves


@given(st.integers(0, (1 << 20) - 1), st.integers(0, (1 << 20) - 1))
def test_stabilize_is_a_monotone_closure(raw, extra):
    g = graph3()
    sh = definable_sheaf(g, parse_in_context("[x:V | true]", g.theory.signature))
    u = raw & sh.full
    s = stabilize(sh, u)
    assert u & ~s == 0
    assert stabilize(sh, s) == s and is_stable(sh, s)
    bigger = u | (extra & sh.full)
    assert s & ~stabilize(sh, bigger) == 0


@given(unary(with_e=True))
def test_stable_opens_form_a_lattice(f):
    g = graph3()
    sh = definable_sheaf(g, f)
    opens = set(stable_opens(sh))
    assert 0 in opens and sh.full in opens
    for a, b in combinations(sorted(opens), 2):
        assert a | b in opens and a & b in opens


# --------------------------------------------------------------------------
# the syntactic category


FORMS = ["[ | true]", "[x:V | true]", "[x:V, y:V | x != y]", "[x:V | exists y:V. x != y]"]


@lru_cache(maxsize=None)
def _homs():
    g = teq3()
    fs = [parse_in_context(s, g.theory.signature) for s in FORMS]
    return g, fs, {(i, j): hom_set(fs[i], fs[j], g) for i in range(len(fs)) for j in range(len(fs))}


@given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3), st.data())
def test_category_laws(i, j, k, data):
    g, fs, homs = _homs()
    assume(homs[(i, j)] and homs[(j, k)])
    s = data.draw(st.sampled_from(homs[(i, j)]))
    t = data.draw(st.sampled_from(homs[(j, k)]))
    da, dc = definable_sheaf(g, fs[i]), definable_sheaf(g, fs[k])
    ts = compose_arrows(t, s)
    assert induced_morphism(ts, da, dc).map == tuple(t.table[x] for x in s.table)
    db = definable_sheaf(g, fs[j])
    left = compose_arrows(identity_arrow(fs[j]), s)
    assert induced_morphism(left, da, db).map == s.table


# --------------------------------------------------------------------------
# lattices


@given(lattices())
def test_random_lattices_round_trip(L):
    from stonegpd.stone import lattice_round_trip
    expected = oracle.prime_filters(L.size, L.leq, L.meet, L.join, L.bottom)
    assert sorted(L.prime_filters(), key=sorted) == sorted(expected, key=sorted)
    assert len(L.join_irreducibles()) == len(spectrum(L).points)
    assert lattice_round_trip(L).ok


@given(st.integers(0, 3), st.permutations(range(8)))
def test_relabelled_algebras_round_trip(k, perm):
    from stonegpd.stone import BooleanAlgebra, ba_round_trip
    size = 1 << k
    relabel = [p for p in perm if p < size]
    B = BooleanAlgebra.from_order(relabel, lambda a, b: a & ~b == 0)
    rep = ba_round_trip(B)
    assert rep.ok and len(bits(spectrum(B).top.full)) == k
