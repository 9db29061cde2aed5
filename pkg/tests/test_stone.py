from __future__ import annotations

import pytest

import oracle
from stonegpd.duality import form_category
from stonegpd.errors import GuardError
from stonegpd.groupoid import empty_groupoid, one_point_groupoid
from stonegpd.logical import logical_groupoid
from stonegpd.stone import (BooleanAlgebra, DistributiveLattice, all_boolean_algebras, ba_round_trip,
                            ba_sub1_round_trip, ba_theory, clopen_algebra, compact_opens, finite_t0_spaces,
                            is_coherent_space, lattice_round_trip, space_round_trip, spectrum, sub1_reflection)
from stonegpd.topology import FiniteTopology

LATTICES = [DistributiveLattice.chain(1), DistributiveLattice.chain(3), DistributiveLattice.chain(5),
            DistributiveLattice.free(1), DistributiveLattice.free(2), DistributiveLattice.free(3),
            DistributiveLattice.of_sets([0, 1, 3, 7], "chain of sets"),
            DistributiveLattice.of_sets([0, 1, 2, 3, 6, 7], "N-shaped")]
ALGEBRAS = all_boolean_algebras(16) + [BooleanAlgebra.divisors(30), BooleanAlgebra.divisors(6)]


def test_boolean_algebra_sizes():
    assert [b.size for b in all_boolean_algebras(16)] == [1, 2, 4, 8, 16]
    assert len(all_boolean_algebras(7)) == 3


def test_non_distributive_lattice_is_rejected():
    # the diamond M3
    with pytest.raises(ValueError, match="distributive"):
        DistributiveLattice.of_sets([0, 1, 2, 4, 7])


def test_non_complemented_lattice_is_not_boolean():
    with pytest.raises(ValueError, match="complement"):
        BooleanAlgebra.from_order(range(3), lambda a, b: a <= b)


def test_free_lattice_sizes():
    assert [DistributiveLattice.free(k).size for k in range(4)] == [2, 3, 6, 20]
    with pytest.raises(GuardError):
        DistributiveLattice.free(4)


@pytest.mark.parametrize("L", LATTICES, ids=lambda L: L.name or str(L.size))
def test_prime_filters_match_oracle(L):
    expected = oracle.prime_filters(L.size, L.leq, L.meet, L.join, L.bottom)
    assert sorted(L.prime_filters(), key=sorted) == sorted(expected, key=sorted)


@pytest.mark.parametrize("B", ALGEBRAS, ids=lambda B: B.name)
def test_ultrafilters_match_oracle(B):
    expected = oracle.ultrafilters(B.size, B.leq, B.meet, B.comp, B.bottom)
    assert sorted(B.prime_filters(), key=sorted) == sorted(expected, key=sorted)


def test_prime_filter_counts():
    assert len(DistributiveLattice.free(2).prime_filters()) == 4
    assert len(DistributiveLattice.chain(3).prime_filters()) == 2
    assert len(BooleanAlgebra.divisors(30).prime_filters()) == 3


def test_degenerate_algebra():
    B = BooleanAlgebra.powerset(0)
    assert B.degenerate and B.atoms() == [] and B.homs_to_two() == []
    assert spectrum(B).top.size == 0
    assert ba_round_trip(B).ok


def test_join_irreducibles_are_the_spectrum_points():
    for L in LATTICES:
        assert len(L.join_irreducibles()) == len(spectrum(L).points)


@pytest.mark.parametrize("B", ALGEBRAS, ids=lambda B: B.name)
def test_ba_round_trip(B):
    rep = ba_round_trip(B)
    assert rep.ok, rep.lines()
    assert spectrum(B).top.is_discrete()


@pytest.mark.parametrize("L", LATTICES, ids=lambda L: L.name or str(L.size))
def test_lattice_round_trip(L):
    assert lattice_round_trip(L).ok
    assert is_coherent_space(spectrum(L).top).ok


def test_t0_space_counts():
    assert [len(finite_t0_spaces(k)) for k in range(5)] == [1, 1, 3, 19, 219]
    with pytest.raises(GuardError):
        finite_t0_spaces(5)


@pytest.mark.parametrize("size", [1, 2, 3, 4])
def test_every_finite_t0_space_round_trips(size):
    for top in finite_t0_spaces(size):
        assert space_round_trip(top).ok


@pytest.mark.parametrize("size", range(5))
def test_discrete_spaces_round_trip_through_clopens(size):
    rep = space_round_trip(FiniteTopology.discrete(size), boolean=True)
    assert rep.ok, rep.lines()


def test_sierpinski_is_not_a_stone_space():
    s = FiniteTopology(2, (0b01, 0b11))
    assert clopen_algebra(s).size == 2
    assert not space_round_trip(s, boolean=True).ok
    assert space_round_trip(s).ok


def test_compact_opens_of_sierpinski():
    L = compact_opens(FiniteTopology(2, (0b01, 0b11)))
    assert L.labels == (0, 1, 3)


def test_json_round_trip():
    for L in LATTICES + ALGEBRAS:
        back = type(L).from_json(L.to_json())
        assert type(back) is type(L)
        assert back.leq == L.leq and back.size == L.size


def test_ba_theory_models_are_atoms():
    B = BooleanAlgebra.powerset(2)
    t = ba_theory(B)
    assert len(t.signature.relations) == 4
    assert logical_groupoid(t, 1).n_objects == len(B.atoms()) == 2


@pytest.mark.parametrize("B", ALGEBRAS, ids=lambda B: B.name)
def test_sub1_recovers_the_algebra(B):
    rep = ba_sub1_round_trip(B)
    assert rep.ok, rep.lines()


def test_sub1_of_small_groupoids(teq2):
    assert sub1_reflection(empty_groupoid()).size == 1
    assert sub1_reflection(one_point_groupoid()).size == 2
    assert sub1_reflection(form_category(teq2.gpd, 2, cap=2)).labels == (0, 8, 14, 15)
