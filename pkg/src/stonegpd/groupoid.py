"""Finite (topological) groupoids as integer tables, and morphisms between them."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Hashable, Sequence

from .topology import FiniteTopology, is_continuous


@dataclass(frozen=True)
class TopGroupoid:
    """Objects ``0..n_objects-1`` and arrows ``0..len(src)-1``.

    ``compose[(g, f)]`` is g∘f, defined when ``tgt[f] == src[g]``.
    """
    n_objects: int
    src: tuple[int, ...]
    tgt: tuple[int, ...]
    identity: tuple[int, ...]
    inverse: tuple[int, ...]
    compose: dict = field(repr=False, compare=False)
    obj_top: FiniteTopology | None = field(default=None, repr=False, compare=False)
    arr_top: FiniteTopology | None = field(default=None, repr=False, compare=False)

    @property
    def n_arrows(self) -> int:
        return len(self.src)

    def homs(self, x: int, y: int) -> list[int]:
        return [g for g in range(self.n_arrows) if self.src[g] == x and self.tgt[g] == y]

    def out_arrows(self, x: int) -> list[int]:
        return [g for g in range(self.n_arrows) if self.src[g] == x]

    def automorphisms(self, x: int) -> list[int]:
        return self.homs(x, x)

    def components(self) -> list[list[int]]:
        """Connected components (orbits of objects), each sorted, in order of least member."""
        seen: dict[int, int] = {}
        comps: list[list[int]] = []
        adj: dict[int, set[int]] = {x: set() for x in range(self.n_objects)}
        for g in range(self.n_arrows):
            adj[self.src[g]].add(self.tgt[g])
        for x in range(self.n_objects):
            if x in seen:
                continue
            stack, comp = [x], []
            seen[x] = len(comps)
            while stack:
                y = stack.pop()
                comp.append(y)
                for z in adj[y]:
                    if z not in seen:
                        seen[z] = len(comps)
                        stack.append(z)
            comps.append(sorted(comp))
        return comps

    def with_topology(self, obj_top: FiniteTopology, arr_top: FiniteTopology) -> "TopGroupoid":
        return replace(self, obj_top=obj_top, arr_top=arr_top)

    def check_laws(self) -> list[str]:
        """Groupoid laws as total-table identities; returns violations."""
        out = []
        for x in range(self.n_objects):
            i = self.identity[x]
            if self.src[i] != x or self.tgt[i] != x:
                out.append(f"identity of {x} has wrong endpoints")
        for g in range(self.n_arrows):
            s, t = self.src[g], self.tgt[g]
            if self.compose.get((g, self.identity[s])) != g or self.compose.get((self.identity[t], g)) != g:
                out.append(f"identity not neutral for arrow {g}")
            inv = self.inverse[g]
            if self.compose.get((inv, g)) != self.identity[s] or self.compose.get((g, inv)) != self.identity[t]:
                out.append(f"inverse law fails for arrow {g}")
        for (g, f), h in self.compose.items():
            if self.tgt[f] != self.src[g] or self.src[h] != self.src[f] or self.tgt[h] != self.tgt[g]:
                out.append(f"composite of {g} and {f} has wrong endpoints")
        by_src: dict[int, list[int]] = {}
        for g in range(self.n_arrows):
            by_src.setdefault(self.src[g], []).append(g)
        for f in range(self.n_arrows):
            for g in by_src.get(self.tgt[f], ()):
                gf = self.compose.get((g, f))
                if gf is None:
                    out.append(f"composite of {g} and {f} missing")
                    continue
                for h in by_src.get(self.tgt[g], ()):
                    if self.compose.get((h, gf)) != self.compose.get((self.compose[(h, g)], f)):
                        out.append(f"associativity fails at ({h}, {g}, {f})")
        return out

    def composable_pairs(self) -> list[tuple[int, int]]:
        """Pairs (g, f) with t(f) = s(g), in sorted order."""
        return sorted(self.compose)

    def continuity_report(self) -> dict[str, object]:
        """Continuity of s, t, i, Id and c; openness of s and t."""
        from .topology import is_open_map, product
        X, G = self.obj_top, self.arr_top
        rep: dict[str, object] = {}
        rep["s continuous"] = is_continuous(self.src, G, X)
        rep["t continuous"] = is_continuous(self.tgt, G, X)
        rep["s open"] = is_open_map(self.src, G, X)
        rep["t open"] = is_open_map(self.tgt, G, X)
        rep["i continuous"] = is_continuous(self.inverse, G, G)
        rep["Id continuous"] = is_continuous(self.identity, X, G)
        pairs = self.composable_pairs()
        dom = product(G, G, pairs)
        rep["c continuous"] = is_continuous([self.compose[p] for p in pairs], dom, G)
        return rep


def build_groupoid_tables(n_objects: int, arrows: Sequence[tuple[int, int, Hashable]],
                          compose_key: Callable, inverse_key: Callable,
                          identity_key: Callable) -> TopGroupoid:
    """Tabulate a groupoid given arrows as (src, tgt, key) and key-level operations."""
    index = {(s, t, k): i for i, (s, t, k) in enumerate(arrows)}
    src = tuple(a[0] for a in arrows)
    tgt = tuple(a[1] for a in arrows)
    ident = tuple(index[(x, x, identity_key(x))] for x in range(n_objects))
    inv = tuple(index[(t, s, inverse_key(k))] for s, t, k in arrows)
    by_src: dict[int, list[int]] = {}
    for i, (s, _, _) in enumerate(arrows):
        by_src.setdefault(s, []).append(i)
    comp = {}
    for f, (fs, ft, fk) in enumerate(arrows):
        for g in by_src.get(ft, ()):
            _, gt, gk = arrows[g]
            comp[(g, f)] = index[(fs, gt, compose_key(gk, fk))]
    return TopGroupoid(n_objects, src, tgt, ident, inv, comp)


@dataclass(frozen=True)
class GroupoidMorphism:
    dom: TopGroupoid
    cod: TopGroupoid
    f0: tuple[int, ...]
    f1: tuple[int, ...]

    def functoriality(self) -> list[str]:
        d, c = self.dom, self.cod
        out = []
        for g in range(d.n_arrows):
            h = self.f1[g]
            if c.src[h] != self.f0[d.src[g]] or c.tgt[h] != self.f0[d.tgt[g]]:
                out.append(f"arrow {g} not sent over its endpoints")
        for x in range(d.n_objects):
            if self.f1[d.identity[x]] != c.identity[self.f0[x]]:
                out.append(f"identity of object {x} not preserved")
        for (g, f), gf in d.compose.items():
            if c.compose.get((self.f1[g], self.f1[f])) != self.f1[gf]:
                out.append(f"composite of {g} and {f} not preserved")
        return out

    def continuity(self) -> dict[str, object]:
        return {"f0 continuous": is_continuous(self.f0, self.dom.obj_top, self.cod.obj_top),
                "f1 continuous": is_continuous(self.f1, self.dom.arr_top, self.cod.arr_top)}

    def then(self, other: "GroupoidMorphism") -> "GroupoidMorphism":
        """other ∘ self."""
        return GroupoidMorphism(self.dom, other.cod,
                                tuple(other.f0[x] for x in self.f0),
                                tuple(other.f1[g] for g in self.f1))

    @classmethod
    def identity_of(cls, g: TopGroupoid) -> "GroupoidMorphism":
        return cls(g, g, tuple(range(g.n_objects)), tuple(range(g.n_arrows)))


def one_point_groupoid() -> TopGroupoid:
    return TopGroupoid(1, (0,), (0,), (0,), (0,), {(0, 0): 0},
                       FiniteTopology.discrete(1), FiniteTopology.discrete(1))


def empty_groupoid() -> TopGroupoid:
    return TopGroupoid(0, (), (), (), (), {}, FiniteTopology(0, ()), FiniteTopology(0, ()))
