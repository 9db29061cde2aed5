"""Finite topological spaces stored by minimal open neighbourhoods.

A finite topology is determined by the smallest open set ``U_x`` around each
point. Sets are int bitmasks over point indices. A set is open iff it
contains ``U_x`` for each of its points; the full lattice is only built on
request.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import GuardError


def bits(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def mask_of(points: Iterable[int]) -> int:
    m = 0
    for p in points:
        m |= 1 << p
    return m


@dataclass(frozen=True)
class Witness:
    """Why a decision procedure answered no."""
    reason: str
    point: int | None = None
    subset: tuple[int, ...] = ()

    def to_json(self) -> dict:
        return {"reason": self.reason, "point": self.point, "subset": list(self.subset)}


@dataclass(frozen=True)
class Check:
    ok: bool
    witness: Witness | None = None
    cover: tuple[tuple[int, ...], ...] = ()

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class FiniteTopology:
    size: int
    nbhd: tuple[int, ...]
    # named generating sets, kept for reporting
    subbasis: tuple[tuple[str, int], ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if len(self.nbhd) != self.size:
            raise ValueError("one neighbourhood per point required")
        for x, u in enumerate(self.nbhd):
            if not (u >> x) & 1:
                raise ValueError(f"U_{x} does not contain {x}")
            for y in bits(u):
                if self.nbhd[y] & ~u:
                    raise ValueError(f"U_{y} not inside U_{x}")

    # construction
    @classmethod
    def from_subbasis(cls, size: int, subbasis: Sequence[int | tuple[str, int]]) -> "FiniteTopology":
        named = [s if isinstance(s, tuple) else ("", s) for s in subbasis]
        full = (1 << size) - 1
        nb = [full] * size
        for _, s in named:
            s &= full
            for x in bits(s):
                nb[x] &= s
        return cls(size, tuple(nb), tuple(named))

    @classmethod
    def discrete(cls, size: int) -> "FiniteTopology":
        return cls(size, tuple(1 << i for i in range(size)))

    @classmethod
    def indiscrete(cls, size: int) -> "FiniteTopology":
        full = (1 << size) - 1
        return cls(size, (full,) * size)

    @property
    def full(self) -> int:
        return (1 << self.size) - 1

    # queries
    def is_open(self, mask: int) -> bool:
        m = mask
        i = 0
        while m:
            if m & 1 and self.nbhd[i] & ~mask:
                return False
            m >>= 1
            i += 1
        return True

    def interior(self, mask: int) -> int:
        return mask_of(x for x in bits(mask) if not self.nbhd[x] & ~mask)

    def open_hull(self, mask: int) -> int:
        """Smallest open superset."""
        out = 0
        for x in bits(mask):
            out |= self.nbhd[x]
        return out

    def specialization(self, x: int, y: int) -> bool:
        """True iff every open containing x contains y."""
        return bool((self.nbhd[x] >> y) & 1)

    def opens(self, limit: int = 1 << 16) -> list[int]:
        """All open sets in increasing numeric order, with a size guard."""
        found = {0}
        frontier = [0]
        while frontier:
            nxt = []
            for o in frontier:
                for u in self.nbhd:
                    w = o | u
                    if w not in found:
                        found.add(w)
                        nxt.append(w)
                        if len(found) > limit:
                            raise GuardError(f"more than {limit} open sets")
            frontier = nxt
        return sorted(found)

    def subspace(self, points: Sequence[int]) -> "FiniteTopology":
        """Subspace topology on the listed points (re-indexed in list order)."""
        pos = {p: i for i, p in enumerate(points)}
        nb = []
        for p in points:
            nb.append(mask_of(pos[q] for q in bits(self.nbhd[p]) if q in pos))
        return FiniteTopology(len(points), tuple(nb))

    def regenerate(self) -> "FiniteTopology":
        return FiniteTopology.from_subbasis(self.size, list(self.nbhd))

    def is_discrete(self) -> bool:
        return all(u == 1 << i for i, u in enumerate(self.nbhd))

    def to_json(self) -> dict:
        return {"points": self.size,
                "neighbourhoods": [bits(u) for u in self.nbhd],
                "subbasis": [{"name": n, "points": bits(m)} for n, m in self.subbasis]}


def product(a: FiniteTopology, b: FiniteTopology, pairs: Sequence[tuple[int, int]]) -> FiniteTopology:
    """Subspace of the product topology on the listed pairs."""
    by_first: dict[int, list[tuple[int, int]]] = {}
    for i, (p, q) in enumerate(pairs):
        by_first.setdefault(p, []).append((q, i))
    nb = []
    for x, y in pairs:
        uy = b.nbhd[y]
        m = 0
        for p in bits(a.nbhd[x]):
            for q, i in by_first.get(p, ()):
                if (uy >> q) & 1:
                    m |= 1 << i
        nb.append(m)
    return FiniteTopology(len(pairs), tuple(nb))


def image(f: Sequence[int], mask: int) -> int:
    return mask_of(f[x] for x in bits(mask))


def preimage(f: Sequence[int], mask: int) -> int:
    return mask_of(x for x, y in enumerate(f) if (mask >> y) & 1)


def is_continuous(f: Sequence[int], dom: FiniteTopology, cod: FiniteTopology) -> Check:
    """f is continuous iff f(U_x) ⊆ U_f(x) for every x."""
    if len(f) != dom.size:
        raise ValueError("map is not total on the domain")
    for x in range(dom.size):
        target = cod.nbhd[f[x]]
        if image(f, dom.nbhd[x]) & ~target:
            return Check(False, Witness("preimage of open set is not open", x, tuple(bits(target))))
    return Check(True)


def is_open_map(f: Sequence[int], dom: FiniteTopology, cod: FiniteTopology) -> Check:
    """f is open iff the image of every minimal neighbourhood is open."""
    for x in range(dom.size):
        im = image(f, dom.nbhd[x])
        if not cod.is_open(im):
            return Check(False, Witness("image of open set is not open", x, tuple(bits(im))))
    return Check(True)


def is_homeomorphism(f: Sequence[int], dom: FiniteTopology, cod: FiniteTopology) -> Check:
    if dom.size != cod.size or len(set(f)) != len(f):
        return Check(False, Witness("not a bijection"))
    c = is_continuous(f, dom, cod)
    if not c:
        return c
    return is_open_map(f, dom, cod)


def is_local_homeomorphism(p: Sequence[int], total: FiniteTopology, base: FiniteTopology) -> Check:
    """Every point has an open neighbourhood mapped homeomorphically onto an open set.

    The minimal neighbourhoods serve as the cover: U_e works iff p is injective
    on it and p(U_e') is open for each e' in U_e (p continuous globally).
    """
    c = is_continuous(p, total, base)
    if not c:
        return c
    cover = []
    for e in range(total.size):
        u = total.nbhd[e]
        pts = bits(u)
        if len({p[x] for x in pts}) != len(pts):
            return Check(False, Witness("projection not injective on neighbourhood", e, tuple(pts)))
        for x in pts:
            im = image(p, total.nbhd[x])
            if not base.is_open(im):
                return Check(False, Witness("image of neighbourhood is not open", x, tuple(bits(im))))
        cover.append(tuple(pts))
    return Check(True, cover=tuple(cover))
