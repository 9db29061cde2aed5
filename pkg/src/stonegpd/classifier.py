"""The groupoid S of subsets of the atom universe and bijections, and classification.

Objects of S are the subsets of ``{0..n-1}`` ordered by bitmask; arrows are
bijections, listed by (source, target, images of the sorted source). Objects
carry the topology generated by {A : a ∈ A}; arrows the one generated by
preimages under s and t together with ⟨a↦b⟩ = {β : β(a) = b}.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

from .errors import VerificationError
from .groupoid import GroupoidMorphism, TopGroupoid, build_groupoid_tables
from .models import GroupoidOfModels
from .report import Report
from .sheaves import EquivariantSheaf, _value_key, make_sheaf
from .topology import FiniteTopology, bits, is_homeomorphism, mask_of


@dataclass(frozen=True)
class ClassifierGroupoid:
    n: int
    subsets: tuple[tuple[int, ...], ...]
    arrows: tuple[tuple[int, int, tuple[int, ...]], ...]
    gpd: TopGroupoid

    @classmethod
    def build(cls, n: int) -> "ClassifierGroupoid":
        subsets = tuple(tuple(bits(m)) for m in range(1 << n))
        arrows = []
        for i, a in enumerate(subsets):
            for j, b in enumerate(subsets):
                if len(a) == len(b):
                    for img in permutations(b):
                        arrows.append((i, j, img))
        arrows.sort()
        pos = {s: i for i, s in enumerate(subsets)}

        def compose(gk, fk):
            f, g = dict(zip(subsets[fk[0]], fk[1])), dict(zip(subsets[gk[0]], gk[1]))
            return (fk[0], tuple(g[f[a]] for a in subsets[fk[0]]))

        def inverse(k):
            s, img = k
            back = dict(zip(img, subsets[s]))
            t = pos[tuple(sorted(img))]
            return (t, tuple(back[b] for b in subsets[t]))

        gpd = build_groupoid_tables(len(subsets), [(s, t, (s, img)) for s, t, img in arrows],
                                    compose_key=compose, inverse_key=inverse,
                                    identity_key=lambda x: (x, subsets[x]))
        obj_sub = [(f"<{a}>", mask_of(i for i, s in enumerate(subsets) if a in s)) for a in range(n)]
        X = FiniteTopology.from_subbasis(len(subsets), obj_sub)
        arr_sub = []
        for name, m in obj_sub:
            arr_sub.append((f"s^-1 {name}", mask_of(g for g, (s, _, _) in enumerate(arrows) if (m >> s) & 1)))
            arr_sub.append((f"t^-1 {name}", mask_of(g for g, (_, t, _) in enumerate(arrows) if (m >> t) & 1)))
        for a in range(n):
            for b in range(n):
                arr_sub.append((f"<{a}->{b}>", mask_of(
                    g for g, (s, _, img) in enumerate(arrows) if dict(zip(subsets[s], img)).get(a) == b)))
        G = FiniteTopology.from_subbasis(len(arrows), arr_sub)
        return cls(n, subsets, tuple(arrows), gpd.with_topology(X, G))

    @property
    def n_objects(self) -> int:
        return len(self.subsets)

    @property
    def n_arrows(self) -> int:
        return len(self.arrows)

    def object_of(self, atoms) -> int:
        return mask_of(atoms)

    def bijection(self, g: int) -> dict[int, int]:
        s, _, img = self.arrows[g]
        return dict(zip(self.subsets[s], img))

    def arrow_of(self, source: int, target: int, mapping: dict[int, int]) -> int:
        idx = getattr(self, "_idx", None)
        if idx is None:
            idx = {a: i for i, a in enumerate(self.arrows)}
            object.__setattr__(self, "_idx", idx)
        return idx[(source, target, tuple(mapping[a] for a in self.subsets[source]))]

    def generic_object(self) -> EquivariantSheaf:
        """U: the fiber over A is A itself."""
        pts = [(i, a) for i, s in enumerate(self.subsets) for a in s]
        X = self.gpd.obj_top

        def nb(p):
            i, a = p
            return [(j, a) for j in bits(X.nbhd[i])]

        return make_sheaf(self.gpd, pts, nb, lambda g, p: self.bijection(g)[p[1]], "U", self.n)


_CACHE: dict[int, ClassifierGroupoid] = {}


def classifier(n: int) -> ClassifierGroupoid:
    if n not in _CACHE:
        _CACHE[n] = ClassifierGroupoid.build(n)
    return _CACHE[n]


@dataclass(frozen=True)
class Classification:
    morphism: GroupoidMorphism
    S: ClassifierGroupoid
    sheaf: EquivariantSheaf
    code: dict | None = None  # original value -> atom, when recoded


def recode(sh: EquivariantSheaf) -> tuple[EquivariantSheaf, dict]:
    """Re-fiber through an injective coding of the values as atoms 0..m-1."""
    values = sorted({v for _, v in sh.points}, key=_value_key)
    code = {v: i for i, v in enumerate(values)}
    pts = [(x, code[v]) for x, v in sh.points]
    nb = {pts[e]: [pts[f] for f in bits(sh.top.nbhd[e])] for e in range(len(pts))}
    inv = {i: v for v, i in code.items()}
    n = max(len(values), sh.universe or 0, 1)

    def act(g, p):
        e = sh.index[(p[0], inv[p[1]])]
        return code[sh.points[sh.action[(g, e)]][1]]

    out = make_sheaf(sh.base, pts, lambda p: nb[p], act, f"code({sh.name})", n)
    return out, code


def classifying_morphism(sh: EquivariantSheaf, n: int | None = None, recode_values: bool = False) -> Classification:
    """f₀(x) = fiber over x, f₁(g) = α(g, ·), into S at bound n (default: the sheaf's universe)."""
    code = None
    if recode_values:
        sh, code = recode(sh)
    n = n if n is not None else sh.universe
    for e, (x, v) in enumerate(sh.points):
        if isinstance(v, bool) or not isinstance(v, int) or not (0 <= v < (n or 0)):
            raise VerificationError("fiber not a subset of the atom universe",
                                    {"object": x, "value": v})
    S = classifier(n)
    B = sh.base
    f0 = tuple(S.object_of(sh.fiber_values(x)) for x in range(B.n_objects))
    f1 = []
    for g in range(B.n_arrows):
        mp = {sh.points[e][1]: sh.points[sh.action[(g, e)]][1] for e in sh.fibers.get(B.src[g], [])}
        f1.append(S.arrow_of(f0[B.src[g]], f0[B.tgt[g]], mp))
    mor = GroupoidMorphism(B, S.gpd, f0, tuple(f1))
    for k, c in mor.continuity().items():
        if not c:
            raise VerificationError(f"classifying map: {k} fails", c.witness)
    return Classification(mor, S, sh, code)


def pullback_sheaf(m: GroupoidMorphism, sh: EquivariantSheaf, name: str = "") -> EquivariantSheaf:
    """f*(A): fiber over x is A's fiber over f₀(x), with the fiber-product topology."""
    bad = m.functoriality()
    if bad:
        raise VerificationError("pullback along a non-functorial map", bad[:3])
    for k, c in m.continuity().items():
        if not c:
            raise VerificationError(f"pullback along a non-continuous morphism: {k}", c.witness)
    H = m.dom
    pts = [(x, v) for x in range(H.n_objects) for v in sh.fiber_values(m.f0[x])]

    def nb(p):
        x, v = p
        u = sh.top.nbhd[sh.index[(m.f0[x], v)]]
        out = []
        for y in bits(H.obj_top.nbhd[x]):
            for f in sh.fibers.get(m.f0[y], []):
                if (u >> f) & 1:
                    out.append((y, sh.points[f][1]))
        return out

    def act(g, p):
        x, v = p
        e = sh.index[(m.f0[x], v)]
        return sh.points[sh.action[(m.f1[g], e)]][1]

    return make_sheaf(H, pts, nb, act, name or f"pullback({sh.name})", sh.universe)


def teq_isomorphism(S: ClassifierGroupoid, g: GroupoidOfModels) -> tuple[GroupoidMorphism, Report]:
    """S → G_{T_EQ} by carriers and components, checked as a homeomorphic isomorphism."""
    rep = Report("S isomorphic to the T_EQ groupoid")
    sort = g.sorts[0]
    obj = {m.C[sort]: i for i, m in enumerate(g.models)}
    try:
        f0 = tuple(obj[s] for s in S.subsets)
        f1 = tuple(g.arrow_index(f0[s], f0[t], (img,)) for s, t, img in S.arrows)
    except KeyError as exc:
        rep.add("bijective on objects and arrows", False, {"missing": str(exc)})
        return GroupoidMorphism(S.gpd, g.gpd, (), ()), rep
    mor = GroupoidMorphism(S.gpd, g.gpd, f0, f1)
    rep.add("bijective on objects and arrows",
            len(set(f0)) == g.n_objects == S.n_objects and len(set(f1)) == g.n_arrows == S.n_arrows)
    v = mor.functoriality()
    rep.add("functorial", not v, v[:3])
    h0 = is_homeomorphism(f0, S.gpd.obj_top, g.obj_top)
    rep.add("homeomorphism on objects", h0.ok, h0.witness)
    h1 = is_homeomorphism(f1, S.gpd.arr_top, g.arr_top)
    rep.add("homeomorphism on arrows", h1.ok, h1.witness)
    return mor, rep
