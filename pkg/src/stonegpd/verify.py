"""Lemma suites over a theory at a bound, as pass/fail reports."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .duality import (adequacy_probe, check_triangle_identities, counit_eval, hom_set, induced_morphism,
                      stable_opens, unit)
from .logic.syntax import FormulaInContext, Theory
from .logical import logical_groupoid, star_of_david, uses_classical_diagrams
from .models import GroupoidOfModels
from .report import Report
from .sheaves import (check_action_axioms, check_formal_conditions, decompose_stable_open, definable_sheaf,
                      extension, sheaf_basic_opens, stabilize, stabilize_formula)
from .topology import bits, is_continuous

SUITES = ("topology", "sheaf", "duality", "stone", "all")


@dataclass
class RunConfig:
    theory: Theory
    n: int = 2
    tracked: list[FormulaInContext] = field(default_factory=list)
    fiber_cap: int = 2
    universe_mode: str = "tuples"
    ceiling: int | None = None
    strict: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("the bound must be at least 1")
        if self.universe_mode not in ("atoms", "tuples"):
            raise ValueError("universe mode is 'atoms' or 'tuples'")


def groupoid_for(cfg: RunConfig) -> GroupoidOfModels:
    return logical_groupoid(cfg.theory, cfg.n, cfg.tracked, cfg.ceiling)


def topology_suite(g: GroupoidOfModels, tracked: Sequence[FormulaInContext], max_context: int = 2) -> Report:
    rep = Report(f"topology: {g.theory.name} at {g.universe.n}")
    for name, c in g.gpd.continuity_report().items():
        rep.add(name.replace(" ", "-"), c.ok, c.witness)
    rep.add("open-groupoid", g.gpd.continuity_report()["s open"].ok)
    forms = [f for f in tracked if len(f.context) <= max_context]
    shs = [definable_sheaf(g, f) for f in forms]
    lh = [(f, check_action_axioms(s)) for f, s in zip(forms, shs)]
    bad = next(({"formula": str(f)} for f, r in lh if not r["local homeomorphism"].ok), None)
    rep.add("local-homeomorphism", bad is None, bad)
    bad = next(({"formula": str(f), "entry": r.violations()[0].name} for f, r in lh if not r.ok), None)
    rep.add("action-axioms", bad is None, bad)
    bad = next(({"formula": str(f)} for f, r in lh if not r["action continuity"].ok), None)
    rep.add("action-continuous", bad is None, bad)
    bad, count = None, 0
    for i, fa in enumerate(forms):
        for j, fb in enumerate(forms):
            for arrow in hom_set(fa, fb, g):
                count += 1
                da, db = definable_sheaf(g, arrow.source), definable_sheaf(g, arrow.target)
                m = induced_morphism(arrow, da, db)
                c = is_continuous(m.map, da.top, db.top)
                if not c.ok and bad is None:
                    bad = {"arrow": str(arrow.sigma), "witness": c.witness}
    rep.add("f-sigma-continuous", bad is None, bad, note=f"{count} arrows")
    return rep


def stabilization_suite(g: GroupoidOfModels, tracked: Sequence[FormulaInContext]) -> Report:
    """Symbolic stabilization against the set-level one, after the transfer invariant."""
    rep = Report("stabilization")
    v = star_of_david(g)
    rep.add("star-of-david", not v, v[:3])
    if v:
        rep.skip("stabilization-oracle", "transfer invariant fails at this bound")
        return rep
    classical = uses_classical_diagrams(g)
    total = agree = 0
    bad = None
    for f in tracked:
        sh = definable_sheaf(g, f)
        for psi, b, mask in sheaf_basic_opens(sh, tracked):
            xi = stabilize_formula(f, psi, b, g.theory.signature, require_coherent=not classical)
            total += 1
            if extension(sh, xi) == stabilize(sh, mask):
                agree += 1
            elif bad is None:
                bad = {"formula": str(f), "psi": str(psi), "params": list(b)}
    rep.add("stabilization-oracle", agree == total, bad, note=f"{agree}/{total}")
    return rep


def decomposition_suite(g: GroupoidOfModels, tracked: Sequence[FormulaInContext]) -> Report:
    rep = Report("decomposition")
    bad, count = None, 0
    for f in tracked:
        sh = definable_sheaf(g, f)
        for u in stable_opens(sh):
            count += 1
            union = 0
            for part in decompose_stable_open(sh, u):
                union |= extension(sh, part)
            if union != u and bad is None:
                bad = {"formula": str(f), "open": bits(u)}
    rep.add("stable-open-decomposition", bad is None, bad, note=f"{count} stable opens")
    return rep


def sheaf_suite(g: GroupoidOfModels, tracked: Sequence[FormulaInContext], mode: str = "tuples") -> Report:
    rep = Report(f"sheaf: {g.theory.name} at {g.universe.n}")
    bad = None
    for f in tracked:
        r = check_formal_conditions(definable_sheaf(g, f), mode, g.universe.n)
        if not r.ok and bad is None:
            bad = {"formula": str(f), "entry": r.violations()[0].name}
    rep.add("formal-conditions", bad is None, bad)
    rep.extend(stabilization_suite(g, tracked))
    rep.extend(decomposition_suite(g, tracked))
    return rep


def duality_suite(cfg: RunConfig, g: GroupoidOfModels | None = None, corrupt: bool = False) -> Report:
    """Counit and triangle identities, gated by the adequacy probe."""
    rep = Report(f"duality: {cfg.theory.name} at {cfg.n}")
    probe = adequacy_probe(cfg.theory, cfg.tracked, cfg.n, cfg.ceiling)
    if not probe.ok:
        reason = ", ".join(e.name.replace(" stable", "") for e in probe.violations())
        for name in ("counit", "triangle-identities"):
            rep.skip(name, f"adequacy: {reason} differ at {cfg.n} and {cfg.n + 1}")
        return rep
    rep.add("adequacy", True)
    g = g or groupoid_for(cfg)
    ce = counit_eval(g, tracked=cfg.tracked)
    for e in ce.report.entries:
        rep.add(f"counit-{e.name.replace(' ', '-')}", e.ok, e.witness)
    data = corrupted_unit(g) if corrupt else None
    tri = check_triangle_identities(g, tracked=cfg.tracked, data=data)
    bad = tri.violations()
    rep.add("triangle-identities", not bad, bad and {"entry": bad[0].name, "witness": bad[0].witness})
    return rep


def corrupted_unit(g: GroupoidOfModels):
    """The unit on the generator sheaves with one non-identity η₁ entry moved."""
    from dataclasses import replace
    from .duality import generator_objects
    data = unit(g.gpd, [definable_sheaf(g, f) for f in generator_objects(g.theory)])
    eta1 = list(data.eta1)
    for a in range(g.n_arrows):
        others = [b for b in range(data.target.n_arrows)
                  if b != eta1[a] and data.target.src[b] == data.target.src[eta1[a]]
                  and data.target.tgt[b] == data.target.tgt[eta1[a]]]
        if others:
            eta1[a] = others[0]
            return replace(data, eta1=tuple(eta1))
    raise ValueError("no arrow can be corrupted: every hom-set is a singleton")


def stone_suite(max_size: int = 16) -> Report:
    from .stone import all_boolean_algebras, ba_round_trip, ba_sub1_round_trip, space_round_trip
    from .topology import FiniteTopology
    rep = Report("stone")
    algs = all_boolean_algebras(max_size)
    bad = next(({"algebra": b.name} for b in algs if not ba_round_trip(b).ok), None)
    rep.add("ba-round-trip", bad is None, bad, note=f"{len(algs)} algebras")
    bad = next(({"points": k} for k in range(5) if not space_round_trip(FiniteTopology.discrete(k), True).ok), None)
    rep.add("space-round-trip", bad is None, bad)
    bad = next(({"algebra": b.name} for b in algs if not ba_sub1_round_trip(b).ok), None)
    rep.add("sub1-reflection", bad is None, bad)
    return rep


def run_suite(cfg: RunConfig, suite: str = "all") -> Report:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    rep = Report(f"verify {suite}: {cfg.theory.name} at {cfg.n}")
    g = groupoid_for(cfg) if suite != "stone" else None
    if suite in ("topology", "all"):
        rep.extend(topology_suite(g, cfg.tracked))
    if suite in ("sheaf", "all"):
        rep.extend(sheaf_suite(g, cfg.tracked, cfg.universe_mode))
    if suite in ("duality", "all"):
        rep.extend(duality_suite(cfg, g))
    if suite in ("stone", "all"):
        rep.extend(stone_suite())
    return rep
