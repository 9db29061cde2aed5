"""Bundled theories and their default tracked formulas."""
from __future__ import annotations

from importlib import resources
from pathlib import Path

from .logic.morleyize import morleyize
from .logic.parser import parse_in_context, parse_theory
from .logic.syntax import FormulaInContext, Theory

NAMES = ("t_eq", "t_graph", "t_pointed", "two_sorted", "at_least_three", "inconsistent",
         "unary_p", "classical_p", "classical_all_or_none")
DECIDABLE = ("t_eq", "t_graph", "t_pointed", "two_sorted", "at_least_three", "inconsistent")
CLASSICAL = ("classical_p", "classical_all_or_none")

_TRACKED = {
    "t_eq": ["[x:V | true]", "[x:V, y:V | x != y]", "[ | exists x:V. true]"],
    "t_graph": ["[x:V | true]", "[x:V, y:V | E(x, y)]", "[x:V | exists y:V. E(x, y)]",
                "[x:V, y:V | x != y]"],
    "t_pointed": ["[x:V | true]", "[x:V | x = c]", "[x:V | x != c]"],
    "two_sorted": ["[x:A | true]", "[u:B | true]", "[x:A, u:B | f(x) = u]"],
    "at_least_three": ["[x:V | true]"],
    "inconsistent": ["[x:V | true]"],
    "unary_p": ["[x:V | true]", "[x:V | P(x)]"],
}


def theory_text(name: str) -> str:
    return resources.files("stonegpd").joinpath("theories", f"{name}.thy").read_text(encoding="utf-8")


def load(name: str) -> Theory:
    """A bundled theory by name; ``<name>+m`` gives its Morleyization."""
    if name.endswith("+m"):
        return morleyize(load(name[:-2]))
    return parse_theory(theory_text(name), name=name)


def load_path(path: str | Path) -> Theory:
    p = Path(path)
    return parse_theory(p.read_text(encoding="utf-8"), name=p.stem)


def resolve(spec: str) -> Theory:
    """A file path or a bundled name."""
    base = spec[:-2] if spec.endswith("+m") else spec
    if base in NAMES:
        return load(spec)
    t = load_path(base)
    return morleyize(t) if spec.endswith("+m") else t


def tracked(theory: Theory, name: str | None = None) -> list[FormulaInContext]:
    """Default tracked formulas: bundled lists, or sort and relation generators."""
    name = name or theory.name
    if name in _TRACKED:
        return [parse_in_context(s, theory.signature) for s in _TRACKED[name]]
    return generator_formulas(theory, include_relations=not name.endswith("morleyized"))


def generator_formulas(theory: Theory, include_relations: bool = True) -> list[FormulaInContext]:
    from .logic.syntax import Rel, TOP, Var
    sig = theory.signature
    out = [FormulaInContext((Var("x", s),), TOP) for s in sig.sorts]
    if include_relations:
        for r in sig.relations:
            ctx = tuple(Var(f"x{i}", s) for i, s in enumerate(r.args))
            out.append(FormulaInContext(ctx, Rel(r.name, ctx)))
    return out


def morleyized_sample() -> tuple[Theory, list[FormulaInContext]]:
    """classical_p Morleyized, tracking the images of P and ¬P."""
    t = load("classical_p+m")
    return t, [parse_in_context(s, t.signature)
               for s in ("[x:V | true]", "[x:V | C1(x)]", "[x:V | D1(x)]")]
