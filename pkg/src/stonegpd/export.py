"""Deterministic JSON and DOT output for groupoids, sheaves, spaces and reports."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .models import GroupoidOfModels
from .report import _jsonable
from .sheaves import EquivariantSheaf
from .topology import FiniteTopology, bits


def dumps(obj: Any) -> str:
    """Sorted keys and fixed indentation, so equal inputs give equal bytes."""
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def space_to_json(top: FiniteTopology) -> dict:
    return {"points": top.size, "neighbourhoods": [bits(u) for u in top.nbhd]}


def space_from_json(data: dict) -> FiniteTopology:
    nb = tuple(sum(1 << p for p in u) for u in data["neighbourhoods"])
    return FiniteTopology(data["points"], nb)


def groupoid_to_json(g: GroupoidOfModels) -> dict:
    out = g.to_json()
    if g.obj_top is not None:
        out["object_topology"] = space_to_json(g.obj_top)
        out["arrow_topology"] = space_to_json(g.arr_top)
    return out


def sheaf_to_dot(sh: EquivariantSheaf) -> str:
    """Points grouped by fiber; edges are the non-identity action arrows."""
    lines = ["digraph sheaf {", "  rankdir=LR;"]
    for x, idx in sorted(sh.fibers.items()):
        lines.append(f"  subgraph cluster_{x} {{")
        lines.append(f'    label="object {x}";')
        for e in idx:
            lines.append(f'    p{e} [label="{sh.points[e][1]}"];')
        lines.append("  }")
    base = sh.base
    for (g, e), f in sorted(sh.action.items()):
        if g != base.identity[base.src[g]]:
            lines.append(f'  p{e} -> p{f} [label="g{g}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def write(path: str | Path, text: str) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text, encoding="utf-8")
    return p
