"""Pass/fail reports with witnesses, shared by the checkers and the CLI."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

PASS, FAIL, SKIPPED = "PASS", "FAIL", "SKIPPED"


@dataclass
class Entry:
    name: str
    status: str
    witness: Any = None
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.status != FAIL

    def line(self) -> str:
        s = f"{self.name}: {self.status}"
        if self.note:
            s += f" ({self.note})"
        if self.status == FAIL and self.witness is not None:
            s += f" witness={_short(self.witness)}"
        return s

    def to_json(self) -> dict:
        return {"name": self.name, "status": self.status, "note": self.note,
                "witness": _jsonable(self.witness)}


@dataclass
class Report:
    title: str = ""
    entries: list[Entry] = field(default_factory=list)

    def add(self, name: str, ok: bool, witness: Any = None, note: str = "") -> Entry:
        e = Entry(name, PASS if ok else FAIL, None if ok else witness, note)
        self.entries.append(e)
        return e

    def skip(self, name: str, reason: str) -> Entry:
        e = Entry(name, SKIPPED, None, reason)
        self.entries.append(e)
        return e

    def extend(self, other: "Report", prefix: str = "") -> None:
        for e in other.entries:
            self.entries.append(Entry(prefix + e.name, e.status, e.witness, e.note))

    @property
    def ok(self) -> bool:
        return all(e.ok for e in self.entries)

    @property
    def skipped(self) -> bool:
        return any(e.status == SKIPPED for e in self.entries)

    def violations(self) -> list[Entry]:
        return [e for e in self.entries if e.status == FAIL]

    def __getitem__(self, name: str) -> Entry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def lines(self) -> list[str]:
        return [e.line() for e in self.entries]

    def to_json(self) -> dict:
        return {"title": self.title, "ok": self.ok, "entries": [e.to_json() for e in self.entries]}


def _jsonable(x: Any):
    if x is None or isinstance(x, (bool, int, float, str)):
        return x
    if hasattr(x, "to_json"):
        return x.to_json()
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = [_jsonable(v) for v in x]
        return sorted(items, key=repr) if isinstance(x, (set, frozenset)) else items
    return str(x)


def _short(x: Any, limit: int = 160) -> str:
    s = str(_jsonable(x))
    return s if len(s) <= limit else s[:limit - 3] + "..."
