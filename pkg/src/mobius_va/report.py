"""Check and report records shared by the verification suites."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

SCHEMA_VERSION = "1.0"
STATUSES = ("pass", "fail", "truncated")


def _plain(x: Any) -> Any:
    """Convert exact scalars and tuples to JSON-friendly values."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    if isinstance(x, float):
        return float(repr(x))
    return str(x)


@dataclass
class Check:
    name: str
    status: str
    anchor: str
    checked: int = 0
    truncated: int = 0
    witnesses: list = field(default_factory=list)
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if self.status == "fail" and not self.witnesses:
            raise ValueError(f"failed check {self.name!r} must carry a witness")

    @classmethod
    def from_counts(cls, name: str, anchor: str, checked: int, truncated: int, witnesses: list, **detail) -> "Check":
        if witnesses:
            status = "fail"
        elif checked == 0:
            status = "truncated"
        else:
            status = "pass"
        return cls(name, status, anchor, checked, truncated, list(witnesses), dict(detail))

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def as_dict(self, max_witnesses: int = 10) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "anchor": self.anchor,
            "checked": self.checked,
            "truncated": self.truncated,
            "witness_count": len(self.witnesses),
            "witnesses": _plain(self.witnesses[:max_witnesses]),
            "detail": _plain(self.detail),
        }


@dataclass
class Report:
    suite: str
    checks: list[Check] = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        if any(c.status == "fail" for c in self.checks):
            return "fail"
        if self.checks and all(c.status == "truncated" for c in self.checks):
            return "truncated"
        return "pass"

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.status == "fail"]

    def as_dict(self, with_timings: bool = False) -> dict:
        out = {"suite": self.suite, "status": self.status, "checks": [c.as_dict() for c in self.checks]}
        if with_timings:
            out["timings"] = {k: round(v, 6) for k, v in sorted(self.timings.items())}
        return out
