"""Verification report: ordered check records, verdict, JSON and text output."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .exact_arith import QuadraticFieldElement, format_rational
from .poly import MultiPoly, UniPoly

SCHEMA_VERSION = 1
STATUSES = ("pass", "fail", "assumption")
PLUMBING = "plumbing"


def to_jsonable(obj):
    """Exact values become strings; containers are converted recursively."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, QuadraticFieldElement):
        return str(obj)
    if isinstance(obj, (MultiPoly, UniPoly)):
        return obj.to_text()
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted((to_jsonable(v) for v in obj), key=str)
    if hasattr(obj, "summary"):
        return to_jsonable(obj.summary())
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return str(obj)


@dataclass
class CheckRecord:
    name: str
    status: str
    anchor: str
    witness: dict = field(default_factory=dict)
    runtime: float | None = None

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"status must be one of {STATUSES}, got {self.status!r}")
        if not self.anchor:
            raise ValueError("every check needs an anchor claim or the 'plumbing' tag")

    def to_dict(self, include_runtime: bool = False) -> dict:
        out = {"name": self.name, "status": self.status, "anchor": self.anchor, "witness": to_jsonable(self.witness)}
        if include_runtime and self.runtime is not None:
            out["runtime_seconds"] = round(self.runtime, 4)
        return out


@dataclass
class VerificationReport:
    name: str
    records: list[CheckRecord] = field(default_factory=list)

    @property
    def failures(self) -> list[CheckRecord]:
        return [r for r in self.records if r.status == "fail"]

    @property
    def assumptions(self) -> list[CheckRecord]:
        return [r for r in self.records if r.status == "assumption"]

    @property
    def verdict(self) -> str:
        return "fail" if self.failures else "pass"

    def record(self, name: str) -> CheckRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    def summary_line(self) -> str:
        if self.failures:
            return f"FAIL: {len(self.failures)} check(s) failed: " + ", ".join(r.name for r in self.failures)
        if self.assumptions:
            names = ", ".join(r.name for r in self.assumptions)
            return f"PASS with {len(self.assumptions)} assumption(s): {names}"
        return "PASS"

    def exit_code(self) -> int:
        return 1 if self.failures else 0

    def to_dict(self, include_runtime: bool = False) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "verdict": self.verdict,
            "summary": self.summary_line(),
            "checks": [r.to_dict(include_runtime) for r in self.records],
            "assumptions": [r.name for r in self.assumptions],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "VerificationReport":
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema version {data.get('schema_version')!r}")
        records = [
            CheckRecord(r["name"], r["status"], r["anchor"], r["witness"], r.get("runtime_seconds"))
            for r in data["checks"]
        ]
        return cls(data["name"], records)


def emit_report(report: VerificationReport, fmt: str = "json", include_runtime: bool = False) -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(include_runtime), indent=2, sort_keys=True) + "\n"
    if fmt == "text":
        return _text(report, include_runtime)
    raise ValueError(f"unknown format {fmt!r}")


def report_from_json(text: str) -> VerificationReport:
    return VerificationReport.from_dict(json.loads(text))


def _text(report: VerificationReport, include_runtime: bool) -> str:
    lines = [f"report: {report.name}"]
    width = max((len(r.name) for r in report.records), default=0)
    for r in report.records:
        tag = {"pass": "PASS", "fail": "FAIL", "assumption": "ASSUME"}[r.status]
        timing = f"  [{r.runtime:.3f}s]" if include_runtime and r.runtime is not None else ""
        anchor = "" if r.anchor == PLUMBING else f"  claim: {r.anchor}"
        lines.append(f"  {tag:<6} {r.name:<{width}}{anchor}{timing}".rstrip())
        if r.status == "fail":
            detail = r.witness.get("error") or r.witness.get("reason")
            if detail:
                lines.append(f"         reason: {detail}")
    if report.assumptions:
        lines.append("assumptions (not verified here):")
        for r in report.assumptions:
            lines.append(f"  - {r.name}: {r.witness.get('statement', r.anchor)}")
    lines.append(report.summary_line())
    return "\n".join(lines) + "\n"
