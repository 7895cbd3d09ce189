"""Machine-readable verification reports.

A report is a flat record of every individual check that ran: check id,
point id, residual, threshold, and verdict, plus per-check residual maxima
and an overall verdict.  Reports embed the configuration that produced them
so a run can be reproduced from its own output.  Serialization is
deterministic (sorted keys); the wall-clock field is the only part that
varies between identical runs.

Most checks are upper bounds (residual <= threshold).  Witness-style checks
(properness floors, non-descent) are lower bounds and carry kind "lower".
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

ARTIFACT_VERSION = "0.1.0"
SCHEMA_VERSION = "1"

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "pharmonic verification report",
    "schema_version": SCHEMA_VERSION,
    "type": "object",
    "required": [
        "command",
        "config",
        "checks",
        "max_residuals",
        "passed",
        "notes",
        "timing_seconds",
        "version",
    ],
    "properties": {
        "command": {"type": "string"},
        "config": {"type": "object"},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["check", "point", "residual", "threshold", "passed", "kind"],
                "properties": {
                    "check": {"type": "string"},
                    "point": {"type": ["integer", "string"]},
                    "residual": {"type": "number"},
                    "threshold": {"type": "number"},
                    "passed": {"type": "boolean"},
                    "kind": {"enum": ["upper", "lower"]},
                },
            },
        },
        "max_residuals": {"type": "object", "additionalProperties": {"type": "number"}},
        "passed": {"type": "boolean"},
        "notes": {"type": "array", "items": {"type": "string"}},
        "timing_seconds": {"type": "number"},
        "version": {"type": "string"},
    },
}


@dataclass(frozen=True)
class CheckRecord:
    check: str
    point: int | str
    residual: float
    threshold: float
    passed: bool
    kind: str = "upper"

    def as_dict(self) -> dict:
        return {
            "check": self.check,
            "point": self.point,
            "residual": self.residual,
            "threshold": self.threshold,
            "passed": self.passed,
            "kind": self.kind,
        }


def upper_check(check: str, point, residual: float, threshold: float) -> CheckRecord:
    """Record for a residual that must stay at or below its threshold."""
    residual = float(residual)
    return CheckRecord(check, point, residual, float(threshold), residual <= threshold)


def lower_check(check: str, point, value: float, floor: float) -> CheckRecord:
    """Record for a witness value that must reach at least its floor."""
    value = float(value)
    return CheckRecord(check, point, value, float(floor), value >= floor, "lower")


@dataclass
class VerificationReport:
    command: str
    config: dict
    checks: list[CheckRecord]
    notes: list[str] = field(default_factory=list)
    timing_seconds: float = 0.0
    version: str = ARTIFACT_VERSION

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def max_residuals(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for c in self.checks:
            if c.kind == "upper":
                out[c.check] = max(out.get(c.check, 0.0), c.residual)
            else:
                out[c.check] = min(out.get(c.check, float("inf")), c.residual)
        return out

    def records_for(self, check: str) -> list[CheckRecord]:
        return [c for c in self.checks if c.check == check]

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "checks": [c.as_dict() for c in self.checks],
            "max_residuals": self.max_residuals,
            "passed": self.passed,
            "notes": list(self.notes),
            "timing_seconds": self.timing_seconds,
            "version": self.version,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.as_dict(), indent=indent, sort_keys=True)

    def to_csv(self) -> str:
        """Flat residual dump, one line per check record."""
        lines = ["check,point,residual,threshold,passed,kind"]
        for c in self.checks:
            lines.append(
                f"{c.check},{c.point},{c.residual!r},{c.threshold!r},{c.passed},{c.kind}"
            )
        return "\n".join(lines) + "\n"


def validate_report_dict(doc: dict) -> None:
    """Structural validation of a report document against the schema."""
    if not isinstance(doc, dict):
        raise ValueError("report must be an object")
    for key in REPORT_SCHEMA["required"]:
        if key not in doc:
            raise ValueError(f"report is missing field {key!r}")
    if not isinstance(doc["command"], str):
        raise ValueError("command must be a string")
    if not isinstance(doc["config"], dict):
        raise ValueError("config must be an object")
    if not isinstance(doc["passed"], bool):
        raise ValueError("passed must be a boolean")
    if not isinstance(doc["notes"], list):
        raise ValueError("notes must be an array")
    if not isinstance(doc["checks"], list):
        raise ValueError("checks must be an array")
    for rec in doc["checks"]:
        for key in ("check", "point", "residual", "threshold", "passed", "kind"):
            if key not in rec:
                raise ValueError(f"check record missing field {key!r}")
        if rec["kind"] not in ("upper", "lower"):
            raise ValueError(f"unknown check kind {rec['kind']!r}")
        if not isinstance(rec["residual"], (int, float)):
            raise ValueError("residual must be numeric")
    if not isinstance(doc["max_residuals"], dict):
        raise ValueError("max_residuals must be an object")
    agg_pass = all(rec["passed"] for rec in doc["checks"])
    if doc["passed"] != agg_pass:
        raise ValueError("overall verdict inconsistent with check records")
