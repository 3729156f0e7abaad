"""Run reports and their human, structured (JSON) and CSV renderings."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction

SCHEMA_VERSION = 1
FORMATS = ("human", "structured", "csv")


def jsonable(x):
    if isinstance(x, Fraction):
        return float(x)
    if isinstance(x, (tuple, list)):
        return [jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if hasattr(x, "value") and isinstance(getattr(x, "value"), str):
        return x.value
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    return str(x)


@dataclass
class Check:
    section: str
    name: str
    passed: bool
    residual: float | None = None
    values: dict = field(default_factory=dict)
    message: str = ""

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"


@dataclass
class RunReport:
    command: str
    checks: list[Check] = field(default_factory=list)

    def add(self, section, name, passed, residual=None, message="", **values) -> Check:
        c = Check(section, name, bool(passed), None if residual is None else float(residual), values, message)
        self.checks.append(c)
        return c

    def extend(self, other: "RunReport"):
        self.checks.extend(other.checks)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def exit_status(self) -> int:
        return 0 if self.passed else 1


def _fmt_res(r):
    return "" if r is None else f" residual={r:.3e}"


def emit_report(report: RunReport, fmt: str = "human") -> str:
    if fmt == "human":
        lines = [f"$ {report.command}"]
        section = None
        for c in report.checks:
            if c.section != section:
                section = c.section
                lines.append(f"== {section}")
            vals = " ".join(f"{k}={json.dumps(jsonable(v), ensure_ascii=False)}" for k, v in c.values.items())
            line = f"[{c.verdict.upper()}] {c.name}{_fmt_res(c.residual)}"
            if vals:
                line += f" {vals}"
            lines.append(line)
            if c.message:
                lines.append(f"       {c.message}")
        failed = sum(not c.passed for c in report.checks)
        lines.append(
            f"exit status: {report.exit_status} "
            f"({len(report.checks) - failed}/{len(report.checks)} checks passed)"
        )
        return "\n".join(lines) + "\n"
    if fmt == "structured":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": report.command,
            "verdict": "pass" if report.passed else "fail",
            "exit_status": report.exit_status,
            "checks": [
                {
                    "section": c.section,
                    "name": c.name,
                    "verdict": c.verdict,
                    "residual": c.residual,
                    "message": c.message,
                    "values": jsonable(c.values),
                }
                for c in report.checks
            ],
        }
        return json.dumps(doc, separators=(",", ":"), ensure_ascii=False, sort_keys=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["section", "name", "verdict", "residual", "message", "values"])
        for c in report.checks:
            w.writerow([
                c.section, c.name, c.verdict, "" if c.residual is None else repr(c.residual), c.message,
                json.dumps(jsonable(c.values), ensure_ascii=False, sort_keys=True),
            ])
        return buf.getvalue()
    raise ValueError(f"unknown report format {fmt!r}; choose from {', '.join(FORMATS)}")
