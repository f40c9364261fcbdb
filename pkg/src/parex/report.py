"""Check records, reports and their CSV/JSON serialisation."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

CSV_COLUMNS = ("scenario", "check", "value_lhs", "value_rhs", "tolerance", "pass")


def digest(*parts) -> str:
    h = hashlib.sha256()
    for part in parts:
        h.update(repr(part).encode())
        h.update(b"\0")
    return h.hexdigest()[:16]


def _num(x):
    """JSON-safe number: infinities and NaN become strings."""
    if x is None:
        return None
    if isinstance(x, (bool, str)):
        return x
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


@dataclass
class CheckRecord:
    scenario: str
    check: str
    value_lhs: float
    value_rhs: float | None
    tolerance: float | None
    passed: bool | None
    inputs: str = ""

    @property
    def asserted(self) -> bool:
        return self.passed is not None

    def as_row(self) -> list[str]:
        def fmt(v):
            if v is None:
                return ""
            return repr(float(v))

        status = "" if self.passed is None else ("true" if self.passed else "false")
        return [self.scenario, self.check, fmt(self.value_lhs), fmt(self.value_rhs), fmt(self.tolerance), status]

    def as_json(self) -> dict:
        return {
            "scenario": self.scenario,
            "check": self.check,
            "value_lhs": _num(self.value_lhs),
            "value_rhs": _num(self.value_rhs),
            "tolerance": _num(self.tolerance),
            "pass": self.passed,
            "inputs_digest": digest(self.inputs) if self.inputs else "",
        }


@dataclass
class Report:
    scenario: str
    environment: dict = field(default_factory=dict)
    records: list[CheckRecord] = field(default_factory=list)
    table: list[dict] = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    # -- adding checks -------------------------------------------------------
    def add(self, check: str, lhs, rhs=None, tolerance=None, passed=None, inputs="", scenario=None) -> CheckRecord:
        rec = CheckRecord(scenario or self.scenario, check, lhs, rhs, tolerance,
                          None if passed is None else bool(passed), inputs)
        self.records.append(rec)
        return rec

    def check_close(self, check: str, lhs, rhs, rel_tol: float, inputs="", scenario=None) -> CheckRecord:
        """Relative closeness ``|lhs - rhs| <= rel_tol * max(|lhs|, |rhs|)``; equal values always pass."""
        lhs, rhs = float(lhs), float(rhs)
        ok = lhs == rhs or abs(lhs - rhs) <= rel_tol * max(abs(lhs), abs(rhs))
        return self.add(check, lhs, rhs, rel_tol, ok, inputs, scenario)

    def check_le(self, check: str, lhs, rhs, rel_tol: float = 0.0, inputs="", scenario=None) -> CheckRecord:
        """``lhs <= rhs`` allowing ``rel_tol`` relative slack."""
        lhs, rhs = float(lhs), float(rhs)
        ok = lhs <= rhs + rel_tol * max(abs(lhs), abs(rhs))
        return self.add(check, lhs, rhs, rel_tol, ok, inputs, scenario)

    def check_true(self, check: str, condition: bool, value=1.0, inputs="", scenario=None) -> CheckRecord:
        return self.add(check, value, None, 0.0, bool(condition), inputs, scenario)

    def record(self, check: str, value, other=None, inputs="", scenario=None) -> CheckRecord:
        return self.add(check, value, other, None, None, inputs, scenario)

    def merge(self, other: "Report") -> None:
        self.records.extend(other.records)
        self.table.extend(other.table)
        self.warnings.extend(other.warnings)
        for k, v in other.timings.items():
            self.timings[f"{other.scenario}/{k}"] = v

    # -- summaries -----------------------------------------------------------
    @property
    def asserted(self) -> list[CheckRecord]:
        return [r for r in self.records if r.asserted]

    @property
    def failures(self) -> list[CheckRecord]:
        return [r for r in self.records if r.passed is False]

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> dict:
        return {
            "scenario": self.scenario,
            "environment": self.environment,
            "n_checks": len(self.asserted),
            "n_records": len(self.records) - len(self.asserted),
            "n_failed": len(self.failures),
            "all_passed": self.ok,
            "failures": [f"{r.scenario}/{r.check}" for r in self.failures],
            "warnings": self.warnings,
            "checks": [r.as_json() for r in self.records],
        }


def csv_text(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in report.records:
        w.writerow(r.as_row())
    return buf.getvalue()


def json_text(report: Report) -> str:
    return json.dumps(report.summary(), sort_keys=True, indent=2, default=_num) + "\n"


def table_text(rows: list[dict]) -> str:
    if not rows:
        return ""
    columns = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(float(v)) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def emit_report(report: Report, out_dir, fmt: str = "both", stem: str | None = None) -> list[Path]:
    """Write ``<stem>_checks.csv`` and/or ``<stem>_summary.json``, plus table and timings files.

    Timings go to their own file so the summary is reproducible byte for byte.
    """
    if fmt not in ("csv", "json", "both"):
        raise ValueError(f"format must be csv, json or both, got {fmt!r}")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    stem = stem or report.scenario
    written = []
    if fmt in ("csv", "both"):
        p = out / f"{stem}_checks.csv"
        p.write_text(csv_text(report))
        written.append(p)
        if report.table:
            p = out / f"{stem}_table.csv"
            p.write_text(table_text(report.table))
            written.append(p)
    if fmt in ("json", "both"):
        p = out / f"{stem}_summary.json"
        p.write_text(json_text(report))
        written.append(p)
    p = out / f"{stem}_timings.json"
    p.write_text(json.dumps(report.timings, sort_keys=True, indent=2) + "\n")
    written.append(p)
    return written
