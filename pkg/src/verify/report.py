"""
shearForge Verification Report
==============================
The Report certificate: per-requirement entries with residual, tolerance
and pass flag, plus seeds, arithmetic mode and grid descriptions.

Responsibilities:
- ReportEntry / Report value types (overall pass = conjunction of entries)
- deterministic JSON (sorted keys) and CSV tables via pandas
- report schema validation
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

logger = logging.getLogger("shearForge.verify")

REPORT_SCHEMA_VERSION = "1.0"


def _finite(value: float) -> Any:
    # JSON has no infinity; unrecoverable residuals are written as a string
    return value if math.isfinite(value) else "inf"


@dataclass
class ReportEntry:
    id: str
    residual: float
    tolerance: float
    passed: bool
    detail: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        data = {
            "id": self.id,
            "residual": _finite(self.residual),
            "tolerance": _finite(self.tolerance),
            "pass": self.passed,
        }
        if self.detail:
            data["detail"] = self.detail
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "ReportEntry":
        return cls(data["id"], float(data["residual"]), float(data["tolerance"]),
                   bool(data["pass"]), dict(data.get("detail", {})))


@dataclass
class Report:
    """Verification certificate."""
    entries: List[ReportEntry] = field(default_factory=list)
    seeds: Dict[str, Any] = field(default_factory=dict)
    arithmetic: Dict[str, Any] = field(default_factory=dict)
    grids: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def add(self, entry_id: str, residual: float, tolerance: float,
            detail: Optional[Dict] = None) -> ReportEntry:
        residual = float(residual)
        if math.isnan(residual):
            residual = math.inf
        entry = ReportEntry(entry_id, residual, float(tolerance), residual <= tolerance, dict(detail or {}))
        if not entry.passed:
            logger.warning("FAIL %s: residual %.3e > tolerance %.3e", entry_id, residual, tolerance)
        else:
            logger.debug("pass %s: residual %.3e", entry_id, residual)
        self.entries.append(entry)
        return entry

    def fail(self, entry_id: str, reason: str) -> ReportEntry:
        """Record a requirement that could not be evaluated."""
        return self.add(entry_id, math.inf, 0.0, {"error": reason})

    def merge(self, other: "Report", tag: Optional[str] = None) -> None:
        for e in other.entries:
            entry_id = e.id if tag is None else f"{tag}:{e.id}"
            self.entries.append(ReportEntry(entry_id, e.residual, e.tolerance, e.passed, dict(e.detail)))
        for key, value in other.grids.items():
            self.grids.setdefault(key if tag is None else f"{tag}:{key}", value)

    def failures(self) -> List[ReportEntry]:
        return [e for e in self.entries if not e.passed]

    # ------------------------------------------------------------------
    # Serialization
    # ------------------------------------------------------------------

    def to_dict(self) -> Dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "pass": self.passed,
            "entries": [e.to_dict() for e in self.entries],
            "seeds": self.seeds,
            "arithmetic": self.arithmetic,
            "grids": self.grids,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: Dict) -> "Report":
        return cls([ReportEntry.from_dict(e) for e in data.get("entries", [])],
                   dict(data.get("seeds", {})), dict(data.get("arithmetic", {})),
                   dict(data.get("grids", {})))

    def to_frame(self) -> pd.DataFrame:
        rows = [{"id": e.id, "residual": e.residual, "tolerance": e.tolerance, "pass": e.passed}
                for e in self.entries]
        return pd.DataFrame(rows, columns=["id", "residual", "tolerance", "pass"])

    def write(self, json_path: str, csv_path: Optional[str] = None) -> None:
        path = Path(json_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            f.write(self.to_json())
            f.write("\n")
        if csv_path is not None:
            self.to_frame().to_csv(csv_path, index=False, float_format="%.6e")
        logger.info("Report written: %s (%d entries, pass=%s)", path, len(self.entries), self.passed)

    def summary(self) -> str:
        failed = self.failures()
        return (f"{len(self.entries)} requirement(s), {len(failed)} failing"
                + ("" if not failed else ": " + ", ".join(e.id for e in failed[:5])))
