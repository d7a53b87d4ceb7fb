"""Self-contained experiment reports: metadata, tables, verdicts.

Reports serialize deterministically: no wall-clock or environment entropy is
recorded, keys are sorted, and CSV floats carry 17 significant digits so a
rerun with the same configuration is byte-identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

PASS = "pass"
FAIL = "fail"
AUDIT = "audit"


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.17g}"
    return str(value)


@dataclass
class ExperimentReport:
    """Named tables plus per-criterion verdicts, reproducible from the tables."""

    meta: dict
    tables: dict[str, list[dict]] = field(default_factory=dict)
    verdicts: list[dict] = field(default_factory=list)

    def add_table(self, name: str, rows: list[dict]) -> None:
        self.tables[name] = rows

    def add_verdict(self, verdict_id: str, ok: bool, tolerance: float | None) -> None:
        self.verdicts.append(
            {"id": verdict_id, "status": PASS if ok else FAIL, "tolerance": tolerance}
        )

    def add_audit(self, verdict_id: str, note: str | None = None) -> None:
        v = {"id": verdict_id, "status": AUDIT, "tolerance": None}
        if note:
            v["note"] = note
        self.verdicts.append(v)

    def passed(self) -> bool:
        return all(v["status"] != FAIL for v in self.verdicts)

    def to_json(self) -> str:
        payload = {"meta": self.meta, "tables": self.tables, "verdicts": self.verdicts}
        return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=True)

    def write_json(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    def write_csv_tables(self, path) -> list[Path]:
        """One CSV per table, named <stem>.<table>.csv next to path."""
        base = Path(path)
        written = []
        for name, rows in self.tables.items():
            target = base.with_name(f"{base.stem}.{name}.csv")
            if not rows:
                target.write_text("\n")
                written.append(target)
                continue
            cols = list(rows[0].keys())
            lines = [",".join(cols)]
            lines.extend(",".join(_fmt(r[c]) for c in cols) for r in rows)
            target.write_text("\n".join(lines) + "\n")
            written.append(target)
        return written
