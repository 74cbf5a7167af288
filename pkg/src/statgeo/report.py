"""Report documents: canonical JSON with fixed float formatting, plus tables."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

from .errors import UsageError

SCHEMA = "1"


@dataclass
class Entry:
    check: str
    model: str
    verdict: str
    residual: float | None = None
    tolerance: float | None = None
    alpha: float | None = None
    k_hat: float | None = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def as_dict(self) -> dict:
        return {
            "check": self.check,
            "model": self.model,
            "alpha": self.alpha,
            "k_hat": self.k_hat,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "details": self.details,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Entry":
        try:
            return cls(
                check=d["check"],
                model=d["model"],
                verdict=d["verdict"],
                residual=d.get("residual"),
                tolerance=d.get("tolerance"),
                alpha=d.get("alpha"),
                k_hat=d.get("k_hat"),
                details=d.get("details", {}),
            )
        except (KeyError, TypeError) as exc:
            raise UsageError(f"malformed report entry: {exc}") from exc


@dataclass
class ReportDocument:
    version: str
    command: str
    config: dict
    tolerances: dict
    seed: int | None
    entries: list[Entry] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "pass" if self.entries and all(e.passed for e in self.entries) else "fail"

    def as_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "version": self.version,
            "command": self.command,
            "config": self.config,
            "tolerances": self.tolerances,
            "seed": self.seed,
            "verdict": self.verdict,
            "entries": [e.as_dict() for e in self.entries],
        }

    def to_json(self) -> str:
        return dumps(self.as_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "ReportDocument":
        if not isinstance(d, dict) or d.get("schema") != SCHEMA:
            raise UsageError("not a report document (missing or unsupported schema)")
        try:
            return cls(
                version=d["version"],
                command=d["command"],
                config=d["config"],
                tolerances=d["tolerances"],
                seed=d["seed"],
                entries=[Entry.from_dict(e) for e in d["entries"]],
            )
        except (KeyError, TypeError) as exc:
            raise UsageError(f"malformed report: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "ReportDocument":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"malformed report JSON: {exc}") from exc
        return cls.from_dict(data)


def _float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    text = format(x, ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits.

    Keys keep insertion order, so identical inputs give identical bytes.
    """
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _float(obj)
    if hasattr(obj, "tolist"):
        return dumps(obj.tolist(), indent, _level)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, set)):
        seq = sorted(obj) if isinstance(obj, set) else obj
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in seq):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# ------------------------------------------------------------------- tables

COLUMNS = ("model", "check", "alpha", "k_hat", "residual", "verdict")


def _sort_key(entry: Entry):
    alpha = entry.alpha
    return (entry.model, entry.check, alpha is not None, alpha if alpha is not None else 0.0)


def merge_rows(documents) -> list[dict]:
    """One row per entry across documents, in a fixed order."""
    entries = [e for doc in documents for e in doc.entries]
    return [{c: getattr(e, c) for c in COLUMNS} for e in sorted(entries, key=_sort_key)]


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".6g")
    return str(v)


def render_table(rows: list[dict], verdict: str) -> str:
    cells = [list(COLUMNS)] + [[_cell(r[c]) for c in COLUMNS] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(COLUMNS))]
    lines = ["  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    lines.append(f"overall: {verdict}")
    return "\n".join(lines) + "\n"


def render_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(COLUMNS)
    for r in rows:
        writer.writerow([repr(r[c]) if isinstance(r[c], float) else ("" if r[c] is None else r[c]) for c in COLUMNS])
    return buf.getvalue()
