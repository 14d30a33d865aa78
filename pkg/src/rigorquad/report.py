"""Campaign reports: in-memory structure plus JSON and CSV serialization.

JSON keeps every endpoint as a float literal, which Python's ``json`` writes
with ``repr`` and therefore round-trips bit for bit. The CSV holds one row per
term with the four region columns of the reference layout; one-variable terms
put their ``[delta, pi]`` part under ``bounded-region`` and their ``[0, delta]``
part under ``singularity-center``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .interval import Interval
from .reference import REGION_COLUMNS

__all__ = ["SCHEMA", "VERDICTS", "Entry", "Total", "EnclosureReport", "emit_report", "load_report"]

SCHEMA = "rigorquad.report/1"
VERDICTS = ("intersects", "disjoint", "not-checked")

ONE_D_COLUMNS = {"nonsingular": "bounded-region", "singular": "singularity-center"}


def _num(v: float):
    # JSON has no infinities; unbounded endpoints are written as strings
    return v if math.isfinite(v) else repr(v)


def _iv(x: Interval | None):
    return None if x is None else [_num(x.lo), _num(x.hi)]


def _from_iv(v) -> Interval | None:
    return None if v is None else Interval(float(v[0]), float(v[1]))


@dataclass
class Entry:
    """Result of one (quantity, term, region column) task group."""

    quantity: str
    term: str
    region: str
    enclosure: Interval | None = None
    cells_evaluated: int = 0
    cells_rejected_then_split: int = 0
    fallbacks_used: int = 0
    max_depth_reached: bool = False
    wall_time: float = 0.0
    reference: Interval | None = None
    verdict: str = "not-checked"
    status: str = "done"
    error: str | None = None

    def to_json(self) -> dict:
        d = asdict(self)
        d["enclosure"] = _iv(self.enclosure)
        d["reference"] = _iv(self.reference)
        return d

    @classmethod
    def from_json(cls, d: dict) -> Entry:
        d = dict(d)
        d["enclosure"] = _from_iv(d.get("enclosure"))
        d["reference"] = _from_iv(d.get("reference"))
        return cls(**d)


@dataclass
class Total:
    """A summed quantity with its verdicts (``pass``/``fail``/``not-checked``)."""

    name: str
    enclosure: Interval | None
    complete: bool
    checks: dict[str, str] = field(default_factory=dict)
    reference: Interval | None = None

    def to_json(self) -> dict:
        return {"name": self.name, "enclosure": _iv(self.enclosure), "complete": self.complete,
                "checks": dict(self.checks), "reference": _iv(self.reference)}

    @classmethod
    def from_json(cls, d: dict) -> Total:
        return cls(d["name"], _from_iv(d["enclosure"]), d["complete"], dict(d["checks"]),
                   _from_iv(d.get("reference")))


@dataclass
class EnclosureReport:
    mode: str
    config: dict
    entries: list[Entry] = field(default_factory=list)
    totals: list[Total] = field(default_factory=list)
    timestamp: str = ""
    version: str = ""
    schema: str = SCHEMA

    def total(self, name: str) -> Total:
        for t in self.totals:
            if t.name == name:
                return t
        raise KeyError(name)

    def entry(self, quantity: str, term: str, region: str) -> Entry:
        for e in self.entries:
            if (e.quantity, e.term, e.region) == (quantity, term, region):
                return e
        raise KeyError((quantity, term, region))

    def to_json(self) -> dict:
        return {
            "schema": self.schema,
            "version": self.version,
            "timestamp": self.timestamp,
            "mode": self.mode,
            "config": self.config,
            "entries": [e.to_json() for e in self.entries],
            "totals": [t.to_json() for t in self.totals],
        }

    @classmethod
    def from_json(cls, d: dict) -> EnclosureReport:
        if d.get("schema") != SCHEMA:
            raise ValueError(f"unsupported report schema {d.get('schema')!r}")
        return cls(d["mode"], d["config"], [Entry.from_json(e) for e in d["entries"]],
                   [Total.from_json(t) for t in d["totals"]], d.get("timestamp", ""), d.get("version", ""))

    def to_csv(self) -> str:
        rows: dict[str, dict[str, str]] = {}
        for e in self.entries:
            label = e.term if e.quantity == "dttx" else f"{e.term}@{e.quantity}"
            column = ONE_D_COLUMNS.get(e.region, e.region)
            cell = "" if e.enclosure is None else f"[{e.enclosure.lo!r},{e.enclosure.hi!r}]"
            rows.setdefault(label, {})[column] = cell
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("term",) + REGION_COLUMNS)
        for label, cells in rows.items():
            writer.writerow([label] + [cells.get(c, "") for c in REGION_COLUMNS])
        return buf.getvalue()


def emit_report(report: EnclosureReport, path: str | Path, fmt: str = "json") -> Path:
    """Write ``report`` to ``path`` as JSON or CSV."""
    path = Path(path)
    if fmt == "json":
        text = json.dumps(report.to_json(), indent=2, allow_nan=False) + "\n"
    elif fmt == "csv":
        text = report.to_csv()
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc.strerror or exc}") from exc
    return path


def load_report(path: str | Path) -> EnclosureReport:
    return EnclosureReport.from_json(json.loads(Path(path).read_text(encoding="utf-8")))
