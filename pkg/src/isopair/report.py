"""Deterministic report documents in JSON, CSV and plain text."""

from __future__ import annotations

import csv
import io
import math
import platform
from dataclasses import dataclass, field
from fractions import Fraction

from . import __version__
from .isotopic import Combo
from .kernel import RationalFunction
from .shift import ShiftOperator

__all__ = ["Check", "Report", "emit_report", "to_plain", "dumps"]


class Fixed(dict):
    """A mapping emitted in insertion order rather than sorted."""


@dataclass
class Check:
    id: str
    inputs: dict
    result: object
    passed: bool
    row: dict | None = None  # flat columns for CSV output


@dataclass
class Report:
    command: str
    parameters: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    curve: object = None  # DeviationCurve emitted as N,value in CSV mode
    floating: bool = False

    def add(self, id: str, inputs: dict, result, passed: bool, row: dict | None = None) -> Check:
        c = Check(id, inputs, result, bool(passed), row)
        self.checks.append(c)
        return c

    @property
    def n_pass(self) -> int:
        return sum(c.passed for c in self.checks)

    @property
    def n_fail(self) -> int:
        return len(self.checks) - self.n_pass

    @property
    def ok(self) -> bool:
        return self.n_fail == 0

    def document(self) -> dict:
        doc = Fixed({
            "tool": "isopair",
            "version": __version__,
            "command": self.command,
            "parameters": self.parameters,
            "checks": [
                {"id": c.id, "inputs": c.inputs, "result": c.result, "pass": c.passed} for c in self.checks
            ],
            "summary": Fixed({"pass": self.n_pass, "fail": self.n_fail}),
        })
        if self.floating:
            doc["platform"] = f"{platform.machine()} {platform.system()} python {platform.python_version()}"
        return doc


def to_plain(obj):
    """Reduce library values to JSON-compatible data."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, Fraction):
        return str(obj.numerator) if obj.denominator == 1 else f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, RationalFunction):
        return obj.render()
    if isinstance(obj, ShiftOperator):
        return obj.render()
    if isinstance(obj, Combo):
        return obj.to_json()
    if hasattr(obj, "to_dict"):
        return to_plain(obj.to_dict())
    if isinstance(obj, dict):
        kind = Fixed if isinstance(obj, Fixed) else dict
        return kind((str(k), to_plain(v)) for k, v in obj.items())
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalar
        return to_plain(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _float_text(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return f'"{x}"'
    text = f"{x:.17g}"
    if all(ch not in text for ch in ".en"):
        text += ".0"
    return text


def _string(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch in '"\\':
            out.append("\\" + ch)
        elif ch == "\n":
            out.append("\\n")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def dumps(obj) -> str:
    """Compact JSON with 17-digit floats; keys sorted except in ``Fixed`` mappings."""
    obj = to_plain(obj)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _float_text(obj)
    if isinstance(obj, str):
        return _string(obj)
    if isinstance(obj, list):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    items = list(obj.items()) if isinstance(obj, Fixed) else sorted(obj.items())
    return "{" + ",".join(f"{_string(k)}:{dumps(v)}" for k, v in items) + "}"


def _csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if report.curve is not None:
        return report.curve.to_csv()
    rows = [c.row if c.row is not None else {"id": c.id} for c in report.checks]
    columns = []
    for r in rows:
        for k in r:
            if k not in columns:
                columns.append(k)
    columns.append("pass")
    w.writerow(columns)
    for r, c in zip(rows, report.checks):
        cells = []
        for k in columns[:-1]:
            v = to_plain(r.get(k, ""))
            cells.append(v if isinstance(v, str) else dumps(v))
        cells.append("true" if c.passed else "false")
        w.writerow(cells)
    return buf.getvalue()


def _text(report: Report) -> str:
    lines = [f"isopair {__version__} {report.command}"]
    for c in report.checks:
        lines.append(f"{'PASS' if c.passed else 'FAIL'} {c.id}: {dumps(c.result)}")
    lines.append(f"summary: {report.n_pass} pass, {report.n_fail} fail")
    return "\n".join(lines) + "\n"


def emit_report(report: Report, fmt: str = "json") -> bytes:
    if fmt == "json":
        return (dumps(report.document()) + "\n").encode()
    if fmt == "csv":
        return _csv(report).encode()
    if fmt == "text":
        return _text(report).encode()
    raise ValueError(f"unknown format {fmt!r}")
