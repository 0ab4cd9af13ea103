"""Report rows shared by every subcommand and their JSON / CSV emission.

A bound row is ``{m, quantity, lower, upper, reference, tag, pass}``; tables
that are not bound checks (index tables, milestone lists) are emitted as
plain rows with their own columns.
"""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from typing import Iterable, Sequence

from .conditionality import BoundReport
from .sparse import Enclosure

BOUND_FIELDS = ("m", "quantity", "lower", "upper", "reference", "tag", "pass")


def plain(x):
    """JSON-safe scalar: exact integers stay integers, rationals become floats."""
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else float(x)
    if isinstance(x, Enclosure):
        return float(x)
    if isinstance(x, (list, tuple)):
        return [plain(a) for a in x]
    if hasattr(x, "item"):
        return plain(x.item())
    x = float(x)
    return x if math.isfinite(x) else str(x)


def bound_row(r: BoundReport) -> dict:
    row = {"m": r.m, "quantity": r.quantity, "lower": plain(r.lower), "upper": plain(r.upper),
           "reference": plain(r.reference), "tag": r.tag, "pass": bool(r.passed)}
    if r.witness:
        row["witness"] = r.witness
    for k, v in r.extra.items():
        row[k] = [plain(a) for a in v] if isinstance(v, (list, tuple)) else plain(v)
    return row


def scan_row(quantity: str, m, lower, upper, reference, tag: str, passed: bool, **extra) -> dict:
    row = {"m": m, "quantity": quantity, "lower": plain(lower), "upper": plain(upper),
           "reference": plain(reference), "tag": tag, "pass": bool(passed)}
    row.update({k: plain(v) for k, v in extra.items()})
    return row


def to_json(rows: Sequence[dict]) -> str:
    return json.dumps(list(rows), indent=1) + "\n"


def to_csv(rows: Sequence[dict], fields: Iterable[str] | None = None) -> str:
    """Flat projection.  Bound rows keep the fixed column set; other tables
    use the union of their keys in first-seen order."""
    rows = list(rows)
    if fields is None:
        if rows and all(set(BOUND_FIELDS) <= set(r) for r in rows):
            fields = BOUND_FIELDS
        else:
            fields = list(dict.fromkeys(k for r in rows for k in r))
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(fields), extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _cell(r.get(k)) for k in fields})
    return buf.getvalue()


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple)):
        return ";".join(str(x) for x in v)
    return v


def render(rows: Sequence[dict], fmt: str) -> str:
    return to_csv(rows) if fmt == "csv" else to_json(rows)


def all_pass(rows: Sequence[dict]) -> bool:
    return all(r.get("pass", True) for r in rows)
