"""Verification reports and their deterministic serialization."""

import json
import math
from dataclasses import dataclass, field

STATUSES = ("fail", "pass", "skipped")


@dataclass
class VerificationReport:
    subject: str
    status: str
    max_residual: float = 0.0
    samples: int = 0
    witness: dict = None
    notes: str = ""
    details: list = field(default_factory=list)

    @property
    def passed(self):
        return self.status == "pass"

    def to_dict(self):
        d = {
            "subject": self.subject,
            "status": self.status,
            "max_residual": _clean(self.max_residual),
            "samples": self.samples,
            "witness": None if self.witness is None else {k: _clean(v) for k, v in sorted(self.witness.items())},
            "notes": self.notes,
        }
        if self.details:
            d["details"] = [r.to_dict() for r in self.details]
        return d


def _clean(v):
    v = float(v)
    if math.isnan(v) or math.isinf(v):
        return str(v)
    return float("%.6e" % v)


def from_zero_test(subject, zt, notes="", tol=None):
    from .expr.numeric import ATOL
    tol = ATOL if tol is None else tol
    status = "pass" if zt.zero and zt.max_residual <= tol else "fail"
    return VerificationReport(subject, status, zt.max_residual, zt.samples,
                              zt.witness if status == "fail" else None, notes)


def aggregate(subject, reports, notes=""):
    """Combine child reports: pass only when every child passes."""
    reports = list(reports)
    worst = max((r.max_residual for r in reports), default=0.0)
    failed = [r for r in reports if r.status == "fail"]
    status = "fail" if failed else ("pass" if reports else "skipped")
    witness = failed[0].witness if failed else None
    return VerificationReport(subject, status, worst, sum(r.samples for r in reports),
                              witness, notes, reports)


def order_fail_first(reports):
    """Stable ordering: failures first, catalog order otherwise."""
    rank = {"fail": 0, "pass": 1, "skipped": 2}
    return sorted(reports, key=lambda r: rank.get(r.status, 3))


def emit(reports, fmt="text"):
    """Serialize reports; identical input gives identical bytes."""
    reports = order_fail_first(reports)
    n_pass = sum(r.status == "pass" for r in reports)
    n_fail = sum(r.status == "fail" for r in reports)
    n_skip = sum(r.status == "skipped" for r in reports)
    if fmt == "structured":
        doc = {
            "summary": {"total": len(reports), "pass": n_pass, "fail": n_fail, "skipped": n_skip},
            "reports": [r.to_dict() for r in reports],
        }
        return (json.dumps(doc, indent=2, sort_keys=False) + "\n").encode()
    lines = ["# %d checks: %d pass, %d fail, %d skipped" % (len(reports), n_pass, n_fail, n_skip)]
    for r in reports:
        lines.extend(_text_lines(r, 0))
    return ("\n".join(lines) + "\n").encode()


def _text_lines(r, depth):
    pad = "  " * depth
    line = "%s%-4s %s  max_residual=%.3e samples=%d" % (pad, r.status.upper(), r.subject, r.max_residual, r.samples)
    out = [line]
    if r.notes:
        out.append(pad + "     " + r.notes)
    if r.witness:
        w = ", ".join("%s=%.6g" % (k, v) for k, v in sorted(r.witness.items()))
        out.append(pad + "     witness: " + w)
    for c in order_fail_first(r.details):
        out.extend(_text_lines(c, depth + 1))
    return out
