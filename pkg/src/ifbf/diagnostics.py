"""Traces and invariant checks for solver runs.

Each check returns a plain report object; none of them raise on a failed
inequality. Infinite sums are probed through tail-mass ratios, which is a
heuristic: a tail quarter holding more than half the mass is flagged.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, List, Optional

import numpy as np

from .core import CompositeProblem, SmoothFunction, descent_gap, evaluate_objective, sample_pairs

CSV_HEADER = ["n", "lambda", "alpha", "objective", "residual", "merit", "cert",
              "cert_bound", "cum_res2", "cum_dx2"]

TAIL_FLAG = 0.5


@dataclass(frozen=True)
class TraceRow:
    n: int
    lam: float
    alpha: float
    objective: float
    residual: float
    merit: float
    cert: float  # nan when the certificate is unavailable (n = 1)
    cert_bound: float
    cum_res2: float
    cum_dx2: float


@dataclass
class Trace:
    rows: List[TraceRow] = field(default_factory=list)

    def append(self, row: TraceRow) -> None:
        if self.rows and row.n <= self.rows[-1].n:
            raise ValueError("trace rows must have strictly increasing n")
        self.rows.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)


def merit(problem: CompositeProblem, m2: float, p, x) -> float:
    """``H(p, x) = (f + h)(p) + M2 |p - x|^2``; ``inf`` if ``p`` is outside ``dom f``."""
    obj = evaluate_objective(problem, p)
    if obj == math.inf:
        return math.inf
    d = np.asarray(p, dtype=float) - np.asarray(x, dtype=float)
    return obj + m2 * float(d @ d)


@dataclass
class CheckReport:
    name: str
    ok: bool
    advisory: bool = False
    violations: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def first_violation(self):
        return self.violations[0] if self.violations else None

    def to_dict(self) -> dict:
        return asdict(self)


def check_merit_decrease(trace: Trace, m1: float, m2: float, rel_slack: float = 1e-9,
                         advisory: Optional[bool] = None) -> CheckReport:
    """Check ``H_n + (M1 - M2) r_n^2 <= H_{n-1}`` row by row for ``n >= 2``.

    The slack is ``rel_slack * (1 + |H_{n-1}|)``. When ``M1 <= M2`` the
    inequality is not guaranteed and the report is marked advisory.
    """
    if advisory is None:
        advisory = not m1 > m2
    gap = m1 - m2
    violations = []
    rows = trace.rows
    for prev, cur in zip(rows, rows[1:]):
        if cur.n < 2:
            continue
        lhs = cur.merit + gap * cur.residual ** 2
        rhs = prev.merit
        if not lhs <= rhs + rel_slack * (1.0 + abs(rhs)):
            violations.append({"n": cur.n, "lhs": lhs, "rhs": rhs})
    return CheckReport("merit_decrease", not violations or advisory, advisory, violations,
                       {"m1": m1, "m2": m2, "rel_slack": rel_slack})


def check_certificate_bound(trace: Trace, abs_slack: float = 1e-10) -> CheckReport:
    violations = []
    for r in trace:
        if math.isnan(r.cert):
            continue
        if not r.cert <= r.cert_bound + abs_slack:
            violations.append({"n": r.n, "cert": r.cert, "bound": r.cert_bound})
    return CheckReport("certificate_bound", not violations, False, violations,
                       {"abs_slack": abs_slack})


def _tail_ratio(values: np.ndarray) -> float:
    total = float(np.sum(values))
    if total == 0.0:
        return 0.0
    start = len(values) - len(values) // 4
    return float(np.sum(values[start:])) / total


def check_summability(trace: Trace) -> CheckReport:
    """Tail-quarter mass ratio for ``r_n^2`` and ``|x_{n+1} - x_n|^2``.

    A ratio above 0.5 is flagged. A constant nonzero sequence gives about
    0.25 and is *not* flagged; non-convergence shows up in the run status.
    """
    if len(trace) < 16:
        raise ValueError("summability check needs at least 16 trace rows")
    res2 = trace.column("residual") ** 2
    cum_dx2 = trace.column("cum_dx2")
    dx2 = np.diff(np.concatenate([[0.0], cum_dx2]))
    res_ratio, dx_ratio = _tail_ratio(res2), _tail_ratio(np.maximum(dx2, 0.0))
    violations = [
        {"sequence": name, "tail_ratio": v}
        for name, v in (("residual2", res_ratio), ("dx2", dx_ratio)) if v > TAIL_FLAG
    ]
    return CheckReport("summability", not violations, False, violations,
                       {"residual_tail_ratio": res_ratio, "dx_tail_ratio": dx_ratio,
                        "flag_threshold": TAIL_FLAG})


def check_objective_convergence(trace: Trace, spread: float = 1e-6) -> CheckReport:
    obj = trace.column("objective")
    tail = obj[len(obj) - max(1, len(obj) // 4):]
    width = float(tail.max() - tail.min()) if len(tail) else 0.0
    ok = width < spread
    return CheckReport("objective_convergence", ok, False,
                       [] if ok else [{"spread": width}], {"spread": width, "limit": spread})


def check_descent_lemma(h: SmoothFunction, sample_count: int = 1000, seed: int = 0,
                        rel_slack: float = 1e-9, scale: float = 10.0) -> CheckReport:
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    violations = []
    for x, y in sample_pairs(h.dim, sample_count, seed, scale):
        lhs, rhs, mag = descent_gap(h, x, y)
        if lhs > rhs + rel_slack * (1.0 + mag):
            violations.append({"x": x.tolist(), "y": y.tolist(), "lhs": lhs, "rhs": rhs})
    return CheckReport("descent_lemma", not violations, False, violations,
                       {"samples": sample_count})


def check_gradient_fd(h: SmoothFunction, sample_count: int = 100, seed: int = 0,
                      step: float = 1e-6, rel_tol: float = 1e-5, scale: float = 10.0) -> CheckReport:
    """Compare the gradient oracle with central differences."""
    violations = []
    eye = np.eye(h.dim)
    for x, _ in sample_pairs(h.dim, sample_count, seed, scale):
        g = h.gradient(x)
        fd = np.array([(h.value(x + step * e) - h.value(x - step * e)) / (2 * step) for e in eye])
        err = float(np.linalg.norm(fd - g))
        if err > rel_tol * max(1.0, float(np.linalg.norm(g))):
            violations.append({"x": x.tolist(), "error": err})
    return CheckReport("gradient_fd", not violations, False, violations,
                       {"samples": sample_count, "step": step})


def _fmt(v: float) -> str:
    return format(v, ".17g")


def emit_csv(trace: Trace, destination) -> None:
    """Write the trace with 17 significant digits; ``destination`` is a path or text stream."""
    own = isinstance(destination, (str, os.PathLike))
    fh = open(destination, "w", newline="") if own else destination
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in trace:
            writer.writerow([str(r.n)] + [_fmt(getattr(r, f.name)) for f in fields(TraceRow)[1:]])
    finally:
        if own:
            fh.close()


def read_csv(source) -> Trace:
    """Parse a trace written by :func:`emit_csv`. Raises ``ValueError`` on malformed input."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="") as fh:
            text = fh.read()
    else:
        text = source.read()
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != CSV_HEADER:
        raise ValueError(f"unexpected trace header: {header}")
    trace = Trace()
    for line in reader:
        if not line:
            continue
        if len(line) != len(CSV_HEADER):
            raise ValueError(f"malformed trace row: {line}")
        trace.append(TraceRow(int(line[0]), *(float(v) for v in line[1:])))
    return trace


def trace_report(trace: Trace, m1: float, m2: float, rel_slack: float = 1e-9) -> List[CheckReport]:
    """The checks run by ``ifbf check``; summability is skipped on short traces."""
    reports = [check_merit_decrease(trace, m1, m2, rel_slack), check_certificate_bound(trace)]
    if len(trace) >= 16:
        reports.append(check_summability(trace))
    return reports


def all_ok(reports: Iterable[CheckReport]) -> bool:
    return all(r.ok for r in reports)
