"""Iteration traces, rate fits, and machine-readable run reports."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ReportMismatchError

__all__ = [
    "StoppingCriteria",
    "IterationTrace",
    "ReportSection",
    "RunReport",
    "fit_geometric_rate",
    "compose_report",
]


@dataclass(frozen=True)
class StoppingCriteria:
    """Sup-norm stopping tolerance and iteration cap for a Picard solve.

    ``raise_on_cap`` controls whether hitting the cap is an error or is
    reported through the trace's ``converged`` flag.
    """

    tol: float
    max_iter: int
    raise_on_cap: bool = True


@dataclass
class IterationTrace:
    """Per-iteration sup-norm deltas and residuals of one Picard solve.

    ``sup_deltas[i]`` is sup|x_{i+1} - x_i|; ``residuals[i]`` is the equation
    residual of iterate i in the same norm.  ``monotone_defect`` records the
    worst node-wise violation of the expected iterate ordering.
    """

    sup_deltas: list[float] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    monotone_defect: float = 0.0

    def record(self, delta: float, residual: float) -> None:
        self.sup_deltas.append(float(delta))
        self.residuals.append(float(residual))
        self.iterations += 1

    def to_dict(self) -> dict:
        return {
            "sup_deltas": list(self.sup_deltas),
            "residuals": list(self.residuals),
            "iterations": self.iterations,
            "converged": self.converged,
            "monotone_defect": self.monotone_defect,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IterationTrace":
        return cls(
            sup_deltas=list(d["sup_deltas"]),
            residuals=list(d["residuals"]),
            iterations=int(d["iterations"]),
            converged=bool(d["converged"]),
            monotone_defect=float(d["monotone_defect"]),
        )


def fit_geometric_rate(trace, burn_in: int = 3) -> float:
    """Least-squares geometric rate of the sup-delta sequence after burn-in.

    Fits log d_n against n and exponentiates the slope; scale-invariant by
    construction.  Early iterates reflect initialization distance rather than
    the asymptotic rate, hence the burn-in.
    """
    deltas = np.asarray(trace.sup_deltas if isinstance(trace, IterationTrace) else trace, dtype=float)
    tail = deltas[burn_in:]
    tail = tail[tail > 0.0]
    if len(tail) < 4:
        raise ValueError("need at least burn_in + 4 positive deltas to fit a rate")
    n = np.arange(len(tail), dtype=float)
    slope = np.polyfit(n, np.log(tail), 1)[0]
    return float(np.exp(slope))


@dataclass
class ReportSection:
    """One contribution to a run report, tagged with its configuration hash."""

    kind: str  # "constants" | "validation" | "trace" | "check"
    name: str
    payload: dict
    config_hash: str


@dataclass
class RunReport:
    """Aggregated validations, traces and checks for one run configuration.

    Check entries carry the measured value next to the pass flag so tolerances
    can be retuned without rerunning.
    """

    constants: dict = field(default_factory=dict)
    validations: dict = field(default_factory=dict)
    traces: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def all_passed(self) -> bool:
        ok = all(v.get("passed", False) for v in self.validations.values())
        return ok and all(c.get("passed", False) for c in self.checks.values())

    def to_dict(self) -> dict:
        return {
            "constants": self.constants,
            "validations": self.validations,
            "traces": self.traces,
            "checks": self.checks,
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        return cls(
            constants=d.get("constants", {}),
            validations=d.get("validations", {}),
            traces=d.get("traces", {}),
            checks=d.get("checks", {}),
            provenance=d.get("provenance", {}),
        )

    @classmethod
    def from_json(cls, s: str) -> "RunReport":
        return cls.from_dict(json.loads(s))


def make_check(name: str, passed: bool, value: float, bound: float) -> dict:
    return {"name": name, "passed": bool(passed), "value": float(value), "bound": float(bound)}


def compose_report(sections: list[ReportSection], provenance: dict | None = None) -> RunReport:
    """Merge sections into one report; all sections must share a config hash."""
    hashes = {s.config_hash for s in sections}
    if len(hashes) > 1:
        raise ReportMismatchError(f"sections carry different config hashes: {sorted(hashes)}")
    report = RunReport(provenance=dict(provenance or {}))
    if sections:
        report.provenance.setdefault("config_hash", sections[0].config_hash)
    for s in sections:
        if s.kind == "constants":
            report.constants = dict(s.payload)
        elif s.kind == "validation":
            report.validations[s.name] = dict(s.payload)
        elif s.kind == "trace":
            report.traces[s.name] = dict(s.payload)
        elif s.kind == "check":
            report.checks[s.name] = dict(s.payload)
        else:
            raise ValueError(f"unknown section kind {s.kind!r}")
    return report
