"""Cross-check the Fock engine against the closed-form kernels.

The engine is run with a doubled truncation so every pattern inside the
compared ``cap`` box is complete: beam splitters after the squeezers move
photons between modes, so a pattern ``|p, q>`` with ``p, q <= cap`` needs
pre-splitter terms with up to ``p + q`` photons in one mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fock import BELL_STATES, BellInput, Encoding, StateVector, dr_circuit, run_circuit, sr_circuit
from .kernels import (
    Constraint,
    DRCoefficientQuery,
    dr_output,
    dr_phi_coefficient,
    expand_kernel,
    solve_critical_squeezing,
    solve_theta2,
    sr_output,
)

SR_GRID_THETA1 = (0.0, 0.3, 0.67 * math.pi, 1.35 * math.pi, 1.8 * math.pi)
SR_GRID_R = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass
class Discrepancy:
    label: str
    state: str
    value: float
    worst_pattern: tuple[int, ...] | None


@dataclass
class VerificationReport:
    cap: int
    tolerance: float
    checks: list[Discrepancy] = field(default_factory=list)

    @property
    def max_discrepancy(self) -> float:
        return max((c.value for c in self.checks), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_discrepancy <= self.tolerance

    def failures(self) -> list[Discrepancy]:
        return [c for c in self.checks if c.value > self.tolerance]

    def to_dict(self) -> dict:
        return {
            "cap": self.cap,
            "tolerance": self.tolerance,
            "max_discrepancy": self.max_discrepancy,
            "passed": self.passed,
            "checks": len(self.checks),
            "failures": [
                {"label": f.label, "state": f.state, "value": f.value, "pattern": f.worst_pattern} for f in self.failures()
            ],
        }


def compare_states(oracle: StateVector, analytic: StateVector, cap: int) -> tuple[float, tuple[int, ...] | None]:
    """Max amplitude difference inside the ``cap`` box after removing one global phase."""
    a = {p: v for p, v in oracle if max(p) <= cap}
    b = {p: v for p, v in analytic if max(p) <= cap}
    keys = set(a) | set(b)
    overlap = sum(np.conj(b.get(k, 0)) * a.get(k, 0) for k in keys)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    worst, where = 0.0, None
    for k in keys:
        d = abs(a.get(k, 0) / phase - b.get(k, 0))
        if d > worst:
            worst, where = d, k
    return float(worst), where


def verify_sr_point(theta1, r1, r2, cap, constraint=Constraint.OMEGA_PLUS) -> list[Discrepancy]:
    theta2 = solve_theta2(theta1, r1, r2, constraint)
    circuit = sr_circuit(theta1, theta2, r1, r2)
    out = []
    for b in BELL_STATES:
        oracle = run_circuit(BellInput(Encoding.SR, b), circuit, 2 * cap)
        analytic = expand_kernel(sr_output(theta1, theta2, r1, r2, b), cap)
        value, where = compare_states(oracle, analytic, cap)
        out.append(Discrepancy(f"SR theta1={theta1:.6g} r1={r1:g} r2={r2:g}", b.value, value, where))
    return out


def verify_dr(r, cap) -> list[Discrepancy]:
    circuit = dr_circuit(r)
    out = []
    for b in BELL_STATES:
        oracle = run_circuit(BellInput(Encoding.DR, b), circuit, cap)
        analytic = expand_kernel(dr_output(r, b), cap)
        value, where = compare_states(oracle, analytic, cap)
        out.append(Discrepancy(f"DR r={r:.6g}", b.value, value, where))
        if not b.is_psi:
            # third route: the compact φ coefficients, on even patterns only
            half = cap // 2
            compact = {}
            for idx in np.ndindex(*(half + 1,) * 4):
                c = dr_phi_coefficient(DRCoefficientQuery(r, idx, b.sign))
                if c != 0:
                    compact[tuple(2 * i for i in idx)] = c
            value, where = compare_states(oracle, StateVector.from_dict(compact, cap), cap)
            out.append(Discrepancy(f"DR compact r={r:.6g}", b.value, value, where))
    return out


def run_verification(cap: int = 10, tolerance: float = 1e-10, grid: bool = True) -> VerificationReport:
    report = VerificationReport(cap, tolerance)
    report.checks += verify_dr(solve_critical_squeezing(Encoding.DR), cap)
    r_sr = solve_critical_squeezing(Encoding.SR)
    report.checks += verify_sr_point(0.0, r_sr, r_sr, cap)
    if grid:
        for theta1 in SR_GRID_THETA1:
            for r1 in SR_GRID_R:
                for r2 in SR_GRID_R:
                    report.checks += verify_sr_point(theta1, r1, r2, cap)
    return report
