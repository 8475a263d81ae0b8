"""End-to-end acceptance checks, one test per criterion.

Each test records a one-line verdict that is printed in the terminal summary
(and immediately, when run with ``-s``).
"""

import math

import numpy as np

from conftest import ACCEPTANCE_LINES
from squeezebell.discrimination import apply_pnrd_cap, evaluate, parity_loss_flag
from squeezebell.fock import BELL_STATES, BellInput, BellState, Encoding, dr_circuit, run_circuit
from squeezebell.kernels import (
    Constraint,
    critical_residual,
    db_from_r,
    dr_output,
    kernel_amplitudes,
    sr_output,
)
from squeezebell.repeater import RepeaterScenario, rate_scaling
from squeezebell.schemes import TABLE1_REFERENCE, run_sr
from squeezebell.sweep import SweepConfig, find_optimum, run_sweep, write_csv
from squeezebell.verify import run_verification


def record(n: int, checks: dict[str, bool], detail: str):
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    if failed:
        line += f"  [failed: {', '.join(failed)}]"
    ACCEPTANCE_LINES[n] = line
    print(line)
    assert ok, line


def near(x, target, tol):
    return abs(x - target) <= tol


def test_criterion_01_dr_canonical(dr26):
    rep = evaluate(dr26)
    s = rep.per_state
    checks = {
        "phi+ in [37.4, 37.6]%": 0.374 <= s["phi+"] <= 0.376,
        "phi- 19.75 +-0.1%": near(s["phi-"], 0.1975, 1e-3),
        "psi+ 100%": near(s["psi+"], 1.0, 1e-3),
        "psi- 100%": near(s["psi-"], 1.0, 1e-3),
        "overall 64.3 +-0.1%": near(rep.overall, 0.643, 1e-3),
    }
    record(
        1, checks,
        f"DR phi+ {100 * s['phi+']:.3f}%  phi- {100 * s['phi-']:.3f}%  psi {100 * s['psi+']:.4f}%  overall {100 * rep.overall:.3f}%",
    )


def test_criterion_02_dr_amplitudes(r_dr):
    plus = kernel_amplitudes(dr_output(r_dr, BellState.PHI_PLUS), 2)
    minus = kernel_amplitudes(dr_output(r_dr, BellState.PHI_MINUS), 2)
    a0, a2p, a2m = abs(plus[0, 0, 0, 0]), abs(plus[2, 0, 0, 0]), abs(minus[2, 0, 0, 0])
    checks = {
        "|0000> phi+ 0.5443": near(a0, 0.5443, 5e-4),
        "|2000> phi- 0.2222": near(a2m, 0.2222, 5e-4),
        "|2000> phi+ zero": a2p <= 1e-10,
    }
    record(2, checks, f"|0000>_phi+ {a0:.5f}  |2000>_phi- {a2m:.5f}  |2000>_phi+ {a2p:.1e}")


def test_criterion_03_sr_equal_squeezing(r_sr):
    per_theta = []
    checks = {}
    for theta1 in (0.0, 0.9, 2.5, 4.4):
        res = run_sr(theta1, r_sr, Constraint.OMEGA_PLUS, cap=26)
        s = res.report.per_state
        per_theta.append(res.report.overall)
        checks[f"theta1={theta1}: phi+ 25.03%"] = near(s["phi+"], 0.2503, 1e-3)
        checks[f"theta1={theta1}: phi- 25.03%"] = near(s["phi-"], 0.2503, 1e-3)
        checks[f"theta1={theta1}: overall 62.5%"] = near(res.report.overall, 0.625, 1e-3)
    # The {2,4} and {4,6} photon patterns that single out φ+; with this output-mode
    # order they read |4,2> and |6,4> under Omega+ (|2,4>, |4,6> identify φ- there).
    res = run_sr(0.0, r_sr, Constraint.OMEGA_PLUS, cap=26)
    verdicts = {v.pattern: v.state for v in res.report.verdicts}
    found = {}
    for counts, target, tol in (((2, 4), 0.012, 1e-3), ((4, 6), 0.001, 5e-4)):
        hits = [p for p in (counts, counts[::-1]) if verdicts.get(p) == "phi+"]
        prob = res.table.probability("phi+", hits[0]) if hits else 0.0
        found[counts] = (hits[0] if hits else None, prob)
        checks[f"{counts} pattern -> phi+ {100 * target}%"] = len(hits) == 1 and near(prob, target, tol)
    detail = "SR overall " + "/".join(f"{100 * p:.3f}" for p in per_theta) + "%  " + "  ".join(
        f"|{','.join(map(str, p))}> {100 * q:.3f}% to phi+" for p, q in found.values() if p
    )
    record(3, checks, detail)


def test_criterion_04_critical_squeezing(r_dr, r_sr):
    res_dr = abs(critical_residual(Encoding.DR, r_dr))
    res_sr = abs(critical_residual(Encoding.SR, r_sr))
    checks = {
        "r_DR 0.6585": near(r_dr, 0.6585, 1e-4),
        "DR 5.7195 dB": near(db_from_r(r_dr), 5.7195, 1e-3),
        "r_SR 0.7218": near(r_sr, 0.7218, 1e-4),
        "SR 6.2696 dB": near(db_from_r(r_sr), 6.2696, 1e-3),
        "DR residual": res_dr <= 1e-10,
        "SR residual": res_sr <= 1e-10,
    }
    record(
        4, checks,
        f"r_DR {r_dr:.6f} ({db_from_r(r_dr):.4f} dB)  r_SR {r_sr:.6f} ({db_from_r(r_sr):.4f} dB)  "
        f"residuals {res_dr:.1e}/{res_sr:.1e}",
    )


def test_criterion_05_table1(dr26, sr26):
    raw = {"DR": dr26, "SR": sr26}
    checks, parts = {}, []
    for (enc, m), ref in TABLE1_REFERENCE.items():
        vals = {mode: evaluate(apply_pnrd_cap(raw[enc], m, mode)).overall for mode in ("merge", "discard")}
        matching = [mode for mode, v in vals.items() if near(v, ref, 5e-3)]
        checks[f"{enc}/{m} {100 * ref:.1f}%"] = bool(matching)
        parts.append(
            f"{enc}/{m} merge {100 * vals['merge']:.2f} discard {100 * vals['discard']:.2f} "
            f"(ref {100 * ref:.1f}, match {'+'.join(matching) or 'none'})"
        )
    record(5, checks, "; ".join(parts))


def test_criterion_06_oracle_equivalence():
    rep = run_verification(cap=10, tolerance=1e-10, grid=True)
    record(6, {"max discrepancy <= 1e-10": rep.passed}, f"{len(rep.checks)} comparisons, max {rep.max_discrepancy:.2e}")


def test_criterion_07_passive_bound():
    rng = np.random.default_rng(7)
    worst, phi_hits = 0.0, 0
    for theta1 in rng.uniform(0, 2 * math.pi, 50):
        for c in Constraint:
            res = run_sr(float(theta1), 0.0, c, cap=8)
            worst = max(worst, abs(res.report.overall - 0.5))
            phi_hits += sum(1 for v in res.report.verdicts if v.state in ("phi+", "phi-"))
    checks = {"overall 50% within 1e-9": worst <= 1e-9, "no phi-unique pattern": phi_hits == 0}
    record(7, checks, f"200 passive runs, max |P - 0.5| {worst:.1e}, phi-unique patterns {phi_hits}")


def test_criterion_08_sweep_optimum(tmp_path):
    quick = run_sweep(SweepConfig.quick())
    best = find_optimum(quick)
    full_cfg = SweepConfig()
    full = run_sweep(full_cfg)
    full_max = float(full.overall.max())
    checks = {
        "quick optimum 62.5 +-1%": near(best.p_overall, 0.625, 0.01),
        "optimum at r1 == r2": best.r1 == best.r2,
        "optimum in [6.0, 6.6] dB": 6.0 <= db_from_r(best.r1) <= 6.6,
        "full grid 352800 records": len(full) == 352_800,
        "no record above 63.5%": full_max <= 0.635,
    }
    record(
        8, checks,
        f"quick optimum {100 * best.p_overall:.2f}% at r={best.r1:g} ({db_from_r(best.r1):.2f} dB); "
        f"full grid {len(full)} records, max {100 * full_max:.2f}%",
    )


def test_criterion_09_parity(r_dr):
    rng = np.random.default_rng(9)
    sr_bad = 0
    for _ in range(1000):
        th1, th2 = rng.uniform(0, 2 * math.pi, 2)
        r1, r2 = rng.uniform(0, 1, 2)
        for b in BELL_STATES:
            amps = kernel_amplitudes(sr_output(th1, th2, r1, r2, b), 12)
            n = np.add.outer(np.arange(13), np.arange(13))
            wrong = (n % 2) != (1 if b.is_psi else 0)
            sr_bad += int(np.any(np.abs(amps[wrong]) > 1e-12))
    dr_flagged, dr_unflagged_loss, dr_patterns = 0, 0, 0
    for r in (0.2, r_dr, 0.9):
        circuit = dr_circuit(r)
        for b in BELL_STATES:
            for pattern, amp in run_circuit(BellInput(Encoding.DR, b), circuit, 12):
                if abs(amp) ** 2 <= 1e-30:
                    continue
                dr_patterns += 1
                dr_flagged += parity_loss_flag(pattern)
                for i, count in enumerate(pattern):
                    if count:
                        lost = list(pattern)
                        lost[i] -= 1
                        dr_unflagged_loss += not parity_loss_flag(lost)
    checks = {
        "SR parity support": sr_bad == 0,
        "DR patterns unflagged": dr_flagged == 0,
        "DR single loss flagged": dr_unflagged_loss == 0,
    }
    record(
        9, checks,
        f"4000 SR outputs with wrong-parity support: {sr_bad}; DR {dr_patterns} patterns, "
        f"flagged {dr_flagged}, unflagged after loss {dr_unflagged_loss}",
    )


def test_criterion_10_repeater():
    a = rate_scaling(RepeaterScenario(5120, 20, 0.50))
    b = rate_scaling(RepeaterScenario(5120, 20, 0.643))
    checks = {
        "1.52e-4 +-2%": near(a, 1.52e-4, 0.02 * 1.52e-4),
        "1.14e-3 +-2%": near(b, 1.14e-3, 0.02 * 1.14e-3),
        "ratio 7.5 +-5%": near(b / a, 7.5, 0.05 * 7.5),
    }
    record(10, checks, f"rates {a:.4e} / {b:.4e}, ratio {b / a:.3f}")


def test_criterion_11_determinism(tmp_path):
    one = write_csv(run_sweep(SweepConfig.quick(workers=1)), tmp_path / "w1.csv").read_bytes()
    two = write_csv(run_sweep(SweepConfig.quick(workers=2)), tmp_path / "w2.csv").read_bytes()
    record(11, {"byte-identical CSV": one == two}, f"quick sweep CSVs with 1 and 2 workers, {len(one)} bytes each")
