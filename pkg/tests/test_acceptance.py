"""Acceptance criteria, one test each.

Every test records a single ``[PASS]``/``[FAIL]`` line; ``conftest.py`` prints
the collected lines at the end of the session.  Criteria 9 and 10 run the
full Monte Carlo experiments and dominate the runtime (several minutes on
one core).
"""
import json
import math
import time

import pytest

from conftest import SQRT2, poly, system
from polycond import bounds as B
from polycond.harness import (
    ExperimentConfig,
    emit_report,
    run_expectation_experiment,
    run_property_group,
    run_tail_experiment,
)
from polycond.randsys import EnsembleSpec
from polycond.spherenet import build_net, kappa_global, sup_dk_certified, sup_norm_certified

LINES: list[str] = []


def record(k, title, checks: dict, detail: str = ""):
    ok = all(bool(v) for v in checks.values())
    failed = [name for name, v in checks.items() if not v]
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {k:>2}: {title}"
    if detail:
        line += f" ({detail})"
    if failed:
        line += f" failed: {', '.join(failed)}"
    LINES.append(line)
    print(line)
    assert ok, line


def timed(fn, *a, **kw):
    t = time.perf_counter()
    out = fn(*a, **kw)
    return out, time.perf_counter() - t


def _by_name(results):
    return {r.name: r for r in results}


TAIL_SEEDS = (0, 1)


def _main_config(trials, seed, jobs=1):
    return ExperimentConfig(EnsembleSpec.gaussian(3, (2, 2), seed=seed), trials=trials, jobs=jobs)


@pytest.fixture(scope="session")
def tail_runs():
    return {s: timed(run_tail_experiment, _main_config(500, s)) for s in TAIL_SEEDS}


@pytest.fixture(scope="session")
def expectation_runs():
    return {j: timed(run_expectation_experiment, _main_config(200, 0, jobs=j)) for j in (1, 2)}


def test_criterion_1_algebraic_identities():
    unit, t1 = timed(run_property_group, "weyl_unit")
    inv, t2 = timed(run_property_group, "weyl_invariance")
    u, v = unit[0], inv[0]
    record(
        1,
        "monomial vector unit norm and Weyl invariance",
        {"unit": u.passed, "unit_samples": u.samples >= 10**4 * 4 * 6, "invariance": v.passed,
         "invariance_samples": v.samples >= 200, "runtime": t1 + t2 < 10},
        f"max dev {1e-12 - u.worst_margin:.2e}, rel dev {1e-10 - v.worst_margin:.2e}, {t1 + t2:.1f}s",
    )


def test_criterion_2_kellogg():
    res, t = timed(run_property_group, "kellogg")
    r = _by_name(res)
    P = system(poly(2, 2, {(2, 0): 1.0, (0, 2): -1.0}))
    s = sup_norm_certified(P, build_net(2, 1e-3))
    d1 = sup_dk_certified(P, 1, build_net(2, 1e-3))
    ratio = d1.lower / s.upper
    record(
        2,
        "Kellogg inequalities and saturation",
        {"equal_degree": r["kellogg_equal_degree"].passed, "mixed_degree": r["kellogg_mixed_degree"].passed,
         "samples": r["kellogg_equal_degree"].samples >= 100 and r["kellogg_mixed_degree"].samples >= 100,
         "saturation": ratio >= 0.99 * 2, "runtime": t < 120},
        f"witness ratio {ratio:.4f} vs d = 2, {t:.1f}s",
    )


def test_criterion_3_square_agreement():
    (r,), t = timed(run_property_group, "square_agreement")
    record(
        3,
        "kappa via L equals kappa via mu_norm",
        {"agreement": r.passed, "samples": r.samples >= 500},
        f"max rel dev {1e-8 - r.worst_margin:.2e}",
    )


def test_criterion_4_condition_number_theorem():
    res, t = timed(run_property_group, "condition_theorem")
    r = _by_name(res)
    n2, n3 = r["condition_number_theorem_n2"], r["condition_number_theorem_n3"]
    record(
        4,
        "W / kappa matches the discriminant distance",
        {"n2": n2.passed, "n2_samples": n2.samples >= 20, "n3": n3.passed, "n3_samples": n3.samples >= 5,
         "runtime": t < 300},
        f"n=2 worst {5e-2 - n2.worst_margin:.2e}, n=3 worst {1e-1 - n3.worst_margin:.2e}, {t:.0f}s",
    )


def test_criterion_5_exact_values():
    lin = kappa_global(system(poly(2, 1, {(1, 0): 1.0})))
    sad = kappa_global(system(poly(2, 2, {(2, 0): 1.0, (0, 2): -1.0})))
    record(
        5,
        "exact values 1 and sqrt 2",
        {"linear_contains": lin.bracket.contains(1.0, rtol=1e-12), "linear_width": lin.bracket.width <= 1e-2,
         "saddle_contains": sad.bracket.contains(SQRT2, rtol=1e-12), "saddle_width": sad.bracket.width <= 1e-2},
        f"[{lin.bracket.lower:.6f}, {lin.bracket.upper:.6f}], [{sad.bracket.lower:.6f}, {sad.bracket.upper:.6f}]",
    )


def test_criterion_6_deterministic_lower_bound(tail_runs, expectation_runs):
    res = _by_name(run_property_group("lower_bound"))
    checked, viol = 0, 0
    for rep, _ in list(tail_runs.values()) + list(expectation_runs.values()):
        lb = rep.checks["lower_bound"]
        checked += lb["checked"]
        viol += lb["sqrt_m1_form_violations"] + lb["corrected_form_violations"]
    record(
        6,
        "certified kappa above the deterministic lower bound",
        {"suite_sqrt_m1_form": res["deterministic_lower_bound"].passed,
         "suite_corrected_form": res["deterministic_lower_bound_corrected"].passed,
         "experiment_trials": viol == 0 and checked > 0},
        f"{checked} experiment trials, {viol} violations",
    )


def test_criterion_7_taylor_growth():
    (r,), t = timed(run_property_group, "taylor")
    record(
        7,
        "Taylor growth inequality",
        {"no_violations": r.passed, "samples": r.samples >= 50 * 100},
        f"worst lhs/rhs {1 - r.worst_margin:.3f}",
    )


def test_criterion_8_distributional_constants():
    res, t = timed(run_property_group, "constants")
    r = _by_name(res)
    names = ("Kc0_gaussian", "Kc0_lp_ball_p4", "Kc0_sphere")
    record(
        8,
        "K_hat * c0_hat >= 0.20 for three ensembles",
        {**{n: r[n].passed for n in names}, "samples": all(r[n].samples >= 10**5 for n in names),
         "runtime": t < 3 * 60},
        ", ".join(f"{n[4:]} {r[n].worst_margin + 0.20:.3f}" for n in names) + f", {t:.0f}s",
    )


def test_criterion_9_tail_consistency(tail_runs):
    checks, parts, As = {}, [], []
    for s, (rep, t) in tail_runs.items():
        A = rep.statistics["fitted_A_main1"]
        As.append(A)
        checks[f"seed{s}_below_main1"] = rep.checks["survival_below_main1"]
        checks[f"seed{s}_A_at_most_10"] = A <= 10
        checks[f"seed{s}_censored_below_5pct"] = rep.statistics["censored_fraction"] < 0.05
        checks[f"seed{s}_runtime"] = t < 15 * 60
        parts.append(f"seed {s}: A={A:.3g}, {t:.0f}s")
    checks["A_stable_2x"] = max(As) <= 2 * min(As)
    record(9, "tail survival below the main bound", checks, "; ".join(parts))


def test_criterion_10_expectation(expectation_runs, tmp_path):
    (r1, t1), (r2, _) = expectation_runs[1], expectation_runs[2]
    s = r1.statistics
    a = json.loads(emit_report(r1, tmp_path / "j1")["results"].read_text())
    b = json.loads(emit_report(r2, tmp_path / "j2")["results"].read_text())
    jobs = (a["config"].pop("jobs"), b["config"].pop("jobs"))
    bp = B.BoundParams(3, (2, 2))
    record(
        10,
        "expectation bounds and reproducibility",
        {"mean_log_below": r1.checks["mean_log_below_bound"],
         "mean_kappa_above": r1.checks["mean_kappa_above_0.01_scale"],
         "scale_formula": math.isclose(s["expectation_scale"], math.sqrt(bp.N) / (bp.m * bp.log_ed)),
         "bit_reproducible": jobs == (1, 2) and a == b},
        f"mean log {s['mean_log_kappa']:.3f} <= {s['log_bound']:.3f}, fitted c {s['fitted_c']:.3g}, {t1:.0f}s",
    )
