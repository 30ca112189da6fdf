"""Monte Carlo experiments comparing certified condition numbers with the bounds.

Each trial ``i`` draws its system from the Philox stream ``(seed, i)`` and is
processed independently, so results do not depend on the number of worker
processes.  Reports are plain dataclasses that serialise to JSON.
"""
from __future__ import annotations

import json
import math
import subprocess
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.stats import binomtest

from . import bounds as B
from . import kernels
from .polycore import compose_linear, weyl_inner, weyl_monomial_vector
from .randsys import (
    ConstantEstimates,
    EnsembleSpec,
    assemble_system,
    estimate_constants,
    sample_coefficients,
    sample_system,
    stream,
)
from .spectral import kappa_local, mu_norm
from .spherenet import (
    CertificationError,
    NetResourceError,
    build_net,
    dist_to_discriminant,
    kappa_global,
    sup_dk_certified,
    sup_norm_certified,
    taylor_growth_check,
)

__all__ = [
    "DEFAULT_T_GRID",
    "ExperimentConfig",
    "TrialRecord",
    "PropertyResult",
    "SummaryReport",
    "load_config",
    "dumps_config",
    "run_trial",
    "run_trials",
    "run_tail_experiment",
    "run_expectation_experiment",
    "run_property_suite",
    "wilson_interval",
    "fit_A",
    "emit_report",
    "load_report",
    "PROPERTY_GROUPS",
    "run_property_group",
    "git_describe",
]

DEFAULT_T_GRID = tuple(float(x) for x in np.round(np.logspace(0.0, 4.0, 17), 10))


@dataclass(frozen=True)
class ExperimentConfig:
    ensemble: EnsembleSpec
    trials: int = 100
    coarse_delta: float = 0.05
    refine_rounds: int = 6
    rel_tol: float = 0.05
    t_grid: tuple[float, ...] = DEFAULT_T_GRID
    constants: dict = field(default_factory=dict)
    constant_trials: int = 100_000
    out: str | None = None
    jobs: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        tg = tuple(float(t) for t in self.t_grid)
        if any(t < 1 for t in tg) or list(tg) != sorted(tg):
            raise ValueError("t_grid must be sorted ascending with every entry >= 1")
        object.__setattr__(self, "t_grid", tg)
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        allowed = {"K", "c0", "c0tilde", "C", "A", "c", "c_prime", "c1", "c2", "A1", "A2"}
        unknown = set(self.constants) - allowed
        if unknown:
            raise ValueError(f"unknown constant overrides {sorted(unknown)}")
        if not 0 < self.coarse_delta < 1:
            raise ValueError("coarse_delta must lie in (0, 1)")

    def to_dict(self) -> dict:
        out = {
            "n": self.ensemble.n,
            "degrees": list(self.ensemble.degrees),
            "models": [m.to_dict() for m in self.ensemble.models],
            "seed": self.ensemble.seed,
            "trials": self.trials,
            "coarse_delta": self.coarse_delta,
            "refine_rounds": self.refine_rounds,
            "rel_tol": self.rel_tol,
            "t_grid": list(self.t_grid),
            "constants": dict(sorted(self.constants.items())),
            "constant_trials": self.constant_trials,
            "jobs": self.jobs,
        }
        if self.out is not None:
            out["out"] = self.out
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        if "ensemble" in doc:
            ens = EnsembleSpec.from_dict(doc.pop("ensemble"))
        else:
            ens = EnsembleSpec.from_dict(
                {k: doc.pop(k) for k in ("n", "degrees", "models", "seed") if k in doc}
            )
        known = {f.name for f in fields(cls)} - {"ensemble"}
        extra = set(doc) - known
        if extra:
            raise ValueError(f"unknown config keys {sorted(extra)}")
        return cls(ensemble=ens, **doc)

    def replace(self, **kw) -> "ExperimentConfig":
        d = self.to_dict()
        seed = kw.pop("seed", None)
        if seed is not None:
            d["seed"] = seed
        d.update(kw)
        return ExperimentConfig.from_dict(d)


def load_config(text: str) -> ExperimentConfig:
    """Parse ``key = <JSON value>`` lines; ``#`` starts a comment line.

    Keys: ``n``, ``degrees``, ``models``, ``seed``, ``trials``,
    ``coarse_delta``, ``refine_rounds``, ``rel_tol``, ``t_grid``,
    ``constants``, ``constant_trials``, ``out``, ``jobs``.
    """
    doc = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        try:
            doc[key] = json.loads(val.strip())
        except json.JSONDecodeError as exc:
            raise ValueError(f"config line {lineno}: bad value for {key!r}: {exc}") from None
    return ExperimentConfig.from_dict(doc)


def dumps_config(cfg: ExperimentConfig) -> str:
    return "".join(f"{k} = {json.dumps(v)}\n" for k, v in cfg.to_dict().items())


# ---------------------------------------------------------------------------
# trials


@dataclass(frozen=True)
class TrialRecord:
    index: int
    seed: int
    kappa_lower: float
    kappa_estimate: float
    kappa_upper: float
    weyl_norm: float
    sup_lower: float
    sup_upper: float
    L_lower: float
    L_upper: float
    deterministic_lower: float
    deterministic_lower_corrected: float
    censored: bool
    note: str = ""
    wall_time: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if not self.kappa_lower <= self.kappa_estimate:
            raise ValueError("kappa_lower must not exceed kappa_estimate")
        if self.weyl_norm < 0:
            raise ValueError("weyl_norm must be non-negative")

    def to_dict(self, with_time: bool = False) -> dict:
        d = asdict(self)
        if not with_time:
            d.pop("wall_time")
        return d


def run_trial(cfg: ExperimentConfig, index: int) -> TrialRecord:
    t0 = time.perf_counter()
    spec = cfg.ensemble
    P = sample_system(spec, index)
    note = ""
    try:
        res = kappa_global(P, cfg.coarse_delta, cfg.refine_rounds, rel_tol=cfg.rel_tol)
    except (CertificationError, NetResourceError) as exc:
        return TrialRecord(index, spec.seed, 0.0, 0.0, math.inf, 0.0, 0.0, math.inf, 0.0, math.inf,
                           0.0, 0.0, True, f"certification failed: {exc}", time.perf_counter() - t0)
    W = res.weyl_norm
    if W == 0.0:
        note = "zero system"
    sup_u = res.sup_norm.upper
    det = B.lower_bound_deterministic(P, sup_u) if math.isfinite(sup_u) else 0.0
    det_c = B.lower_bound_deterministic_corrected(P, sup_u) if math.isfinite(sup_u) else 0.0
    censored = (not math.isfinite(sup_u)) or (W > 0 and not math.isfinite(res.bracket.upper))
    if censored:
        note = "kappa upper bound not certified"
    return TrialRecord(
        index=index,
        seed=spec.seed,
        kappa_lower=res.bracket.lower,
        kappa_estimate=res.estimate,
        kappa_upper=res.bracket.upper,
        weyl_norm=W,
        sup_lower=res.sup_norm.lower,
        sup_upper=sup_u,
        L_lower=res.L_bracket.lower,
        L_upper=res.L_bracket.upper,
        deterministic_lower=det,
        deterministic_lower_corrected=det_c,
        censored=censored,
        note=note,
        wall_time=time.perf_counter() - t0,
    )


def _trial_job(args):
    cfg, i = args
    return run_trial(cfg, i)


def run_trials(cfg: ExperimentConfig) -> list[TrialRecord]:
    """All trials in index order; ``cfg.jobs`` worker processes."""
    work = [(cfg, i) for i in range(cfg.trials)]
    if cfg.jobs == 1:
        return [_trial_job(w) for w in work]
    with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(pool.map(_trial_job, work, chunksize=max(1, cfg.trials // (4 * cfg.jobs))))


# ---------------------------------------------------------------------------
# statistics


def wilson_interval(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    if n == 0:
        return (0.0, 1.0)
    ci = binomtest(int(k), int(n)).proportion_ci(confidence_level=level, method="wilson")
    return (float(ci.low), float(ci.high))


def fit_A(kappas: Sequence[float], ts: Sequence[float], M0: float, bound: Callable[[float], float]) -> float:
    """Infimum of ``A`` with ``#{kappa >= t A M0} <= floor(bound(t) T)`` at every ``t``.

    The infimum itself is not admissible when a trial sits on the threshold;
    every larger ``A`` is.

    Grid points where the bound allows every trial to exceed impose nothing.
    """
    k = np.sort(np.asarray(kappas, dtype=float))[::-1]
    T = k.size
    best = 0.0
    for t in ts:
        allowed = math.floor(min(1.0, bound(t)) * T)
        if allowed >= T:
            continue
        best = max(best, float(k[allowed]) / (t * M0))
    return best


@dataclass(frozen=True)
class PropertyResult:
    name: str
    inequality: str
    samples: int
    worst_margin: float
    passed: bool
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SummaryReport:
    kind: str
    version: str
    backend: str
    config: dict
    constants: dict
    scales: dict
    trials: list
    survival: list
    bound_curves: list
    statistics: dict
    checks: dict
    properties: list = field(default_factory=list)
    ensemble_valid: bool = True
    wall_time: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "version": self.version,
            "backend": self.backend,
            "config": self.config,
            "constants": self.constants,
            "scales": self.scales,
            "trials": [t.to_dict() for t in self.trials],
            "survival": self.survival,
            "bound_curves": self.bound_curves,
            "statistics": self.statistics,
            "checks": self.checks,
            "properties": [p.to_dict() for p in self.properties],
            "ensemble_valid": self.ensemble_valid,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SummaryReport":
        doc = dict(doc)
        doc["trials"] = [TrialRecord(**t) for t in doc["trials"]]
        doc["properties"] = [PropertyResult(**p) for p in doc.get("properties", [])]
        return cls(**doc)


def git_describe() -> str:
    here = Path(__file__).resolve().parent
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--tags"],
            cwd=here,
            capture_output=True,
            text=True,
            timeout=10,
        )
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return "unknown"


def _bound_params(cfg: ExperimentConfig, est: ConstantEstimates | None) -> B.BoundParams:
    c = cfg.constants
    K = c.get("K", est.K_hat if est else 1.0)
    c0 = c.get("c0", est.c0_hat if est else 1.0)
    ct = c.get("c0tilde", est.c0tilde_hat if est else 1.0)
    return B.BoundParams(cfg.ensemble.n, cfg.ensemble.degrees, K=K, c0=c0, c0tilde=ct, C=c.get("C", 4.0))


def _abs_constants(cfg: ExperimentConfig) -> B.AbsoluteConstants:
    names = {f.name for f in fields(B.AbsoluteConstants)}
    return B.AbsoluteConstants(**{k: v for k, v in cfg.constants.items() if k in names})


def _constants_block(cfg: ExperimentConfig) -> tuple[ConstantEstimates | None, dict]:
    need = not {"K", "c0", "c0tilde"} <= set(cfg.constants)
    valid = any(
        m.kind != "gaussian" or m.variances is None or any(v > 0 for v in m.variances) for m in cfg.ensemble.models
    )
    if not need or not valid:
        return None, {"overrides": dict(sorted(cfg.constants.items())), "estimated": None}
    est = estimate_constants(cfg.ensemble, cfg.constant_trials)
    est2 = estimate_constants(cfg.ensemble, 2 * cfg.constant_trials)
    unstable = {
        k: abs(getattr(est2, k) - getattr(est, k)) / getattr(est, k) > 0.10
        for k in ("K_hat", "c0_hat", "c0tilde_hat")
        if getattr(est, k) > 0
    }
    return est, {
        "overrides": dict(sorted(cfg.constants.items())),
        "estimated": est.to_dict(),
        "doubled_trials": est2.to_dict(),
        "unstable": unstable,
    }


def _lower_bound_checks(trials: list[TrialRecord], P_m: int, n: int) -> dict:
    applies = P_m <= n - 1
    live = [t for t in trials if t.weyl_norm > 0 and math.isfinite(t.sup_upper)]
    sqrt_m1_viol = sum(1 for t in live if t.kappa_lower < t.deterministic_lower * (1 - 1e-12))
    corr_viol = sum(1 for t in live if t.kappa_lower < t.deterministic_lower_corrected * (1 - 1e-12))
    return {
        "sqrt_m1_form_applies": applies,
        "sqrt_m1_form_violations": sqrt_m1_viol,
        "corrected_form_violations": corr_viol,
        "checked": len(live),
        "headline_uses_max": applies,
    }


def _survival_rows(kappas: np.ndarray, ts: Sequence[float], scales: dict) -> list[dict]:
    T = kappas.size
    rows = []
    for t in ts:
        row = {"t": t}
        for name, M in scales.items():
            if M is None:
                continue
            k = int(np.count_nonzero(kappas >= t * M))
            lo, hi = wilson_interval(k, T)
            row[f"p_{name}"] = k / T if T else 0.0
            row[f"ci_low_{name}"] = lo
            row[f"ci_high_{name}"] = hi
        rows.append(row)
    return rows


def _prepare(cfg: ExperimentConfig, kind: str):
    t0 = time.perf_counter()
    est, const_block = _constants_block(cfg)
    bp = _bound_params(cfg, est)
    ac = _abs_constants(cfg)
    trials = run_trials(cfg)
    square = bp.square and bp.n >= 3 and bp.d >= 2
    scales = {
        "general": float(B.M_general(bp)),
        "square": float(B.M_square(bp)) if square else None,
        "main1": float(B.M_main1(bp, ac.A)) if square else None,
        "ckmw": B.M_prime_ckmw(bp.n, bp.degrees) if bp.square and bp.n >= 3 else None,
    }
    const_block["used"] = {"K": bp.K, "c0": bp.c0, "c0tilde": bp.c0tilde, "C": bp.C, **ac.to_dict()}
    valid = any(t.weyl_norm > 0 for t in trials)
    kappas = np.array(
        [
            max(t.kappa_lower, t.deterministic_lower) if bp.m <= bp.n - 1 else t.kappa_lower
            for t in trials
        ]
    )
    return t0, est, const_block, bp, ac, trials, square, scales, valid, kappas


def run_tail_experiment(cfg: ExperimentConfig) -> SummaryReport:
    """Empirical survival of certified ``kappa / M`` against the tail bounds."""
    t0, est, const_block, bp, ac, trials, square, scales, valid, kappas = _prepare(cfg, "tail")
    survival = _survival_rows(kappas, cfg.t_grid, scales)
    curves = B.bound_curve_rows(cfg.t_grid, bp) if cfg.t_grid else []
    stats: dict = {"trials": len(trials), "censored": sum(t.censored for t in trials)}
    stats["censored_fraction"] = stats["censored"] / len(trials)
    checks: dict = {"lower_bound": _lower_bound_checks(trials, bp.m, bp.n)}
    finite = kappas[np.isfinite(kappas)]
    if square and valid:
        M0 = scales["square"]
        A = fit_A(kappas, cfg.t_grid, M0, lambda t: B.tail_bound_main1(t, bp).raw)
        stats["fitted_A_main1"] = A
        stats["fitted_A_main1_reference"] = "M = A * M_square(K, c0, C)"
        stats["fitted_A_main1_formula"] = A * (bp.C ** (2 * (bp.n - 1)))
        below = all(
            r["p_square"] <= B.tail_bound_main1(r["t"], bp).probability_bound for r in survival
        )
        checks["survival_below_main1"] = below
    if valid:
        Ag = fit_A(kappas, cfg.t_grid, scales["general"], lambda t: B.tail_bound_general(t, bp).raw)
        stats["fitted_A_general"] = Ag
        checks["survival_below_general"] = all(
            r["p_general"] <= B.tail_bound_general(r["t"], bp).probability_bound for r in survival
        )
    if finite.size:
        stats["kappa_quantiles"] = {
            str(q): float(np.quantile(finite, q)) for q in (0.05, 0.25, 0.5, 0.75, 0.95)
        }
    sv = [r.get("p_general", 0.0) for r in survival]
    checks["survival_monotone"] = all(a >= b for a, b in zip(sv, sv[1:]))
    return SummaryReport(
        kind="tail",
        version=git_describe(),
        backend=kernels.BACKEND,
        config=cfg.to_dict(),
        constants=const_block,
        scales=scales,
        trials=trials,
        survival=survival,
        bound_curves=curves,
        statistics=stats,
        checks=checks,
        ensemble_valid=valid,
        wall_time=time.perf_counter() - t0,
    )


def run_expectation_experiment(cfg: ExperimentConfig) -> SummaryReport:
    """Sample mean of ``log kappa`` and of ``kappa`` against the moment bounds."""
    t0, est, const_block, bp, ac, trials, square, scales, valid, kappas = _prepare(cfg, "expectation")
    stats: dict = {"trials": len(trials), "censored": sum(t.censored for t in trials)}
    stats["censored_fraction"] = stats["censored"] / len(trials)
    checks: dict = {"lower_bound": _lower_bound_checks(trials, bp.m, bp.n)}
    if valid and np.all(np.isfinite(kappas)):
        logs = np.log(kappas)
        T = logs.size
        mean_log = float(logs.mean())
        se_log = float(logs.std(ddof=1) / math.sqrt(T)) if T > 1 else math.inf
        mean_k = float(kappas.mean())
        se_k = float(kappas.std(ddof=1) / math.sqrt(T)) if T > 1 else math.inf
        le = bp.log_ed
        scale_lower = math.sqrt(bp.N) / (bp.m * le)
        getlog = bp.n * math.log(bp.d) + bp.d * math.log(bp.n)
        M_ref = scales["square"] if square else scales["general"]
        stats.update(
            mean_log_kappa=mean_log,
            se_log_kappa=se_log,
            log_bound=1.0 + math.log(M_ref),
            log_bound_reference="square" if square else "general",
            log_bound_general=1.0 + math.log(scales["general"]),
            mean_kappa=mean_k,
            se_kappa=se_k,
            fitted_c=mean_k / scale_lower,
            expectation_scale=scale_lower,
            fitted_A1=mean_log / getlog if getlog > 0 else None,
            getlog_lower=ac.A1 * getlog,
            getlog_upper=ac.A2 * getlog,
        )
        if bp.square and bp.n >= 3:
            stats["ckmw_log_bound"] = B.ckmw_log_expectation(bp.n, bp.degrees)
        checks["mean_log_below_bound"] = mean_log <= 1.0 + math.log(M_ref)
        checks["mean_kappa_above_0.01_scale"] = mean_k >= 0.01 * scale_lower
        lt = B.lower_tail_and_expectation(bp, 0.5, ac)
        stats["lower_bounds_eps_0.5"] = lt.to_dict()
    return SummaryReport(
        kind="expectation",
        version=git_describe(),
        backend=kernels.BACKEND,
        config=cfg.to_dict(),
        constants=const_block,
        scales=scales,
        trials=trials,
        survival=[],
        bound_curves=[],
        statistics=stats,
        checks=checks,
        ensemble_valid=valid,
        wall_time=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# property suite


def _random_unit(rng, k, n):
    X = rng.standard_normal((k, n))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def _random_orthogonal(rng, n):
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def _gauss_system(rng, n, degrees):
    spec = EnsembleSpec.gaussian(n, degrees)
    return assemble_system(n, degrees, sample_coefficients(spec, rng))


def _prop_weyl_unit(rng, scale):
    worst = 0.0
    k = 2000 if scale == "quick" else 10_000
    count = 0
    for n in range(2, 6):
        X = _random_unit(rng, k, n)
        for d in range(1, 7):
            v = weyl_monomial_vector(n, d, X)
            worst = max(worst, float(np.abs(np.linalg.norm(v, axis=-1) - 1.0).max()))
            count += k
    return PropertyResult("weyl_monomial_unit", "| |X_d(x)|_2 - 1 | <= 1e-12", count, 1e-12 - worst, worst <= 1e-12)


def _prop_weyl_invariance(rng, scale):
    worst = 0.0
    k = 40 if scale == "quick" else 200
    for _ in range(k):
        n = int(rng.integers(2, 5))
        d = int(rng.integers(1, 5))
        f = _gauss_system(rng, n, [d]).polys[0]
        g = _gauss_system(rng, n, [d]).polys[0]
        U = _random_orthogonal(rng, n)
        a = weyl_inner(f, g)
        b = weyl_inner(compose_linear(f, U), compose_linear(g, U))
        scale_ = max(1.0, abs(a))
        worst = max(worst, abs(a - b) / scale_)
    return PropertyResult("weyl_orthogonal_invariance", "|<fU,gU>_W - <f,g>_W| <= 1e-10 rel", k, 1e-10 - worst, worst <= 1e-10)


def _prop_kellogg(rng, scale):
    k = 20 if scale == "quick" else 100
    worst_eq, worst_mx, worst_orth = -math.inf, -math.inf, -math.inf
    for i in range(k):
        d = 2 + i % 3
        P = _gauss_system(rng, 3, [d, d])
        s = sup_norm_certified(P, build_net(3, 1.0 / (3 * d)))
        d1 = sup_dk_certified(P, 1, build_net(3, 1.0 / (3 * d * math.sqrt(2))))
        worst_eq = max(worst_eq, d1.lower / (d * s.upper))
        X = _random_unit(rng, 50, 3)
        Y = rng.standard_normal((50, 3))
        Y -= np.einsum("ki,ki->k", Y, X)[:, None] * X
        Y /= np.linalg.norm(Y, axis=1, keepdims=True)
        exps, coeffs, row = P.flat_terms()
        _, J = kernels.system_values_jacobians(exps, coeffs, row, P.m, X)
        ratios = np.linalg.norm(np.einsum("kmn,kn->km", J, Y), axis=1) / (d * s.upper)
        worst_orth = max(worst_orth, float(ratios.max()))
        Q = _gauss_system(rng, 3, [2, 3])
        dq = 3
        sq = sup_norm_certified(Q, build_net(3, 1.0 / (3 * dq * dq)))
        d1q = sup_dk_certified(Q, 1, build_net(3, 1.0 / (3 * dq * dq * math.sqrt(2))))
        worst_mx = max(worst_mx, d1q.lower / (dq * dq * sq.upper))
    return [
        PropertyResult("kellogg_equal_degree", "lower(|D1P|) <= d * upper(|P|)", k, 1 - worst_eq, worst_eq <= 1, {"n": 3, "d": [2, 3, 4]}),
        PropertyResult("kellogg_mixed_degree", "lower(|D1P|) <= d^2 * upper(|P|)", k, 1 - worst_mx, worst_mx <= 1, {"n": 3, "degrees": [2, 3]}),
        PropertyResult("kellogg_orthogonal", "|DP(x)y| <= d * upper(|P|), x perp y", 50 * k, 1 - worst_orth, worst_orth <= 1, {"n": 3, "d": [2, 3, 4]}),
    ]


def _prop_kc0(rng, scale, seed):
    trials = 20_000 if scale == "quick" else 100_000
    out = []
    for name, spec in (
        ("gaussian", EnsembleSpec.gaussian(3, [2, 2], seed=seed)),
        ("lp_ball_p4", EnsembleSpec.lp_ball(3, [2, 2], 4.0, seed=seed)),
        ("sphere", EnsembleSpec.sphere(3, [2, 2], seed=seed)),
    ):
        est = estimate_constants(spec, trials)
        out.append(
            PropertyResult(f"Kc0_{name}", "K_hat * c0_hat >= 1/4 - 0.05", trials, est.Kc0 - 0.20, est.Kc0 >= 0.20, est.to_dict())
        )
    return out


def _prop_square_agreement(rng, scale):
    k = 100 if scale == "quick" else 500
    worst = 0.0
    for _ in range(k):
        n = int(rng.integers(2, 5))
        P = _gauss_system(rng, n, list(rng.integers(1, 4, size=n - 1)))
        x = _random_unit(rng, 1, n)[0]
        rep = kappa_local(P, x)
        mu = mu_norm(P, x)
        W = rep.kappa_local * rep.L_local
        alt = W / math.sqrt((W / mu) ** 2 + rep.value_norm**2)
        worst = max(worst, abs(alt - rep.kappa_local) / rep.kappa_local)
    return PropertyResult("square_L_vs_mu_norm", "|kappa via L - kappa via mu_norm| <= 1e-8 rel", k, 1e-8 - worst, worst <= 1e-8)


def _prop_condition_theorem(rng, scale):
    out = []
    for n, k, delta, tol in ((2, 5 if scale == "quick" else 20, 1e-3, 5e-2), (3, 2 if scale == "quick" else 5, 2e-2, 1e-1)):
        net = build_net(n, delta)
        worst = 0.0
        for _ in range(k):
            P = _gauss_system(rng, n, [int(rng.integers(2, 5))] if n == 2 else [2] * (n - 1))
            r = kappa_global(P, 0.05, 12, rel_tol=1e-4)
            dist = dist_to_discriminant(P, net)
            worst = max(worst, abs(r.weyl_norm / r.estimate - dist) / r.weyl_norm)
        out.append(
            PropertyResult(
                f"condition_number_theorem_n{n}", f"| |P|_W/kappa - Dist | <= {tol:g} |P|_W", k, tol - worst, worst <= tol, {"n": n, "delta": delta}
            )
        )
    return out


def _prop_taylor(rng, scale):
    k = 10 if scale == "quick" else 50
    viol, worst = 0, 0.0
    net = build_net(3, 1.0 / 6.0)
    for _ in range(k):
        P = _gauss_system(rng, 3, [2, 2])
        gamma = sup_norm_certified(P, net).upper
        chk = taylor_growth_check(P, gamma, rng, n_base=1, probes=100)
        viol += chk.violations
        worst = max(worst, chk.worst_ratio)
    return PropertyResult("taylor_growth", "|P(w)|^2 <= 8(a^2 + (2+e^4) b^4 d^4 g^2)", 100 * k, 1 - worst, viol == 0, {"n": 3, "d": 2})


def _prop_lower_bound(rng, scale):
    k = 10 if scale == "quick" else 40
    worst_sqrt_m1, worst_corr = 0.0, 0.0
    for i in range(k):
        n = 2 + i % 2
        m = [n - 1, n, 2 * n - 3 if 2 * n - 3 >= n - 1 else n - 1][i % 3]
        P = _gauss_system(rng, n, [2] * m)
        r = kappa_global(P, 0.05, 4)
        if m <= n - 1:
            worst_sqrt_m1 = max(worst_sqrt_m1, B.lower_bound_deterministic(P, r.sup_norm.upper) / r.estimate)
        worst_corr = max(worst_corr, B.lower_bound_deterministic_corrected(P, r.sup_norm.upper) / r.estimate)
    return [
        PropertyResult("deterministic_lower_bound", "kappa_lower >= |P|_W / (sup_upper sqrt(m+1)), m <= n-1", k, 1 - worst_sqrt_m1, worst_sqrt_m1 <= 1),
        PropertyResult("deterministic_lower_bound_corrected", "kappa_lower >= |P|_W / (sup_upper sqrt(1+d^2/d_min))", k, 1 - worst_corr, worst_corr <= 1),
    ]


def _prop_bracket_soundness(rng, scale):
    k = 10 if scale == "quick" else 40
    worst = -math.inf
    for _ in range(k):
        P = _gauss_system(rng, 3, [2, 2])
        coarse = sup_norm_certified(P, build_net(3, 0.15))
        fine = sup_norm_certified(P, build_net(3, 0.015))
        worst = max(worst, fine.lower / coarse.upper - 1.0, coarse.lower / fine.upper - 1.0)
    return PropertyResult("bracket_soundness", "fine-net value inside coarse bracket", k, -worst, worst <= 0)


# name -> (stream tag, check); tags are fixed so each group is reproducible alone
PROPERTY_GROUPS = {
    "weyl_unit": (1, _prop_weyl_unit),
    "weyl_invariance": (2, _prop_weyl_invariance),
    "kellogg": (3, _prop_kellogg),
    "constants": (4, None),
    "square_agreement": (5, _prop_square_agreement),
    "condition_theorem": (6, _prop_condition_theorem),
    "taylor": (7, _prop_taylor),
    "lower_bound": (8, _prop_lower_bound),
    "bracket_soundness": (9, _prop_bracket_soundness),
}


def run_property_group(group: str, seed: int = 0, scale: str = "desk") -> list[PropertyResult]:
    if scale not in ("desk", "quick"):
        raise ValueError("scale must be 'desk' or 'quick'")
    if group not in PROPERTY_GROUPS:
        raise ValueError(f"unknown property group {group!r}; expected one of {sorted(PROPERTY_GROUPS)}")
    tag, fn = PROPERTY_GROUPS[group]
    rng = stream(seed, 7, tag)
    res = _prop_kc0(rng, scale, seed) if fn is None else fn(rng, scale)
    return list(res) if isinstance(res, list) else [res]


def run_property_suite(seed: int = 0, scale: str = "desk") -> list[PropertyResult]:
    """Every module invariant at a fixed parameter set; failures are returned, not raised."""
    if scale not in ("desk", "quick"):
        raise ValueError("scale must be 'desk' or 'quick'")
    out: list[PropertyResult] = []
    for group in PROPERTY_GROUPS:
        out.extend(run_property_group(group, seed, scale))
    return out


# ---------------------------------------------------------------------------
# output


def _summary_text(report: SummaryReport) -> str:
    s = report.statistics
    lines = [
        f"kind: {report.kind}",
        f"version: {report.version}",
        f"backend: {report.backend}",
        f"seed: {report.config.get('seed')}",
        f"config: {json.dumps(report.config, sort_keys=True)}",
        f"ensemble valid: {report.ensemble_valid}",
        f"wall time (s): {report.wall_time:.2f}",
    ]
    used = report.constants.get("used")
    if used:
        lines.append("constants: " + ", ".join(f"{k}={v:.6g}" for k, v in used.items()))
    for k, v in report.scales.items():
        if v is not None:
            lines.append(f"scale {k}: {v:.6g}")
    for k in sorted(s):
        v = s[k]
        if isinstance(v, float):
            lines.append(f"{k}: {v:.6g}")
        elif not isinstance(v, dict):
            lines.append(f"{k}: {v}")
    for k, v in report.checks.items():
        lines.append(f"check {k}: {v}")
    for p in report.properties:
        lines.append(f"[{'PASS' if p.passed else 'FAIL'}] {p.name}: {p.inequality} (n={p.samples}, margin={p.worst_margin:.3g})")
    return "\n".join(lines) + "\n"


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def emit_report(report: SummaryReport, path: str | Path) -> dict:
    """Write ``results.json``, tables and ``summary.txt`` into directory ``path``.

    ``results.json`` omits wall-clock times so equal inputs give equal bytes.
    """
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
        files = {}
        res = path / "results.json"
        res.write_text(json.dumps(report.to_dict(), sort_keys=True, indent=1, default=_json_default) + "\n")
        files["results"] = res
        header = f"# version={report.version} seed={report.config.get('seed')} config={json.dumps(report.config, sort_keys=True)}\n"
        if report.survival:
            f = path / "survival.tsv"
            f.write_text(header + B.format_rows(report.survival))
            files["survival"] = f
        if report.bound_curves:
            f = path / "bounds.tsv"
            f.write_text(header + B.format_rows(report.bound_curves))
            files["bounds"] = f
        if report.trials:
            f = path / "trials.tsv"
            f.write_text(header + B.format_rows([t.to_dict() for t in report.trials]))
            files["trials"] = f
        f = path / "summary.txt"
        f.write_text(_summary_text(report))
        files["summary"] = f
    except OSError as exc:
        raise OSError(f"could not write report to {path}: {exc}") from exc
    return files


def load_report(path: str | Path) -> SummaryReport:
    path = Path(path)
    if path.is_dir():
        path = path / "results.json"
    return SummaryReport.from_dict(json.loads(path.read_text()))


def summary_text(report: SummaryReport) -> str:
    return _summary_text(report)
