"""Random coefficient ensembles and empirical estimates of their constants.

A random system has equations ``p_j(x) = sum_a c_{j,a} sqrt(binom(d_j, a)) x^a``
where the vector ``C_j = (c_{j,a})_a`` is drawn from one of

* ``gaussian``: independent centred normals with a per-coefficient variance,
* ``lp_ball``: uniform on the unit ball of ``l_p`` (``p > 2``),
* ``sphere``: uniform on the Euclidean unit sphere.

All draws come from Philox streams keyed by ``(seed, trial)`` so any trial
can be regenerated on its own, in any process.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .polycore import HomogeneousPoly, PolySystem, multinomial_weights

__all__ = [
    "EquationModel",
    "EnsembleSpec",
    "ConstantEstimates",
    "stream",
    "trial_rng",
    "sample_coefficients",
    "sample_coefficient_matrix",
    "sample_system",
    "sample_lp_ball",
    "assemble_system",
    "estimate_K",
    "estimate_c0",
    "estimate_c0tilde",
    "estimate_constants",
    "direction_panel",
    "K_T_GRID",
    "C0_EPS_GRID",
    "C0TILDE_EPS_GRID",
    "N_RANDOM_DIRECTIONS",
]

# Estimator grids, in units of the empirical scale of the statistic.
K_T_GRID = (0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0)
C0_EPS_GRID = (0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0)
C0TILDE_EPS_GRID = (0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
N_RANDOM_DIRECTIONS = 32

_KINDS = ("gaussian", "lp_ball", "sphere")


@dataclass(frozen=True)
class EquationModel:
    """Law of one coefficient vector ``C_j``."""

    kind: str = "gaussian"
    variances: tuple[float, ...] | None = None  # gaussian only; None means all ones
    p: float | None = None  # lp_ball only

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown model {self.kind!r}; expected one of {_KINDS}")
        if self.kind == "lp_ball":
            if self.p is None or not self.p > 2:
                raise ValueError(f"lp_ball needs p > 2, got {self.p!r}")
        elif self.p is not None:
            raise ValueError(f"p is only meaningful for lp_ball, got p={self.p!r} for {self.kind}")
        if self.variances is not None:
            if self.kind != "gaussian":
                raise ValueError("a variance profile is only meaningful for the gaussian model")
            v = tuple(float(s) for s in self.variances)
            if any(s < 0 or not math.isfinite(s) for s in v):
                raise ValueError("variances must be finite and non-negative")
            object.__setattr__(self, "variances", v)

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.variances is not None:
            out["variances"] = list(self.variances)
        if self.p is not None:
            out["p"] = self.p
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "EquationModel":
        v = doc.get("variances")
        return cls(doc.get("kind", "gaussian"), tuple(v) if v is not None else None, doc.get("p"))


@dataclass(frozen=True)
class EnsembleSpec:
    n: int
    degrees: tuple[int, ...]
    models: tuple[EquationModel, ...] = ()
    seed: int = 0

    def __post_init__(self):
        degs = tuple(int(d) for d in self.degrees)
        if self.n < 2 or not degs or any(d < 1 for d in degs):
            raise ValueError(f"need n >= 2 and degrees >= 1, got n={self.n}, degrees={degs}")
        models = tuple(self.models) or tuple(EquationModel() for _ in degs)
        if len(models) == 1 and len(degs) > 1:
            models = models * len(degs)
        if len(models) != len(degs):
            raise ValueError(f"{len(models)} models for {len(degs)} equations")
        for N, mdl in zip(self.coefficient_counts_for(self.n, degs), models):
            if mdl.variances is not None and len(mdl.variances) != N:
                raise ValueError(f"variance profile has length {len(mdl.variances)}, expected {N}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "degrees", degs)
        object.__setattr__(self, "models", models)
        object.__setattr__(self, "seed", int(self.seed))

    @staticmethod
    def coefficient_counts_for(n: int, degrees: Sequence[int]) -> tuple[int, ...]:
        return tuple(math.comb(n + d - 1, d) for d in degrees)

    @property
    def m(self) -> int:
        return len(self.degrees)

    @property
    def coefficient_counts(self) -> tuple[int, ...]:
        return self.coefficient_counts_for(self.n, self.degrees)

    @classmethod
    def gaussian(cls, n: int, degrees: Sequence[int], seed: int = 0, variance: float = 1.0) -> "EnsembleSpec":
        counts = cls.coefficient_counts_for(n, degrees)
        models = tuple(
            EquationModel("gaussian", None if variance == 1.0 else (variance,) * N) for N in counts
        )
        return cls(n, tuple(degrees), models, seed)

    @classmethod
    def lp_ball(cls, n: int, degrees: Sequence[int], p: float, seed: int = 0) -> "EnsembleSpec":
        return cls(n, tuple(degrees), tuple(EquationModel("lp_ball", p=p) for _ in degrees), seed)

    @classmethod
    def sphere(cls, n: int, degrees: Sequence[int], seed: int = 0) -> "EnsembleSpec":
        return cls(n, tuple(degrees), tuple(EquationModel("sphere") for _ in degrees), seed)

    def with_seed(self, seed: int) -> "EnsembleSpec":
        return EnsembleSpec(self.n, self.degrees, self.models, seed)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "degrees": list(self.degrees),
            "models": [m.to_dict() for m in self.models],
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EnsembleSpec":
        models = tuple(EquationModel.from_dict(m) for m in doc.get("models", ()))
        return cls(int(doc["n"]), tuple(doc["degrees"]), models, int(doc.get("seed", 0)))


@dataclass(frozen=True)
class ConstantEstimates:
    K_hat: float
    c0_hat: float
    c0tilde_hat: float
    trials: int
    notes: dict = field(default_factory=dict)

    @property
    def Kc0(self) -> float:
        return self.K_hat * self.c0_hat

    def to_dict(self) -> dict:
        return {
            "K_hat": float(self.K_hat),
            "c0_hat": float(self.c0_hat),
            "c0tilde_hat": float(self.c0tilde_hat),
            "trials": int(self.trials),
            "notes": self.notes,
        }


# ---------------------------------------------------------------------------
# streams


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Independent Philox generator for the key path ``(seed, *keys)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, keys)])))


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return stream(seed, 0, trial)


# ---------------------------------------------------------------------------
# samplers


def sample_lp_ball(N: int, p: float, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Uniform draw(s) from ``{x in R^N : sum |x_i|^p <= 1}``.

    Coordinates ``Y_i`` with density proportional to ``exp(-|t|^p)`` are
    exact: ``|Y_i|^p`` is Gamma(1/p) distributed.  ``Y / |Y|_p`` then follows
    the cone measure of the sphere, and the radius ``U^{1/N}`` fills the ball.
    """
    if not p > 2:
        raise ValueError(f"p must exceed 2, got {p!r}")
    if N < 1:
        raise ValueError("N must be positive")
    shape = (N,) if size is None else (size, N)
    mag = rng.gamma(1.0 / p, 1.0, size=shape) ** (1.0 / p)
    Y = np.where(rng.random(shape) < 0.5, -mag, mag)
    norm = np.sum(np.abs(Y) ** p, axis=-1, keepdims=True) ** (1.0 / p)
    U = rng.random(shape[:-1] + (1,))
    X = U ** (1.0 / N) * Y / norm
    return X


def sample_coefficient_matrix(model: EquationModel, N: int, trials: int, rng: np.random.Generator) -> np.ndarray:
    """``(trials, N)`` draws of one coefficient vector."""
    if model.kind == "gaussian":
        G = rng.standard_normal((trials, N))
        if model.variances is not None:
            G *= np.sqrt(np.asarray(model.variances))
        return G
    if model.kind == "sphere":
        G = rng.standard_normal((trials, N))
        return G / np.linalg.norm(G, axis=1, keepdims=True)
    return sample_lp_ball(N, model.p, rng, size=trials)


def sample_coefficients(spec: EnsembleSpec, rng: np.random.Generator) -> list[np.ndarray]:
    """One draw of ``(C_1, ..., C_m)``, in exponent order."""
    return [
        sample_coefficient_matrix(mdl, N, 1, rng)[0]
        for mdl, N in zip(spec.models, spec.coefficient_counts)
    ]


def assemble_system(n: int, degrees: Sequence[int], C: Sequence[np.ndarray]) -> PolySystem:
    """Monomial coefficients ``sqrt(binom(d_j, a)) c_{j,a}``."""
    return PolySystem(
        tuple(
            HomogeneousPoly(n, d, np.asarray(c, dtype=float) * np.sqrt(multinomial_weights(n, d)))
            for d, c in zip(degrees, C)
        )
    )


def sample_system(spec: EnsembleSpec, rng: np.random.Generator | int) -> PolySystem:
    """Random system from ``spec``; an integer ``rng`` is a trial index."""
    if isinstance(rng, (int, np.integer)):
        rng = trial_rng(spec.seed, int(rng))
    return assemble_system(spec.n, spec.degrees, sample_coefficients(spec, rng))


# ---------------------------------------------------------------------------
# estimators


def direction_panel(N: int, seed: int, n_random: int = N_RANDOM_DIRECTIONS) -> np.ndarray:
    """Axis directions followed by ``n_random`` seeded uniform unit vectors."""
    G = stream(seed, 1, N).standard_normal((n_random, N))
    G /= np.linalg.norm(G, axis=1, keepdims=True)
    return np.concatenate([np.eye(N), G])


def _draws(spec: EnsembleSpec, j: int, trials: int) -> np.ndarray:
    return sample_coefficient_matrix(spec.models[j], spec.coefficient_counts[j], trials, stream(spec.seed, 2, j))


def _check_trials(trials: int) -> None:
    if trials < 10_000:
        raise ValueError(f"constant estimates need at least 10^4 trials, got {trials}")


def _K_from_projections(S: np.ndarray) -> float:
    """``max_t t / sqrt(log(2 / p(t)))`` for each column of ``S``."""
    best = 0.0
    A = np.abs(S)
    scale = np.sqrt(np.mean(S * S, axis=0))
    for col, s in zip(A.T, scale):
        if s == 0.0:
            continue
        srt = np.sort(col)
        for g in K_T_GRID:
            t = g * s
            tail = (srt.size - np.searchsorted(srt, t, side="left")) / srt.size
            if tail == 0.0:
                continue
            best = max(best, t / math.sqrt(math.log(2.0 / tail)))
    return best


def _c0_from_projections(S: np.ndarray) -> float:
    """``max_eps p(|s| <= eps) / eps`` over columns of unit-direction projections."""
    best = 0.0
    A = np.abs(S)
    scale = np.sqrt(np.mean(S * S, axis=0))
    for col, s in zip(A.T, scale):
        if s == 0.0:
            continue
        srt = np.sort(col)
        for g in C0_EPS_GRID:
            eps = g * s
            frac = np.searchsorted(srt, eps, side="right") / srt.size
            if frac > 0.0:
                best = max(best, frac / eps)
    return best


def estimate_K(spec: EnsembleSpec, trials: int) -> float:
    """Empirical sub-Gaussian constant, maximised over equations and the panel."""
    _check_trials(trials)
    out = 0.0
    for j, N in enumerate(spec.coefficient_counts):
        S = _draws(spec, j, trials) @ direction_panel(N, spec.seed).T
        out = max(out, _K_from_projections(S))
    return out


def estimate_c0(spec: EnsembleSpec, trials: int) -> float:
    """Empirical small-ball constant, maximised over equations and the panel."""
    _check_trials(trials)
    out = 0.0
    for j, N in enumerate(spec.coefficient_counts):
        S = _draws(spec, j, trials) @ direction_panel(N, spec.seed).T
        out = max(out, _c0_from_projections(S))
    return out


def estimate_c0tilde(spec: EnsembleSpec, trials: int) -> float:
    """Empirical Euclidean small-ball constant ``max_eps p(|C| <= eps sqrt N)^(1/N) / eps``."""
    _check_trials(trials)
    out = 0.0
    for j, N in enumerate(spec.coefficient_counts):
        r = np.sort(np.linalg.norm(_draws(spec, j, trials), axis=1) / math.sqrt(N))
        scale = float(np.sqrt(np.mean(r * r)))
        if scale == 0.0:
            continue
        for g in C0TILDE_EPS_GRID:
            eps = g * scale
            frac = np.searchsorted(r, eps, side="right") / r.size
            if frac > 0.0:
                out = max(out, frac ** (1.0 / N) / eps)
    return out


def estimate_constants(spec: EnsembleSpec, trials: int = 100_000) -> ConstantEstimates:
    K = estimate_K(spec, trials)
    c0 = estimate_c0(spec, trials)
    ct = estimate_c0tilde(spec, trials)
    notes = {
        "t_grid": list(K_T_GRID),
        "eps_grid": list(C0_EPS_GRID),
        "eps_grid_euclidean": list(C0TILDE_EPS_GRID),
        "random_directions": N_RANDOM_DIRECTIONS,
        "grid_units": "empirical RMS of the projected statistic",
    }
    return ConstantEstimates(K, c0, ct, trials, notes)
