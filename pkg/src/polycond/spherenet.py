"""Covering nets on the unit sphere and the certified quantities built on them.

A net here is a finite point set with a covering radius that holds *by
construction*: every unit vector is within chord distance ``delta`` of some
net point.  From such a net the module produces

* brackets for ``sup |P|`` and ``sup |D^k P|`` (net maximum below, net maximum
  inflated by the Kellogg-type Lipschitz factor above),
* a branch-and-bound bracket for the global condition number
  ``kappa(P) = |P|_W / min_x L(P, x)``,
* a brute-force oracle for the Weyl distance to the real discriminant.

See ``docs/certificates.md`` for the covering and Lipschitz arguments.
"""
from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .polycore import (
    HomogeneousPoly,
    PolySystem,
    derivative,
    exponent_array,
    multinomial_weights,
    weyl_norm_system,
)
from .spectral import script_L, tangent_frames_many

__all__ = [
    "NET_VERSION",
    "DEFAULT_MAX_POINTS",
    "NetResourceError",
    "CertificationError",
    "SphereNet",
    "CertifiedBracket",
    "KappaGlobalResult",
    "net_size",
    "build_net",
    "sup_norm_certified",
    "sup_dk_certified",
    "net_norm_factor",
    "lipschitz_L",
    "kappa_global",
    "dist_to_discriminant",
    "taylor_growth_check",
    "TaylorCheck",
]

NET_VERSION = 1
DEFAULT_MAX_POINTS = 4_000_000
_CHUNK = 65536


class NetResourceError(MemoryError):
    """Raised when a requested net would exceed the point budget."""

    def __init__(self, n: int, delta: float, cardinality: int, budget: int):
        self.n, self.delta, self.cardinality, self.budget = n, delta, cardinality, budget
        super().__init__(
            f"net on S^{n - 1} with delta={delta!r} needs {cardinality} points, budget is {budget}"
        )


class CertificationError(ValueError):
    """The net is too coarse for the requested Lipschitz certificate."""


@dataclass(frozen=True, eq=False)
class SphereNet:
    dim: int
    points: np.ndarray
    delta: float
    construction: str = "circle"
    grid_intervals: int = 0

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=float)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def cardinality(self) -> int:
        return self.points.shape[0]

    def __len__(self) -> int:
        return self.cardinality


@dataclass(frozen=True)
class CertifiedBracket:
    lower: float
    upper: float
    quantity_tag: str
    branch: str = ""
    rigorous: bool = True
    samples: int = 0

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError(f"bracket lower {self.lower!r} exceeds upper {self.upper!r}")

    def contains(self, value: float, rtol: float = 0.0) -> bool:
        slack = rtol * max(abs(self.lower), abs(self.upper) if math.isfinite(self.upper) else 0.0)
        return self.lower - slack <= value <= self.upper + slack

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "quantity_tag": self.quantity_tag,
            "branch": self.branch,
            "rigorous": self.rigorous,
            "samples": self.samples,
        }


# ---------------------------------------------------------------------------
# nets


def _circle_size(delta: float) -> int:
    return max(3, math.ceil(math.pi / (2.0 * math.asin(delta / 2.0))))


def _cube_intervals(n: int, delta: float) -> int:
    return max(1, math.ceil(math.sqrt(n - 1) / delta))


def net_size(n: int, delta: float) -> int:
    """Cardinality of :func:`build_net` ``(n, delta)`` without building it."""
    _check_net_args(n, delta)
    if n == 2:
        return _circle_size(delta)
    K = _cube_intervals(n, delta)
    return (K + 1) ** n - (K - 1) ** n


def _check_net_args(n: int, delta: float) -> None:
    if not 2 <= n <= 6:
        raise ValueError(f"nets are supported for 2 <= n <= 6, got n={n}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta!r}")


def _cube_surface(n: int, K: int) -> np.ndarray:
    # Face j: x_j = +-1, coordinates before j strictly interior, after j free.
    # Each surface grid point is produced exactly once.
    full = -1.0 + 2.0 * np.arange(K + 1) / K
    inner = full[1:-1]
    blocks = []
    for j in range(n):
        axes = [inner] * j + [np.array([-1.0, 1.0])] + [full] * (n - 1 - j)
        if any(a.size == 0 for a in axes):
            continue
        mesh = np.meshgrid(*axes, indexing="ij")
        blocks.append(np.stack([g.reshape(-1) for g in mesh], axis=1))
    pts = np.concatenate(blocks, axis=0)
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def _cache_path(cache_dir: Path, n: int, delta: float) -> Path:
    key = hashlib.sha256(f"{n}|{delta!r}|{NET_VERSION}".encode()).hexdigest()[:16]
    return cache_dir / f"net-n{n}-{key}.npz"


def build_net(
    n: int,
    delta: float,
    *,
    max_points: int = DEFAULT_MAX_POINTS,
    cache_dir: str | os.PathLike | None = None,
) -> SphereNet:
    """Deterministic ``delta``-net of ``S^{n-1}`` in the chord metric.

    ``n = 2`` uses ``K = ceil(pi / (2 asin(delta/2)))`` equally spaced angles,
    whose worst gap midpoint sits at chord ``2 sin(pi/2K) <= delta``.  For
    ``n >= 3`` the surface of ``[-1, 1]^n`` is gridded with ``K`` intervals per
    side and projected radially; ``K >= sqrt(n-1)/delta`` gives the bound.

    Set ``cache_dir`` (or ``POLYCOND_NET_CACHE``) to memoise nets on disk.
    """
    _check_net_args(n, delta)
    size = net_size(n, delta)
    if size > max_points:
        raise NetResourceError(n, delta, size, max_points)
    cache_dir = cache_dir if cache_dir is not None else os.environ.get("POLYCOND_NET_CACHE")
    path = _cache_path(Path(cache_dir), n, delta) if cache_dir else None
    if path is not None and path.exists():
        with np.load(path) as z:
            if int(z["version"]) == NET_VERSION and int(z["n"]) == n and float(z["delta"]) == delta:
                return SphereNet(n, z["points"], delta, str(z["construction"]), int(z["intervals"]))
    if n == 2:
        K = _circle_size(delta)
        theta = 2.0 * math.pi * np.arange(K) / K
        net = SphereNet(2, np.stack([np.cos(theta), np.sin(theta)], axis=1), delta, "circle", K)
    else:
        K = _cube_intervals(n, delta)
        net = SphereNet(n, _cube_surface(n, K), delta, "cube-surface", K)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp.npz")
        np.savez(
            tmp,
            points=net.points,
            n=n,
            delta=delta,
            version=NET_VERSION,
            construction=net.construction,
            intervals=net.grid_intervals,
            covering_radius=_covering_radius(n, net.grid_intervals),
        )
        os.replace(tmp, path)
    return net


def _covering_radius(n: int, K: int) -> float:
    if n == 2:
        return 2.0 * math.sin(math.pi / (2 * K))
    return math.sqrt(n - 1) / K


# ---------------------------------------------------------------------------
# sup-norm brackets


def net_norm_factor(P: PolySystem, delta: float, k: int = 0) -> tuple[float, str]:
    """Denominator ``1 - delta * d^e * sqrt(k+1)`` and the branch name.

    ``e = 1`` when all degrees agree, ``e = 2`` otherwise.
    """
    d = P.max_degree
    equal = len(set(P.degrees)) == 1
    scale = (d if equal else d * d) * math.sqrt(k + 1)
    branch = "equal-degree" if equal else "mixed-degree"
    return 1.0 - delta * scale, branch


def _require_factor(P: PolySystem, delta: float, k: int) -> tuple[float, str]:
    den, branch = net_norm_factor(P, delta, k)
    if den <= 0.0:
        d = P.max_degree
        scale = (d if branch == "equal-degree" else d * d) * math.sqrt(k + 1)
        raise CertificationError(
            f"net delta={delta!r} too coarse for the {branch} bound on D^{k}P: "
            f"need delta < {1.0 / scale!r}"
        )
    return den, branch


def _chunks(K: int, size: int = _CHUNK):
    for a in range(0, K, size):
        yield a, min(K, a + size)


def _net_values_max(P: PolySystem, points: np.ndarray) -> float:
    exps, coeffs, row = P.flat_terms()
    best = 0.0
    for a, b in _chunks(points.shape[0]):
        vals, _ = kernels.system_values_jacobians(exps, coeffs, row, P.m, points[a:b])
        best = max(best, float(np.sqrt(np.einsum("km,km->k", vals, vals)).max()))
    return best


def sup_norm_certified(P: PolySystem, net: SphereNet) -> CertifiedBracket:
    """Bracket for ``sup_{|x|=1} |P(x)|_2`` from one pass over the net."""
    _check_dim(P, net)
    den, branch = _require_factor(P, net.delta, 0)
    lo = _net_values_max(P, net.points)
    return CertifiedBracket(lo, lo / den, "sup_norm", branch, True, net.cardinality)


def _check_dim(P: PolySystem, net: SphereNet) -> None:
    if net.dim != P.n_vars:
        raise ValueError(f"net dimension {net.dim} does not match n_vars={P.n_vars}")


def _partials(P: PolySystem, order: int) -> PolySystem:
    """All ``order``-th partial derivatives of every equation, row-major in the indices."""
    polys: list[HomogeneousPoly] = list(P.polys)
    for _ in range(order):
        polys = [derivative(p, j) for p in polys for j in range(P.n_vars)]
    return PolySystem(tuple(polys))


def _derivative_tensor(P: PolySystem, k: int, X: np.ndarray) -> np.ndarray:
    """``(K, m, n, ..., n)`` tensor of ``D^k P`` at the rows of ``X``."""
    S = _partials(P, k - 1)
    exps, coeffs, row = S.flat_terms()
    _, J = kernels.system_values_jacobians(exps, coeffs, row, S.m, X)
    return J.reshape((X.shape[0], P.m) + (P.n_vars,) * k)


def sup_dk_certified(
    P: PolySystem,
    k: int,
    net: SphereNet,
    *,
    max_evals: int = 2_000_000,
    rng: np.random.Generator | None = None,
) -> CertifiedBracket:
    """Bracket for ``sup |D^k P(x)(u_1, ..., u_k)|_2`` over unit arguments.

    The last direction is maximised exactly (largest singular value of the
    ``m x n`` matrix that remains), so the product net is only enumerated over
    ``(x, u_1, ..., u_{k-1})``.  When that product exceeds ``max_evals`` a
    uniform subsample is used and the bracket is tagged ``rigorous=False``.
    """
    if k not in (1, 2, 3):
        raise ValueError(f"k must be 1, 2 or 3, got {k}")
    _check_dim(P, net)
    den, branch = _require_factor(P, net.delta, k)
    if P.max_degree < k:
        return CertifiedBracket(0.0, 0.0, f"sup_D{k}", branch, True, 0)
    pts = net.points
    Kn = pts.shape[0]
    total = Kn**k
    rigorous = total <= max_evals
    best = 0.0
    if k == 1:
        for a, b in _chunks(Kn):
            T = _derivative_tensor(P, 1, pts[a:b])
            best = max(best, float(kernels.sigma_max_batch(T).max()))
        return CertifiedBracket(best, best / den, "sup_D1", branch, True, Kn)
    if rigorous:
        T = _derivative_tensor(P, k, pts)
        if k == 2:
            for a, b in _chunks(Kn, max(1, _CHUNK // Kn)):
                M = np.einsum("xmij,ui->xumj", T[a:b], pts).reshape(-1, P.m, P.n_vars)
                best = max(best, float(kernels.sigma_max_batch(M).max()))
        else:
            for a, b in _chunks(Kn, max(1, _CHUNK // (Kn * Kn))):
                M = np.einsum("xmijl,ui,vj->xuvml", T[a:b], pts, pts).reshape(-1, P.m, P.n_vars)
                best = max(best, float(kernels.sigma_max_batch(M).max()))
        samples = total
    else:
        rng = rng if rng is not None else np.random.default_rng(0)
        samples = max_evals
        for a, b in _chunks(samples):
            idx = rng.integers(0, Kn, size=(b - a, k))
            T = _derivative_tensor(P, k, pts[idx[:, 0]])
            if k == 2:
                M = np.einsum("smij,si->smj", T, pts[idx[:, 1]])
            else:
                M = np.einsum("smijl,si,sj->sml", T, pts[idx[:, 1]], pts[idx[:, 2]])
            best = max(best, float(kernels.sigma_max_batch(M).max()))
    return CertifiedBracket(best, best / den, f"sup_D{k}", branch, rigorous, samples)


# ---------------------------------------------------------------------------
# global condition number


@dataclass(frozen=True)
class KappaGlobalResult:
    estimate: float
    bracket: CertifiedBracket
    argmax: np.ndarray
    weyl_norm: float
    L_bracket: CertifiedBracket
    sup_norm: CertifiedBracket
    lipschitz: float
    rounds: int
    evaluations: int
    final_radius: float
    cells: int = field(default=0)

    @property
    def certified(self) -> bool:
        return math.isfinite(self.bracket.upper)

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "bracket": self.bracket.to_dict(),
            "argmax": self.argmax.tolist(),
            "weyl_norm": self.weyl_norm,
            "L_bracket": self.L_bracket.to_dict(),
            "sup_norm": self.sup_norm.to_dict(),
            "lipschitz": self.lipschitz,
            "rounds": self.rounds,
            "evaluations": self.evaluations,
            "final_radius": self.final_radius,
            "cells": self.cells,
        }


def lipschitz_L(P: PolySystem, sup_upper: float, d1_upper: float | None = None) -> float:
    """Chord-metric Lipschitz constant of ``x -> L(P, x)`` on the sphere.

    With ``D1 >= sup|D^1 P|`` and ``D2 >= sup|D^2 P|`` (on the closed ball, by
    homogeneity) the value part moves by at most ``D1 |x - x'|`` and the
    degree-scaled tangent singular value by at most
    ``(D2 + sqrt(2) D1) / sqrt(d_min) |x - x'|``.  Both derivative bounds come
    from Kellogg's inequality applied to ``sup_upper``; ``d1_upper`` may tighten
    the first one.
    """
    degs = P.degrees
    d = max(degs)
    equal = len(set(degs)) == 1
    kel = d if equal else d * d
    D1 = kel * sup_upper
    if d1_upper is not None:
        D1 = min(D1, d1_upper)
    # x -> DP(x)u has degrees d_i - 1; apply Kellogg once more
    dd = d - 1
    D2 = (dd if equal else dd * dd) * D1
    a = D1
    b = (D2 + math.sqrt(2.0) * D1) / math.sqrt(min(degs))
    return math.hypot(a, b)


def _local_L(P: PolySystem, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    exps, coeffs, row = P.flat_terms()
    isd = 1.0 / P.sqrt_degrees
    vn = np.empty(X.shape[0])
    L = np.empty(X.shape[0])
    for a, b in _chunks(X.shape[0]):
        v, _, l = kernels.local_condition_batch(exps, coeffs, row, P.m, isd, X[a:b])
        vn[a:b] = v
        L[a:b] = l
    return L, vn


def _children(centers: np.ndarray, r: float) -> tuple[np.ndarray, np.ndarray]:
    """Cover each cap ``{y : |y - c| <= r}`` by caps of radius ``r / 2``.

    The cap is the gnomonic image of the tangent disc of radius
    ``T = tan(2 asin(r/2))``; it is cut into squares of side ``h`` with
    ``h sqrt(n-1) / 2 <= r / 2`` (projection from the tangent plane, which
    lies outside the ball, is 1-Lipschitz).  Returns children and parent ids.
    """
    K0, n = centers.shape
    theta = 2.0 * math.asin(min(r, math.sqrt(2.0) - 1e-9) / 2.0)
    T = math.tan(theta)
    m = n - 1
    k = max(1, math.ceil(2.0 * T * math.sqrt(m) / r))
    h = 2.0 * T / k
    ticks = -T + h * (np.arange(k) + 0.5)
    grid = np.stack([g.reshape(-1) for g in np.meshgrid(*([ticks] * m), indexing="ij")], axis=1)
    keep = np.linalg.norm(grid, axis=1) - h * math.sqrt(m) / 2.0 <= T
    grid = grid[keep]
    B = tangent_frames_many(centers)  # (K0, m, n)
    Y = centers[:, None, :] + np.einsum("gm,kmn->kgn", grid, B)
    Y /= np.linalg.norm(Y, axis=2, keepdims=True)
    parent = np.repeat(np.arange(K0), grid.shape[0])
    return Y.reshape(-1, n), parent


def kappa_global(
    P: PolySystem,
    coarse_delta: float = 0.05,
    refine_rounds: int = 6,
    *,
    rel_tol: float = 1e-3,
    max_refine: int = 20000,
    certify_rounds: int = 8,
    sup_delta: float | None = None,
    max_points: int = DEFAULT_MAX_POINTS,
    sup_budget: int = 200_000,
) -> KappaGlobalResult:
    """Certified bracket for ``kappa(P) = |P|_W / min_{|x|=1} L(P, x)``.

    Branch and bound over spherical caps.  Each cap ``(c, r)`` carries the
    lower bound ``L(c) - Lip * r``; caps that could still hold the minimum are
    split (``r -> r/2``) for up to ``refine_rounds`` rounds, lowest bound
    first, at most ``max_refine`` per round.  While the minimum cap bound is
    still ``<= 0`` up to ``certify_rounds`` extra rounds are spent.  The
    smallest evaluated ``L``
    gives the certified *lower* bound on kappa, which is also the estimate;
    the smallest cap bound gives the upper one (``inf`` when it is ``<= 0``).
    """
    n, m = P.n_vars, P.m
    if m < n - 1:
        raise ValueError(f"kappa_global needs m >= n - 1, got m={m}, n={n}")
    W = weyl_norm_system(P)
    net = build_net(n, coarse_delta, max_points=max_points)

    # sup-norm certificate on a dedicated (finer) net
    d = P.max_degree
    equal = len(set(P.degrees)) == 1
    target = sup_delta if sup_delta is not None else 0.05 / (d if equal else d * d)
    target = min(target, coarse_delta)
    sd = target
    while net_size(n, sd) > sup_budget:
        sd *= 1.25
    if sd >= 1.0:
        sd = 0.999
    snet = net if sd == coarse_delta else build_net(n, sd, max_points=max_points)
    try:
        sup = sup_norm_certified(P, snet)
        d1 = sup_dk_certified(P, 1, snet).upper
    except CertificationError:
        lo = _net_values_max(P, snet.points)
        sup = CertifiedBracket(lo, math.inf, "sup_norm", "uncertified", False, snet.cardinality)
        d1 = math.inf
    lip = lipschitz_L(P, sup.upper, d1) if math.isfinite(sup.upper) else math.inf

    centers = net.points
    L, _ = _local_L(P, centers)
    evals = centers.shape[0]
    r = net.delta
    radii = np.full(L.shape, r)
    best_i = int(np.argmin(L))
    best_L, best_x = float(L[best_i]), centers[best_i].copy()

    def bounds():
        return L - lip * radii if math.isfinite(lip) else np.full(L.shape, -math.inf)

    rounds = 0
    while rounds < refine_rounds + certify_rounds:
        LB = bounds()
        lb_min = float(LB.min())
        if rounds >= refine_rounds and (lb_min > 0 or not math.isfinite(lip)):
            break
        if lb_min > 0 and best_L / lb_min - 1.0 <= rel_tol:
            break
        cand = np.flatnonzero(LB < best_L * (1.0 - 0.5 * rel_tol))
        if cand.size == 0:
            break
        cand = cand[np.argsort(LB[cand], kind="stable")][:max_refine]
        newL_list, newc_list, newr_list = [], [], []
        # split in groups of equal radius
        for rad in np.unique(radii[cand]):
            grp = cand[radii[cand] == rad]
            kids, _ = _children(centers[grp], float(rad))
            kL, _ = _local_L(P, kids)
            evals += kids.shape[0]
            newc_list.append(kids)
            newL_list.append(kL)
            newr_list.append(np.full(kL.shape, rad / 2.0))
        keep = np.ones(L.shape, dtype=bool)
        keep[cand] = False
        centers = np.concatenate([centers[keep]] + newc_list)
        L = np.concatenate([L[keep]] + newL_list)
        radii = np.concatenate([radii[keep]] + newr_list)
        i = int(np.argmin(L))
        if L[i] < best_L:
            best_L, best_x = float(L[i]), centers[i].copy()
        rounds += 1
        # caps whose bound already exceeds the incumbent cannot hold the minimum
        alive = bounds() < best_L
        alive[int(np.argmin(L))] = True
        centers, L, radii = centers[alive], L[alive], radii[alive]

    LB = bounds()
    L_lower = max(0.0, float(LB.min())) if LB.size else 0.0
    L_lower = min(L_lower, best_L)
    if W == 0.0:
        est = math.inf
        bracket = CertifiedBracket(math.inf, math.inf, "kappa", "zero-system", True, evals)
    else:
        est = W / best_L if best_L > 0 else math.inf
        upper = W / L_lower if L_lower > 0 else math.inf
        bracket = CertifiedBracket(est, max(upper, est), "kappa", "branch-and-bound", math.isfinite(sup.upper), evals)
    return KappaGlobalResult(
        estimate=est,
        bracket=bracket,
        argmax=best_x,
        weyl_norm=W,
        L_bracket=CertifiedBracket(L_lower, best_L, "L_min", "branch-and-bound", True, evals),
        sup_norm=sup,
        lipschitz=lip,
        rounds=rounds,
        evaluations=evals,
        final_radius=float(radii.min()) if radii.size else r,
        cells=int(L.size),
    )


# ---------------------------------------------------------------------------
# distance to the real discriminant


def _monomial_data(n: int, d: int, X: np.ndarray, B: np.ndarray):
    """Monomials at ``X`` and their derivatives along each tangent basis vector.

    Returns ``w1 (K, N)`` and ``wt (K, n-1, N)``.
    """
    exps = exponent_array(n, d)
    K = X.shape[0]
    pw = np.ones((K, n, d + 1))
    for e in range(1, d + 1):
        pw[:, :, e] = pw[:, :, e - 1] * X
    w1 = np.ones((K, exps.shape[0]))
    for j in range(n):
        w1 *= pw[:, j, exps[:, j]]
    grad = np.empty((K, n, exps.shape[0]))
    for j in range(n):
        g = np.full((K, exps.shape[0]), 1.0) * exps[:, j]
        for i in range(n):
            e = np.maximum(exps[:, i] - 1, 0) if i == j else exps[:, i]
            g = g * pw[:, i, e]
        grad[:, j] = g
    wt = np.einsum("kan,knN->kaN", B, grad)
    return w1, wt


def _direction_panel(n: int, n_directions: int) -> np.ndarray:
    """Unit vectors in ``R^{n-1}`` representing tangent directions up to sign."""
    if n == 2:
        return np.ones((1, 1))
    if n == 3:
        phi = np.pi * np.arange(n_directions) / n_directions
        return np.stack([np.cos(phi), np.sin(phi)], axis=1)
    delta = min(0.5, max(0.05, 2.0 / n_directions))
    return build_net(n - 1, delta).points


def dist_to_discriminant(
    P: PolySystem,
    net: SphereNet,
    *,
    n_directions: int = 180,
    return_argmin: bool = False,
):
    """Weyl distance from a square system to the systems singular on the net.

    At a point ``x`` and tangent direction ``v`` the set
    ``{Q : Q(x) = 0, DQ(x) v = 0}`` is a linear subspace cut out by two
    functionals per equation; the distance to it is ``sum_i l_i^T G_i^+ l_i``
    with the Weyl Gram matrix ``G_i`` of their representers.  A square system
    has a multiple root at ``x`` exactly when ``DQ(x)`` kills some tangent
    ``v``, so the minimum runs over points and directions.  For ``n = 2`` the
    tangent line is one direction; for ``n >= 3`` directions are sampled.
    """
    n, m = P.n_vars, P.m
    if m != n - 1:
        raise ValueError(f"dist_to_discriminant needs a square system (m = n - 1), got m={m}, n={n}")
    _check_dim(P, net)
    dirs = _direction_panel(n, n_directions)
    best = math.inf
    arg = (None, None)
    for a, b in _chunks(net.cardinality, 8192):
        X = net.points[a:b]
        B = tangent_frames_many(X)
        total = np.zeros((X.shape[0], dirs.shape[0]))
        for p in P.polys:
            w1, wt = _monomial_data(n, p.degree, X, B)
            bw = multinomial_weights(n, p.degree)
            c = p.coeffs
            G11 = np.einsum("kN,kN,N->k", w1, w1, bw)
            g = np.einsum("kN,kaN,N->ka", w1, wt, bw)
            H = np.einsum("kaN,kbN,N->kab", wt, wt, bw)
            l1 = w1 @ c
            q = wt @ c
            G12 = g @ dirs.T  # (k, D)
            G22 = np.einsum("kab,Da,Db->kD", H, dirs, dirs)
            l2 = q @ dirs.T
            G = np.empty(G12.shape + (2, 2))
            G[..., 0, 0] = G11[:, None]
            G[..., 0, 1] = G12
            G[..., 1, 0] = G12
            G[..., 1, 1] = G22
            lam, U = np.linalg.eigh(G)
            floor = 1e-12 * np.maximum(lam[..., -1:], 1e-300)
            inv = np.where(lam > floor, 1.0 / np.where(lam > floor, lam, 1.0), 0.0)
            ell = np.stack([np.broadcast_to(l1[:, None], l2.shape), l2], axis=-1)
            proj = np.einsum("kDij,kDi->kDj", U, ell)
            total += np.einsum("kDj,kDj->kD", proj * inv, proj)
        i = np.unravel_index(int(np.argmin(total)), total.shape)
        val = float(total[i])
        if val < best:
            best = val
            arg = (X[i[0]].copy(), (B[i[0]].T @ dirs[i[1]]))
    dist = math.sqrt(max(best, 0.0))
    if return_argmin:
        return dist, arg[0], arg[1]
    return dist


# ---------------------------------------------------------------------------
# Taylor growth check


@dataclass(frozen=True)
class TaylorCheck:
    samples: int
    violations: int
    worst_ratio: float  # max over probes of lhs / rhs

    @property
    def passed(self) -> bool:
        return self.violations == 0


def taylor_growth_check(
    P: PolySystem,
    gamma: float,
    rng: np.random.Generator,
    *,
    n_base: int = 1,
    probes: int = 100,
    beta: float | None = None,
) -> TaylorCheck:
    """Probe ``|P(x + beta r y + beta^2 z)|^2 <= 8 (a^2 + (2 + e^4) beta^4 d^4 gamma^2)``.

    ``gamma`` must bound ``sup |P|``; ``a`` is taken as ``script_L(P, x, y)``
    at random orthogonal unit pairs ``(x, y)``.  ``r`` is uniform on
    ``[-1, 1]`` and ``z`` uniform in the unit ball.
    """
    n = P.n_vars
    d = P.max_degree
    beta = d ** -4.0 if beta is None else beta
    if not 0.0 < beta <= d ** -4.0:
        raise ValueError(f"beta must lie in (0, d^-4], got {beta!r}")
    worst, bad = 0.0, 0
    for _ in range(n_base):
        x = rng.standard_normal(n)
        x /= np.linalg.norm(x)
        y = rng.standard_normal(n)
        y -= (y @ x) * x
        y /= np.linalg.norm(y)
        alpha = script_L(P, x, y)
        rhs = 8.0 * (alpha**2 + (2.0 + math.e**4) * beta**4 * d**4 * gamma**2)
        r = rng.uniform(-1.0, 1.0, probes)
        z = rng.standard_normal((probes, n))
        z *= (rng.uniform(size=probes) ** (1.0 / n) / np.linalg.norm(z, axis=1))[:, None]
        Wp = x[None, :] + beta * r[:, None] * y[None, :] + beta**2 * z
        exps, coeffs, row = P.flat_terms()
        vals, _ = kernels.system_values_jacobians(exps, coeffs, row, P.m, Wp)
        lhs = np.einsum("km,km->k", vals, vals)
        worst = max(worst, float((lhs / rhs).max()))
        bad += int(np.count_nonzero(lhs > rhs))
    return TaylorCheck(n_base * probes, bad, worst)

