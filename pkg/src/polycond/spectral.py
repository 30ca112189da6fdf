"""Local condition quantities on the unit sphere.

For a system ``P`` with ``m >= n - 1`` equations and a unit point ``x``::

    L(P, x)     = sqrt(sigma_min(D^-1 DP(x)|_{T_x})**2 + |P(x)|**2)
    kappa(P, x) = |P|_W / L(P, x)

where ``D = diag(sqrt(d_1), ..., sqrt(d_m))`` and ``T_x`` is the tangent
space of the sphere at ``x``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .polycore import PolySystem, evaluate_system, jacobian, weyl_norm_system

__all__ = [
    "TangentFrame",
    "DegreeScaling",
    "LocalConditionReport",
    "tangent_frame",
    "tangent_frames_many",
    "restricted_jacobian",
    "singular_values",
    "mu_norm",
    "script_L",
    "kappa_local",
    "DEGENERATE_RTOL",
]

# sigma_min below this fraction of sigma_max counts as an exact singularity
DEGENERATE_RTOL = 1e-14


@dataclass(frozen=True)
class TangentFrame:
    base_point: np.ndarray
    basis: np.ndarray  # (n-1, n), rows orthonormal and orthogonal to base_point

    @property
    def matrix(self) -> np.ndarray:
        """``n x (n-1)`` matrix whose columns are the basis vectors."""
        return self.basis.T


@dataclass(frozen=True)
class DegreeScaling:
    sqrt_degrees: np.ndarray

    @classmethod
    def of(cls, P: PolySystem) -> "DegreeScaling":
        return cls(P.sqrt_degrees)

    def __post_init__(self):
        if np.any(np.asarray(self.sqrt_degrees) <= 0):
            raise ValueError("degree scaling entries must be positive")

    def inverse_apply(self, A) -> np.ndarray:
        """Rows of ``A`` divided by ``sqrt(d_i)``; a vector is scaled entrywise."""
        A = np.asarray(A, dtype=float)
        return A / self.sqrt_degrees[:, None] if A.ndim == 2 else A / self.sqrt_degrees


@dataclass(frozen=True)
class LocalConditionReport:
    point: np.ndarray
    value_norm: float
    sigma_min: float
    L_local: float
    kappa_local: float

    def to_dict(self) -> dict:
        return {
            "point": self.point.tolist(),
            "value_norm": self.value_norm,
            "sigma_min": self.sigma_min,
            "L_local": self.L_local,
            "kappa_local": self.kappa_local,
        }


def _unit(x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    nrm = np.linalg.norm(x)
    if not np.isfinite(nrm) or nrm == 0.0:
        raise ValueError("tangent frame needs a nonzero finite point")
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"point is not on the unit sphere (norm {nrm!r})")
    return x / nrm


def tangent_frame(x) -> TangentFrame:
    """Orthonormal basis of ``x^perp`` from a Householder reflector.

    The reflector ``H = I - 2 v v^T / v^T v`` with ``v = x + sign(x_1) e_1``
    maps ``e_1`` to ``-sign(x_1) x``; its remaining columns span ``x^perp``.
    The sign choice avoids cancellation and does not change the spanned space.
    """
    x = _unit(x)
    return TangentFrame(x, tangent_frames_many(x[None, :])[0])


def tangent_frames_many(X: np.ndarray) -> np.ndarray:
    """``(K, n-1, n)`` stack of tangent bases for unit rows of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    K, n = X.shape
    s = np.where(X[:, 0] >= 0, 1.0, -1.0)
    v = X.copy()
    v[:, 0] += s
    vv = np.einsum("ki,ki->k", v, v)
    # H[:, i, j] = delta_ij - 2 v_i v_j / vv, keep columns 1..n-1
    H = np.eye(n)[None, :, :] - 2.0 * v[:, :, None] * v[:, None, :] / vv[:, None, None]
    return np.ascontiguousarray(np.transpose(H[:, :, 1:], (0, 2, 1)))


def restricted_jacobian(P: PolySystem, frame: TangentFrame) -> np.ndarray:
    """``m x (n-1)`` matrix with columns ``DP(x) b_j`` for the frame vectors ``b_j``."""
    if frame.base_point.shape[0] != P.n_vars:
        raise ValueError("frame dimension does not match the system")
    return jacobian(P, frame.base_point) @ frame.matrix


def singular_values(A) -> np.ndarray:
    """Descending singular values of a real matrix (LAPACK SVD)."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError("singular_values expects a matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    if A.size == 0:
        return np.zeros(0)
    return np.linalg.svd(A, compute_uv=False)


def _sigma_min_scaled(P: PolySystem, frame: TangentFrame) -> tuple[float, float]:
    A = restricted_jacobian(P, frame) / P.sqrt_degrees[:, None]
    s = singular_values(A)
    smax = float(s[0]) if s.size else 0.0
    smin = float(s[-1]) if s.size and A.shape[0] >= A.shape[1] else 0.0
    if smax == 0.0 or smin <= DEGENERATE_RTOL * smax:
        smin = 0.0
    return smin, smax


def mu_norm(P: PolySystem, x) -> float:
    """Normalised local condition number of a square system, ``inf`` if singular."""
    if P.m != P.n_vars - 1:
        raise ValueError(f"mu_norm needs a square system (m = n - 1), got m={P.m}, n={P.n_vars}")
    frame = tangent_frame(x)
    A = restricted_jacobian(P, frame)
    s = singular_values(A / P.sqrt_degrees[:, None])
    if s.size == 0 or s[0] == 0.0 or s[-1] <= DEGENERATE_RTOL * s[0]:
        return math.inf
    # sigma_max(A^-1 D) computed directly rather than as 1/sigma_min
    inv = np.linalg.solve(A, np.diag(P.sqrt_degrees))
    return weyl_norm_system(P) * float(singular_values(inv)[0])


def script_L(P: PolySystem, x, y) -> float:
    """``sqrt(|D^-1 DP(x) y|**2 + |P(x)|**2)`` for ``y`` orthogonal to ``x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if abs(float(x @ y)) > 1e-8:
        raise ValueError("direction must be orthogonal to the base point")
    dy = jacobian(P, x) @ y / P.sqrt_degrees
    v = evaluate_system(P, x)
    return math.sqrt(float(dy @ dy + v @ v))


def kappa_local(P: PolySystem, x) -> LocalConditionReport:
    """Local condition number ``|P|_W / L(P, x)`` together with its ingredients."""
    if P.m < P.n_vars - 1:
        raise ValueError(f"kappa_local needs m >= n - 1, got m={P.m}, n={P.n_vars}")
    frame = tangent_frame(x)
    x = frame.base_point
    smin, _ = _sigma_min_scaled(P, frame)
    vnorm = float(np.linalg.norm(evaluate_system(P, x)))
    L = math.hypot(smin, vnorm)
    W = weyl_norm_system(P)
    kappa = W / L if L > 0 else math.inf
    return LocalConditionReport(x, vnorm, smin, L, kappa)
