"""Pure numpy implementation of the batched kernels.

Used when the compiled extension is unavailable or ``POLYCOND_PURE_PYTHON``
is set.  Signatures match ``_kernels.pyx`` exactly.
"""
from __future__ import annotations

import numpy as np

BACKEND = "python"


def _values_and_jacobians(exps, coeffs, row, m, X):
    K, n = X.shape
    dmax = int(exps.max()) if exps.size else 0
    powers = np.ones((K, n, dmax + 1))
    for e in range(1, dmax + 1):
        powers[:, :, e] = powers[:, :, e - 1] * X
    mono = np.ones((K, exps.shape[0]))
    for j in range(n):
        mono *= powers[:, j, exps[:, j]]
    onehot = np.zeros((exps.shape[0], m))
    onehot[np.arange(exps.shape[0]), row] = 1.0
    values = mono @ (coeffs[:, None] * onehot)
    jac = np.empty((K, m, n))
    for j in range(n):
        lowered = np.maximum(exps[:, j] - 1, 0)
        dmono = np.ones((K, exps.shape[0]))
        for i in range(n):
            dmono *= powers[:, i, lowered if i == j else exps[:, i]]
        w = coeffs * exps[:, j]
        jac[:, :, j] = dmono @ (w[:, None] * onehot)
    return values, jac


def system_values_jacobians(exps, coeffs, row, m, X):
    """Values ``(K, m)`` and Jacobians ``(K, m, n)`` of a flat-term system."""
    X = np.ascontiguousarray(X, dtype=float)
    return _values_and_jacobians(np.asarray(exps), np.asarray(coeffs, dtype=float), np.asarray(row), int(m), X)


def local_condition_batch(exps, coeffs, row, m, inv_sqrt_deg, X):
    """Per point: ``|P(x)|``, ``sigma_min`` of the scaled tangent Jacobian, and ``L``.

    Rows of ``X`` must be unit vectors.  When ``m < n - 1`` sigma_min is 0.
    """
    X = np.ascontiguousarray(X, dtype=float)
    K, n = X.shape
    values, jac = system_values_jacobians(exps, coeffs, row, m, X)
    vnorm = np.sqrt(np.einsum("km,km->k", values, values))
    if n == 1:
        return vnorm, np.zeros(K), vnorm.copy()
    s = np.where(X[:, 0] >= 0, 1.0, -1.0)
    v = X.copy()
    v[:, 0] += s
    vv = np.einsum("ki,ki->k", v, v)
    H = np.eye(n)[None] - 2.0 * v[:, :, None] * v[:, None, :] / vv[:, None, None]
    B = H[:, :, 1:]
    A = np.matmul(jac, B) * np.asarray(inv_sqrt_deg, dtype=float)[None, :, None]
    if m < n - 1:
        smin = np.zeros(K)
    else:
        sv = np.linalg.svd(A, compute_uv=False)
        smin = sv[:, -1]
    L = np.sqrt(smin * smin + vnorm * vnorm)
    return vnorm, smin, L


def sigma_max_batch(A):
    """Largest singular value of each matrix in a ``(K, r, c)`` stack."""
    A = np.asarray(A, dtype=float)
    if A.shape[0] == 0:
        return np.zeros(0)
    return np.linalg.svd(A, compute_uv=False)[:, 0]
