"""Dense homogeneous polynomials, systems of them, and the Weyl (Bombieri) metric.

Coefficients are stored in the plain monomial basis, indexed by the exponent
list returned by :func:`enumerate_exponents` (graded reverse-lexicographic,
largest monomial first).  The Weyl weighting only enters in
:func:`weyl_inner` (division by the multinomial) and in the random samplers
(multiplication by its square root).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

__all__ = [
    "multinomial",
    "enumerate_exponents",
    "exponent_array",
    "multinomial_weights",
    "HomogeneousPoly",
    "PolySystem",
    "evaluate",
    "evaluate_many",
    "evaluate_system",
    "evaluate_system_many",
    "gradient",
    "gradient_many",
    "jacobian",
    "jacobian_many",
    "derivative",
    "directional_derivative",
    "higher_derivative",
    "weyl_monomial_vector",
    "weyl_inner",
    "weyl_norm",
    "weyl_norm_system",
    "compose_linear",
    "system_to_dict",
    "system_from_dict",
    "dumps_system",
    "loads_system",
]


def multinomial(d: int, alpha: Sequence[int]) -> int:
    """Exact multinomial coefficient ``d! / (alpha_1! ... alpha_n!)``.

    Built as a product of binomials so every intermediate is an integer.
    Python integers do not wrap; conversion to float for huge values raises
    :class:`OverflowError` at the call site.
    """
    alpha = tuple(int(a) for a in alpha)
    if any(a < 0 for a in alpha):
        raise ValueError(f"negative exponent in {alpha}")
    if sum(alpha) != d:
        raise ValueError(f"exponents {alpha} do not sum to degree {d}")
    out = 1
    remaining = d
    for a in alpha:
        out *= math.comb(remaining, a)
        remaining -= a
    return out


@lru_cache(maxsize=None)
def _exponents(n: int, d: int) -> tuple[tuple[int, ...], ...]:
    def rec(k: int, total: int):
        if k == 1:
            yield (total,)
            return
        for a in range(total, -1, -1):
            for rest in rec(k - 1, total - a):
                yield (a,) + rest

    exps = list(rec(n, d))
    # grevlex, descending: compare reversed tuples ascending
    exps.sort(key=lambda a: a[::-1])
    return tuple(exps)


def enumerate_exponents(n: int, d: int) -> list[tuple[int, ...]]:
    """All exponent vectors of total degree ``d`` in ``n`` variables, grevlex order.

    >>> enumerate_exponents(2, 2)
    [(2, 0), (1, 1), (0, 2)]
    """
    if n < 1 or d < 0:
        raise ValueError(f"need n >= 1 and d >= 0, got n={n}, d={d}")
    return list(_exponents(n, d))


@lru_cache(maxsize=None)
def _exponent_array(n: int, d: int) -> np.ndarray:
    arr = np.array(_exponents(n, d), dtype=np.int64).reshape(-1, n)
    arr.setflags(write=False)
    return arr


def exponent_array(n: int, d: int) -> np.ndarray:
    """Read-only ``(N, n)`` integer array of :func:`enumerate_exponents`."""
    return _exponent_array(n, d)


@lru_cache(maxsize=None)
def _weights(n: int, d: int) -> np.ndarray:
    w = np.array([float(multinomial(d, a)) for a in _exponents(n, d)])
    w.setflags(write=False)
    return w


def multinomial_weights(n: int, d: int) -> np.ndarray:
    """Multinomials ``binom(d, alpha)`` as floats, in exponent order."""
    return _weights(n, d)


@lru_cache(maxsize=None)
def _index_map(n: int, d: int) -> dict[tuple[int, ...], int]:
    return {a: i for i, a in enumerate(_exponents(n, d))}


@dataclass(frozen=True, eq=False)
class HomogeneousPoly:
    """Real form of degree ``degree`` in ``n_vars`` variables.

    ``coeffs[i]`` multiplies the monomial ``x**exponents[i]``.  Degree 0 is
    allowed so derivatives of linear forms stay in the type.
    """

    n_vars: int
    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.n_vars < 1 or self.degree < 0:
            raise ValueError(f"bad shape n_vars={self.n_vars}, degree={self.degree}")
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        expected = math.comb(self.n_vars + self.degree - 1, self.degree)
        if c.size != expected:
            raise ValueError(
                f"expected {expected} coefficients for n={self.n_vars}, d={self.degree}, got {c.size}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def exponents(self) -> np.ndarray:
        return exponent_array(self.n_vars, self.degree)

    @property
    def n_terms(self) -> int:
        return self.coeffs.size

    @classmethod
    def zero(cls, n: int, d: int) -> "HomogeneousPoly":
        return cls(n, d, np.zeros(math.comb(n + d - 1, d)))

    @classmethod
    def from_terms(cls, n: int, d: int, terms: dict) -> "HomogeneousPoly":
        """Build from ``{exponent_tuple: coefficient}``; missing monomials are 0."""
        idx = _index_map(n, d)
        c = np.zeros(len(idx))
        for alpha, v in terms.items():
            alpha = tuple(alpha)
            if alpha not in idx:
                raise ValueError(f"exponent {alpha} is not of degree {d} in {n} variables")
            c[idx[alpha]] += v
        return cls(n, d, c)

    def __call__(self, x) -> float:
        return evaluate(self, x)

    def __mul__(self, s: float) -> "HomogeneousPoly":
        return HomogeneousPoly(self.n_vars, self.degree, self.coeffs * s)

    __rmul__ = __mul__

    def __add__(self, other: "HomogeneousPoly") -> "HomogeneousPoly":
        _check_same_space(self, other)
        return HomogeneousPoly(self.n_vars, self.degree, self.coeffs + other.coeffs)

    def __sub__(self, other: "HomogeneousPoly") -> "HomogeneousPoly":
        _check_same_space(self, other)
        return HomogeneousPoly(self.n_vars, self.degree, self.coeffs - other.coeffs)

    def __repr__(self) -> str:
        return f"HomogeneousPoly(n_vars={self.n_vars}, degree={self.degree}, coeffs={self.coeffs.tolist()})"


def _check_same_space(f: HomogeneousPoly, g: HomogeneousPoly) -> None:
    if f.n_vars != g.n_vars or f.degree != g.degree:
        raise ValueError(
            f"polynomials live in different spaces: (n={f.n_vars}, d={f.degree}) vs (n={g.n_vars}, d={g.degree})"
        )


@dataclass(frozen=True, eq=False)
class PolySystem:
    """Ordered tuple of forms in a common set of variables."""

    polys: tuple[HomogeneousPoly, ...]
    _flat: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        polys = tuple(self.polys)
        if not polys:
            raise ValueError("a system needs at least one polynomial")
        n = polys[0].n_vars
        if any(p.n_vars != n for p in polys):
            raise ValueError("all polynomials of a system must share n_vars")
        object.__setattr__(self, "polys", polys)

    @property
    def n_vars(self) -> int:
        return self.polys[0].n_vars

    @property
    def m(self) -> int:
        return len(self.polys)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(p.degree for p in self.polys)

    @property
    def max_degree(self) -> int:
        return max(self.degrees)

    @property
    def sqrt_degrees(self) -> np.ndarray:
        return np.sqrt(np.array(self.degrees, dtype=float))

    @property
    def n_coeffs(self) -> int:
        return sum(p.n_terms for p in self.polys)

    def __len__(self) -> int:
        return self.m

    def __iter__(self):
        return iter(self.polys)

    def __getitem__(self, i: int) -> HomogeneousPoly:
        return self.polys[i]

    def scaled(self, s: float) -> "PolySystem":
        return PolySystem(tuple(p * s for p in self.polys))

    def flat_terms(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Concatenated ``(exponents, coeffs, row)`` arrays over all equations.

        This is the layout the batched kernels consume.
        """
        if "terms" not in self._flat:
            exps = np.ascontiguousarray(np.vstack([p.exponents for p in self.polys]), dtype=np.int64)
            coeffs = np.ascontiguousarray(np.concatenate([p.coeffs for p in self.polys]))
            row = np.concatenate(
                [np.full(p.n_terms, i, dtype=np.int64) for i, p in enumerate(self.polys)]
            )
            self._flat["terms"] = (exps, coeffs, row)
        return self._flat["terms"]


def _as_point(p: HomogeneousPoly | PolySystem, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (p.n_vars,):
        raise ValueError(f"point has shape {x.shape}, expected ({p.n_vars},)")
    return x


def _monomials(exps: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Monomial values ``X[k]**exps[i]`` as a ``(K, N)`` array (power-table based)."""
    K, n = X.shape
    if exps.shape[0] == 0:
        return np.zeros((K, 0))
    dmax = int(exps.max()) if exps.size else 0
    powers = np.ones((K, n, dmax + 1))
    for e in range(1, dmax + 1):
        powers[:, :, e] = powers[:, :, e - 1] * X
    out = np.ones((K, exps.shape[0]))
    for j in range(n):
        out *= powers[:, j, exps[:, j]]
    return out


def evaluate(p: HomogeneousPoly, x) -> float:
    """``sum_alpha c_alpha x**alpha``."""
    x = _as_point(p, x)
    return float(_monomials(p.exponents, x[None, :])[0] @ p.coeffs)


def evaluate_many(p: HomogeneousPoly, X) -> np.ndarray:
    """Vectorised :func:`evaluate` over the rows of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return _monomials(p.exponents, X) @ p.coeffs


def evaluate_system(P: PolySystem, x) -> np.ndarray:
    x = _as_point(P, x)
    return np.array([evaluate(p, x) for p in P.polys])


def evaluate_system_many(P: PolySystem, X) -> np.ndarray:
    """``(K, m)`` array of values of every equation at every row of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.stack([evaluate_many(p, X) for p in P.polys], axis=1)


@lru_cache(maxsize=None)
def _derivative_map(n: int, d: int, j: int) -> tuple[np.ndarray, np.ndarray]:
    """For d/dx_j on degree-d forms: target index in degree d-1 and multiplier alpha_j."""
    exps = exponent_array(n, d)
    idx = _index_map(n, d - 1)
    mult = exps[:, j].astype(float)
    target = np.full(exps.shape[0], -1, dtype=np.int64)
    for i, a in enumerate(exps):
        if a[j] > 0:
            b = list(a)
            b[j] -= 1
            target[i] = idx[tuple(b)]
    return target, mult


def derivative(p: HomogeneousPoly, j: int) -> HomogeneousPoly:
    """Partial derivative with respect to ``x_j`` as a form of degree ``d - 1``."""
    n, d = p.n_vars, p.degree
    if d == 0:
        return HomogeneousPoly.zero(n, 0)
    target, mult = _derivative_map(n, d, j)
    out = np.zeros(math.comb(n + d - 2, d - 1))
    keep = target >= 0
    np.add.at(out, target[keep], mult[keep] * p.coeffs[keep])
    return HomogeneousPoly(n, d - 1, out)


def directional_derivative(p: HomogeneousPoly, u) -> HomogeneousPoly:
    """The form ``x -> <grad p(x), u>``."""
    u = _as_point(p, u)
    n, d = p.n_vars, p.degree
    if d == 0:
        return HomogeneousPoly.zero(n, 0)
    out = np.zeros(math.comb(n + d - 2, d - 1))
    for j in range(n):
        if u[j] != 0.0:
            target, mult = _derivative_map(n, d, j)
            keep = target >= 0
            np.add.at(out, target[keep], u[j] * mult[keep] * p.coeffs[keep])
    return HomogeneousPoly(n, d - 1, out)


def gradient(p: HomogeneousPoly, x) -> np.ndarray:
    x = _as_point(p, x)
    return gradient_many(p, x[None, :])[0]


def gradient_many(p: HomogeneousPoly, X) -> np.ndarray:
    """``(K, n)`` gradients at the rows of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, d = p.n_vars, p.degree
    if d == 0:
        return np.zeros((X.shape[0], n))
    lower = _monomials(exponent_array(n, d - 1), X)
    out = np.empty((X.shape[0], n))
    for j in range(n):
        target, mult = _derivative_map(n, d, j)
        keep = target >= 0
        out[:, j] = lower[:, target[keep]] @ (mult[keep] * p.coeffs[keep])
    return out


def jacobian(P: PolySystem, x) -> np.ndarray:
    """``m x n`` Jacobian matrix at ``x``."""
    x = _as_point(P, x)
    return np.stack([gradient(p, x) for p in P.polys])


def jacobian_many(P: PolySystem, X) -> np.ndarray:
    """``(K, m, n)`` Jacobians at the rows of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.stack([gradient_many(p, X) for p in P.polys], axis=1)


def higher_derivative(P: PolySystem, x, *directions) -> np.ndarray:
    """``D^k P(x)(u_1, ..., u_k)`` for ``k = len(directions)`` in {1, 2, 3}.

    Each direction is applied as an exact directional derivative of the dense
    form, so the result is symmetric in the directions.
    """
    k = len(directions)
    if k not in (1, 2, 3):
        raise ValueError(f"derivative order must be 1, 2 or 3, got {k}")
    x = _as_point(P, x)
    out = np.empty(P.m)
    for i, p in enumerate(P.polys):
        q = p
        for u in directions:
            q = directional_derivative(q, u)
        out[i] = evaluate(q, x)
    return out


def weyl_monomial_vector(n: int, d: int, x) -> np.ndarray:
    """Vector ``(sqrt(binom(d, alpha)) x**alpha)_alpha``; unit norm for unit ``x``.

    A ``(K, n)`` array of points gives a ``(K, N)`` array.
    """
    x = np.asarray(x, dtype=float)
    X = x[None, :] if x.ndim == 1 else x
    out = np.sqrt(multinomial_weights(n, d)) * _monomials(exponent_array(n, d), X)
    return out[0] if x.ndim == 1 else out


def weyl_inner(f: HomogeneousPoly, g: HomogeneousPoly) -> float:
    """``sum_alpha f_alpha g_alpha / binom(d, alpha)``."""
    _check_same_space(f, g)
    return float(np.sum(f.coeffs * g.coeffs / multinomial_weights(f.n_vars, f.degree)))


def weyl_norm(p: HomogeneousPoly) -> float:
    return math.sqrt(max(weyl_inner(p, p), 0.0))


def weyl_norm_system(P: PolySystem) -> float:
    return math.sqrt(sum(weyl_inner(p, p) for p in P.polys))


@lru_cache(maxsize=None)
def _raise_map(n: int, k: int) -> np.ndarray:
    """``out[i, j]`` = index in degree k+1 of ``exponents(n, k)[i] + e_j``."""
    idx = _index_map(n, k + 1)
    exps = _exponents(n, k)
    out = np.empty((len(exps), n), dtype=np.int64)
    for i, a in enumerate(exps):
        for j in range(n):
            b = list(a)
            b[j] += 1
            out[i, j] = idx[tuple(b)]
    return out


def compose_linear(p: HomogeneousPoly, U) -> HomogeneousPoly:
    """The form ``x -> p(U x)`` expanded back into the monomial basis.

    Every product of the linear forms ``(Ux)_i`` is built once from a shorter
    product, so the cost is one multiply-by-linear-form per monomial of
    degree <= d.
    """
    n, d = p.n_vars, p.degree
    U = np.asarray(U, dtype=float)
    if U.shape != (n, n):
        raise ValueError(f"U must be {n}x{n}, got {U.shape}")
    if d == 0:
        return HomogeneousPoly(n, 0, p.coeffs.copy())
    # products[k][alpha] = prod_i (U x)_i ** alpha_i, dense in degree k
    products: dict[tuple[int, ...], np.ndarray] = {(0,) * n: np.ones(1)}
    for k in range(d):
        rmap = _raise_map(n, k)
        size = math.comb(n + k, k + 1)
        for a in _exponents(n, k + 1):
            i = next(t for t in range(n) if a[t] > 0)
            prev = list(a)
            prev[i] -= 1
            f = products[tuple(prev)]
            out = np.zeros(size)
            for j in range(n):
                if U[i, j] != 0.0:
                    np.add.at(out, rmap[:, j], U[i, j] * f)
            products[a] = out
    top = np.stack([products[a] for a in _exponents(n, d)])
    return HomogeneousPoly(n, d, p.coeffs @ top)


# serialisation ---------------------------------------------------------------

def system_to_dict(P: PolySystem) -> dict:
    return {
        "n": P.n_vars,
        "degrees": list(P.degrees),
        "coefficients": [p.coeffs.tolist() for p in P.polys],
    }


def system_from_dict(doc: dict) -> PolySystem:
    n = int(doc["n"])
    degrees = [int(d) for d in doc["degrees"]]
    coeffs = doc["coefficients"]
    if len(coeffs) != len(degrees):
        raise ValueError("number of coefficient arrays does not match number of degrees")
    return PolySystem(tuple(HomogeneousPoly(n, d, np.array(c, dtype=float)) for d, c in zip(degrees, coeffs)))


def dumps_system(P: PolySystem) -> str:
    """JSON text; floats use the shortest round-tripping repr, so reloads are bit-exact."""
    return json.dumps(system_to_dict(P), indent=1)


def loads_system(text: str) -> PolySystem:
    return system_from_dict(json.loads(text))
