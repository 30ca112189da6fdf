"""Closed-form tail, moment and lower bounds for the condition number of random systems.

Everything here is a pure function of a :class:`BoundParams`.  ``log`` is the
natural logarithm.  Constants the theory leaves unspecified live in
:class:`AbsoluteConstants` and default to 1; ``C`` defaults to 4, the smallest
value the upper-bound argument allows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .polycore import PolySystem, weyl_norm_system

__all__ = [
    "BoundParams",
    "AbsoluteConstants",
    "TailBound",
    "ExpectationBounds",
    "LowerBounds",
    "M_general",
    "M_square",
    "M_main1",
    "M_prime_ckmw",
    "tail_bound_general",
    "tail_bound_main1",
    "tail_bound_square",
    "ckmw_tail",
    "ckmw_log_expectation",
    "expectation_bounds",
    "lower_bound_deterministic",
    "lower_bound_deterministic_corrected",
    "deterministic_bound_applies",
    "lower_tail_and_expectation",
    "bound_curve_rows",
    "format_rows",
]


@dataclass(frozen=True)
class AbsoluteConstants:
    A: float = 1.0
    c: float = 1.0
    c_prime: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    A1: float = 1.0
    A2: float = 1.0

    def __post_init__(self):
        for k, v in self.__dict__.items():
            if not v > 0 or not math.isfinite(v):
                raise ValueError(f"constant {k} must be positive and finite, got {v!r}")

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class BoundParams:
    n: int
    degrees: tuple[int, ...]
    K: float = 1.0
    c0: float = 1.0
    c0tilde: float = 1.0
    C: float = 4.0

    def __post_init__(self):
        degs = tuple(int(d) for d in self.degrees)
        object.__setattr__(self, "degrees", degs)
        if self.n < 2 or not degs or min(degs) < 1:
            raise ValueError(f"need n >= 2, m >= 1 and degrees >= 1, got n={self.n}, degrees={degs}")
        if self.C < 4:
            raise ValueError(f"C must be at least 4, got {self.C!r}")
        for name in ("K", "c0", "c0tilde"):
            v = getattr(self, name)
            if not v > 0 or not math.isfinite(v):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")

    @classmethod
    def of(cls, P: PolySystem, **kw) -> "BoundParams":
        return cls(P.n_vars, P.degrees, **kw)

    @property
    def m(self) -> int:
        return len(self.degrees)

    @property
    def d(self) -> int:
        return max(self.degrees)

    @property
    def N_j(self) -> tuple[int, ...]:
        return tuple(math.comb(self.n + dj - 1, dj) for dj in self.degrees)

    @property
    def N(self) -> int:
        return sum(self.N_j)

    @property
    def s(self) -> float:
        """The recurring exponent ``m - n + 3/2``."""
        return self.m - self.n + 1.5

    @property
    def log_ed(self) -> float:
        return 1.0 + math.log(self.d)

    @property
    def equal_degrees(self) -> bool:
        return len(set(self.degrees)) == 1

    @property
    def square(self) -> bool:
        return self.m == self.n - 1

    def with_(self, **kw) -> "BoundParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class TailBound:
    t: float
    probability_bound: float
    raw: float
    regime_tag: str


@dataclass(frozen=True)
class ExpectationBounds:
    q: float
    case: str
    delta1: float | None
    delta2: float
    moment_bound: float
    log_bound: float
    simplified: dict = field(default_factory=dict)
    flagged: str = ""
    # per simplified entry: whether the full moment bound is below it
    simplified_implied: dict = field(default_factory=dict)


@dataclass(frozen=True)
class LowerBounds:
    epsilon: float
    general_threshold: float
    general_probability: float
    general_exponent: float
    equal_threshold: float | None
    equal_probability: float | None
    equal_exponent: float | None
    expectation_lower: float | None
    getlog_lower: float
    getlog_upper: float
    sandwich_lower: float | None
    sandwich_upper: float | None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


# ---------------------------------------------------------------------------
# scale constants


def M_general(bp: BoundParams) -> float:
    """Scale ``M`` of the general tail theorem (any ``m >= n - 1``)."""
    if bp.m < bp.n - 1:
        raise ValueError(f"M_general needs m >= n - 1, got m={bp.m}, n={bp.n}")
    s, n, m, d = bp.s, bp.n, bp.m, bp.d
    return (
        math.sqrt(bp.N / m)
        * (bp.K * bp.c0 * bp.C) ** (m / s)
        * (3 * d * d * bp.log_ed) ** ((n - 1.5) / s)
        * n ** (1.0 / (2 * m - 2 * n + 3))
        * max(d**6, n / d**2)
    )


def _check_square(bp: BoundParams, what: str) -> None:
    if not bp.square or bp.n < 3 or bp.d < 2:
        raise ValueError(f"{what} needs m = n - 1, n >= 3 and d >= 2; got n={bp.n}, m={bp.m}, d={bp.d}")


def M_square(bp: BoundParams) -> float:
    """Scale ``M`` of the square-case tail bound."""
    _check_square(bp, "M_square")
    n, d = bp.n, bp.d
    return (
        math.sqrt(bp.N)
        * (bp.K * bp.c0 * bp.C) ** (2 * (n - 1))
        * (3 * d * d * bp.log_ed) ** (2 * n - 3)
        * math.sqrt(n)
    )


def M_main1(bp: BoundParams, A: float = 1.0) -> float:
    """``A sqrt(N) (K c0)^{2(n-1)} (3 d^2 log(ed))^{2n-3} sqrt(n)``; ``C`` is folded into ``A``."""
    _check_square(bp, "M_main1")
    n, d = bp.n, bp.d
    return A * math.sqrt(bp.N) * (bp.K * bp.c0) ** (2 * (n - 1)) * (3 * d * d * bp.log_ed) ** (2 * n - 3) * math.sqrt(n)


def M_prime_ckmw(n: int, degrees: Sequence[int]) -> float:
    """Gaussian-case scale ``1 + 8 d^2 sqrt((n-1)^5 N prod d_i)``."""
    degrees = tuple(int(x) for x in degrees)
    if len(degrees) != n - 1 or n < 3:
        raise ValueError(f"M_prime_ckmw needs n >= 3 and n - 1 degrees, got n={n}, degrees={degrees}")
    N = sum(math.comb(n + dj - 1, dj) for dj in degrees)
    d = max(degrees)
    return 1.0 + 8.0 * d * d * math.sqrt((n - 1) ** 5 * N * math.prod(degrees))


# ---------------------------------------------------------------------------
# tails


def _tail(t: float, log_raw: float, tag: str) -> TailBound:
    raw = math.exp(log_raw) if log_raw < 700 else math.inf
    return TailBound(t, min(1.0, raw), raw, tag)


def _check_t(t: float) -> float:
    t = float(t)
    if not t >= 1.0:
        raise ValueError(f"t must be >= 1, got {t!r}")
    return math.log(t)


def tail_bound_general(t: float, bp: BoundParams) -> TailBound:
    """Upper bound on ``Prob(kappa >= t M_general)``, regime chosen from ``log t``."""
    if bp.m < bp.n - 1:
        raise ValueError(f"tail_bound_general needs m >= n - 1, got m={bp.m}, n={bp.n}")
    lt = _check_t(t)
    s, m, n, N, le = bp.s, bp.m, bp.n, bp.N, bp.log_ed
    base = math.log(3.0) - s * lt
    if N >= m * le:
        if lt <= m * le / s:
            return _tail(t, base, "case1:low")
        if lt <= N / s:
            return _tail(t, base + (n - 1.5) / 2 * math.log(s * lt / (m * le)), "case1:mid")
        extra = m / 2 * math.log(s * lt / N) + (n - 1.5) / 2 * math.log(N / (m * le))
        return _tail(t, base + extra, "case1:high")
    if lt <= N / s:
        return _tail(t, base, "case2:low")
    return _tail(t, base + m / 2 * math.log(s * lt / N), "case2:high")


def tail_bound_main1(t: float, bp: BoundParams) -> TailBound:
    """Two-branch square-case tail ``3 t^{-1/2}`` with the late log correction."""
    _check_square(bp, "tail_bound_main1")
    lt = _check_t(t)
    le = bp.log_ed
    knee = 2 * (bp.n - 1) * le  # log of (ed)^{2(n-1)}
    base = math.log(3.0) - 0.5 * lt
    if lt <= knee:
        return _tail(t, base, "low")
    return _tail(t, base + (lt - knee) / (4.0 * le), "high")


def tail_bound_square(t: float, bp: BoundParams) -> TailBound:
    """Three-regime square-case tail bound."""
    _check_square(bp, "tail_bound_square")
    lt = _check_t(t)
    n, N, le = bp.n, bp.N, bp.log_ed
    base = math.log(3.0) - 0.5 * lt
    knee = 2 * (n - 1) * le
    if lt <= knee:
        return _tail(t, base, "low")
    mid = (n - 1.5) / 2 * math.log(lt / knee)
    if lt <= 2 * N:
        return _tail(t, base + mid, "mid")
    return _tail(t, base + 0.25 * math.log(lt / (2 * N)) + mid, "high")


def ckmw_tail(t: float, n: int, degrees: Sequence[int]) -> TailBound:
    """Gaussian-case comparison ``sqrt(1 + log(t M')) / t``."""
    degrees = tuple(degrees)
    Mp = M_prime_ckmw(n, degrees)
    tmin = math.sqrt((n - 1) / (4 * math.prod(degrees)))
    if t < tmin:
        raise ValueError(f"t must be >= {tmin!r} for this bound, got {t!r}")
    raw = math.sqrt(1.0 + math.log(t * Mp)) / t
    return TailBound(t, min(1.0, raw), raw, "ckmw")


def ckmw_log_expectation(n: int, degrees: Sequence[int]) -> float:
    """``log M' + sqrt(log M') + 1/sqrt(log M')``."""
    L = math.log(M_prime_ckmw(n, degrees))
    return L + math.sqrt(L) + 1.0 / math.sqrt(L)


# ---------------------------------------------------------------------------
# moments


def _delta1(bp: BoundParams, q: float) -> float:
    s, n, m, le = bp.s, bp.n, bp.m, bp.log_ed
    return (
        q * math.sqrt(math.pi * n) / s
        * ((n - 1.5) / (2 * math.e * m * le)) ** ((n - 1.5) / 2)
        / (1 - q / s) ** (n / 2)
    )


def _delta2(bp: BoundParams, q: float) -> float:
    s, n, m, N, le = bp.s, bp.n, bp.m, bp.N, bp.log_ed
    return (
        (m / N) ** (s / 2)
        * q * math.sqrt(math.pi * m) * math.exp(-m / 2)
        / ((s - q) * (1 - q / s) ** (m / 2) * le ** (n / 2 - 1))
    )


def expectation_bounds(bp: BoundParams, q: float) -> ExpectationBounds:
    """Moment bound ``(E kappa^q)^{1/q}`` and ``E log kappa <= 1 + log M``.

    Tiny ``q`` makes the ``1/q`` power overflow; the limit of the moment as
    ``q -> 0`` is ``exp(E log kappa)``, so ``exp(1 + log M)`` is returned and
    the record is flagged.

    The simplified forms are reported as stated for their ``q`` ranges.  The
    ``3 m log(ed) / n`` form is not always implied by the full bound (the
    claim ``delta_1, delta_2 <= 1`` behind it fails for small ``n``), so
    ``simplified_implied`` records the comparison for each entry.
    """
    s = bp.s
    if not 0.0 < q < s:
        raise ValueError(f"q must lie in (0, {s!r}), got {q!r}")
    M = M_general(bp)
    log_bound = 1.0 + math.log(M)
    m, n, N, le = bp.m, bp.n, bp.N, bp.log_ed
    d2 = _delta2(bp, q)
    log_simple: dict = {}
    if N >= m * le:
        case = "N>=mlog(ed)"
        d1 = _delta1(bp, q)
        inner = q / (m - n - q + 2) + d1 + d2
        if q <= s * (1 - 1 / (2 * le)):
            log_simple["3mlog(ed)/n"] = math.log(M) + math.log(3 * m * le / n) / q
    else:
        case = "N<mlog(ed)"
        d1 = None
        inner = q / (m - n - q + 1.5) + d2
        if q <= s * (1 - m / (math.e * N)):
            log_simple["3mlog(ed)/n"] = math.log(M) + math.log(3 * m * le / n) / q
    if q <= s / 2:
        log_simple["4^(1/q)"] = math.log(M) + math.log(4.0) / q
    if bp.square and bp.n >= 3 and bp.d >= 2 and q <= 0.5 - 1 / (4 * le):
        log_simple["square:e^(1/q)"] = math.log(M_square(bp)) + 1.0 / q
    log_moment = math.log(M) + math.log1p(inner) / q
    simplified = {k: math.exp(v) if v < 700 else math.inf for k, v in log_simple.items()}
    implied = {k: log_moment <= v * (1 + 1e-12) for k, v in log_simple.items()}
    flagged = ""
    if log_moment > 700 or q < 1e-9:
        flagged = "q->0: moment replaced by exp(log_bound)"
        moment = math.exp(log_bound)
    else:
        moment = math.exp(log_moment)
    return ExpectationBounds(q, case, d1, d2, moment, log_bound, simplified, flagged, implied)


# ---------------------------------------------------------------------------
# lower bounds


def deterministic_bound_applies(P: PolySystem) -> bool:
    """Whether the ``sqrt(m+1)`` form is a valid lower bound (``m <= n - 1``).

    At a maximiser of ``|P|`` on the sphere, ``P(x)^T DP(x)|_T = 0``, so the
    restricted Jacobian has rank below ``m`` and, when ``m <= n - 1``, its
    smallest singular value vanishes.  That is what makes ``L <= |P|_inf``.
    For ``m >= n`` the bound can fail (see the corrected form).
    """
    return P.m <= P.n_vars - 1


def lower_bound_deterministic(P: PolySystem, sup_norm_upper: float) -> float:
    """``|P|_W / (sup_norm_upper * sqrt(m + 1))``; ``inf`` for the zero system."""
    if sup_norm_upper < 0:
        raise ValueError("sup_norm_upper must be non-negative")
    W = weyl_norm_system(P)
    if sup_norm_upper == 0.0:
        return math.inf
    return W / (sup_norm_upper * math.sqrt(P.m + 1))


def lower_bound_deterministic_corrected(P: PolySystem, sup_norm_upper: float) -> float:
    """``|P|_W / (sup_norm_upper * sqrt(1 + d^2 / d_min))``, valid for every ``m``.

    For ``y`` orthogonal to ``x``, ``|DP(x) y| <= d |P|_inf`` and the degree
    scaling divides by at least ``sqrt(d_min)``.
    """
    if sup_norm_upper < 0:
        raise ValueError("sup_norm_upper must be non-negative")
    W = weyl_norm_system(P)
    if sup_norm_upper == 0.0:
        return math.inf
    d, dmin = P.max_degree, min(P.degrees)
    return W / (sup_norm_upper * math.sqrt(1.0 + d * d / dmin))


def lower_tail_and_expectation(
    bp: BoundParams, epsilon: float, consts: AbsoluteConstants = AbsoluteConstants()
) -> LowerBounds:
    """Small-``kappa`` probability bounds and the expectation lower bounds."""
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    n, m, d, N, le = bp.n, bp.m, bp.d, bp.N, bp.log_ed
    Nj = bp.N_j
    rootN = math.sqrt(N)
    base = consts.c * bp.c0tilde * epsilon
    g_exp = consts.c_prime * min(N * min(Nj) / max(Nj), m * d * le)
    g_thr = epsilon * rootN / (bp.K * m * d * le)
    g_prob = base**g_exp
    if bp.equal_degrees:
        e_exp = consts.c_prime * m * le
        e_thr = epsilon * rootN / (bp.K * m * le)
        e_prob = base**e_exp
        exp_lower = consts.c * rootN / (m * le)
    else:
        e_exp = e_thr = e_prob = exp_lower = None
    getlog = n * math.log(d) + d * math.log(n)
    if m == 2 * n - 3 and bp.equal_degrees:
        sw_lo = consts.A1 * rootN / (n * d * le)
        sw_hi = consts.A2 * rootN * le * max(d**8, n) / math.sqrt(n)
    else:
        sw_lo = sw_hi = None
    return LowerBounds(
        epsilon,
        g_thr,
        min(1.0, g_prob),
        g_exp,
        e_thr,
        None if e_prob is None else min(1.0, e_prob),
        e_exp,
        exp_lower,
        consts.A1 * getlog,
        consts.A2 * getlog,
        sw_lo,
        sw_hi,
    )


# ---------------------------------------------------------------------------
# tables


def bound_curve_rows(ts: Iterable[float], bp: BoundParams) -> list[dict]:
    """One row per ``t``: every tail bound that applies to ``bp``."""
    rows = []
    square = bp.square and bp.n >= 3 and bp.d >= 2
    for t in ts:
        g = tail_bound_general(t, bp)
        row = {"t": float(t), "general": g.probability_bound, "general_raw": g.raw, "general_regime": g.regime_tag}
        if square:
            a = tail_bound_main1(t, bp)
            b = tail_bound_square(t, bp)
            c = ckmw_tail(t, bp.n, bp.degrees)
            row.update(
                main1=a.probability_bound,
                main1_raw=a.raw,
                main1_regime=a.regime_tag,
                square=b.probability_bound,
                square_raw=b.raw,
                square_regime=b.regime_tag,
                ckmw=c.probability_bound,
                ckmw_raw=c.raw,
            )
        rows.append(row)
    return rows


def format_rows(rows: list[dict], delimiter: str = "\t") -> str:
    """Delimited text with a header line; empty input gives an empty string."""
    if not rows:
        return ""
    keys = list(rows[0])
    out = [delimiter.join(keys)]
    for r in rows:
        out.append(delimiter.join(_fmt(r.get(k)) for k in keys))
    return "\n".join(out) + "\n"


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)
