"""Support-size upper bounds for integer programs, keyed to the largest
column 1-norm of the constraint matrix rather than its largest entry.

All logarithms are base 2.  Bounds are computed in double precision and then
nudged upward by a relative 2**-40 before any ceiling, so a reported bound is
never smaller than the true formula value: an under-reported support bound
would make support-enumeration solving unsound, while a slightly loose one
only costs time.

Also here: the W_-1 branch of the Lambert W function (the numeric kernel
behind the tightest bound) and a generator for the block-diagonal worst-case
family whose unique optimum has support m * (floor(log2(a_max)) + 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .milp import Milp

_LOG2E = math.log2(math.e)
_NUDGE = 1.0 + 2.0**-40


def _up(value: float) -> float:
    """Round a non-negative bound upward by a hair to absorb float error."""
    return value * _NUDGE if value > 0 else value


def max_column_norm(matrix: Sequence[Sequence[int]]) -> int:
    """Largest 1-norm of any column, as an exact integer."""
    rows = [tuple(row) for row in matrix]
    if not rows or not rows[0]:
        raise ValueError("matrix must be non-empty")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError("ragged matrix")
    return max(sum(abs(r[j]) for r in rows) for j in range(width))


@dataclass(frozen=True)
class MatrixProfile:
    """The shape parameters a support bound depends on: m, Delta, A_max."""

    m: int
    delta: int
    a_max: int
    columns: tuple[tuple[int, ...], ...] = ()

    @staticmethod
    def from_matrix(matrix: Sequence[Sequence[int]]) -> "MatrixProfile":
        rows = [tuple(int(v) for v in row) for row in matrix]
        a_max = max_column_norm(rows)
        delta = max(abs(v) for row in rows for v in row)
        cols = tuple(tuple(r[j] for r in rows) for j in range(len(rows[0])))
        return MatrixProfile(m=len(rows), delta=delta, a_max=a_max, columns=cols)

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("need at least one row")
        if not (self.delta <= self.a_max <= self.m * self.delta):
            raise ValueError("requires delta <= a_max <= m * delta")

    def a_max_p(self, p: float) -> float:
        """Largest column p-norm; requires the columns to be retained."""
        if p < 1:
            raise ValueError("p must be >= 1")
        if not self.columns:
            raise ValueError("profile was built without column data")
        return max(sum(abs(v) ** p for v in col) ** (1.0 / p) for col in self.columns)


def bound_classic(profile: MatrixProfile) -> tuple[float, float]:
    """The two classic bounds: 2m*log2(4m*Delta) and 2m*log2(2*sqrt(m)*Delta)."""
    if profile.delta < 1:
        raise ValueError("Delta must be >= 1")
    m, d = profile.m, profile.delta
    es = 2 * m * math.log2(4 * m * d)
    aliev = 2 * m * math.log2(2 * math.sqrt(m) * d)
    return _up(es), _up(aliev)


def bound_tangent(profile: MatrixProfile, alpha: float) -> float:
    """Tangent-line bound m*log2(sqrt(2*log2(e)/(e*alpha))*A_max)/(1-alpha).

    At alpha = 1/2 this is the printed 2m*log2(1.46*A_max) form (the exact
    constant is ~1.457); at alpha = 1/11 it is 1.1m*log2(3.42*A_max).
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if profile.a_max < 1:
        raise ValueError("A_max must be >= 1")
    c = math.sqrt(2 * _LOG2E / (math.e * alpha))
    return _up(profile.m * math.log2(c * profile.a_max) / (1 - alpha))


def lambert_w_minus1(z: float) -> float:
    """The -1 branch of Lambert's W on [-1/e, 0): w <= -1 with w*e^w = z.

    Seeded by the closed-form upper bound -(u + sqrt(2u) + 1) for
    z = -e^(-u-1), then polished with Halley steps until the residual
    |w*e^w - z| drops below 1e-12 * |z|.
    """
    if not (-1.0 / math.e <= z < 0.0):
        raise ValueError("z must lie in [-1/e, 0)")
    u = max(0.0, -1.0 - math.log(-z))
    # Bracket: the seed sits at or below the root, -1 at or above it.
    lo = -(u + math.sqrt(2.0 * u) + 1.0)
    hi = -1.0
    w = lo
    tol = 1e-12 * abs(z)
    for _ in range(200):
        ew = math.exp(w)
        f = w * ew - z
        if abs(f) <= 0.25 * tol:
            return w
        if f > 0.0:
            lo = w
        else:
            hi = w
        d1 = ew * (w + 1.0)
        step_ok = False
        if d1 != 0.0:
            denom = d1 - f * ew * (w + 2.0) / (2.0 * d1)
            if denom != 0.0:
                cand = w - f / denom
                if lo <= cand <= hi:
                    w = cand
                    step_ok = True
        if not step_ok:
            w = 0.5 * (lo + hi)
        if hi - lo <= 0.0:
            break
    if abs(w * math.exp(w) - z) > tol:
        raise ArithmeticError(f"iteration stalled at z={z!r}")
    return w


def bound_lambert(profile: MatrixProfile, alpha_prime: float) -> float:
    """Parametric Lambert-branch bound with leading coefficient 1:

    m * (log2(A) + sqrt(a'*(log2(A)+0.05)) + a'/2 + log2(sqrt(1/a')) + 1.03).
    """
    if alpha_prime <= 0:
        raise ValueError("alpha_prime must be > 0")
    if profile.a_max < 1:
        raise ValueError("A_max must be >= 1")
    la = math.log2(profile.a_max)
    value = profile.m * (
        la
        + math.sqrt(alpha_prime * (la + 0.05))
        + alpha_prime / 2.0
        + math.log2(math.sqrt(1.0 / alpha_prime))
        + 1.03
    )
    return _up(value)


def bound_main(profile: MatrixProfile) -> float:
    """The headline bound m*(log2(3*A_max) + sqrt(log2(A_max))).

    This is the default budget handed to support-enumeration solving.
    """
    if profile.a_max < 1:
        raise ValueError("A_max must be >= 1")
    a = profile.a_max
    return _up(profile.m * (math.log2(3 * a) + math.sqrt(math.log2(a))))


def bound_elementary(profile: MatrixProfile) -> float:
    """Largest s with s/m <= 1 + log2(e) + log2(1 + (s/m)*A_max).

    Solved by the monotone fixed-point iteration
    t <- 1 + log2(e) + log2(1 + t*A_max) from t0 = 1 (a contraction for the
    relevant t), stopping when the step falls below 1e-9; weaker than
    ``bound_main`` but derived from purely counting arguments.
    """
    if profile.a_max < 1:
        raise ValueError("A_max must be >= 1")
    a = profile.a_max
    t = 1.0
    for _ in range(10_000):
        nt = 1.0 + _LOG2E + math.log2(1.0 + t * a)
        if abs(nt - t) < 1e-9:
            t = nt
            break
        t = nt
    return _up(profile.m * t)


def pnorm_log_bound(profile: MatrixProfile, p: float) -> tuple[float, float]:
    """Two substitutes for log2(A_max) in any bound, via column p-norms:

    log2(m^(1-1/p) * A_max_p) and p * log2(A_max_p).  Both dominate
    log2(A_max); callers substitute the smaller.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    apn = profile.a_max_p(p)
    via_dimension = math.log2(profile.m ** (1.0 - 1.0 / p) * apn)
    via_power = p * math.log2(apn)
    return _up(via_dimension), _up(via_power)


@dataclass(frozen=True)
class SupportBoundReport:
    """Every bound formula evaluated on one matrix profile."""

    m: int
    delta: int
    a_max: int
    es_bound: float
    aliev_bound: float
    tangent_bound: float
    tangent_alpha: float
    lambert_bound: float
    lambert_alpha: float
    main_bound: float
    elementary_bound: float

    def lines(self) -> list[tuple[str, float]]:
        return [
            ("eisenbrand-shmonin 2m*log2(4m*D)", self.es_bound),
            ("aliev 2m*log2(2*sqrt(m)*D)", self.aliev_bound),
            (f"tangent(alpha={self.tangent_alpha:g})", self.tangent_bound),
            (f"lambert(alpha'={self.lambert_alpha:g})", self.lambert_bound),
            ("main m*(log2(3A)+sqrt(log2 A))", self.main_bound),
            ("elementary fixed point", self.elementary_bound),
        ]


def support_bound_report(
    profile: MatrixProfile, alpha: float = 0.5, alpha_prime: float = 1.0
) -> SupportBoundReport:
    es, aliev = bound_classic(profile)
    return SupportBoundReport(
        m=profile.m,
        delta=profile.delta,
        a_max=profile.a_max,
        es_bound=es,
        aliev_bound=aliev,
        tangent_bound=bound_tangent(profile, alpha),
        tangent_alpha=alpha,
        lambert_bound=bound_lambert(profile, alpha_prime),
        lambert_alpha=alpha_prime,
        main_bound=bound_main(profile),
        elementary_bound=bound_elementary(profile),
    )


def support_budget(profile: MatrixProfile) -> int:
    """Integer support budget: the ceiling of the main bound."""
    return math.ceil(bound_main(profile))


def lower_bound_instance(m: int, a_max: int) -> Milp:
    """Worst-case family: m blocks of row (2^0 ... 2^d), rhs 2^(d+1)-1 each,
    maximizing objective 3^0 ... 3^d per block, where d = floor(log2(a_max)).

    The unique optimum is the all-ones vector, so the minimum support of an
    optimal solution is exactly m*(d+1) while the matrix has A_max = 2^d.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    if a_max < 1:
        raise ValueError("a_max must be >= 1")
    d = a_max.bit_length() - 1  # floor(log2(a_max))
    width = d + 1
    n = m * width
    rows = []
    rhs = []
    for block in range(m):
        row = [0] * n
        for k in range(width):
            row[block * width + k] = 2**k
        rows.append(tuple(row))
        rhs.append(2 ** (d + 1) - 1)
    objective = tuple(Fraction(3**k) for _ in range(m) for k in range(width))
    return Milp.from_rows(rows, ["="] * m, rhs, n_int=n, objective=objective, maximize=True)
