"""Exact-rational linear algebra and (M)ILP feasibility solving.

Everything here works over arbitrary-precision rationals (``fractions.Fraction``);
no floating point is ever consulted for a feasibility decision.  The pieces:

* a two-phase primal simplex with Bland's rule (termination guaranteed),
* branch-and-bound over the LP relaxation for mixed-integer feasibility
  and optimization,
* support-enumeration solving (try all supports of the integer part in
  increasing cardinality),
* an exhaustive box enumerator used as a ground-truth oracle by the tests.

All solvers are deterministic: identical inputs give identical outputs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

EQ = "="
GE = ">="

_BRUTE_FORCE_STEP_BUDGET = 10**8


class SolverError(Exception):
    """Base class for solver failures."""


class Infeasible(SolverError):
    """The constraint system has no solution."""


class InfeasibleWithinSupport(Infeasible):
    """No solution whose integer support fits the requested budget."""


class Unbounded(SolverError):
    """The objective is unbounded over the feasible region."""


class BoundUnderivable(SolverError):
    """No finite box for the integer variables could be derived."""


class SearchSpaceTooLarge(SolverError):
    """The brute-force enumeration would exceed its step budget."""


def _as_int_matrix(rows: Iterable[Iterable[int]]) -> tuple[tuple[int, ...], ...]:
    out = []
    for row in rows:
        r = tuple(int(v) for v in row)
        for v, orig in zip(r, row):
            if v != orig:
                raise ValueError(f"matrix entry {orig!r} is not an exact integer")
        out.append(r)
    return tuple(out)


@dataclass(frozen=True)
class Milp:
    """A mixed-integer program ``[A B; 0 C] (x, y) ~ b`` with x integral.

    ``a`` is the m-by-n block of the n integer variables, ``b_mix`` the
    m-by-r block of the r continuous variables on the same rows, and
    ``c_frac`` the s-by-r block of rows that touch continuous variables
    only.  Every row carries its own relation (``=`` or ``>=``); all
    variables are bounded below by 0.  An optional linear objective over
    (x, y) is minimized, or maximized when ``maximize`` is set.
    """

    a: tuple[tuple[int, ...], ...]
    b_mix: tuple[tuple[int, ...], ...]
    c_frac: tuple[tuple[int, ...], ...]
    rhs: tuple[int, ...]
    senses: tuple[str, ...]
    objective: tuple[Fraction, ...] | None = None
    maximize: bool = False

    def __post_init__(self):
        object.__setattr__(self, "a", _as_int_matrix(self.a))
        object.__setattr__(self, "b_mix", _as_int_matrix(self.b_mix))
        object.__setattr__(self, "c_frac", _as_int_matrix(self.c_frac))
        object.__setattr__(self, "rhs", tuple(int(v) for v in self.rhs))
        m, s = len(self.a), len(self.c_frac)
        if len(self.b_mix) != m:
            raise ValueError("a and b_mix must have the same number of rows")
        n = len(self.a[0]) if m else 0
        r = len(self.b_mix[0]) if m else (len(self.c_frac[0]) if s else 0)
        for row in self.a:
            if len(row) != n:
                raise ValueError("ragged integer block")
        for row in self.b_mix:
            if len(row) != r:
                raise ValueError("ragged mixed block")
        for row in self.c_frac:
            if len(row) != r:
                raise ValueError("ragged continuous block")
        if len(self.rhs) != m + s or len(self.senses) != m + s:
            raise ValueError("rhs/senses length must equal the row count")
        for sense in self.senses:
            if sense not in (EQ, GE):
                raise ValueError(f"unknown row relation {sense!r}")
        if self.objective is not None:
            obj = tuple(Fraction(v) for v in self.objective)
            if len(obj) != n + r:
                raise ValueError("objective length must equal the variable count")
            object.__setattr__(self, "objective", obj)
        object.__setattr__(self, "_n", n)
        object.__setattr__(self, "_r", r)

    @property
    def n(self) -> int:
        """Number of integer variables."""
        return self._n  # type: ignore[attr-defined]

    @property
    def r(self) -> int:
        """Number of continuous variables."""
        return self._r  # type: ignore[attr-defined]

    @property
    def m(self) -> int:
        return len(self.a)

    @property
    def s(self) -> int:
        return len(self.c_frac)

    def rows(self) -> Iterator[tuple[tuple[int, ...], str, int]]:
        """Yield (coefficients over x then y, sense, rhs) for every row."""
        n = self.n
        for i in range(self.m):
            yield self.a[i] + self.b_mix[i], self.senses[i], self.rhs[i]
        for i in range(self.s):
            yield (0,) * n + self.c_frac[i], self.senses[self.m + i], self.rhs[self.m + i]

    @staticmethod
    def from_rows(
        rows: Sequence[Sequence[int]],
        senses: Sequence[str],
        rhs: Sequence[int],
        n_int: int,
        objective: Sequence[Fraction] | None = None,
        maximize: bool = False,
    ) -> "Milp":
        """Build a Milp from full rows, splitting off rows that never touch x."""
        upper, lower, up_meta, low_meta = [], [], [], []
        for row, sense, b in zip(rows, senses, rhs):
            row = tuple(int(v) for v in row)
            if any(row[:n_int]):
                upper.append(row)
                up_meta.append((sense, b))
            else:
                lower.append(row)
                low_meta.append((sense, b))
        a = tuple(r[:n_int] for r in upper)
        b_mix = tuple(r[n_int:] for r in upper)
        c_frac = tuple(r[n_int:] for r in lower)
        meta = up_meta + low_meta
        return Milp(
            a=a,
            b_mix=b_mix,
            c_frac=c_frac,
            rhs=tuple(b for _, b in meta),
            senses=tuple(s for s, _ in meta),
            objective=None if objective is None else tuple(objective),
            maximize=maximize,
        )


@dataclass(frozen=True)
class MilpSolution:
    """A solution pair: integer part ``x`` and rational part ``y``."""

    x: tuple[int, ...]
    y: tuple[Fraction, ...]

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.x) if v)

    @property
    def support_size(self) -> int:
        return len(self.support)


def check_solution(milp: Milp, sol: MilpSolution) -> bool:
    """Re-substitute (x, y) into every row under exact rational arithmetic."""
    if len(sol.x) != milp.n or len(sol.y) != milp.r:
        return False
    if any(v < 0 for v in sol.x) or any(v < 0 for v in sol.y):
        return False
    values = tuple(sol.x) + tuple(sol.y)
    for coeffs, sense, b in milp.rows():
        lhs = sum(c * v for c, v in zip(coeffs, values) if c)
        if sense == EQ and lhs != b:
            return False
        if sense == GE and lhs < b:
            return False
    return True


def objective_value(milp: Milp, sol: MilpSolution) -> Fraction:
    if milp.objective is None:
        raise ValueError("milp has no objective")
    values = tuple(sol.x) + tuple(sol.y)
    return sum((c * v for c, v in zip(milp.objective, values)), Fraction(0))


# ---------------------------------------------------------------------------
# Two-phase primal simplex with Bland's rule, exact rationals.
# ---------------------------------------------------------------------------

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _simplex_pivot(tableau, basis, row, col):
    piv_row = tableau[row]
    piv = piv_row[col]
    if piv != 1:
        inv = _ONE / piv
        tableau[row] = piv_row = [v * inv if v else _ZERO for v in piv_row]
    for k, other in enumerate(tableau):
        if k == row:
            continue
        f = other[col]
        if f:
            tableau[k] = [o - f * p if p else o for o, p in zip(other, piv_row)]
    basis[row] = col


def _bland_min(tableau, basis, n_cols):
    """Run Bland-rule simplex on a tableau whose last row is the cost row.

    Minimizes; returns 'optimal' or 'unbounded'.  The cost row stores reduced
    costs in positions 0..n_cols-1 and the (negated) objective in the last slot.
    """
    cost = tableau[-1]
    m = len(tableau) - 1
    while True:
        col = -1
        for j in range(n_cols):
            if cost[j] < 0:
                col = j
                break
        if col < 0:
            return "optimal"
        best_ratio = None
        row = -1
        for i in range(m):
            a = tableau[i][col]
            if a > 0:
                ratio = tableau[i][-1] / a
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[i] < basis[row])
                ):
                    best_ratio = ratio
                    row = i
        if row < 0:
            return "unbounded"
        _simplex_pivot(tableau, basis, row, col)
        cost = tableau[-1]


def _solve_lp(
    rows: Sequence[Sequence[Fraction]],
    senses: Sequence[str],
    rhs: Sequence[Fraction],
    objective: Sequence[Fraction] | None,
) -> tuple[Fraction, ...]:
    """Solve min c.v s.t. rows, v >= 0 exactly; return a vertex solution.

    Raises Infeasible or Unbounded.  With no objective the phase-1 basic
    feasible solution (a vertex) is returned.
    """
    n_vars = len(rows[0]) if rows else 0
    work = []
    n_surplus = sum(1 for s in senses if s == GE)
    n_cols = n_vars + n_surplus
    si = 0
    for coeffs, sense, b in zip(rows, senses, rhs):
        row = list(coeffs) + [_ZERO] * n_surplus + [Fraction(b)]
        if sense == GE:
            row[n_vars + si] = Fraction(-1)
            si += 1
        if row[-1] < 0:
            row = [-v for v in row]
        work.append(row)

    m = len(work)
    # Phase 1: artificial variable per row, minimize their sum.
    tableau = []
    for i, row in enumerate(work):
        art = [_ZERO] * m
        art[i] = _ONE
        tableau.append(row[:-1] + art + [row[-1]])
    total_cols = n_cols + m
    cost = [_ZERO] * (total_cols + 1)
    for j in range(n_cols):
        cost[j] = -sum(tableau[i][j] for i in range(m))
    cost[-1] = -sum(tableau[i][-1] for i in range(m))
    tableau.append(cost)
    basis = [n_cols + i for i in range(m)]
    _bland_min(tableau, basis, total_cols)
    if tableau[-1][-1] != 0:
        raise Infeasible("phase-1 optimum is positive")

    # Drive any artificial still in the basis out (or drop its redundant row).
    drop = []
    for i in range(m):
        if basis[i] >= n_cols:
            pivot_col = -1
            for j in range(n_cols):
                if tableau[i][j]:
                    pivot_col = j
                    break
            if pivot_col >= 0:
                _simplex_pivot(tableau, basis, i, pivot_col)
            else:
                drop.append(i)
    if drop:
        tableau = [row for i, row in enumerate(tableau[:-1]) if i not in drop] + [tableau[-1]]
        basis = [b for i, b in enumerate(basis) if i not in drop]
        m = len(basis)

    # Strip artificial columns.
    tableau = [row[:n_cols] + [row[-1]] for row in tableau]

    if objective is not None:
        cost = [Fraction(c) for c in objective] + [_ZERO] * (n_surplus) + [_ZERO]
        # Express the cost row in terms of the current basis.
        for i in range(m):
            f = cost[basis[i]]
            if f:
                cost = [c - f * t for c, t in zip(cost, tableau[i])]
        tableau[-1] = cost
        if _bland_min(tableau, basis, n_cols) == "unbounded":
            raise Unbounded("objective unbounded below")

    values = [_ZERO] * n_cols
    for i in range(m):
        values[basis[i]] = tableau[i][-1]
    return tuple(values[:n_vars])


def fix_integer_part(milp: Milp, x: Sequence[int]) -> Milp:
    """Fold a fixed integer assignment into the right-hand side (an LP in y)."""
    if len(x) != milp.n:
        raise ValueError("x length mismatch")
    rhs = []
    for i in range(milp.m):
        rhs.append(milp.rhs[i] - sum(c * v for c, v in zip(milp.a[i], x) if c))
    rhs.extend(milp.rhs[milp.m :])
    obj = None
    if milp.objective is not None:
        obj = milp.objective[milp.n :]
    return Milp(
        a=tuple(() for _ in range(milp.m)),
        b_mix=milp.b_mix,
        c_frac=milp.c_frac,
        rhs=tuple(rhs),
        senses=milp.senses,
        objective=obj,
        maximize=milp.maximize,
    )


def solve_lp_vertex(milp: Milp) -> MilpSolution:
    """Return a vertex (basic feasible) solution of a pure LP (n must be 0).

    At most one entry of y per row can be non-zero, so the support of the
    result never exceeds the row count.  Raises Infeasible, or Unbounded when
    an objective is supplied and unbounded.
    """
    if milp.n != 0:
        raise ValueError("solve_lp_vertex requires a pure LP; fix x first")
    rows = [list(map(Fraction, coeffs)) for coeffs, _, _ in milp.rows()]
    senses = list(milp.senses)
    rhs = [Fraction(b) for _, _, b in milp.rows()]
    obj = None
    if milp.objective is not None:
        obj = [(-c if milp.maximize else c) for c in milp.objective]
    if not rows:
        return MilpSolution(x=(), y=(Fraction(0),) * milp.r)
    y = _solve_lp(rows, senses, rhs, obj)
    return MilpSolution(x=(), y=tuple(y))


# ---------------------------------------------------------------------------
# Branch and bound.
# ---------------------------------------------------------------------------


def derive_box(milp: Milp) -> tuple[int, ...]:
    """Derive per-variable upper bounds for x from all-non-negative equality rows.

    Raises BoundUnderivable when some integer variable is not bounded by any
    such row; the caller must then supply an explicit box.
    """
    box = [None] * milp.n
    for coeffs, sense, b in milp.rows():
        if sense != EQ or b < 0:
            continue
        if any(c < 0 for c in coeffs):
            continue
        for j in range(milp.n):
            if coeffs[j] > 0:
                cap = b // coeffs[j]
                if box[j] is None or cap < box[j]:
                    box[j] = cap
    missing = [j for j, v in enumerate(box) if v is None]
    if missing:
        raise BoundUnderivable(
            f"no implied upper bound for integer variable(s) {missing}; pass a box"
        )
    return tuple(box)


def _lp_relaxation(milp: Milp, lows, highs, objective):
    rows = [list(map(Fraction, coeffs)) for coeffs, _, _ in milp.rows()]
    senses = list(milp.senses)
    rhs = [Fraction(b) for _, _, b in milp.rows()]
    n, r = milp.n, milp.r
    for j in range(n):
        if lows[j] > 0:
            row = [_ZERO] * (n + r)
            row[j] = _ONE
            rows.append(row)
            senses.append(GE)
            rhs.append(Fraction(lows[j]))
        row = [_ZERO] * (n + r)
        row[j] = Fraction(-1)
        rows.append(row)
        senses.append(GE)
        rhs.append(Fraction(-highs[j]))
    return _solve_lp(rows, senses, rhs, objective)


def solve_milp_feasibility(milp: Milp, box: Sequence[int] | None = None) -> MilpSolution:
    """Find a feasible mixed solution, or prove infeasibility by exhaustion.

    Branch and bound over the exact LP relaxation: always branch on the
    fractional integer variable of lowest index, floor branch first.  When the
    Milp carries an objective, the returned solution is optimal for it (the
    enumeration then prunes on exact LP bounds).  Integer variables must be
    boxable: either implied bounds exist (``derive_box``) or the caller passes
    ``box``.
    """
    if milp.n == 0:
        return solve_lp_vertex(milp)
    if box is None:
        box = derive_box(milp)
    else:
        box = tuple(int(v) for v in box)
        if len(box) != milp.n:
            raise ValueError("box length mismatch")

    objective = None
    if milp.objective is not None:
        objective = [(-c if milp.maximize else c) for c in milp.objective]

    best: tuple[Fraction, MilpSolution] | None = None
    stack = [(tuple(0 for _ in range(milp.n)), box)]
    while stack:
        lows, highs = stack.pop()
        try:
            point = _lp_relaxation(milp, lows, highs, objective)
        except Infeasible:
            continue
        if objective is not None and best is not None:
            lp_val = sum((c * v for c, v in zip(objective, point)), _ZERO)
            if lp_val >= best[0]:
                continue
        frac_j = -1
        for j in range(milp.n):
            if point[j].denominator != 1:
                frac_j = j
                break
        if frac_j < 0:
            sol = MilpSolution(
                x=tuple(int(point[j]) for j in range(milp.n)),
                y=tuple(point[milp.n :]),
            )
            if objective is None:
                return sol
            val = sum((c * v for c, v in zip(objective, point)), _ZERO)
            if best is None or val < best[0]:
                best = (val, sol)
            continue
        floor_v = point[frac_j].numerator // point[frac_j].denominator
        up_lows = list(lows)
        up_lows[frac_j] = floor_v + 1
        down_highs = list(highs)
        down_highs[frac_j] = floor_v
        # LIFO stack: push the ceiling branch first so the floor branch runs first.
        if up_lows[frac_j] <= highs[frac_j]:
            stack.append((tuple(up_lows), highs))
        if floor_v >= lows[frac_j]:
            stack.append((lows, tuple(down_highs)))
    if best is not None:
        return best[1]
    raise Infeasible("branch and bound exhausted every box cell")


def _restrict_to_support(milp: Milp, support: Sequence[int]) -> Milp:
    keep = tuple(support)
    a = tuple(tuple(row[j] for j in keep) for row in milp.a)
    obj = None
    if milp.objective is not None:
        obj = tuple(milp.objective[j] for j in keep) + milp.objective[milp.n :]
    return Milp(
        a=a,
        b_mix=milp.b_mix,
        c_frac=milp.c_frac,
        rhs=milp.rhs,
        senses=milp.senses,
        objective=obj,
        maximize=milp.maximize,
    )


def _expand_support(sol: MilpSolution, support: Sequence[int], n: int) -> MilpSolution:
    x = [0] * n
    for j, v in zip(support, sol.x):
        x[j] = v
    return MilpSolution(x=tuple(x), y=sol.y)


def solve_support_bounded(
    milp: Milp, s_max: int, box: Sequence[int] | None = None
) -> MilpSolution:
    """Search supports of the integer part by increasing cardinality.

    Support sizes 0, 1, ..., ``s_max`` are tried in order, candidate supports
    of equal size in lexicographic order, each restricted program solved by
    ``solve_milp_feasibility``.  Without an objective the first feasible
    candidate (hence one of minimum support cardinality) is returned; with an
    objective every candidate is scanned and the earliest one attaining the
    best value wins, so the result has minimum support among optimal
    solutions.  Raises InfeasibleWithinSupport when nothing fits the budget.
    """
    if s_max > milp.n:
        raise ValueError("s_max exceeds the number of integer variables")
    best: tuple[Fraction, MilpSolution] | None = None
    sign = -1 if milp.maximize else 1
    for size in range(s_max + 1):
        for support in itertools.combinations(range(milp.n), size):
            sub = _restrict_to_support(milp, support)
            sub_box = None if box is None else [box[j] for j in support]
            try:
                if sub_box is None:
                    try:
                        sub_box = list(derive_box(sub))
                    except BoundUnderivable:
                        sub_box = None
                sol = solve_milp_feasibility(sub, box=sub_box)
            except Infeasible:
                continue
            full = _expand_support(sol, support, milp.n)
            if milp.objective is None:
                return full
            val = sign * objective_value(milp, full)
            if best is None or val < best[0]:
                best = (val, full)
    if best is not None:
        return best[1]
    raise InfeasibleWithinSupport(f"no solution with integer support <= {s_max}")


# ---------------------------------------------------------------------------
# Exhaustive oracle.
# ---------------------------------------------------------------------------


def _box_search(milp: Milp, box: Sequence[int]):
    """DFS over all integer assignments in the box, yielding feasible solutions.

    Variables are explored in descending max-|coefficient| order (ties by
    index) with partial row-sum pruning; leaves are yielded in no particular
    order, so callers must rank candidates explicitly.
    """
    n, r = milp.n, milp.r
    rows = list(milp.rows())
    n_rows = len(rows)
    coeff = [[row[0][j] for j in range(n)] for row in rows]
    senses = [row[1] for row in rows]
    rhs = [row[2] for row in rows]
    has_y = [any(row[0][n:]) for row in rows]

    order = sorted(range(n), key=lambda j: (-max((abs(c[j]) for c in coeff), default=0), j))
    # Suffix bounds: extreme additional contribution per row from unset vars.
    suf_lo = [[0] * n_rows for _ in range(n + 1)]
    suf_hi = [[0] * n_rows for _ in range(n + 1)]
    for pos in range(n - 1, -1, -1):
        j = order[pos]
        for i in range(n_rows):
            c = coeff[i][j]
            lo = min(0, c * box[j])
            hi = max(0, c * box[j])
            suf_lo[pos][i] = suf_lo[pos + 1][i] + lo
            suf_hi[pos][i] = suf_hi[pos + 1][i] + hi

    x = [0] * n
    partial = [0] * n_rows
    steps = 0

    def leaf():
        if r == 0:
            for i in range(n_rows):
                if senses[i] == EQ and partial[i] != rhs[i]:
                    return None
                if senses[i] == GE and partial[i] < rhs[i]:
                    return None
            return MilpSolution(x=tuple(x), y=())
        try:
            sub = fix_integer_part(milp, x)
            ysol = solve_lp_vertex(sub)
        except Infeasible:
            return None
        return MilpSolution(x=tuple(x), y=ysol.y)

    def feasible_prefix(pos):
        for i in range(n_rows):
            lo = partial[i] + suf_lo[pos][i]
            hi = partial[i] + suf_hi[pos][i]
            if has_y[i]:
                # Continuous part can only add row coefficients times y >= 0;
                # without sign info, skip pruning on mixed rows.
                continue
            if senses[i] == EQ and (rhs[i] < lo or rhs[i] > hi):
                return False
            if senses[i] == GE and hi < rhs[i]:
                return False
        return True

    def walk(pos):
        nonlocal steps
        steps += 1
        if steps > _BRUTE_FORCE_STEP_BUDGET:
            raise SearchSpaceTooLarge(
                f"enumeration exceeded {_BRUTE_FORCE_STEP_BUDGET} steps"
            )
        if pos == n:
            sol = leaf()
            if sol is not None:
                yield sol
            return
        j = order[pos]
        for v in range(box[j] + 1):
            x[j] = v
            for i in range(n_rows):
                if coeff[i][j]:
                    partial[i] += coeff[i][j] * v
            if feasible_prefix(pos + 1):
                yield from walk(pos + 1)
            for i in range(n_rows):
                if coeff[i][j]:
                    partial[i] -= coeff[i][j] * v
        x[j] = 0

    yield from walk(0)


def brute_force_min_support(milp: Milp, box: Sequence[int]) -> MilpSolution:
    """Exhaustively find a feasible solution of globally minimum support.

    With an objective set, minimizes support among optimal-objective
    solutions.  Ties break to the lexicographically smallest x.  The search
    is guarded by a step budget of 10^8 enumeration steps.
    """
    box = tuple(int(v) for v in box)
    if len(box) != milp.n:
        raise ValueError("box length mismatch")
    sign = -1 if milp.maximize else 1
    best = None
    for sol in _box_search(milp, box):
        val = sign * objective_value(milp, sol) if milp.objective is not None else _ZERO
        key = (val, sol.support_size, sol.x)
        if best is None or key < best[0]:
            best = (key, sol)
    if best is None:
        raise Infeasible("no integer point in the box satisfies the rows")
    return best[1]


def count_optimal_solutions(milp: Milp, box: Sequence[int]) -> tuple[MilpSolution, int]:
    """Return one optimal solution and the number of optima in the box.

    Ground-truth helper for uniqueness checks; only meaningful for pure
    integer programs with an objective.
    """
    if milp.objective is None:
        raise ValueError("needs an objective")
    sign = -1 if milp.maximize else 1
    best = None
    count = 0
    for sol in _box_search(milp, tuple(int(v) for v in box)):
        val = sign * objective_value(milp, sol)
        if best is None or val < best[0][0]:
            best = ((val, sol.support_size, sol.x), sol)
            count = 1
        elif val == best[0][0]:
            count += 1
            key = (val, sol.support_size, sol.x)
            if key < best[0]:
                best = (key, sol)
    if best is None:
        raise Infeasible("no integer point in the box satisfies the rows")
    return best[1], count


# ---------------------------------------------------------------------------
# Debug text serialization (test fixtures and the CLI).
# ---------------------------------------------------------------------------


def milp_to_text(milp: Milp) -> str:
    """Serialize in the fixture format: a vars header, optional objective, rows."""
    lines = [f"vars {milp.n} {milp.r}"]
    if milp.objective is not None:
        word = "max" if milp.maximize else "min"
        lines.append(word + " " + " ".join(str(c) for c in milp.objective))
    for coeffs, sense, b in milp.rows():
        xs = " ".join(str(v) for v in coeffs[: milp.n])
        ys = " ".join(str(v) for v in coeffs[milp.n :])
        body = f"{xs} | {ys}" if milp.r else xs
        lines.append(f"{body} {sense} {b}".strip())
    return "\n".join(lines) + "\n"


def milp_from_text(text: str) -> Milp:
    """Parse the fixture format produced by ``milp_to_text``."""
    n = r = None
    objective = None
    maximize = False
    rows, senses, rhs = [], [], []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "vars":
            n, r = int(parts[1]), int(parts[2])
            continue
        if parts[0] in ("min", "max"):
            maximize = parts[0] == "max"
            objective = tuple(Fraction(v) for v in parts[1:])
            continue
        if n is None:
            raise ValueError("missing 'vars <n> <r>' header")
        sense_at = None
        for k, tok in enumerate(parts):
            if tok in (EQ, GE):
                sense_at = k
                break
        if sense_at is None or sense_at != len(parts) - 2:
            raise ValueError(f"row must end with '<rel> <rhs>': {line!r}")
        nums = [tok for tok in parts[:sense_at] if tok != "|"]
        if len(nums) != n + r:
            raise ValueError(f"row has {len(nums)} coefficients, expected {n + r}")
        rows.append(tuple(int(v) for v in nums))
        senses.append(parts[sense_at])
        rhs.append(int(parts[-1]))
    if n is None:
        raise ValueError("missing 'vars <n> <r>' header")
    return Milp.from_rows(rows, senses, rhs, n, objective=objective, maximize=maximize)
