import random
from fractions import Fraction

import pytest

from relsched.milp import (
    EQ,
    GE,
    BoundUnderivable,
    Infeasible,
    InfeasibleWithinSupport,
    Milp,
    MilpSolution,
    brute_force_min_support,
    check_solution,
    count_optimal_solutions,
    derive_box,
    fix_integer_part,
    milp_from_text,
    milp_to_text,
    objective_value,
    solve_lp_vertex,
    solve_milp_feasibility,
    solve_support_bounded,
)


def lp(rows, senses, rhs, objective=None, maximize=False):
    """Pure LP helper: all variables continuous."""
    return Milp.from_rows(rows, senses, rhs, n_int=0, objective=objective, maximize=maximize)


def ilp(rows, senses, rhs, objective=None, maximize=False):
    """Pure ILP helper: all variables integral."""
    n = len(rows[0])
    return Milp.from_rows(rows, senses, rhs, n_int=n, objective=objective, maximize=maximize)


class TestLpVertex:
    def test_single_tight_constraint_minimize(self):
        # y1 + y2 = 1, minimize y1 -> (0, 1)
        m = lp([(1, 1)], [EQ], [1], objective=(Fraction(1), Fraction(0)))
        sol = solve_lp_vertex(m)
        assert sol.y == (0, 1)

    def test_negativity_conflict_infeasible(self):
        with pytest.raises(Infeasible):
            solve_lp_vertex(lp([(1,)], [EQ], [-1]))

    def test_two_by_two_system(self):
        # 2y1 + y2 = 4, y1 + y2 = 3 -> unique point (1, 2), support 2 <= 2 rows
        m = lp([(2, 1), (1, 1)], [EQ, EQ], [4, 3])
        sol = solve_lp_vertex(m)
        assert sol.y == (1, 2)
        assert sum(1 for v in sol.y if v) <= 2

    def test_support_at_most_row_count(self):
        rng = random.Random(7)
        for _ in range(40):
            n_rows = rng.randint(1, 3)
            n_vars = rng.randint(n_rows, 6)
            point = [rng.randint(0, 4) for _ in range(n_vars)]
            rows = [[rng.randint(0, 3) for _ in range(n_vars)] for _ in range(n_rows)]
            rhs = [sum(c * v for c, v in zip(row, point)) for row in rows]
            m = lp(rows, [EQ] * n_rows, rhs)
            sol = solve_lp_vertex(m)
            assert check_solution(m, sol)
            assert sum(1 for v in sol.y if v) <= n_rows

    def test_unbounded_needs_objective(self):
        from relsched.milp import Unbounded

        m = lp([(1, -1)], [EQ], [0], objective=(Fraction(-1), Fraction(0)))
        with pytest.raises(Unbounded):
            solve_lp_vertex(m)

    def test_ge_rows(self):
        m = lp([(1, 1), (1, 0)], [GE, GE], [3, 1], objective=(1, 1))
        sol = solve_lp_vertex(m)
        assert check_solution(m, sol)
        assert sol.y[0] + sol.y[1] == 3

    def test_rejects_integer_variables(self):
        with pytest.raises(ValueError):
            solve_lp_vertex(ilp([(1,)], [EQ], [1]))


class TestMilpFeasibility:
    def test_one_variable_fixup(self):
        # 2x1 + 2y1 = 3 -> x1 = 0, y1 = 3/2 or x1 = 1, y1 = 1/2
        m = Milp.from_rows([(2, 2)], [EQ], [3], n_int=1)
        sol = solve_milp_feasibility(m)
        assert check_solution(m, sol)
        assert sol.x[0] in (0, 1)
        assert sol.y[0] == Fraction(3 - 2 * sol.x[0], 2)

    def test_parity_infeasible(self):
        with pytest.raises(Infeasible):
            solve_milp_feasibility(ilp([(2,)], [EQ], [3]))

    def test_small_diophantine(self):
        m = ilp([(1, 2)], [EQ], [7])
        sol = solve_milp_feasibility(m)
        assert sol.x in ((7, 0), (5, 1), (3, 2), (1, 3))

    def test_explicit_box_required(self):
        # x1 - x2 = 1 has no implied box.
        m = ilp([(1, -1)], [EQ], [1])
        with pytest.raises(BoundUnderivable):
            solve_milp_feasibility(m)
        sol = solve_milp_feasibility(m, box=(3, 3))
        assert check_solution(m, sol)

    def test_determinism(self):
        m = ilp([(1, 2)], [EQ], [7])
        assert solve_milp_feasibility(m) == solve_milp_feasibility(m)

    def test_optimizes_when_objective_present(self):
        m = ilp([(1, 2)], [EQ], [7], objective=(1, 0), maximize=True)
        sol = solve_milp_feasibility(m)
        assert sol.x == (7, 0)


class TestSupportBounded:
    def test_empty_support_checked_first(self):
        # All-zero x works: 0x + y = 2.
        m = Milp.from_rows([(1, 1)], [EQ], [2], n_int=1)
        sol = solve_support_bounded(m, s_max=1, box=(2,))
        assert sol.x == (0,)

    def test_single_unit(self):
        m = ilp([(1, 1)], [EQ], [1])
        sol = solve_support_bounded(m, s_max=1)
        assert sorted(sol.x) == [0, 1]

    def test_budget_exhausted(self):
        m = ilp([(1, 0), (0, 1)], [EQ, EQ], [1, 1])
        with pytest.raises(InfeasibleWithinSupport):
            solve_support_bounded(m, s_max=1)

    def test_lower_bound_row_with_objective(self):
        # Row (1 2 4) = 7, maximize (1 3 9): optimum (1,1,1) has support 3;
        # within support <= 2 the best is (3,0,1) with value 12.
        m = ilp([(1, 2, 4)], [EQ], [7], objective=(1, 3, 9), maximize=True)
        sol3 = solve_support_bounded(m, s_max=3)
        assert sol3.x == (1, 1, 1)
        sol2 = solve_support_bounded(m, s_max=2)
        assert sol2.support_size == 2
        assert objective_value(m, sol2) == 12

    def test_agrees_with_brute_force(self):
        rng = random.Random(11)
        for _ in range(25):
            n = rng.randint(2, 4)
            n_rows = rng.randint(1, 2)
            point = [rng.randint(0, 2) for _ in range(n)]
            rows = [[rng.randint(0, 3) for _ in range(n)] for _ in range(n_rows)]
            rhs = [sum(c * v for c, v in zip(row, point)) for row in rows]
            m = ilp(rows, [EQ] * n_rows, rhs)
            box = tuple(max(3, v) for v in point)
            bf = brute_force_min_support(m, box)
            sb = solve_support_bounded(m, s_max=n, box=box)
            assert check_solution(m, sb)
            assert sb.support_size == bf.support_size


class TestBruteForce:
    def test_single_value(self):
        m = ilp([(1,)], [EQ], [5])
        sol = brute_force_min_support(m, box=(5,))
        assert sol.x == (5,)
        assert sol.support_size == 1

    def test_parity_infeasible(self):
        with pytest.raises(Infeasible):
            brute_force_min_support(ilp([(2,)], [EQ], [3]), box=(3,))

    def test_lexicographic_tie_break(self):
        m = ilp([(1, 1)], [EQ], [1])
        sol = brute_force_min_support(m, box=(1, 1))
        assert sol.x == (0, 1) or sol.x == (1, 0)
        # Equal support sizes: lexicographically smallest x wins.
        assert sol.x == (0, 1)

    def test_mixed_rows_use_lp(self):
        m = Milp.from_rows([(1, 1), (0, 1)], [EQ, GE], [3, 1], n_int=1)
        sol = brute_force_min_support(m, box=(3,))
        assert check_solution(m, sol)
        assert sol.x == (0,)

    def test_count_optima(self):
        m = ilp([(1, 1)], [EQ], [2], objective=(1, 1), maximize=True)
        _, count = count_optimal_solutions(m, box=(2, 2))
        assert count == 3  # (0,2), (1,1), (2,0)


class TestPlumbing:
    def test_derive_box(self):
        m = ilp([(1, 2, 4)], [EQ], [7])
        assert derive_box(m) == (7, 3, 1)

    def test_fix_integer_part(self):
        m = Milp.from_rows([(2, 2)], [EQ], [3], n_int=1)
        sub = fix_integer_part(m, (1,))
        sol = solve_lp_vertex(sub)
        assert sol.y == (Fraction(1, 2),)

    def test_resubstitution_random(self):
        rng = random.Random(3)
        for _ in range(30):
            n = rng.randint(1, 3)
            r = rng.randint(0, 2)
            n_rows = rng.randint(1, 3)
            point = [rng.randint(0, 3) for _ in range(n + r)]
            rows = [[rng.randint(0, 3) for _ in range(n + r)] for _ in range(n_rows)]
            rhs = [sum(c * v for c, v in zip(row, point)) for row in rows]
            m = Milp.from_rows(rows, [EQ] * n_rows, rhs, n_int=n)
            try:
                sol = solve_milp_feasibility(m, box=(4,) * m.n)
            except Infeasible:
                pytest.fail("planted instance reported infeasible")
            assert check_solution(m, sol)

    def test_text_round_trip(self):
        m = ilp([(1, 2, 4)], [EQ], [7], objective=(1, 3, 9), maximize=True)
        text = milp_to_text(m)
        again = milp_from_text(text)
        assert again == m

    def test_text_round_trip_mixed(self):
        m = Milp.from_rows(
            [(2, 1, 1), (0, 1, -1)], [EQ, GE], [5, 0], n_int=1
        )
        assert milp_from_text(milp_to_text(m)) == m

    def test_check_solution_rejects_bad(self):
        m = ilp([(1, 1)], [EQ], [2])
        assert not check_solution(m, MilpSolution(x=(1, 0), y=()))
        assert check_solution(m, MilpSolution(x=(1, 1), y=()))
