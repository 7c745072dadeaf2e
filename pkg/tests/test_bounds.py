import math
import random
from fractions import Fraction

import pytest

from relsched.bounds import (
    MatrixProfile,
    bound_classic,
    bound_elementary,
    bound_lambert,
    bound_main,
    bound_tangent,
    lambert_w_minus1,
    lower_bound_instance,
    max_column_norm,
    pnorm_log_bound,
    support_bound_report,
    support_budget,
)
from relsched.milp import (
    brute_force_min_support,
    count_optimal_solutions,
    derive_box,
    objective_value,
)

LOG2E = math.log2(math.e)


def profile(m, a_max, delta=None):
    return MatrixProfile(m=m, delta=delta if delta is not None else a_max, a_max=a_max)


def bisect_w_minus1(z, lo=-50.0, hi=-1.0):
    """Independent oracle: bisection on w*e^w = z over [-50, -1]."""
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid * math.exp(mid) < z:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


class TestColumnNorm:
    def test_direct_definition(self):
        assert max_column_norm([[1, -2], [3, 0]]) == 4

    def test_identity(self):
        eye = [[1 if i == j else 0 for j in range(3)] for i in range(3)]
        assert max_column_norm(eye) == 1

    def test_lower_bound_matrix(self):
        m = lower_bound_instance(2, 4)
        assert max_column_norm(m.a) == 4

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            max_column_norm([])


class TestClassicBounds:
    def test_values(self):
        es, aliev = bound_classic(profile(1, 1))
        assert es == pytest.approx(4.0, rel=1e-9)
        assert aliev == pytest.approx(2.0, rel=1e-9)
        _, aliev4 = bound_classic(profile(4, 1))
        assert aliev4 == pytest.approx(16.0, rel=1e-9)


class TestTangentBound:
    def test_alpha_half_constant(self):
        # Printed simplification: s <= 2m*log2(1.46*A); exact constant ~1.457.
        c = math.sqrt(2 * LOG2E / (math.e * 0.5))
        assert c == pytest.approx(1.4570351339937455, rel=1e-12)
        got = bound_tangent(profile(2, 1), 0.5)
        assert got == pytest.approx(2.172142664111868, rel=1e-9)
        assert got <= 2 * 2 * math.log2(1.46 * 1) * (1 + 1e-9)

    def test_alpha_eleventh(self):
        got = bound_tangent(profile(1, 1), 1 / 11)
        assert got == pytest.approx(1.9500266228812773, rel=1e-9)

    def test_high_precision_point(self):
        got = bound_tangent(profile(3, 8), 0.5)
        assert got == pytest.approx(21.258213996167804, rel=1e-9)

    def test_alpha_range(self):
        with pytest.raises(ValueError):
            bound_tangent(profile(1, 1), 0.0)
        with pytest.raises(ValueError):
            bound_tangent(profile(1, 1), 1.0)


class TestLambertKernel:
    def test_branch_point(self):
        assert lambert_w_minus1(-1.0 / math.e) == pytest.approx(-1.0, abs=1e-9)

    def test_defining_identity(self):
        for z in (-0.3, -0.2, -0.05, -1e-3, -1e-6, -1e-9):
            w = lambert_w_minus1(z)
            assert w <= -1.0
            assert abs(w * math.exp(w) - z) <= 1e-12 * abs(z)

    def test_against_bisection_oracle(self):
        z = -math.exp(-2.0)
        w = lambert_w_minus1(z)
        assert w == pytest.approx(bisect_w_minus1(z), abs=1e-9)
        assert w == pytest.approx(-3.1461932206205825, abs=1e-7)

    def test_residual_on_log_grid(self):
        lo, hi = -1.0 / math.e, -1e-9
        for k in range(1000):
            z = lo * (hi / lo) ** (k / 999.0)
            w = lambert_w_minus1(z)
            assert abs(w * math.exp(w) - z) <= 1e-12 * abs(z)

    def test_closed_form_upper_bound_grid(self):
        # -W_-1(-e^(-u-1)) <= u + sqrt(2*alpha*u) + alpha - ln(alpha)
        for alpha in (0.1, 0.5, 1.0, 2.0):
            for i in range(0, 501):
                u = i / 10.0
                z = -math.exp(-u - 1.0)
                lhs = -lambert_w_minus1(z)
                rhs = u + math.sqrt(2 * alpha * u) + alpha - math.log(alpha)
                assert lhs <= rhs + 1e-9

    def test_domain(self):
        with pytest.raises(ValueError):
            lambert_w_minus1(0.0)
        with pytest.raises(ValueError):
            lambert_w_minus1(-1.0)


class TestLambertBound:
    def test_values(self):
        assert bound_lambert(profile(1, 1), 1.0) == pytest.approx(1.753606797749979, rel=1e-9)
        assert bound_lambert(profile(1, 2), 1.0) == pytest.approx(3.5546950765959604, rel=1e-9)

    def test_dominated_by_main_from_two(self):
        for a_max in [2, 3, 4, 5, 8, 100, 2**10, 2**20]:
            p = profile(1, a_max)
            assert bound_lambert(p, 1.0) <= bound_main(p) * (1 + 1e-9)

    def test_known_gap_at_one(self):
        # At A_max = 1 the chain inequality does not hold numerically:
        # 0.2236 + 1.53 = 1.7536 > log2(3) = 1.585.
        p = profile(1, 1)
        assert bound_lambert(p, 1.0) > bound_main(p)

    def test_alpha_positive(self):
        with pytest.raises(ValueError):
            bound_lambert(profile(1, 1), 0.0)


class TestMainBound:
    def test_values(self):
        assert bound_main(profile(1, 1)) == pytest.approx(math.log2(3), rel=1e-9)
        assert bound_main(profile(2, 4)) == pytest.approx(9.998352126188502, rel=1e-9)

    def test_dominates_worst_case_support(self):
        for m in (1, 2, 3):
            for a_max in (1, 2, 4, 8, 16):
                inst = lower_bound_instance(m, a_max)
                d = a_max.bit_length() - 1
                want = m * (d + 1)
                prof = MatrixProfile.from_matrix(inst.a) if m else None
                if m:
                    assert want <= bound_main(prof) * (1 + 1e-9)


class TestElementaryBound:
    def test_fixed_point_value(self):
        # t = 1 + log2(e) + log2(1 + t) has fixed point ~5.0364 (oracle below).
        t = 1.0
        for _ in range(500):
            t = 1 + LOG2E + math.log2(1 + t)
        assert t == pytest.approx(5.036378251807552, rel=1e-9)
        assert bound_elementary(profile(1, 1)) == pytest.approx(t, rel=1e-6)

    def test_iteration_monotone_convergent(self):
        for a_max in (1, 2, 7, 64):
            t = 1.0
            prev = 0.0
            for _ in range(200):
                assert t >= prev
                prev = t
                t = 1 + LOG2E + math.log2(1 + t * a_max)
            # Contraction: derivative of the update is < 1 here.
            assert a_max / ((1 + t * a_max) * math.log(2)) < 1

    def test_weaker_than_main_on_grid(self):
        for m in range(1, 6):
            for a_max in range(1, 65):
                p = profile(m, a_max)
                assert bound_elementary(p) >= bound_main(p) * (1 - 1e-9)


class TestPnorm:
    def test_p_one_identity(self):
        mat = [[1, -2], [3, 0]]
        p = MatrixProfile.from_matrix(mat)
        via_dim, via_pow = pnorm_log_bound(p, 1.0)
        want = math.log2(p.a_max)
        assert via_dim == pytest.approx(want, rel=1e-9)
        assert via_pow == pytest.approx(want, rel=1e-9)

    def test_identity_matrix_p2(self):
        eye = [[1 if i == j else 0 for j in range(4)] for i in range(4)]
        p = MatrixProfile.from_matrix(eye)
        via_dim, _ = pnorm_log_bound(p, 2.0)
        assert via_dim == pytest.approx(1.0, rel=1e-9)

    def test_validity_random_matrices(self):
        rng = random.Random(5)
        for _ in range(50):
            m = rng.randint(1, 4)
            n = rng.randint(1, 5)
            mat = [[rng.randint(-4, 4) for _ in range(n)] for _ in range(m)]
            if max_column_norm_or_zero(mat) == 0:
                continue
            p = MatrixProfile.from_matrix(mat)
            base = math.log2(p.a_max)
            for q in (1.0, 1.5, 2.0, 3.0):
                via_dim, via_pow = pnorm_log_bound(p, q)
                assert via_dim >= base - 1e-9
                assert via_pow >= base - 1e-9

    def test_p_below_one_rejected(self):
        with pytest.raises(ValueError):
            pnorm_log_bound(MatrixProfile.from_matrix([[1]]), 0.5)


def max_column_norm_or_zero(mat):
    try:
        return max_column_norm(mat)
    except ValueError:
        return 0


class TestLowerBoundInstance:
    def test_unit_case(self):
        m = lower_bound_instance(1, 1)
        assert m.a == ((1,),)
        assert m.rhs == (1,)
        assert m.objective == (1,)
        sol = brute_force_min_support(m, box=derive_box(m))
        assert sol.x == (1,)

    def test_two_blocks(self):
        m = lower_bound_instance(2, 4)
        assert m.rhs == (7, 7)
        assert m.n == 6
        sol = brute_force_min_support(m, box=derive_box(m))
        assert sol.x == (1,) * 6
        assert sol.support_size == 6

    def test_a_max_five_same_block_as_four(self):
        m5 = lower_bound_instance(1, 5)
        m4 = lower_bound_instance(1, 4)
        assert m5.a == m4.a
        assert max_column_norm(m5.a) == 4 <= 5
        _, count = count_optimal_solutions(m5, box=(7, 3, 1))
        assert count == 1

    def test_uniqueness_small_family(self):
        for m in (1, 2):
            for a_max in (1, 2, 4):
                inst = lower_bound_instance(m, a_max)
                sol, count = count_optimal_solutions(inst, box=derive_box(inst))
                assert count == 1
                assert sol.x == (1,) * inst.n


class TestReportAndProperties:
    def test_report_fields(self):
        rep = support_bound_report(profile(2, 4, delta=4))
        assert rep.main_bound == pytest.approx(9.998352126188502, rel=1e-9)
        assert len(rep.lines()) == 6

    def test_budget_is_ceiling(self):
        assert support_budget(profile(2, 4)) == 10

    def test_monotone_in_m_and_a_max(self):
        vals = {}
        for m in range(1, 5):
            for a in range(1, 33):
                p = profile(m, a)
                vals[m, a] = (
                    bound_classic(p) + (bound_tangent(p, 0.5), bound_lambert(p, 1.0),
                                        bound_main(p), bound_elementary(p))
                )
        for m in range(1, 5):
            for a in range(1, 33):
                if m > 1:
                    assert all(x >= y - 1e-9 for x, y in zip(vals[m, a], vals[m - 1, a]))
                if a > 1:
                    assert all(x >= y - 1e-9 for x, y in zip(vals[m, a], vals[m, a - 1]))

    def test_random_planted_ilps_within_main_bound(self):
        rng = random.Random(2024)
        for _ in range(40):
            m = rng.randint(1, 3)
            n = rng.randint(m, 6)
            point = [rng.randint(0, 2) for _ in range(n)]
            mat = [[rng.randint(-4, 4) for _ in range(n)] for _ in range(m)]
            if max_column_norm_or_zero(mat) == 0:
                continue
            rhs = [sum(c * v for c, v in zip(row, point)) for row in mat]
            from relsched.milp import Milp

            prog = Milp.from_rows(mat, ["="] * m, rhs, n_int=n)
            prof = MatrixProfile.from_matrix(mat)
            budget = math.ceil(bound_main(prof))
            box = 4
            found = None
            while box <= 16:
                sol = brute_force_min_support(prog, box=(box,) * n)
                found = sol
                if sol.support_size <= budget:
                    break
                box *= 2
            assert found is not None and found.support_size <= budget
