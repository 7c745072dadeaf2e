from fractions import Fraction

import pytest

from relsched.rounding import (
    CompressedInstance,
    Grid,
    Instance,
    Part,
    ValueGroup,
    makespan_search,
    power_floor,
    preround,
    round_to_grid,
    trim_negligible,
)
from relsched.oracle import opt_makespan_bruteforce

F = Fraction


def comp_of(jobs, machines):
    return Instance(jobs=jobs, machines=machines).to_compressed()


class TestTrim:
    def test_short_job_removed(self):
        # delta=1/2, N=2: job threshold is 100/4 = 25, so job 1 goes.
        trimmed, rec = trim_negligible(comp_of((1, 100), (1,)), F(1, 2))
        assert [g.value for g in trimmed.job_groups] == [100]
        assert [(g.value, g.count) for g in rec.removed_jobs] == [(1, 1)]
        assert rec.removed_machines == ()

    def test_uniform_instance_untouched(self):
        trimmed, rec = trim_negligible(comp_of((5, 5, 5), (2, 2)), F(1, 2))
        assert rec.removed_jobs == () and rec.removed_machines == ()
        assert trimmed.n_jobs == 3 and trimmed.n_machines == 2

    def test_surplus_machines_dropped_first(self):
        trimmed, rec = trim_negligible(comp_of((4, 4), (1, 2, 3, 5, 9)), F(1, 2))
        assert trimmed.n_machines == 2
        assert [g.value for g in trimmed.machine_groups] == [5, 9]
        assert sum(g.count for g in rec.removed_machines) == 3

    def test_ratio_bound_after_trim(self):
        comp = comp_of((1, 2, 3, 50, 64), (1, 5, 40))
        delta = F(1, 4)
        trimmed, _ = trim_negligible(comp, delta)
        n = comp.n_jobs
        assert trimmed.p_max / trimmed.p_min <= n / delta
        assert trimmed.s_max / trimmed.s_min <= n / delta


class TestPreround:
    def test_powers_of_two(self):
        out = preround(comp_of((3, 5, 8), (1,)), F(1))
        assert [g.value for g in out.job_groups] == [2, 4, 8]

    def test_exact_power_fixed(self):
        out = preround(comp_of((4,), (1,)), F(1))
        assert [g.value for g in out.job_groups] == [4]

    def test_counts_merge(self):
        out = preround(comp_of((3, 3, 3), (1,)), F(1))
        assert [(g.value, g.count) for g in out.job_groups] == [(2, 3)]
        assert out.job_groups[0].members == (0, 1, 2)

    def test_power_floor(self):
        assert power_floor(F(16), F(3, 2)) == F(729, 64)
        assert power_floor(F(1), F(3, 2)) == 1


class TestGrid:
    def test_prefix_delta_half(self):
        g = Grid.build(F(1, 2), F(1), n_jobs=2)
        assert g.lam == 2
        assert g.values[:5] == (F(1), F(3, 4), F(1, 2), F(3, 8), F(1, 4))

    def test_pair_identity(self):
        for delta in (F(1), F(1, 2), F(1, 4), F(1, 8)):
            g = Grid.build(delta, F(1), n_jobs=3)
            for k in range(1, 3):
                for l in range(0, g.lam + 1):
                    for lp in range(l, g.lam + 1):
                        if (l + lp) % 2 == 0:
                            assert g.b_kl(k, l) + g.b_kl(k, lp) == g.b_kl(k - 1, (l + lp) // 2)

    def test_consecutive_ratio(self):
        for delta in (F(1), F(1, 2), F(1, 4), F(1, 8)):
            g = Grid.build(delta, F(5), n_jobs=4)
            for r in range(1, g.tau):
                ratio = g.b(r) / g.b(r + 1)
                assert ratio <= 1 + delta
            for l in range(1, g.lam + 1):
                assert g.b_kl(0, l - 1) / g.b_kl(0, l) == 1 + F(1, 2 * g.lam - l)

    def test_parameter_formulas(self):
        import math

        for delta, n in ((F(1), 2), (F(1, 2), 2), (F(1, 4), 5), (F(1, 8), 12)):
            g = Grid.build(delta, F(3), n_jobs=n)
            assert g.lam == math.ceil(1 / delta)
            assert 2**g.kappa >= n * n / delta > 2 ** (g.kappa - 1)
            assert g.tau == g.kappa * g.lam
            inv = 1 / float(delta)
            if inv > 1:
                want = g.lam * math.ceil(math.log2(inv**3 * math.log2(inv)))
                assert g.big_l == want
            else:
                assert g.big_l == 0

    def test_round_up(self):
        g = Grid.build(F(1, 2), F(1), n_jobs=2)
        assert g.b(g.round_up(F(1))) == F(1)
        assert g.b(g.round_up(F(7, 10))) == F(3, 4)
        assert g.b(g.round_up(F(3, 4))) == F(3, 4)
        with pytest.raises(ValueError):
            g.round_up(F(2))

    def test_long_window(self):
        g = Grid.build(F(1, 2), F(1), n_jobs=2)
        h1 = list(g.long_window(1))
        assert h1[0] == 1
        assert all(g.b(j) > F(1, 2) for j in h1)
        assert g.b(h1[-1] + 1) <= F(1, 2)


class TestRoundToGrid:
    def test_counts_and_conservative(self):
        comp = comp_of((2, 3, 8), (2, 4))
        delta = F(1, 4)
        t = F(4)
        ri = round_to_grid(comp, delta, t)
        assert sum(ri.eta) == 3
        assert sum(ri.mu) == 2
        for gi, group in enumerate(comp.job_groups):
            r = ri.job_grid[gi]
            assert ri.grid.b(r) >= group.value / t
        for gi, group in enumerate(comp.machine_groups):
            r = ri.machine_grid[gi]
            assert ri.grid.b(r) >= group.value

    def test_idempotent_on_grid_values(self):
        delta = F(1, 2)
        grid = Grid.build(delta, F(4), n_jobs=3)
        values = [grid.b(1), grid.b(2), grid.b(4)]
        t = F(1)
        jobs = tuple(
            ValueGroup(value=v, count=1, parts=(Part(ref=i, count=1, value=v),))
            for i, v in enumerate(sorted(values))
        )
        machines = (ValueGroup(value=F(4), count=1, parts=(Part(ref=0, count=1, value=F(4)),)),)
        comp = CompressedInstance(job_groups=jobs, machine_groups=machines)
        ri = round_to_grid(comp, delta, t)
        for gi, group in enumerate(comp.job_groups):
            assert ri.grid.b(ri.job_grid[gi]) == group.value

    def test_out_of_interval_rejected(self):
        comp = comp_of((1, 64), (1,))
        with pytest.raises(ValueError):
            # Guess far above the search interval pushes p_min/T below range.
            round_to_grid(comp, F(1, 2), F(10**9))


class TestMakespanSearch:
    def test_single_job_single_machine(self):
        comp = comp_of((6,), (2,))

        def probe(t):
            return "ok" if t >= 3 else None

        t_best, res = makespan_search(comp, F(1, 2), probe)
        assert t_best == 3
        assert res == "ok"

    def test_within_factor_of_opt(self):
        inst = Instance(jobs=(3, 5, 7), machines=(1, 2))
        opt, _ = opt_makespan_bruteforce(inst)
        comp = inst.to_compressed()
        delta = F(1, 4)

        def probe(t):
            return "s" if t >= opt else None

        t_best, _ = makespan_search(comp, delta, probe)
        assert opt <= t_best < (1 + delta) * opt

    def test_extension_above_upper_endpoint(self):
        comp = comp_of((2, 2), (1,))
        # Feasible only above N * p_max / s_max = 4.
        def probe(t):
            return "s" if t >= 5 else None

        t_best, _ = makespan_search(comp, F(1, 2), probe)
        assert t_best >= 5
