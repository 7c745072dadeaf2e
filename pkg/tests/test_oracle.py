import random
from fractions import Fraction

from relsched.oracle import Schedule, opt_makespan_bruteforce, validate_schedule
from relsched.rounding import Instance


class TestBruteForce:
    def test_single_pair(self):
        inst = Instance(jobs=(5,), machines=(2,))
        opt, sched = opt_makespan_bruteforce(inst)
        assert opt == Fraction(5, 2)
        assert sched.assignment == (0,)

    def test_symmetric(self):
        inst = Instance(jobs=(2, 2), machines=(1, 1))
        opt, _ = opt_makespan_bruteforce(inst)
        assert opt == 2

    def test_three_jobs_two_speeds(self):
        inst = Instance(jobs=(2, 3, 3), machines=(1, 2))
        opt, sched = opt_makespan_bruteforce(inst)
        assert opt == 3
        assert validate_schedule(inst, sched, opt) is None

    def test_exhaustive_cross_check(self):
        rng = random.Random(9)
        for _ in range(20):
            n = rng.randint(1, 6)
            m = rng.randint(1, 3)
            inst = Instance(
                jobs=tuple(rng.randint(1, 9) for _ in range(n)),
                machines=tuple(rng.randint(1, 4) for _ in range(m)),
            )
            opt, sched = opt_makespan_bruteforce(inst)
            assert sched.makespan(inst) == opt
            # Naive full enumeration.
            best = None
            for code in range(m**n):
                c = code
                loads = [Fraction(0)] * m
                for j in range(n):
                    loads[c % m] += Fraction(inst.jobs[j], inst.machines[c % m])
                    c //= m
                span = max(loads)
                best = span if best is None or span < best else best
            assert opt == best

    def test_permutation_invariance(self):
        a = Instance(jobs=(4, 1, 3), machines=(2, 1))
        b = Instance(jobs=(3, 4, 1), machines=(1, 2))
        assert opt_makespan_bruteforce(a)[0] == opt_makespan_bruteforce(b)[0]


class TestValidator:
    def test_valid_at_own_makespan(self):
        inst = Instance(jobs=(2, 3), machines=(1, 1))
        sched = Schedule(assignment=(0, 1))
        assert validate_schedule(inst, sched, sched.makespan(inst)) is None

    def test_uncovered_job(self):
        inst = Instance(jobs=(2, 3), machines=(1,))
        bad = Schedule(assignment=(0,))
        v = validate_schedule(inst, bad, Fraction(100))
        assert v is not None and v.kind == "uncovered job"

    def test_overloaded_machine_named(self):
        inst = Instance(jobs=(2, 3), machines=(1, 1))
        sched = Schedule(assignment=(1, 1))
        v = validate_schedule(inst, sched, Fraction(4))
        assert v is not None
        assert v.kind == "overloaded machine"
        assert v.index == 1

    def test_bad_machine_index(self):
        inst = Instance(jobs=(2,), machines=(1,))
        v = validate_schedule(inst, Schedule(assignment=(3,)), Fraction(10))
        assert v is not None and v.kind == "bad machine"
