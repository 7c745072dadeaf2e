"""Ground truth at desk scale: exhaustive optimal makespan with symmetry
pruning, and the exact schedule validator every other module's tests lean on.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .rounding import Instance

_NODE_BUDGET = 10**8


class SearchSpaceTooLarge(Exception):
    pass


@dataclass(frozen=True)
class Schedule:
    """An explicit job -> machine map over a plain instance."""

    assignment: tuple[int, ...]

    def completion_times(self, inst: Instance) -> tuple[Fraction, ...]:
        loads = [Fraction(0)] * inst.n_machines
        for j, i in enumerate(self.assignment):
            loads[i] += Fraction(inst.jobs[j], inst.machines[i])
        return tuple(loads)

    def makespan(self, inst: Instance) -> Fraction:
        return max(self.completion_times(inst))


@dataclass(frozen=True)
class Violation:
    kind: str
    index: int
    detail: str

    def __str__(self):
        return f"{self.kind} at {self.index}: {self.detail}"


def validate_schedule(inst: Instance, sched: Schedule, bound: Fraction) -> Violation | None:
    """Check coverage, machine indices and makespan <= bound exactly.

    Returns None when everything holds, otherwise the first violation found.
    """
    if len(sched.assignment) != inst.n_jobs:
        return Violation("uncovered job", len(sched.assignment), "assignment length mismatch")
    for j, i in enumerate(sched.assignment):
        if not 0 <= i < inst.n_machines:
            return Violation("bad machine", j, f"job {j} assigned to machine {i}")
    bound = Fraction(bound)
    loads = sched.completion_times(inst)
    for i, load in enumerate(loads):
        if load > bound:
            return Violation("overloaded machine", i, f"load {load} exceeds bound {bound}")
    return None


def _estimate_nodes(inst: Instance) -> float:
    branching = len(set(inst.machines))
    est = 1.0
    for j in range(inst.n_jobs):
        est *= min(inst.n_machines, branching + j)
        if est > _NODE_BUDGET:
            return est
    return est


def opt_makespan_bruteforce(inst: Instance) -> tuple[Fraction, Schedule]:
    """Exact optimum by exhaustive assignment with branch-and-bound pruning.

    Jobs are placed in descending size order; among empty machines only the
    first of each speed class may receive a job (identical machines are
    interchangeable), which keeps N <= 12, M <= 4 instances comfortable.
    """
    if _estimate_nodes(inst) > _NODE_BUDGET:
        raise SearchSpaceTooLarge(
            f"estimated search exceeds {_NODE_BUDGET} nodes for N={inst.n_jobs}, M={inst.n_machines}"
        )
    order = sorted(range(inst.n_jobs), key=lambda j: (-inst.jobs[j], j))
    machines = inst.machines
    n_m = inst.n_machines

    loads = [Fraction(0)] * n_m
    assign = [0] * inst.n_jobs
    best_span = None
    best_assign = None

    # Suffix sums admit a simple lower bound: remaining work / total speed.
    total_speed = sum(machines)
    suffix = [0] * (inst.n_jobs + 1)
    for pos in range(inst.n_jobs - 1, -1, -1):
        suffix[pos] = suffix[pos + 1] + inst.jobs[order[pos]]

    def walk(pos: int, placed_work: int):
        nonlocal best_span, best_assign
        if pos == inst.n_jobs:
            span = max(loads)
            if best_span is None or span < best_span:
                best_span = span
                best_assign = assign.copy()
            return
        if best_span is not None:
            if max(loads) >= best_span:
                return
            if Fraction(placed_work + suffix[pos], total_speed) >= best_span:
                return
        job = inst.jobs[order[pos]]
        seen_empty_speeds = set()
        for i in range(n_m):
            if loads[i] == 0:
                if machines[i] in seen_empty_speeds:
                    continue
                seen_empty_speeds.add(machines[i])
            add = Fraction(job, machines[i])
            new_load = loads[i] + add
            if best_span is not None and new_load >= best_span:
                continue
            loads[i] = new_load
            assign[order[pos]] = i
            walk(pos + 1, placed_work + job)
            loads[i] = new_load - add

    walk(0, 0)
    assert best_assign is not None  # all-on-machine-0 always completes
    return best_span, Schedule(assignment=tuple(best_assign))
