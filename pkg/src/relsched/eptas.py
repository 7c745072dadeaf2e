"""End-to-end approximation pipeline: trim, preround, binary-search the
makespan, solve the configuration program per guess, and extract a schedule.

The accuracy knob delta is derived from the requested epsilon as
``delta = min(eps / C_ACCURACY, DELTA_CAP)``.  The cap keeps the grid (and
with it the configuration sets, which grow exponentially in 1/delta) at a
size exact rational solving can handle; quality at the cap is validated
empirically by the acceptance suite rather than by the asymptotic constants,
which only engage for far smaller delta than any exact solver could run.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .confmilp import (
    ConfigMilp,
    Placement,
    assign_confs_to_machines,
    build_recursive_milp,
    project_to_vertex,
)
from .hybrid import (
    GridRecords,
    HybridMilp,
    ScheduleRecord,
    build_hybrid_milp,
    build_schedule_fast,
    project_hybrid,
)
from .milp import Infeasible, solve_milp_feasibility
from .oracle import Schedule
from .rounding import (
    CompressedInstance,
    Instance,
    TrimRecord,
    makespan_search,
    preround,
    round_to_grid,
    trim_negligible,
)

C_ACCURACY = Fraction(9, 10)
DELTA_CAP = Fraction(1, 3)
SEARCH_REFINE = 4  # the makespan ladder uses step (1 + delta/SEARCH_REFINE)


def delta_for_eps(eps) -> Fraction:
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    return min(eps / C_ACCURACY, DELTA_CAP)


@dataclass
class PipelineOutcome:
    records: GridRecords | None
    placement: Placement | None
    makespan: Fraction
    t_best: Fraction
    delta: Fraction
    trim: TrimRecord
    pre: CompressedInstance
    probes: int


def run_pipeline(
    comp: CompressedInstance,
    eps,
    score: Callable,
    wiring: str = "hybrid",
) -> PipelineOutcome:
    """Drive the binary search; every feasible probe is extracted, scored by
    the caller (real makespan including trim replay), and the best validated
    result wins.  ``wiring`` selects the formulation solved per guess:
    "hybrid" (default) or "recursive" (stand-in machines, then the direct
    configuration assignment of the solution)."""
    delta = delta_for_eps(eps)
    trimmed, trim = trim_negligible(comp, delta)
    pre = preround(trimmed, delta)
    store: dict = {}
    probes = 0

    def probe(t: Fraction):
        nonlocal probes
        probes += 1
        ri = round_to_grid(pre, delta, t)
        if wiring == "hybrid":
            hm = build_hybrid_milp(ri)
            try:
                sol = solve_milp_feasibility(hm.milp)
            except Infeasible:
                return None
            hs = project_hybrid(hm, hm.solution(sol))
            result = build_schedule_fast(hs, ri)
        elif wiring == "recursive":
            cm = build_recursive_milp(ri)
            try:
                sol = solve_milp_feasibility(cm.milp, box=cm.default_box())
            except Infeasible:
                return None
            x = project_to_vertex(cm, cm.solution_dict(sol))
            result = assign_confs_to_machines(x, ri)
        else:
            raise ValueError(f"unknown wiring {wiring!r}")
        store[t] = (score(result, trim), result)
        return result

    t_best, _ = makespan_search(pre, delta / SEARCH_REFINE, probe)
    best_t = min(store, key=lambda t: (store[t][0], t))
    span, result = store[best_t]
    return PipelineOutcome(
        records=result if isinstance(result, GridRecords) else None,
        placement=result if isinstance(result, Placement) else None,
        makespan=span,
        t_best=t_best,
        delta=delta,
        trim=trim,
        pre=pre,
        probes=probes,
    )


# ---------------------------------------------------------------------------
# Materialization to plain schedules.
# ---------------------------------------------------------------------------


def _machine_order(group) -> list[int]:
    """Original machine ids inside a group, fastest (then lowest id) first."""
    order = []
    for part in sorted(group.parts, key=lambda p: (-p.value, p.ref)):
        order.extend([part.ref] * part.count)
    return order


def _job_order(group, descending: bool) -> list[int]:
    sign = -1 if descending else 1
    order = []
    for part in sorted(group.parts, key=lambda p: (sign * p.value, p.ref)):
        order.extend([part.ref] * part.count)
    return order


def records_to_schedule(
    records: GridRecords, inst: Instance, trim: TrimRecord
) -> Schedule:
    """Expand schedule records over the original plain instance; trimmed jobs
    replay onto the designated fastest machine, trimmed machines stay idle."""
    comp = records.ri.source
    offsets = {gi: 0 for gi in range(len(comp.machine_groups))}
    orders = {gi: _machine_order(g) for gi, g in enumerate(comp.machine_groups)}
    assignment: dict[int, int] = {}
    fastest_machine: int | None = None
    for rec in records.records:
        ids = orders[rec.machine_group][
            offsets[rec.machine_group] : offsets[rec.machine_group] + rec.machines
        ]
        if len(ids) != rec.machines:
            raise ValueError("record machine counts exceed the group")
        offsets[rec.machine_group] += rec.machines
        if fastest_machine is None and ids:
            fastest_machine = ids[0]
        for mid in ids:
            for ref, per in rec.content:
                if per != 1:
                    raise ValueError("plain records must carry unit job refs")
                if ref in assignment:
                    raise ValueError(f"job {ref} assigned twice")
                assignment[ref] = mid
    if fastest_machine is None:
        raise ValueError("no machines in records")
    for group in trim.removed_jobs:
        for ref in group.members:
            assignment[ref] = fastest_machine
    if len(assignment) != inst.n_jobs:
        missing = [j for j in range(inst.n_jobs) if j not in assignment]
        raise ValueError(f"jobs left unassigned: {missing}")
    return Schedule(assignment=tuple(assignment[j] for j in range(inst.n_jobs)))


def placement_to_schedule(
    placement: Placement, inst: Instance, trim: TrimRecord
) -> Schedule:
    """Expand a grid placement (from the stand-in-machine extraction) over
    the original plain instance."""
    ri = placement.ri
    comp = ri.source
    machine_ids: dict[tuple, int] = {}
    for r in range(1, ri.tau + 1):
        ids: list[int] = []
        groups = [gi for gi, rr in enumerate(ri.machine_grid) if rr == r]
        groups.sort(key=lambda gi: -comp.machine_groups[gi].value)
        for gi in groups:
            ids.extend(_machine_order(comp.machine_groups[gi]))
        for o, mid in enumerate(ids):
            machine_ids[(r, o)] = mid
    job_queues: dict[int, list[int]] = {}
    for gi, group in enumerate(comp.job_groups):
        r = ri.job_grid[gi]
        job_queues.setdefault(r, [])
    for r in job_queues:
        refs: list[tuple[Fraction, int]] = []
        for gi, group in enumerate(comp.job_groups):
            if ri.job_grid[gi] == r:
                for part in group.parts:
                    refs.extend([(part.value, part.ref)] * part.count)
        refs.sort(key=lambda t: (-t[0], t[1]))
        job_queues[r] = [ref for _, ref in refs]
    assignment: dict[int, int] = {}
    for j in sorted(placement.fills):
        queue = job_queues.get(j, [])
        for key, count in placement.fills[j]:
            for _ in range(count):
                if not queue:
                    raise ValueError(f"fill overflow at grid size {j}")
                assignment[queue.pop(0)] = machine_ids[key]
    fastest = machine_ids[placement.fastest_key]
    for group in trim.removed_jobs:
        for ref in group.members:
            assignment[ref] = fastest
    if len(assignment) != inst.n_jobs:
        missing = [jj for jj in range(inst.n_jobs) if jj not in assignment]
        raise ValueError(f"jobs left unassigned: {missing}")
    return Schedule(assignment=tuple(assignment[j] for j in range(inst.n_jobs)))


def solve_eptas(inst: Instance, eps, wiring: str = "hybrid"):
    """The (1+eps)-style solver for plain instances: returns the schedule,
    its exact makespan, and the pipeline diagnostics."""
    comp = inst.to_compressed()

    def score(result, trim) -> Fraction:
        if isinstance(result, GridRecords):
            sched = records_to_schedule(result, inst, trim)
        else:
            sched = placement_to_schedule(result, inst, trim)
        return sched.makespan(inst)

    outcome = run_pipeline(comp, eps, score, wiring=wiring)
    if outcome.records is not None:
        sched = records_to_schedule(outcome.records, inst, outcome.trim)
    else:
        sched = placement_to_schedule(outcome.placement, inst, outcome.trim)
    return sched, sched.makespan(inst), outcome
