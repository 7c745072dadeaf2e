"""Scheduling in the compressed (value, count) encoding, where job and
machine counts are binary numbers: outputs are sets of (speed, multiplicity,
configuration) records and all arithmetic stays polynomial in the number of
distinct classes.

Implements the exact preemptive lower bound, the block greedy with additive
p_max guarantee, its (2+eps) binary-search driver, and the compressed variant
of the full approximation pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .blockpack import greedy_block_pack, preemptive_bound_core
from .eptas import run_pipeline
from .hybrid import GridRecords, ScheduleRecord
from .oracle import Schedule, Violation
from .rounding import CompressedInstance, Instance, Part, TrimRecord, ValueGroup

_EXPAND_CAP = 100_000


def _normalize(classes) -> tuple[tuple[int, int], ...]:
    merged: dict[int, int] = {}
    for v, c in classes:
        v, c = int(v), int(c)
        if v < 1 or c < 1:
            raise ValueError("values and counts must be >= 1")
        merged[v] = merged.get(v, 0) + c
    return tuple(sorted(merged.items(), key=lambda t: -t[0]))


@dataclass(frozen=True)
class HMInstance:
    """Jobs and machines as (value, count) classes, sorted by descending
    value; duplicate values merge on construction."""

    job_classes: tuple[tuple[int, int], ...]
    machine_classes: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "job_classes", _normalize(self.job_classes))
        object.__setattr__(self, "machine_classes", _normalize(self.machine_classes))
        if not self.job_classes or not self.machine_classes:
            raise ValueError("need at least one job and one machine class")

    @property
    def n(self) -> int:
        return len(self.job_classes)

    @property
    def m(self) -> int:
        return len(self.machine_classes)

    @property
    def total_jobs(self) -> int:
        return sum(c for _, c in self.job_classes)

    @property
    def total_machines(self) -> int:
        return sum(c for _, c in self.machine_classes)

    @property
    def p_max(self) -> int:
        return self.job_classes[0][0]

    def to_compressed(self) -> CompressedInstance:
        jobs = tuple(
            ValueGroup(
                value=Fraction(p),
                count=c,
                parts=(Part(ref=idx, count=c, value=Fraction(p)),),
            )
            for idx, (p, c) in sorted(
                enumerate(self.job_classes), key=lambda t: t[1][0]
            )
        )
        machines = tuple(
            ValueGroup(
                value=Fraction(s),
                count=c,
                parts=(Part(ref=idx, count=c, value=Fraction(s)),),
            )
            for idx, (s, c) in sorted(
                enumerate(self.machine_classes), key=lambda t: t[1][0]
            )
        )
        return CompressedInstance(job_groups=jobs, machine_groups=machines)

    def expand(self) -> Instance:
        if self.total_jobs > _EXPAND_CAP or self.total_machines > _EXPAND_CAP:
            raise ValueError("instance too large to expand")
        jobs = [p for p, c in self.job_classes for _ in range(c)]
        machines = [s for s, c in self.machine_classes for _ in range(c)]
        return Instance(jobs=tuple(jobs), machines=tuple(machines))

    @staticmethod
    def from_json_obj(obj) -> "HMInstance":
        def classes(entries, key):
            out = []
            for e in entries:
                if isinstance(e, dict):
                    out.append((int(e[key]), int(e.get("count", 1))))
                else:
                    out.append((int(e), 1))
            return out

        return HMInstance(
            job_classes=tuple(classes(obj["jobs"], "p")),
            machine_classes=tuple(classes(obj["machines"], "s")),
        )

    def to_json_obj(self):
        return {
            "jobs": [{"p": p, "count": c} for p, c in self.job_classes],
            "machines": [{"s": s, "count": c} for s, c in self.machine_classes],
        }


@dataclass(frozen=True)
class HMRecord:
    """``machines`` machines of one speed, each receiving the same batch of
    (processing time, jobs per machine)."""

    speed: int
    machines: int
    jobs: tuple[tuple[int, int], ...]

    def load(self) -> Fraction:
        return Fraction(sum(p * b for p, b in self.jobs), self.speed)


@dataclass(frozen=True)
class HMSchedule:
    records: tuple[HMRecord, ...]

    def makespan(self) -> Fraction:
        return max((r.load() for r in self.records), default=Fraction(0))

    def to_json_obj(self):
        return {
            "records": [
                {"s": r.speed, "machines": r.machines, "jobs": [[p, b] for p, b in r.jobs]}
                for r in self.records
            ]
        }

    @staticmethod
    def from_json_obj(obj) -> "HMSchedule":
        return HMSchedule(
            records=tuple(
                HMRecord(
                    speed=int(r["s"]),
                    machines=int(r["machines"]),
                    jobs=tuple((int(p), int(b)) for p, b in r["jobs"]),
                )
                for r in obj["records"]
            )
        )


def preemptive_bound(hm: HMInstance) -> Fraction:
    """The preemptive makespan lower bound: the bigger of the average load
    and any top-k prefix ratio, evaluated only at class breakpoints."""
    jobs = [(Fraction(p), c) for p, c in hm.job_classes]
    machines = [(Fraction(s), c) for s, c in hm.machine_classes]
    return preemptive_bound_core(jobs, machines)


def validate_hm_schedule(
    hm: HMInstance, sched: HMSchedule, bound: Fraction
) -> Violation | None:
    """Expansion-free validation: exact per-class coverage, machine budgets,
    and per-record load at most the bound."""
    bound = Fraction(bound)
    eta = {p: c for p, c in hm.job_classes}
    mu = {s: c for s, c in hm.machine_classes}
    used: dict[int, int] = {}
    covered: dict[int, int] = {}
    for idx, rec in enumerate(sched.records):
        if rec.speed not in mu:
            return Violation("bad machine", idx, f"unknown speed {rec.speed}")
        if rec.machines < 1:
            return Violation("bad machine", idx, "empty record")
        used[rec.speed] = used.get(rec.speed, 0) + rec.machines
        for p, b in rec.jobs:
            if p not in eta:
                return Violation("uncovered job", idx, f"unknown processing time {p}")
            covered[p] = covered.get(p, 0) + rec.machines * b
        if rec.load() > bound:
            return Violation(
                "overloaded machine", idx, f"record load {rec.load()} exceeds {bound}"
            )
    for s, c in used.items():
        if c > mu[s]:
            return Violation("bad machine", -1, f"speed {s} uses {c} > {mu[s]} machines")
    for p, c in eta.items():
        if covered.get(p, 0) != c:
            return Violation(
                "uncovered job", -1, f"class p={p}: covered {covered.get(p, 0)} of {c}"
            )
    return None


def hm_greedy(hm: HMInstance, budget) -> HMSchedule:
    """Block greedy: longest jobs onto fastest machines, whole classes at a
    time, overpacking each machine by at most one job.  ``budget`` must be
    preemptively feasible; the makespan is then at most budget + p_max and at
    most 2n + 2m - 1 records are emitted."""
    budget = Fraction(budget)
    tp = preemptive_bound(hm)
    if budget < tp:
        raise ValueError(f"budget {budget} below the preemptive bound {tp}")
    jobs = [(Fraction(p), c) for p, c in hm.job_classes]
    machines = [(Fraction(s), c) for s, c in hm.machine_classes]
    packs = greedy_block_pack(jobs, machines, budget)
    records = tuple(
        HMRecord(
            speed=hm.machine_classes[rec.machine_class][0],
            machines=rec.machines,
            jobs=tuple((hm.job_classes[jc][0], b) for jc, b in rec.batch),
        )
        for rec in packs
    )
    if len(records) > 2 * hm.n + 2 * hm.m - 1:
        raise AssertionError("record count bound violated")
    return HMSchedule(records=records)


def hm_two_plus_eps(hm: HMInstance, eps) -> tuple[HMSchedule, int]:
    """Binary search over powers of (1+eps) in [T_p, 2 T_p], probing the
    greedy at twice each guess; a probe succeeds when its validated makespan
    is at most twice the guess, and the best validated schedule overall is
    returned together with the number of probes spent."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    tp = preemptive_bound(hm)
    base = 1 + eps
    steps = 0
    power = Fraction(1)
    while power < 2:
        power *= base
        steps += 1
    cache: dict[int, tuple[bool, HMSchedule]] = {}

    def probe(t: int):
        if t not in cache:
            guess = tp * base**t
            sched = hm_greedy(hm, 2 * guess)
            cache[t] = (sched.makespan() <= 2 * guess, sched)
        return cache[t]

    lo, hi = 0, steps
    while lo < hi:
        mid = (lo + hi) // 2
        if probe(mid)[0]:
            hi = mid
        else:
            lo = mid + 1
    probe(lo)
    validated = [(s.makespan(), t, s) for t, (ok, s) in cache.items() if ok]
    if validated:
        _, _, best = min(validated, key=lambda v: (v[0], v[1]))
    else:
        best = probe(steps)[1]
    return best, len(cache)


def records_to_hm(records: GridRecords, hm: HMInstance, trim: TrimRecord) -> HMSchedule:
    """Materialize pipeline records against the original classes: machine
    groups split into their source classes (fastest first) and trimmed jobs
    fold onto the designated fastest machine."""
    comp = records.ri.source
    group_parts: dict[int, list[list]] = {}
    for gi, group in enumerate(comp.machine_groups):
        parts = sorted(group.parts, key=lambda p: (-p.value, p.ref))
        group_parts[gi] = [[p.ref, p.count] for p in parts]

    out: list[HMRecord] = []
    fastest_done = False
    extra: dict[int, int] = {}
    for group in trim.removed_jobs:
        for part in group.parts:
            extra[part.ref] = extra.get(part.ref, 0) + part.count

    for rec in records.records:
        parts = group_parts[rec.machine_group]
        left = rec.machines
        while left:
            if not parts:
                raise ValueError("record machine counts exceed the group")
            ref, avail = parts[0]
            take = min(left, avail)
            content = {jref: per for jref, per in rec.content}
            if not fastest_done:
                # Peel off the single fastest machine to absorb trimmed jobs.
                head_content = dict(content)
                for jref, cnt in extra.items():
                    head_content[jref] = head_content.get(jref, 0) + cnt
                out.append(
                    HMRecord(
                        speed=hm.machine_classes[ref][0],
                        machines=1,
                        jobs=tuple(
                            (hm.job_classes[jref][0], per)
                            for jref, per in sorted(head_content.items())
                            if per
                        ),
                    )
                )
                fastest_done = True
                consumed = 1
            else:
                out.append(
                    HMRecord(
                        speed=hm.machine_classes[ref][0],
                        machines=take,
                        jobs=tuple(
                            (hm.job_classes[jref][0], per)
                            for jref, per in sorted(content.items())
                            if per
                        ),
                    )
                )
                consumed = take
            parts[0][1] -= consumed
            if parts[0][1] == 0:
                parts.pop(0)
            left -= consumed
    merged: dict[tuple[int, tuple], int] = {}
    order: list[tuple[int, tuple]] = []
    for rec in out:
        if not rec.jobs and rec.machines:
            continue  # idle machines need no record
        key = (rec.speed, rec.jobs)
        if key not in merged:
            merged[key] = 0
            order.append(key)
        merged[key] += rec.machines
    return HMSchedule(
        records=tuple(HMRecord(speed=s, machines=merged[(s, jobs)], jobs=jobs) for s, jobs in order)
    )


def hm_eptas(hm: HMInstance, eps) -> HMSchedule:
    """The compressed-encoding variant of the full pipeline: the same rounding
    and configuration program over (value, count) classes, with the tiny-job
    phase handled by the block greedy per speed class, emitting records."""
    comp = hm.to_compressed()

    def score(result, trim) -> Fraction:
        if not isinstance(result, GridRecords):
            raise TypeError("hm pipeline requires record output")
        return records_to_hm(result, hm, trim).makespan()

    outcome = run_pipeline(comp, eps, score, wiring="hybrid")
    return records_to_hm(outcome.records, hm, outcome.trim)


def expand_hm_schedule(hm: HMInstance, sched: HMSchedule) -> tuple[Instance, Schedule]:
    """Expand records to an explicit plain schedule (desk-scale only)."""
    inst = hm.expand()
    job_pool: dict[int, list[int]] = {}
    for idx, p in enumerate(inst.jobs):
        job_pool.setdefault(p, []).append(idx)
    machine_pool: dict[int, list[int]] = {}
    for idx, s in enumerate(inst.machines):
        machine_pool.setdefault(s, []).append(idx)
    assignment: dict[int, int] = {}
    for rec in sched.records:
        for _ in range(rec.machines):
            mid = machine_pool[rec.speed].pop(0)
            for p, b in rec.jobs:
                for _ in range(b):
                    assignment[job_pool[p].pop(0)] = mid
    if len(assignment) != inst.n_jobs:
        raise ValueError("schedule does not cover every job")
    return inst, Schedule(assignment=tuple(assignment[j] for j in range(inst.n_jobs)))
