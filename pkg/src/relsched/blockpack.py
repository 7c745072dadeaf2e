"""Block-wise greedy packing over (value, count) classes.

Handles job and machine multiplicities arithmetically so the work and the
output stay polynomial in the number of *classes*, never in the counts: one
record covers a whole run of identical machines receiving an identical batch.
Used both by the high-multiplicity greedy scheduler and by the tiny-job phase
of schedule construction.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


class PackingError(Exception):
    """The greedy ran out of machines (budget below the preemptive bound)."""


@dataclass(frozen=True)
class PackRecord:
    """``machines`` identical machines of class ``machine_class`` each get
    ``batch`` = ((job class index, jobs per machine), ...)."""

    machine_class: int
    machines: int
    batch: tuple[tuple[int, int], ...]


def preemptive_bound_core(
    jobs: Sequence[tuple[Fraction, int]], machines: Sequence[tuple[Fraction, int]]
) -> Fraction:
    """max(average load, max over class breakpoints k of top-k ratios).

    ``jobs`` sorted by descending value, ``machines`` by descending capacity.
    The prefix ratio (a + x*p)/(b + x*s) is monotone in x, so only the k where
    a job or machine class runs out can attain the maximum.
    """
    total_p = sum(v * c for v, c in jobs)
    total_s = sum(v * c for v, c in machines)
    if total_s <= 0:
        raise ValueError("no machine capacity")
    best = Fraction(total_p, 1) / total_s

    n_total = sum(c for _, c in jobs)
    m_total = sum(c for _, c in machines)
    limit = min(n_total, m_total)

    cum_j, acc = [], 0
    pre_j, s = [], Fraction(0)
    for v, c in jobs:
        acc += c
        s += v * c
        cum_j.append(acc)
        pre_j.append(s)
    cum_m, acc = [], 0
    pre_m, s = [], Fraction(0)
    for v, c in machines:
        acc += c
        s += v * c
        cum_m.append(acc)
        pre_m.append(s)

    def prefix(cum, pre, classes, k):
        pos = bisect_left(cum, k)
        base = pre[pos - 1] if pos else Fraction(0)
        used = cum[pos - 1] if pos else 0
        return base + (k - used) * classes[pos][0]

    events = sorted({k for k in cum_j + cum_m + [limit] if 1 <= k <= limit})
    for k in events:
        num = prefix(cum_j, pre_j, jobs, k)
        den = prefix(cum_m, pre_m, machines, k)
        if den > 0:
            ratio = num / den
            if ratio > best:
                best = ratio
    return best


def greedy_block_pack(
    jobs: Sequence[tuple[Fraction, int]],
    machines: Sequence[tuple[Fraction, int]],
    budget: Fraction,
) -> list[PackRecord]:
    """Longest jobs onto fastest machines, whole blocks at a time.

    Each machine receives at least ``budget`` worth of relative load before
    the next one starts, overshooting by at most one job, so the makespan is
    at most ``budget`` plus one job's time.  Raises PackingError when the
    machines run out, which cannot happen for ``budget`` at or above the
    preemptive bound.
    """
    jobs = [[Fraction(v), int(c)] for v, c in jobs if c]
    machines = [[Fraction(v), int(c)] for v, c in machines if c]
    for v, _ in jobs:
        if v <= 0:
            raise ValueError("job values must be positive")
    for v, _ in machines:
        if v <= 0:
            raise ValueError("machine capacities must be positive")
    records: list[PackRecord] = []
    i = j = 0
    while j < len(jobs):
        if i >= len(machines):
            raise PackingError("ran out of machines; budget below preemptive bound")
        cap, mu = machines[i]
        p, eta = jobs[j]
        per = cap * budget / p
        x = per.numerator // per.denominator + (1 if per.denominator != 1 else 0)
        if x == 0:
            x = 1  # a degenerate budget still forces one (overpacked) job
        if mu * x < eta:
            records.append(PackRecord(machine_class=i, machines=mu, batch=((j, x),)))
            jobs[j][1] = eta - mu * x
            machines[i][1] = 0
        elif x < eta:
            q = eta // x
            records.append(PackRecord(machine_class=i, machines=q, batch=((j, x),)))
            jobs[j][1] = eta - q * x
            machines[i][1] = mu - q
        else:
            batch = []
            load = Fraction(0)
            while load < cap * budget and j < len(jobs):
                p, eta = jobs[j]
                room = (cap * budget - load) / p
                need = room.numerator // room.denominator + (
                    1 if room.denominator != 1 else 0
                )
                y = min(need, eta)
                batch.append((j, y))
                jobs[j][1] = eta - y
                load += p * y
                if jobs[j][1] == 0:
                    j += 1
            records.append(
                PackRecord(machine_class=i, machines=1, batch=tuple(batch))
            )
            machines[i][1] = mu - 1
        if machines[i][1] == 0:
            i += 1
        if j < len(jobs) and jobs[j][1] == 0:
            j += 1
    return records
