"""Hybrid formulation: configuration variables for long jobs plus assignment
variables that route tiny jobs (at most delta times their machine's speed)
into leftover configuration capacity.

Holds the conversion from stand-in-machine solutions (inline every virtual
machine into its host, dropping now-tiny jobs into the routing variables) and
the schedule builder, which works block-wise over (value, count) classes so
high-multiplicity instances never get expanded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .blockpack import PackingError, greedy_block_pack, preemptive_bound_core
from .confmilp import Configuration
from .milp import Milp, MilpSolution, fix_integer_part, solve_lp_vertex
from .rounding import Grid, Part, RoundedInstance

_F0 = Fraction(0)


class ConversionError(Exception):
    """Solution conversion hit a count mismatch."""


def validate_cprime(conf: Configuration, grid: Grid) -> None:
    """Membership in the plain configuration family: fits the speed, support
    inside the long window (multiplicities are otherwise unrestricted)."""
    i = conf.owner_speed
    if conf.dot_b(grid) > grid.b(i):
        raise ValueError(f"configuration exceeds speed b_{i}")
    window = grid.long_window(i)
    for r, _ in conf.gamma:
        if r not in window:
            raise ValueError(f"index {r} outside the long window of {i}")


def free_capacity(conf: Configuration, grid: Grid) -> Fraction:
    return grid.b(conf.owner_speed) - conf.dot_b(grid)


def build_cprime(ri: RoundedInstance, i: int) -> tuple[Configuration, ...]:
    """All multiplicity vectors over the long window fitting speed b_i,
    in lexicographic gamma order (the zero vector always included)."""
    grid = ri.grid
    window = list(grid.long_window(i))
    cap = grid.b(i)
    out: list[tuple[tuple[int, int], ...]] = []
    chosen: list[tuple[int, int]] = []

    def dfs(pos: int, left: Fraction):
        if pos == len(window):
            out.append(tuple(chosen))
            return
        r = window[pos]
        value = grid.b(r)
        top = int(left / value)
        for mult in range(top + 1):
            if mult:
                chosen.append((r, mult))
            dfs(pos + 1, left - mult * value)
            if mult:
                chosen.pop()

    dfs(0, cap)
    confs = [Configuration(owner_speed=i, gamma=g) for g in out]
    confs.sort(key=lambda c: c.gamma)
    return tuple(confs)


def tiny_indices(grid: Grid, i: int) -> range:
    """Indices j whose value is at most delta * b_i (routable to speed i)."""
    return range(grid.long_window(i).stop, grid.tau + 1)


@dataclass(frozen=True)
class HybridMilp:
    ri: RoundedInstance
    x_vars: tuple[tuple[int, Configuration], ...]
    y_vars: tuple[tuple[int, int], ...]
    n_int: int
    milp: Milp

    def solution(self, sol: MilpSolution) -> "HybridSolution":
        values = tuple(Fraction(v) for v in sol.x) + tuple(sol.y)
        nx = len(self.x_vars)
        x = {var: values[i] for i, var in enumerate(self.x_vars) if values[i]}
        y = {var: values[nx + i] for i, var in enumerate(self.y_vars) if values[nx + i]}
        return HybridSolution(x=x, y=y)


@dataclass
class HybridSolution:
    """Configuration counts plus tiny-job routing amounts."""

    x: dict[tuple[int, Configuration], Fraction]
    y: dict[tuple[int, int], Fraction]


def build_hybrid_milp(ri: RoundedInstance) -> HybridMilp:
    """Rows: every machine carries a configuration; every job is covered by a
    configuration slot or routed; routed volume fits the free capacity.

    Capacity rows are scaled by the grid's common denominator so every
    coefficient stays an exact integer.
    """
    grid = ri.grid
    confs = {i: build_cprime(ri, i) for i in range(1, grid.tau + 1)}
    x_int = [(i, c) for i in range(1, grid.tau + 1) if i <= grid.big_l for c in confs[i]]
    x_cont = [(i, c) for i in range(1, grid.tau + 1) if i > grid.big_l for c in confs[i]]
    x_vars = tuple(x_int + x_cont)
    y_vars = tuple((i, j) for i in range(1, grid.tau + 1) for j in tiny_indices(grid, i))
    columns = {var: pos for pos, var in enumerate(x_vars)}
    y_base = len(x_vars)
    for pos, var in enumerate(y_vars):
        columns[var] = y_base + pos
    n_cols = len(x_vars) + len(y_vars)

    denom = 1
    for r in range(1, grid.tau + 1):
        denom = denom * grid.b(r).denominator // math.gcd(denom, grid.b(r).denominator)

    rows, senses, rhs = [], [], []
    for i in range(1, grid.tau + 1):
        row = [0] * n_cols
        for c in confs[i]:
            row[columns[(i, c)]] = 1
        rows.append(tuple(row))
        senses.append("=")
        rhs.append(ri.mu[i - 1])
    for j in range(1, grid.tau + 1):
        row = [0] * n_cols
        for (i, c) in x_vars:
            m = c.mult(j)
            if m:
                row[columns[(i, c)]] = m
        for i in range(1, grid.tau + 1):
            if (i, j) in columns and j in tiny_indices(grid, i):
                row[columns[(i, j)]] = 1
        rows.append(tuple(row))
        senses.append("=")
        rhs.append(ri.eta[j - 1])
    for i in range(1, grid.tau + 1):
        row = [0] * n_cols
        for c in confs[i]:
            coeff = free_capacity(c, grid) * denom
            assert coeff.denominator == 1
            row[columns[(i, c)]] = int(coeff)
        for j in tiny_indices(grid, i):
            coeff = grid.b(j) * denom
            assert coeff.denominator == 1
            row[columns[(i, j)]] = -int(coeff)
        rows.append(tuple(row))
        senses.append(">=")
        rhs.append(0)

    milp = Milp.from_rows(rows, senses, rhs, n_int=len(x_int))
    return HybridMilp(ri=ri, x_vars=x_vars, y_vars=y_vars, n_int=len(x_int), milp=milp)


def check_hybrid_solution(ri: RoundedInstance, hs: HybridSolution) -> None:
    """Exact re-substitution of all three row families plus the tiny-only
    routing pattern and the integrality mask; raises on any violation."""
    grid = ri.grid
    count = [_F0] * (grid.tau + 1)
    covered = [_F0] * (grid.tau + 1)
    used = [_F0] * (grid.tau + 1)
    for (i, conf), v in hs.x.items():
        v = Fraction(v)
        if v < 0:
            raise ValueError("negative configuration count")
        if not v:
            continue
        if conf.owner_speed != i:
            raise ValueError("key speed does not match configuration owner")
        validate_cprime(conf, grid)
        if i <= grid.big_l and v.denominator != 1:
            raise ValueError(f"fractional count at integral speed {i}")
        count[i] += v
        for r, c in conf.gamma:
            covered[r] += c * v
        used[i] += conf.dot_b(grid) * v
    routed_to = [_F0] * (grid.tau + 1)
    for (i, j), v in hs.y.items():
        v = Fraction(v)
        if v < 0:
            raise ValueError("negative routing amount")
        if not v:
            continue
        if j not in tiny_indices(grid, i):
            raise ValueError(f"routing of non-tiny size {j} to speed {i}")
        covered[j] += v
        routed_to[i] += grid.b(j) * v
    for i in range(1, grid.tau + 1):
        if count[i] != ri.mu[i - 1]:
            raise ValueError(f"machine count at {i}: {count[i]} != {ri.mu[i - 1]}")
        if covered[i] != ri.eta[i - 1]:
            raise ValueError(f"job coverage at {i}: {covered[i]} != {ri.eta[i - 1]}")
        free_total = ri.mu[i - 1] * grid.b(i) - used[i]
        if routed_to[i] > free_total:
            raise ValueError(f"routed volume at {i} exceeds free capacity")


# ---------------------------------------------------------------------------
# Conversion from stand-in-machine solutions.
# ---------------------------------------------------------------------------


def _long_part(grid: Grid, conf: Configuration, host: int) -> tuple[tuple[int, int], ...]:
    bound = grid.delta * grid.b(host)
    return tuple((r, c) for r, c in conf.gamma if grid.b(r) > bound)


def convert_solution(
    x_in: Mapping[tuple[int, Configuration], Fraction], ri: RoundedInstance
) -> HybridSolution:
    """Inline stand-in machines into their hosts, then route the dropped tiny
    jobs into free capacity by increasing size.

    Follows the conversion procedure: per speed (fastest first) the
    configuration count is first trimmed to the machine count (removing
    orphaned stand-ins, lexicographically largest configuration first), then
    any job size hosted beyond its remaining real supply has that stand-in's
    own configuration substituted inline, its sub-threshold entries dropped.
    """
    grid = ri.grid
    x: dict[tuple[int, Configuration], Fraction] = {
        k: Fraction(v) for k, v in x_in.items() if v
    }
    eta_rem = [Fraction(e) for e in ri.eta]

    def confs_at(i):
        return sorted(
            (conf for (ii, conf) in x if ii == i and x[(ii, conf)] > 0),
            key=lambda c: c.gamma,
            reverse=True,
        )

    for i in range(1, grid.tau + 1):
        # Self-referential towers (configurations at i carrying size-i jobs
        # beyond the real supply) cancel against their own hosts; only pure
        # single-slot towers can be cancelled without dropping content.
        self_placed = sum(
            (c.mult(i) * x[(i, c)] for c in confs_at(i)), _F0
        )
        surplus = self_placed - eta_rem[i - 1]
        if surplus > 0:
            phantom = Configuration(owner_speed=i, gamma=((i, 1),))
            have = x.get((i, phantom), _F0)
            if have < surplus:
                raise ConversionError(
                    f"unresolvable self-referential surplus at speed {i}"
                )
            x[(i, phantom)] = have - surplus
            if not x[(i, phantom)]:
                del x[(i, phantom)]

        total = sum((x[(i, c)] for c in confs_at(i)), _F0)
        if total < ri.mu[i - 1]:
            raise ConversionError(f"speed {i} holds fewer configurations than machines")
        excess = total - ri.mu[i - 1]
        for conf in confs_at(i):
            if excess <= 0:
                break
            take = min(excess, x[(i, conf)])
            x[(i, conf)] -= take
            if not x[(i, conf)]:
                del x[(i, conf)]
            excess -= take

        while True:
            zeta: dict[int, Fraction] = {}
            for conf in confs_at(i):
                v = x[(i, conf)]
                for r, c in conf.gamma:
                    zeta[r] = zeta.get(r, _F0) + c * v
            overs = [j for j, z in sorted(zeta.items()) if z > eta_rem[j - 1]]
            if not overs:
                break
            j = overs[0]
            surplus = zeta[j] - eta_rem[j - 1]
            while surplus > 0:
                donors = confs_at(j)
                hosts = [c for c in confs_at(i) if c.mult(j)]
                if not donors or not hosts:
                    raise ConversionError(
                        f"no stand-in at size {j} to inline into speed {i}"
                    )
                donor, host = donors[0], hosts[0]
                q = min(surplus, x[(j, donor)], x[(i, host)])
                new_gamma = dict(host.gamma)
                new_gamma[j] -= 1
                for r, c in _long_part(grid, donor, i):
                    new_gamma[r] = new_gamma.get(r, 0) + c
                merged = Configuration(
                    owner_speed=i,
                    gamma=tuple((r, c) for r, c in sorted(new_gamma.items()) if c),
                )
                validate_cprime(merged, grid)
                for key, amount in (((j, donor), -q), ((i, host), -q), ((i, merged), q)):
                    x[key] = x.get(key, _F0) + amount
                    if not x[key]:
                        del x[key]
                surplus -= q
        for jj, z in sorted(zeta.items()):
            eta_rem[jj - 1] -= z
            if eta_rem[jj - 1] < 0:
                raise ConversionError(f"over-consumed job size {jj}")

    y: dict[tuple[int, int], Fraction] = {}
    for i in range(grid.tau, 0, -1):
        z_i = sum(
            (free_capacity(conf, grid) * x[(i, conf)] for conf in confs_at(i)), _F0
        )
        if z_i <= 0:
            continue
        for j in range(grid.tau, grid.long_window(i).stop - 1, -1):
            if eta_rem[j - 1] <= 0:
                continue
            q = min(eta_rem[j - 1], z_i / grid.b(j))
            if q > 0:
                y[(i, j)] = y.get((i, j), _F0) + q
                z_i -= q * grid.b(j)
                eta_rem[j - 1] -= q
            if z_i <= 0:
                break
    if any(eta_rem):
        raise ConversionError(f"jobs left uncovered after conversion: {eta_rem}")
    hs = HybridSolution(x=x, y=y)
    check_hybrid_solution(ri, hs)
    return hs


def project_hybrid(hm: HybridMilp, hs: HybridSolution) -> HybridSolution:
    """Replace the fractional part by a vertex of the restricted LP (few
    fractional variables afterwards), keeping the integral block fixed."""
    x_int = [int(hs.x.get(var, 0)) for var in hm.x_vars[: hm.n_int]]
    sub = fix_integer_part(hm.milp, x_int)
    vertex = solve_lp_vertex(sub)
    x = {var: Fraction(v) for var, v in zip(hm.x_vars[: hm.n_int], x_int) if v}
    cont = hm.x_vars[hm.n_int :] + hm.y_vars
    y: dict[tuple[int, int], Fraction] = {}
    for var, v in zip(cont, vertex.y):
        if not v:
            continue
        if len(var) == 2 and isinstance(var[1], Configuration):
            x[var] = v
        else:
            y[var] = v
    return HybridSolution(x=x, y=y)


# ---------------------------------------------------------------------------
# Schedule construction (count-based, shared by plain and HM outputs).
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScheduleRecord:
    """``machines`` identical machines from one source machine group, each
    receiving the same batch: (source ref, jobs per machine)."""

    machine_group: int
    machines: int
    content: tuple[tuple[int, int], ...]

    def jobs_per_machine(self) -> int:
        return sum(c for _, c in self.content)


@dataclass
class GridRecords:
    """Extraction output: record list plus rounding diagnostics."""

    ri: RoundedInstance
    records: list[ScheduleRecord]
    extra_on_fastest: int


class _Block:
    """A run of identical machines (same source group, same configuration)."""

    __slots__ = ("mgroup", "conf", "count", "segments")

    def __init__(self, mgroup: int, conf, count: int):
        self.mgroup = mgroup
        self.conf = conf
        self.count = count
        self.segments: list[list] = [[count, {}]]

    def refine(self, patterns: list[tuple[int, dict]]) -> None:
        """Overlay a second partition of the machines, merging content."""
        total = sum(c for c, _ in patterns)
        if total < self.count:
            patterns = patterns + [(self.count - total, {})]
        out = []
        old = [[c, dict(d)] for c, d in self.segments]
        new = [[c, dict(d)] for c, d in patterns]
        i = j = 0
        while i < len(old) and j < len(new):
            take = min(old[i][0], new[j][0])
            merged = dict(old[i][1])
            for ref, cnt in new[j][1].items():
                merged[ref] = merged.get(ref, 0) + cnt
            out.append([take, merged])
            old[i][0] -= take
            new[j][0] -= take
            if old[i][0] == 0:
                i += 1
            if new[j][0] == 0:
                j += 1
        out.extend(seg for seg in old[i:] if seg[0])
        self.segments = out


def _draw_front(queue: list, amount: int) -> dict[int, int]:
    """Take ``amount`` items from the front (largest values) of a queue of
    [ref, count, value] entries."""
    batch: dict[int, int] = {}
    while amount and queue:
        entry = queue[0]
        take = min(amount, entry[1])
        batch[entry[0]] = batch.get(entry[0], 0) + take
        entry[1] -= take
        amount -= take
        if entry[1] == 0:
            queue.pop(0)
    return batch


def _draw_back(queue: list, amount: int) -> list[tuple[int, int, Fraction]]:
    """Take ``amount`` items from the back (smallest values), returning
    (ref, count, original value) runs."""
    out = []
    while amount and queue:
        entry = queue[-1]
        take = min(amount, entry[1])
        out.append((entry[0], take, entry[2]))
        entry[1] -= take
        amount -= take
        if entry[1] == 0:
            queue.pop()
    return out


def _fill_patterns(queue: list, per_machine: int, machines: int) -> list[tuple[int, dict]]:
    """Staircase fill: machines in order draw ``per_machine`` jobs each from
    the queue front, grouped into runs of identical batches."""
    patterns: list[tuple[int, dict]] = []
    left = machines
    while left and queue:
        batch: dict[int, int] = {}
        need = per_machine
        probe: list[tuple[list, int]] = []
        for entry in queue:
            if not need:
                break
            a = min(need, entry[1])
            batch[entry[0]] = batch.get(entry[0], 0) + a
            probe.append((entry, a))
            need -= a
        if not batch:
            break
        if need:
            reps = 1  # queue exhausted mid-batch: a single short machine
        else:
            reps = left
            for entry, a in probe:
                reps = min(reps, entry[1] // a)
        for entry, a in probe:
            entry[1] -= a * reps
        while queue and queue[0][1] == 0:
            queue.pop(0)
        patterns.append((reps, batch))
        left -= reps
    if left:
        patterns.append((left, {}))
    return patterns


def build_schedule_fast(hs: HybridSolution, ri: RoundedInstance) -> GridRecords:
    """Turn a hybrid solution into schedule records: floor each configuration
    count onto machines of its speed (one extra copy per fractional variable
    lands on the designated fastest machine), fill long slots with real jobs
    in descending size order, then pack the routed tiny jobs per speed class
    with the block greedy, overpacking each machine by at most one job.

    The fractional part should already be a vertex of the restricted LP when
    it matters; witness-style inputs are integral anyway.
    """
    grid = ri.grid
    comp = ri.source

    queues: dict[int, list] = {}
    for gi, group in enumerate(comp.job_groups):
        r = ri.job_grid[gi]
        q = queues.setdefault(r, [])
        for part in group.parts:
            q.append([part.ref, part.count, part.value])
    for q in queues.values():
        q.sort(key=lambda e: (-e[2], e[0]))

    runs: dict[int, list[list[int]]] = {}
    for gi, group in enumerate(comp.machine_groups):
        r = ri.machine_grid[gi]
        runs.setdefault(r, []).append([gi, group.count])
    for run in runs.values():
        run.sort(key=lambda e: -comp.machine_groups[e[0]].value)

    blocks: list[_Block] = []
    overlay: dict[int, int] = {}
    extra_count = 0

    for r in range(1, grid.tau + 1):
        if ri.mu[r - 1] == 0:
            continue
        confs = sorted(
            (conf for (i, conf) in hs.x if i == r and hs.x[(i, conf)] > 0),
            key=lambda c: c.gamma,
        )
        seq: list[tuple[Configuration | None, int]] = []
        extras_here: list[Configuration] = []
        whole_total = 0
        for conf in confs:
            v = hs.x[(r, conf)]
            whole = v.numerator // v.denominator
            if whole:
                seq.append((conf, whole))
                whole_total += whole
            if v.denominator != 1:
                extras_here.append(conf)
        idle = ri.mu[r - 1] - whole_total
        if idle < 0:
            raise ConversionError(f"configuration copies exceed machines at {r}")
        if idle:
            seq.append((None, idle))

        run = [list(e) for e in runs.get(r, [])]
        speed_blocks: list[_Block] = []
        ri_ptr = 0
        for conf, count in seq:
            while count:
                entry = run[ri_ptr]
                take = min(count, entry[1])
                speed_blocks.append(_Block(entry[0], conf, take))
                entry[1] -= take
                count -= take
                if entry[1] == 0:
                    ri_ptr += 1
        # Long-slot fills, block by block, one grid size at a time.
        for block in speed_blocks:
            if block.conf is None:
                continue
            for j, c in block.conf.gamma:
                patterns = _fill_patterns(queues.get(j, []), c, block.count)
                block.refine(patterns)
        blocks.append((r, speed_blocks))
        for conf in extras_here:
            extra_count += 1
            for j, c in conf.gamma:
                batch = _draw_front(queues.get(j, []), c)
                for ref, cnt in batch.items():
                    overlay[ref] = overlay.get(ref, 0) + cnt

    flat_blocks = [b for _, bs in blocks for b in bs]

    # Tiny routing: distribute what is left in the queues per speed according
    # to the (possibly fractional) routing amounts, then block-pack.
    rest: dict[int, int] = {
        j: sum(e[1] for e in q) for j, q in queues.items() if any(e[1] for e in q)
    }
    alloc: dict[tuple[int, int], int] = {}
    for j, need in sorted(rest.items()):
        ys = sorted(
            ((i, v) for (i, jj), v in hs.y.items() if jj == j and v > 0),
            key=lambda t: t[0],
        )
        if not ys:
            raise ConversionError(f"leftover jobs of size index {j} have no routing")
        left = need
        for i, v in ys:
            a = min(v.numerator // v.denominator, left)
            if a:
                alloc[(i, j)] = alloc.get((i, j), 0) + a
                left -= a
        if left:
            fracs = sorted(
                ((v - (v.numerator // v.denominator), i) for i, v in ys),
                key=lambda t: (-t[0], t[1]),
            )
            for _frac, i in fracs:
                if not left:
                    break
                alloc[(i, j)] = alloc.get((i, j), 0) + 1
                left -= 1
        if left:
            raise ConversionError(f"could not place all tiny jobs of size index {j}")

    by_speed: dict[int, list[tuple[int, int]]] = {}
    for (i, j), cnt in sorted(alloc.items()):
        by_speed.setdefault(i, []).append((j, cnt))

    for r, speed_blocks in blocks:
        todo = by_speed.get(r)
        if not todo:
            continue
        job_classes: list[tuple[Fraction, int]] = []
        refs: list[int] = []
        for j, cnt in sorted(todo):  # ascending j = descending grid value
            for ref, take, _value in _draw_back(queues.get(j, []), cnt):
                job_classes.append((grid.b(j), take))
                refs.append(ref)
        if not job_classes:
            continue
        order = sorted(
            range(len(speed_blocks)),
            key=lambda bi: (
                -(free_capacity(speed_blocks[bi].conf, grid) if speed_blocks[bi].conf else grid.b(r)),
                bi,
            ),
        )
        machine_classes = []
        usable = []
        for bi in order:
            block = speed_blocks[bi]
            free = free_capacity(block.conf, grid) if block.conf else grid.b(r)
            if free > 0:
                machine_classes.append((free, block.count))
                usable.append(bi)
        budget = max(
            Fraction(1), preemptive_bound_core(job_classes, machine_classes)
        )
        packs = greedy_block_pack(job_classes, machine_classes, budget)
        per_block: dict[int, list[tuple[int, dict]]] = {bi: [] for bi in usable}
        for rec in packs:
            bi = usable[rec.machine_class]
            content: dict[int, int] = {}
            for jc, per in rec.batch:
                content[refs[jc]] = content.get(refs[jc], 0) + per
            per_block[bi].append((rec.machines, content))
        for bi in usable:
            pats = per_block[bi]
            if pats:
                speed_blocks[bi].refine(pats)

    records: list[ScheduleRecord] = []
    for block in flat_blocks:
        for count, content in block.segments:
            if count:
                records.append(
                    ScheduleRecord(
                        machine_group=block.mgroup,
                        machines=count,
                        content=tuple(sorted(content.items())),
                    )
                )

    # Fold the overlay (extra copies) onto the designated fastest machine:
    # the first machine of the first record (fastest group, fastest speed).
    if overlay:
        if not records:
            raise ConversionError("no machines to host rounding overflow")
        first = records[0]
        head_content: dict[int, int] = dict(first.content)
        for ref, cnt in overlay.items():
            head_content[ref] = head_content.get(ref, 0) + cnt
        head = ScheduleRecord(
            machine_group=first.machine_group,
            machines=1,
            content=tuple(sorted(head_content.items())),
        )
        rest_rec = (
            [ScheduleRecord(first.machine_group, first.machines - 1, first.content)]
            if first.machines > 1
            else []
        )
        records = [head] + rest_rec + records[1:]

    return GridRecords(ri=ri, records=records, extra_on_fastest=extra_count)
