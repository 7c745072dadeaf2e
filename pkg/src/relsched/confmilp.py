"""The configuration MILP with stand-in (virtual) machines.

A configuration is a multiplicity vector of grid job sizes assigned to one
machine speed.  Short jobs never appear directly in a fast machine's
configuration: they are merged pairwise (two same-parity values of a level
sum exactly to a value one level up) or parked on a virtual machine whose
speed equals a job placed higher up, so configurations only ever span the
"long" window (delta * b_i, b_i].

This module builds the configuration sets, assembles the feasibility MILP
(machine-count rows tied to job-placement rows via the virtual coupling),
constructs witness solutions from concrete schedules, and extracts schedules
back out of solutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .milp import Milp, MilpSolution, fix_integer_part, solve_lp_vertex
from .rounding import Grid, RoundedInstance

_F0 = Fraction(0)


class ExtractionError(Exception):
    """Schedule extraction hit an inconsistent solution."""


class WitnessError(Exception):
    """Schedule-to-solution construction could not fit within its slack."""


@dataclass(frozen=True, order=True)
class Configuration:
    """Sparse multiplicity vector over grid indices, owned by one speed."""

    owner_speed: int
    gamma: tuple[tuple[int, int], ...]  # ((grid index, multiplicity), ...) sorted

    def __post_init__(self):
        g = tuple(sorted((int(r), int(c)) for r, c in self.gamma if c))
        for r, c in g:
            if c < 0:
                raise ValueError("negative multiplicity")
        object.__setattr__(self, "gamma", g)

    @property
    def norm1(self) -> int:
        return sum(c for _, c in self.gamma)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(r for r, _ in self.gamma)

    def mult(self, r: int) -> int:
        for rr, c in self.gamma:
            if rr == r:
                return c
        return 0

    def dot_b(self, grid: Grid) -> Fraction:
        return sum((c * grid.b(r) for r, c in self.gamma), _F0)

    def is_zero_one(self) -> bool:
        return all(c == 1 for _, c in self.gamma)


def norm_cap(delta: Fraction) -> int:
    """The size cap 2*log2(2/delta) on configurations, as an integer."""
    return math.floor(2 * math.log2(2 / float(delta)) + 1e-9)


def validate_configuration(conf: Configuration, grid: Grid, delta: Fraction) -> None:
    """Assert the shared invariants: fits its speed, long-window support,
    bounded total multiplicity."""
    i = conf.owner_speed
    if not 1 <= i <= grid.tau:
        raise ValueError("owner speed out of range")
    if conf.dot_b(grid) > grid.b(i):
        raise ValueError(f"configuration exceeds speed b_{i}")
    window = grid.long_window(i)
    for r, _ in conf.gamma:
        if r not in window:
            raise ValueError(f"index {r} outside the long window of {i}")
    if conf.norm1 > norm_cap(delta):
        raise ValueError("configuration has too many entries")


def _groups_of(grid: Grid, r: int) -> tuple[int, ...]:
    """Every level whose group contains index r (boundary indices sit in two)."""
    k = grid.level(r)
    if grid.ell(r) == 0 and k >= 1:
        return (k - 1, k)
    return (k,)


def _exact_pairs(grid: Grid, i: int) -> list[Configuration]:
    """All two-job combinations summing exactly to b_i: same-parity indices of
    the level below, j + j' = 2*(i + lam)."""
    k = grid.level(i) + 1
    if k > grid.kappa - 1:
        return []
    grp = grid.group(k)
    target = 2 * (i + grid.lam)
    out = []
    for j in grp:
        jp = target - j
        if jp < j or jp not in grp:
            continue
        if grid.b(j) + grid.b(jp) != grid.b(i):
            raise AssertionError("pair identity broken; grid construction bug")
        gamma = ((j, 2),) if j == jp else ((j, 1), (jp, 1))
        out.append(Configuration(owner_speed=i, gamma=gamma))
    return out


def _parity_subsets(grid: Grid, delta: Fraction, i: int) -> list[Configuration]:
    """0/1 vectors over the long window with at most one odd- and one
    even-indexed entry per level group, respecting the speed capacity."""
    window = list(grid.long_window(i))
    cap = grid.b(i)
    limit = norm_cap(delta)
    out: list[tuple[tuple[int, int], ...]] = []
    chosen: list[int] = []
    used: set[tuple[int, int]] = set()

    def dfs(pos: int, total: Fraction):
        out.append(tuple((r, 1) for r in chosen))
        if len(chosen) >= limit:
            return
        for nxt in range(pos, len(window)):
            r = window[nxt]
            value = grid.b(r)
            if total + value > cap:
                continue
            slots = [(g, r % 2) for g in _groups_of(grid, r)]
            if any(s in used for s in slots):
                continue
            chosen.append(r)
            used.update(slots)
            dfs(nxt + 1, total + value)
            chosen.pop()
            used.difference_update(slots)

    dfs(0, _F0)
    return [Configuration(owner_speed=i, gamma=g) for g in out]


def build_configurations(ri: RoundedInstance, i: int) -> tuple[Configuration, ...]:
    """The configuration set for machines of speed b_i: exact pairs plus the
    parity-limited 0/1 vectors, deduplicated, in lexicographic gamma order.

    Every emitted configuration satisfies the shared invariants; pair
    combinations whose parts fall outside the long window (possible only for
    coarse delta) are filtered out rather than emitted broken.
    """
    grid, delta = ri.grid, ri.delta
    window = grid.long_window(i)
    cap_n = norm_cap(delta)
    seen = set()
    out = []
    for conf in _exact_pairs(grid, i) + _parity_subsets(grid, delta, i):
        if any(r not in window for r, _ in conf.gamma):
            continue
        if conf.norm1 > cap_n:
            continue
        if conf.gamma in seen:
            continue
        seen.add(conf.gamma)
        out.append(conf)
    out.sort(key=lambda c: c.gamma)
    for conf in out:
        validate_configuration(conf, grid, delta)
    return tuple(out)


# ---------------------------------------------------------------------------
# The MILP.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConfigMilp:
    """The assembled feasibility program plus the variable layout."""

    ri: RoundedInstance
    variables: tuple[tuple[int, Configuration], ...]  # column order, integral first
    n_int: int
    milp: Milp

    def solution_dict(self, sol: MilpSolution) -> dict[tuple[int, Configuration], Fraction]:
        values = tuple(Fraction(v) for v in sol.x) + tuple(sol.y)
        return {
            var: values[pos] for pos, var in enumerate(self.variables) if values[pos]
        }

    def default_box(self) -> tuple[int, ...]:
        """Safe branch-and-bound box: a speed never hosts more configurations
        than its machine count plus one virtual machine per job and level."""
        n_jobs = sum(self.ri.eta)
        cap = self.ri.tau * max(1, n_jobs)
        return tuple(
            self.ri.mu[i - 1] + cap for (i, _) in self.variables[: self.n_int]
        )


def build_recursive_milp(ri: RoundedInstance) -> ConfigMilp:
    """Rows per grid index i: configuration count at i minus mu_i equals the
    stand-in jobs of size b_i placed anywhere minus eta_i (an equality), and
    the configuration count covers mu_i (the packing inequality).  Variables
    for the fastest big_l speeds are integral."""
    grid = ri.grid
    confs = {i: build_configurations(ri, i) for i in range(1, grid.tau + 1)}
    int_vars = [(i, c) for i in range(1, grid.tau + 1) if i <= grid.big_l for c in confs[i]]
    cont_vars = [(i, c) for i in range(1, grid.tau + 1) if i > grid.big_l for c in confs[i]]
    variables = tuple(int_vars + cont_vars)
    n_int = len(int_vars)
    col_of = {var: pos for pos, var in enumerate(variables)}

    n_cols = len(variables)
    rows, senses, rhs = [], [], []
    for r in range(1, grid.tau + 1):
        eq = [0] * n_cols
        pack = [0] * n_cols
        for (i, conf), pos in col_of.items():
            coeff = 0
            if i == r:
                coeff += 1
                pack[pos] = 1
            coeff -= conf.mult(r)
            if coeff:
                eq[pos] = coeff
        rows.append(tuple(eq))
        senses.append("=")
        rhs.append(ri.mu[r - 1] - ri.eta[r - 1])
        rows.append(tuple(pack))
        senses.append(">=")
        rhs.append(ri.mu[r - 1])
    milp = Milp.from_rows(rows, senses, rhs, n_int=n_int)
    return ConfigMilp(ri=ri, variables=variables, n_int=n_int, milp=milp)


def check_config_solution(
    ri: RoundedInstance, x: Mapping[tuple[int, Configuration], Fraction]
) -> None:
    """Exact re-substitution of the coupling rows, without materializing the
    constraint matrix; raises on any violation."""
    grid, delta = ri.grid, ri.delta
    count = [Fraction(0)] * (grid.tau + 1)
    placed = [Fraction(0)] * (grid.tau + 1)
    for (i, conf), v in x.items():
        v = Fraction(v)
        if v < 0:
            raise ValueError("negative configuration count")
        if not v:
            continue
        validate_configuration(conf, grid, delta)
        if conf.owner_speed != i:
            raise ValueError("key speed does not match configuration owner")
        if i <= grid.big_l and v.denominator != 1:
            raise ValueError(f"variable at integral speed {i} is fractional")
        count[i] += v
        for r, c in conf.gamma:
            placed[r] += c * v
    for r in range(1, grid.tau + 1):
        lhs = count[r] - ri.mu[r - 1]
        rhs = placed[r] - ri.eta[r - 1]
        if lhs != rhs:
            raise ValueError(f"virtual-machine balance broken at index {r}: {lhs} != {rhs}")
        if lhs < 0:
            raise ValueError(f"machines at index {r} under-covered: {lhs}")


def project_to_vertex(
    cm: ConfigMilp, x: Mapping[tuple[int, Configuration], Fraction]
) -> dict[tuple[int, Configuration], Fraction]:
    """Replace the fractional block by a vertex of the restricted LP, keeping
    the integral block fixed; afterwards few variables are fractional."""
    x_int = [int(x.get(var, 0)) for var in cm.variables[: cm.n_int]]
    sub = fix_integer_part(cm.milp, x_int)
    vertex = solve_lp_vertex(sub)
    out: dict[tuple[int, Configuration], Fraction] = {}
    for pos, var in enumerate(cm.variables):
        v = Fraction(x_int[pos]) if pos < cm.n_int else vertex.y[pos - cm.n_int]
        if v:
            out[var] = v
    return out


# ---------------------------------------------------------------------------
# Witness construction: schedule -> solution.
# ---------------------------------------------------------------------------


def _index_of_value(grid: Grid, value: Fraction) -> int:
    r = grid.round_up(value)
    if grid.b(r) != value:
        raise AssertionError(f"{value} is not a grid value")
    return r


def _merge_pass(grid: Grid, pool: dict[int, int], x, bump):
    """Merge same-group same-parity jobs pairwise, bottom level first; exact
    sums land one level up.  Afterwards each (group, parity) holds at most
    one job."""
    for k in range(grid.kappa - 1, 0, -1):
        for parity in (0, 1):
            while True:
                idxs = [r for r in grid.group(k) if r % 2 == parity and pool.get(r, 0) > 0]
                if not idxs:
                    break
                merged = False
                # Equal pairs first (largest index = smallest value).
                for r in sorted(idxs, reverse=True):
                    c = pool[r]
                    if c >= 2:
                        v = _index_of_value(grid, 2 * grid.b(r))
                        pairs = c // 2
                        bump(x, Configuration(owner_speed=v, gamma=((r, 2),)), pairs)
                        pool[r] = c - 2 * pairs
                        pool[v] = pool.get(v, 0) + pairs
                        merged = True
                        break
                else:
                    singles = [r for r in sorted(idxs, reverse=True) if pool[r] == 1]
                    if len(singles) >= 2:
                        r1, r2 = singles[0], singles[1]
                        v = _index_of_value(grid, grid.b(r1) + grid.b(r2))
                        bump(x, Configuration(owner_speed=v, gamma=((r2, 1), (r1, 1))), 1)
                        pool[r1] -= 1
                        pool[r2] -= 1
                        pool[v] = pool.get(v, 0) + 1
                        merged = True
                if not merged:
                    break


def _bump(x, conf: Configuration, count: int):
    if count:
        x[(conf.owner_speed, conf)] = x.get((conf.owner_speed, conf), 0) + count


def _witness_for_machine(
    grid: Grid, delta: Fraction, mach_r: int, jobs: Mapping[int, int], x
) -> None:
    """Turn one machine's job multiset into configurations: merge exact pairs,
    ladder leftover short jobs upward on stand-in machines, finish with the
    machine's own long-window configuration."""
    pool = {r: c for r, c in jobs.items() if c}
    h_bound = delta * grid.b(mach_r)

    for _ in range(100_000):
        _merge_pass(grid, pool, x, _bump)
        below = [r for r, c in pool.items() if c > 0 and grid.b(r) <= h_bound]
        if not below:
            break
        g = max(below)  # smallest value below the window
        v = g - 1
        if v < 1:
            raise WitnessError("short job cannot ladder above the top of the grid")
        cap = grid.b(v)
        tower = [g]
        total = grid.b(g)
        used = {(grp, g % 2) for grp in _groups_of(grid, g)}
        for r in sorted((r for r in below if r != g and pool.get(r, 0) > 0), reverse=True):
            if r <= v:
                continue
            value = grid.b(r)
            if total + value > cap or value <= delta * cap:
                continue
            slots = [(grp, r % 2) for grp in _groups_of(grid, r)]
            if any(s in used for s in slots):
                continue
            if len(tower) + 1 > norm_cap(delta):
                break
            tower.append(r)
            used.update(slots)
            total += value
        conf = Configuration(owner_speed=v, gamma=tuple((r, 1) for r in tower))
        validate_configuration(conf, grid, delta)
        _bump(x, conf, 1)
        for r in tower:
            pool[r] -= 1
        pool[v] = pool.get(v, 0) + 1
    else:
        raise WitnessError("laddering did not settle")

    final = tuple((r, c) for r, c in sorted(pool.items()) if c)
    conf = Configuration(owner_speed=mach_r, gamma=final)
    total = conf.dot_b(grid)
    if total > grid.b(mach_r):
        raise WitnessError(
            f"final configuration load {total} exceeds speed {grid.b(mach_r)}"
        )
    try:
        validate_configuration(conf, grid, delta)
    except ValueError as exc:
        raise WitnessError(str(exc)) from exc
    _bump(x, conf, 1)


def schedule_to_solution(
    machine_jobs: Sequence[tuple[int, Mapping[int, int]]], ri: RoundedInstance
) -> dict[tuple[int, Configuration], Fraction]:
    """Build a feasible solution of the configuration MILP from a concrete
    schedule, given per real machine its grid speed index and the grid job
    multiset it hosts.  The result is verified exactly before it is returned.
    """
    x: dict = {}
    for mach_r, jobs in machine_jobs:
        _witness_for_machine(ri.grid, ri.delta, mach_r, jobs, x)
    out = {key: Fraction(v) for key, v in x.items()}
    check_config_solution(ri, out)
    return out


def machine_jobs_from_schedule(
    ri: RoundedInstance, assignment: Mapping[int, int]
) -> list[tuple[int, dict[int, int]]]:
    """Helper for tests: map {source job-group member position} is not needed;
    assignment maps original job index -> original machine index over the
    *source* compressed instance (members must be present)."""
    comp = ri.source
    job_of: dict[int, int] = {}
    for gi, group in enumerate(comp.job_groups):
        if not group.parts:
            raise ValueError("source instance has no provenance parts")
        for member in group.members:
            job_of[member] = ri.job_grid[gi]
    machines: list[tuple[int, dict[int, int]]] = []
    mach_of: dict[int, int] = {}
    for gi, group in enumerate(comp.machine_groups):
        if not group.parts:
            raise ValueError("source instance has no provenance parts")
        for member in group.members:
            mach_of[member] = len(machines)
            machines.append((ri.machine_grid[gi], {}))
    for job, mach in assignment.items():
        r = job_of[job]
        jobs = machines[mach_of[mach]][1]
        jobs[r] = jobs.get(r, 0) + 1
    return machines


# ---------------------------------------------------------------------------
# Extraction: solution -> placement.
# ---------------------------------------------------------------------------

FASTEST = ("fastest",)


@dataclass
class Placement:
    """Grid-level outcome of an extraction: for every grid job size, the
    ordered (machine, count) fills; machines are (grid index, ordinal) among
    that speed's real machines, with the designated fastest machine absorbing
    rounding overflow."""

    ri: RoundedInstance
    fills: dict[int, list[tuple[tuple, int]]]
    extra_on_fastest: int
    fastest_key: tuple

    def machine_keys(self) -> list[tuple]:
        out = []
        for r in range(1, self.ri.tau + 1):
            for o in range(self.ri.mu[r - 1]):
                out.append((r, o))
        return out

    def grid_loads(self) -> dict[tuple, Fraction]:
        loads: dict[tuple, Fraction] = {k: _F0 for k in self.machine_keys()}
        for j, entries in sorted(self.fills.items()):
            for key, count in entries:
                loads[key] = loads.get(key, _F0) + count * self.ri.grid.b(j)
        return loads

    def assigned_total(self) -> int:
        return sum(c for entries in self.fills.values() for _, c in entries)


def _fastest_key(ri: RoundedInstance) -> tuple:
    for r in range(1, ri.tau + 1):
        if ri.mu[r - 1]:
            return (r, 0)
    raise ExtractionError("instance has no machines")


def assign_confs_to_machines(
    x: Mapping[tuple[int, Configuration], Fraction], ri: RoundedInstance
) -> Placement:
    """Realize a feasible solution as an assignment of configurations to
    machines: floor copies go to machines of their own speed, every fractional
    variable sends one extra copy to the designated fastest machine, real jobs
    fill slots in descending speed order, and unfilled slots spawn stand-in
    machines that host later configurations.

    The input's fractional part should already be a vertex of the restricted
    LP so that few variables are fractional.
    """
    grid = ri.grid
    eta_rem = list(ri.eta)
    fastest = _fastest_key(ri)

    # Expand instances: (speed, conf, hosted_on_fastest).
    per_speed: dict[int, list[tuple[Configuration, bool]]] = {}
    extra_count = 0
    for (i, conf), v in sorted(x.items(), key=lambda kv: (kv[0][0], kv[0][1].gamma)):
        v = Fraction(v)
        if v < 0:
            raise ExtractionError("negative value")
        whole = v.numerator // v.denominator
        lst = per_speed.setdefault(i, [])
        lst.extend((conf, False) for _ in range(whole))
        if v.denominator != 1:
            lst.append((conf, True))
            extra_count += 1

    fills: dict[int, list[tuple[tuple, int]]] = {}
    parents: dict[int, object] = {}  # instance id -> machine key or instance id
    tokens: dict[int, list[int]] = {}  # grid size -> parent instance ids with a free slot
    fill_log: list[tuple[int, int, int]] = []  # (instance id, grid j, count)
    next_id = 0

    def place(conf: Configuration, host) -> None:
        nonlocal next_id
        inst = next_id
        next_id += 1
        parents[inst] = host
        for j, c in conf.gamma:
            take = min(c, eta_rem[j - 1])
            if take:
                eta_rem[j - 1] -= take
                fill_log.append((inst, j, take))
            for _ in range(c - take):
                tokens.setdefault(j, []).append(inst)

    for r in range(1, grid.tau + 1):
        real_pool = [(r, o) for o in range(ri.mu[r - 1])]
        pending = per_speed.get(r, [])
        while pending:
            rest = []
            progressed = False
            for conf, on_fastest in pending:
                if on_fastest:
                    place(conf, fastest)
                elif real_pool:
                    place(conf, real_pool.pop(0))
                elif tokens.get(r):
                    place(conf, tokens[r].pop(0))
                else:
                    rest.append((conf, on_fastest))
                    continue
                progressed = True
            if rest and not progressed:
                raise ExtractionError(
                    f"no host for a configuration at speed index {r}; "
                    "stand-in cycle or count mismatch"
                )
            pending = rest

    if any(eta_rem):
        raise ExtractionError(f"jobs left unplaced: {eta_rem}")

    def root_of(inst: int) -> tuple:
        seen = set()
        node: object = inst
        while isinstance(node, int):
            if node in seen:
                raise ExtractionError("stand-in cycle detected")
            seen.add(node)
            node = parents[node]
        return node  # a machine key

    for inst, j, count in fill_log:
        fills.setdefault(j, []).append((root_of(inst), count))

    return Placement(ri=ri, fills=fills, extra_on_fastest=extra_count, fastest_key=fastest)
