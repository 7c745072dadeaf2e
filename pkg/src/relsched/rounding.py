"""Instance preprocessing: trimming negligible items, prerounding to powers
of (1+delta), the exponential-plus-linear rounding grid, and the makespan
binary search.

Grid values are exact rationals; the pair identity
``b(k,l) + b(k,l') = b(k-1, (l+l')/2)`` (for l+l' even) must hold exactly
because configuration merging relies on it.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

_EXPANSION_CAP = 1_000_000


@dataclass(frozen=True)
class Instance:
    """Plain encoding: one entry per job/machine, values sorted ascending."""

    jobs: tuple[int, ...]
    machines: tuple[int, ...]

    def __post_init__(self):
        jobs = tuple(sorted(int(p) for p in self.jobs))
        machines = tuple(sorted(int(s) for s in self.machines))
        if not jobs or not machines:
            raise ValueError("need at least one job and one machine")
        if jobs[0] < 1 or machines[0] < 1:
            raise ValueError("processing times and speeds must be >= 1")
        object.__setattr__(self, "jobs", jobs)
        object.__setattr__(self, "machines", machines)

    @property
    def n_jobs(self) -> int:
        return len(self.jobs)

    @property
    def n_machines(self) -> int:
        return len(self.machines)

    def to_compressed(self) -> "CompressedInstance":
        return CompressedInstance(
            job_groups=_group_values(self.jobs),
            machine_groups=_group_values(self.machines),
        )

    @staticmethod
    def from_json_obj(obj) -> "Instance":
        jobs = _expand_entries(obj["jobs"], "p")
        machines = _expand_entries(obj["machines"], "s")
        return Instance(jobs=tuple(jobs), machines=tuple(machines))

    def to_json_obj(self):
        return {"jobs": list(self.jobs), "machines": list(self.machines)}


def _expand_entries(entries, key) -> list[int]:
    out = []
    for e in entries:
        if isinstance(e, dict):
            value, count = int(e[key]), int(e.get("count", 1))
        else:
            value, count = int(e), 1
        if count < 0:
            raise ValueError("negative count")
        out.extend([value] * count)
        if len(out) > _EXPANSION_CAP:
            raise ValueError(
                f"plain encoding would exceed {_EXPANSION_CAP} items; use the hm commands"
            )
    return out


@dataclass(frozen=True)
class Part:
    """Provenance atom inside a group: a source item or class and its count.

    ``ref`` is an original job/machine index for plain encodings and a class
    index for high-multiplicity ones; ``value`` is the original (pre-rounding)
    value, kept so extraction can order draws by true size.
    """

    ref: int
    count: int
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))
        if self.count < 1:
            raise ValueError("empty part")


@dataclass(frozen=True)
class ValueGroup:
    """A run of equal (possibly rounded) values with provenance parts."""

    value: Fraction
    count: int
    parts: tuple[Part, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))
        if self.count < 1:
            raise ValueError("empty group")
        if self.parts and sum(p.count for p in self.parts) != self.count:
            raise ValueError("parts do not add up to count")

    @property
    def members(self) -> tuple[int, ...]:
        """Original indices, for plain-encoding groups (unit-count parts)."""
        out = []
        for p in self.parts:
            out.extend([p.ref] * p.count)
        return tuple(out)


def _group_values(values: Sequence[int]) -> tuple[ValueGroup, ...]:
    groups: dict[Fraction, list[Part]] = {}
    for idx, v in enumerate(values):
        groups.setdefault(Fraction(v), []).append(Part(ref=idx, count=1, value=Fraction(v)))
    return tuple(
        ValueGroup(value=v, count=len(parts), parts=tuple(parts))
        for v, parts in sorted(groups.items())
    )


@dataclass(frozen=True)
class CompressedInstance:
    """(value, count) encoding, groups sorted ascending by value."""

    job_groups: tuple[ValueGroup, ...]
    machine_groups: tuple[ValueGroup, ...]

    def __post_init__(self):
        for groups in (self.job_groups, self.machine_groups):
            if not groups:
                raise ValueError("need at least one job and one machine group")
            for a, b in zip(groups, groups[1:]):
                if a.value >= b.value:
                    raise ValueError("groups must be strictly ascending by value")

    @property
    def n_jobs(self) -> int:
        return sum(g.count for g in self.job_groups)

    @property
    def n_machines(self) -> int:
        return sum(g.count for g in self.machine_groups)

    @property
    def p_max(self) -> Fraction:
        return self.job_groups[-1].value

    @property
    def p_min(self) -> Fraction:
        return self.job_groups[0].value

    @property
    def s_max(self) -> Fraction:
        return self.machine_groups[-1].value

    @property
    def s_min(self) -> Fraction:
        return self.machine_groups[0].value


@dataclass(frozen=True)
class TrimRecord:
    """What trimming removed, so schedule emission can replay it: removed
    jobs go onto a fastest machine, removed machines receive nothing."""

    removed_jobs: tuple[ValueGroup, ...]
    removed_machines: tuple[ValueGroup, ...]


def trim_negligible(
    comp: CompressedInstance, delta: Fraction
) -> tuple[CompressedInstance, TrimRecord]:
    """Drop machines slower than delta*s_max/N and jobs shorter than
    delta*p_max/N (strictly below the thresholds), after first dropping the
    M - N slowest machines whenever M > N.

    Afterwards p_max/p_min and s_max/s_min are at most N/delta.
    """
    delta = Fraction(delta)
    n = comp.n_jobs
    machine_groups = list(comp.machine_groups)

    removed_machines: list[ValueGroup] = []
    surplus = comp.n_machines - n
    while surplus > 0:
        g = machine_groups[0]
        take = min(surplus, g.count)
        removed_machines.append(_take_from_group(g, take))
        rest = _drop_from_group(g, take)
        if rest is None:
            machine_groups.pop(0)
        else:
            machine_groups[0] = rest
        surplus -= take

    s_threshold = delta * machine_groups[-1].value / n
    kept_m = [g for g in machine_groups if g.value >= s_threshold]
    removed_machines.extend(g for g in machine_groups if g.value < s_threshold)

    p_threshold = delta * comp.p_max / n
    kept_j = [g for g in comp.job_groups if g.value >= p_threshold]
    removed_jobs = [g for g in comp.job_groups if g.value < p_threshold]
    if not kept_j:
        raise ValueError("trimming removed every job")
    if not kept_m:
        raise ValueError("trimming removed every machine")

    trimmed = CompressedInstance(job_groups=tuple(kept_j), machine_groups=tuple(kept_m))
    return trimmed, TrimRecord(
        removed_jobs=tuple(removed_jobs), removed_machines=tuple(removed_machines)
    )


def _split_parts(parts: tuple[Part, ...], k: int) -> tuple[tuple[Part, ...], tuple[Part, ...]]:
    head, tail = [], []
    for p in parts:
        if k >= p.count:
            head.append(p)
            k -= p.count
        elif k > 0:
            head.append(Part(ref=p.ref, count=k, value=p.value))
            tail.append(Part(ref=p.ref, count=p.count - k, value=p.value))
            k = 0
        else:
            tail.append(p)
    return tuple(head), tuple(tail)


def _take_from_group(g: ValueGroup, k: int) -> ValueGroup:
    head, _ = _split_parts(g.parts, k)
    return ValueGroup(value=g.value, count=k, parts=head)


def _drop_from_group(g: ValueGroup, k: int) -> ValueGroup | None:
    if k >= g.count:
        return None
    _, tail = _split_parts(g.parts, k)
    return ValueGroup(value=g.value, count=g.count - k, parts=tail)


def power_floor(value: Fraction, base: Fraction) -> Fraction:
    """Largest integer power of ``base`` (> 1) not exceeding ``value`` >= 1."""
    if value < 1:
        raise ValueError("value must be >= 1")
    pw = Fraction(1)
    nxt = base
    while nxt <= value:
        pw = nxt
        nxt *= base
    return pw


def preround(comp: CompressedInstance, delta: Fraction) -> CompressedInstance:
    """Round every value down to an integer power of (1+delta), merging
    groups that collide; exact powers are fixed points."""
    base = 1 + Fraction(delta)

    def rounded(groups):
        merged: dict[Fraction, list[ValueGroup]] = {}
        for g in groups:
            merged.setdefault(power_floor(g.value, base), []).append(g)
        out = []
        for value, gs in sorted(merged.items()):
            count = sum(g.count for g in gs)
            parts = tuple(p for g in gs for p in g.parts)
            out.append(ValueGroup(value=value, count=count, parts=parts))
        return tuple(out)

    return CompressedInstance(
        job_groups=rounded(comp.job_groups),
        machine_groups=rounded(comp.machine_groups),
    )


# ---------------------------------------------------------------------------
# The rounding grid.
# ---------------------------------------------------------------------------


def _ceil_log2_fraction(x: Fraction) -> int:
    """Smallest k with 2^k >= x, exact (x > 0)."""
    k = 0
    while Fraction(2) ** k < x:
        k += 1
    while k > 0 and Fraction(2) ** (k - 1) >= x:
        k -= 1
    return k


@dataclass(frozen=True)
class Grid:
    """Descending values b(k,l) = (1 - l/(2*lam)) * s_max * 2^-k, re-indexed
    as b_r = values[r-1] for r = 1..tau with k = (r-1)//lam, l = (r-1)%lam.

    Consecutive ratios are at most (1+delta) and two same-parity values of a
    level sum exactly to a value one level up.
    """

    delta: Fraction
    s_max: Fraction
    n_jobs: int
    kappa: int
    lam: int
    tau: int
    big_l: int
    values: tuple[Fraction, ...]

    @staticmethod
    def build(delta: Fraction, s_max: Fraction, n_jobs: int) -> "Grid":
        delta = Fraction(delta)
        s_max = Fraction(s_max)
        if not 0 < delta <= 1:
            raise ValueError("delta must lie in (0, 1]")
        if s_max <= 0 or n_jobs < 1:
            raise ValueError("need positive s_max and at least one job")
        kappa = _ceil_log2_fraction(n_jobs**2 / delta)
        kappa = max(kappa, 1)
        lam = math.ceil(1 / delta)
        inv = 1.0 / float(delta)
        arg = inv**3 * math.log2(inv) if inv > 1 else 0.0
        big_l = 0 if arg <= 1.0 else lam * max(0, math.ceil(math.log2(arg) - 1e-12))
        values = []
        for k in range(kappa):
            scale = s_max * Fraction(1, 2**k)
            for l in range(lam):
                values.append((1 - Fraction(l, 2 * lam)) * scale)
        return Grid(
            delta=delta,
            s_max=s_max,
            n_jobs=n_jobs,
            kappa=kappa,
            lam=lam,
            tau=kappa * lam,
            big_l=big_l,
            values=tuple(values),
        )

    def b(self, r: int) -> Fraction:
        """Value of grid index r (1-based)."""
        return self.values[r - 1]

    def b_kl(self, k: int, l: int) -> Fraction:
        """The defining formula, valid for any k and 0 <= l <= 2*lam."""
        return (1 - Fraction(l, 2 * self.lam)) * self.s_max * Fraction(1, 2**k)

    @property
    def floor_value(self) -> Fraction:
        """One step below the last grid value: s_max * 2^-kappa."""
        return self.s_max * Fraction(1, 2**self.kappa)

    def level(self, r: int) -> int:
        return (r - 1) // self.lam

    def ell(self, r: int) -> int:
        return (r - 1) % self.lam

    def group(self, k: int) -> range:
        """G_k: indices whose value lies in [b(k+1,0), b(k,0)], boundary shared."""
        lo = k * self.lam + 1
        hi = min((k + 1) * self.lam + 1, self.tau)
        return range(lo, hi + 1)

    def group_count(self) -> int:
        return self.kappa

    def long_window(self, i: int) -> range:
        """H_i: indices j with b_j in (delta * b_i, b_i]."""
        bound = self.delta * self.b(i)
        j = i
        while j + 1 <= self.tau and self.b(j + 1) > bound:
            j += 1
        return range(i, j + 1)

    def round_up(self, value: Fraction) -> int:
        """Largest index r with b_r >= value (values rounds up on the grid).

        Accepts values in [s_max * 2^-kappa, s_max]; anything outside the
        covered interval is a contract violation upstream.
        """
        if value > self.values[0] or value < self.floor_value:
            raise ValueError(f"value {value} outside the covered interval")
        # values are descending; search on the reversed (ascending) view.
        asc = self._ascending()
        pos = bisect_left(asc, value)
        if pos == len(asc):
            pos -= 1
        r = self.tau - pos
        if r < 1:
            r = 1
        while self.b(r) < value:
            r -= 1
        while r + 1 <= self.tau and self.b(r + 1) >= value:
            r += 1
        return r

    def _ascending(self):
        cached = getattr(self, "_asc_cache", None)
        if cached is None:
            cached = tuple(reversed(self.values))
            object.__setattr__(self, "_asc_cache", cached)
        return cached


@dataclass(frozen=True)
class RoundedInstance:
    """A compressed instance snapped onto a grid for one makespan guess.

    Processing times are scaled by 1/T before rounding, so a schedule is
    in-budget exactly when every machine's grid load fits its grid speed.
    """

    grid: Grid
    delta: Fraction
    guess: Fraction
    source: CompressedInstance
    job_grid: tuple[int, ...]
    machine_grid: tuple[int, ...]
    mu: tuple[int, ...]
    eta: tuple[int, ...]

    @property
    def tau(self) -> int:
        return self.grid.tau

    def machine_groups_at(self, r: int) -> list[int]:
        return [gi for gi, rr in enumerate(self.machine_grid) if rr == r]

    def job_groups_at(self, r: int) -> list[int]:
        return [gi for gi, rr in enumerate(self.job_grid) if rr == r]


def round_to_grid(comp: CompressedInstance, delta: Fraction, guess: Fraction) -> RoundedInstance:
    """Scale processing times by 1/T, round them and the machine speeds up to
    the nearest grid value, and count multiplicities per grid index."""
    delta = Fraction(delta)
    guess = Fraction(guess)
    grid = Grid.build(delta, comp.s_max, comp.n_jobs)
    mu = [0] * grid.tau
    eta = [0] * grid.tau
    machine_grid = []
    for g in comp.machine_groups:
        r = grid.round_up(g.value)
        machine_grid.append(r)
        mu[r - 1] += g.count
    job_grid = []
    for g in comp.job_groups:
        r = grid.round_up(g.value / guess)
        job_grid.append(r)
        eta[r - 1] += g.count
    return RoundedInstance(
        grid=grid,
        delta=delta,
        guess=guess,
        source=comp,
        job_grid=tuple(job_grid),
        machine_grid=tuple(machine_grid),
        mu=tuple(mu),
        eta=tuple(eta),
    )


# ---------------------------------------------------------------------------
# Makespan binary search.
# ---------------------------------------------------------------------------


def makespan_search(
    comp: CompressedInstance,
    delta: Fraction,
    feasibility_probe: Callable[[Fraction], object | None],
    extra_steps: int = 64,
):
    """Binary search the smallest feasible guess over powers of (1+delta).

    Candidates are p_max/s_max * (1+delta)^g covering an interval of ratio
    N (all jobs on a fastest machine are always schedulable at the top).
    The probe returns a schedule-like object or None for infeasible-at-T and
    must be monotone in T.  Because grid rounding needs a little slack, the
    ladder is extended above the classic upper endpoint by bounded steps
    until the probe first succeeds.
    """
    delta = Fraction(delta)
    base = 1 + delta
    lower = comp.p_max / comp.s_max
    n = comp.n_jobs

    steps = 0
    pw = Fraction(1)
    while pw < n:
        pw *= base
        steps += 1

    cache: dict[int, object | None] = {}

    def probe(g: int):
        if g not in cache:
            cache[g] = feasibility_probe(lower * base**g)
        return cache[g]

    hi = steps
    tried = 0
    while probe(hi) is None:
        hi += 1
        tried += 1
        if tried > extra_steps:
            raise RuntimeError("no feasible makespan guess found; probe broken")

    lo = 0
    while lo < hi:
        mid = (lo + hi) // 2
        if probe(mid) is None:
            lo = mid + 1
        else:
            hi = mid
    return lower * base**lo, probe(lo)
