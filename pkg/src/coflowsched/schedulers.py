"""The four scheduling policies.

* lp_ov_ls        -- LP-ordered list scheduling (offline; also the online
                     re-solving variant lp_ov_ls_online).
* varys           -- smallest-effective-bottleneck-first with rates chosen
                     so all flows of a coflow finish together.
* lp_ov_gb        -- LP ordering, geometric grouping, fluid rates per
                     aggregated group with backfilling.
* lp_ii_gb        -- interval-indexed LP ordering, grouping, and slotted
                     execution of each group via Birkhoff-von Neumann
                     matchings with backfilling.

All schedulers emit a Schedule of piecewise-constant rate segments that
passes the sim-module validator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import CoflowInstance, FlowKey, residual_instance
from .relaxations import solve_interval_lp, solve_ordering_lp
from .sim import EVENT_EPS, FluidRun, run_fluid

_EPS = 1e-9


@dataclass
class Segment:
    """Constant rate assignment over [start, end)."""

    start: float
    end: float
    rates: dict

    @property
    def length(self) -> float:
        return self.end - self.start


@dataclass
class Schedule:
    """Piecewise-constant rates plus per-flow and per-coflow completions."""

    segments: list
    completions: np.ndarray
    flow_completions: dict

    def to_dict(self) -> dict:
        return {
            "segments": [
                {
                    "start": seg.start,
                    "end": seg.end,
                    "rates": [
                        {"src": f.source, "dst": f.dest, "coflow": f.coflow, "rate": r}
                        for f, r in sorted(seg.rates.items())
                    ],
                }
                for seg in self.segments
            ],
            "completions": list(map(float, self.completions)),
            "flow_completions": [
                {"src": f.source, "dst": f.dest, "coflow": f.coflow, "time": t}
                for f, t in sorted(self.flow_completions.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Schedule":
        segments = [
            Segment(
                seg["start"],
                seg["end"],
                {
                    FlowKey(r["src"], r["dst"], r["coflow"]): r["rate"]
                    for r in seg["rates"]
                },
            )
            for seg in data["segments"]
        ]
        completions = np.array(data["completions"], dtype=float)
        flow_completions = {
            FlowKey(e["src"], e["dst"], e["coflow"]): e["time"]
            for e in data["flow_completions"]
        }
        return cls(segments, completions, flow_completions)


@dataclass
class GroupPartition:
    """Coflow ids grouped by the geometric interval of the cumulative
    bottleneck load along the LP ordering."""

    groups: list
    boundaries: list


def _schedule_from_run(run: FluidRun) -> Schedule:
    return Schedule(
        segments=[Segment(a, b, rates) for a, b, rates in run.segments],
        completions=run.coflow_completions.copy(),
        flow_completions=dict(run.flow_completions),
    )


def _ordering_of(instance: CoflowInstance, ordering_result) -> list:
    if ordering_result is None:
        ordering_result = solve_ordering_lp(instance)
    return list(getattr(ordering_result, "ordering", ordering_result))


# ---------------------------------------------------------------------------
# LP-ordered list scheduling
# ---------------------------------------------------------------------------

def lp_ov_ls(instance: CoflowInstance, ordering_result=None) -> Schedule:
    """Order coflows by the precedence LP, then list-schedule their flows.

    At every event the released incomplete flows are scanned in priority
    order (LP rank, then source id, then dest id) and a flow starts at full
    link rate whenever both of its ports are still free, so every segment
    is a partial matching of the switch.
    """
    ordering = _ordering_of(instance, ordering_result)
    pos = {k: p for p, k in enumerate(ordering)}
    cap = instance.capacity

    def policy(run: FluidRun) -> dict:
        return _list_schedule_rates(run, cap, lambda f: (0, pos[f.coflow], f.source, f.dest))

    return _schedule_from_run(run_fluid(instance, policy))


def _list_schedule_rates(run: FluidRun, cap: float, sort_key) -> dict:
    used_src: set[int] = set()
    used_dst: set[int] = set()
    rates = {}
    for f in sorted(run.active_flows(), key=sort_key):
        if f.source not in used_src and f.dest not in used_dst:
            rates[f] = cap
            used_src.add(f.source)
            used_dst.add(f.dest)
    return rates


def lp_ov_ls_online(instance: CoflowInstance, resolve_period="on-arrival") -> Schedule:
    """List scheduling with the ordering recomputed online.

    In "on-arrival" mode the precedence LP is re-solved over the remaining
    demands of the released coflows at every arrival; with a numeric
    ``resolve_period`` it is re-solved on that fixed cadence instead, and
    coflows arriving between re-solves queue behind the ordered ones until
    the next re-solve picks them up.
    """
    on_arrival = resolve_period == "on-arrival"
    if not on_arrival:
        period = float(resolve_period)
        if not period > 0:
            raise ValueError("resolve_period must be positive or 'on-arrival'")
    cap = instance.capacity
    run = FluidRun(instance)
    pos: dict[int, int] = {}
    seen: set[int] = set()
    next_resolve = 0.0

    def resolve(now: float) -> None:
        active = {
            key: run.remaining[key]
            for k in run.active_coflows()
            for key in run.incomplete_flows(k)
        }
        if not active:
            return
        residual, ids = residual_instance(instance, active, now)
        result = solve_ordering_lp(residual)
        pos.clear()
        pos.update({ids[k]: p for p, k in enumerate(result.ordering)})

    def sort_key(f: FlowKey):
        if f.coflow in pos:
            return (0, pos[f.coflow], 0.0, f.coflow, f.source, f.dest)
        release = instance.coflows[f.coflow].release
        return (1, 0, release, f.coflow, f.source, f.dest)

    while not run.done():
        if on_arrival:
            active_now = set(run.active_coflows())
            if active_now - seen:
                resolve(run.time)
                seen = active_now
        else:
            if run.time + EVENT_EPS >= next_resolve:
                resolve(run.time)
                while next_resolve <= run.time + EVENT_EPS:
                    next_resolve += period
        run.set_rates(_list_schedule_rates(run, cap, sort_key))
        limit = None if on_arrival else max(next_resolve - run.time, EVENT_EPS)
        run.step(max_dt=limit)
    return _schedule_from_run(run)


# ---------------------------------------------------------------------------
# Varys (smallest effective bottleneck first)
# ---------------------------------------------------------------------------

def _remaining_peak(run: FluidRun, k: int) -> float:
    src: dict[int, float] = {}
    dst: dict[int, float] = {}
    for (i, j), d in run.remaining_of(k).items():
        src[i] = src.get(i, 0.0) + d
        dst[j] = dst.get(j, 0.0) + d
    return max(max(src.values()), max(dst.values()))


def varys(instance: CoflowInstance) -> Schedule:
    """Smallest remaining bottleneck first, all flows of a coflow paced to
    finish together, leftover capacity handed down the priority list.

    A coflow whose rate would need an exhausted port is skipped until
    capacity frees up (its share would otherwise be unbounded).
    """
    cap = instance.capacity
    n = instance.n_ports

    def policy(run: FluidRun) -> dict:
        order = sorted(run.active_coflows(), key=lambda k: (_remaining_peak(run, k), k))
        rem_src = np.full(n, cap)
        rem_dst = np.full(n, cap)
        rates: dict[FlowKey, float] = {}
        paced: set[int] = set()
        for k in order:
            pairs = run.remaining_of(k)
            src_load: dict[int, float] = {}
            dst_load: dict[int, float] = {}
            for (i, j), d in pairs.items():
                src_load[i] = src_load.get(i, 0.0) + d
                dst_load[j] = dst_load.get(j, 0.0) + d
            gamma = 0.0
            blocked = False
            for i, load in src_load.items():
                if rem_src[i] <= _EPS:
                    blocked = True
                    break
                gamma = max(gamma, load / rem_src[i])
            if not blocked:
                for j, load in dst_load.items():
                    if rem_dst[j] <= _EPS:
                        blocked = True
                        break
                    gamma = max(gamma, load / rem_dst[j])
            if blocked:
                continue
            paced.add(k)
            for (i, j) in sorted(pairs):
                r = pairs[(i, j)] / gamma
                rates[FlowKey(i, j, k)] = r
                rem_src[i] = max(rem_src[i] - r, 0.0)
                rem_dst[j] = max(rem_dst[j] - r, 0.0)
        # leftover pass: source ports ascending, flows in list order; coflows
        # already paced to finish together keep their rates (extra speed on a
        # non-bottleneck flow would not move their completion anyway)
        for i in range(n):
            if rem_src[i] <= _EPS:
                continue
            for k in order:
                if k in paced:
                    continue
                for (ii, jj) in sorted(run.remaining_of(k)):
                    if ii != i:
                        continue
                    extra = min(rem_src[i], rem_dst[jj])
                    if extra <= _EPS:
                        continue
                    key = FlowKey(ii, jj, k)
                    rates[key] = rates.get(key, 0.0) + extra
                    rem_src[i] -= extra
                    rem_dst[jj] -= extra
        return rates

    return _schedule_from_run(run_fluid(instance, policy))


# ---------------------------------------------------------------------------
# grouping
# ---------------------------------------------------------------------------

def group_coflows(ordering_result, instance: CoflowInstance) -> GroupPartition:
    """Partition the LP-ordered coflows by the geometric interval
    (2^(m-1), 2^m] that contains the cumulative bottleneck load of the
    order prefix; consecutive coflows in the same interval share a group."""
    ordering = _ordering_of(instance, ordering_result)
    n = instance.n_ports
    src = np.zeros(n)
    dst = np.zeros(n)
    groups: list[list[int]] = []
    boundaries: list[float] = []
    prev_m: int | None = None
    for k in ordering:
        for (i, j), d in instance.coflows[k].demands.items():
            src[i] += d
            dst[j] += d
        peak = max(src.max(), dst.max())
        m = math.ceil(math.log2(peak) - 1e-12)
        if m == prev_m:
            groups[-1].append(k)
        else:
            groups.append([k])
            boundaries.append(2.0 ** m)
            prev_m = m
    return GroupPartition(groups=groups, boundaries=boundaries)


# ---------------------------------------------------------------------------
# LP ordering + grouping + fluid backfilling
# ---------------------------------------------------------------------------

def lp_ov_gb(instance: CoflowInstance, ordering_result=None) -> Schedule:
    """Fluid grouped scheduling: each group is aggregated into one demand
    matrix D served at rates D_ij / W(D), then leftover capacity is raised
    pair by pair, and pairs with no group demand are backfilled from
    later-ordered coflows on the same pair.

    Groups run one after another; within a group, a pair's rate always
    serves its earliest-ordered member first.
    """
    if ordering_result is None:
        ordering_result = solve_ordering_lp(instance)
    ordering = list(ordering_result.ordering)
    groups = group_coflows(ordering_result, instance).groups
    pos = {k: p for p, k in enumerate(ordering)}
    cap = instance.capacity
    n = instance.n_ports

    def policy(run: FluidRun) -> dict:
        gi = next(
            g for g, grp in enumerate(groups) if any(not run.is_complete(k) for k in grp)
        )
        members = [k for k in groups[gi] if not run.is_complete(k)]
        active_members = [k for k in members if run.released(k)]
        demand: dict[tuple[int, int], float] = {}
        server: dict[tuple[int, int], int] = {}
        for k in sorted(active_members, key=lambda k: pos[k]):
            for pair, d in run.remaining_of(k).items():
                demand[pair] = demand.get(pair, 0.0) + d
                server.setdefault(pair, k)
        rem_src = np.full(n, cap)
        rem_dst = np.full(n, cap)
        rates: dict[FlowKey, float] = {}

        def grant(pair: tuple[int, int], k: int, amount: float) -> None:
            key = FlowKey(pair[0], pair[1], k)
            rates[key] = rates.get(key, 0.0) + amount
            rem_src[pair[0]] = max(rem_src[pair[0]] - amount, 0.0)
            rem_dst[pair[1]] = max(rem_dst[pair[1]] - amount, 0.0)

        if demand:
            src_tot = np.zeros(n)
            dst_tot = np.zeros(n)
            for (i, j), d in demand.items():
                src_tot[i] += d
                dst_tot[j] += d
            finish = max(src_tot.max(), dst_tot.max()) / cap
            for pair in sorted(demand):
                grant(pair, server[pair], demand[pair] / finish)
            # raise the group's own pair rates until a port saturates
            for pair in sorted(demand):
                extra = min(rem_src[pair[0]], rem_dst[pair[1]])
                if extra > _EPS:
                    grant(pair, server[pair], extra)
        # backfill idle pairs from later-ordered released coflows
        last_pos = max(pos[k] for k in groups[gi])
        for k in ordering:
            if pos[k] <= last_pos or run.is_complete(k) or not run.released(k):
                continue
            for pair in sorted(run.remaining_of(k)):
                if pair in demand:
                    continue
                extra = min(rem_src[pair[0]], rem_dst[pair[1]])
                if extra > _EPS:
                    grant(pair, k, extra)
        return rates

    return _schedule_from_run(run_fluid(instance, policy))


# ---------------------------------------------------------------------------
# Birkhoff-von Neumann decomposition
# ---------------------------------------------------------------------------

def _perfect_matching(support: np.ndarray) -> np.ndarray:
    """Row -> column perfect matching on a boolean support matrix.

    Deterministic augmenting-path search (rows and columns ascending).
    The padded matrices handed to it always admit one; failure means the
    padding or the bookkeeping is broken.
    """
    n = support.shape[0]
    match_col = np.full(n, -1)  # column -> row

    def augment(row: int, visited: np.ndarray) -> bool:
        for col in range(n):
            if support[row, col] and not visited[col]:
                visited[col] = True
                if match_col[col] < 0 or augment(match_col[col], visited):
                    match_col[col] = row
                    return True
        return False

    for row in range(n):
        if not augment(row, np.zeros(n, dtype=bool)):
            raise RuntimeError("no perfect matching on support; invariant violated")
    perm = np.empty(n, dtype=int)
    for col, row in enumerate(match_col):
        perm[row] = col
    return perm


def _pad_to_equal_line_sums(matrix: np.ndarray):
    """Add nonnegative fill so every row and column sums to the max line sum."""
    n = matrix.shape[0]
    target = max(matrix.sum(axis=1).max(), matrix.sum(axis=0).max())
    padded = matrix.copy()
    row_deficit = target - padded.sum(axis=1)
    col_deficit = target - padded.sum(axis=0)
    for i in range(n):
        for j in range(n):
            add = min(row_deficit[i], col_deficit[j])
            if add > 0:
                padded[i, j] += add
                row_deficit[i] -= add
                col_deficit[j] -= add
    return padded, target


def bvn_decompose(matrix) -> list:
    """Decompose a nonnegative square matrix into weighted permutations.

    The matrix is padded to equal row/column sums and normalized by that
    sum, then permutations are peeled off the support with weight equal to
    the smallest entry along each matching.  Weights sum to one and
    reconstruct the normalized padded matrix.  Returns [(weight, perm)]
    with perm[i] = assigned column of row i.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if (m < 0).any():
        raise ValueError("matrix must be nonnegative")
    padded, target = _pad_to_equal_line_sums(m)
    if target <= 0:
        raise ValueError("matrix has no positive entries")
    tol = 1e-9 * max(1.0, target)
    out = []
    while padded.max() > tol:
        perm = _perfect_matching(padded > tol)
        weight = float(min(padded[i, perm[i]] for i in range(len(perm))))
        out.append((weight / target, perm))
        for i in range(len(perm)):
            padded[i, perm[i]] = max(padded[i, perm[i]] - weight, 0.0)
    return out


def _integer_bvn(matrix: np.ndarray) -> list:
    """Integer variant used by the slotted scheduler: returns
    [(slot_count, perm)] whose counts sum to the max line sum."""
    padded, _ = _pad_to_equal_line_sums(matrix.astype(np.int64))
    out = []
    while padded.any():
        perm = _perfect_matching(padded > 0)
        count = int(min(padded[i, perm[i]] for i in range(len(perm))))
        out.append((count, perm))
        for i in range(len(perm)):
            padded[i, perm[i]] -= count
    return out


# ---------------------------------------------------------------------------
# interval-indexed LP + grouping + slotted BvN execution
# ---------------------------------------------------------------------------

def lp_ii_gb(
    instance: CoflowInstance, time_unit: float = 1.0, ordering_result=None
) -> Schedule:
    """Slotted grouped scheduling driven by the interval-indexed LP.

    Time advances in slots of ``time_unit``; each slot executes one switch
    matching.  The active group's remaining demand matrix is decomposed
    into permutations (Birkhoff-von Neumann); a pair serves its
    earliest-ordered group member first, and pairs with no group demand
    are backfilled from later-ordered released coflows on the same pair.
    Demands must be integer multiples of capacity x time_unit.
    """
    cap = instance.capacity
    quantum = cap * time_unit
    units: dict[FlowKey, int] = {}
    for key, size in instance.flows():
        u = size / quantum
        if abs(u - round(u)) > 1e-9 * max(1.0, u) or round(u) <= 0:
            raise ValueError(
                f"flow {tuple(key)} size {size} is not a positive multiple of "
                f"capacity*time_unit = {quantum}; rescale time_unit"
            )
        units[key] = int(round(u))
    if ordering_result is None:
        ordering_result = solve_interval_lp(instance, time_unit)
    ordering = list(ordering_result.ordering)
    groups = group_coflows(ordering_result, instance).groups
    pos = {k: p for p, k in enumerate(ordering)}
    n = instance.n_ports
    release_slot = {
        k: math.ceil(cf.release / time_unit - 1e-9)
        for k, cf in enumerate(instance.coflows)
    }

    remaining = dict(units)
    flows_left = {k: {f for f in remaining if f.coflow == k} for k in range(instance.num_coflows)}
    flow_completions: dict[FlowKey, float] = {}
    segments: list[Segment] = []
    incomplete = set(range(instance.num_coflows))
    slot = min(release_slot.values())

    def group_server(pair, members) -> FlowKey | None:
        for k in members:
            f = FlowKey(pair[0], pair[1], k)
            if remaining.get(f, 0) > 0:
                return f
        return None

    def backfill_server(pair, after_pos) -> FlowKey | None:
        for k in ordering:
            if pos[k] <= after_pos or k not in incomplete or release_slot[k] > slot:
                continue
            f = FlowKey(pair[0], pair[1], k)
            if remaining.get(f, 0) > 0:
                return f
        return None

    def emit(serving: dict, length: int) -> None:
        nonlocal slot
        start, end = slot * time_unit, (slot + length) * time_unit
        segments.append(Segment(start, end, {f: cap for f in serving.values()}))
        for f in serving.values():
            remaining[f] -= length
            if remaining[f] == 0:
                flow_completions[f] = end
                flows_left[f.coflow].discard(f)
                if not flows_left[f.coflow]:
                    incomplete.discard(f.coflow)
        slot += length

    while incomplete:
        gi = next(g for g, grp in enumerate(groups) if any(k in incomplete for k in grp))
        members = [k for k in groups[gi] if k in incomplete]
        ready = [k for k in members if release_slot[k] <= slot]
        pending = sorted(
            release_slot[k] for k in incomplete if release_slot[k] > slot
        )
        next_release = pending[0] if pending else math.inf
        last_pos = max(pos[k] for k in groups[gi])
        if not ready:
            # the whole active group is unreleased: backfill-only slots
            serving = {}
            used_src: set[int] = set()
            used_dst: set[int] = set()
            for k in ordering:
                if k not in incomplete or release_slot[k] > slot:
                    continue
                for f in sorted(flows_left[k]):
                    if f.source not in used_src and f.dest not in used_dst:
                        serving[(f.source, f.dest)] = f
                        used_src.add(f.source)
                        used_dst.add(f.dest)
            if not serving:
                slot = next_release
                continue
            length = min(remaining[f] for f in serving.values())
            if next_release < math.inf:
                length = min(length, next_release - slot)
            emit(serving, length)
            continue
        matrix = np.zeros((n, n), dtype=np.int64)
        for k in ready:
            for f in flows_left[k]:
                matrix[f.source, f.dest] += remaining[f]
        interrupted = False
        for count, perm in _integer_bvn(matrix):
            while count > 0:
                serving: dict[tuple[int, int], FlowKey] = {}
                for i in range(n):
                    pair = (i, int(perm[i]))
                    f = group_server(pair, ready) or backfill_server(pair, last_pos)
                    if f is not None:
                        serving[pair] = f
                if not serving:
                    advance = count if next_release == math.inf else min(count, next_release - slot)
                    slot += advance
                    count -= advance
                else:
                    length = min(count, min(remaining[f] for f in serving.values()))
                    if next_release < math.inf:
                        length = min(length, next_release - slot)
                    emit(serving, length)
                    count -= length
                if slot >= next_release:
                    interrupted = True
                    break
            if interrupted:
                break

    completions = np.zeros(instance.num_coflows)
    for f, t in flow_completions.items():
        completions[f.coflow] = max(completions[f.coflow], t)
    return Schedule(segments=segments, completions=completions, flow_completions=flow_completions)
