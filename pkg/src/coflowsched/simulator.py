"""Event-driven list-scheduling simulator on m identical non-blocking cores.

Time is an integer.  Events are releases and flow completions (a coflow
completes, and its successors may become ready, only at a flow completion or
a release).  At every event each core rescans its eligible flows in priority
order and grants link (i, j) when input i and output j are both unclaimed in
that scan; granted flows run at rate 1 until the next event.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .instance import CoflowId, Instance, id_key, topological_order
from .schedulers import Assignment, FlowId, PriorityList


class SimulationError(RuntimeError):
    pass


@dataclass
class FlowSchedule:
    core: int
    intervals: list[tuple[int, int]] = field(default_factory=list)  # half-open [start, end)

    @property
    def volume(self) -> int:
        return sum(e - s for s, e in self.intervals)


@dataclass
class Schedule:
    flows: dict[FlowId, FlowSchedule]

    def to_dict(self) -> list:
        out = []
        for f in sorted(self.flows, key=lambda f: (id_key(f[0]), f[1], f[2])):
            fs = self.flows[f]
            out.append({"coflow": f[0], "src": f[1], "dst": f[2], "core": fs.core,
                        "intervals": [[s, e] for s, e in fs.intervals]})
        return out

    @classmethod
    def from_dict(cls, rows: list) -> "Schedule":
        return cls({(r["coflow"], r["src"], r["dst"]): FlowSchedule(r["core"], [tuple(iv) for iv in r["intervals"]])
                    for r in rows})


@dataclass
class ScheduleReport:
    completion: dict[CoflowId, int]
    ready: dict[CoflowId, int]
    interval_length: dict[CoflowId, int]
    job_completion: dict
    makespan: int
    weighted_cost: Fraction
    weighted_job_cost: Fraction | None
    events: int = 0

    def to_dict(self) -> dict:
        keys = sorted(self.completion, key=id_key)
        return {
            "coflows": [{"id": k, "completion": self.completion[k], "ready": self.ready[k],
                         "interval_length": self.interval_length[k]} for k in keys],
            "jobs": [{"id": t, "completion": c} for t, c in self.job_completion.items()],
            "makespan": self.makespan,
            "weighted_cost": str(self.weighted_cost),
            "weighted_job_cost": None if self.weighted_job_cost is None else str(self.weighted_job_cost),
        }


@dataclass
class CostSummary:
    weighted_coflow_cost: Fraction
    weighted_job_cost: Fraction
    makespan: int


def report_costs(report: ScheduleReport, instance: Instance) -> CostSummary:
    cmap = instance.coflow_map()
    coflow_cost = sum((cmap[k].weight * c for k, c in report.completion.items()), Fraction(0))
    job_cost = Fraction(0)
    for t in instance.jobs or []:
        job_cost += t.weight * max((report.completion[k] for k in t.coflows), default=0)
    return CostSummary(coflow_cost, job_cost, max(report.completion.values(), default=0))


def _build_report(instance: Instance, completion: dict, gate_precedence: bool, events: int) -> ScheduleReport:
    ready = {}
    for c in instance.coflows:
        pred_done = max((completion[p] for p in c.predecessors), default=0) if gate_precedence else 0
        ready[c.id] = max(c.release, pred_done)
    jobs = {}
    for t in instance.jobs or []:
        jobs[t.id] = max((completion[k] for k in t.coflows), default=0)
    report = ScheduleReport(
        completion=completion,
        ready=ready,
        interval_length={k: completion[k] - ready[k] for k in completion},
        job_completion=jobs,
        makespan=max(completion.values(), default=0),
        weighted_cost=Fraction(0),
        weighted_job_cost=None,
        events=events,
    )
    costs = report_costs(report, instance)
    report.weighted_cost = costs.weighted_coflow_cost
    if instance.jobs is not None:
        report.weighted_job_cost = costs.weighted_job_cost
    return report


def simulate(instance: Instance, assignment: Assignment, priority: PriorityList,
             preempt: bool = True, gate_precedence: bool = True) -> tuple[Schedule, ScheduleReport]:
    """Execute the list policy; returns the exact schedule and its report.

    ``preempt=False`` lets a flow keep its link until it finishes.
    ``gate_precedence=False`` ignores precedence for readiness (the order still
    comes from ``priority``); used to measure per-coflow interval lengths.
    """
    sizes = instance.flow_sizes()
    order = priority.flow_order(instance)
    if set(order) != set(sizes):
        raise SimulationError("priority list does not cover exactly the instance's flows")
    missing = set(sizes) - set(assignment.flow_core)
    if missing:
        raise SimulationError(f"flows without a core: {sorted(missing, key=str)[:3]}")

    m = assignment.num_cores
    cmap = instance.coflow_map()
    by_core: list[list[FlowId]] = [[] for _ in range(m)]
    for f in order:
        by_core[assignment.flow_core[f]].append(f)
    remaining = dict(sizes)
    flows_left = {c.id: len(c.flows) for c in instance.coflows}
    sched = {f: FlowSchedule(assignment.flow_core[f]) for f in order}
    completion: dict[CoflowId, int] = {}
    topo = topological_order(instance)

    def settle(now: int) -> None:
        # topological sweep so chains of empty coflows resolve at one instant
        for k in topo:
            if k in completion or flows_left[k] > 0:
                continue
            c = cmap[k]
            if c.release > now:
                continue
            if gate_precedence and any(p not in completion for p in c.predecessors):
                continue
            ends = [sched[(k, f.source, f.dest)].intervals[-1][1] for f in c.flows]
            completion[k] = max(ends) if ends else now

    if not instance.coflows:
        return Schedule({}), _build_report(instance, {}, gate_precedence, 0)

    t = min(c.release for c in instance.coflows)
    running: list[FlowId] = []
    events = 0
    while True:
        settle(t)
        if len(completion) == len(instance.coflows):
            break
        events += 1

        def eligible(f: FlowId) -> bool:
            c = cmap[f[0]]
            if remaining[f] == 0 or c.release > t:
                return False
            return not gate_precedence or all(p in completion for p in c.predecessors)

        granted: list[FlowId] = []
        for h in range(m):
            busy_in: set[int] = set()
            busy_out: set[int] = set()
            if not preempt:
                for f in running:
                    if assignment.flow_core[f] == h and remaining[f] > 0:
                        busy_in.add(f[1])
                        busy_out.add(f[2])
                        granted.append(f)
            for f in by_core[h]:
                if f[1] in busy_in or f[2] in busy_out or not eligible(f):
                    continue
                if not preempt and f in granted:
                    continue
                busy_in.add(f[1])
                busy_out.add(f[2])
                granted.append(f)

        horizon = [t + remaining[f] for f in granted]
        horizon += [c.release for c in instance.coflows if c.id not in completion and c.release > t]
        if not horizon:
            raise SimulationError(f"policy gap at t={t}: nothing can ever be scheduled")
        nxt = min(horizon)
        for f in granted:
            remaining[f] -= nxt - t
            ivs = sched[f].intervals
            if ivs and ivs[-1][1] == t:
                ivs[-1] = (ivs[-1][0], nxt)
            else:
                ivs.append((t, nxt))
            if remaining[f] == 0:
                flows_left[f[0]] -= 1
        running = [f for f in granted if remaining[f] > 0]
        t = nxt

    return Schedule(sched), _build_report(instance, completion, gate_precedence, events)


# ---------------------------------------------------------------------------
# verification


@dataclass
class FeasibilityReport:
    ok: bool
    check: int | None = None  # 0 structure, 1 port matching, 2 release, 3 precedence, 4 volume
    message: str = ""
    witness_time: int | None = None

    def __bool__(self) -> bool:
        return self.ok


def _fail(check: int, msg: str, t: int | None = None) -> FeasibilityReport:
    return FeasibilityReport(False, check, msg, t)


def verify_schedule(instance: Instance, schedule: Schedule) -> FeasibilityReport:
    """Independent feasibility check of an arbitrary schedule."""
    sizes = instance.flow_sizes()
    if set(schedule.flows) != set(sizes):
        return _fail(0, "schedule flows differ from instance flows")
    for f, fs in schedule.flows.items():
        if not 0 <= fs.core < instance.num_cores:
            return _fail(0, f"flow {f} on core {fs.core} outside [0, {instance.num_cores})")
        prev_end = None
        for s, e in fs.intervals:
            if not s < e:
                return _fail(0, f"flow {f}: empty or reversed interval [{s}, {e})", s)
            if prev_end is not None and s < prev_end:
                return _fail(0, f"flow {f}: intervals overlap or unsorted", s)
            prev_end = e
    if instance.mode != "divisible":
        cores: dict[CoflowId, set] = {}
        for f, fs in schedule.flows.items():
            cores.setdefault(f[0], set()).add(fs.core)
        for k, hs in cores.items():
            if len(hs) > 1:
                return _fail(0, f"indivisible coflow {k!r} split over cores {sorted(hs)}")

    # 1: each port of each core carries at most one flow at a time
    worst: tuple | None = None
    usage: dict[tuple, list] = {}
    for f, fs in schedule.flows.items():
        for s, e in fs.intervals:
            usage.setdefault((fs.core, "input", f[1]), []).append((s, e, f))
            usage.setdefault((fs.core, "output", f[2]), []).append((s, e, f))
    for (h, side, port), ivs in usage.items():
        ivs.sort(key=lambda iv: (iv[0], iv[1]))
        reach, owner = None, None
        for s, e, f in ivs:
            if reach is not None and s < reach:
                if worst is None or s < worst[0]:
                    worst = (s, f"core {h} {side} port {port}: {owner} and {f} overlap at t={s}")
            if reach is None or e > reach:
                reach, owner = e, f
    if worst is not None:
        return _fail(1, worst[1], worst[0])

    cmap = instance.coflow_map()
    # 2: release
    for f, fs in schedule.flows.items():
        r = cmap[f[0]].release
        if fs.intervals and fs.intervals[0][0] < r:
            return _fail(2, f"flow {f} starts at {fs.intervals[0][0]} before release {r}", fs.intervals[0][0])

    # 3: precedence; an empty coflow finishes at its ready time
    comp: dict[CoflowId, int] = {}
    for k in topological_order(instance):
        c = cmap[k]
        ready = max([c.release] + [comp[p] for p in c.predecessors])
        ends = [iv[1] for fl in c.flows for iv in schedule.flows[(k, fl.source, fl.dest)].intervals[-1:]]
        comp[k] = max([ready] + ends)
    for f, fs in schedule.flows.items():
        if not fs.intervals:
            continue
        start = fs.intervals[0][0]
        for p in cmap[f[0]].predecessors:
            if start < comp[p]:
                return _fail(3, f"flow {f} starts at {start} before predecessor {p!r} completes at {comp[p]}", start)

    # 4: volume
    for f, fs in schedule.flows.items():
        if fs.volume != sizes[f]:
            return _fail(4, f"flow {f} transmits {fs.volume} of {sizes[f]} units")
    return FeasibilityReport(True)
