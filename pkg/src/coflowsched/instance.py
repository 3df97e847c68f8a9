"""Problem instances: coflows with sparse demand matrices on m identical N x N cores.

Ports are 0-indexed.  Flow sizes and release times are integers; weights are
kept as :class:`fractions.Fraction` so that costs can be summed exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

CoflowId = Union[int, str]
JobId = Union[int, str]

MODES = ("divisible", "indivisible", "single_core")


def id_key(x: CoflowId) -> tuple:
    """Total order over mixed int/str identifiers (ints first)."""
    return (1, x) if isinstance(x, str) else (0, x)


@dataclass(frozen=True)
class FlowSpec:
    source: int
    dest: int
    size: int


@dataclass
class CoflowSpec:
    id: CoflowId
    weight: Fraction = Fraction(1)
    release: int = 0
    flows: list[FlowSpec] = field(default_factory=list)
    predecessors: list[CoflowId] = field(default_factory=list)

    @property
    def total_size(self) -> int:
        return sum(f.size for f in self.flows)

    def sorted_flows(self) -> list[FlowSpec]:
        return sorted(self.flows, key=lambda f: (f.source, f.dest))


@dataclass
class JobSpec:
    id: JobId
    weight: Fraction
    coflows: list[CoflowId]


@dataclass
class Instance:
    num_ports: int
    num_cores: int
    coflows: list[CoflowSpec]
    mode: str = "divisible"
    jobs: list[JobSpec] | None = None

    def coflow(self, cid: CoflowId) -> CoflowSpec:
        for c in self.coflows:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def coflow_map(self) -> dict[CoflowId, CoflowSpec]:
        return {c.id: c for c in self.coflows}

    def flow_ids(self) -> list[tuple[CoflowId, int, int]]:
        """Every flow as ``(coflow id, source, dest)``, in canonical order."""
        out = []
        for c in sorted(self.coflows, key=lambda c: id_key(c.id)):
            out.extend((c.id, f.source, f.dest) for f in c.sorted_flows())
        return out

    def flow_sizes(self) -> dict[tuple[CoflowId, int, int], int]:
        return {(c.id, f.source, f.dest): f.size for c in self.coflows for f in c.flows}

    def all_releases_zero(self) -> bool:
        return all(c.release == 0 for c in self.coflows)

    def successors(self) -> dict[CoflowId, list[CoflowId]]:
        succ: dict[CoflowId, list[CoflowId]] = {c.id: [] for c in self.coflows}
        for c in self.coflows:
            for p in c.predecessors:
                succ.setdefault(p, []).append(c.id)
        return succ


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


class InstanceParseError(ValueError):
    pass


class InvalidInstanceError(ValueError):
    def __init__(self, report: ValidationReport):
        super().__init__("; ".join(report.violations))
        self.report = report


def _find_cycle(instance: Instance) -> list[CoflowId] | None:
    ids = {c.id for c in instance.coflows}
    preds = {c.id: [p for p in c.predecessors if p in ids] for c in instance.coflows}
    state: dict[CoflowId, int] = {}
    for root in sorted(ids, key=id_key):
        if root in state:
            continue
        # iterative DFS along predecessor arcs; 1 = on stack, 2 = done
        stack = [(root, iter(preds[root]))]
        path = [root]
        state[root] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                state[node] = 2
                stack.pop()
                path.pop()
            elif state.get(nxt) == 1:
                return path[path.index(nxt):] + [nxt]
            elif nxt not in state:
                state[nxt] = 1
                stack.append((nxt, iter(preds[nxt])))
                path.append(nxt)
    return None


def validate(instance: Instance) -> ValidationReport:
    """Check the model assumptions; never raises."""
    v: list[str] = []
    n = instance.num_ports
    if n < 1:
        v.append(f"num_ports must be >= 1, got {n}")
    if instance.mode not in MODES:
        v.append(f"unknown mode {instance.mode!r}")
    if instance.num_cores < 1:
        v.append(f"num_cores must be >= 1, got {instance.num_cores}")
    if instance.mode == "single_core" and instance.num_cores != 1:
        v.append(f"single_core mode requires num_cores = 1, got {instance.num_cores}")

    seen: set = set()
    for c in instance.coflows:
        if c.id in seen:
            v.append(f"duplicate coflow id {c.id!r}")
        seen.add(c.id)
    for c in instance.coflows:
        if c.weight < 0:
            v.append(f"coflow {c.id!r}: negative weight {c.weight}")
        if c.release < 0:
            v.append(f"coflow {c.id!r}: negative release {c.release}")
        pairs: set[tuple[int, int]] = set()
        for f in c.flows:
            if not (0 <= f.source < n) or not (0 <= f.dest < n):
                v.append(f"coflow {c.id!r}: port out of range in flow {f.source}->{f.dest}")
            if f.size < 1:
                v.append(f"coflow {c.id!r}: nonpositive flow size {f.size} on {f.source}->{f.dest}")
            if (f.source, f.dest) in pairs:
                v.append(f"coflow {c.id!r}: duplicate flow {f.source}->{f.dest}")
            pairs.add((f.source, f.dest))
        for p in c.predecessors:
            if p == c.id:
                v.append(f"coflow {c.id!r}: self-predecessor (cycle)")
            elif p not in seen:
                v.append(f"coflow {c.id!r}: dangling predecessor {p!r}")
    cyc = _find_cycle(instance)
    if cyc is not None and len(cyc) > 2:
        v.append("cycle: " + " -> ".join(map(repr, reversed(cyc))))

    if instance.jobs is not None:
        owner: dict[CoflowId, JobId] = {}
        job_ids: set = set()
        for t in instance.jobs:
            if t.id in job_ids:
                v.append(f"duplicate job id {t.id!r}")
            job_ids.add(t.id)
            if t.weight < 0:
                v.append(f"job {t.id!r}: negative weight {t.weight}")
            for k in t.coflows:
                if k not in seen:
                    v.append(f"job {t.id!r}: unknown coflow {k!r}")
                elif k in owner:
                    v.append(f"coflow {k!r} belongs to jobs {owner[k]!r} and {t.id!r}")
                else:
                    owner[k] = t.id
    return ValidationReport(v)


def ensure_valid(instance: Instance) -> Instance:
    report = validate(instance)
    if not report.ok:
        raise InvalidInstanceError(report)
    return instance


def topological_order(instance: Instance) -> list[CoflowId]:
    """Kahn's algorithm; ties broken by ascending id.  Requires acyclic input."""
    import heapq

    indeg = {c.id: len(set(c.predecessors)) for c in instance.coflows}
    succ = instance.successors()
    heap = [(id_key(k), k) for k, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        _, k = heapq.heappop(heap)
        order.append(k)
        for s in set(succ[k]):
            indeg[s] -= 1
            if indeg[s] == 0:
                heapq.heappush(heap, (id_key(s), s))
    if len(order) != len(indeg):
        raise ValueError("precedence graph has a cycle")
    return order


def longest_path_mu(instance: Instance) -> int:
    """Number of coflows (vertices) on the longest directed path; 0 when empty."""
    depth: dict[CoflowId, int] = {}
    cmap = instance.coflow_map()
    for k in topological_order(instance):
        depth[k] = 1 + max((depth[p] for p in cmap[k].predecessors), default=0)
    return max(depth.values(), default=0)


@dataclass
class PortLoads:
    """``input_load[k][i]`` = L_ik and ``output_load[k][j]`` = L_jk."""

    input_load: dict[CoflowId, list[int]]
    output_load: dict[CoflowId, list[int]]

    def max_load(self, k: CoflowId) -> int:
        return max(max(self.input_load[k], default=0), max(self.output_load[k], default=0))


def port_loads(instance: Instance) -> PortLoads:
    n = instance.num_ports
    inp: dict[CoflowId, list[int]] = {}
    out: dict[CoflowId, list[int]] = {}
    for c in instance.coflows:
        li, lo = [0] * n, [0] * n
        for f in c.flows:
            li[f.source] += f.size
            lo[f.dest] += f.size
        inp[c.id] = li
        out[c.id] = lo
    return PortLoads(inp, out)


# ---------------------------------------------------------------------------
# serialization

_TOP_FIELDS = ("num_ports", "num_cores", "mode", "coflows", "jobs")
_COFLOW_FIELDS = ("id", "weight", "release", "predecessors", "flows")
_FLOW_FIELDS = ("src", "dst", "size")
_JOB_FIELDS = ("id", "weight", "coflows")


def _check_fields(obj, allowed, required, where: str) -> None:
    if not isinstance(obj, dict):
        raise InstanceParseError(f"{where}: expected an object, got {type(obj).__name__}")
    for key in obj:
        if key not in allowed:
            raise InstanceParseError(f"{where}: unknown field {key!r}")
    for key in required:
        if key not in obj:
            raise InstanceParseError(f"{where}: missing field {key!r}")


def _int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceParseError(f"{where}: expected an integer, got {value!r}")
    return value


def _ident(value, where: str) -> CoflowId:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise InstanceParseError(f"{where}: identifier must be an int or string, got {value!r}")
    return value


def _rational(value, where: str) -> Fraction:
    if isinstance(value, bool):
        raise InstanceParseError(f"{where}: expected a number, got {value!r}")
    try:
        if isinstance(value, float):
            return Fraction(repr(value))
        if isinstance(value, (int, str)):
            return Fraction(value)
    except (ValueError, ZeroDivisionError):
        pass
    raise InstanceParseError(f"{where}: expected a number or 'p/q' string, got {value!r}")


def _dump_rational(x: Fraction):
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def instance_from_dict(doc) -> Instance:
    _check_fields(doc, _TOP_FIELDS, ("num_ports", "num_cores", "mode", "coflows"), "instance")
    mode = doc["mode"]
    if not isinstance(mode, str):
        raise InstanceParseError(f"instance.mode: expected a string, got {mode!r}")
    if not isinstance(doc["coflows"], list):
        raise InstanceParseError("instance.coflows: expected an array")
    coflows = []
    for ci, c in enumerate(doc["coflows"]):
        where = f"coflows[{ci}]"
        _check_fields(c, _COFLOW_FIELDS, ("id", "flows"), where)
        flows = []
        if not isinstance(c["flows"], list):
            raise InstanceParseError(f"{where}.flows: expected an array")
        for fi, f in enumerate(c["flows"]):
            fw = f"{where}.flows[{fi}]"
            _check_fields(f, _FLOW_FIELDS, _FLOW_FIELDS, fw)
            flows.append(FlowSpec(_int(f["src"], fw + ".src"), _int(f["dst"], fw + ".dst"),
                                  _int(f["size"], fw + ".size")))
        preds = c.get("predecessors", [])
        if not isinstance(preds, list):
            raise InstanceParseError(f"{where}.predecessors: expected an array")
        coflows.append(CoflowSpec(
            id=_ident(c["id"], where + ".id"),
            weight=_rational(c.get("weight", 1), where + ".weight"),
            release=_int(c.get("release", 0), where + ".release"),
            flows=flows,
            predecessors=[_ident(p, f"{where}.predecessors[{pi}]") for pi, p in enumerate(preds)],
        ))
    jobs = None
    if doc.get("jobs") is not None:
        if not isinstance(doc["jobs"], list):
            raise InstanceParseError("instance.jobs: expected an array")
        jobs = []
        for ti, t in enumerate(doc["jobs"]):
            where = f"jobs[{ti}]"
            _check_fields(t, _JOB_FIELDS, ("id", "coflows"), where)
            if not isinstance(t["coflows"], list):
                raise InstanceParseError(f"{where}.coflows: expected an array")
            jobs.append(JobSpec(
                id=_ident(t["id"], where + ".id"),
                weight=_rational(t.get("weight", 1), where + ".weight"),
                coflows=[_ident(k, f"{where}.coflows[{i}]") for i, k in enumerate(t["coflows"])],
            ))
    return Instance(
        num_ports=_int(doc["num_ports"], "instance.num_ports"),
        num_cores=_int(doc["num_cores"], "instance.num_cores"),
        coflows=coflows,
        mode=mode,
        jobs=jobs,
    )


def instance_to_dict(instance: Instance) -> dict:
    doc: dict = {
        "num_ports": instance.num_ports,
        "num_cores": instance.num_cores,
        "mode": instance.mode,
        "coflows": [
            {
                "id": c.id,
                "weight": _dump_rational(c.weight),
                "release": c.release,
                "predecessors": list(c.predecessors),
                "flows": [{"src": f.source, "dst": f.dest, "size": f.size} for f in c.flows],
            }
            for c in instance.coflows
        ],
    }
    if instance.jobs is not None:
        doc["jobs"] = [
            {"id": t.id, "weight": _dump_rational(t.weight), "coflows": list(t.coflows)}
            for t in instance.jobs
        ]
    return doc


def read_instance(data: bytes | str) -> Instance:
    """Parse an instance document.  Semantic checks are left to :func:`validate`."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise InstanceParseError(f"line {e.lineno}, column {e.colno}: {e.msg}") from e
    return instance_from_dict(doc)


def write_instance(instance: Instance) -> bytes:
    return (json.dumps(instance_to_dict(instance), indent=2) + "\n").encode("utf-8")
