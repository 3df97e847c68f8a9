"""Core assignment and priority ordering driven by LP completion values.

Ties in the LP order are broken by coflow id, then (source, dest); ties
between cores by lowest core index.  All outputs are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance import CoflowId, Instance, id_key, port_loads
from .lp import (
    DEFAULT_MAX_ROUNDS,
    DEFAULT_TOLERANCE,
    LpSolution,
    add_job_layer,
    build_lp,
    solve_with_cutting_plane,
)

FlowId = tuple  # (coflow id, source, dest)


@dataclass
class Assignment:
    """Placement of flows (divisible) or coflows (indivisible) on cores.

    ``flow_core`` is always filled so the simulator never needs to know the
    granularity; ``coflow_core`` only for indivisible placements.
    """

    num_cores: int
    flow_core: dict[FlowId, int]
    load_in: np.ndarray  # shape (N, m)
    load_out: np.ndarray
    coflow_core: dict[CoflowId, int] | None = None

    @property
    def granularity(self) -> str:
        return "flow" if self.coflow_core is None else "coflow"

    @property
    def mapping(self) -> dict:
        return self.flow_core if self.coflow_core is None else self.coflow_core

    def to_dict(self) -> dict:
        items = sorted(self.mapping.items(), key=lambda kv: _entity_key(kv[0]))
        return {
            "granularity": self.granularity,
            "mapping": [[_entity_json(e), h] for e, h in items],
            "load_in": self.load_in.tolist(),
            "load_out": self.load_out.tolist(),
        }


@dataclass
class PriorityList:
    granularity: str  # "flow" | "coflow"
    entries: list

    def flow_order(self, instance: Instance) -> list[FlowId]:
        if self.granularity == "flow":
            return list(self.entries)
        cmap = instance.coflow_map()
        return [(k, f.source, f.dest) for k in self.entries for f in cmap[k].sorted_flows()]

    def to_dict(self) -> dict:
        return {"granularity": self.granularity, "entries": [_entity_json(e) for e in self.entries]}


def _entity_key(e) -> tuple:
    if isinstance(e, tuple):
        return (id_key(e[0]), e[1], e[2])
    return (id_key(e),)


def _entity_json(e):
    return list(e) if isinstance(e, tuple) else e


def recompute_loads(instance: Instance, flow_core: dict[FlowId, int], m: int) -> tuple[np.ndarray, np.ndarray]:
    n = instance.num_ports
    lin = np.zeros((n, m), dtype=np.int64)
    lout = np.zeros((n, m), dtype=np.int64)
    for (k, i, j), d in instance.flow_sizes().items():
        h = flow_core[(k, i, j)]
        lin[i, h] += d
        lout[j, h] += d
    return lin, lout


def flow_priority(instance: Instance, lp: LpSolution) -> list[FlowId]:
    """Flows by ascending flow-level LP value, then coflow id, then (source, dest)."""
    vals = lp.flow_completion
    return sorted(instance.flow_ids(), key=lambda f: (vals[f], id_key(f[0]), f[1], f[2]))


def coflow_priority(instance: Instance, lp: LpSolution) -> list[CoflowId]:
    vals = lp.coflow_completion
    return sorted((c.id for c in instance.coflows), key=lambda k: (vals[k], id_key(k)))


def assign_cores_flow_driven(instance: Instance, lp: LpSolution) -> tuple[Assignment, PriorityList]:
    m, n = instance.num_cores, instance.num_ports
    sizes = instance.flow_sizes()
    order = flow_priority(instance, lp)
    lin = np.zeros((n, m), dtype=np.int64)
    lout = np.zeros((n, m), dtype=np.int64)
    mapping: dict[FlowId, int] = {}
    for f in order:
        _, i, j = f
        h = int(np.argmin(lin[i] + lout[j]))  # first minimum = lowest index
        mapping[f] = h
        lin[i, h] += sizes[f]
        lout[j, h] += sizes[f]
    return Assignment(m, mapping, lin, lout), PriorityList("flow", order)


def assign_cores_coflow_driven(instance: Instance, lp: LpSolution) -> tuple[Assignment, PriorityList]:
    m, n = instance.num_cores, instance.num_ports
    loads = port_loads(instance)
    order = coflow_priority(instance, lp)
    lin = np.zeros((n, m), dtype=np.int64)
    lout = np.zeros((n, m), dtype=np.int64)
    cmap = instance.coflow_map()
    coflow_core: dict[CoflowId, int] = {}
    flow_core: dict[FlowId, int] = {}
    for k in order:
        li = np.asarray(loads.input_load[k], dtype=np.int64)
        lo = np.asarray(loads.output_load[k], dtype=np.int64)
        # max over (i, j) of a sum separates into a sum of maxima
        cost = (lin + li[:, None]).max(axis=0) + (lout + lo[:, None]).max(axis=0)
        h = int(np.argmin(cost))
        coflow_core[k] = h
        lin[:, h] += li
        lout[:, h] += lo
        for f in cmap[k].flows:
            flow_core[(k, f.source, f.dest)] = h
    return Assignment(m, flow_core, lin, lout, coflow_core), PriorityList("coflow", order)


def order_single_core(instance: Instance, lp: LpSolution) -> PriorityList:
    order = coflow_priority(instance, lp)
    return PriorityList("flow", PriorityList("coflow", order).flow_order(instance))


def single_core_assignment(instance: Instance) -> Assignment:
    flow_core = {f: 0 for f in instance.flow_ids()}
    lin, lout = recompute_loads(instance, flow_core, 1)
    return Assignment(1, flow_core, lin, lout)


def dispatch(instance: Instance, lp: LpSolution) -> tuple[Assignment, PriorityList]:
    """Run the assignment/ordering phase matching ``instance.mode``."""
    if instance.mode == "divisible":
        return assign_cores_flow_driven(instance, lp)
    if instance.mode == "indivisible":
        return assign_cores_coflow_driven(instance, lp)
    if instance.mode == "single_core":
        return single_core_assignment(instance), order_single_core(instance, lp)
    raise ValueError(f"unknown mode {instance.mode!r}")


def schedule_multistage(instance: Instance, objective: str, backend=None,
                        tolerance: float = DEFAULT_TOLERANCE, max_rounds: int = DEFAULT_MAX_ROUNDS
                        ) -> tuple[Assignment, PriorityList, LpSolution]:
    problem = add_job_layer(build_lp(instance), instance, objective)
    lp = solve_with_cutting_plane(problem, backend, tolerance, max_rounds)
    assignment, priority = dispatch(instance, lp)
    return assignment, priority, lp
