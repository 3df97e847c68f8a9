"""LP relaxations for coflow scheduling and their cutting-plane solution.

Every relaxation has a polynomial base part (release, load and precedence
bounds) plus one exponential family of port inequalities per input and output
port::

    sum_{e in S} d_e C_e  >=  (d(S)^2 + d^2(S)) / (2m)     for all S

Only the cuts that matter are generated: for a candidate point the most
violated set of a port is a prefix of its members sorted by candidate value,
so separation is a sort plus a linear scan.
"""

from __future__ import annotations

import copy
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Protocol, Sequence

import numpy as np
from scipy.optimize import linprog

from .instance import CoflowId, Instance, id_key, port_loads
from .simplex import DenseSimplex

log = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-9
DEFAULT_MAX_ROUNDS = 200


class LpBuildError(ValueError):
    pass


class LpSolveError(RuntimeError):
    pass


@dataclass
class Row:
    """``sum coeffs[v] * x[v] >= rhs``."""

    coeffs: dict[int, Fraction]
    rhs: Fraction
    kind: str = "base"


@dataclass
class PortFamily:
    """The exponential inequality family of one port."""

    side: str  # "input" | "output"
    port: int
    members: list[int]  # variable indices
    sizes: list[int]  # coefficient of each member (d_ijk or L_ik)
    keys: list[tuple]  # deterministic tie-break key of each member


@dataclass(frozen=True)
class PrefixCut:
    side: str
    port: int
    member_set: tuple[int, ...]  # variable indices, in separation order
    sizes: tuple[int, ...]
    rhs: Fraction
    family: int = -1

    def as_row(self) -> Row:
        coeffs: dict[int, Fraction] = {}
        for v, d in zip(self.member_set, self.sizes):
            coeffs[v] = coeffs.get(v, 0) + Fraction(d)
        return Row(coeffs, self.rhs, "cut")

    @property
    def signature(self) -> tuple:
        return (self.side, self.port, frozenset(self.member_set))


def cut_rhs(sizes: Sequence[int], divisor: int) -> Fraction:
    # integer sums first, one division at the end
    total = sum(sizes)
    squares = sum(d * d for d in sizes)
    return Fraction(total * total + squares, divisor)


@dataclass
class LpProblem:
    mode: str
    num_cores: int
    var_names: list[str]
    objective: list[Fraction]
    rows: list[Row]
    families: list[PortFamily]
    seed_cuts: list[PrefixCut]
    coflow_var: dict[CoflowId, int]
    flow_var: dict[tuple, int] = field(default_factory=dict)
    job_var: dict = field(default_factory=dict)
    cmax_var: int | None = None
    objective_kind: str = "weighted_coflows"

    @property
    def divisor(self) -> int:
        return 2 * self.num_cores

    @property
    def num_vars(self) -> int:
        return len(self.var_names)

    def add_var(self, name: str, cost=0) -> int:
        self.var_names.append(name)
        self.objective.append(Fraction(cost))
        return len(self.var_names) - 1


def _fmt_id(x) -> str:
    return str(x)


def _check_mode(instance: Instance, expected: str) -> None:
    if instance.mode != expected:
        raise LpBuildError(f"instance mode is {instance.mode!r}, builder expects {expected!r}")


def _seed(problem: LpProblem) -> None:
    """Singleton cuts for every member plus the full-set cut of every port."""
    seeds: dict[tuple, PrefixCut] = {}
    for fi, fam in enumerate(problem.families):
        subsets = [[e] for e in range(len(fam.members))] + [list(range(len(fam.members)))]
        for sub in subsets:
            sizes = tuple(fam.sizes[e] for e in sub)
            cut = PrefixCut(fam.side, fam.port, tuple(fam.members[e] for e in sub), sizes,
                            cut_rhs(sizes, problem.divisor), fi)
            seeds.setdefault(cut.signature, cut)
    problem.seed_cuts = list(seeds.values())


def build_divisible_lp(instance: Instance) -> LpProblem:
    _check_mode(instance, "divisible")
    p = LpProblem("divisible", instance.num_cores, [], [], [], [], [], {})
    coflows = sorted(instance.coflows, key=lambda c: id_key(c.id))
    for c in coflows:
        p.coflow_var[c.id] = p.add_var(f"C[{_fmt_id(c.id)}]", c.weight)
    for c in coflows:
        for f in c.sorted_flows():
            p.flow_var[(c.id, f.source, f.dest)] = p.add_var(
                f"Cf[{_fmt_id(c.id)}][{f.source}][{f.dest}]")

    for c in coflows:
        ck = p.coflow_var[c.id]
        for f in c.sorted_flows():
            v = p.flow_var[(c.id, f.source, f.dest)]
            p.rows.append(Row({ck: Fraction(1), v: Fraction(-1)}, Fraction(0)))
            p.rows.append(Row({v: Fraction(1)}, Fraction(c.release + f.size)))
            for pred in c.predecessors:
                p.rows.append(Row({v: Fraction(1), p.coflow_var[pred]: Fraction(-1)}, Fraction(f.size)))
        if not c.flows:
            # coflow without flows: its completion still respects release and predecessors
            p.rows.append(Row({ck: Fraction(1)}, Fraction(c.release)))
            for pred in c.predecessors:
                p.rows.append(Row({ck: Fraction(1), p.coflow_var[pred]: Fraction(-1)}, Fraction(0)))

    for side in ("input", "output"):
        for port in range(instance.num_ports):
            members, sizes, keys = [], [], []
            for c in coflows:
                for f in c.sorted_flows():
                    if (f.source if side == "input" else f.dest) == port:
                        members.append(p.flow_var[(c.id, f.source, f.dest)])
                        sizes.append(f.size)
                        keys.append((id_key(c.id), f.source, f.dest))
            if members:
                p.families.append(PortFamily(side, port, members, sizes, keys))
    _seed(p)
    return p


def _build_coflow_level(instance: Instance, mode: str, cores: int) -> LpProblem:
    p = LpProblem(mode, cores, [], [], [], [], [], {})
    coflows = sorted(instance.coflows, key=lambda c: id_key(c.id))
    for c in coflows:
        p.coflow_var[c.id] = p.add_var(f"C[{_fmt_id(c.id)}]", c.weight)
    loads = port_loads(instance)
    for c in coflows:
        ck = p.coflow_var[c.id]
        port_vals = [x for x in loads.input_load[c.id] + loads.output_load[c.id] if x > 0]
        for load in port_vals or [0]:
            p.rows.append(Row({ck: Fraction(1)}, Fraction(c.release + load)))
            for pred in c.predecessors:
                p.rows.append(Row({ck: Fraction(1), p.coflow_var[pred]: Fraction(-1)}, Fraction(load)))
    for side, table in (("input", loads.input_load), ("output", loads.output_load)):
        for port in range(instance.num_ports):
            members, sizes, keys = [], [], []
            for c in coflows:
                load = table[c.id][port]
                if load > 0:
                    members.append(p.coflow_var[c.id])
                    sizes.append(load)
                    keys.append((id_key(c.id),))
            if members:
                p.families.append(PortFamily(side, port, members, sizes, keys))
    _seed(p)
    return p


def build_indivisible_lp(instance: Instance) -> LpProblem:
    _check_mode(instance, "indivisible")
    return _build_coflow_level(instance, "indivisible", instance.num_cores)


def build_single_core_lp(instance: Instance) -> LpProblem:
    _check_mode(instance, "single_core")
    if instance.num_cores != 1:
        raise LpBuildError("single_core mode requires num_cores = 1")
    return _build_coflow_level(instance, "single_core", 1)


BUILDERS = {
    "divisible": build_divisible_lp,
    "indivisible": build_indivisible_lp,
    "single_core": build_single_core_lp,
}


def build_lp(instance: Instance) -> LpProblem:
    try:
        builder = BUILDERS[instance.mode]
    except KeyError:
        raise LpBuildError(f"unknown mode {instance.mode!r}") from None
    return builder(instance)


def add_job_layer(problem: LpProblem, instance: Instance, objective: str) -> LpProblem:
    """Return a copy of ``problem`` re-targeted at job completion or makespan."""
    p = copy.deepcopy(problem)
    p.objective = [Fraction(0)] * p.num_vars
    if objective == "weighted_jobs":
        if not instance.jobs:
            raise LpBuildError("weighted_jobs objective requires a job grouping")
        for t in instance.jobs:
            jv = p.add_var(f"Cj[{_fmt_id(t.id)}]", t.weight)
            p.job_var[t.id] = jv
            for k in t.coflows:
                p.rows.append(Row({jv: Fraction(1), p.coflow_var[k]: Fraction(-1)}, Fraction(0), "job"))
    elif objective == "makespan":
        p.cmax_var = p.add_var("Cmax", 1)
        for k, v in p.coflow_var.items():
            p.rows.append(Row({p.cmax_var: Fraction(1), v: Fraction(-1)}, Fraction(0), "job"))
    else:
        raise LpBuildError(f"unknown job objective {objective!r}")
    p.objective_kind = objective
    return p


# ---------------------------------------------------------------------------
# separation


def _as_vector(candidate, problem: LpProblem) -> Sequence:
    if isinstance(candidate, LpSolution):
        return [candidate.values[name] for name in problem.var_names]
    if isinstance(candidate, dict):
        return [candidate[name] for name in problem.var_names]
    return candidate


def prefix_scan(x: Sequence, problem: LpProblem, fi: int) -> list[tuple[PrefixCut, object]]:
    """All prefixes of family ``fi`` in ascending-candidate order, with their violation."""
    fam = problem.families[fi]
    order = sorted(range(len(fam.members)), key=lambda e: (x[fam.members[e]], fam.keys[e]))
    out = []
    lhs = 0
    total = 0
    squares = 0
    members: list[int] = []
    sizes: list[int] = []
    for e in order:
        d = fam.sizes[e]
        v = fam.members[e]
        lhs = lhs + d * x[v]
        total += d
        squares += d * d
        members.append(v)
        sizes.append(d)
        rhs = Fraction(total * total + squares, problem.divisor)
        cut = PrefixCut(fam.side, fam.port, tuple(members), tuple(sizes), rhs, fi)
        out.append((cut, rhs - lhs))
    return out


def max_prefix_violation(candidate, problem: LpProblem, fi: int) -> tuple[PrefixCut, object]:
    x = _as_vector(candidate, problem)
    scan = prefix_scan(x, problem, fi)
    return max(scan, key=lambda cv: cv[1])


def _threshold(cut: PrefixCut, tolerance: float) -> float:
    return tolerance * max(1.0, float(cut.rhs))


def separate_prefix_violations(candidate, problem: LpProblem, tolerance: float = DEFAULT_TOLERANCE
                               ) -> list[PrefixCut]:
    """Every prefix cut whose violation exceeds ``tolerance`` (scaled by max(1, rhs))."""
    x = _as_vector(candidate, problem)
    found = []
    for fi in range(len(problem.families)):
        for cut, viol in prefix_scan(x, problem, fi):
            if viol > _threshold(cut, tolerance):
                found.append(cut)
    return found


# ---------------------------------------------------------------------------
# backends


class LpBackend(Protocol):
    name: str

    def solve(self, c: np.ndarray, A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float]:
        """Minimise c.x subject to A x >= b, x >= 0."""


class HighsBackend:
    name = "highs"

    def solve(self, c, A, b):
        res = linprog(
            np.asarray(c, dtype=float),
            A_ub=-np.asarray(A, dtype=float) if len(b) else None,
            b_ub=-np.asarray(b, dtype=float) if len(b) else None,
            bounds=(0, None),
            method="highs",
            options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
        )
        if res.status != 0:
            raise LpSolveError(f"HiGHS failed: {res.message}")
        return res.x, float(res.fun)


class SimplexBackend:
    """The bundled dense simplex (Bland's rule); ``exact`` pivots in rationals."""

    def __init__(self, exact: bool = False):
        self.exact = exact
        self.name = "simplex-exact" if exact else "simplex"

    def solve(self, c, A, b):
        solver = DenseSimplex(exact=self.exact)
        x, val = solver.solve(c, A, b)
        if not self.exact:
            return np.asarray(x, dtype=float), float(val)
        return x, val


def get_backend(name: str | LpBackend | None) -> LpBackend:
    if name is None or name == "highs":
        return HighsBackend()
    if isinstance(name, str):
        if name == "simplex":
            return SimplexBackend()
        if name == "simplex-exact":
            return SimplexBackend(exact=True)
        raise ValueError(f"unknown LP backend {name!r}")
    return name


def lp_backend_solve(rows: Sequence[Row], objective: Sequence, num_vars: int,
                     backend: str | LpBackend | None = None):
    """Solve ``min objective.x`` over ``rows`` (all >=) with x >= 0."""
    be = get_backend(backend)
    exact = getattr(be, "exact", False)
    dtype = object if exact else float
    A = np.zeros((len(rows), num_vars), dtype=dtype)
    if exact:
        A[...] = Fraction(0)
    b = np.empty(len(rows), dtype=dtype)
    for r, row in enumerate(rows):
        for v, a in row.coeffs.items():
            A[r, v] = a if exact else float(a)
        b[r] = row.rhs if exact else float(row.rhs)
    c = np.array([a if exact else float(a) for a in objective], dtype=dtype)
    return be.solve(c, A, b)


# ---------------------------------------------------------------------------
# cutting-plane driver


@dataclass
class LpSolution:
    values: dict[str, object]
    objective: object
    cuts_added: int
    iterations: int
    complete: bool = True
    objective_history: list = field(default_factory=list)
    coflow_completion: dict = field(default_factory=dict)
    flow_completion: dict = field(default_factory=dict)
    job_completion: dict = field(default_factory=dict)
    makespan: object = None
    backend: str = "highs"

    def to_dict(self) -> dict:
        return {
            "values": {k: float(v) for k, v in self.values.items()},
            "objective": float(self.objective),
            "cuts_added": self.cuts_added,
            "iterations": self.iterations,
            "complete": self.complete,
        }


def _package(problem: LpProblem, x, objective, cuts, iterations, complete, history, backend) -> LpSolution:
    values = {name: x[i] for i, name in enumerate(problem.var_names)}
    return LpSolution(
        values=values,
        objective=objective,
        cuts_added=cuts,
        iterations=iterations,
        complete=complete,
        objective_history=history,
        coflow_completion={k: x[v] for k, v in problem.coflow_var.items()},
        flow_completion={f: x[v] for f, v in problem.flow_var.items()},
        job_completion={t: x[v] for t, v in problem.job_var.items()},
        makespan=None if problem.cmax_var is None else x[problem.cmax_var],
        backend=backend,
    )


def solve_with_cutting_plane(problem: LpProblem, backend: str | LpBackend | None = None,
                             tolerance: float = DEFAULT_TOLERANCE,
                             max_rounds: int = DEFAULT_MAX_ROUNDS) -> LpSolution:
    """Solve ``problem`` to optimality over all port inequalities.

    Each round solves the restricted LP, separates prefix cuts at the optimum
    and adds the new ones.  Stops when none is violated beyond ``tolerance``
    or when ``max_rounds`` LP solves have been spent (``complete=False``).
    """
    be = get_backend(backend)
    if problem.num_vars == 0:
        return _package(problem, [], 0, 0, 0, True, [], be.name)

    pool: dict[tuple, PrefixCut] = {c.signature: c for c in problem.seed_cuts}
    cut_rows = [c.as_row() for c in pool.values()]
    history = []
    x, obj = None, None
    for rnd in range(1, max_rounds + 1):
        x, obj = lp_backend_solve(problem.rows + cut_rows, problem.objective, problem.num_vars, be)
        history.append(obj)
        fresh = [c for c in separate_prefix_violations(x, problem, tolerance) if c.signature not in pool]
        log.debug("round %d: objective %s, %d new cuts", rnd, obj, len(fresh))
        if not fresh:
            return _package(problem, x, obj, len(pool), rnd, True, history, be.name)
        for c in fresh:
            pool[c.signature] = c
            cut_rows.append(c.as_row())
    log.warning("cutting plane stopped after %d rounds with violated cuts remaining", max_rounds)
    return _package(problem, x, obj, len(pool), max_rounds, False, history, be.name)


def solve_instance_lp(instance: Instance, backend=None, tolerance: float = DEFAULT_TOLERANCE,
                      max_rounds: int = DEFAULT_MAX_ROUNDS) -> LpSolution:
    return solve_with_cutting_plane(build_lp(instance), backend, tolerance, max_rounds)
