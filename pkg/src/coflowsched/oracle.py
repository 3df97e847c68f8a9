"""Brute-force references: subset separation, permutation search, ratio checks."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .instance import CoflowId, Instance, id_key
from .lp import LpProblem, LpSolution, _as_vector
from .pipeline import RatioCheckResult, run_pipeline, solve_for_pipeline, theorem_constant
from .schedulers import PriorityList, dispatch, single_core_assignment
from .simulator import simulate

MAX_SUBSET_MEMBERS = 20
MAX_PERMUTATION_COFLOWS = 8


class OracleScaleError(ValueError):
    pass


def brute_force_separation(candidate, problem: LpProblem, family: int) -> tuple[tuple[int, ...], object]:
    """Most violated subset of one port family; violation <= 0 means feasible.

    Returns the subset as member variable indices together with
    ``rhs - lhs`` for that subset.
    """
    x = _as_vector(candidate, problem)
    fam = problem.families[family]
    n = len(fam.members)
    if n > MAX_SUBSET_MEMBERS:
        raise OracleScaleError(f"{n} members exceed the enumeration bound {MAX_SUBSET_MEMBERS}")
    best_set: tuple[int, ...] = ()
    best = None
    for r in range(1, n + 1):
        for combo in itertools.combinations(range(n), r):
            total = sum(fam.sizes[e] for e in combo)
            squares = sum(fam.sizes[e] ** 2 for e in combo)
            lhs = sum(fam.sizes[e] * x[fam.members[e]] for e in combo)
            viol = Fraction(total * total + squares, problem.divisor) - lhs
            if best is None or viol > best:
                best, best_set = viol, tuple(fam.members[e] for e in combo)
    return best_set, best


def respects_precedence(instance: Instance, perm) -> bool:
    pos = {k: i for i, k in enumerate(perm)}
    return all(pos[p] < pos[c.id] for c in instance.coflows for p in c.predecessors)


def best_permutation_schedule(instance: Instance, preempt: bool = True) -> tuple[Fraction, tuple[CoflowId, ...]]:
    """Minimum weighted completion time over all precedence-respecting coflow orders."""
    if instance.mode != "single_core":
        raise ValueError("permutation search is defined for single_core instances")
    if len(instance.coflows) > MAX_PERMUTATION_COFLOWS:
        raise OracleScaleError(f"{len(instance.coflows)} coflows exceed {MAX_PERMUTATION_COFLOWS}")
    assignment = single_core_assignment(instance)
    ids = sorted((c.id for c in instance.coflows), key=id_key)
    best: tuple[Fraction, tuple] | None = None
    for perm in itertools.permutations(ids):
        if not respects_precedence(instance, perm):
            continue
        _, report = simulate(instance, assignment, PriorityList("coflow", list(perm)), preempt=preempt)
        if best is None or report.weighted_cost < best[0]:
            best = (report.weighted_cost, perm)
    assert best is not None
    return best


def ratio_check(instance: Instance, pipeline: str | None = None, instance_id: str = "", **kwargs) -> RatioCheckResult:
    return run_pipeline(instance, pipeline, instance_id=instance_id, **kwargs).ratio


@dataclass
class LemmaCheckResult:
    instance_id: str
    constant: Fraction
    lp_values: dict
    interval_length: dict
    tolerance: float = 1e-9

    def worst(self) -> tuple[CoflowId | None, float]:
        worst_k, worst_r = None, 0.0
        for k, hat in self.interval_length.items():
            bar = float(self.lp_values[k])
            r = hat / bar if bar > 0 else (0.0 if hat == 0 else float("inf"))
            if worst_k is None or r > worst_r:
                worst_k, worst_r = k, r
        return worst_k, worst_r

    @property
    def passed(self) -> bool:
        c = float(self.constant)
        return all(hat <= c * float(self.lp_values[k]) * (1 + self.tolerance) + self.tolerance
                   for k, hat in self.interval_length.items())


def lemma_check(instance: Instance, instance_id: str = "", lp: LpSolution | None = None, **kwargs) -> LemmaCheckResult:
    """Per-coflow interval lengths with precedence removed from readiness gating."""
    if lp is None:
        lp = solve_for_pipeline(instance, instance.mode, **kwargs)
    assignment, priority = dispatch(instance, lp)
    _, report = simulate(instance, assignment, priority, gate_precedence=False)
    constant = theorem_constant(instance.mode, instance.num_cores, instance.all_releases_zero())
    return LemmaCheckResult(instance_id, constant, dict(lp.coflow_completion), dict(report.interval_length))
