"""End-to-end runs: LP -> assignment/order -> simulation -> verification -> ratio."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .instance import Instance, instance_to_dict, longest_path_mu, validate
from .lp import (
    DEFAULT_MAX_ROUNDS,
    DEFAULT_TOLERANCE,
    LpBuildError,
    LpSolution,
    add_job_layer,
    build_lp,
    solve_with_cutting_plane,
)
from .schedulers import Assignment, PriorityList, dispatch
from .simulator import FeasibilityReport, Schedule, ScheduleReport, simulate, verify_schedule

PIPELINES = ("divisible", "indivisible", "single_core", "job_weighted", "job_makespan")
JOB_OBJECTIVE = {"job_weighted": "weighted_jobs", "job_makespan": "makespan"}

# relative slack for comparing an exact integer cost with a floating LP bound
RATIO_SLACK = 1e-9


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


def theorem_constant(mode: str, num_cores: int, zero_release: bool) -> Fraction:
    """Per-coflow interval factor of the list scheduler for ``mode`` (times mu gives the ratio)."""
    m = num_cores
    if mode == "divisible":
        return (5 if zero_release else 6) - Fraction(2, m)
    if mode == "indivisible":
        return Fraction(4 * m + (0 if zero_release else 1))
    if mode == "single_core":
        return Fraction(4 if zero_release else 5)
    raise ValueError(f"unknown mode {mode!r}")


@dataclass
class RatioCheckResult:
    instance_id: str
    mode: str
    num_cores: int
    num_ports: int
    num_coflows: int
    mu: int
    lp_objective: float
    alg_cost: Fraction
    constant: Fraction

    @property
    def bound(self) -> Fraction:
        return self.constant * self.mu

    @property
    def ratio(self) -> float:
        if self.lp_objective > 0:
            return float(self.alg_cost) / self.lp_objective
        return 0.0 if self.alg_cost == 0 else float("inf")

    @property
    def passed(self) -> bool:
        limit = float(self.bound) * self.lp_objective
        return float(self.alg_cost) <= limit * (1 + RATIO_SLACK) + RATIO_SLACK

    def to_dict(self) -> dict:
        return {
            "instance_id": self.instance_id, "mode": self.mode, "m": self.num_cores,
            "N": self.num_ports, "K": self.num_coflows, "mu": self.mu,
            "lp_obj": self.lp_objective, "alg_cost": str(self.alg_cost), "ratio": self.ratio,
            "bound": str(self.bound), "pass": self.passed,
        }


@dataclass
class RunResult:
    instance: Instance
    pipeline: str
    lp: LpSolution
    assignment: Assignment
    priority: PriorityList
    schedule: Schedule
    report: ScheduleReport
    feasibility: FeasibilityReport
    ratio: RatioCheckResult

    @property
    def ok(self) -> bool:
        return self.feasibility.ok and self.ratio.passed and self.lp.complete

    def to_dict(self) -> dict:
        return {
            "instance_id": self.ratio.instance_id,
            "pipeline": self.pipeline,
            "instance": instance_to_dict(self.instance),
            "lp": self.lp.to_dict(),
            "assignment": self.assignment.to_dict(),
            "priority": self.priority.to_dict(),
            "schedule": self.schedule.to_dict(),
            "report": self.report.to_dict(),
            "feasibility": {"ok": self.feasibility.ok, "check": self.feasibility.check,
                            "message": self.feasibility.message,
                            "witness_time": self.feasibility.witness_time},
            "ratio_check": self.ratio.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def solve_for_pipeline(instance: Instance, pipeline: str, backend=None,
                       tolerance: float = DEFAULT_TOLERANCE,
                       max_rounds: int = DEFAULT_MAX_ROUNDS) -> LpSolution:
    if pipeline not in PIPELINES:
        raise StageError("lp-build", f"unknown pipeline {pipeline!r}")
    if pipeline in JOB_OBJECTIVE:
        if pipeline == "job_weighted" and not instance.jobs:
            raise StageError("lp-build", "job_weighted pipeline needs a job grouping")
    elif instance.mode != pipeline:
        raise StageError("lp-build", f"instance mode {instance.mode!r} does not match pipeline {pipeline!r}")
    try:
        problem = build_lp(instance)
        if pipeline in JOB_OBJECTIVE:
            problem = add_job_layer(problem, instance, JOB_OBJECTIVE[pipeline])
    except LpBuildError as e:
        raise StageError("lp-build", str(e)) from e
    try:
        return solve_with_cutting_plane(problem, backend, tolerance, max_rounds)
    except Exception as e:  # backend failures are internal errors
        raise StageError("lp-solve", str(e)) from e


def pipeline_cost(report: ScheduleReport, pipeline: str) -> Fraction:
    if pipeline == "job_weighted":
        return report.weighted_job_cost or Fraction(0)
    if pipeline == "job_makespan":
        return Fraction(report.makespan)
    return report.weighted_cost


def run_pipeline(instance: Instance, pipeline: str | None = None, *, instance_id: str = "",
                 backend=None, tolerance: float = DEFAULT_TOLERANCE,
                 max_rounds: int = DEFAULT_MAX_ROUNDS, preempt: bool = True) -> RunResult:
    pipeline = pipeline or instance.mode
    report = validate(instance)
    if not report.ok:
        raise StageError("validate", "; ".join(report.violations))
    lp = solve_for_pipeline(instance, pipeline, backend, tolerance, max_rounds)
    try:
        assignment, priority = dispatch(instance, lp)
    except Exception as e:
        raise StageError("schedule", str(e)) from e
    try:
        schedule, sreport = simulate(instance, assignment, priority, preempt=preempt)
    except Exception as e:
        raise StageError("simulate", str(e)) from e
    feas = verify_schedule(instance, schedule)
    ratio = RatioCheckResult(
        instance_id=instance_id,
        mode=instance.mode if pipeline not in JOB_OBJECTIVE else f"{instance.mode}/{pipeline}",
        num_cores=instance.num_cores,
        num_ports=instance.num_ports,
        num_coflows=len(instance.coflows),
        mu=longest_path_mu(instance),
        lp_objective=float(lp.objective),
        alg_cost=pipeline_cost(sreport, pipeline),
        constant=theorem_constant(instance.mode, instance.num_cores, instance.all_releases_zero()),
    )
    return RunResult(instance, pipeline, lp, assignment, priority, schedule, sreport, feas, ratio)
