"""LP-guided list scheduling of coflows with precedence constraints on identical parallel networks."""

from .instance import (
    CoflowSpec,
    FlowSpec,
    Instance,
    JobSpec,
    longest_path_mu,
    port_loads,
    read_instance,
    validate,
    write_instance,
)
from .lp import (
    add_job_layer,
    build_divisible_lp,
    build_indivisible_lp,
    build_lp,
    build_single_core_lp,
    separate_prefix_violations,
    solve_with_cutting_plane,
)
from .pipeline import run_pipeline, theorem_constant
from .schedulers import (
    assign_cores_coflow_driven,
    assign_cores_flow_driven,
    order_single_core,
    schedule_multistage,
)
from .simulator import simulate, verify_schedule

__all__ = [
    "CoflowSpec", "FlowSpec", "Instance", "JobSpec", "longest_path_mu", "port_loads",
    "read_instance", "validate", "write_instance", "add_job_layer", "build_divisible_lp",
    "build_indivisible_lp", "build_lp", "build_single_core_lp", "separate_prefix_violations",
    "solve_with_cutting_plane", "run_pipeline", "theorem_constant", "assign_cores_coflow_driven",
    "assign_cores_flow_driven", "order_single_core", "schedule_multistage", "simulate",
    "verify_schedule",
]
