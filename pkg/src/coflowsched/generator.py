"""Seeded random instance generation."""

from __future__ import annotations

import random
from dataclasses import asdict, dataclass, fields
from fractions import Fraction

from .instance import MODES, CoflowSpec, FlowSpec, Instance, JobSpec, ensure_valid

SHAPES = ("none", "chain", "random_dag")


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 0
    num_ports: int = 4
    num_cores: int = 2
    num_coflows: int = 5
    mode: str = "divisible"
    density: float = 0.4
    size_lo: int = 1
    size_hi: int = 5
    release_max: int = 0
    weight_lo: int = 1
    weight_hi: int = 3
    precedence: str = "none"
    dag_prob: float = 0.3
    num_jobs: int | None = None

    def check(self) -> None:
        problems = []
        if self.mode not in MODES:
            problems.append(f"unknown mode {self.mode!r}")
        if self.mode == "single_core" and self.num_cores != 1:
            problems.append("single_core mode requires num_cores = 1")
        if self.num_ports < 1 or self.num_cores < 1 or self.num_coflows < 0:
            problems.append("num_ports and num_cores must be >= 1, num_coflows >= 0")
        if not 0 < self.density <= 1:
            problems.append(f"density must be in (0, 1], got {self.density}")
        if not 1 <= self.size_lo <= self.size_hi:
            problems.append(f"size range [{self.size_lo}, {self.size_hi}] invalid")
        if self.release_max < 0:
            problems.append("release_max must be >= 0")
        if not 0 <= self.weight_lo <= self.weight_hi:
            problems.append(f"weight range [{self.weight_lo}, {self.weight_hi}] invalid")
        if self.precedence not in SHAPES:
            problems.append(f"unknown precedence shape {self.precedence!r}")
        if not 0 <= self.dag_prob <= 1:
            problems.append("dag_prob must be in [0, 1]")
        if self.num_jobs is not None and not 1 <= self.num_jobs <= max(1, self.num_coflows):
            problems.append(f"num_jobs must be in [1, num_coflows], got {self.num_jobs}")
        if problems:
            raise ValueError("; ".join(problems))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown generator fields: {sorted(unknown)}")
        return cls(**d)


def generate(config: GeneratorConfig) -> Instance:
    config.check()
    rng = random.Random(config.seed)
    n = config.num_ports
    pairs = [(i, j) for i in range(n) for j in range(n)]
    coflows = []
    for k in range(config.num_coflows):
        chosen = [p for p in pairs if rng.random() < config.density]
        if not chosen:
            chosen = [rng.choice(pairs)]
        flows = [FlowSpec(i, j, rng.randint(config.size_lo, config.size_hi)) for i, j in chosen]
        if config.precedence == "chain":
            preds = [k - 1] if k > 0 else []
        elif config.precedence == "random_dag":
            preds = [a for a in range(k) if rng.random() < config.dag_prob]
        else:
            preds = []
        coflows.append(CoflowSpec(
            id=k,
            weight=Fraction(rng.randint(config.weight_lo, config.weight_hi)),
            release=rng.randint(0, config.release_max),
            flows=flows,
            predecessors=preds,
        ))
    jobs = None
    if config.num_jobs:
        # contiguous blocks of coflow ids, each nonempty
        cuts = sorted(rng.sample(range(1, config.num_coflows), config.num_jobs - 1))
        bounds = [0] + cuts + [config.num_coflows]
        jobs = [JobSpec(t, Fraction(rng.randint(config.weight_lo, config.weight_hi)),
                        list(range(bounds[t], bounds[t + 1])))
                for t in range(config.num_jobs)]
    return ensure_valid(Instance(n, config.num_cores, coflows, config.mode, jobs))
