"""Batch ratio benchmarking and the seeded corpora behind it."""

from __future__ import annotations

import csv
import io
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction

from .generator import SHAPES, GeneratorConfig, generate
from .pipeline import RatioCheckResult, StageError, run_pipeline

CSV_COLUMNS = ("instance_id", "mode", "m", "N", "|K|", "mu", "lp_obj", "alg_cost", "ratio", "bound", "pass")


def corpus_config(seed: int, mode: str, zero_release: bool, num_jobs: int | None = None,
                  max_ports: int = 6, max_coflows: int = 8) -> GeneratorConfig:
    """Desk-scale instance shape drawn deterministically from ``seed``."""
    rng = random.Random(f"{mode}:{zero_release}:{num_jobs}:{seed}")
    k = rng.randint(max(2, num_jobs or 0), max_coflows)
    return GeneratorConfig(
        seed=seed,
        num_ports=rng.randint(2, max_ports),
        num_cores=1 if mode == "single_core" else rng.choice((1, 2, 3)),
        num_coflows=k,
        mode=mode,
        density=rng.choice((0.15, 0.3, 0.5)),
        size_lo=1,
        size_hi=rng.choice((3, 6, 10)),
        release_max=0 if zero_release else rng.choice((5, 15, 30)),
        weight_lo=1,
        weight_hi=rng.choice((1, 5)),
        precedence=SHAPES[seed % len(SHAPES)],
        dag_prob=rng.choice((0.2, 0.4)),
        num_jobs=num_jobs,
    )


@dataclass
class Cell:
    name: str
    pipelines: list[str]
    configs: list[GeneratorConfig]


def cells_from_dict(doc: dict, seed_offset: int = 0) -> list[Cell]:
    """Bench config: ``{"cells": [{"name", "pipelines", "seeds": [start, count], "generator": {...}}]}``.

    A cell may instead give ``"corpus": {"mode", "zero_release", "num_jobs"}``
    to draw per-seed shapes with :func:`corpus_config`.
    """
    cells = []
    for c in doc.get("cells", []):
        start, count = c.get("seeds", [0, 1])
        start += seed_offset
        if "corpus" in c:
            spec = c["corpus"]
            configs = [corpus_config(s, spec["mode"], spec.get("zero_release", False), spec.get("num_jobs"))
                       for s in range(start, start + count)]
        else:
            base = GeneratorConfig.from_dict(c.get("generator", {}))
            configs = [replace(base, seed=s) for s in range(start, start + count)]
        pipelines = c.get("pipelines") or [configs[0].mode if configs else "divisible"]
        cells.append(Cell(c.get("name", f"cell{len(cells)}"), pipelines, configs))
    return cells


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def result_row(r: RatioCheckResult) -> list[str]:
    return [r.instance_id, r.mode, str(r.num_cores), str(r.num_ports), str(r.num_coflows), str(r.mu),
            _fmt(r.lp_objective), str(r.alg_cost), _fmt(r.ratio), str(r.bound), str(r.passed).lower()]


def _run_one(task: tuple) -> list[str]:
    instance_id, config, pipeline, kwargs = task
    try:
        inst = generate(config)
        return result_row(run_pipeline(inst, pipeline, instance_id=instance_id, **kwargs).ratio)
    except (StageError, ValueError) as e:
        stage = getattr(e, "stage", "generate")
        return [instance_id, f"{config.mode}/{pipeline}", str(config.num_cores), str(config.num_ports),
                str(config.num_coflows), "", "", "", "", "", f"error:{stage}"]


def run_cells(cells: list[Cell], workers: int = 1, **kwargs) -> list[list[str]]:
    tasks = [(f"{cell.name}/s{cfg.seed}/{pipe}", cfg, pipe, kwargs)
             for cell in cells for cfg in cell.configs for pipe in cell.pipelines]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_run_one, tasks, chunksize=4))
    return [_run_one(t) for t in tasks]


def rows_to_csv(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    w.writerows(rows)
    return buf.getvalue()


def worst_per_cell(cells: list[Cell], rows: list[list[str]]) -> dict[str, tuple[float, float, int, int]]:
    """cell name -> (worst ratio, worst ratio / bound, failures, rows)."""
    out = {}
    for cell in cells:
        mine = [r for r in rows if r[0].startswith(cell.name + "/")]
        worst = worst_norm = 0.0
        fails = 0
        for r in mine:
            if r[-1] != "true":
                fails += 1
            if r[8] and Fraction(r[9]) > 0:
                worst = max(worst, float(r[8]))
                worst_norm = max(worst_norm, float(r[8]) / float(Fraction(r[9])))
        out[cell.name] = (worst, worst_norm, fails, len(mine))
    return out
