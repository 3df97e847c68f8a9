import csv
import io
import json
from pathlib import Path

import pytest

from coflowsched.cli import main
from coflowsched.generator import GeneratorConfig, generate
from coflowsched.instance import longest_path_mu, read_instance, write_instance

DATA = Path(__file__).parent / "data"


def test_generator_is_seeded():
    cfg = GeneratorConfig(seed=5, num_ports=4, num_cores=2, num_coflows=6, precedence="random_dag", release_max=9)
    assert write_instance(generate(cfg)) == write_instance(generate(cfg))
    assert write_instance(generate(cfg)) != write_instance(generate(GeneratorConfig(**{**cfg.to_dict(), "seed": 6})))


@pytest.mark.parametrize("shape, mu", [("none", 1), ("chain", 7)])
def test_generator_shapes(shape, mu):
    inst = generate(GeneratorConfig(seed=1, num_coflows=7, precedence=shape))
    assert longest_path_mu(inst) == mu
    assert all(c.flows for c in inst.coflows)


def test_generator_jobs_partition_coflows():
    inst = generate(GeneratorConfig(seed=3, num_coflows=8, num_jobs=3))
    members = [k for j in inst.jobs for k in j.coflows]
    assert sorted(members) == list(range(8)) and all(j.coflows for j in inst.jobs)


@pytest.mark.parametrize("kw", [
    {"num_ports": 0}, {"size_lo": 0}, {"size_lo": 5, "size_hi": 2}, {"density": 1.5},
    {"precedence": "tree"}, {"mode": "single_core", "num_cores": 2}, {"num_jobs": 9, "num_coflows": 3},
])
def test_generator_rejects_bad_config(kw):
    with pytest.raises(ValueError):
        generate(GeneratorConfig(**kw))


def test_generator_config_from_dict_is_strict():
    with pytest.raises(ValueError):
        GeneratorConfig.from_dict({"sede": 1})
    cfg = GeneratorConfig(seed=4, mode="indivisible")
    assert GeneratorConfig.from_dict(cfg.to_dict()) == cfg


# --- CLI -----------------------------------------------------------------------

def test_cli_gen_matches_golden(tmp_path):
    out = tmp_path / "g.json"
    rc = main(["gen", "--seed", "7", "--mode", "indivisible", "--ports", "3", "--cores", "2", "--coflows", "4",
               "--precedence", "random_dag", "--release-max", "3", "--out", str(out)])
    assert rc == 0
    assert out.read_bytes() == (DATA / "gen_seed7.json").read_bytes()


def test_cli_run_matches_golden(tmp_path):
    out = tmp_path / "r.json"
    assert main(["run", str(DATA / "gen_seed7.json"), "--out", str(out)]) == 0
    got, want = json.loads(out.read_text()), json.loads((DATA / "gen_seed7_report.json").read_text())
    for key in ("assignment", "priority", "schedule", "report", "feasibility"):
        assert got[key] == want[key], key
    assert got["ratio_check"]["lp_obj"] == pytest.approx(want["ratio_check"]["lp_obj"], rel=1e-9)
    assert got["ratio_check"]["pass"]


def test_cli_run_trivial_instance(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["run", str(DATA / "pair.json"), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["ratio_check"]["ratio"] == pytest.approx(1)
    assert doc["report"]["weighted_cost"] == "4"
    for backend in ("simplex", "simplex-exact"):
        assert main(["run", str(DATA / "pair.json"), "--backend", backend, "--out", str(out)]) == 0
        assert json.loads(out.read_text())["ratio_check"]["lp_obj"] == pytest.approx(4)


def test_cli_verify_round_trip(tmp_path, capsys):
    out = tmp_path / "r.json"
    main(["run", str(DATA / "gen_seed7.json"), "--out", str(out)])
    capsys.readouterr()
    assert main(["verify", str(DATA / "gen_seed7.json"), str(out)]) == 0
    assert "feasible" in capsys.readouterr().out
    doc = json.loads(out.read_text())
    first = doc["schedule"][0]
    first["intervals"] = [[first["intervals"][0][0], first["intervals"][0][1] - 1]]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc["schedule"]))
    assert main(["verify", str(DATA / "gen_seed7.json"), str(bad)]) == 3
    assert "check 4" in capsys.readouterr().out


def test_cli_mode_mismatch_is_lp_build_error(capsys):
    assert main(["run", str(DATA / "pair.json"), "--pipeline", "divisible"]) == 2
    assert "lp-build" in capsys.readouterr().err


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"num_ports": 1}')
    assert main(["run", str(bad)]) == 1
    cyclic = tmp_path / "cyc.json"
    cyclic.write_text(json.dumps({"num_ports": 1, "num_cores": 1, "mode": "single_core", "coflows": [
        {"id": 0, "predecessors": [1], "flows": [{"src": 0, "dst": 0, "size": 1}]},
        {"id": 1, "predecessors": [0], "flows": [{"src": 0, "dst": 0, "size": 1}]}]}))
    assert main(["run", str(cyclic)]) == 2
    assert "validate" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.json")]) == 1
    assert main(["frobnicate"]) == 1


def _bench(tmp_path, cells, *extra):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"cells": cells}))
    out = tmp_path / "out"
    rc = main(["bench", str(cfg), "--out", str(out), *extra])
    text = (out / "bench.csv").read_text()
    return rc, text, list(csv.DictReader(io.StringIO(text)))


def test_cli_bench_single_core(tmp_path):
    rc, _, rows = _bench(tmp_path, [{"name": "sc", "seeds": [0, 10],
                                     "generator": {"mode": "single_core", "num_cores": 1, "num_coflows": 4}}])
    assert rc == 0 and len(rows) == 10
    assert all(r["pass"] == "true" and r["mode"] == "single_core" for r in rows)


def test_cli_bench_empty_config(tmp_path):
    rc, text, rows = _bench(tmp_path, [])
    assert rc == 0 and rows == []
    assert text.strip() == "instance_id,mode,m,N,|K|,mu,lp_obj,alg_cost,ratio,bound,pass"


def test_cli_bench_mixed_modes_and_determinism(tmp_path):
    cells = [{"name": "div", "seeds": [0, 4], "corpus": {"mode": "divisible", "zero_release": True}},
             {"name": "ind", "seeds": [0, 4], "corpus": {"mode": "indivisible", "zero_release": False}},
             {"name": "jobs", "seeds": [0, 3], "pipelines": ["job_weighted", "job_makespan"],
              "corpus": {"mode": "indivisible", "zero_release": True, "num_jobs": 2}}]
    rc, text, rows = _bench(tmp_path, cells)
    assert rc == 0
    modes = [r["mode"] for r in rows]
    assert modes.count("divisible") == 4 and modes.count("indivisible") == 4
    assert modes.count("indivisible/job_weighted") == 3 and modes.count("indivisible/job_makespan") == 3
    _, again, _ = _bench(tmp_path, cells, "--workers", "2")
    assert again == text
