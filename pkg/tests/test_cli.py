import csv
import io
import json

import numpy as np
import pytest

from physnet.cli import main


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


TWO_CYCLE = {"n": 2, "edges": [{"tail": 1, "head": 2, "weight": 2.0},
                               {"tail": 2, "head": 1, "weight": 3.0}]}
SINGLE = {"n": 2, "edges": [{"tail": 1, "head": 2}]}


def test_analyze_two_cycle(tmp_path, capsys):
    code, out, _ = run(capsys, "analyze", "-i", write(tmp_path, "g.json", TWO_CYCLE))
    assert code == 0
    rep = json.loads(out)
    assert rep["sigma"] == [3.0, 2.0]
    assert rep["balanced"] is False and rep["balanceable"] is True
    assert rep["strongly_connected"] is True
    assert rep["weak_components"] == [[1, 2]]


def test_analyze_single_edge(tmp_path, capsys):
    path = write(tmp_path, "g.json", SINGLE)
    code, out, _ = run(capsys, "analyze", "-i", path)
    rep = json.loads(out)
    assert code == 0 and rep["strongly_connected"] is False
    assert 0.0 in rep["sigma"]
    code, _, _ = run(capsys, "analyze", "-i", path, "--require-balanceable")
    assert code == 3


def test_analyze_consensus_value(tmp_path, capsys):
    g = {"n": 2, "edges": [{"tail": 2, "head": 1}]}
    code, out, _ = run(capsys, "analyze", "--kind", "consensus", "--x0", "0,3",
                       "-i", write(tmp_path, "g.json", g))
    assert code == 0 and json.loads(out)["consensus_value"] == 3.0


def test_malformed_json(tmp_path, capsys):
    code, _, err = run(capsys, "analyze", "-i", write(tmp_path, "g.json", '{"n": 2, "edges": ['))
    assert code == 2 and "line 1" in err


def test_schema_violation_names_field(tmp_path, capsys):
    bad = {"n": 2, "edges": [{"tail": 1, "head": 2, "weight": -1}]}
    code, _, err = run(capsys, "analyze", "-i", write(tmp_path, "g.json", bad))
    assert code == 2 and "edges[0].weight" in err


def test_bad_vertex_index(tmp_path, capsys):
    bad = {"n": 2, "edges": [{"tail": 1, "head": 5}]}
    code, _, err = run(capsys, "laplacian", "-i", write(tmp_path, "g.json", bad))
    assert code == 2 and "edges" in err


def test_missing_file(capsys):
    assert run(capsys, "analyze", "-i", "/nonexistent/g.json")[0] == 2


def test_laplacian_round_trip(tmp_path, capsys):
    g = {"n": 3, "edges": [{"tail": 1, "head": 2, "weight": 0.1},
                           {"tail": 2, "head": 3, "weight": 1 / 3},
                           {"tail": 3, "head": 1, "weight": np.pi}]}
    path = write(tmp_path, "g.json", g)
    code, out, _ = run(capsys, "laplacian", "--kind", "flow", "-i", path)
    assert code == 0
    entries = np.array(json.loads(out)["entries"])
    from physnet import flow_laplacian, graph_from_dict
    ref = flow_laplacian(graph_from_dict(g)).entries
    assert (entries == ref).all()
    # re-emitting through a matrix file is byte-identical
    _, out2, _ = run(capsys, "laplacian", "--kind", "flow", "-i", path)
    assert out2 == out


def test_balance_round_trip_and_determinism(tmp_path, capsys):
    g = {"n": 3, "edges": [{"tail": 1, "head": 2, "weight": 0.7},
                           {"tail": 2, "head": 3, "weight": 1.3},
                           {"tail": 3, "head": 1, "weight": 2.9},
                           {"tail": 2, "head": 1, "weight": 0.3}]}
    path = write(tmp_path, "g.json", g)
    outs = [run(capsys, "balance", "-i", path, "--jobs", str(j))[1] for j in (1, 4)]
    assert outs[0] == outs[1]
    data = json.loads(outs[0])
    Lb = np.array(data["entries"])
    from physnet import balance, flow_laplacian, graph_from_dict
    assert (Lb == balance(flow_laplacian(graph_from_dict(g)))[0].entries).all()
    assert np.abs(Lb.sum(axis=1)).max() < 1e-12


def test_balance_not_strong(tmp_path, capsys):
    assert run(capsys, "balance", "-i", write(tmp_path, "g.json", SINGLE))[0] == 3


def test_sigma_output_file(tmp_path, capsys):
    out = tmp_path / "s.json"
    code, stdout, _ = run(capsys, "sigma", "-i", write(tmp_path, "g.json", TWO_CYCLE),
                          "-o", str(out))
    assert code == 0 and stdout == ""
    assert json.loads(out.read_text())["sigma"] == [3.0, 2.0]


def _csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array(rows[1:], dtype=float)


def test_simulate_mass_damper(tmp_path, capsys):
    system = {"laplacian": {"kind": "symmetric", "graph": {"n": 2, "edges": [{"tail": 1, "head": 2}]}},
              "hamiltonian": {"kind": "kinetic", "params": {"masses": [1.0, 2.0]}},
              "x0": [1.0, -1.0], "dt": 0.01, "T": 40.0}
    code, out, err = run(capsys, "simulate", "-i", write(tmp_path, "s.json", system))
    assert code == 0
    header, data = _csv(out)
    assert header == ["t", "x1", "x2", "H", "conserved", "dissipation_rate"]
    v = data[-1, 1:3] / [1.0, 2.0]
    assert abs(v[0] - v[1]) <= 1e-6
    summary = json.loads(err.strip().splitlines()[-1])
    assert summary["conserved_drift"] <= 1e-8
    assert summary["total_dissipated"] == pytest.approx(-summary["energy_change"], rel=1e-4)


def test_simulate_leader_follower(tmp_path, capsys):
    system = {"laplacian": {"kind": "consensus", "graph": {"n": 2, "edges": [{"tail": 2, "head": 1}]}},
              "hamiltonian": {"kind": "quadratic"}, "x0": [0.0, 5.0], "dt": 0.01, "T": 30.0}
    code, out, _ = run(capsys, "simulate", "-i", write(tmp_path, "s.json", system))
    _, data = _csv(out)
    assert code == 0 and abs(data[-1, 1] - 5.0) <= 1e-6 and (data[:, 2] == 5.0).all()


def test_simulate_zero_laplacian(tmp_path, capsys):
    system = {"laplacian": {"kind": "symmetric", "entries": [[0.0, 0.0], [0.0, 0.0]]},
              "hamiltonian": {"kind": "quadratic"}, "x0": [1.5, 2.5], "dt": 0.5, "T": 2.0}
    out_csv = tmp_path / "t.csv"
    code, stdout, _ = run(capsys, "simulate", "-i", write(tmp_path, "s.json", system),
                          "-o", str(out_csv))
    assert code == 0
    assert json.loads(stdout)["final_state"] == [1.5, 2.5]
    _, data = _csv(out_csv.read_text())
    assert (data[:, 1:3] == [1.5, 2.5]).all() and len(data) == 5


def test_simulate_nonfinite_exit4_keeps_partial(tmp_path, capsys):
    # anti-Laplacian: the exponential energy blows up
    system = {"laplacian": {"kind": "flow", "entries": [[-1.0, 1.0], [1.0, -1.0]]},
              "hamiltonian": {"kind": "exponential"}, "x0": [3.0, 0.0], "dt": 0.1, "T": 100.0}
    out_csv = tmp_path / "t.csv"
    code, _, _ = run(capsys, "simulate", "-i", write(tmp_path, "s.json", system),
                     "-o", str(out_csv))
    assert code == 4
    _, data = _csv(out_csv.read_text())
    assert len(data) >= 2 and np.isfinite(data[:, 1:3]).all()


def test_simulate_missing_field(tmp_path, capsys):
    code, _, err = run(capsys, "simulate", "-i", write(tmp_path, "s.json", {"x0": [1.0]}))
    assert code == 2 and "laplacian" in err


def test_consensus(tmp_path, capsys):
    g = {"n": 3, "edges": [{"tail": 1, "head": 2}, {"tail": 2, "head": 3}, {"tail": 3, "head": 1}]}
    code, out, _ = run(capsys, "consensus", "-i", write(tmp_path, "g.json", g),
                       "--x0", "1,2,6", "--T", "30", "--dt", "0.01")
    rep = json.loads(out)
    assert code == 0 and rep["consensus_value"] == pytest.approx(3.0)
    assert rep["max_deviation"] <= 1e-6


def test_consensus_no_spanning_tree(tmp_path, capsys):
    # vertex 1 follows two independent leaders
    g = {"n": 3, "edges": [{"tail": 2, "head": 1}, {"tail": 3, "head": 1}]}
    assert run(capsys, "consensus", "-i", write(tmp_path, "g.json", g), "--x0", "1,2,3")[0] == 3


def test_storage_quadratic(tmp_path, capsys):
    sys_ = {"hamiltonian": {"kind": "quadratic"}}
    code, out, _ = run(capsys, "storage", "-i", write(tmp_path, "s.json", sys_), "--x", "3,1")
    rep = json.loads(out)
    assert code == 0 and rep["value"] == 1.0
    assert rep["minimizer"] == [2.0, 2.0] and rep["lambda"] == 2.0


def test_storage_kinetic(tmp_path, capsys):
    sys_ = {"hamiltonian": {"kind": "kinetic", "params": {"masses": [1.0, 1.0]}}, "x": [1.0, -1.0]}
    code, out, _ = run(capsys, "storage", "-i", write(tmp_path, "s.json", sys_))
    assert code == 0 and json.loads(out)["value"] == pytest.approx(1.0)


def test_storage_uncontrollable(tmp_path, capsys):
    sys_ = {"hamiltonian": {"kind": "quadratic"},
            "graph": {"n": 4, "edges": [{"tail": 2, "head": 1}, {"tail": 2, "head": 3},
                                        {"tail": 2, "head": 4}]},
            "sources": [3], "x": [1.0, 0.0, 0.0, 0.0]}
    code, _, err = run(capsys, "storage", "-i", write(tmp_path, "s.json", sys_),
                       "--check-controllability")
    assert code == 5 and "NotControllable" in err


def test_storage_controllable_split(tmp_path, capsys):
    sys_ = {"hamiltonian": {"kind": "quadratic"},
            "graph": {"n": 4, "edges": [{"tail": 2, "head": 1, "weight": 1.0},
                                        {"tail": 2, "head": 3, "weight": 2.0},
                                        {"tail": 2, "head": 4}]},
            "sources": [3], "x": [1.0, 0.0, 0.0, 0.0]}
    code, out, _ = run(capsys, "storage", "-i", write(tmp_path, "s.json", sys_),
                       "--check-controllability")
    rep = json.loads(out)
    assert code == 0 and rep["controllable"] is True
    assert rep["value"] == pytest.approx(0.375)


def test_storage_no_inverse(tmp_path, capsys):
    sys_ = {"hamiltonian": {"kind": "polynomial", "params": {"coefficients": [0, 0, 1, 0, 1]}},
            "x": [1.0, 0.0]}
    path = write(tmp_path, "s.json", sys_)
    code, _, err = run(capsys, "storage", "-i", path)
    assert code == 6 and "numeric" in err
    code, out, _ = run(capsys, "storage", "-i", path, "--numeric-inverse")
    assert code == 0 and json.loads(out)["minimizer"] == pytest.approx([0.5, 0.5])


def _complex_dict(c):
    return c.to_dict()


def test_complex_validate(tmp_path, capsys, triangle):
    code, out, _ = run(capsys, "complex", "validate",
                       "-i", write(tmp_path, "c.json", _complex_dict(triangle)))
    rep = json.loads(out)
    assert code == 0 and rep["valid"] is True and rep["cells"] == [3, 3, 1]
    broken = _complex_dict(triangle)
    broken["boundaries"]["d2"][0][0] *= -1
    code, out, _ = run(capsys, "complex", "validate", "-i", write(tmp_path, "b.json", broken))
    assert code == 3 and json.loads(out)["valid"] is False


def test_complex_bad_shape(tmp_path, capsys):
    bad = {"cells": [3, 3, 1], "boundaries": {"d1": [[1, 0]], "d2": [[1], [1], [1]]}}
    assert run(capsys, "complex", "validate", "-i", write(tmp_path, "c.json", bad))[0] == 2


def test_complex_simulate(tmp_path, capsys, tetrahedron):
    system = {"complex": _complex_dict(tetrahedron), "conduction": 1.0,
              "u0": [1.0, 2.0, 3.0, 4.0], "dt": 0.05, "T": 5.0}
    code, out, err = run(capsys, "complex", "simulate", "-i", write(tmp_path, "h.json", system))
    assert code == 0
    header, data = _csv(out)
    assert header[-3:] == ["entropy", "energy", "entropy_rate"]
    assert (np.diff(data[:, -3]) >= -1e-12).all()
    summary = json.loads(err.strip().splitlines()[-1])
    assert summary["energy_drift"] <= 1e-8 and summary["entropy_increase"] > 0


def test_complex_simulate_out_of_domain(tmp_path, capsys, tetrahedron):
    system = {"complex": _complex_dict(tetrahedron), "u0": [1.0, -2.0, 3.0, 4.0], "T": 1.0}
    assert run(capsys, "complex", "simulate", "-i", write(tmp_path, "h.json", system))[0] == 4


def test_module_entry_point():
    import subprocess
    import sys
    res = subprocess.run([sys.executable, "-m", "physnet", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "analyze" in res.stdout
