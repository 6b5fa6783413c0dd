from __future__ import annotations

import csv
import io
import json

import pytest

from corpus import fixture_codes
from sparsicode import InvalidInput
from sparsicode import io as jio
from sparsicode.cli import main
from sparsicode.code import BinaryCode, chain_length_exact, nrd_exact, staircase_chain, staircase_code
from sparsicode.csp import CspInstance, predicate_catalog
from sparsicode.ensemble import construct_3lin
from sparsicode.entropy import CodeDistribution, CoordinateDistribution, decompose
from sparsicode.sparsify import WeightMap, chain_adversarial_weights


# JSON round trips


@pytest.mark.parametrize("name", sorted(fixture_codes()))
def test_code_round_trip(name):
    code = fixture_codes()[name]
    assert jio.code_from_json(json.loads(jio.dumps(jio.code_to_json(code)))) == code


def test_code_json_uses_leftmost_coordinate_zero():
    data = jio.code_to_json(BinaryCode.from_strings(["100"]))
    assert data == {"length": 3, "codewords": ["100"]}


def test_witness_and_chain_round_trip():
    code = fixture_codes()["triangle-pairs"]
    w = nrd_exact(code).witness
    assert jio.nrd_witness_from_json(jio.nrd_witness_to_json(w, 3)) == w
    ch = chain_length_exact(code).witness
    assert jio.chain_from_json(jio.chain_to_json(ch, 3)) == ch


def test_weights_round_trip_and_list_form():
    w = WeightMap(4, {0: 1.5, 3: 2.0})
    back = jio.weights_from_json(jio.weights_to_json(w))
    assert (back.length, back.weights) == (4, {0: 1.5, 3: 2.0})
    listed = jio.weights_from_json({"length": 4, "weights": [1.5, 0, 0, 2.0]})
    assert (listed.length, listed.weights) == (4, {0: 1.5, 3: 2.0})


def test_distribution_round_trips():
    d = CodeDistribution(2, {1: 0.25, 3: 0.75})
    assert jio.code_distribution_from_json(jio.code_distribution_to_json(d)).atoms == d.atoms
    c = CoordinateDistribution(3, {0: 0.5, 2: 0.5})
    assert jio.coordinate_distribution_from_json(jio.coordinate_distribution_to_json(c)).atoms == c.atoms


def test_predicate_instance_ensemble_round_trip():
    pred = predicate_catalog("bck")
    assert jio.predicate_from_json(jio.predicate_to_json(pred)) == pred
    inst = CspInstance(4, ((0, 1, 2), (1, 2, 3)))
    assert jio.instance_from_json(jio.instance_to_json(inst)) == inst
    ens = construct_3lin(5, 2)
    assert jio.ensemble_from_json(json.loads(jio.dumps(jio.ensemble_to_json(ens)))) == ens


def test_decomposition_serializes():
    code = BinaryCode(48, frozenset(staircase_code(48).codewords))
    dec = decompose(code, d=2, lam=3, seed=0, nrd=1)
    data = json.loads(jio.dumps(jio.decomposition_to_json(dec)))
    assert data["case"] == "loop" and data["indices"] == [0, 1]


def test_malformed_json_rejected(tmp_path):
    assert jio.code_from_json({"codewords": ["01"]}).length == 2
    with pytest.raises(InvalidInput):
        jio.code_from_json({"codewords": []})
    with pytest.raises(InvalidInput):
        jio.instance_from_json({"n": 2})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InvalidInput):
        jio.load_json(str(bad))


# CLI


def _write(path, obj) -> str:
    path.write_text(jio.dumps(obj))
    return str(path)


def _run(argv, capsys) -> tuple[int, str]:
    code = main(argv)
    return code, capsys.readouterr().out


@pytest.fixture
def triangle(tmp_path):
    return _write(tmp_path / "tri.json", jio.code_to_json(fixture_codes()["triangle-pairs"]))


def test_cli_nrd_example(triangle, capsys):
    status, out = _run(["nrd", "--code", triangle], capsys)
    data = json.loads(out)
    assert status == 0 and data["nrd"] == 2 and data["exact"]


def test_cli_code_queries(triangle, capsys):
    assert json.loads(_run(["cl", "--code", triangle], capsys)[1])["cl"] == 2
    assert json.loads(_run(["vc", "--code", triangle], capsys)[1])["vc"] == 1
    closure = json.loads(_run(["or-closure", "--code", triangle], capsys)[1])
    assert closure["codewords"] == ["000", "011", "101", "110", "111"]
    hs = json.loads(_run(["hitting-set", "--code", triangle], capsys)[1])
    assert hs["size"] == 2


def test_cli_nrd_budget_exit(tmp_path, capsys):
    path = _write(tmp_path / "id.json", jio.code_to_json(fixture_codes()["identity-6"]))
    status, _ = _run(["nrd", "--code", path, "--cap", "3"], capsys)
    assert status == 2
    status, out = _run(["nrd", "--code", path, "--cap", "3", "--allow-bound"], capsys)
    assert status == 2 and json.loads(out)["upper_bound"] >= 6


@pytest.mark.parametrize("method", ["simple", "entropy"])
def test_cli_sparsify_embeds_report(triangle, capsys, method):
    status, out = _run(["sparsify", "--code", triangle, "--eps", "0.5", "--method", method, "--seed", "7"], capsys)
    data = json.loads(out)
    assert status == 0 and data["report"]["valid"]
    assert data["meta"]["rng"] == "numpy.PCG64" and data["meta"]["seed"] == 7


def test_cli_sparsify_trace(triangle, capsys):
    _, out = _run(["sparsify", "--code", triangle, "--eps", "0.5", "--trace"], capsys)
    assert "trace" in json.loads(out)


def test_cli_verify_exit_codes(tmp_path, triangle, capsys):
    good = _write(tmp_path / "good.json", jio.weights_to_json(WeightMap.ones(3)))
    bad = _write(tmp_path / "bad.json", jio.weights_to_json(WeightMap(3, {0: 1.0})))
    assert _run(["verify", "--code", triangle, "--weights", good, "--eps", "0.1"], capsys)[0] == 0
    status, out = _run(["verify", "--code", triangle, "--weights", bad, "--eps", "0.1"], capsys)
    assert status == 3 and not json.loads(out)["valid"]


def test_cli_verify_accepts_sparsify_output(tmp_path, triangle, capsys):
    out = tmp_path / "s.json"
    assert main(["sparsify", "--code", triangle, "--eps", "0.5", "-o", str(out)]) == 0
    assert _run(["verify", "--code", triangle, "--weights", str(out), "--eps", "0.5"], capsys)[0] == 0


def test_cli_wsparsify_staircase(tmp_path, capsys):
    code = staircase_code(5)
    zeta = chain_adversarial_weights(code, staircase_chain(5), 0.5)
    c = _write(tmp_path / "c.json", jio.code_to_json(code))
    z = _write(tmp_path / "z.json", jio.weights_to_json(zeta))
    status, out = _run(["wsparsify", "--code", c, "--weights", z, "--eps", "0.5"], capsys)
    data = json.loads(out)
    assert status == 0 and len(data["weights"]["weights"]) == 5


def test_cli_invalid_inputs(tmp_path, triangle, capsys):
    assert main(["nrd", "--code", str(tmp_path / "missing.json")]) == 1
    assert main(["csp-nrd", "--predicate", "bogus", "--n", "3"]) == 1
    with pytest.raises(SystemExit):
        main(["sparsify", "--code", triangle, "--eps", "1.5"])
    capsys.readouterr()


def test_cli_csp_commands(tmp_path, capsys):
    assert json.loads(_run(["csp-nrd", "--predicate", "eq", "--n", "3"], capsys)[1])["nrd"] == 2
    assert json.loads(_run(["csp-cl", "--predicate", "eq", "--n", "3"], capsys)[1])["cl"] >= 3
    pred = _write(tmp_path / "p.json", jio.predicate_to_json(predicate_catalog("eq")))
    assert json.loads(_run(["csp-nrd", "--predicate", pred, "--n", "3"], capsys)[1])["nrd"] == 2
    inst = _write(tmp_path / "i.json", {"n": 3, "clauses": [[0, 1], [1, 2], [0, 2]]})
    code = json.loads(_run(["compile", "--instance", inst, "--predicate", "eq"], capsys)[1])
    assert code["codewords"] == ["001", "010", "100", "111"]
    ker = json.loads(_run(["kernelize", "--instance", inst, "--predicate", "eq"], capsys)[1])
    assert ker["removed"] == 1 and len(ker["clauses"]) == 2


def test_cli_gen_3lin_instance(capsys):
    data = json.loads(_run(["gen", "3lin-instance", "--p", "3", "--t", "2"], capsys)[1])
    assert data["n"] == 12 and len(data["clauses"]) == 8


def test_cli_gen_kinds(tmp_path, capsys):
    ens_path = tmp_path / "e.json"
    assert main(["gen", "ensemble", "--p", "5", "--t", "2", "-o", str(ens_path)]) == 0
    data = json.loads(_run(["ensemble-verify", "--ensemble", str(ens_path)], capsys)[1])
    assert data["valid"] and data["edges"] == 8
    assert json.loads(_run(["gen", "chain-code", "--m", "4"], capsys)[1])["length"] == 4
    rc = json.loads(_run(["gen", "random-code", "--m", "6", "--size", "5", "--seed", "3"], capsys)[1])
    assert len(rc["codewords"]) == 5
    gc = json.loads(_run(["gen", "group-code", "--moduli", "2", "--m", "3", "--generators", "1,1,0", "0,1,1"], capsys)[1])
    assert gc["codewords"] == ["000", "011", "101", "110"]
    assert len(json.loads(_run(["gen", "predicate", "--name", "3lin*:p=3"], capsys)[1])["tuples"]) == 8
    assert main(["gen", "predicate"]) == 1


def test_cli_ensemble_verify_detects_tampering(tmp_path, capsys):
    data = jio.ensemble_to_json(construct_3lin(3, 2))
    data["functionals"][0] = [0] * len(data["functionals"][0])
    path = _write(tmp_path / "bad.json", data)
    status, out = _run(["ensemble-verify", "--ensemble", path], capsys)
    assert status == 3 and json.loads(out)["violation"]["kind"] == "other-triple-killed"


def test_cli_bench_csv(capsys):
    status, out = _run(["bench", "--lengths", "5,6", "--size", "8", "--reps", "1", "--no-timing"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert status == 0 and len(rows) == 2
    assert all(int(r["nrd"]) <= int(r["cl"]) for r in rows)
    assert all(r["runtime"] == "" for r in rows)


def test_cli_determinism(triangle, tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}.json"
        main(["sparsify", "--code", triangle, "--eps", "0.1", "--method", "simple", "--seed", "11", "-o", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_cli_budget_env_var(triangle, monkeypatch, capsys):
    monkeypatch.setenv("SPARSICODE_BUDGET_MS", "nonsense")
    assert main(["nrd", "--code", triangle]) == 1
    capsys.readouterr()
