import json
import re
from pathlib import Path

import numpy as np
import pytest

from povmc import cli, serialize
from povmc.objects import DensityState, MeasurementSet, Povm, sandwich

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def strip_timestamp(text: str) -> str:
    return re.sub(r'"generated_at": "[^"]*"', '"generated_at": "X"', text)


def test_validate_fixture(capsys):
    code, out, _ = run(["validate", "--input", str(FIXTURES / "trine_povm.json")], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["ok"] is True


def test_validate_broken_object(tmp_path, capsys):
    doc = serialize.to_dict(MeasurementSet([Povm([np.eye(2) / 2, np.eye(2) / 2])]))
    doc["povms"][0][0][0][0] = [0.9, 0.0]  # detune an entry: normalization breaks
    p = tmp_path / "broken.json"
    p.write_text(json.dumps(doc))
    code, out, err = run(["validate", "--input", str(p)], capsys)
    assert code == 1


def test_jm_commuting_fixture(capsys):
    code, out, _ = run(["jm", "--input", str(FIXTURES / "commuting_pair.json")], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["feasible"] is True and doc["certified"] is True


def test_jm_incompatible_fixture(capsys):
    code, out, _ = run(["jm", "--input", str(FIXTURES / "xz_pair.json")], capsys)
    assert code == 0  # infeasibility with a witness is a definitive answer
    doc = json.loads(out)
    assert doc["feasible"] is False
    assert "witness" in doc


def test_robustness_fixture_anchor(capsys):
    code, out, _ = run(["robustness", "--input", str(FIXTURES / "xz_pair.json")], capsys)
    assert code == 0
    doc = json.loads(out)
    assert abs(doc["eta_star"] - 1 / np.sqrt(2)) < 1e-3


def test_steer_fixture(capsys):
    code, out, _ = run(["steer", "--input", str(FIXTURES / "steerable_assemblage.json")], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["unsteerable"] is False
    code, out, _ = run(["steer", "--input", str(FIXTURES / "product_assemblage.json")], capsys)
    doc = json.loads(out)
    assert doc["unsteerable"] is True


def test_compress_heuristic_exit_code(tmp_path, capsys):
    code, out, _ = run(["compress", "--input", str(FIXTURES / "steerable_assemblage.json"),
                        "--n", "2", "--seed", "7", "--restarts", "2"], capsys)
    assert code == 2  # heuristic answers never exit 0
    doc = json.loads(out)
    assert doc["heuristic"] is True
    assert doc["visibility"] >= 1.0 - 1e-6


def test_compress_requires_seed(capsys):
    with pytest.raises(SystemExit):
        cli.main(["compress", "--input", str(FIXTURES / "steerable_assemblage.json"), "--n", "1"])


def test_choi_round_trip(tmp_path, capsys):
    code, out, _ = run(["choi", "--input", str(FIXTURES / "measure_prepare_channel.json"),
                        "--direction", "kraus-to-choi"], capsys)
    assert code == 0
    doc = json.loads(out)
    choi_doc = doc["result"]
    p = tmp_path / "choi.json"
    p.write_text(json.dumps(choi_doc))
    code, out, _ = run(["choi", "--input", str(p), "--direction", "choi-to-kraus"], capsys)
    assert code == 0
    back = serialize.from_dict(json.loads(out)["result"])
    assert len(back.kraus_ops) == 2  # rank of the Choi state


def test_translate_jm_to_sim_and_back(tmp_path, capsys):
    code, out, _ = run(["jm", "--input", str(FIXTURES / "commuting_pair.json")], capsys)
    parent_doc = json.loads(out)["parent_model"]
    p = tmp_path / "parent.json"
    p.write_text(json.dumps(parent_doc))
    code, out, _ = run(["translate", "--input", str(p), "--direction", "jm-to-sim"], capsys)
    assert code == 0
    model_doc = json.loads(out)["result"]
    assert model_doc["rank_bound"] == 1
    q = tmp_path / "model.json"
    q.write_text(json.dumps(model_doc))
    code, out, _ = run(["translate", "--input", str(q), "--direction", "sim-to-jm"], capsys)
    assert code == 0


def test_translate_sim_to_prep_needs_sigma(tmp_path, capsys):
    code, out, err = run(["translate", "--input", str(FIXTURES / "commuting_pair.json"),
                          "--direction", "sim-to-prep"], capsys)
    assert code == 1
    assert "sigma" in err


def test_malformed_json_schema_pointer(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"schema": "povmc/1", "type": "povm"}')
    code, out, err = run(["validate", "--input", str(p)], capsys)
    assert code == 1
    assert "/effects" in err
    p.write_text('{"schema": "wrong/1", "type": "povm"}')
    code, _, err = run(["validate", "--input", str(p)], capsys)
    assert code == 1
    assert "/schema" in err
    p.write_text("{oops")
    code, _, err = run(["validate", "--input", str(p)], capsys)
    assert code == 1
    assert "line 1" in err


def test_wrong_type_refused(capsys):
    code, _, err = run(["jm", "--input", str(FIXTURES / "sigma_qubit.json")], capsys)
    assert code == 1
    assert "MeasurementSet" in err


def test_determinism_modulo_timestamp(tmp_path, capsys):
    argv = ["compress", "--input", str(FIXTURES / "steerable_assemblage.json"),
            "--n", "1", "--seed", "3", "--restarts", "2"]
    _, out1, _ = run(argv, capsys)
    _, out2, _ = run(argv, capsys)
    assert strip_timestamp(out1) == strip_timestamp(out2)


def test_cvscan_csv(capsys):
    code, out, _ = run(["cvscan", "--d-min", "2", "--d-max", "2", "--format", "csv"], capsys)
    assert code == 0  # no heuristic rows requested
    lines = out.strip().split("\n")
    assert lines[0].startswith("d,bins,eta_star")
    assert lines[1].startswith("2,8,")
    # deterministic byte-identical CSV
    _, out2, _ = run(["cvscan", "--d-min", "2", "--d-max", "2", "--format", "csv"], capsys)
    assert out == out2


def test_cvscan_heuristic_exit(capsys):
    code, out, _ = run(["cvscan", "--d-min", "2", "--d-max", "2",
                        "--seesaw-n-max", "2", "--restarts", "1"], capsys)
    assert code == 2
    doc = json.loads(out)
    assert any(c["cert_status"] == "heuristic" for c in doc["cells"])


def test_output_file(tmp_path, capsys):
    dest = tmp_path / "out.json"
    code, out, _ = run(["jm", "--input", str(FIXTURES / "commuting_pair.json"),
                        "--output", str(dest)], capsys)
    assert code == 0
    assert out == ""
    doc = json.loads(dest.read_text())
    assert doc["feasible"] is True
