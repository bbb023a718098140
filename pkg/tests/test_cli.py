"""End-to-end command-line checks, run in process through main()."""
from __future__ import annotations

import json

import numpy as np
import pytest

from projbalance import (
    PointCloud,
    builtin_design,
    closed_form_moments,
    haar_candidate_set,
    load_design,
    load_frame_json,
    loss_and_gradient,
    pareto_scan,
    save_cloud_csv,
    save_design,
    select,
)
from projbalance.atloss import (
    ATLossSpec,
    IdentityPolicy,
    stack_from_descriptors,
)
from projbalance.cli import main


@pytest.fixture
def cloud_csv(tmp_path):
    rng = np.random.default_rng(55)
    x = PointCloud(rng.standard_normal((12, 4)))
    path = tmp_path / "cloud.csv"
    save_cloud_csv(x, path)
    return path, x


def _run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_jl_check_json(capsys):
    code, out, err = _run(capsys, ["jl-check", "--m", "100", "--epsilon", "0.5"])
    assert code == 0 and err == ""
    obj = json.loads(out)
    assert obj == {"m": 100, "epsilon": 0.5, "k_min": 222}


def test_jl_check_with_tau(capsys):
    code, out, _ = _run(
        capsys, ["jl-check", "--m", "50", "--epsilon", "0.5", "--tau", "1.0"]
    )
    assert code == 0
    obj = json.loads(out)
    assert obj["k_min"] == 282 and obj["tau"] == 1.0


def test_jl_check_byte_determinism(capsys):
    _, out1, _ = _run(capsys, ["jl-check", "--m", "64", "--epsilon", "0.3"])
    _, out2, _ = _run(capsys, ["jl-check", "--m", "64", "--epsilon", "0.3"])
    assert out1 == out2


def test_moments_matches_library(capsys, cloud_csv):
    path, x = cloud_csv
    code, out, _ = _run(capsys, ["moments", "--data", str(path), "--k", "2"])
    assert code == 0
    obj = json.loads(out)
    cm = closed_form_moments(x, 2)
    assert obj["m"] == 12 and obj["d"] == 4 and obj["k"] == 2
    assert obj["e_tvar"] == cm.e_tvar
    assert obj["var_M"] == cm.var_M
    assert obj["corr_M_tvar"] == cm.corr_M_tvar
    assert obj["a_kd"] == cm.a_kd


def test_moments_rejects_duplicates_by_default(capsys, tmp_path):
    pts = np.array([[0.0, 1.0], [2.0, 3.0], [0.0, 1.0]])
    path = tmp_path / "dup.csv"
    save_cloud_csv(PointCloud(pts, on_coincident="drop"), path)
    code, out, err = _run(capsys, ["moments", "--data", str(path), "--k", "1"])
    assert code == 1 and out == ""
    obj = json.loads(err)
    assert obj["error"]["type"] == "DistinctPointsError"

    code, out, err = _run(
        capsys,
        ["moments", "--data", str(path), "--k", "1", "--on-coincident", "drop"],
    )
    assert code == 0 and err == ""
    assert json.loads(out)["m"] == 3


def test_scan_csv_shape_and_values(capsys, cloud_csv):
    path, x = cloud_csv
    argv = ["scan", "--data", str(path), "--k", "2", "--sample", "6", "--seed", "3"]
    code, out, _ = _run(capsys, argv)
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "index,tvar,M,V"
    assert len(lines) == 7
    table = pareto_scan(x, haar_candidate_set(2, 4, 6, 3))
    first = lines[1].split(",")
    assert int(first[0]) == 0
    assert float(first[1]) == pytest.approx(table[0, 0], rel=1e-15)
    assert float(first[2]) == pytest.approx(table[0, 1], rel=1e-15)

    code2, out2, _ = _run(capsys, argv)
    assert out2 == out


def test_scan_with_design_file(capsys, tmp_path):
    pts = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
    data = tmp_path / "tri.csv"
    save_cloud_csv(PointCloud(pts), data)
    design = tmp_path / "design.json"
    save_design(builtin_design(), design)
    code, out, _ = _run(
        capsys, ["scan", "--data", str(data), "--design", str(design)]
    )
    assert code == 0
    assert len(out.strip().split("\n")) == 6


def test_scan_requires_exactly_one_candidate_source(capsys, tmp_path, cloud_csv):
    path, _ = cloud_csv
    design = tmp_path / "design.json"
    save_design(haar_candidate_set(2, 4, 3, 0), design)
    with pytest.raises(SystemExit) as exc:
        main(["scan", "--data", str(path)])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(
            ["scan", "--data", str(path), "--design", str(design),
             "--k", "2", "--sample", "5", "--seed", "0"]
        )
    assert exc.value.code == 2


def test_select_matches_library_and_saves_frame(capsys, tmp_path, cloud_csv):
    path, x = cloud_csv
    frame_out = tmp_path / "chosen.json"
    argv = [
        "select", "--data", str(path), "--k", "2", "--sample", "20",
        "--seed", "8", "--rule", "cross", "--frame-out", str(frame_out),
    ]
    code, out, _ = _run(capsys, argv)
    assert code == 0
    obj = json.loads(out)
    cands = haar_candidate_set(2, 4, 20, 8)
    want = select(x, cands, "cross")
    assert obj["index"] == want.index
    assert obj["rule"] == "cross"
    assert obj["summary"]["tvar"] == want.summary.tvar

    frame = load_frame_json(frame_out)
    assert np.allclose(frame.rows, cands.frames[want.index], atol=1e-16)


def test_select_rule_spelling_from_help(capsys, cloud_csv):
    path, x = cloud_csv
    argv = [
        "select", "--data", str(path), "--k", "1", "--sample", "10",
        "--seed", "2", "--rule", "pca-star",
    ]
    code, out, _ = _run(capsys, argv)
    assert code == 0
    assert json.loads(out)["rule"] == "pca_star"


def test_select_unknown_rule_is_reported(capsys, cloud_csv):
    path, _ = cloud_csv
    argv = [
        "select", "--data", str(path), "--k", "1", "--sample", "5",
        "--seed", "2", "--rule", "hexagon",
    ]
    code, out, err = _run(capsys, argv)
    assert code == 1 and out == ""
    obj = json.loads(err)
    assert obj["error"]["type"] == "ValueError"
    assert "hexagon" in obj["error"]["message"]


def test_sample_writes_loadable_design(capsys, tmp_path):
    out_path = tmp_path / "set.json"
    code, _, _ = _run(
        capsys,
        ["sample", "--k", "2", "--d", "5", "--n", "4", "--seed", "9",
         "--out", str(out_path)],
    )
    assert code == 0
    cands = load_design(out_path)
    assert np.array_equal(cands.frames, haar_candidate_set(2, 5, 4, 9).frames)


def test_sample_to_stdout(capsys):
    code, out, _ = _run(
        capsys, ["sample", "--k", "1", "--d", "3", "--n", "2", "--seed", "0"]
    )
    assert code == 0
    arr = json.loads(out)
    assert len(arr) == 2 and arr[0]["k"] == 1 and arr[0]["d"] == 3


def test_design_validate_fixture(capsys, tmp_path):
    design = tmp_path / "eq5.json"
    save_design(builtin_design(), design)
    code, out, _ = _run(
        capsys,
        ["design-validate", "--design", str(design), "--strength", "2",
         "--trials", "100", "--seed", "7"],
    )
    assert code == 0
    obj = json.loads(out)
    assert obj["passes"] is True
    assert obj["max_rel_deviation"] < 1e-10
    assert obj["n_frames"] == 5 and obj["k"] == 1 and obj["d"] == 2


def test_design_radius_deterministic(capsys, tmp_path):
    design = tmp_path / "eq5.json"
    save_design(builtin_design(), design)
    argv = ["design-radius", "--design", str(design), "--probes", "500", "--seed", "2"]
    code, out1, _ = _run(capsys, argv)
    assert code == 0
    _, out2, _ = _run(capsys, argv)
    assert out1 == out2
    obj = json.loads(out1)
    assert 0.3 < obj["covering_radius"] < 0.44


def test_atloss_eval_matches_library(capsys, tmp_path):
    rng = np.random.default_rng(31)
    y = rng.standard_normal((3, 4))
    yhat = rng.standard_normal((3, 4))
    spec_obj = {
        "base_loss": "mse",
        "alpha": 0.7,
        "policy": {"kind": "identity"},
        "transforms": [
            {"kind": "identity", "dim": 4},
            {"kind": "linear", "matrix": [[1.0, 0.0, -1.0, 2.0]]},
        ],
    }
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec_obj))
    y_path = tmp_path / "y.csv"
    yhat_path = tmp_path / "yhat.csv"
    np.savetxt(y_path, y, delimiter=",")
    np.savetxt(yhat_path, yhat, delimiter=",")

    code, out, _ = _run(
        capsys,
        ["atloss-eval", "--spec", str(spec_path), "--y", str(y_path),
         "--yhat", str(yhat_path)],
    )
    assert code == 0
    obj = json.loads(out)
    spec = ATLossSpec.from_json_dict(spec_obj)
    stack = stack_from_descriptors(spec_obj["transforms"])
    value, grad = loss_and_gradient(spec, stack, y, yhat)
    assert obj["loss"] == pytest.approx(value, rel=1e-15)
    assert obj["gradient_norm"] == pytest.approx(np.linalg.norm(grad), rel=1e-15)


def test_atloss_eval_bad_spec_reported(capsys, tmp_path):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps({"base_loss": "mse", "alpha": 1.0,
                                     "policy": {"kind": "warped"},
                                     "transforms": []}))
    y_path = tmp_path / "y.csv"
    np.savetxt(y_path, np.zeros((2, 2)), delimiter=",")
    code, out, err = _run(
        capsys,
        ["atloss-eval", "--spec", str(spec_path), "--y", str(y_path),
         "--yhat", str(y_path)],
    )
    assert code == 1
    assert json.loads(err)["error"]["type"] == "TransformError"


def test_ragged_csv_reported_with_row(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("1.0,2.0\n3.0\n")
    code, out, err = _run(capsys, ["moments", "--data", str(bad), "--k", "1"])
    assert code == 1
    obj = json.loads(err)
    assert "2" in obj["error"]["message"]


def test_missing_file_reported(capsys, tmp_path):
    code, _, err = _run(
        capsys, ["moments", "--data", str(tmp_path / "nope.csv"), "--k", "1"]
    )
    assert code == 1
    assert json.loads(err)["error"]["type"] in ("FileNotFoundError", "OSError")


def test_out_flag_writes_file(capsys, tmp_path, cloud_csv):
    path, _ = cloud_csv
    out_path = tmp_path / "report.json"
    code, out, _ = _run(
        capsys,
        ["moments", "--data", str(path), "--k", "1", "--out", str(out_path)],
    )
    assert code == 0 and out == ""
    assert json.loads(out_path.read_text())["k"] == 1


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    assert "projbalance" in out and "file formats v1" in out


def test_missing_required_argument_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["moments", "--k", "1"])
    assert exc.value.code == 2


def test_no_command_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
