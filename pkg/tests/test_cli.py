import json
import math

import numpy as np
import pytest

from angleguard import validate_certificate_dict
from angleguard.cli import run
from angleguard.matrix_angle import save_matrix_json
from helpers import bench_plant


@pytest.fixture
def files(tmp_path):
    """Input JSON files shared by the CLI tests."""
    paths = {}

    def write(name, doc):
        p = tmp_path / name
        p.write_text(json.dumps(doc))
        paths[name] = str(p)
        return str(p)

    write("lag.json", {"tf": {"num": [1.0], "den": [1.0, 1.0]}})
    write("one.json", {"tf": {"num": [1.0], "den": [1.0]}})
    write("unstable.json", {"tf": {"num": [1.0], "den": [1.0, -1.0]}})
    write("bench.json", {"tf": {
        "num": list(np.polymul([1.0, 5.0], [1.0, 3.0, 102.3])),
        "den": list(np.polymul([1.0, 1.0], [1.0, 6.0, 109.0]))}})
    write("sector_op.json", {"kind": "static", "fn": "slope_clamp",
                             "params": {"slope": 2.0, "lo": 1.0, "hi": 3.0},
                             "sector": [1.0, 3.0]})
    write("tanh_op.json", {"kind": "static", "fn": "tanh_scaled",
                           "params": {"amplitude": 1.0, "rate": 1.0}})
    write("lti_op.json", {"kind": "lti",
                          "system": {"tf": {"num": [1.0], "den": [1.0, 1.0]}},
                          "sample_period": 0.01})
    write("divergent_op.json", {
        "kind": "feedback",
        "plant": {"kind": "static", "fn": "gain", "params": {"k": 4.0}},
        "controller": {"kind": "static", "fn": "gain", "params": {"k": 1.0}}})
    save_matrix_json(tmp_path / "diag12.json", np.diag([1.0, 2.0]))
    paths["diag12.json"] = str(tmp_path / "diag12.json")
    save_matrix_json(tmp_path / "example3.json", np.diag([1 + 1j, 1 - 2j, 3.0]))
    paths["example3.json"] = str(tmp_path / "example3.json")
    paths["dir"] = str(tmp_path)
    return paths


def run_json(capsys, argv):
    code = run(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


class TestMatrixAngle:
    def test_anchor_value(self, files, capsys):
        code, doc = run_json(capsys, ["matrix-angle", files["diag12.json"]])
        assert code == 0
        assert doc["angle_rad"] == pytest.approx(0.339837, abs=1e-3)
        assert doc["method"] == "hpd-closed-form"
        assert doc["certified_upper_rad"] >= doc["angle_rad"] - 1e-9

    def test_malformed_input(self, files, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run(["matrix-angle", str(bad)]) == 2

    def test_missing_file(self):
        assert run(["matrix-angle", "/nonexistent/m.json"]) == 2


class TestWnBoundary:
    def test_samples_csv(self, files, capsys, tmp_path):
        out_csv = tmp_path / "wn.csv"
        code, doc = run_json(capsys, ["wn-boundary", files["example3.json"],
                                      "--count", "200", "--csv-out", str(out_csv)])
        assert code == 0
        assert doc["max_abs"] <= 1.0 + 1e-9
        lines = out_csv.read_text().strip().splitlines()
        assert lines[0] == "re,im"
        assert len(lines) >= 201


class TestLtiAngle:
    def test_bench_plant(self, files, capsys, tmp_path):
        out_csv = tmp_path / "sweep.csv"
        code, doc = run_json(capsys, ["lti-angle", files["bench.json"],
                                      "--csv-out", str(out_csv)])
        assert code == 0
        assert doc["cos_theta_inf"] == pytest.approx(0.701, abs=5e-3)
        assert doc["argmax_omega"] == pytest.approx(2.613, abs=0.01)
        header = out_csv.read_text().splitlines()[0]
        assert header == "omega,angle_rad,cos_theta"

    def test_unstable_input_rejected(self, files):
        assert run(["lti-angle", files["unstable.json"]]) == 2

    def test_grid_spec(self, files, capsys):
        code, doc = run_json(capsys, ["lti-angle", files["lag.json"],
                                      "--grid", "1e-2:1e3:50"])
        assert code == 0


class TestFeedbackCheck:
    def test_static_pair_certified_with_full_margin(self, files, capsys):
        code, doc = run_json(capsys, ["feedback-check", files["one.json"],
                                      files["one.json"]])
        assert code == 0
        assert doc["verdict"] == "certified"
        assert doc["margin_rad"] == pytest.approx(math.pi, abs=1e-6)

    def test_hinf_method_boundary_pair(self, files, capsys):
        code, doc = run_json(capsys, ["feedback-check", files["lag.json"],
                                      files["lag.json"], "--method", "cor3"])
        assert code == 1
        assert doc["verdict"] == "inconclusive"

    def test_frequencywise_method_certifies_same_pair(self, files, capsys):
        code, doc = run_json(capsys, ["feedback-check", files["lag.json"],
                                      files["lag.json"], "--method", "thm3"])
        assert code == 0
        assert doc["verdict"] == "certified"

    def test_certificate_schema(self, files, capsys):
        _, doc = run_json(capsys, ["feedback-check", files["one.json"], files["one.json"]])
        doc.pop("generated_at")
        validate_certificate_dict(doc)


class TestCyclicCheck:
    def test_three_sector_blocks(self, files, capsys):
        code, doc = run_json(capsys, ["cyclic-check"] + [files["sector_op.json"]] * 3)
        assert code == 0
        assert doc["verdict"] == "certified"
        # three sector angle bounds of pi/6 leave a margin of pi/2
        assert doc["margin_rad"] == pytest.approx(math.pi / 2, abs=1e-6)

    def test_six_sector_blocks_inconclusive(self, files, capsys):
        code, doc = run_json(capsys, ["cyclic-check"] + [files["sector_op.json"]] * 6)
        assert code == 1

    def test_lti_operand_uses_frequency_cap(self, files, capsys):
        code, doc = run_json(capsys, ["cyclic-check", files["sector_op.json"],
                                      files["lti_op.json"]])
        # pi/6 + pi/2 certifies
        assert code == 0
        assert doc["margin_rad"] == pytest.approx(math.pi / 3, abs=1e-6)

    def test_sectorless_static_rejected(self, files):
        assert run(["cyclic-check", files["tanh_op.json"]]) == 2


class TestLureCheck:
    def test_lag_certified(self, files, capsys):
        code, doc = run_json(capsys, ["lure-check", files["lag.json"],
                                      "--sector", "1,3"])
        assert code == 0
        assert doc["verdict"] == "certified"

    def test_bad_sector_spec(self, files):
        assert run(["lure-check", files["lag.json"], "--sector", "3,1"]) == 2
        assert run(["lure-check", files["lag.json"], "--sector", "x"]) == 2


class TestEstimateAngle:
    def test_std_flavor(self, files, capsys):
        code, doc = run_json(capsys, ["estimate-angle", files["sector_op.json"],
                                      "--probes", "12"])
        assert code == 0
        assert doc["bound_direction"] == "lower_bound_on_theta"
        assert doc["angle_rad"] <= math.pi / 6 + 1e-6

    @pytest.mark.parametrize("flavor", ["l2e", "incremental", "generalized"])
    def test_other_flavors(self, files, capsys, flavor):
        code, doc = run_json(capsys, ["estimate-angle", files["tanh_op.json"],
                                      "--flavor", flavor, "--probes", "6"])
        assert code == 0
        assert doc["flavor"] == ("standard" if flavor == "std" else flavor)

    def test_divergent_feedback_is_numerical_failure(self, files):
        assert run(["estimate-angle", files["divergent_op.json"], "--probes", "2"]) == 3


class TestSecantCheck:
    def test_explicit_gains(self, files, capsys):
        code, doc = run_json(capsys, ["secant-check", "--gains", "1,1,1"])
        assert code == 0
        assert doc["margin_rad"] == pytest.approx(7.0, abs=1e-6)

    def test_sector_operands(self, files, capsys):
        code, doc = run_json(capsys, ["secant-check"] + [files["sector_op.json"]] * 3)
        # three gains of a+b = 4 give product 64 >= threshold 8
        assert code == 1
        assert doc["verdict"] == "inconclusive"

    def test_sectorless_rejected(self, files):
        assert run(["secant-check", files["tanh_op.json"]]) == 2


class TestReproducibility:
    def test_byte_identical_up_to_timestamp(self, files, capsys):
        argv = ["estimate-angle", files["sector_op.json"], "--probes", "8",
                "--seed", "7"]
        run(argv)
        first = capsys.readouterr().out
        run(argv)
        second = capsys.readouterr().out
        a, b = json.loads(first), json.loads(second)
        a.pop("generated_at"), b.pop("generated_at")
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)

    def test_nine_significant_digits(self, files, capsys):
        _, doc = run_json(capsys, ["matrix-angle", files["diag12.json"]])
        text = f"{doc['angle_rad']:.17g}"
        # round-trips through the 9-significant-digit formatter
        assert float(f"{doc['angle_rad']:.9g}") == doc["angle_rad"]
        assert len(text.replace(".", "").replace("-", "").lstrip("0")) <= 17
