import json
from pathlib import Path

import numpy as np
import pytest

from cuspcal.cli import (
    RunConfig,
    load_config,
    main,
    parse_config,
    read_projector,
    write_csv,
    write_projector,
)
from cuspcal.errors import SchemaError

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def strip_config_text():
    return (CONFIG_DIR / "strip_laplacian.json").read_text()


class TestParseConfig:
    def test_strip_roundtrip(self):
        cfg, op = parse_config(strip_config_text())
        assert op.geometry == "StripHyperbolic"
        assert op.order == 2
        assert op.weight_c == 1
        assert op.fibre.kind == "interval"
        assert cfg.ns == 128
        # serialize -> parse again gives the same operator data
        doc = json.loads(strip_config_text())
        cfg2, op2 = parse_config(json.dumps(doc))
        assert op2.coefficients.keys() == op.coefficients.keys()

    def test_missing_leading_coefficient(self):
        doc = json.loads(strip_config_text())
        doc["coefficients"] = [c for c in doc["coefficients"] if c["k"] != 2]
        with pytest.raises(SchemaError) as err:
            parse_config(json.dumps(doc))
        assert "coefficients" in str(err.value)

    def test_bad_poly_term_path(self):
        doc = json.loads(strip_config_text())
        doc["coefficients"][0]["poly"] = [[0, 0, 1.0]]
        with pytest.raises(SchemaError) as err:
            parse_config(json.dumps(doc))
        assert "coefficients[0].poly[0]" in str(err.value)

    def test_invalid_json(self):
        with pytest.raises(SchemaError):
            parse_config("not json {")

    def test_weight_recorded_but_inert(self):
        from cuspcal.fibre import normal_operator

        _, op = parse_config(strip_config_text())
        assert op.weight_c == 1
        ode = normal_operator(op, (1.0,))
        assert ode.coeff_values(0.5)[2][0, 0] == pytest.approx(1.0)

    def test_tolerances_positive(self):
        with pytest.raises(SchemaError):
            RunConfig(tol_overrides={"probe": -1.0})


class TestArtifacts:
    def test_projector_roundtrip(self, tmp_path):
        m = np.array([[1.0 + 2j, 0.5], [-0.25j, 0.0]])
        path = write_projector(tmp_path / "p.txt", m, "test")
        back = read_projector(path)
        np.testing.assert_allclose(back, m)
        assert path.read_text().startswith("# cuspcal projector 2 2")

    def test_csv_build_column(self, tmp_path):
        path = write_csv(tmp_path / "t.csv", [{"a": 1, "b": 2.5}])
        lines = path.read_text().splitlines()
        assert lines[0].split(",")[-1] == "build"
        assert len(lines) == 2


class TestMain:
    def test_symbol_subcommand(self, tmp_path):
        out = tmp_path / "out"
        status = main(["symbol", "--config",
                       str(CONFIG_DIR / "strip_laplacian.json"),
                       "--out", str(out), "--xi", "0.5,1"])
        assert status == 0
        text = (out / "symbol.csv").read_text()
        assert "idem_defect" in text and "dn" in text

    def test_normal_subcommand(self, tmp_path):
        out = tmp_path / "out"
        status = main(["normal", "--config",
                       str(CONFIG_DIR / "strip_laplacian.json"),
                       "--out", str(out), "--tau-min", "0.5",
                       "--tau-max", "1.5", "--tau-steps", "3"])
        assert status == 0
        assert (out / "normal.csv").exists()
        assert (out / "normal_failures.csv").exists()

    def test_discrete_toy_subcommand(self, tmp_path):
        out = tmp_path / "out"
        status = main(["discrete", "--config",
                       str(CONFIG_DIR / "halfline_toy.json"),
                       "--out", str(out), "--ns", "256", "--S", "6"])
        assert status == 0
        table = (out / "discrete_toy.csv").read_text()
        assert "path_gap" in table
        proj = read_projector(out / "projector_spaces.txt")
        assert proj.shape == (2, 2)

    def test_missing_config_is_input_error(self, tmp_path):
        status = main(["normal", "--out", str(tmp_path / "o")])
        assert status == 2

    def test_corrupted_config_is_input_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{]")
        status = main(["verify", "--config", str(bad), "--out",
                       str(tmp_path / "o")])
        assert status == 2

    def test_verify_single_suite(self, tmp_path):
        out = tmp_path / "out"
        status = main(["verify", "--suite", "2", "--out", str(out)])
        assert status == 0
        assert (out / "summary.csv").exists()
        assert (out / "suite_02_calderon-symbol-closed-form.csv").exists()

    def test_verify_suite_group_alias(self, tmp_path):
        out = tmp_path / "out"
        status = main(["verify", "--suite", "lab", "--out", str(out)])
        assert status == 0
        assert (out / "suite_05_projection-perturbation-lemma.csv").exists()
        assert (out / "suite_06_augment-modify-complement.csv").exists()

    def test_verify_unknown_suite(self, tmp_path):
        status = main(["verify", "--suite", "nope", "--out",
                       str(tmp_path / "o")])
        assert status == 2

    def test_determinism_of_outputs(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            assert main(["verify", "--suite", "1,2", "--out", str(out),
                         "--seed", "777"]) == 0
        for name in sorted(p.name for p in out1.glob("*.csv")):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_load_config_missing_file(tmp_path):
    with pytest.raises(SchemaError):
        load_config(tmp_path / "nope.json")
