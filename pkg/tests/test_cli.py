import json
import math
from pathlib import Path

import numpy as np
import pytest

from fraclab.cli import main
from fraclab.grid import DyadicSet
from fraclab.io import read_dyadic_set, read_grid_function, write_dyadic_set

SCHEMA_DIR = Path(__file__).parent.parent / "src" / "fraclab" / "schemas"


def validate_against(payload: dict, schema_name: str) -> None:
    import jsonschema
    from referencing import Registry, Resource

    manifest = json.loads((SCHEMA_DIR / "manifest.schema.json").read_text())
    schema = json.loads((SCHEMA_DIR / schema_name).read_text())
    registry = Registry().with_resource(
        "fraclab/manifest.schema.json", Resource.from_contents(manifest)
    )
    jsonschema.Draft202012Validator(schema, registry=registry).validate(payload)


def run(args) -> int:
    return main([str(a) for a in args])


class TestMeasureCommand:
    def test_cantor_with_sidecar_and_set(self, tmp_path):
        out = tmp_path / "mu.grid"
        dset = tmp_path / "mu.dset"
        code = run(
            ["measure", "--cantor", "3:0,2", "--depth", "8", "--J", "14",
             "--out", out, "--emit-set", dset]
        )
        assert code == 0
        mu = read_grid_function(out, is_density=True)
        assert mu.resolution == 14
        sidecar = json.loads((tmp_path / "mu.grid.json").read_text())
        validate_against(sidecar, "measure.schema.json")
        assert sidecar["frostman"]["beta"] == pytest.approx(math.log(2) / math.log(3))
        assert sidecar["frostman"]["lambda_padded"] <= 8.0
        E = read_dyadic_set(dset)
        assert E.count == np.count_nonzero(mu.values)

    def test_lebesgue(self, tmp_path):
        out = tmp_path / "leb.grid"
        assert run(["measure", "--lebesgue", "--J", "10", "--out", out]) == 0
        mu = read_grid_function(out)
        assert np.array_equal(mu.values, np.ones(1 << 10))

    def test_exactly_one_construction(self, tmp_path):
        code = run(["measure", "--lebesgue", "--cantor", "3:0,2", "--J", "8",
                    "--out", tmp_path / "x.grid"])
        assert code == 2


class TestDecayCommand:
    def test_csv_with_footer(self, tmp_path):
        out = tmp_path / "mu.grid"
        run(["measure", "--cantor", "3:0,2", "--depth", "6", "--J", "12", "--out", out])
        csv_path = tmp_path / "decay.csv"
        code = run(["decay", "--measure", out, "--lmax", "8", "--beta", "0.6309",
                    "--out", csv_path])
        assert code == 0
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == "l,sup,l2,l4"
        assert len(lines) == 1 + 8 + 2
        assert lines[-2].startswith("fitted_c0_l4,")
        assert lines[-1].startswith("threshold_(1-beta)/4,")

    def test_json_validates(self, tmp_path):
        out = tmp_path / "mu.grid"
        run(["measure", "--lebesgue", "--J", "10", "--out", out])
        jpath = tmp_path / "decay.json"
        code = run(["decay", "--measure", out, "--lmax", "6", "--format", "json",
                    "--out", jpath])
        assert code == 0
        payload = json.loads(jpath.read_text())
        validate_against(payload, "decay.schema.json")
        assert payload["fitted_c0_l4"] == "inf"

    def test_missing_measure_is_config_error(self, tmp_path):
        assert run(["decay", "--measure", tmp_path / "nope.grid",
                    "--out", tmp_path / "d.csv"]) == 2


class TestProbeCommand:
    def test_csv_output(self, tmp_path):
        out = tmp_path / "probe.csv"
        code = run(["sobolev-probe", "--family", "t", "--J", "10", "--cutoffs", "2:6",
                    "--trials", "2", "--seed", "7", "--out", out])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "n,l1_norm"
        assert any(l.startswith("sigma_fit,") for l in lines)

    def test_json_validates(self, tmp_path):
        out = tmp_path / "probe.json"
        code = run(["sobolev-probe", "--family", "t, t^2", "--J", "10",
                    "--cutoffs", "2:6", "--trials", "2", "--seed", "7",
                    "--format", "json", "--out", out, "--inputs", "tone"])
        assert code == 0
        validate_against(json.loads(out.read_text()), "sobolev_probe.schema.json")

    def test_malformed_family_exits_2(self, tmp_path):
        assert run(["sobolev-probe", "--family", "t,", "--J", "10",
                    "--cutoffs", "2:6", "--out", tmp_path / "p.csv"]) == 2


class TestPigeonholeCommand:
    def test_json_validates(self, tmp_path):
        dset = tmp_path / "E.dset"
        write_dyadic_set(dset, DyadicSet.random(12, 0.5, 3))
        out = tmp_path / "ph.json"
        code = run(["pigeonhole", "--family", "t,t^2", "--set", dset,
                    "--epsilon", "0.25", "--J", "12", "--out", out])
        assert code == 0
        payload = json.loads(out.read_text())
        validate_against(payload, "pigeonhole.schema.json")
        assert payload["k_found"] == 0

    def test_mismatched_J_rejected(self, tmp_path):
        dset = tmp_path / "E.dset"
        write_dyadic_set(dset, DyadicSet.random(10, 0.5, 3))
        assert run(["pigeonhole", "--family", "t,t^2", "--set", dset,
                    "--epsilon", "0.25", "--J", "12", "--out", tmp_path / "x.json"]) == 2

    def test_density_below_epsilon_exits_3(self, tmp_path):
        dset = tmp_path / "E.dset"
        write_dyadic_set(dset, DyadicSet.random(10, 0.1, 3))
        assert run(["pigeonhole", "--family", "t,t^2", "--set", dset,
                    "--epsilon", "0.5", "--out", tmp_path / "x.json"]) == 3


class TestRothCommand:
    def test_lebesgue_passes(self, tmp_path):
        out = tmp_path / "roth.json"
        code = run(["roth", "--measure", "lebesgue", "--theta", "1,2", "--J", "12",
                    "--out", out])
        assert code == 0
        payload = json.loads(out.read_text())
        validate_against(payload, "roth.schema.json")
        assert payload["lambda_total"] == pytest.approx(1.0, abs=1e-9)
        assert payload["certificate"]["passed"] is True

    def test_degenerate_theta_exits_3(self, tmp_path):
        assert run(["roth", "--measure", "lebesgue", "--theta", "1,1", "--J", "8",
                    "--out", tmp_path / "x.json"]) == 3


class TestDetectCommand:
    def test_json_validates(self, tmp_path):
        dset = tmp_path / "E.dset"
        write_dyadic_set(dset, DyadicSet.random(12, 0.9, 5))
        out = tmp_path / "det.json"
        code = run(["detect", "--set", dset, "--family", "t,t^2",
                    "--kappa", "0.05", "--tgrid", "8192", "--out", out])
        assert code == 0
        payload = json.loads(out.read_text())
        validate_against(payload, "detect.schema.json")
        assert payload["found"] is True
        assert payload["witness"]["t"] >= 0.05


class TestConfigFile:
    def test_flags_win_over_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"J": 8, "lebesgue": True, "out": str(tmp_path / "a.grid")}))
        out = tmp_path / "b.grid"
        code = run(["measure", "--config", cfg, "--out", out])
        assert code == 0
        assert out.exists()
        assert read_grid_function(out).resolution == 8

    def test_unknown_keys_rejected(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"J": 8, "lebesgue": True, "bogus": 1}))
        assert run(["measure", "--config", cfg, "--out", tmp_path / "x.grid"]) == 2


class TestReproducibility:
    def test_identical_runs_bit_identical(self, tmp_path, monkeypatch):
        # identical config in two working directories: outputs byte-equal
        dirs = [tmp_path / "one", tmp_path / "two"]
        for d in dirs:
            d.mkdir()
            monkeypatch.chdir(d)
            run(["measure", "--random", "3:2", "--depth", "6", "--seed", "11",
                 "--J", "12", "--out", "m.grid"])
        assert (dirs[0] / "m.grid").read_bytes() == (dirs[1] / "m.grid").read_bytes()
        assert (dirs[0] / "m.grid.json").read_bytes() == (dirs[1] / "m.grid.json").read_bytes()
