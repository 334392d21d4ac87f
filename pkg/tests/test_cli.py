"""Command-line front end: config handling, CSV fidelity, determinism."""

import json
import math

import numpy as np
import pytest

from windrisk import (
    GevParams,
    PowerSpec,
    dep_measure_from_gamma,
    mean_cost,
    power,
    var_gev,
)
from windrisk.cli import DEFAULT_CONFIG, load_config, main, normalize_config
from windrisk.errors import ConfigError

from conftest import ETA, TAU, XI


SMALL_DEPSURFACE = {
    "depsurface": {
        "psi": [1.0, 2.0],
        "beta": [1, 3],
        "distances": [0.0, 0.5, 1.0, 3.0, 7.0],
    }
}

SMALL_R2 = {
    "r2curves": {
        "psi": [2.0],
        "shapes": ["disk"],
        "lam": [1e-8, 0.5, 2.0, 8.0],
    }
}


def read_csv(path):
    lines = path.read_text().strip().split("\n")
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


class TestConfig:
    def test_defaults_normalize(self):
        cfg = normalize_config({})
        assert cfg["depsurface"]["gev"]["eta"] == 30.0
        assert cfg["depsurface"]["gev"]["tau"] == 3.0
        assert cfg["depsurface"]["gev"]["xi"] == -0.2
        assert cfg["depsurface"]["kappa"] == 1.0
        assert cfg["depsurface"]["psi"] == [0.5, 1.0, 1.5, 2.0]
        assert cfg["depsurface"]["beta"] == list(range(1, 13))

    def test_roundtrip_identity(self):
        cfg = normalize_config(SMALL_DEPSURFACE)
        again = normalize_config(json.loads(json.dumps(cfg)))
        assert again == cfg

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError):
            normalize_config({"depsurface": {"betas": [1]}})
        with pytest.raises(ConfigError):
            normalize_config({"surface": {}})

    def test_load_config_errors(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ConfigError) as err:
            load_config(bad)
        assert "line" in str(err.value)
        with pytest.raises(ConfigError):
            load_config(tmp_path / "missing.json")


class TestExitCodes:
    def test_success(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(SMALL_DEPSURFACE))
        out = tmp_path / "out.csv"
        assert main(["depsurface", "--config", str(cfg), "--out", str(out)]) == 0
        assert out.exists()

    def test_config_error_is_2(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text("{broken")
        assert main(["depsurface", "--config", str(cfg), "--out",
                     str(tmp_path / "o.csv")]) == 2

    def test_nonconvergence_is_3(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({
            "riskreport": {"psi": 0.05, "lam": [10.0], "alpha": [0.95]}
        }))
        assert main(["riskreport", "--config", str(cfg), "--out",
                     str(tmp_path / "o.csv")]) == 3


@pytest.fixture(scope="module")
def depsurface_output(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("dep")
    cfg = tmp / "c.json"
    cfg.write_text(json.dumps(SMALL_DEPSURFACE))
    out = tmp / "dep.csv"
    assert main(["depsurface", "--config", str(cfg), "--out", str(out)]) == 0
    return read_csv(out)


class TestDepsurface:

    def test_header(self, depsurface_output):
        header, _ = depsurface_output
        assert header == ["psi", "beta", "distance", "dependence"]

    def test_zero_distance_rows_are_one(self, depsurface_output):
        _, rows = depsurface_output
        zero_rows = [r for r in rows if float(r[2]) == 0.0]
        assert zero_rows
        assert all(float(r[3]) == 1.0 for r in zero_rows)

    def test_spot_cell_matches_library(self, depsurface_output):
        _, rows = depsurface_output
        row = next(r for r in rows
                   if float(r[0]) == 1.0 and int(r[1]) == 3 and float(r[2]) == 1.0)
        p = PowerSpec.gev(3, GevParams(ETA, TAU, XI))
        lib = dep_measure_from_gamma(p, power(1.0, 1.0).radial(1.0))
        # CSV carries 12 significant digits of the library value
        assert float(row[3]) == float(f"{lib:.11e}")

    def test_decreasing_in_distance(self, depsurface_output):
        _, rows = depsurface_output
        series = [float(r[3]) for r in rows
                  if float(r[0]) == 2.0 and int(r[1]) == 1]
        assert all(b < a for a, b in zip(series, series[1:]))


@pytest.fixture(scope="module")
def r2curves_output(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("r2")
    cfg = tmp / "c.json"
    cfg.write_text(json.dumps(SMALL_R2))
    out = tmp / "r2.csv"
    assert main(["r2curves", "--config", str(cfg), "--out", str(out)]) == 0
    return read_csv(out)


class TestR2Curves:

    def test_strictly_decreasing(self, r2curves_output):
        _, rows = r2curves_output
        vals = [float(r[3]) for r in rows]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_smallest_lam_approaches_variance(self, r2curves_output):
        _, rows = r2curves_output
        p = PowerSpec.gev(1, GevParams(ETA, TAU, XI))
        assert float(rows[0][3]) == pytest.approx(var_gev(p), rel=1e-3)


@pytest.fixture(scope="module")
def riskreport_output(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("rr")
    cfg = tmp / "c.json"
    cfg.write_text(json.dumps({
        "riskreport": {"lam": [10.0, 20.0], "alpha": [0.5, 0.95, 0.99]}
    }))
    out = tmp / "rr.csv"
    with pytest.warns(RuntimeWarning):
        assert main(["riskreport", "--config", str(cfg), "--out", str(out)]) == 0
    return read_csv(out)


class TestRiskReport:

    def test_alpha_half_var_equals_mean(self, riskreport_output):
        header, rows = riskreport_output
        i_mean = header.index("mean")
        i_var = header.index("var_asym_0.5")
        for r in rows:
            assert float(r[i_var]) == float(r[i_mean])

    def test_es_dominates_var(self, riskreport_output):
        header, rows = riskreport_output
        for a in ("0.95", "0.99"):
            i_var = header.index(f"var_asym_{a}")
            i_es = header.index(f"es_asym_{a}")
            for r in rows:
                assert float(r[i_es]) >= float(r[i_var])

    def test_clt_sd_halves_when_lam_doubles(self, riskreport_output):
        header, rows = riskreport_output
        i_sd = header.index("clt_sd")
        sd10 = float(rows[0][i_sd])
        sd20 = float(rows[1][i_sd])
        assert sd20 == pytest.approx(sd10 / 2.0, rel=1e-10)

    def test_mean_column(self, riskreport_output):
        header, rows = riskreport_output
        p = PowerSpec.gev(1, GevParams(ETA, TAU, XI))
        i_mean = header.index("mean")
        assert float(rows[0][i_mean]) == float(f"{mean_cost(p):.11e}")


class TestSimulateCommand:
    CFG = {
        "simulate": {
            "psi": 2.0,
            "lam": 4.0,
            "n_rep": 60,
            "seed": 77,
            "method": "smith",
            "alpha": [0.9],
            "dump": "fields.bin",
        }
    }

    def test_seed_repetition_identical_outputs(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(self.CFG))
        out1, out2 = tmp_path / "s1.csv", tmp_path / "s2.csv"
        assert main(["simulate", "--config", str(cfg), "--out", str(out1)]) == 0
        dump1 = (tmp_path / "fields.bin").read_bytes()
        assert main(["simulate", "--config", str(cfg), "--out", str(out2)]) == 0
        dump2 = (tmp_path / "fields.bin").read_bytes()
        assert out1.read_bytes() == out2.read_bytes()
        assert dump1 == dump2

    def test_summary_mean_within_mc_error(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(self.CFG))
        out = tmp_path / "s.csv"
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
        header, rows = read_csv(out)
        mean_row = next(r for r in rows if r[0] == "mean")
        est, se = float(mean_row[2]), float(mean_row[3])
        p = PowerSpec.gev(1, GevParams(ETA, TAU, XI))
        assert abs(est - mean_cost(p)) <= 4.0 * se

    def test_seed_override(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(self.CFG))
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["simulate", "--config", str(cfg), "--out", str(out1),
                     "--seed", "123"]) == 0
        assert main(["simulate", "--config", str(cfg), "--out", str(out2),
                     "--seed", "124"]) == 0
        assert out1.read_bytes() != out2.read_bytes()


class TestThreadDeterminism:
    def test_depsurface_thread_count_invariant(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(SMALL_DEPSURFACE))
        outputs = []
        for threads in (1, 4):
            out = tmp_path / f"t{threads}.csv"
            assert main(["depsurface", "--config", str(cfg), "--out", str(out),
                         "--threads", str(threads)]) == 0
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]
