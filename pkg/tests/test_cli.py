import math
import os

import numpy as np
import pytest

from sfflab.cli import ConfigError, main, resolve_config
from sfflab.csvio import read_csv


def run(args, tmp_path, sub="out"):
    out = tmp_path / sub
    code = main(args + ["--out-dir", str(out)])
    return code, out


class TestConfigResolution:
    def test_defaults_fig1_shape(self):
        cfg = resolve_config(["sample-wigner"])
        assert cfg.size == 500 and cfg.samples == 500
        assert cfg.resolved_t_max() == pytest.approx(math.pi * 500)

    def test_mono_defaults(self):
        cfg = resolve_config(["sample-mono"])
        assert cfg.size == 100 and cfg.pairs == 500 and cfg.params == 500

    def test_config_file_and_flag_override(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("size = 40\nsamples = 7\n# comment\nseed = 0xbeef\n")
        cfg = resolve_config(["sample-wigner", "--config", str(path), "--samples", "9"])
        assert cfg.size == 40
        assert cfg.samples == 9  # flag wins
        assert cfg.seed == 0xBEEF

    def test_unknown_config_key(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("sizzle=1\n")
        with pytest.raises(ConfigError):
            resolve_config(["sample-wigner", "--config", str(path)])

    def test_invalid_field_named_in_error(self):
        with pytest.raises(ConfigError, match="t_min"):
            resolve_config(["sample-wigner", "--t-min", "-3"]).validate()

    def test_strip_mode_default_counts(self):
        assert resolve_config(["strip", "--mode", "mono"]).counts == (5, 20, 1000)
        assert resolve_config(["strip"]).counts == (2, 10, 500)


class TestSampleWigner:
    def test_smallest_run_layout(self, tmp_path):
        code, out = run(["sample-wigner", "--size", "2", "--samples", "2",
                         "--points", "3", "--t-max", "10"], tmp_path)
        assert code == 0
        meta, header, cols = read_csv(out / "wigner_sff.csv")
        assert header == ["t", "single", "mean", "std", "stderr"]
        assert len(cols["t"]) == 3
        assert meta["seed"].startswith("0x")
        assert meta["config"].startswith("command=sample-wigner")

    def test_byte_determinism_and_workers(self, tmp_path):
        args = ["sample-wigner", "--size", "12", "--samples", "40",
                "--points", "4", "--t-max", "20"]
        _, out1 = run(args + ["--workers", "1"], tmp_path, "w1")
        _, out8 = run(args + ["--workers", "8"], tmp_path, "w8")
        a = (out1 / "wigner_sff.csv").read_bytes()
        b = (out8 / "wigner_sff.csv").read_bytes()
        assert a == b

    def test_round_trip_floats(self, tmp_path):
        _, out = run(["sample-wigner", "--size", "6", "--samples", "3",
                      "--points", "3", "--t-max", "5"], tmp_path)
        text = (out / "wigner_sff.csv").read_text()
        body = [l for l in text.split("\n") if l and not l.startswith("#")][1:]
        for line in body:
            assert not line.endswith(",")
            for tok in line.split(","):
                assert f"{float(tok):.17g}" == tok

    def test_lf_terminators(self, tmp_path):
        _, out = run(["sample-wigner", "--size", "4", "--samples", "2",
                      "--points", "2", "--t-max", "4"], tmp_path)
        raw = (out / "wigner_sff.csv").read_bytes()
        assert b"\r" not in raw and raw.endswith(b"\n")


class TestSampleMono:
    def test_minimal_run(self, tmp_path):
        code, out = run(["sample-mono", "--size", "8", "--pairs", "2", "--params", "2",
                         "--points", "3", "--t-max", "10"], tmp_path)
        assert code == 0
        _, header, cols = read_csv(out / "mono_moments.csv")
        assert header[:4] == ["t", "mean_h_mean_s", "mean_h_var_s", "var_h_mean_s"]
        assert np.all(np.isfinite(cols["var_h_mean_s"]))

    def test_coupled_flag(self, tmp_path):
        code, out = run(["sample-mono", "--size", "8", "--pairs", "4",
                         "--points", "3", "--t-max", "10", "--coupled"], tmp_path)
        assert code == 0
        assert (out / "mono_coupled.csv").exists()


class TestStripPredict:
    def test_strip_columns(self, tmp_path):
        code, out = run(["strip", "--size", "16", "--counts", "2,5",
                         "--points", "4", "--t-max", "30"], tmp_path)
        assert code == 0
        _, header, cols = read_csv(out / "strip.csv")
        assert header == ["t", "mean_n2", "mean_n5",
                          "band_lo_n2", "band_hi_n2", "band_lo_n5", "band_hi_n5"]
        assert np.all(cols["band_hi_n5"] >= cols["band_lo_n5"])
        # band narrows with more samples in the mono-free mode
        assert np.all(cols["band_hi_n5"] - cols["band_lo_n5"]
                      <= cols["band_hi_n2"] - cols["band_lo_n2"] + 1e-15)

    def test_predict_ramp_tail(self, tmp_path):
        code, out = run(["predict", "--size", "100", "--points", "40",
                         "--t-min", "1", "--t-max", "1000"], tmp_path)
        assert code == 0
        _, header, cols = read_csv(out / "predict.csv")
        assert header == ["t", "e", "e_wig", "s_wig", "s_res", "k_gue", "k_goe"]
        tail = cols["t"] >= 500
        want = 2 * cols["t"][tail] / (math.pi * 100 ** 2)
        assert np.allclose(cols["e_wig"][tail], want, rtol=0.02)

    def test_predict_deterministic(self, tmp_path):
        args = ["predict", "--size", "30", "--points", "10"]
        _, out1 = run(args, tmp_path, "p1")
        _, out2 = run(args, tmp_path, "p2")
        assert (out1 / "predict.csv").read_bytes() == (out2 / "predict.csv").read_bytes()


class TestFigures:
    def test_fast_pipeline_emits_all_csvs(self, tmp_path):
        code, out = run(["figures", "--fast"], tmp_path)
        assert code == 0
        expected = ["fig1/wigner_sff.csv", "fig2/wigner_sff.csv", "fig2/mono_moments.csv",
                    "fig2/predict.csv", "fig3_wigner/strip.csv", "fig3_mono/strip.csv"]
        for rel in expected:
            assert (out / rel).exists(), rel


class TestExitCodes:
    def test_invalid_config_is_one(self, tmp_path, capsys):
        assert main(["sample-wigner", "--size", "0"]) == 1
        assert "size" in capsys.readouterr().err

    def test_unknown_command_is_one(self):
        assert main(["frobnicate"]) == 1

    def test_missing_config_file_is_one(self):
        assert main(["sample-wigner", "--config", "/nonexistent/x.cfg"]) == 1
