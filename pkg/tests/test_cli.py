import json

import pytest

from qsu2.qarith import QArithError
from qsu2.cli import (EXPERIMENTS, RunConfig, build_config, main, parse_t_grid,
                      read_config_file)


class TestParsing:
    def test_t_grid_linear(self):
        assert parse_t_grid("1:3:3") == pytest.approx([1.0, 2.0, 3.0])

    def test_t_grid_log(self):
        g = parse_t_grid("0.1:10:3", log_spaced=True)
        assert g == pytest.approx([0.1, 1.0, 10.0])

    def test_t_grid_single(self):
        assert parse_t_grid("2:9:1") == [2.0]

    def test_t_grid_errors(self):
        for bad in ("1:2", "a:b:c", "0:1:3", "1:2:0"):
            with pytest.raises(QArithError):
                parse_t_grid(bad)

    def test_config_file(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("# comment\nq = 1.5\nlmax = 10\nformat = json\n")
        assert read_config_file(str(p)) == {"q": "1.5", "lmax": "10", "format": "json"}

    def test_config_file_bad_line(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("q 1.5\n")
        with pytest.raises(QArithError):
            read_config_file(str(p))


class TestRunConfig:
    def test_defaults(self):
        cfg = RunConfig()
        assert cfg.q == 1.2 and cfg.lmax_doubled == 24
        assert cfg.trunc.lmax.doubled == 24
        prov = cfg.provenance()
        assert prov["seed"] == 1234 and "version" in prov

    @pytest.mark.parametrize("kwargs", [
        {"q": 1.0}, {"q": -2.0}, {"lmax_doubled": -1},
        {"t_grid": [0.0]}, {"tolerance": 0.0}, {"format": "xml"},
    ])
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(QArithError):
            RunConfig(**kwargs)


class TestPrecedence:
    class _Args:
        config = None
        q = None
        lmax = None
        tol = None
        seed = None
        precision_bits = None
        out = None
        format = None
        t = None
        t_grid = None
        t_log = None

    def test_flag_overrides_config_file(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("q = 1.5\nlmax = 10\n")
        args = self._Args()
        args.config = str(p)
        args.q = 2.0
        cfg = build_config(args)
        assert cfg.q == 2.0
        assert cfg.lmax_doubled == 10

    def test_env_overrides_precision(self, monkeypatch):
        monkeypatch.setenv("QSU2_PRECISION_BITS", "96")
        cfg = build_config(self._Args())
        assert cfg.precision_bits == 96

    def test_t_single_value(self):
        args = self._Args()
        args.t = 0.7
        assert build_config(args).t_grid == [0.7]


class TestExperiments:
    def test_registry(self):
        assert set(EXPERIMENTS) == {"validate", "haar", "commutators", "heat", "modular"}

    def test_every_experiment_passes_at_small_scale(self):
        cfg = RunConfig(lmax_doubled=16)
        for name, fn in EXPERIMENTS.items():
            rows, cols = fn(cfg)
            assert rows, name
            assert all(len(r) == len(cols) for r in rows), name
            assert all(r[-1] == "PASS" for r in rows), name


class TestMain:
    def test_version(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["--version"])
        assert info.value.code == 0

    def test_config_error_exit_code(self):
        assert main(["heat", "--q", "1.0"]) == 2

    def test_heat_writes_csv(self, tmp_path, capsys):
        out = tmp_path / "heat.csv"
        rc = main(["heat", "--lmax", "16", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        header = lines[0].split(",")
        assert "t" in header and "lmax_doubled" in header and "version" in header
        assert len(lines) == 4  # header + default three t values
        assert capsys.readouterr().out.count("PASS") >= 1

    def test_json_format(self, tmp_path):
        out = tmp_path / "modular.json"
        rc = main(["modular", "--lmax", "8", "--out", str(out), "--format", "json"])
        assert rc == 0
        rows = json.loads(out.read_text())
        assert rows and all(r["status"] == "PASS" for r in rows)

    def test_all_suffixes_outputs(self, tmp_path):
        out = tmp_path / "run.csv"
        rc = main(["all", "--lmax", "16", "--out", str(out)])
        assert rc == 0
        for name in EXPERIMENTS:
            assert (tmp_path / ("run_%s.csv" % name)).exists()

    def test_repeat_runs_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            assert main(["commutators", "--lmax", "16", "--seed", "7",
                         "--out", str(path)]) == 0
        assert a.read_bytes() == b.read_bytes()
