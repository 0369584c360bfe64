import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lambda_oct.cli import main
from lambda_oct.runner import (OUTPUT_ENV, ConfigError, RunConfig, compare_methods,
                               execute_run, load_config, parse_config, render_config,
                               render_table)

FAST = dict(num_steps=200, max_iterations=20)


class TestParse:
    def test_minimal_document_gets_defaults(self):
        cfg = parse_config("scenario = population-transfer\nmethod = krotov\n")
        assert (cfg.target_time, cfg.num_steps, cfg.guess_amplitude) == (10.0, 2000, 1.0)
        assert cfg.gamma == 1e-8 and cfg.max_iterations == 1000
        assert cfg.guess_center == 5.0 and cfg.guess_width == 1.0
        assert cfg.reference_mode == "zero" and cfg.beta == 0.0

    def test_penalized_zhu_rabitz_document(self):
        text = """
        # penalized transfer
        scenario = population-transfer
        method   = zhu-rabitz
        alpha0   = 0.0005   # field weight
        beta     = 1.8
        """
        cfg = parse_config(text)
        assert cfg.alpha0 == 0.0005 and cfg.beta == 1.8
        assert cfg.optimizer_config().penalties.beta == 1.8

    def test_negative_beta_names_field(self):
        with pytest.raises(ConfigError, match="beta"):
            parse_config("scenario = population-transfer\nmethod = krotov\nbeta = -1\n")

    @pytest.mark.parametrize("line,needle", [
        ("colour = blue", "line 3.*unknown key 'colour'"),
        ("this is not a pair", "line 3.*key = value"),
        ("num_steps = many", "line 3.*num_steps"),
        ("num_steps = 5", "num_steps"),
        ("target_time = 0", "target_time"),
        ("gamma = nan", "gamma"),
        ("alpha0 = inf", "alpha0"),
        ("method = krotov", "line 3.*duplicate"),
        ("reference_mode = previous-iterate\nmethod = zhu-rabitz", "duplicate|reference_mode"),
        ("shape = custom-sampled", "shape"),
        ("label = a/b", "label"),
    ])
    def test_errors(self, line, needle):
        text = f"scenario = population-transfer\nmethod = krotov\n{line}\n"
        with pytest.raises(ConfigError, match=needle):
            parse_config(text)

    def test_missing_required(self):
        with pytest.raises(ConfigError, match="method"):
            parse_config("scenario = population-transfer\n")

    def test_previous_iterate_requires_krotov(self):
        with pytest.raises(ConfigError, match="reference_mode"):
            parse_config("scenario = max-coherence\nmethod = zhu-rabitz\n"
                         "reference_mode = previous-iterate\n")

    def test_load_config_reports_path(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("scenario = population-transfer\nmethod = x\n")
        with pytest.raises(ConfigError, match="bad.txt"):
            load_config(p)


pos = st.floats(1e-6, 1e3, allow_nan=False, allow_infinity=False)


@settings(max_examples=60)
@given(scenario=st.sampled_from(["population-transfer", "max-coherence"]),
       method=st.sampled_from(["conjugate-gradient", "zhu-rabitz", "krotov"]),
       alpha0=pos, beta=st.floats(0, 10), gamma=pos, target_time=pos,
       num_steps=st.integers(10, 10**6), amp=st.floats(-10, 10), center=st.floats(-5, 20),
       width=pos, dp=st.floats(-5, 5), label=st.text("abc_-.0123", max_size=8))
def test_render_parse_round_trip(scenario, method, alpha0, beta, gamma, target_time,
                                 num_steps, amp, center, width, dp, label):
    cfg = RunConfig(scenario=scenario, method=method, alpha0=alpha0, beta=beta,
                    gamma=gamma, target_time=target_time, num_steps=num_steps,
                    guess_amplitude=amp, guess_center=center, guess_width=width,
                    pump_detuning=dp, label=label)
    assert parse_config(render_config(cfg)) == cfg


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    cfg = RunConfig(scenario="population-transfer", method="conjugate-gradient", **FAST)
    result, summary = execute_run(cfg, out)
    return out, cfg, result, summary


class TestExecuteRun:
    def test_files(self, run_dir):
        out, *_ = run_dir
        names = {p.name for p in out.iterdir()}
        assert {"field.csv", "populations.csv", "convergence.csv", "summary.txt"} <= names

    def test_csv_shapes_and_headers(self, run_dir):
        out, cfg, result, _ = run_dir
        expected = {"field.csv": ["t", "Omega_P", "Omega_S"],
                    "populations.csv": ["t", "rho11", "rho22", "rho33", "abs_rho31"],
                    "convergence.csv": ["iteration", "P", "K", "field_penalty", "state_penalty"]}
        for name, header in expected.items():
            rows = read_csv(out / name)
            assert rows[0] == header
            assert all(len(r) == len(header) for r in rows)
            for r in rows[1:]:
                for cell in r:
                    float(cell)
                    assert "," not in cell
        assert len(read_csv(out / "field.csv")) == cfg.num_steps + 2

    def test_populations_sum_to_one(self, run_dir):
        out, *_ = run_dir
        last = [float(x) for x in read_csv(out / "populations.csv")[-1]]
        assert last[0] == 10.0
        assert sum(last[1:4]) == pytest.approx(1.0, abs=1e-6)

    def test_convergence_matches_records(self, run_dir):
        out, cfg, result, _ = run_dir
        rows = read_csv(out / "convergence.csv")[1:]
        assert len(rows) == len(result.records) <= cfg.max_iterations
        k = np.array([float(r[2]) for r in rows])
        np.testing.assert_allclose(k, [r.cost.total for r in result.records], rtol=1e-11)

    def test_summary(self, run_dir):
        out, cfg, result, summary = run_dir
        text = (out / "summary.txt").read_text().splitlines()
        pairs = dict(line.split(" = ", 1) for line in text)
        assert float(pairs["P"]) == pytest.approx(result.summary["P"], rel=1e-11)
        assert pairs["converged"] in ("true", "false")
        assert pairs["method"] == "conjugate-gradient"
        assert summary["ordering"] in ("intuitive", "counterintuitive", "simultaneous")

    def test_byte_identical_repeat(self, run_dir, tmp_path):
        out, cfg, *_ = run_dir
        execute_run(cfg, tmp_path)
        for name in ("field.csv", "populations.csv", "convergence.csv", "summary.txt"):
            assert (tmp_path / name).read_bytes() == (out / name).read_bytes()

    def test_output_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
        cfg = RunConfig(scenario="max-coherence", method="krotov", num_steps=50, max_iterations=2)
        execute_run(cfg)
        assert (tmp_path / "env" / "summary.txt").exists()


class TestCompare:
    def test_population_table(self, tmp_path):
        configs = [RunConfig(scenario="population-transfer", method=m, **FAST)
                   for m in ("conjugate-gradient", "zhu-rabitz", "krotov")]
        table, summaries = compare_methods(configs, tmp_path)
        lines = table.splitlines()
        assert lines[0] == "[population-transfer]"
        assert lines[1].split() == ["method", "alpha0", "beta", "P", "K", "max", "rho22", "status"]
        assert len(lines) == 6
        assert all((tmp_path / c.label / "field.csv").exists() for c in configs)
        assert len(summaries) == 3

    def test_coherence_table_parallel(self, tmp_path):
        configs = [RunConfig(scenario="max-coherence", method=m, **FAST)
                   for m in ("conjugate-gradient", "zhu-rabitz")]
        table, _ = compare_methods(configs, tmp_path, workers=2)
        assert "|rho31|" in table and "rho11" in table
        assert len(table.splitlines()) == 5

    def test_failed_run_is_flagged(self, tmp_path, monkeypatch):
        import lambda_oct.runner as runner

        def boom(*args, **kwargs):
            raise FloatingPointError("overflow")

        monkeypatch.setattr(runner, "optimize", boom)
        cfg = RunConfig(scenario="population-transfer", method="krotov", **FAST)
        table, summaries = compare_methods([cfg], tmp_path)
        assert "failed" in table
        assert summaries[0]["converged"] is False
        assert "overflow" in (tmp_path / cfg.label / "summary.txt").read_text()

    def test_header_only_table(self):
        text = render_table([], "population-transfer")
        assert len(text.splitlines()) == 2

    def test_duplicate_labels(self):
        cfg = RunConfig(scenario="population-transfer", method="krotov")
        with pytest.raises(ValueError):
            compare_methods([cfg, cfg])
        with pytest.raises(ValueError):
            compare_methods([])


class TestCli:
    def write(self, tmp_path, name, text):
        p = tmp_path / name
        p.write_text(text)
        return p

    def test_run_with_overrides(self, tmp_path, capsys):
        cfg = self.write(tmp_path, "c.txt", "scenario = population-transfer\nmethod = krotov\n")
        code = main(["run", str(cfg), "--out", str(tmp_path / "o"), "--grid", "100",
                     "--max-iter", "3", "--gamma", "1e-12"])
        assert code == 1  # iteration limit, not converged
        assert "converged = False" in capsys.readouterr().out
        rows = read_csv(tmp_path / "o" / "field.csv")
        assert len(rows) == 102
        assert len(read_csv(tmp_path / "o" / "convergence.csv")) == 4

    def test_run_converged_exit_zero(self, tmp_path):
        cfg = self.write(tmp_path, "c.txt", "scenario = population-transfer\n"
                         "method = conjugate-gradient\ngamma = inf\n")
        # gamma = inf is rejected by validation (must be finite)
        assert main(["run", str(cfg), "--out", str(tmp_path)]) == 2
        cfg.write_text("scenario = population-transfer\nmethod = conjugate-gradient\n")
        assert main(["run", str(cfg), "--out", str(tmp_path), "--grid", "100",
                     "--gamma", "1e300"]) == 0

    def test_compare(self, tmp_path, capsys):
        a = self.write(tmp_path, "a.txt", "scenario = max-coherence\nmethod = krotov\n")
        b = self.write(tmp_path, "b.txt", "scenario = max-coherence\nmethod = zhu-rabitz\n")
        code = main(["compare", str(a), str(b), "--out", str(tmp_path / "o"),
                     "--grid", "100", "--max-iter", "2"])
        out = capsys.readouterr().out
        assert code == 1
        assert "[max-coherence]" in out and "zhu-rabitz" in out

    def test_bad_config_exit_two(self, tmp_path, capsys):
        cfg = self.write(tmp_path, "c.txt", "scenario = population-transfer\nmethod = krotov\n"
                         "beta = -1\n")
        assert main(["run", str(cfg)]) == 2
        assert "beta" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["run", str(tmp_path / "nope.txt")]) == 2


def test_example_configs_parse():
    from pathlib import Path

    configs = sorted((Path(__file__).parents[1] / "configs").glob("*.txt"))
    assert len(configs) == 11
    for path in configs:
        cfg = load_config(path)
        assert math.isfinite(cfg.alpha0)
