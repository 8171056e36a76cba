import json
from pathlib import Path

import jsonschema
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tailcheck import cli_io
from tailcheck.cli_io import InputError, file_digest, main, read_observations
from tailcheck.quadrature import QuadratureError
from tailcheck.simulation import (
    SimulationConfig,
    build_critical_tables,
    ecdf_sup_distance,
    load_tables,
    sample_pareto,
)
from tailcheck.statistics import evaluate_sample, p_value
from tailcheck.core_model import make_tail_sample

SCHEMA = json.loads((Path(__file__).parents[1] / "docs" / "table.schema.json").read_text())


def write(path, text):
    path.write_text(text)
    return path


def pareto_file(path, theta=2.0, n=2000, seed=0):
    x = sample_pareto(theta, n, np.random.default_rng(seed))
    path.write_text("\n".join(repr(float(v)) for v in x) + "\n")
    return path


class TestReadObservations:
    def test_plain_column(self, tmp_path):
        f = write(tmp_path / "a.csv", "1.5\n2\n3e0\n")
        assert list(read_observations(f)) == [1.5, 2.0, 3.0]

    def test_header_and_comments(self, tmp_path):
        f = write(tmp_path / "a.csv", "# generated\nloss\n1.5\n\n# mid comment\n2.5\n")
        assert list(read_observations(f)) == [1.5, 2.5]

    def test_json_array(self, tmp_path):
        f = write(tmp_path / "a.json", "[1.0, 2.0, 4.5]")
        assert list(read_observations(f)) == [1.0, 2.0, 4.5]

    def test_malformed_lines_listed(self, tmp_path):
        f = write(tmp_path / "a.csv", "value\n1.0\nabc\n2.0\n3,4\n")
        with pytest.raises(InputError) as exc:
            read_observations(f)
        assert "3" in str(exc.value) and "5" in str(exc.value)

    def test_empty_file(self, tmp_path):
        with pytest.raises(InputError):
            read_observations(write(tmp_path / "e.csv", ""))

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            read_observations(tmp_path / "nope.csv")

    @given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=1, max_size=30))
    @settings(max_examples=40, deadline=None)
    def test_round_trip(self, values):
        import tempfile

        with tempfile.TemporaryDirectory() as d:
            f = Path(d) / "v.csv"
            f.write_text("\n".join(repr(v) for v in values))
            assert list(read_observations(f)) == values


class TestExitCodes:
    def test_empty_input_exit_2(self, tmp_path):
        f = write(tmp_path / "e.csv", "")
        assert main(["test", "--data", str(f), "--x0", "1", "--out", str(tmp_path / "r.json")]) == 2

    def test_malformed_exit_2(self, tmp_path, capsys):
        f = write(tmp_path / "m.csv", "1\nfoo\n")
        assert main(["test", "--data", str(f), "--x0", "1", "--out", str(tmp_path / "r.json")]) == 2
        assert "2" in capsys.readouterr().err

    def test_no_exceedances_exit_3(self, tmp_path):
        f = write(tmp_path / "s.csv", "1\n2\n3\n")
        assert main(["test", "--data", str(f), "--x0", "10", "--out", str(tmp_path / "r.json")]) == 3

    def test_threshold_too_high_exit_3(self, tmp_path):
        code = main(["simulate", "--dist", "pareto:3", "--n", "100", "--x0", "3", "--reps", "4",
                     "--out-dir", str(tmp_path)])
        assert code == 3

    def test_quadrature_failure_exit_4(self, tmp_path, monkeypatch):
        def boom(*a, **k):
            raise QuadratureError("quadrature non-convergence")

        monkeypatch.setattr(cli_io, "evaluate_sample", boom)
        f = pareto_file(tmp_path / "p.csv", n=200)
        assert main(["test", "--data", str(f), "--x0", "1", "--reps", "3", "--out", str(tmp_path / "r.json")]) == 4


class TestCmdTest:
    def test_report_fields(self, tmp_path):
        f = pareto_file(tmp_path / "p.csv", theta=2.0, n=400, seed=1)
        out = tmp_path / "r.json"
        assert main(["test", "--data", str(f), "--x0", "2", "--reps", "49", "--seed", "7", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["format_version"] == 1
        md = doc["metadata"]
        assert md["n"] == 400 and md["x0"] == 2.0 and md["m"] > 0
        assert md["grid"] == {"delta": 0.1, "x_max": 8.0}
        for k in ("ks", "cvm", "ad"):
            assert doc[k] >= 0
            assert 0 < doc["p_values"][k] <= 1
        assert len(doc["process"]["x"]) == 80
        assert doc["manifest"]["inputs"][str(f)] == file_digest(f)
        assert "created" not in doc["manifest"]

    def test_small_tail_warning_recorded(self, tmp_path):
        f = pareto_file(tmp_path / "p.csv", theta=2.0, n=60, seed=3)
        out = tmp_path / "r.json"
        assert main(["test", "--data", str(f), "--x0", "2", "--reps", "9", "--out", str(out)]) == 0
        assert json.loads(out.read_text())["metadata"]["warnings"]

    def test_rerun_identical(self, tmp_path):
        f = pareto_file(tmp_path / "p.csv", n=300, seed=2)
        args = ["test", "--data", str(f), "--x0", "1.5", "--reps", "19", "--seed", "1"]
        main(args + ["--out", str(tmp_path / "a.json")])
        main(args + ["--out", str(tmp_path / "b.json")])
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_scale_invariance(self, tmp_path):
        x = sample_pareto(2.0, 500, np.random.default_rng(4))
        write(tmp_path / "a.csv", "\n".join(repr(float(v)) for v in x))
        write(tmp_path / "b.csv", "\n".join(repr(float(v * 8.0)) for v in x))
        common = ["--reps", "9"]
        main(["test", "--data", str(tmp_path / "a.csv"), "--x0", "2", *common, "--out", str(tmp_path / "a.json")])
        main(["test", "--data", str(tmp_path / "b.csv"), "--x0", "16", *common, "--out", str(tmp_path / "b.json")])
        a, b = (json.loads((tmp_path / n).read_text()) for n in ("a.json", "b.json"))
        for k in ("ks", "cvm", "ad"):
            assert a[k] == b[k]

    def test_with_table_file(self, tmp_path):
        table = tmp_path / "t.json"
        assert main(["table", "--theta0", "2", "--n", "400", "--x0", "2", "--reps", "30", "--out", str(table)]) == 0
        f = pareto_file(tmp_path / "p.csv", n=400, seed=5)
        out = tmp_path / "r.json"
        assert main(["test", "--data", str(f), "--x0", "2", "--table", str(table), "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert set(doc["p_values"]) == {"ks", "cvm", "ad"}
        assert doc["manifest"]["seed"] is None

    def test_incompatible_table_grid(self, tmp_path):
        table = tmp_path / "t.json"
        main(["table", "--n", "400", "--x0", "1", "--reps", "10", "--grid-max", "6", "--out", str(table)])
        f = pareto_file(tmp_path / "p.csv", n=400, seed=5)
        code = main(["test", "--data", str(f), "--x0", "2", "--table", str(table), "--out", str(tmp_path / "r.json")])
        assert code == 2


class TestCmdSimulate:
    def test_single_rep(self, tmp_path):
        assert main(["simulate", "--dist", "pareto:2", "--n", "200", "--x0", "1", "--reps", "1",
                     "--out-dir", str(tmp_path)]) == 0
        for k in ("ks", "cvm", "ad"):
            lines = (tmp_path / f"pareto2_{k}.csv").read_text().splitlines()
            assert lines[0] == "value,ecdf"
            assert len(lines) == 2 and lines[1].endswith(",1.0")
        doc = json.loads((tmp_path / "pareto2_curves.json").read_text())
        assert doc["format_version"] == 1 and doc["curves"]["ks"]["retained"] == 1

    def test_two_dists_and_rerun(self, tmp_path):
        args = ["simulate", "--dist", "pareto:3", "--dist", "cauchy", "--n", "300", "--x0", "1",
                "--reps", "12", "--seed", "5", "--stats", "ks,ad"]
        main(args + ["--out-dir", str(tmp_path / "a")])
        main(args + ["--out-dir", str(tmp_path / "b")])
        names = sorted(p.name for p in (tmp_path / "a").iterdir())
        assert "sup_distances.json" in names and "cauchy_ad.csv" in names
        assert not any("cvm" in n for n in names)
        for n in names:
            assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()

    def test_thread_env_does_not_change_output(self, tmp_path, monkeypatch):
        args = ["simulate", "--dist", "cauchy", "--n", "300", "--x0", "1", "--reps", "10", "--seed", "9"]
        main(args + ["--out-dir", str(tmp_path / "a")])
        monkeypatch.setenv("TAILCHECK_THREADS", "3")
        main(args + ["--out-dir", str(tmp_path / "b")])
        for p in (tmp_path / "a").iterdir():
            assert p.read_bytes() == (tmp_path / "b" / p.name).read_bytes()

    def test_bad_stats_flag(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["simulate", "--dist", "cauchy", "--n", "10", "--x0", "1", "--stats", "ks,foo",
                  "--out-dir", str(tmp_path)])


class TestCmdTable:
    def test_schema_and_digest(self, tmp_path):
        args = ["table", "--theta0", "1", "--n", "300", "--x0", "1", "--reps", "25", "--seed", "3"]
        main(args + ["--out", str(tmp_path / "a.json")])
        main(args + ["--out", str(tmp_path / "b.json")])
        doc = json.loads((tmp_path / "a.json").read_text())
        jsonschema.validate(doc, SCHEMA)
        assert file_digest(tmp_path / "a.json") == file_digest(tmp_path / "b.json")
        assert set(load_tables(tmp_path / "a.json")) == {"ks", "cvm", "ad"}

    def test_schema_rejects_bad_version(self, tmp_path):
        main(["table", "--n", "300", "--x0", "1", "--reps", "5", "--stats", "ks", "--out", str(tmp_path / "a.json")])
        doc = json.loads((tmp_path / "a.json").read_text())
        doc["format_version"] = 2
        with pytest.raises(jsonschema.ValidationError):
            jsonschema.validate(doc, SCHEMA)

    @pytest.mark.slow
    def test_theta_flag_quantiles_close(self, tmp_path):
        docs = []
        for theta in ("1", "3"):
            out = tmp_path / f"t{theta}.json"
            main(["table", "--theta0", theta, "--n", "300", "--x0", "1", "--reps", "1500", "--seed", "11",
                  "--stats", "ks", "--out", str(out)])
            docs.append(load_tables(out)["ks"])
        assert ecdf_sup_distance(docs[0].draws, docs[1].draws) <= 0.06


@pytest.fixture(scope="module")
def null_tables():
    cfg = SimulationConfig(distribution="pareto", theta0=2.0, n=5000, x0=5.0, reps=1000, master_seed=2024)
    return build_critical_tables(cfg)


@pytest.mark.slow
class TestSizeAndPower:
    def test_size_under_pareto_null(self, null_tables):
        kept = 0
        for s in range(100):
            x = sample_pareto(2.0, 5000, np.random.default_rng(10_000 + s))
            _, _, stats = evaluate_sample(make_tail_sample(x, 5.0), 0.1, 8.0)
            kept += all(p_value(stats[k], null_tables[k]) > 0.05 for k in stats)
        assert kept >= 90

    @pytest.mark.xfail(
        strict=True,
        reason="with x0=2 a normal sample leaves m~110 exceedances and the transformed "
        "statistics have almost no power against this light tail: median p ~0.5",
    )
    def test_power_against_normal(self, null_tables):
        ps = []
        for s in range(30):
            x = np.random.default_rng(20_000 + s).standard_normal(5000)
            _, _, stats = evaluate_sample(make_tail_sample(x, 2.0), 0.1, 8.0)
            ps.append(min(p_value(stats[k], null_tables[k]) for k in stats))
        assert np.median(ps) < 0.05
