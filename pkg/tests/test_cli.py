import json

import pytest

from fhnburst.cli import main


class TestRegions:
    def test_region_two_drive(self, capsys):
        assert main(["regions", "--E", "0.55", "--omega", "0.0149354"]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "II"
        assert out[1].startswith("e_star_left=")
        values = dict(line.split("=") for line in out[1:])
        assert float(values["e_star_left"]) == pytest.approx(0.2840, abs=5e-4)

    def test_low_amplitude(self, capsys):
        assert main(["regions", "--E", "0.1", "--omega", "0.08"]) == 0
        assert capsys.readouterr().out.splitlines()[0] == "I"


class TestSimulate:
    def test_burst_metrics_and_files(self, capsys, tmp_path):
        out_csv = tmp_path / "traj.csv"
        out_json = tmp_path / "metrics.json"
        out_svg = tmp_path / "traj.svg"
        code = main([
            "simulate", "--E", "0.55", "--omega", "0.0149354",
            "--out", str(out_csv), "--metrics-out", str(out_json),
            "--svg", str(out_svg),
        ])
        assert code == 0
        metrics = json.loads(capsys.readouterr().out)
        assert metrics["spike_count"] == 3
        assert metrics["region"] == "II"
        assert metrics["n_theta"] == 6

        header, first, *_ = out_csv.read_text().splitlines()
        assert header == "t,x,y,theta"
        assert len(first.split(",")) == 4
        assert json.loads(out_json.read_text())["spike_count"] == 3
        svg = out_svg.read_text()
        assert svg.startswith("<svg") and "polyline" in svg


class TestEquilibria:
    def test_json_document(self, capsys, tmp_path):
        out = tmp_path / "eq.json"
        assert main([
            "equilibria", "--E", "0.55", "--omega", "0.0149354", "--out", str(out)
        ]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["region"] == "II"
        assert {e["kind"] for e in doc["equilibria"]} == {"saddle", "node"}
        assert json.loads(out.read_text()) == doc


class TestManifold:
    def test_expansion_and_polyline(self, capsys, tmp_path):
        out = tmp_path / "m.csv"
        assert main([
            "manifold", "--E", "0.482", "--omega", "0.02",
            "--branch", "stable", "--out", str(out),
        ]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["branch"] == "stable"
        assert doc["residual"] <= 1e-12
        lines = out.read_text().splitlines()
        assert lines[0] == "theta,u,x"
        assert len(lines) == 402
        theta, u, x = (float(v) for v in lines[1].split(","))
        assert x == pytest.approx(u - 1.0, abs=1e-12)


class TestEstimate:
    def test_three_spike_drive(self, capsys):
        assert main(["estimate", "--E", "0.55", "--omega", "0.0149354"]) == 0
        assert capsys.readouterr().out.strip() == "estimated=3 simulated=3"


class TestSweepAndContours:
    def test_spec_file_flow(self, capsys, tmp_path):
        spec_file = tmp_path / "sweep.cfg"
        spec_file.write_text(
            "# tiny demonstration sweep\n"
            "omega_lo = 0.019\n"
            "omega_hi = 0.023\n"
            "omega_step = 0.004\n"
            "e_lo = 0.48\n"
            "e_hi = 0.50\n"
            "e_step = 0.02\n"
            "workers = 1\n"
        )
        grid_csv = tmp_path / "grid.csv"
        assert main(["sweep", "--spec", str(spec_file), "--out", str(grid_csv)]) == 0
        lines = grid_csv.read_text().splitlines()
        assert lines[0] == "omega,E,status,spike_count,l2,est_count,region"
        assert len(lines) == 1 + 2 * 2

        out_json = tmp_path / "contours.json"
        out_svg = tmp_path / "contours.svg"
        assert main([
            "contours", "--grid", str(grid_csv),
            "--out", str(out_json), "--svg", str(out_svg),
        ]) == 0
        doc = json.loads(out_json.read_text())
        assert set(doc) == {"spike_count_boundaries", "l2_level_sets"}
        assert out_svg.read_text().startswith("<svg")

    def test_flag_overrides_spec(self, tmp_path, capsys):
        spec_file = tmp_path / "sweep.cfg"
        spec_file.write_text(
            "omega_lo = 0.019\nomega_hi = 0.023\nomega_step = 0.004\n"
            "e_lo = 0.48\ne_hi = 0.50\ne_step = 0.02\n"
        )
        grid_csv = tmp_path / "grid.csv"
        assert main([
            "sweep", "--spec", str(spec_file), "--e-hi", "0.49",
            "--out", str(grid_csv),
        ]) == 0
        lines = grid_csv.read_text().splitlines()
        assert len(lines) == 1 + 2 * 1


class TestErrors:
    def test_flag_error_exit_2(self):
        with pytest.raises(SystemExit) as info:
            main(["simulate", "--E", "0.5"])      # omega missing
        assert info.value.code == 2

    def test_unknown_flag_exit_2(self):
        with pytest.raises(SystemExit) as info:
            main(["regions", "--E", "0.5", "--omega", "0.02", "--bogus", "1"])
        assert info.value.code == 2

    def test_computation_error_exit_1(self, capsys):
        assert main(["contours", "--grid", "/nonexistent/grid.csv"]) == 1
        err = json.loads(capsys.readouterr().err)
        assert "error" in err and err["error"]["type"]

    def test_invalid_parameter_error(self, capsys):
        assert main(["regions", "--E", "0.5", "--omega", "0.02", "--b", "1.5"]) == 1
        err = json.loads(capsys.readouterr().err)
        assert err["error"]["type"] == "ValueError"
