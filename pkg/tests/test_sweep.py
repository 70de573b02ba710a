import json

import numpy as np
import pytest

import fhnburst.sweep as sweep_mod
from fhnburst.burst import burst_metrics
from fhnburst.errors import IncompleteGrid, NonFiniteState
from fhnburst.geometry import classify_region
from fhnburst.model import Forcing, ModelParams
from fhnburst.sweep import (
    SweepGrid,
    SweepSpec,
    grid_from_rows,
    load_grid_csv,
    run_sweep,
    spec_fingerprint,
    write_grid_csv,
)

SMALL = dict(omega_range=(0.018, 0.028, 0.005), e_range=(0.46, 0.52, 0.03))


class TestSweepSpec:
    def test_axes(self):
        spec = SweepSpec(omega_range=(0.01, 0.04, 0.01), e_range=(0.4, 0.5, 0.05))
        assert np.allclose(spec.omegas, [0.01, 0.02, 0.03, 0.04])
        assert np.allclose(spec.e_values, [0.4, 0.45, 0.5])
        assert spec.cell_count == 12

    def test_production_mesh_shape(self):
        # a production-scale mesh is ~1.5M cells; only its shape is checked
        spec = SweepSpec(omega_range=(0.003, 0.1, 5e-5), e_range=(0.3, 0.7, 5e-4))
        assert len(spec.omegas) == 1941
        assert len(spec.e_values) == 801

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(omega_range=(0.1, 0.01, 0.01), e_range=(0.4, 0.5, 0.05)),
            dict(omega_range=(0.01, 0.04, 0.0), e_range=(0.4, 0.5, 0.05)),
            dict(omega_range=(0.01, 0.04, 0.01), e_range=(0.4, 0.5, 0.05), workers=0),
            dict(omega_range=(0.01, 0.04, 0.01), e_range=(0.4, 0.5, 0.05),
                 metrics=("bogus",)),
        ],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            SweepSpec(**kwargs)


class TestRunSweep:
    def test_single_cell_matches_pipeline(self, params):
        f = Forcing(E=0.5, omega=0.02)
        spec = SweepSpec(omega_range=(0.02, 0.0201, 0.01), e_range=(0.5, 0.501, 0.01))
        assert spec.cell_count == 1
        grid = run_sweep(spec, params)
        cell = grid.cell(0, 0)
        m = burst_metrics(params, f)
        assert cell.status == "ok"
        assert cell.spike_count == m.spike_count
        assert cell.l2 == m.l2                     # bit-exact
        assert cell.est_count == m.est_count
        assert cell.region == classify_region(params, f)

    def test_worker_count_invariance(self, params):
        spec1 = SweepSpec(workers=1, **SMALL)
        spec2 = SweepSpec(workers=2, **SMALL)
        csv1 = run_sweep(spec1, params).to_csv()
        csv2 = run_sweep(spec2, params).to_csv()
        assert csv1 == csv2

    def test_resume_byte_identical(self, params, tmp_path):
        ck = str(tmp_path / "ck.jsonl")
        spec = SweepSpec(workers=1, **SMALL)
        full = run_sweep(spec, params, checkpoint_path=ck).to_csv()
        # simulate a crash: keep the header plus the first three records
        lines = open(ck).read().splitlines()
        with open(ck, "w") as fh:
            fh.write("\n".join(lines[:4]) + "\n")
        resumed = run_sweep(spec, params, checkpoint_path=ck)
        assert resumed.to_csv() == full
        # compacted log holds every cell in index order
        recs = open(ck).read().splitlines()
        assert len(recs) == 1 + spec.cell_count
        assert [json.loads(r)["i"] for r in recs[1:]] == list(range(spec.cell_count))

    def test_checkpoint_mismatch(self, params, tmp_path):
        ck = str(tmp_path / "ck.jsonl")
        spec = SweepSpec(workers=1, **SMALL)
        run_sweep(spec, params, checkpoint_path=ck)
        other = SweepSpec(workers=1, omega_range=(0.018, 0.028, 0.005),
                          e_range=(0.40, 0.46, 0.03))
        with pytest.raises(ValueError):
            run_sweep(other, params, checkpoint_path=ck)

    def test_failed_cells_recorded(self, params, monkeypatch):
        real = burst_metrics

        def flaky(p, forcing, config=None, **kw):
            if abs(forcing.omega - 0.023) < 1e-12:
                raise NonFiniteState("synthetic failure")
            return real(p, forcing, config, **kw)

        monkeypatch.setattr(sweep_mod, "burst_metrics", flaky)
        spec = SweepSpec(workers=1, **SMALL)
        grid = run_sweep(spec, params)
        statuses = {c.status for c in grid.cells}
        assert "err:NonFiniteState" in statuses
        failed = [c for c in grid.cells if c.status != "ok"]
        assert all(c.l2 is None and c.spike_count is None for c in failed)
        assert all(c.region is not None for c in failed)   # closed-form part still fills
        counts = grid.value_array("spike_count")
        assert np.isnan(counts).sum() == len(failed)


class TestCsv:
    def test_header_and_shape(self, params):
        spec = SweepSpec(workers=1, **SMALL)
        grid = run_sweep(spec, params)
        text = grid.to_csv()
        lines = text.strip().split("\n")
        assert lines[0] == "omega,E,status,spike_count,l2,est_count,region"
        assert len(lines) == 1 + spec.cell_count
        # row-major: omega outer, E inner
        first = lines[1].split(",")
        second = lines[2].split(",")
        assert first[0] == second[0]
        assert float(second[1]) > float(first[1])

    def test_full_precision_round_trip(self, params, tmp_path):
        spec = SweepSpec(workers=1, **SMALL)
        grid = run_sweep(spec, params)
        path = str(tmp_path / "grid.csv")
        write_grid_csv(grid, path)
        omegas, e_values, rows = load_grid_csv(path)
        assert len(rows) == spec.cell_count
        xs, ys, arrays = grid_from_rows(omegas, e_values, rows)
        want = grid.value_array("l2")
        assert np.array_equal(arrays["l2"], want)          # 17 digits survive

    def test_incomplete_grid_raises(self, params):
        spec = SweepSpec(workers=1, **SMALL)
        grid = SweepGrid(spec, params)
        with pytest.raises(IncompleteGrid):
            grid.to_csv()
        with pytest.raises(IncompleteGrid):
            grid.value_array("l2")

    def test_fingerprint_depends_on_spec(self, params):
        from fhnburst.integrator import IntegratorConfig

        cfg = IntegratorConfig()
        s1 = SweepSpec(workers=1, **SMALL)
        s2 = SweepSpec(workers=4, **SMALL)     # workers do not change results
        s3 = SweepSpec(workers=1, omega_range=(0.018, 0.028, 0.005),
                       e_range=(0.40, 0.46, 0.03))
        assert spec_fingerprint(s1, params, cfg) == spec_fingerprint(s2, params, cfg)
        assert spec_fingerprint(s1, params, cfg) != spec_fingerprint(s3, params, cfg)
