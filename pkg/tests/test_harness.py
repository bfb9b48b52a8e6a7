import csv
import io
import json

import numpy as np
import pytest

from lagdbf import harness
from lagdbf.exceptions import ConfigurationError, SolverError
from lagdbf.harness import (
    AGGREGATE_FIELDS,
    RAW_FIELDS,
    ExperimentSpec,
    aggregate_csv,
    emit_results,
    raw_csv,
    realization_seed,
    run_experiment,
    run_trace,
    to_json,
    trace_csv,
)


def small_spec(**kwargs):
    base = dict(algorithms=("wmmse",), users=(2,), antennas=(3,), snr_db=(10.0,),
                realizations=2, restarts=2, iters_lagd=10, iters_wmmse=5, iters_gd=10,
                iters_adam=10, arch=(6,), seed=7)
    base.update(kwargs)
    return ExperimentSpec(**base)


class TestSpec:
    @pytest.mark.parametrize("kwargs", [
        dict(algorithms=()), dict(algorithms=("sgd",)), dict(users=()), dict(realizations=0),
        dict(restarts=0), dict(report_mode="mean"), dict(snr_db=(np.inf,)), dict(seed=-1),
        dict(algorithms=("gd", "gd")), dict(gd_step=0.0),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigurationError):
            small_spec(**kwargs)

    def test_users_may_exceed_antennas(self):
        small_spec(users=(5,), antennas=(2,))

    def test_dict_roundtrip(self):
        spec = small_spec(arch=(10, 4))
        assert ExperimentSpec.from_dict(json.loads(json.dumps(spec.to_dict()))) == spec


class TestSeeds:
    def test_distinct_across_cells_and_realizations(self):
        seeds = {realization_seed(0, n, m, s, r)
                 for n in (2, 4) for m in (2, 4) for s in (-10.0, 0.0, 10.0) for r in range(3)}
        assert len(seeds) == 2 * 2 * 3 * 3

    def test_negative_snr_differs_from_positive(self):
        assert realization_seed(0, 4, 4, -5.0, 0) != realization_seed(0, 4, 4, 5.0, 0)


class TestRunExperiment:
    def test_counting(self):
        result = run_experiment(small_spec(realizations=1))
        assert len(result.records) == 1 and len(result.rows) == 1
        assert result.rows[0].n == 1

    def test_paired_channels(self):
        spec = small_spec(algorithms=("gd", "adam", "wmmse", "lagd"), realizations=3)
        result = run_experiment(spec)
        for r in range(3):
            hashes = {rec.channel_hash for rec in result.records if rec.realization == r}
            assert len(hashes) == 1
        assert len({rec.channel_hash for rec in result.records}) == 3

    def test_aggregates_recomputable(self):
        spec = small_spec(algorithms=("wmmse", "gd"), snr_db=(0.0, 20.0), realizations=4)
        result = run_experiment(spec)
        for row in result.rows:
            vals = [r.wsr for r in result.records
                    if (r.algo, r.users, r.antennas, r.snr_db) ==
                    (row.algo, row.users, row.antennas, row.snr_db)]
            assert row.n == len(vals) == 4
            assert abs(row.mean_wsr - np.mean(vals)) < 1e-12
            assert abs(row.var_wsr - np.var(vals)) < 1e-12
            assert row.var_wsr >= 0

    def test_deterministic_and_order_independent(self):
        spec = small_spec(algorithms=("wmmse", "gd"), snr_db=(0.0, 10.0))
        a = raw_csv(run_experiment(spec).records)
        assert raw_csv(run_experiment(spec).records) == a
        # reordering the algorithm list must not change any individual record
        swapped = run_experiment(small_spec(algorithms=("gd", "wmmse"), snr_db=(0.0, 10.0)))
        assert sorted(raw_csv(swapped.records).splitlines()) == sorted(a.splitlines())

    def test_parallel_matches_serial(self):
        spec = small_spec(algorithms=("wmmse", "lagd"))
        assert raw_csv(run_experiment(spec, jobs=2).records) == raw_csv(run_experiment(spec).records)

    def test_timing_off_leaves_wall_empty(self):
        result = run_experiment(small_spec())
        assert all(r.wall_ms is None for r in result.records)
        timed = run_experiment(small_spec(timing=True))
        assert all(r.wall_ms > 0 for r in timed.records)
        assert timed.rows[0].mean_wall_ms > 0

    def test_failures_recorded_and_excluded(self, monkeypatch):
        real = harness.make_solver

        def flaky(spec, algo, config, H):
            solve = real(spec, algo, config, H)
            if algo == "gd":
                def broken(ss):
                    raise SolverError("boom", {"iteration": 0})
                return broken
            return solve

        monkeypatch.setattr(harness, "make_solver", flaky)
        result = run_experiment(small_spec(algorithms=("wmmse", "gd"), realizations=3))
        assert result.n_failed == 3
        assert result.failure_rate == 0.5
        gd_row = [r for r in result.rows if r.algo == "gd"][0]
        assert gd_row.n == 0 and gd_row.failures == 3 and np.isnan(gd_row.mean_wsr)
        failed = [r for r in result.records if r.failed]
        assert all(r.wsr is None and "boom" in r.error for r in failed)


class TestEmit:
    def test_single_row_csv(self, tmp_path):
        result = run_experiment(small_spec(realizations=1))
        raw_path, agg_path = emit_results(result, "csv", tmp_path)
        agg = open(agg_path).read().splitlines()
        assert len(agg) == 2
        assert agg[0] == ",".join(AGGREGATE_FIELDS)
        assert open(raw_path).read().splitlines()[0] == ",".join(RAW_FIELDS)

    def test_aggregate_mean_matches_raw(self):
        result = run_experiment(small_spec(realizations=3))
        raw = list(csv.DictReader(io.StringIO(raw_csv(result.records))))
        agg = list(csv.DictReader(io.StringIO(aggregate_csv(result.rows))))
        assert float(agg[0]["mean_wsr"]) == pytest.approx(np.mean([float(r["wsr"]) for r in raw]),
                                                          abs=1e-12)

    def test_json_roundtrip_exact(self, tmp_path):
        result = run_experiment(small_spec(algorithms=("wmmse", "gd"), timing=True))
        path, = emit_results(result, "json", tmp_path)
        doc = json.load(open(path))
        assert doc["spec"] == result.spec.to_dict()
        for rec, parsed in zip(result.records, doc["raw"]):
            assert parsed["wsr"] == rec.wsr and parsed["wall_ms"] == rec.wall_ms
            assert parsed["seed"] == rec.seed
        for row, parsed in zip(result.rows, doc["aggregate"]):
            assert parsed["mean_wsr"] == row.mean_wsr and parsed["var_wsr"] == row.var_wsr
        assert to_json(result) == open(path).read()

    def test_csv_floats_roundtrip(self):
        result = run_experiment(small_spec())
        raw = list(csv.DictReader(io.StringIO(raw_csv(result.records))))
        assert [float(r["wsr"]) for r in raw] == [r.wsr for r in result.records]

    def test_unwritable(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(OSError):
            emit_results(run_experiment(small_spec(realizations=1)), "csv", blocker / "sub")


class TestTrace:
    def test_lagd_length(self):
        spec = small_spec(algorithms=("lagd",), realizations=1, iters_lagd=25)
        text = trace_csv(run_trace(spec))
        lines = text.splitlines()
        assert lines[0] == "iter,wsr" and len(lines) == 27

    def test_matches_bench_record(self):
        spec = small_spec(realizations=1)
        result = run_trace(spec)
        record = run_experiment(spec).records[0]
        assert result.reported_wsr == record.wsr

    def test_wmmse_objective_column_monotone(self):
        spec = small_spec(realizations=1, iters_wmmse=30, users=(4,), antennas=(4,))
        rows = list(csv.DictReader(io.StringIO(trace_csv(run_trace(spec)))))
        assert rows[0]["objective"] == ""
        obj = np.array([float(r["objective"]) for r in rows[1:]])
        assert np.all(np.diff(obj) <= 1e-9)

    def test_gd_tiny_step_monotone(self):
        spec = small_spec(algorithms=("gd",), realizations=1, users=(1,), antennas=(2,),
                          snr_db=(0.0,), gd_step=1e-3, iters_gd=200, restarts=1)
        rows = list(csv.DictReader(io.StringIO(trace_csv(run_trace(spec)))))
        wsr = np.array([float(r["wsr"]) for r in rows])
        assert np.all(np.diff(wsr) >= -1e-12)

    @pytest.mark.parametrize("kwargs", [
        dict(snr_db=(0.0, 10.0)), dict(algorithms=("wmmse", "gd")), dict(realizations=2),
    ])
    def test_multi_cell_rejected(self, kwargs):
        with pytest.raises(ConfigurationError):
            run_trace(small_spec(**{"realizations": 1, **kwargs}))
