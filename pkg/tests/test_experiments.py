"""Experiment runners: CSV schemas, determinism, scans, predict reports."""

import math
from fractions import Fraction as F

import pytest

from heightdyn import InfiniteValuationError, PreconditionError
from heightdyn.experiments import (
    ScanSpec,
    decimal_string,
    run_height_scan,
    run_orbit_dump,
    run_predict_report,
    run_valuation_trace,
    write_scan_csv,
    write_variation_csv,
)


class TestDecimalString:
    def test_exact_rounding(self):
        assert decimal_string(F(1, 3), 6) == "0.333333"
        assert decimal_string(F(-21, 11), 4) == "-1.9091"
        assert decimal_string(F(5), 2) == "5.00"
        assert decimal_string(F(1, 2), 0 + 1) == "0.5"

    def test_half_even(self):
        assert decimal_string(F(1, 8), 2) == "0.12"  # 0.125 -> even
        assert decimal_string(F(3, 8), 2) == "0.38"


class TestOrbitDump:
    def test_t_zero_single_row(self, eq12, tmp_path):
        path = tmp_path / "o.csv"
        run_orbit_dump(eq12, (F(7, 3), F(0)), 0, path)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("# {")
        assert lines[1] == "t,x,y"
        assert len(lines) == 3
        assert lines[2].startswith("0,2.333333333333,")

    def test_period5_repeats(self, eq12, tmp_path):
        path = tmp_path / "o.csv"
        run_orbit_dump(eq12, (F(21, 11), F(0)), 20, path)
        rows = path.read_text().splitlines()[2:]
        coords = [tuple(r.split(",")[1:]) for r in rows]
        assert len(coords) == 21
        assert len(set(coords)) == 5
        assert coords[0] == coords[5] == coords[10]

    def test_deterministic(self, eq12, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_orbit_dump(eq12, (F(7, 3), F(0)), 100, a)
        run_orbit_dump(eq12, (F(7, 3), F(0)), 100, b)
        assert a.read_bytes() == b.read_bytes()


class TestTraceCsv:
    def test_island_trace(self, eq12, tmp_path):
        path = tmp_path / "t.csv"
        tr = run_valuation_trace(eq12, (F(2), F(0)), 2, 40, path)
        lines = path.read_text().splitlines()
        assert lines[1] == "t,nu_point,nu_x"
        assert len(lines) == 2 + 41
        assert tr.samples[0] == (0, 1)

    def test_fixed_origin_inf(self, eq12, tmp_path):
        path = tmp_path / "t.csv"
        run_valuation_trace(eq12, (F(0), F(0)), 2, 3, path)
        rows = path.read_text().splitlines()[2:]
        assert rows == ["0,inf,inf", "1,inf,inf", "2,inf,inf", "3,inf,inf"]


class TestHeightScan:
    def test_island_segment_constant(self, eq12):
        # segment inside the period-5 island, avoiding the exceptional
        # center (the center is periodic, hence height 0: a zero-density set)
        spec = ScanSpec(
            z_start=(F(106, 55), F(0)),
            z_end=(F(2), F(0)),
            count=6,
            primes=(2,),
            horizons=(1500,),
        )
        res = run_height_scan(eq12, spec)
        vals = [o.values[(2, 1500)] for o in res.orbits]
        assert all(v is not None for v in vals)
        assert all(abs(v - 0.4) < 0.05 for v in vals)
        v, pairs = res.variation[(2, 1500)]
        assert pairs == 5
        assert v < 0.02

    def test_island_center_is_exceptional(self, eq12):
        # the center itself measures 0: bounded periodic orbit
        spec = ScanSpec(
            z_start=(F(21, 11), F(0)),
            z_end=(F(2), F(0)),
            count=2,
            primes=(2,),
            horizons=(500,),
        )
        res = run_height_scan(eq12, spec)
        assert res.orbits[0].values[(2, 500)] == 0.0
        assert abs(res.orbits[1].values[(2, 500)] - 0.4) < 0.05

    def test_count_two_single_difference(self, eq12):
        spec = ScanSpec(
            z_start=(F(2), F(0)),
            z_end=(F(21, 11), F(0)),
            count=2,
            primes=(2,),
            horizons=(200,),
        )
        res = run_height_scan(eq12, spec)
        a, b = (o.values[(2, 200)] for o in res.orbits)
        v, pairs = res.variation[(2, 200)]
        assert pairs == 1
        assert v == abs(b - a)

    def test_exclusion_accounting(self, eq12):
        # the origin is a fixed point with infinite valuation: invalid cells
        spec = ScanSpec(
            z_start=(F(0), F(0)),
            z_end=(F(21, 11), F(0)),
            count=2,
            primes=(2,),
            horizons=(50, 100),
        )
        res = run_height_scan(eq12, spec)
        assert res.invalid_cells == 2
        assert res.valid_cells() + res.invalid_cells == 2 * 2
        v, pairs = res.variation[(2, 50)]
        assert pairs == 0 and v is None

    def test_variation_recomputable(self, eq12):
        spec = ScanSpec(
            z_start=(F(2), F(0)),
            z_end=(F(9, 4), F(0)),
            count=5,
            primes=(2,),
            horizons=(300,),
        )
        res = run_height_scan(eq12, spec)
        series = [o.values[(2, 300)] for o in res.orbits]
        diffs = [abs(b - a) for a, b in zip(series, series[1:])]
        v, pairs = res.variation[(2, 300)]
        assert pairs == len(diffs)
        assert v == pytest.approx(sum(diffs) / len(diffs))

    def test_csv_schemas(self, eq12, tmp_path):
        spec = ScanSpec(
            z_start=(F(2), F(0)),
            z_end=(F(9, 4), F(0)),
            count=3,
            primes=(2,),
            horizons=(100, 200),
        )
        res = run_height_scan(eq12, spec)
        scan_path = tmp_path / "scan.csv"
        var_path = tmp_path / "var.csv"
        write_scan_csv(scan_path, eq12, res)
        write_variation_csv(var_path, eq12, res)
        s_lines = scan_path.read_text().splitlines()
        assert s_lines[1] == "i,x0,y0,hp_T100,hp_T200"
        assert len(s_lines) == 2 + 3
        v_lines = var_path.read_text().splitlines()
        assert v_lines[1] == "T,V,valid_pairs"
        assert [row.split(",")[0] for row in v_lines[2:]] == ["100", "200"]

    def test_scan_deterministic(self, eq12, tmp_path):
        spec = ScanSpec(
            z_start=(F(2), F(0)),
            z_end=(F(9, 4), F(0)),
            count=3,
            primes=(2,),
            horizons=(150,),
        )
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_scan_csv(a, eq12, run_height_scan(eq12, spec))
        write_scan_csv(b, eq12, run_height_scan(eq12, spec))
        assert a.read_bytes() == b.read_bytes()

    def test_threaded_matches_serial(self, eq12, monkeypatch):
        spec = ScanSpec(
            z_start=(F(2), F(0)),
            z_end=(F(9, 4), F(0)),
            count=4,
            primes=(2,),
            horizons=(120,),
        )
        serial = run_height_scan(eq12, spec)
        monkeypatch.setenv("ARITH_ORBIT_THREADS", "4")
        threaded = run_height_scan(eq12, spec)
        assert serial == threaded

    def test_spec_validation(self):
        with pytest.raises(PreconditionError):
            ScanSpec((F(0), F(0)), (F(1), F(0)), 1, (2,), (100,))
        with pytest.raises(PreconditionError):
            ScanSpec((F(0), F(0)), (F(1), F(0)), 3, (2,), ())
        with pytest.raises(PreconditionError):
            ScanSpec((F(0), F(0)), (F(1), F(0)), 3, (2,), (200, 100))


class TestPredictReport:
    def test_island_report(self, eq12):
        hr = run_predict_report(eq12, (F(2), F(0)), (2,), horizon=1000, window=60)
        assert hr.island.period == 5
        assert abs(hr.measured_hp[2] - 0.4) <= 0.05
        assert hr.deviations_hp[2] <= 0.05
        assert abs(hr.measured_h - 0.4 * math.log(2)) <= 0.05

    def test_linear_map(self, linear_strip):
        hr = run_predict_report(linear_strip, (F(1), F(0)), (2,), horizon=2000)
        assert hr.island.period == 1
        assert hr.deviations_hp[2] <= 0.01
        assert hr.deviation_h <= 0.01
        assert hr.lag_times[2] is not None

    def test_fixed_point_all_zeros(self, eq12):
        hr = run_predict_report(eq12, (F(0), F(0)), (2,), horizon=100, window=20)
        assert hr.island.period == 1
        assert hr.measured_hp[2] == 0.0
        assert hr.measured_h == 0.0
        assert float(hr.island.predicted_h) == 0.0
        assert hr.deviations_hp[2] == 0.0
