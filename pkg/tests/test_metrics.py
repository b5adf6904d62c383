import csv
import math

import numpy as np
import pytest
from oracles import linear_quantile

from qbde.errors import ShapeError, UndefinedMetricError
from qbde.metrics import (
    MetricsReport, assign_bins, bin_labels, binned_profile, boxplot_stats, compute_metrics,
    r2_score, write_per_sample_csv,
)


def test_hand_fixture():
    r = compute_metrics([80, 90, 100], [83, 97, 88])
    assert abs(r.mae - 22 / 3) < 1e-9
    assert abs(r.pct_within_abs[5.0] - 100 / 3) < 1e-9
    assert abs(r.pct_within_abs[10.0] - 200 / 3) < 1e-9
    assert abs(r.mse - (9 + 49 + 144) / 3) < 1e-9
    assert abs(r.rmse - math.sqrt(r.mse)) < 1e-12
    # r2 from its definition with the test-set mean
    assert abs(r.r2 - (1 - 202 / 200)) < 1e-9
    # relative: 3/80, 7/90, 12/100 -> within 5%: 1, within 10%: 2
    assert r.pct_within_rel[5.0] == pytest.approx(100 / 3)
    assert r.pct_within_rel[10.0] == pytest.approx(200 / 3)


def test_identities_random(rng):
    for _ in range(50):
        y = rng.uniform(50, 120, size=40)
        p = y + rng.normal(0, 8, size=40)
        r = compute_metrics(y, p)
        assert abs(r.rmse - math.sqrt(r.mse)) < 1e-9
        ss_res = ((y - p) ** 2).sum()
        ss_tot = ((y - y.mean()) ** 2).sum()
        assert abs(r.r2 - (1 - ss_res / ss_tot)) < 1e-9
        assert r.rmse >= r.mae
        assert r.r2 <= 1
        assert r.pct_within_abs[5.0] <= r.pct_within_abs[10.0]
        assert r.pct_within_rel[5.0] <= r.pct_within_rel[10.0]
        perm = rng.permutation(40)
        q = compute_metrics(y[perm], p[perm])
        assert (q.mse, q.mae, q.r2) == pytest.approx((r.mse, r.mae, r.r2), rel=1e-12)


def test_perfect_and_mean_predictors():
    y = np.array([70.0, 85.0, 99.0, 110.0])
    r = compute_metrics(y, y)
    assert r.mse == 0 and r.r2 == 1
    assert all(v == 100 for v in r.pct_within_abs.values())
    assert all(v == 100 for v in r.pct_within_rel.values())
    assert compute_metrics(y, np.full(4, y.mean())).r2 == pytest.approx(0.0, abs=1e-15)


def test_thresholds_inclusive():
    r = compute_metrics([100.0, 100.0], [105.0, 110.0], with_r2=False)
    assert r.pct_within_abs[5.0] == 50 and r.pct_within_abs[10.0] == 100


def test_undefined_r2_and_zero_actual():
    with pytest.raises(UndefinedMetricError):
        compute_metrics([5, 5, 5], [4, 5, 6])
    assert compute_metrics([5, 5, 5], [4, 5, 6], with_r2=False).r2 is None
    r = compute_metrics([0.0, 10.0], [1.0, 10.5])
    assert r.n_zero_actual == 1 and r.pct_within_rel[5.0] == 100.0
    with pytest.raises(ShapeError):
        compute_metrics([1, 2], [1])
    with pytest.raises(ShapeError):
        r2_score([], [])


def test_table_row_format_fixture():
    # reference SVR row, used only as a format and consistency fixture
    row = MetricsReport(n=200, mse=135.40, rmse=11.64, mae=8.92, r2=0.29,
                        pct_within_abs={5.0: 40.50, 10.0: 65.50})
    assert f"{math.sqrt(row.mse):.2f}" == f"{row.rmse:.2f}"
    assert abs(math.sqrt(row.mse) - row.rmse) < 0.005
    assert row.rmse >= row.mae
    assert row.pct_within_abs[5.0] <= row.pct_within_abs[10.0]
    d = row.to_dict()
    assert d["pct_within_abs"] == {"5": 40.5, "10": 65.5}
    assert [f"{v:.2f}" for v in (d["mse"], d["rmse"], d["mae"], d["r2"])] == \
        ["135.40", "11.64", "8.92", "0.29"]


def test_bins_partition(rng):
    edges = [float(e) for e in range(40, 131, 10)]
    assert bin_labels(edges)[0] == "<40" and bin_labels(edges)[-1] == ">=130"
    y = rng.uniform(20, 150, 300)
    which = assign_bins(y, edges)
    prof = binned_profile(y, y + 1, edges)
    assert sum(b.n for b in prof) == 300
    assert [b.n for b in prof] == np.bincount(which, minlength=len(edges) + 1).tolist()
    assert assign_bins([80.0], edges)[0] == assign_bins([85.0], edges)[0]
    with pytest.raises(ValueError):
        assign_bins([1.0], [3, 2])


def test_single_bin_equals_global(rng):
    y = rng.uniform(50, 60, 20)
    p = y + rng.normal(size=20)
    prof = binned_profile(y, p, [0.0, 100.0])
    r = compute_metrics(y, p)
    mid = prof[1]
    assert mid.n == 20 and mid.mae == pytest.approx(r.mae) and mid.mse == pytest.approx(r.mse)
    assert prof[0].n == 0 and prof[0].mae is None


def test_bin_ordering_and_cap():
    y = np.array([55.0, 56.0, 95.0, 96.0])
    p = np.array([56.0, 57.0, 95.0 + 63.245553203367585, 100.0])
    prof = binned_profile(y, p, [50.0, 60.0, 90.0, 100.0])
    lo, hi = prof[1], prof[3]
    assert lo.mae < hi.mae
    assert hi.mse == pytest.approx((4000 + 16) / 2)
    assert hi.mse_capped == pytest.approx((1000 + 16) / 2)


def test_boxplot():
    b = boxplot_stats([5, 1, 3, 2, 4])
    assert b.median == 3
    flat = boxplot_stats([2.0] * 7)
    assert flat.iqr == 0 and flat.outliers == []
    nine = [0.5, 1.2, 2.0, 2.2, 3.9, 4.1, 6.0, 7.5, 30.0]
    b = boxplot_stats(nine)
    s = sorted(nine)
    assert b.q1 == pytest.approx(linear_quantile(s, 0.25))
    assert b.median == pytest.approx(linear_quantile(s, 0.5))
    assert b.q3 == pytest.approx(linear_quantile(s, 0.75))
    assert b.outliers == [30.0]
    assert b.whisker_high == 7.5 and b.whisker_low == 0.5


def test_per_sample_csv(tmp_path):
    path = tmp_path / "s.csv"
    write_per_sample_csv(path, [80.0, 0.0], [83.0, 1.0])
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["actual", "predicted", "abs_err", "sq_err", "rel_err", "bin"]
    assert rows[1][2:] == ["3.0", "9.0", repr(3 / 80), "80-90"]
    assert rows[2][4] == ""
