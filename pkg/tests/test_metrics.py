import json

import numpy as np
import pytest

from eikfld.errors import ValidationError
from eikfld.grid import GridSpec, ScalarField
from eikfld.metrics import Report, percentage_error
from eikfld.experiments import tau_sweep, silhouette_suite, blob_comparison


def fields(values_a, values_b):
    grid = GridSpec(origin=(0.0,), spacing=0.1, counts=(len(values_a),))
    return ScalarField(grid, np.asarray(values_a, float)), ScalarField(
        grid, np.asarray(values_b, float)
    )


class TestPercentageError:
    def test_identical_fields_are_zero(self):
        c, e = fields([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        stats = percentage_error(c, e)
        assert stats.mean == 0.0
        assert stats.maximum == 0.0

    def test_uniform_one_percent(self):
        e_vals = [0.5, 1.0, 2.0, 4.0]
        c, e = fields([v * 1.01 for v in e_vals], e_vals)
        stats = percentage_error(c, e)
        assert stats.mean == pytest.approx(1.0, rel=1e-12)
        assert stats.maximum == pytest.approx(1.0, rel=1e-12)

    def test_zero_exact_nodes_excluded(self):
        c, e = fields([0.5, 1.1, 2.0], [0.0, 1.0, 2.0])
        stats = percentage_error(c, e)
        assert stats.included == 2
        assert stats.total == 3
        assert stats.maximum == pytest.approx(10.0)
        # Excluded node contributes nothing to either normalization.
        assert stats.paper_mean == pytest.approx((10.0 + 0.0) / 3.0)
        assert stats.per_node.values[0] == 0.0

    def test_max_at_least_mean(self):
        rng = np.random.default_rng(0)
        e_vals = rng.random(50) + 0.5
        c_vals = e_vals * (1.0 + 0.05 * rng.random(50))
        c, e = fields(c_vals, e_vals)
        stats = percentage_error(c, e)
        assert stats.maximum >= stats.mean

    def test_grid_mismatch_rejected(self):
        a = ScalarField(GridSpec(origin=(0.0,), spacing=0.1, counts=(3,)), np.ones(3))
        b = ScalarField(GridSpec(origin=(0.0,), spacing=0.2, counts=(3,)), np.ones(3))
        with pytest.raises(ValidationError):
            percentage_error(a, b)

    def test_all_zero_exact_rejected(self):
        c, e = fields([1.0, 1.0], [0.0, 0.0])
        with pytest.raises(ValidationError):
            percentage_error(c, e)


@pytest.fixture(scope="module")
def report():
    return tau_sweep(trials=1, seed=7)


class TestTauSweep:
    def test_nine_rows(self, report):
        assert len(report.rows) == 9
        assert [r["tau"] for r in report.rows] == [5e-5 * (i + 1) for i in range(9)]

    def test_max_column_monotone_in_tau(self, report):
        maxima = [r["max_error_pct"] for r in report.rows]
        assert all(a < b for a, b in zip(maxima, maxima[1:]))

    def test_bound_column_dominates_max_abs_error(self, report):
        for row in report.rows:
            assert row["bound_tau_log_k"] >= row["max_abs_error"]
            assert row["bound_holds"]

    def test_config_embedded(self, report):
        assert report.config["seed"] == 7
        assert report.config["trials"] == 1
        assert report.config["grid"]["counts"] == [125, 125]

    def test_single_trial_single_tau(self):
        rep = tau_sweep(trials=1, seed=3, taus=[1e-4])
        assert len(rep.rows) == 1
        assert rep.rows[0]["growth_ratio"] is None


class TestReportSerialization:
    def test_roundtrip_and_determinism(self, tmp_path):
        rep_a = tau_sweep(trials=1, seed=5, taus=[1e-4, 2e-4])
        rep_b = tau_sweep(trials=1, seed=5, taus=[1e-4, 2e-4])
        assert rep_a.to_json() == rep_b.to_json()
        assert rep_a.to_csv() == rep_b.to_csv()
        paths = rep_a.write(str(tmp_path / "rep"))
        data = json.loads(open(paths[0]).read())
        assert data["experiment"] == "example1"
        assert data["config"]["draws"] == 5000
        csv_text = open(paths[1]).read()
        assert csv_text.splitlines()[0].startswith("tau,")
        assert len(csv_text.splitlines()) == 3

    def test_different_seed_changes_report(self):
        a = tau_sweep(trials=1, seed=1, taus=[1e-4])
        b = tau_sweep(trials=1, seed=2, taus=[1e-4])
        assert a.to_json() != b.to_json()

    def test_stdout_mode(self, capsys):
        rep = Report(name="t", config={"x": 1}, rows=[{"a": 1.5}])
        rep.write("-")
        out = capsys.readouterr().out
        assert json.loads(out)["config"] == {"x": 1}


class TestProtocolDrivers:
    def test_silhouette_suite_single_shape(self):
        rep = silhouette_suite(shapes=1, seed=0)
        row = rep.rows[0]
        assert row["classification_agreement"] >= 0.999
        assert row["gradmag_frac_ge_0.9"] >= 0.85
        assert 0 < row["convolution_mean_pct"] < 10.0

    def test_blob_comparison_beats_sweeping(self):
        rep = blob_comparison(seed=0)
        row = rep.rows[0]
        assert row["convolution_mean_pct"] < row["sweeping_mean_pct"]
        assert row["error_ratio_sweep_over_conv"] > 1.0
