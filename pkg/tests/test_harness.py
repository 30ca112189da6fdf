import json
import math

import numpy as np
import pytest

from polycond import harness as H
from polycond.randsys import EnsembleSpec, EquationModel

CONFIG_TEXT = """
# small cubic on the circle
n = 2
degrees = [3]
seed = 11
trials = 24
t_grid = [1, 2, 4, 8]
constant_trials = 10000
"""


@pytest.fixture(scope="module")
def small_cfg():
    return H.load_config(CONFIG_TEXT)


@pytest.fixture(scope="module")
def small_report(small_cfg):
    return H.run_tail_experiment(small_cfg)


class TestConfig:
    def test_parse(self, small_cfg):
        assert small_cfg.ensemble.n == 2
        assert small_cfg.ensemble.degrees == (3,)
        assert small_cfg.ensemble.seed == 11
        assert small_cfg.trials == 24
        assert small_cfg.t_grid == (1.0, 2.0, 4.0, 8.0)

    def test_round_trip(self, small_cfg):
        assert H.load_config(H.dumps_config(small_cfg)) == small_cfg

    @pytest.mark.parametrize(
        "line, msg",
        [
            ("t_grid = [2, 1]", "t_grid"),
            ("t_grid = [0.5, 2]", "t_grid"),
            ("trials = 0", "trials"),
            ("jobs = 0", "jobs"),
            ("bogus = 1", "unknown"),
            ("coarse_delta = 1.5", "coarse_delta"),
            ("constants = {\"Z\": 1}", "unknown"),
        ],
    )
    def test_rejects(self, line, msg):
        with pytest.raises(ValueError, match=msg):
            H.load_config("n = 2\ndegrees = [2]\n" + line + "\n")

    def test_bad_lines(self):
        with pytest.raises(ValueError, match="line 1"):
            H.load_config("n 2\n")
        with pytest.raises(ValueError, match="line 2"):
            H.load_config("n = 2\ndegrees = [2,\n")

    def test_replace_seed(self, small_cfg):
        c2 = small_cfg.replace(seed=5, trials=3)
        assert c2.ensemble.seed == 5 and c2.trials == 3
        assert c2.ensemble.degrees == small_cfg.ensemble.degrees


class TestWilson:
    @pytest.mark.parametrize("p", [0.1, 0.3, 0.5])
    @pytest.mark.parametrize("T", [200, 1000])
    def test_root_T_scaling(self, p, T):
        def width(n):
            lo, hi = H.wilson_interval(round(p * n), n)
            return hi - lo

        assert width(2 * T) / width(T) == pytest.approx(1 / math.sqrt(2), rel=0.2)
        assert width(4 * T) / width(T) == pytest.approx(0.5, rel=0.2)

    def test_contains_estimate(self):
        for n in (1, 7, 50):
            for k in range(n + 1):
                lo, hi = H.wilson_interval(k, n)
                assert lo <= k / n <= hi

    def test_empty(self):
        assert H.wilson_interval(0, 0) == (0.0, 1.0)


class TestFitA:
    def test_smallest_admissible(self):
        kappas = [100.0, 10.0, 1.0, 1.0]
        # bound 1/4: at most one trial may reach t A M0
        A = H.fit_A(kappas, [1.0], 1.0, lambda t: 0.25)
        assert A == 10.0
        k = np.asarray(kappas)
        assert np.count_nonzero(k > A) <= 1
        assert np.count_nonzero(k >= A * (1 + 1e-12)) <= 1
        assert np.count_nonzero(k >= A * (1 - 1e-12)) > 1

    def test_vacuous_bound(self):
        assert H.fit_A([5.0, 3.0], [1.0, 2.0], 1.0, lambda t: 2.0) == 0.0


class TestTail:
    def test_valid_and_uncensored(self, small_report):
        assert small_report.ensemble_valid
        assert small_report.statistics["censored_fraction"] < 0.05

    def test_survival_monotone(self, small_report):
        ps = [r["p_general"] for r in small_report.survival]
        assert all(a >= b for a, b in zip(ps, ps[1:]))
        assert small_report.checks["survival_monotone"]

    def test_ci_contains_point(self, small_report):
        for r in small_report.survival:
            assert r["ci_low_general"] <= r["p_general"] <= r["ci_high_general"]

    def test_lower_bound_never_violated(self, small_report):
        lb = small_report.checks["lower_bound"]
        assert lb["checked"] == small_report.statistics["trials"]
        assert lb["sqrt_m1_form_violations"] == 0
        assert lb["corrected_form_violations"] == 0

    def test_trial_brackets(self, small_report):
        for t in small_report.trials:
            assert t.kappa_lower <= t.kappa_estimate <= t.kappa_upper
            assert t.kappa_lower >= 1.0

    def test_zero_variance_ensemble(self):
        ens = EnsembleSpec.gaussian(2, (2,), variance=0.0)
        rep = H.run_tail_experiment(H.ExperimentConfig(ens, trials=3))
        assert not rep.ensemble_valid
        assert all(math.isinf(t.kappa_estimate) for t in rep.trials)
        assert all(t.note == "zero system" for t in rep.trials)

    def test_partially_zero_model_is_valid(self):
        models = (EquationModel("gaussian", (0.0, 1.0, 0.0)),)
        ens = EnsembleSpec(2, (2,), models, seed=1)
        rep = H.run_tail_experiment(H.ExperimentConfig(ens, trials=4, constants={"K": 1, "c0": 1, "c0tilde": 1}))
        assert rep.ensemble_valid


class TestExpectation:
    def test_statistics(self):
        cfg = H.load_config(CONFIG_TEXT).replace(trials=16)
        rep = H.run_expectation_experiment(cfg)
        s = rep.statistics
        assert math.isfinite(s["mean_log_kappa"]) and s["se_log_kappa"] > 0
        assert s["mean_kappa"] >= math.exp(s["mean_log_kappa"])
        assert s["fitted_c"] == pytest.approx(s["mean_kappa"] / s["expectation_scale"])
        assert rep.survival == [] and rep.bound_curves == []


class TestEmit:
    def test_round_trip(self, small_report, tmp_path):
        files = H.emit_report(small_report, tmp_path / "r")
        assert set(files) == {"results", "survival", "bounds", "trials", "summary"}
        back = H.load_report(tmp_path / "r")
        assert back == small_report
        assert H.load_report(files["results"]).to_dict() == small_report.to_dict()

    def test_tables_embed_provenance(self, small_report, tmp_path):
        files = H.emit_report(small_report, tmp_path)
        for key in ("survival", "bounds", "trials"):
            first = files[key].read_text().splitlines()[0]
            assert first.startswith("# version=") and "seed=11" in first
        summary = files["summary"].read_text()
        assert "seed: 11" in summary and "version:" in summary

    def test_results_are_valid_json(self, small_report, tmp_path):
        files = H.emit_report(small_report, tmp_path)
        doc = json.loads(files["results"].read_text())
        assert "wall_time" not in doc
        assert all("wall_time" not in t for t in doc["trials"])

    def test_empty_grid_omits_tables(self, small_cfg, tmp_path):
        rep = H.run_tail_experiment(small_cfg.replace(t_grid=[], trials=4))
        files = H.emit_report(rep, tmp_path)
        assert "survival" not in files and "bounds" not in files
        assert files["summary"].exists()
        assert not (tmp_path / "survival.tsv").exists()

    def test_byte_identical(self, small_cfg, small_report, tmp_path):
        a = H.emit_report(small_report, tmp_path / "a")["results"].read_bytes()
        again = H.run_tail_experiment(small_cfg)
        b = H.emit_report(again, tmp_path / "b")["results"].read_bytes()
        par = H.run_tail_experiment(small_cfg.replace(jobs=2))
        c = H.emit_report(par, tmp_path / "c")["results"].read_bytes()
        assert a == b
        # jobs is part of the embedded config; everything else must match
        da, dc = json.loads(a), json.loads(c)
        assert da["config"].pop("jobs") == 1 and dc["config"].pop("jobs") == 2
        assert da == dc

    def test_unwritable(self, small_report, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(OSError, match="file"):
            H.emit_report(small_report, blocker / "sub")


class TestPropertySuite:
    def test_quick(self):
        results = H.run_property_suite(seed=0, scale="quick")
        names = {r.name for r in results}
        assert {"weyl_monomial_unit", "kellogg_equal_degree", "condition_number_theorem_n2", "taylor_growth"} <= names
        for r in results:
            assert r.samples > 0 and r.inequality
            assert r.passed, r

    def test_bad_scale(self):
        with pytest.raises(ValueError):
            H.run_property_suite(scale="huge")
