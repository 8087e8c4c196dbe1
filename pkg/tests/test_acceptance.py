"""Acceptance gate: every headline claim of the package, with pinned tolerances.

Each test re-runs one criterion from :mod:`zenolab.suite` and re-asserts the
numbers directly, so a regression shows up here with the offending metric in
the failure message rather than as an opaque boolean.
"""

from zenolab import suite


def test_01_error_decay_slope_is_one_over_n():
    rec = suite.criterion_error_decay_slope()
    assert rec["passed"]
    assert abs(rec["metrics"]["fitted_slope"] - (-1.0)) <= 0.2
    assert rec["metrics"]["half_width"] <= 0.05


def test_02_quantitative_bound_dominates_random_pairs():
    rec = suite.criterion_theorem1_bound(trials=20, seed=7)
    assert rec["passed"]
    assert rec["metrics"]["worst_ratio"] <= 1.0
    assert len(rec["metrics"]["pairs"]) == 20
    assert all(pair["c_hat"] > 0 for pair in rec["metrics"]["pairs"])


def test_03_classification_is_exact_to_1e10():
    rec = suite.criterion_classification_exactness()
    assert rec["passed"]
    for case in rec["metrics"]["cases"]:
        assert case["proj_err"] <= 1e-10, case


def test_04_volterra_contraction_has_defective_unit_eigenvalue():
    rec = suite.criterion_volterra()
    assert rec["passed"]
    assert rec["metrics"]["multiplicity"] == 256
    assert rec["metrics"]["identity_defect"] >= 0.3
    assert not rec["metrics"]["admissible"]


def test_05_attenuator_converges_on_states_but_not_in_norm():
    rec = suite.criterion_attenuator_power_convergence()
    assert rec["passed"]
    assert rec["metrics"]["state_err_n60"] <= 1e-6
    assert rec["metrics"]["norm_lb_n5"] > 1.0


def test_06_strong_zeno_limit_for_weak_drive():
    rec = suite.criterion_strong_zeno_limit()
    assert rec["passed"]
    assert rec["metrics"]["err_n256"] <= 1e-3
    assert rec["metrics"]["reference_err_n4096"] < rec["metrics"]["err_n256"]


def test_07_chernoff_inequality_on_random_channels():
    rec = suite.criterion_chernoff(trials=100, seed=3)
    assert rec["passed"]
    assert rec["metrics"]["max_ratio"] <= 1.0


def test_08_simplex_counts_match_volume_asymptotics():
    rec = suite.criterion_simplex()
    assert rec["passed"]
    assert rec["metrics"]["bruteforce_agreement"]
    for ratio in rec["metrics"]["ratios"].values():
        assert 0.9 <= ratio <= 1.0


def test_09_catalog_states_are_stationary():
    rec = suite.criterion_stationarity()
    assert rec["passed"]
    m = rec["metrics"]
    assert m["qou_residual"] <= 1e-8
    assert m["jc_residual"] <= 1e-7
    assert m["two_photon_even"] <= m["two_photon_tail"]
    assert m["two_photon_odd"] <= m["two_photon_tail"]


def test_10_embedded_qou_generator_has_arithmetic_spectrum():
    rec = suite.criterion_qou_spectrum()
    assert rec["passed"]
    assert rec["metrics"]["self_adjoint_defect"] <= 1e-10
    assert rec["metrics"]["max_error"] <= 1e-3


def test_11_dyadic_phases_admit_no_zeno_limit():
    rec = suite.criterion_dyadic()
    assert rec["passed"]
    assert rec["metrics"]["oscillation"] > 0.05
