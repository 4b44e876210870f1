"""Weight families, auxiliary functions, and the condition certificates."""

import math

import numpy as np
import pytest

from convinv import (
    CustomProfileWeight,
    LocallyFiniteWeight,
    PolynomialWeight,
    SubexpLogWeight,
    SubexpPowerWeight,
    WeightError,
    build_auxiliary,
    check_growth_condition,
    check_summability,
    check_weight_axioms,
    validate_algebra_condition,
    validate_weak_subadditivity,
    weight_eval,
    weight_from_config,
)


def test_weight_eval_examples(z1, lf):
    w = PolynomialWeight(z1, 2.0)
    assert weight_eval(w, (3,)) == pytest.approx(16.0)
    sg = SubexpPowerWeight(z1, 0.5, 1.0)
    assert weight_eval(sg, (4,)) == pytest.approx(math.e**2)
    wl = LocallyFiniteWeight(lf)
    assert weight_eval(wl, frozenset({2})) == pytest.approx(5.0)  # G_3 \ G_2: 1 + n_2
    assert weight_eval(wl, lf.identity) == 1.0
    assert weight_eval(wl, frozenset({0})) == 1.0  # inside G_1


def test_weight_param_validation(z1):
    with pytest.raises(WeightError):
        SubexpPowerWeight(z1, 1.5, 1.0)
    with pytest.raises(WeightError):
        SubexpLogWeight(z1, -1.0, 1.0)
    with pytest.raises(WeightError):
        PolynomialWeight(z1, -2.0)
    with pytest.raises(WeightError):
        CustomProfileWeight(z1, lambda n: np.asarray(n, dtype=float) + 1.0)


def test_axioms_verified_for_builtin_families(z1):
    for w in (PolynomialWeight(z1, 2.0), SubexpPowerWeight(z1, 0.5, 1.0),
              SubexpLogWeight(z1, 1.0, 1.0)):
        rep = check_weight_axioms(w, radius=10, samples=500, seed=3)
        assert rep.verified, (w.family, rep.evidence)


def test_axioms_refuted_for_convex_profile(z1):
    # omega(1)^2 = e^2 < omega(2) = e^4
    w = CustomProfileWeight(z1, lambda n: np.asarray(n, dtype=float) ** 2)
    rep = check_weight_axioms(w, radius=4, samples=50, seed=0)
    assert rep.status == "refuted"
    assert rep.evidence["reason"] == "submultiplicativity fails"


def test_locally_finite_max_property(lf):
    """w(st) <= max(w(s), w(t)), with equality whenever the two values differ
    (cancellation of the top chain level can only happen at equal values)."""
    w = LocallyFiniteWeight(lf)
    ball = lf.ball(5)
    for s in ball:
        for t in ball:
            vs, vt, vst = w.value(s), w.value(t), w.value(lf.multiply(s, t))
            assert vst <= max(vs, vt) + 1e-12
            if abs(vs - vt) > 1e-9:
                assert vst == pytest.approx(max(vs, vt))


def test_weak_subadditivity_exhaustive_ball4(lf):
    w = LocallyFiniteWeight(lf)
    rep = validate_weak_subadditivity(w, 1.0, radius=4, samples=500, seed=0)
    assert rep.verified


def test_weak_subadditivity_refutes_bad_constant(z1):
    # omega_2 is not weakly subadditive with D = 1: w(2) = 9 > w(1) + w(1) = 8
    w = PolynomialWeight(z1, 2.0)
    rep = validate_weak_subadditivity(w, 1.0, radius=4, samples=100, seed=0)
    assert rep.status == "refuted"


def test_build_auxiliary_modes(z1, lf):
    w = PolynomialWeight(z1, 2.0)
    aux = build_auxiliary(w, 1.0)
    assert aux.mode == "rho_profile"
    # u = (1+2 tau)^beta / (1+tau)^(2 beta)
    assert aux.u_value((2,)) == pytest.approx(25.0 / 81.0)
    wl = LocallyFiniteWeight(lf)
    auxl = build_auxiliary(wl, 2.0)
    assert auxl.mode == "weakly_subadditive" and auxl.d_const == 1.0
    assert auxl.u_value(frozenset({2})) == pytest.approx(1.0 / 5.0)
    # sigma = w * u = D identically in the weakly subadditive mode
    assert auxl.sigma_value(frozenset({3})) == pytest.approx(1.0)


def test_auxiliary_subexp_closed_form(z1):
    sg = SubexpPowerWeight(z1, 0.5, 1.0)
    aux = build_auxiliary(sg, 1.0)
    n = 9
    expected = math.exp((2.0 * n) ** 0.5 - 2.0 * n**0.5)
    assert aux.u_value((n,)) == pytest.approx(expected)


def test_profile_u_bounded_sigma_above_one(z1, heis):
    for model in (z1, heis):
        for w in (PolynomialWeight(model, 2.0), SubexpPowerWeight(model, 0.5, 1.0),
                  SubexpLogWeight(model, 1.0, 1.0)):
            aux = build_auxiliary(w, 2.0)
            for x in model.ball(6):
                assert aux.u_value(x) <= 1.0 + 1e-12
                assert aux.sigma_value(x) >= 1.0 - 1e-12


def test_algebra_condition_holds(z1, lf):
    w = PolynomialWeight(z1, 2.0)
    rep = validate_algebra_condition(build_auxiliary(w, 1.0), radius=3, samples=10_000, seed=5)
    assert rep.verified
    wl = LocallyFiniteWeight(lf)
    rep = validate_algebra_condition(build_auxiliary(wl, 2.0), radius=3, samples=2000, seed=5)
    assert rep.verified


def test_sigma_value_example(z1):
    w1 = PolynomialWeight(z1, 1.0)
    aux = build_auxiliary(w1, 1.0)
    assert aux.sigma_value((2,)) == pytest.approx(5.0 / 3.0)


# -- summability -------------------------------------------------------------


def test_summability_polynomial_power_law(z1):
    w = PolynomialWeight(z1, 2.0)
    aux = build_auxiliary(w, 2.0)
    rep = check_summability(aux, 0.9, 0.1, 2048)
    assert rep.verified
    assert rep.evidence["method"] == "power_law"
    # shell terms decay like n^(-1.6)
    assert rep.evidence["kappa"] == pytest.approx(1.6, abs=0.08)
    # oracle: direct summation of 2 u(n)^s w(n)^r far beyond the horizon
    ns = np.arange(1, 400_000, dtype=float)
    u = (1 + 2 * ns) ** 2 / (1 + ns) ** 4
    terms = 2.0 * u**0.9 * (1 + ns) ** 0.2
    direct = 1.0 + float(terms.sum())
    total = rep.evidence["sum_with_tail"]
    assert total == pytest.approx(direct, rel=0.05)


def test_summability_subexp(z1):
    sg = SubexpPowerWeight(z1, 0.5, 1.0)
    rep = check_summability(build_auxiliary(sg, 2.0), 1.0, 0.5, 2048)
    assert rep.verified
    ns = np.arange(1, 2_000_000, dtype=float)
    direct = 1.0 + float(np.sum(2.0 * np.exp((0.5 - (2 - math.sqrt(2))) * np.sqrt(ns))))
    # the appended tail is an upper estimate by construction
    total = rep.evidence["sum_with_tail"]
    assert direct * (1 - 1e-9) <= total <= direct * 1.3


def test_summability_nu_refuted_analytically(z1):
    nu = SubexpLogWeight(z1, 1.0, 1.0)
    rep = check_summability(build_auxiliary(nu, 2.0), 1.0, 0.5, 2048)
    assert rep.status == "refuted"


def test_summability_locally_finite_geometric(lf):
    wl = LocallyFiniteWeight(lf)
    rep = check_summability(build_auxiliary(wl, 2.0), 1.75, 0.5, 200)
    assert rep.verified
    assert rep.evidence["method"] == "geometric"
    # ratio tends to 2^(1-1.25)
    assert rep.evidence["rho_bar"] == pytest.approx(2.0 ** (-0.25), rel=1e-6)


def test_summability_divergent_is_not_verified(lf):
    wl = LocallyFiniteWeight(lf)
    # s - r = 0.5 < 1: sum_j 2^(j-1) w_j^(-0.5) diverges
    rep = check_summability(build_auxiliary(wl, 2.0), 1.0, 0.5, 200)
    assert rep.status in ("refuted", "inconclusive")


def test_summability_heisenberg_envelope(heis):
    sg = SubexpPowerWeight(heis, 0.5, 1.0)
    rep = check_summability(build_auxiliary(sg, 2.0), 2.0, 0.8, 20)
    assert rep.verified
    assert rep.evidence["method"] == "analytic_envelope"
    assert rep.evidence["growth_order"] == 4


def test_summability_rejects_bad_params(z1):
    aux = build_auxiliary(PolynomialWeight(z1, 2.0), 2.0)
    with pytest.raises(WeightError):
        check_summability(aux, -1.0, 0.5, 128)
    with pytest.raises(WeightError):
        check_summability(aux, 1.0, 0.5, 4)


# -- growth condition ---------------------------------------------------------


def test_growth_condition_family_discrimination(z1):
    w = PolynomialWeight(z1, 2.0)
    assert check_growth_condition(w, 4096).verified
    sg = SubexpPowerWeight(z1, 0.5, 1.0)
    rep = check_growth_condition(sg, 4096)
    assert rep.verified
    assert rep.evidence["closed_form_limit"] == pytest.approx(math.sqrt(2.0))
    nu = SubexpLogWeight(z1, 1.0, 1.0)
    assert check_growth_condition(nu, 4096).status == "refuted"


def test_growth_condition_ratio_never_exceeds_two_for_concave(z1):
    for w in (PolynomialWeight(z1, 3.0), SubexpPowerWeight(z1, 0.7, 2.0),
              SubexpLogWeight(z1, 1.0, 1.0)):
        ns = np.arange(1, 5000, dtype=float)
        ratios = np.asarray(w.rho(2 * ns)) / np.asarray(w.rho(ns))
        assert np.all(ratios <= 2.0 + 1e-12)


def test_growth_condition_custom_trend_paths(z1):
    good = CustomProfileWeight(z1, lambda n: np.sqrt(np.asarray(n, dtype=float)))
    assert check_growth_condition(good, 2048).verified
    bad = CustomProfileWeight(z1, lambda n: np.asarray(n, dtype=float) ** 2)
    assert check_growth_condition(bad, 2048).status == "refuted"


def test_weight_from_config(z1):
    w = weight_from_config(z1, {"family": "polynomial", "beta": 2.5})
    assert isinstance(w, PolynomialWeight) and w.beta == 2.5
    with pytest.raises(WeightError):
        weight_from_config(z1, {"family": "unknown"})


def test_condition_report_serializes(z1):
    rep = check_growth_condition(PolynomialWeight(z1, 2.0), 512)
    d = rep.to_dict()
    assert d["condition"] == "growth_condition" and d["status"] == "verified"
