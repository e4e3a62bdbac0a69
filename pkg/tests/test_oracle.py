import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize_scalar

from subarray_dpd.exceptions import ConfigurationError, SingularScenarioError
from subarray_dpd.feedback import MismatchConfig, sample_mismatch
from subarray_dpd.oracle import (ThirdOrderScenario, alpha3_opt, alpha3_opt_mismatched,
                                 fixed_point_residual, moment_ratio)
from subarray_dpd.pa import PHModel, third_order_memoryless

from conftest import cgauss


def test_moment_ratio_examples(rng):
    assert moment_ratio(np.full(7, 1.5j)) == pytest.approx(1.5**2)
    assert moment_ratio([1, 2]) == pytest.approx(257 / 65)
    assert moment_ratio(cgauss(rng, 2_000_000)) == pytest.approx(4.0, rel=0.03)
    with pytest.raises(ConfigurationError):
        moment_ratio([])
    with pytest.raises(ConfigurationError):
        moment_ratio(np.zeros(3))


def test_zero_cubic_gives_zero():
    assert alpha3_opt(ThirdOrderScenario([1, 0.9], [0, 0], 4.0)) == 0


def test_plug_in_value():
    assert alpha3_opt(ThirdOrderScenario([1.0], [-0.05], 4.0)) == pytest.approx(0.125)


def test_solution_satisfies_fixed_point():
    scn = ThirdOrderScenario([1.0, 0.9 + 0.1j], [-0.05 + 0.02j, -0.03], 3.7)
    a = alpha3_opt(scn)
    assert abs(fixed_point_residual(a, scn.f31, scn.e86)) < 1e-14


def _loop_correlation(alpha, f1, f3, x):
    """|E[conj(u3) e]| for the memoryless loop x -> x + conj(a) u3 -> PA, e = z - f1 x."""
    u3 = np.abs(x) ** 2 * x
    xt = x + np.conj(alpha) * u3
    e = f1 * xt + f3 * np.abs(xt) ** 2 * xt - f1 * x
    return abs(np.vdot(u3, e)) / x.size


def _perturbations(a):
    return [a * 0.95, a * 1.05, a * (1 + 0.05j), a * (1 - 0.05j)]


@pytest.mark.parametrize("f3", [-0.01, -0.008 + 0.004j])
def test_closed_form_is_locally_optimal(f3, rng):
    x = cgauss(rng, 400_000)
    a = alpha3_opt(ThirdOrderScenario([1.0], [f3], moment_ratio(x)))
    c0 = _loop_correlation(a, 1.0, f3, x)
    for b in _perturbations(a):
        assert c0 < _loop_correlation(b, 1.0, f3, x)


@pytest.mark.xfail(strict=True, reason="at |F31| E86 = 0.2 the dropped |x|^10 and |x|^12 terms move "
                                       "the decorrelating optimum far from the closed form")
def test_closed_form_local_optimality_at_strong_nonlinearity(rng):
    x = cgauss(rng, 400_000)
    a = alpha3_opt(ThirdOrderScenario([1.0], [-0.05], moment_ratio(x)))
    c0 = _loop_correlation(a, 1.0, -0.05, x)
    for b in _perturbations(a):
        assert c0 < _loop_correlation(b, 1.0, -0.05, x)


@pytest.mark.parametrize("f3, bound", [(-0.005, 0.005), (-0.01, 0.015), (-0.02, 0.08)])
def test_closed_form_bias_grows_with_nonlinearity(f3, bound, rng):
    x = cgauss(rng, 200_000)
    a = alpha3_opt(ThirdOrderScenario([1.0], [f3], moment_ratio(x))).real
    r = minimize_scalar(lambda v: _loop_correlation(v, 1.0, f3, x), bounds=(0.0, 3 * a),
                        method="bounded", options={"xatol": 1e-10})
    assert abs(r.x - a) / a <= bound


def test_mismatched_reductions():
    f1 = np.array([1.0, 0.95 + 0.05j, 1.02])
    f3 = np.array([-0.05, -0.04 + 0.01j, -0.06])
    base = ThirdOrderScenario(f1, f3, 4.0)
    assert alpha3_opt_mismatched(base) == alpha3_opt(base)
    one = ThirdOrderScenario([0.9], [-0.03j], 4.0, [0.3 - 0.2j])
    assert alpha3_opt_mismatched(one) == pytest.approx(alpha3_opt(one), rel=1e-14)
    common = ThirdOrderScenario(f1, f3, 4.0, np.full(3, 0.1 + 0.05j))
    assert alpha3_opt_mismatched(common) == pytest.approx(alpha3_opt(common), rel=1e-12)


def test_scenario_validation():
    with pytest.raises(ConfigurationError):
        ThirdOrderScenario([1, 2], [0.1], 4.0)
    with pytest.raises(ConfigurationError):
        ThirdOrderScenario([1], [0.1], 0.0)
    with pytest.raises(SingularScenarioError):
        ThirdOrderScenario([1, -1], [0.1, 0.1], 4.0)
    with pytest.raises(SingularScenarioError):
        alpha3_opt_mismatched(ThirdOrderScenario([1, 1], [0.1, 0.1], 4.0, [-2.0, 0.0]))
    # F31 = -1/E86 with a real F makes the denominator 3 - 4 + 1 = 0
    with pytest.raises(SingularScenarioError):
        alpha3_opt(ThirdOrderScenario([1.0], [-0.25], 4.0))


def test_from_models(rng):
    x = cgauss(rng, 1000)
    models = [third_order_memoryless(1, -0.05), PHModel({1: [0.9]})]
    scn = ThirdOrderScenario.from_models(models, x)
    assert np.allclose(scn.f3, [-0.05, 0])
    assert scn.e86 == pytest.approx(moment_ratio(x))
    with pytest.raises(ConfigurationError):
        ThirdOrderScenario.from_models([PHModel({1: [1, 0.1]})], x)


def test_large_m_median_error():
    rng = np.random.default_rng(7)
    errs = []
    for seed in range(200):
        f1 = 1.0 + 0.1 * cgauss(rng, 16)
        f3 = -0.05 * (1.0 + 0.1 * cgauss(rng, 16))
        eps = sample_mismatch(MismatchConfig(rng_seed=seed), 16)
        scn = ThirdOrderScenario(f1, f3, 4.0, eps)
        a, b = alpha3_opt(scn), alpha3_opt_mismatched(scn)
        errs.append(abs(b - a) / abs(a))
    assert np.median(errs) <= 0.05


@settings(max_examples=50, deadline=None)
@given(st.floats(-0.08, 0.08), st.floats(-0.08, 0.08), st.floats(1.0, 6.0))
def test_fixed_point_property(re, im, e86):
    F = complex(re, im)
    try:
        a = alpha3_opt(ThirdOrderScenario([1.0], [F], e86))
    except SingularScenarioError:
        return
    assert abs(fixed_point_residual(a, F, e86)) < 1e-12
