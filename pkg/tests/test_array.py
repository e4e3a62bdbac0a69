import numpy as np
import pytest

from subarray_dpd import metrics
from subarray_dpd.array import (SubArray, branch_inputs, combined_main_beam, default_angle_grid,
                                emission_pattern, single_antenna_pattern, steering_weights)
from subarray_dpd.exceptions import ConfigurationError
from subarray_dpd.pa import PHModel, apply_ph, third_order_memoryless
from subarray_dpd.signals import ComplexSignal, OfdmConfig, make_test_signal

from conftest import cgauss


def test_steering_weights_examples():
    assert np.allclose(steering_weights(5, 0.0), 1.0)
    assert np.allclose(steering_weights(2, 90.0), [1, -1])
    with pytest.raises(ConfigurationError):
        steering_weights(0, 0.0)


def test_subarray_validation():
    m = PHModel({1: [1.0]})
    with pytest.raises(ConfigurationError):
        SubArray((m, m), [1.0])
    with pytest.raises(ConfigurationError):
        SubArray((m,), [0.5])
    with pytest.raises(ConfigurationError):
        SubArray((), [])
    with pytest.raises(ConfigurationError):
        SubArray((m,), [1.0], element_pattern="patch")


def test_branch_inputs():
    m = PHModel({1: [1.0]})
    x = np.array([1.0, 2.0])
    same = branch_inputs(x, SubArray((m,) * 3, np.ones(3)))
    assert all(np.array_equal(b, x) for b in same)
    b = branch_inputs(x, SubArray((m, m), [1, 1j]))
    assert np.allclose(b[1], [1j, 2j])


def test_identical_models_phase_cancel(rng):
    m = third_order_memoryless(1.0, -0.1 + 0.05j)
    x = cgauss(rng, 64)
    sub = SubArray.steered((m,) * 4, 23.0)
    assert np.allclose(combined_main_beam(sub, x), 4 * apply_ph(m, x), rtol=1e-12)
    lin = SubArray.steered((PHModel({1: [1.0]}),) * 3, 10.0)
    assert np.allclose(combined_main_beam(lin, x), 3 * x)


def test_zero_weight_sum_is_sum_of_models(rng):
    a = PHModel({1: [1.0, 0.1], 3: [-0.05, 0.01j]})
    b = third_order_memoryless(0.9, 0.03 - 0.02j)
    x = cgauss(rng, 8)
    y = combined_main_beam(SubArray((a, b), [1, 1]), x)
    assert np.allclose(y, apply_ph(a, x) + apply_ph(b, x), rtol=1e-12)


def test_array_factor_peak():
    sub = SubArray.steered((PHModel({1: [1.0]}),) * 8, 30.0)
    g = default_angle_grid()
    af = np.abs(sub.array_factor(g))
    assert g[np.argmax(af)] == pytest.approx(30.0)
    assert af.max() == pytest.approx(8.0)


@pytest.fixture(scope="module")
def short_signal():
    ocfg = OfdmConfig(num_symbols=2)
    x, _ = make_test_signal(ocfg)
    return x, ocfg


def test_single_element_pattern_is_flat(short_signal):
    x, ocfg = short_signal
    m = third_order_memoryless(1.0, -0.05)
    ch = metrics.channel_for(apply_ph(m, x), ocfg.occupied_bandwidth_hz)
    grid = np.arange(-90, 91, 15.0)
    p = emission_pattern(SubArray.steered((m,), 0.0), x, 0.0, ch, grid)
    assert np.ptp(p.inband_db) < 1e-9 and np.ptp(p.oob_lower_db) < 1e-9
    ref = single_antenna_pattern(m, x, ch, grid)
    assert np.allclose(ref.oob_lower_db, p.oob_lower_db, atol=1e-9)
    assert np.all(ref.inband_db == 0)


def test_linear_array_oob_at_floor(short_signal):
    x, ocfg = short_signal
    sub = SubArray.steered((PHModel({1: [1.0]}),) * 4, 30.0)
    ch = metrics.channel_for(combined_main_beam(sub, x), ocfg.occupied_bandwidth_hz)
    p = emission_pattern(sub, x, 30.0, ch, np.arange(-90, 91, 5.0))
    assert p.at(30.0)[0] == pytest.approx(0.0)
    assert np.max(np.maximum(p.oob_lower_db, p.oob_upper_db)) <= -60


def test_pattern_off_grid_steering_and_errors(short_signal):
    x, ocfg = short_signal
    m = third_order_memoryless(1.0, -0.05)
    sub = SubArray.steered((m,) * 4, 12.5)
    ch = metrics.channel_for(combined_main_beam(sub, x), ocfg.occupied_bandwidth_hz)
    p = emission_pattern(sub, x, 12.5, ch, np.arange(-90, 91, 10.0))
    assert len(p.angles_deg) == 19
    # normalization uses the steering direction, which is not on the grid
    assert p.reference_power > 0
    with pytest.raises(ConfigurationError):
        emission_pattern(sub, x, 0.0, ch, [])
    with pytest.raises(ConfigurationError):
        emission_pattern(sub, x.samples, 0.0, ch)
