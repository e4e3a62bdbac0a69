import numpy as np
import pytest

from subarray_dpd import metrics
from subarray_dpd.exceptions import ConfigurationError, PopulationError
from subarray_dpd.pa import (PaPopulationConfig, PHModel, apply_ph, default_base_model,
                             synth_population, third_order_memoryless)
from subarray_dpd.signals import ComplexSignal, OfdmConfig, make_test_signal

import naive
from conftest import cgauss


def test_identity_model(backend, rng):
    x = cgauss(rng, 50)
    assert np.allclose(apply_ph(PHModel({1: [1.0]}), x), x, rtol=0, atol=0)


def test_pure_cubic_on_constant(backend):
    y = apply_ph(PHModel({1: [0.0], 3: [1.0]}), np.full(5, 2.0 + 0j))
    assert np.allclose(y, 8.0)


def test_memory_model_matches_double_loop(backend):
    x = np.array([0.3, -0.2j, 1 + 1j, 0.5, -0.7 + 0.1j, 0, 0.2j, 1.1])
    br = {1: [1, 0.1], 3: [-0.05, 0.01]}
    assert np.allclose(apply_ph(PHModel(br), x), naive.ph_output(br, list(x)), rtol=1e-12, atol=1e-14)


def test_apply_preserves_signal_type():
    x = ComplexSignal(np.ones(4), 7.0)
    y = apply_ph(PHModel({1: [2.0]}), x)
    assert isinstance(y, ComplexSignal) and y.sample_rate_hz == 7.0


def test_third_order_examples():
    m = third_order_memoryless(1, 0)
    assert m.order == 3 and m.memory == 0
    assert apply_ph(m, np.ones(3))[0] == pytest.approx(1.0)
    assert apply_ph(third_order_memoryless(1, -0.05), np.ones(3))[0] == pytest.approx(0.95)
    y = apply_ph(third_order_memoryless(2, 0.1 + 0.1j), np.full(2, 1j))
    assert y[0] == pytest.approx(2j + (0.1 + 0.1j) * 1j)
    with pytest.raises(ConfigurationError):
        third_order_memoryless(0, 0.1)


@pytest.mark.parametrize("branches", [
    {2: [1.0]}, {1: [1.0], 3: [1.0, 2.0]}, {3: [1.0]}, {1: []}, {1: [np.inf]},
])
def test_invalid_models(branches):
    with pytest.raises(ConfigurationError):
        PHModel(branches)


def test_kernel_arrays_zero_fill():
    orders, taps = PHModel({1: [1, 2], 5: [3, 4]}).kernel_arrays()
    assert list(orders) == [1, 3, 5]
    assert np.array_equal(taps, [[1, 2], [0, 0], [3, 4]])


def test_dict_roundtrip_and_declared_shape():
    m = default_base_model()
    again = PHModel.from_dict(m.to_dict())
    for p in m.branches:
        assert np.array_equal(m.branches[p], again.branches[p])
    d = m.to_dict()
    d["memory"] = 7
    with pytest.raises(ConfigurationError):
        PHModel.from_dict(d)
    with pytest.raises(ConfigurationError):
        PHModel.from_dict({"branches": {"1": [[1]]}})


def test_default_model_shape():
    m = default_base_model()
    assert m.order == 11 and m.memory == 3
    assert m.linear_gain() == pytest.approx(sum([1.0, 0.05 - 0.02j, 0.01j, 0.005]))


def test_zero_dispersion_returns_base():
    base = default_base_model()
    pop = synth_population(PaPopulationConfig(count=4, dispersion=0.0))
    assert all(m is base or m.to_dict() == base.to_dict() for m in pop)


@pytest.fixture(scope="module")
def population():
    cfg = PaPopulationConfig(count=6, rng_seed=11)
    return cfg, synth_population(cfg)


def test_population_deterministic(population):
    cfg, pop = population
    again = synth_population(cfg)
    assert [m.to_dict() for m in pop] == [m.to_dict() for m in again]
    other = synth_population(PaPopulationConfig(count=6, rng_seed=12))
    assert pop[0].to_dict() != other[0].to_dict()


def test_population_prefix_stable(population):
    cfg, pop = population
    short = synth_population(PaPopulationConfig(count=3, rng_seed=11))
    assert [m.to_dict() for m in short] == [m.to_dict() for m in pop[:3]]


def test_population_aclr_in_band(population):
    _, pop = population
    ocfg = OfdmConfig(num_symbols=3)
    x, _ = make_test_signal(ocfg)
    ch = metrics.channel_for(apply_ph(default_base_model(), x), ocfg.occupied_bandwidth_hz)
    for m in pop:
        lo, hi = metrics.aclr(apply_ph(m, x), ch)
        assert 35 <= lo <= 45 and 35 <= hi <= 45


def test_population_rejection_exhausted():
    cfg = PaPopulationConfig(count=1, dispersion=0.05, aclr_band_dbc=(80.0, 90.0), max_redraws=3)
    with pytest.raises(PopulationError):
        synth_population(cfg)


def test_population_validation():
    bad = PaPopulationConfig(count=0, dispersion=-1.0, aclr_band_dbc=(5.0, 1.0))
    assert len(bad.validate()) == 3
    with pytest.raises(ConfigurationError):
        synth_population(bad)
    x = np.ones(10)
    with pytest.raises(ConfigurationError):
        synth_population(PaPopulationConfig(count=1), drive=x)
