import numpy as np
import pytest

from subarray_dpd import metrics
from subarray_dpd.exceptions import ConfigurationError
from subarray_dpd.metrics import ChannelDef, aclr, evm, occupied_bandwidth
from subarray_dpd.signals import (OfdmConfig, Psd, SymbolGrid, _modulate, generate_ofdm,
                                  make_test_signal)

from conftest import cgauss


def _psd(freqs, dens):
    return Psd(np.asarray(freqs, float), np.asarray(dens, float), 1.0)


def test_brickwall_occupied_bandwidth():
    f = np.arange(-500, 501) * 1.0
    d = np.where(np.abs(f) <= 100, 1.0, 0.0)
    lo, hi = occupied_bandwidth(_psd(f, d), 0.99)
    assert hi - lo == pytest.approx(200.0, abs=2.0)
    lo, hi = occupied_bandwidth(_psd(f, np.ones_like(f)), 1.0)
    assert (lo, hi) == (-500.0, 500.0)


def test_occupied_bandwidth_errors():
    f = np.arange(-5, 6) * 1.0
    with pytest.raises(ValueError):
        occupied_bandwidth(_psd(f, np.zeros_like(f)))
    with pytest.raises(ValueError):
        occupied_bandwidth(_psd(f, np.ones_like(f)), 0.0)


def test_aclr_exact_ratio():
    f = np.arange(-50, 51) * 1.0
    d = np.zeros_like(f)
    d[np.abs(f) <= 5] = 1.0
    d[(f >= 15) & (f <= 25)] = 1e-3
    d[(f >= -25) & (f <= -15)] = 1e-4
    ch = ChannelDef.around((-5.0, 5.0), 20.0)
    lo, hi = aclr(_psd(f, d), ch)
    assert hi == pytest.approx(30.0) and lo == pytest.approx(40.0)


def test_channel_definition():
    ch = ChannelDef.around((-9e6, 9e6), 20e6)
    assert ch.adjacent_upper == (11e6, 29e6)
    assert ch.measurement_bandwidth_hz == 18e6
    with pytest.raises(ConfigurationError):
        ChannelDef.around((-9e6, 9e6), 10e6)
    with pytest.raises(ConfigurationError):
        ch.check_nyquist(40e6)
    ch.check_nyquist(120e6)
    with pytest.raises(ConfigurationError):
        ChannelDef(0.0, (1.0, 1.0), (-3.0, -2.0), (2.0, 3.0), 0.0)


def test_aclr_symmetric_signal_and_zero_leakage(rng):
    x = cgauss(rng, 1 << 16)
    nl = x + 0.05 * np.abs(x) ** 2 * x
    ch = ChannelDef.around((-5e6, 5e6), 20e6)
    # conjugate-symmetric spectrum: real input through an odd nonlinearity
    r = rng.standard_normal(1 << 16)
    lo, hi = aclr(r + 0.05 * r**3, ch, 120e6)
    assert lo == pytest.approx(hi, abs=0.2)
    with pytest.raises(ValueError):
        aclr(nl, ch)


@pytest.fixture(scope="module")
def frame():
    return generate_ofdm(OfdmConfig(num_symbols=2))


def test_evm_ideal_loopback(frame):
    x, grid = frame
    assert evm(grid, x) < 1e-10
    assert evm(grid, (0.3 - 2j) * x.samples) < 1e-10
    assert evm(grid, x, per_subcarrier=True) < 1e-10


def test_evm_known_error(frame, rng):
    x, grid = frame
    noise = cgauss(rng, *grid.symbols.shape)
    noise -= grid.symbols * np.vdot(grid.symbols, noise) / np.vdot(grid.symbols, grid.symbols)
    noise *= np.sqrt(0.01 * np.mean(np.abs(grid.symbols) ** 2) / np.mean(np.abs(noise) ** 2))
    rx = _modulate(SymbolGrid(grid.symbols + noise, grid.subcarriers, grid.fft_size, grid.cp_length))
    # equal-power normalization scales the error by 1/sqrt(1.01), which stays within 10.0 at one decimal
    assert evm(grid, rx) == pytest.approx(10.0, abs=0.05)


def test_evm_shape_mismatch(frame):
    x, grid = frame
    with pytest.raises(ConfigurationError):
        evm(grid, x.samples[: len(x) // 2])


def test_measure_report():
    x, grid = make_test_signal(OfdmConfig(num_symbols=2))
    ch = metrics.channel_for(x, 20e6)
    rep = metrics.measure("no_dpd", x, grid, ch, x.sample_rate_hz)
    assert 0.5 < rep.evm_pct < 4.0  # clipping noise counts against the original symbols
    assert rep.aclr_lower_dbc > 60 and rep.aclr_upper_dbc > 60
    assert set(rep.to_dict()) == {"scenario", "evm_pct", "aclr_lower_dbc", "aclr_upper_dbc", "occupied_bw_hz"}


def test_occupied_bandwidth_of_test_signal():
    ocfg = OfdmConfig(num_symbols=3)
    x, _ = make_test_signal(ocfg)
    lo, hi = occupied_bandwidth(metrics._psd(x))
    assert 17.5e6 <= hi - lo <= 18.5e6
