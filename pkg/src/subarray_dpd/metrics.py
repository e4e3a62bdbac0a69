"""EVM and ACLR of the effective main-beam signal."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import ConfigurationError
from .signals import ComplexSignal, Psd, SymbolGrid, as_samples, demodulate, psd_welch

# PSD settings shared by every measurement so that ACLR values and emission
# patterns are directly comparable.
PSD_NFFT = 4096
PSD_OVERLAP = 0.5
PSD_WINDOW = "hann"


@dataclass(frozen=True)
class ChannelDef:
    center_hz: float
    wanted_band: tuple[float, float]
    adjacent_lower: tuple[float, float]
    adjacent_upper: tuple[float, float]
    measurement_bandwidth_hz: float

    def __post_init__(self):
        bands = sorted([self.adjacent_lower, self.wanted_band, self.adjacent_upper])
        for lo, hi in bands:
            if not lo < hi:
                raise ConfigurationError(f"empty band [{lo}, {hi}]")
        if bands[0][1] >= bands[1][0] or bands[1][1] >= bands[2][0]:
            raise ConfigurationError("wanted and adjacent bands overlap")

    @classmethod
    def around(cls, band: tuple[float, float], spacing_hz: float) -> ChannelDef:
        """Wanted ``band``; equal-width adjacent channels one spacing either side."""
        lo, hi = band
        width = hi - lo
        center = 0.5 * (lo + hi)
        if spacing_hz <= width:
            raise ConfigurationError(
                f"channel spacing {spacing_hz / 1e6:.3f} MHz must exceed the wanted width {width / 1e6:.3f} MHz"
            )
        return cls(
            center_hz=center,
            wanted_band=(lo, hi),
            adjacent_lower=(lo - spacing_hz, hi - spacing_hz),
            adjacent_upper=(lo + spacing_hz, hi + spacing_hz),
            measurement_bandwidth_hz=width,
        )

    def check_nyquist(self, sample_rate_hz: float):
        half = sample_rate_hz / 2
        for lo, hi in (self.adjacent_lower, self.wanted_band, self.adjacent_upper):
            if lo <= -half or hi > half:
                raise ConfigurationError(f"band [{lo}, {hi}] Hz lies outside the Nyquist range +-{half} Hz")

    def to_dict(self) -> dict:
        return asdict(self)


def occupied_bandwidth(psd: Psd, fraction: float = 0.99) -> tuple[float, float]:
    """Smallest band symmetric about the spectral centroid holding ``fraction`` of the power.

    The centroid is snapped to the nearest grid frequency and the half-width
    grows in whole grid steps, so both edges lie on the PSD grid.
    """
    d = np.asarray(psd.density)
    if np.any(d < 0) or not np.sum(d) > 0:
        raise ValueError("occupied bandwidth needs a nonnegative PSD with positive total power")
    if not 0 < fraction <= 1:
        raise ValueError("fraction must lie in (0, 1]")
    f = psd.freqs_hz
    total = d.sum()
    centre = int(np.argmin(np.abs(f - np.sum(f * d) / total)))
    need = fraction * total * (1 - 1e-12)
    acc = d[centre]
    k = 0
    n = f.size
    while acc < need and (centre - k > 0 or centre + k < n - 1):
        k += 1
        if centre - k >= 0:
            acc += d[centre - k]
        if centre + k < n:
            acc += d[centre + k]
    step = psd.resolution_hz
    return float(f[centre] - k * step), float(f[centre] + k * step)


def channel_for(sig, spacing_hz: float, fraction: float = 0.99, sample_rate_hz: float | None = None) -> ChannelDef:
    """Channel whose wanted band is the occupied bandwidth of ``sig``."""
    psd = _psd(sig, sample_rate_hz)
    return ChannelDef.around(occupied_bandwidth(psd, fraction), spacing_hz)


def _psd(sig, sample_rate_hz=None) -> Psd:
    if isinstance(sig, Psd):
        return sig
    if not isinstance(sig, ComplexSignal):
        if sample_rate_hz is None:
            raise ValueError("sample_rate_hz is required for raw sample arrays")
        sig = ComplexSignal(sig, sample_rate_hz)
    return psd_welch(sig, PSD_NFFT, PSD_OVERLAP, PSD_WINDOW)


def band_powers(psd: Psd, ch: ChannelDef) -> tuple[float, float, float]:
    """(lower adjacent, wanted, upper adjacent) integrated powers."""
    return (
        psd.band_power(*ch.adjacent_lower),
        psd.band_power(*ch.wanted_band),
        psd.band_power(*ch.adjacent_upper),
    )


def aclr(sig, ch: ChannelDef, sample_rate_hz: float | None = None) -> tuple[float, float]:
    """(lower, upper) adjacent channel leakage ratio in dBc, positive when leakage is weaker."""
    psd = _psd(sig, sample_rate_hz)
    ch.check_nyquist(2 * psd.freqs_hz[-1])
    lower, wanted, upper = band_powers(psd, ch)
    return _ratio_db(wanted, lower), _ratio_db(wanted, upper)


def _ratio_db(num, den):
    if den <= 0:
        return math.inf
    return 10.0 * math.log10(num / den)


def evm(ref: SymbolGrid, rx, per_subcarrier: bool = False) -> float:
    """RMS error vector magnitude in percent after linear equalization.

    ``rx`` is demodulated with the layout of ``ref``; a single complex LS
    gain (or one per subcarrier) maps it onto the reference, then both are
    brought to the same average power.
    """
    r = np.asarray(ref.symbols)
    y = demodulate(as_samples(rx), ref)
    if y.shape != r.shape:
        raise ConfigurationError(f"demodulated grid {y.shape} does not match reference {r.shape}")
    if per_subcarrier:
        num = np.sum(np.conj(y) * r, axis=0)
        den = np.sum(np.abs(y) ** 2, axis=0)
        gain = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
        eq = y * gain
    else:
        den = np.vdot(y, y).real
        eq = y * (np.vdot(y, r) / den) if den > 0 else np.zeros_like(y)
    p_ref = np.mean(np.abs(r) ** 2)
    p_eq = np.mean(np.abs(eq) ** 2)
    if p_eq > 0:
        eq = eq * math.sqrt(p_ref / p_eq)
    p_err = np.mean(np.abs(eq - r) ** 2)
    return float(100.0 * math.sqrt(p_err / p_ref))


@dataclass(frozen=True)
class MetricsReport:
    scenario: str
    evm_pct: float
    aclr_lower_dbc: float
    aclr_upper_dbc: float
    occupied_bw_hz: float

    def to_dict(self) -> dict:
        return asdict(self)


def measure(scenario: str, y, ref: SymbolGrid, ch: ChannelDef, sample_rate_hz: float,
            per_subcarrier: bool = False) -> MetricsReport:
    lower, upper = aclr(y, ch, sample_rate_hz)
    return MetricsReport(
        scenario=scenario,
        evm_pct=evm(ref, y, per_subcarrier),
        aclr_lower_dbc=lower,
        aclr_upper_dbc=upper,
        occupied_bw_hz=ch.measurement_bandwidth_hz,
    )
