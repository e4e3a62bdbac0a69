"""Baseband waveforms: OFDM synthesis, PAPR reduction and spectral estimation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import signal as sps

from .exceptions import ConfigurationError


@dataclass(frozen=True)
class ComplexSignal:
    """Uniformly sampled complex baseband sequence."""

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        s = np.array(self.samples, dtype=np.complex128, copy=True).reshape(-1)
        if not self.sample_rate_hz > 0:
            raise ConfigurationError("sample_rate_hz must be positive")
        if not np.all(np.isfinite(s)):
            raise ConfigurationError("signal contains NaN or Inf samples")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    def __len__(self):
        return self.samples.shape[0]

    def power(self) -> float:
        return float(np.mean(np.abs(self.samples) ** 2))

    def with_samples(self, samples) -> ComplexSignal:
        return ComplexSignal(samples, self.sample_rate_hz)


def as_samples(x) -> np.ndarray:
    """Return the sample array of ``x`` (a ComplexSignal or array-like)."""
    if isinstance(x, ComplexSignal):
        return x.samples
    return np.asarray(x, dtype=np.complex128).reshape(-1)


def wrap_like(template, samples):
    """Wrap ``samples`` as a ComplexSignal iff ``template`` is one."""
    if isinstance(template, ComplexSignal):
        return ComplexSignal(samples, template.sample_rate_hz)
    return samples


# --------------------------------------------------------------------------
# OFDM

_QAM16_LEVELS = np.array([-3.0, -1.0, 1.0, 3.0]) / math.sqrt(10.0)


def qam16_alphabet() -> np.ndarray:
    """The 16 points of unit-average-power square 16-QAM."""
    re, im = np.meshgrid(_QAM16_LEVELS, _QAM16_LEVELS)
    return (re + 1j * im).ravel()


@dataclass(frozen=True)
class OfdmConfig:
    occupied_bandwidth_hz: float = 20e6
    sample_rate_hz: float = 120e6
    subcarrier_spacing_hz: float = 15e3
    num_active_subcarriers: int = 1200
    constellation: str = "QAM16"
    num_symbols: int = 12
    cyclic_prefix_fraction: float = 1.0 / 14.0
    rng_seed: int = 0

    def validate(self) -> list[str]:
        """Return a list of violated invariants (empty when valid)."""
        problems = []
        if self.sample_rate_hz <= 0 or self.subcarrier_spacing_hz <= 0:
            problems.append("sample_rate_hz and subcarrier_spacing_hz must be positive")
            return problems
        if self.num_active_subcarriers < 1:
            problems.append("num_active_subcarriers must be >= 1")
        if self.num_symbols < 1:
            problems.append("num_symbols must be >= 1")
        if self.num_active_subcarriers * self.subcarrier_spacing_hz > self.occupied_bandwidth_hz:
            problems.append(
                "num_active_subcarriers * subcarrier_spacing_hz must not exceed occupied_bandwidth_hz"
            )
        if not self.sample_rate_hz > self.occupied_bandwidth_hz:
            problems.append("sample_rate_hz must exceed occupied_bandwidth_hz")
        ratio = self.sample_rate_hz / self.subcarrier_spacing_hz
        if abs(ratio - round(ratio)) > 1e-9 * ratio:
            problems.append("sample_rate_hz / subcarrier_spacing_hz must be an integer FFT size")
        if not 0 <= self.cyclic_prefix_fraction < 1:
            problems.append("cyclic_prefix_fraction must lie in [0, 1)")
        if self.constellation.upper() != "QAM16":
            problems.append(f"unsupported constellation {self.constellation!r}")
        return problems

    @property
    def fft_size(self) -> int:
        return int(round(self.sample_rate_hz / self.subcarrier_spacing_hz))

    @property
    def cp_length(self) -> int:
        return int(round(self.fft_size * self.cyclic_prefix_fraction))

    @property
    def symbol_length(self) -> int:
        return self.fft_size + self.cp_length

    def subcarrier_indices(self) -> np.ndarray:
        """Signed active subcarrier indices, DC excluded."""
        n = self.num_active_subcarriers
        neg = n // 2
        return np.concatenate([np.arange(-neg, 0), np.arange(1, n - neg + 1)])

    def active_band_hz(self) -> tuple[float, float]:
        """Edges of the occupied subcarrier span, half a spacing beyond the outer tones."""
        k = self.subcarrier_indices()
        df = self.subcarrier_spacing_hz
        return (k.min() - 0.5) * df, (k.max() + 0.5) * df


@dataclass(frozen=True)
class SymbolGrid:
    """Per-symbol, per-active-subcarrier complex values plus the frame layout."""

    symbols: np.ndarray  # (num_symbols, num_active)
    subcarriers: np.ndarray  # signed indices
    fft_size: int
    cp_length: int

    @property
    def num_symbols(self) -> int:
        return self.symbols.shape[0]

    @property
    def symbol_length(self) -> int:
        return self.fft_size + self.cp_length

    def on_constellation(self, alphabet=None, atol=1e-12) -> bool:
        alphabet = qam16_alphabet() if alphabet is None else np.asarray(alphabet)
        d = np.abs(self.symbols.reshape(-1, 1) - alphabet.reshape(1, -1)).min(axis=1)
        return bool(np.all(d <= atol))


def _modulate(grid: SymbolGrid) -> np.ndarray:
    spectrum = np.zeros((grid.num_symbols, grid.fft_size), dtype=np.complex128)
    spectrum[:, grid.subcarriers % grid.fft_size] = grid.symbols
    body = np.fft.ifft(spectrum, axis=1) * math.sqrt(grid.fft_size)
    framed = np.concatenate([body[:, grid.fft_size - grid.cp_length :], body], axis=1)
    return framed.reshape(-1)


def generate_ofdm(cfg: OfdmConfig) -> tuple[ComplexSignal, SymbolGrid]:
    """CP-OFDM frame with random 16-QAM subcarriers, normalized to unit power."""
    problems = cfg.validate()
    if problems:
        raise ConfigurationError("; ".join(problems))
    rng = np.random.default_rng(cfg.rng_seed)
    alphabet = qam16_alphabet()
    idx = rng.integers(0, alphabet.size, size=(cfg.num_symbols, cfg.num_active_subcarriers))
    grid = SymbolGrid(alphabet[idx], cfg.subcarrier_indices(), cfg.fft_size, cfg.cp_length)
    x = _modulate(grid)
    x = x / math.sqrt(np.mean(np.abs(x) ** 2))
    return ComplexSignal(x, cfg.sample_rate_hz), grid


def demodulate(sig, layout: SymbolGrid, num_symbols: int | None = None) -> np.ndarray:
    """Active-subcarrier values per symbol: drop the CP, FFT, pick the active bins.

    ``layout`` supplies FFT size, CP length and subcarrier indices; its symbol
    values are ignored. Scaling matches :func:`generate_ofdm` before power
    normalization.
    """
    x = as_samples(sig)
    nsym = layout.num_symbols if num_symbols is None else num_symbols
    need = nsym * layout.symbol_length
    if x.shape[0] < need:
        raise ConfigurationError(f"signal has {x.shape[0]} samples, {need} needed to demodulate")
    frames = x[:need].reshape(nsym, layout.symbol_length)[:, layout.cp_length :]
    spectrum = np.fft.fft(frames, axis=1) / math.sqrt(layout.fft_size)
    return spectrum[:, layout.subcarriers % layout.fft_size]


def papr_db(sig) -> float:
    """Peak-to-average power ratio in dB."""
    p = np.abs(as_samples(sig)) ** 2
    if p.size == 0:
        raise ValueError("PAPR of an empty signal is undefined")
    mean = p.mean()
    if mean == 0:
        raise ValueError("PAPR of an all-zero signal is undefined")
    return float(10.0 * np.log10(p.max() / mean))


def _band_filter(x, sample_rate_hz, band_hz):
    freqs = np.fft.fftfreq(x.shape[0], d=1.0 / sample_rate_hz)
    spectrum = np.fft.fft(x)
    spectrum[(freqs < band_hz[0]) | (freqs > band_hz[1])] = 0
    return np.fft.ifft(spectrum)


def reduce_papr_clip_filter(
    sig: ComplexSignal,
    band_hz: tuple[float, float],
    target_papr_db: float,
    max_iters: int = 10,
    history: list | None = None,
) -> ComplexSignal:
    """Iterative clipping and frequency-domain band filtering.

    Each pass clips the envelope at ``sqrt(mean power * 10**(target/10))``,
    zeroes every DFT bin outside ``band_hz`` (whole-signal DFT), and
    renormalizes to unit power. Returns as soon as the measured PAPR is at
    or below the target. If ``history`` is a list, the PAPR after each pass
    is appended to it.
    """
    if not target_papr_db > 0:
        raise ValueError("target_papr_db must be positive")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    x = sig.samples
    if papr_db(x) <= target_papr_db:
        return sig
    for _ in range(max_iters):
        mag = np.abs(x)
        threshold = math.sqrt(np.mean(mag**2) * 10.0 ** (target_papr_db / 10.0))
        over = mag > threshold
        clipped = x.copy()
        clipped[over] *= threshold / mag[over]
        x = _band_filter(clipped, sig.sample_rate_hz, band_hz)
        x = x / math.sqrt(np.mean(np.abs(x) ** 2))
        measured = papr_db(x)
        if history is not None:
            history.append(measured)
        if measured <= target_papr_db:
            break
    return sig.with_samples(x)


def make_test_signal(cfg: OfdmConfig, target_papr_db: float = 8.3, max_iters: int = 10):
    """OFDM frame followed by clip-and-filter PAPR reduction.

    Returns ``(signal, grid)`` where ``grid`` is the original constellation
    grid of the frame.
    """
    x, grid = generate_ofdm(cfg)
    x = reduce_papr_clip_filter(x, cfg.active_band_hz(), target_papr_db, max_iters)
    return x, grid


# --------------------------------------------------------------------------
# Spectra


@dataclass(frozen=True)
class Psd:
    """Two-sided power spectral density on an ascending frequency grid."""

    freqs_hz: np.ndarray
    density: np.ndarray  # power per Hz
    resolution_hz: float = field(default=0.0)

    def total_power(self) -> float:
        return float(np.sum(self.density) * self.resolution_hz)

    def band_power(self, lo_hz: float, hi_hz: float) -> float:
        """Integrated power over grid bins with lo <= f <= hi."""
        m = (self.freqs_hz >= lo_hz) & (self.freqs_hz <= hi_hz)
        return float(np.sum(self.density[m]) * self.resolution_hz)

    def to_db(self, floor=1e-30) -> np.ndarray:
        return 10.0 * np.log10(np.maximum(self.density, floor))


def _two_sided_grid(freqs, density, sample_rate_hz, axis=-1):
    # ascending over (-fs/2, fs/2]: the fftshift puts -fs/2 first, relabel it +fs/2
    freqs = np.fft.fftshift(freqs)
    density = np.fft.fftshift(density, axes=axis)
    if freqs.size % 2 == 0:
        freqs = np.roll(freqs, -1)
        freqs[-1] = sample_rate_hz / 2
        density = np.roll(density, -1, axis=axis)
    return freqs, density


def welch_density(samples, sample_rate_hz, nfft=4096, overlap_fraction=0.5, window="hann"):
    """Welch density along the last axis; returns (freqs, density) two-sided."""
    freqs, dens = sps.welch(
        samples,
        fs=sample_rate_hz,
        window=window,
        nperseg=nfft,
        noverlap=int(round(nfft * overlap_fraction)),
        return_onesided=False,
        detrend=False,
        scaling="density",
        axis=-1,
    )
    return _two_sided_grid(freqs, dens, sample_rate_hz)


def psd_welch(sig: ComplexSignal, nfft: int = 4096, overlap_fraction: float = 0.5, window="hann") -> Psd:
    """Averaged, windowed periodogram of a complex signal."""
    if nfft > len(sig):
        raise ValueError(f"nfft={nfft} exceeds signal length {len(sig)}")
    if not 0 <= overlap_fraction < 1:
        raise ValueError("overlap_fraction must lie in [0, 1)")
    freqs, dens = welch_density(sig.samples, sig.sample_rate_hz, nfft, overlap_fraction, window)
    return Psd(freqs, dens, sig.sample_rate_hz / nfft)
