"""Phase-only analog beamforming over a uniform linear sub-array."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigurationError
from .pa import PHModel, apply_ph
from .signals import as_samples, welch_density, wrap_like
from . import metrics


def steering_weights(M: int, theta0_deg: float, spacing_wavelengths: float = 0.5) -> np.ndarray:
    """w_m = exp(j 2 pi d m sin(theta0)), m = 0..M-1."""
    if M < 1:
        raise ConfigurationError("M must be >= 1")
    m = np.arange(M)
    return np.exp(2j * np.pi * spacing_wavelengths * m * np.sin(np.deg2rad(theta0_deg)))


@dataclass(frozen=True)
class SubArray:
    models: tuple
    weights: np.ndarray
    element_spacing_wavelengths: float = 0.5
    element_pattern: str = "isotropic"

    def __post_init__(self):
        models = tuple(self.models)
        w = np.array(self.weights, dtype=np.complex128, copy=True).reshape(-1)
        if len(models) < 1:
            raise ConfigurationError("a sub-array needs at least one PA")
        if w.size != len(models):
            raise ConfigurationError(f"{len(models)} models but {w.size} weights")
        if np.any(np.abs(np.abs(w) - 1.0) > 1e-12):
            raise ConfigurationError("beamforming weights must have unit modulus")
        if self.element_pattern != "isotropic":
            raise ConfigurationError("only isotropic elements are modeled")
        w.flags.writeable = False
        object.__setattr__(self, "models", models)
        object.__setattr__(self, "weights", w)

    @classmethod
    def steered(cls, models, theta0_deg: float, spacing_wavelengths: float = 0.5) -> SubArray:
        w = steering_weights(len(models), theta0_deg, spacing_wavelengths)
        return cls(tuple(models), w, spacing_wavelengths)

    @property
    def size(self) -> int:
        return len(self.models)

    def array_factor(self, angles_deg) -> np.ndarray:
        """sum_m w_m exp(-j 2 pi d m sin(theta)) for each angle."""
        return steering_matrix(self.size, angles_deg, self.element_spacing_wavelengths) @ self.weights


def steering_matrix(M: int, angles_deg, spacing_wavelengths: float) -> np.ndarray:
    """Rows exp(-j 2 pi d m sin(theta)) for each angle, shape (angles, M)."""
    s = np.sin(np.deg2rad(np.asarray(angles_deg, dtype=float)))
    return np.exp(-2j * np.pi * spacing_wavelengths * np.outer(s, np.arange(M)))


def branch_inputs(x, sub: SubArray) -> list:
    """x_m = w_m x for every antenna branch."""
    xs = as_samples(x)
    return [wrap_like(x, w * xs) for w in sub.weights]


def branch_outputs(sub: SubArray, x) -> np.ndarray:
    """PA outputs y_m = PA_m(w_m x), stacked as an (M, L) array."""
    xs = as_samples(x)
    return np.stack([apply_ph(model, w * xs) for model, w in zip(sub.models, sub.weights)])


def combined_main_beam(sub: SubArray, x):
    """y = sum_m conj(w_m) y_m, the signal radiated toward the steering direction."""
    y = np.conj(sub.weights) @ branch_outputs(sub, x)
    return wrap_like(x, y)


@dataclass(frozen=True)
class EmissionPattern:
    angles_deg: np.ndarray
    inband_db: np.ndarray
    oob_lower_db: np.ndarray
    oob_upper_db: np.ndarray
    steering_deg: float
    reference_power: float = field(default=1.0)

    def __post_init__(self):
        n = len(self.angles_deg)
        if not (len(self.inband_db) == len(self.oob_lower_db) == len(self.oob_upper_db) == n):
            raise ConfigurationError("pattern arrays must have equal lengths")

    def at(self, angle_deg: float) -> tuple[float, float, float]:
        i = int(np.argmin(np.abs(np.asarray(self.angles_deg) - angle_deg)))
        return float(self.inband_db[i]), float(self.oob_lower_db[i]), float(self.oob_upper_db[i])


def default_angle_grid(step_deg: float = 1.0) -> np.ndarray:
    n = int(round(180.0 / step_deg))
    return np.linspace(-90.0, 90.0, n + 1)


def _band_sums(freqs, dens, resolution, ch):
    def integrate(lo, hi):
        m = (freqs >= lo) & (freqs <= hi)
        return dens[..., m].sum(axis=-1) * resolution

    return integrate(*ch.adjacent_lower), integrate(*ch.wanted_band), integrate(*ch.adjacent_upper)


def far_field_band_powers(outputs: np.ndarray, spacing: float, angles_deg, ch, sample_rate_hz,
                          chunk: int = 16):
    """(lower, wanted, upper) band powers of sum_m y_m exp(-j 2 pi d m sin theta) per angle."""
    angles = np.asarray(angles_deg, dtype=float)
    ch.check_nyquist(sample_rate_hz)
    resolution = sample_rate_hz / metrics.PSD_NFFT
    out = np.empty((3, angles.size))
    A = steering_matrix(outputs.shape[0], angles, spacing)
    for start in range(0, angles.size, chunk):
        sl = slice(start, start + chunk)
        s = A[sl] @ outputs
        freqs, dens = welch_density(s, sample_rate_hz, metrics.PSD_NFFT, metrics.PSD_OVERLAP, metrics.PSD_WINDOW)
        lo, wanted, hi = _band_sums(freqs, dens, resolution, ch)
        out[0, sl], out[1, sl], out[2, sl] = lo, wanted, hi
    return out


def emission_pattern(sub: SubArray, x, steering_deg: float, channel, angle_grid=None,
                     sample_rate_hz: float | None = None) -> EmissionPattern:
    """In-band and adjacent-channel power versus far-field angle.

    All three curves are normalized by the in-band power at ``steering_deg``,
    so the OOB values there equal minus the main-beam ACLR.
    """
    angles = default_angle_grid() if angle_grid is None else np.asarray(angle_grid, dtype=float)
    if angles.size == 0:
        raise ConfigurationError("angle grid is empty")
    fs = getattr(x, "sample_rate_hz", sample_rate_hz)
    if fs is None:
        raise ConfigurationError("sample rate unknown")
    hit = np.flatnonzero(angles == steering_deg)
    eval_angles = angles if hit.size else np.append(angles, steering_deg)
    ref = hit[0] if hit.size else eval_angles.size - 1
    outputs = branch_outputs(sub, x)
    p = far_field_band_powers(outputs, sub.element_spacing_wavelengths, eval_angles, channel, fs)
    return _normalized(angles, p, ref, steering_deg)


def _normalized(angles, p, ref, steering_deg):
    n = angles.size
    ref_power = p[1, ref]
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(p[:, :n] / ref_power)
    return EmissionPattern(angles, db[1], db[0], db[2], float(steering_deg), float(ref_power))


def single_antenna_pattern(model: PHModel, x, channel, angle_grid=None,
                           sample_rate_hz: float | None = None) -> EmissionPattern:
    """Isotropic single-element reference: angle-independent, in-band normalized to 0 dB."""
    angles = default_angle_grid() if angle_grid is None else np.asarray(angle_grid, dtype=float)
    if angles.size == 0:
        raise ConfigurationError("angle grid is empty")
    fs = getattr(x, "sample_rate_hz", sample_rate_hz)
    y = as_samples(apply_ph(model, x))[None, :]
    p = far_field_band_powers(y, 0.5, [0.0], channel, fs)
    p = np.repeat(p, angles.size, axis=1)
    return _normalized(angles, p, 0, 0.0)
