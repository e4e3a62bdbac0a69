"""Combined feedback path: per-branch couplers, co-phasing and summation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .array import SubArray, branch_outputs
from .exceptions import ConfigurationError
from .pa import apply_ph
from .signals import as_samples, wrap_like

MODES = ("anti_beamform", "weights_to_one")


@dataclass(frozen=True)
class FeedbackNetwork:
    """Coupler network feeding the single observation receiver.

    Branch m couples with gain ``coupling_gc * (1 + deviations[m])``. When
    ``noise_snr_db`` is set, complex white Gaussian noise at that SNR is
    added to the observation.
    """

    coupling_gc: complex = 1.0
    deviations: np.ndarray = field(default_factory=lambda: np.zeros(0))
    mode: str = "anti_beamform"
    noise_snr_db: float | None = None

    def __post_init__(self):
        eps = np.array(self.deviations, dtype=np.complex128, copy=True).reshape(-1)
        if not np.all(np.isfinite(eps)) or not np.isfinite(self.coupling_gc):
            raise ConfigurationError("feedback gains must be finite")
        if self.mode not in MODES:
            raise ConfigurationError(f"feedback mode must be one of {MODES}")
        eps.flags.writeable = False
        object.__setattr__(self, "deviations", eps)
        object.__setattr__(self, "coupling_gc", complex(self.coupling_gc))

    @classmethod
    def ideal(cls, M: int, coupling_gc: complex = 1.0, mode: str = "anti_beamform") -> FeedbackNetwork:
        return cls(coupling_gc, np.zeros(M), mode)

    def branch_gains(self) -> np.ndarray:
        return self.coupling_gc * (1.0 + self.deviations)


@dataclass(frozen=True)
class MismatchConfig:
    amplitude_range_pct: tuple[float, float] = (-10.0, 10.0)
    phase_range_deg: tuple[float, float] = (-10.0, 10.0)
    rng_seed: int = 0

    def validate(self) -> list[str]:
        problems = []
        if self.amplitude_range_pct[0] > self.amplitude_range_pct[1]:
            problems.append("amplitude_range_pct must be ordered (lo <= hi)")
        if self.phase_range_deg[0] > self.phase_range_deg[1]:
            problems.append("phase_range_deg must be ordered (lo <= hi)")
        return problems


def sample_mismatch(cfg: MismatchConfig, M: int) -> np.ndarray:
    """Deviations eps_m such that the realized coupler gain is (1 + beta_m) e^{j phi_m}.

    beta_m and phi_m are drawn uniformly from the configured ranges. Draws are
    consumed pairwise per branch, so the first M deviations do not depend on
    how many branches are requested.
    """
    if M < 1:
        raise ConfigurationError("M must be >= 1")
    problems = cfg.validate()
    if problems:
        raise ConfigurationError("; ".join(problems))
    rng = np.random.default_rng(cfg.rng_seed)
    u = rng.random((M, 2))
    a_lo, a_hi = cfg.amplitude_range_pct
    p_lo, p_hi = cfg.phase_range_deg
    beta = (a_lo + (a_hi - a_lo) * u[:, 0]) / 100.0
    phi = np.deg2rad(p_lo + (p_hi - p_lo) * u[:, 1])
    return (1.0 + beta) * np.exp(1j * phi) - 1.0


def _check(sub: SubArray, net: FeedbackNetwork):
    if net.deviations.size != sub.size:
        raise ConfigurationError(
            f"feedback network has {net.deviations.size} branches, sub-array has {sub.size}"
        )


def _add_noise(z, snr_db, rng):
    if snr_db is None:
        return z
    rng = np.random.default_rng(rng)
    p = np.mean(np.abs(z) ** 2) * 10.0 ** (-snr_db / 10.0)
    return z + np.sqrt(p / 2) * (rng.standard_normal(z.size) + 1j * rng.standard_normal(z.size))


def observe(sub: SubArray, net: FeedbackNetwork, x, rng=None):
    """Observation z(n) at the feedback receiver for PA drive ``x``.

    anti_beamform: z = g_c sum_m (1 + eps_m) conj(w_m) PA_m(w_m x)
    weights_to_one: z = g_c sum_m (1 + eps_m) PA_m(x)
    """
    _check(sub, net)
    xs = as_samples(x)
    gains = net.branch_gains()
    if net.mode == "anti_beamform":
        z = (gains * np.conj(sub.weights)) @ branch_outputs(sub, xs)
    else:
        z = gains @ np.stack([as_samples(apply_ph(m, xs)) for m in sub.models])
    return wrap_like(x, _add_noise(z, net.noise_snr_db, rng))


def observe_single(sub: SubArray, net: FeedbackNetwork, x, index: int = 0):
    """Conventional feedback from one PA only: z = g_c PA_index(x)."""
    z = net.coupling_gc * as_samples(apply_ph(sub.models[index], as_samples(x)))
    return wrap_like(x, z)
