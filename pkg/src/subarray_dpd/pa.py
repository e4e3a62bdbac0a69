"""Parallel-Hammerstein power-amplifier models."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import kernels
from .exceptions import ConfigurationError, PopulationError
from .signals import as_samples, wrap_like


@dataclass(frozen=True)
class PHModel:
    """Odd-order parallel-Hammerstein model with FIR branch filters.

    ``branches`` maps each odd order p to its N+1 complex taps f_{p,0..N}.
    """

    branches: Mapping[int, np.ndarray]

    def __post_init__(self):
        clean = {}
        ntaps = None
        for p, taps in sorted(self.branches.items()):
            p = int(p)
            if p < 1 or p % 2 == 0:
                raise ConfigurationError(f"branch order {p} is not an odd integer >= 1")
            t = np.array(taps, dtype=np.complex128, copy=True).reshape(-1)
            if ntaps is None:
                ntaps = t.size
            elif t.size != ntaps:
                raise ConfigurationError("every branch must have the same number of taps")
            if ntaps == 0:
                raise ConfigurationError("branches need at least one tap")
            if not np.all(np.isfinite(t)):
                raise ConfigurationError(f"branch {p} has non-finite taps")
            t.flags.writeable = False
            clean[p] = t
        if 1 not in clean:
            raise ConfigurationError("the linear branch (order 1) must be present")
        object.__setattr__(self, "branches", clean)

    @property
    def order(self) -> int:
        return max(self.branches)

    @property
    def memory(self) -> int:
        return self.branches[1].size - 1

    def kernel_arrays(self):
        """(orders, taps) with every odd order up to P, zero-filled."""
        orders = np.arange(1, self.order + 1, 2)
        taps = np.zeros((orders.size, self.memory + 1), dtype=np.complex128)
        for k, p in enumerate(orders):
            if p in self.branches:
                taps[k] = self.branches[p]
        return orders, taps

    def linear_gain(self) -> complex:
        """DC gain of the linear branch."""
        return complex(np.sum(self.branches[1]))

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "memory": self.memory,
            "branches": {str(p): [[t.real, t.imag] for t in taps] for p, taps in self.branches.items()},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> PHModel:
        try:
            branches = {int(p): [complex(re, im) for re, im in taps] for p, taps in d["branches"].items()}
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"malformed PA model object: {exc}") from exc
        model = cls(branches)
        if "order" in d and int(d["order"]) != model.order:
            raise ConfigurationError(f"declared order {d['order']} != branch orders (max {model.order})")
        if "memory" in d and int(d["memory"]) != model.memory:
            raise ConfigurationError(f"declared memory {d['memory']} != tap count - 1 ({model.memory})")
        return model


def apply_ph(model: PHModel, x):
    """Drive ``model`` with ``x``; causal, cold start, same length as input."""
    orders, taps = model.kernel_arrays()
    y = kernels.ph_eval(as_samples(x), orders, taps)
    return wrap_like(x, y)


def third_order_memoryless(f1: complex, f3: complex) -> PHModel:
    if f1 == 0:
        raise ConfigurationError("linear gain f1 must be nonzero")
    return PHModel({1: [f1], 3: [f3]})


# leading tap per nonlinear order; memory taps decay by 0.2 per lag
_BASE_LINEAR = (1.0, 0.05 - 0.02j, 0.01j, 0.005)
_BASE_LEADING = {3: -0.08 + 0.02j, 5: 0.02 - 0.01j, 7: -0.005, 9: 0.001j, 11: -0.0003}
DEFAULT_DRIVE = 0.45


def default_base_model(drive: float = DEFAULT_DRIVE, order: int = 11, memory: int = 3) -> PHModel:
    """Synthetic base PA referenced to a unit-power input.

    The nominal branch gains describe the PA on an amplitude scale where the
    unit-power test signal arrives with rms ``drive``; order-p taps are
    therefore scaled by ``drive**(p-1)``. The default puts the adjacent
    channel leakage of the PAPR-reduced test signal near -43 dBc while
    keeping the static AM/AM slope above 0.5 up to about 1.2 times the
    signal peak, which leaves the predistorter room to expand the peaks.
    """
    profile = 0.2 ** np.arange(memory + 1)
    lin = np.zeros(memory + 1, dtype=np.complex128)
    n = min(memory + 1, len(_BASE_LINEAR))
    lin[:n] = _BASE_LINEAR[:n]
    branches = {1: lin}
    for p, lead in _BASE_LEADING.items():
        if p <= order:
            branches[p] = lead * profile * drive ** (p - 1)
    return PHModel(branches)


@dataclass(frozen=True)
class PaPopulationConfig:
    count: int = 16
    order: int = 11
    memory: int = 3
    base_model: PHModel | None = None
    dispersion: float | Mapping[int, float] = 0.10
    rng_seed: int = 0
    aclr_band_dbc: tuple[float, float] = (35.0, 45.0)
    max_redraws: int = 200

    def validate(self) -> list[str]:
        problems = []
        if self.count < 1:
            problems.append("population count must be >= 1")
        disp = self.dispersion.values() if isinstance(self.dispersion, Mapping) else [self.dispersion]
        if any(d < 0 for d in disp):
            problems.append("dispersion must be >= 0")
        lo, hi = self.aclr_band_dbc
        if lo > hi:
            problems.append("aclr_band_dbc must be ordered (lo <= hi)")
        return problems

    def base(self) -> PHModel:
        if self.base_model is not None:
            return self.base_model
        return default_base_model(order=self.order, memory=self.memory)

    def sigma(self, p: int) -> float:
        if isinstance(self.dispersion, Mapping):
            return float(self.dispersion.get(p, 0.0))
        return float(self.dispersion)


def perturb(base: PHModel, sigma_of, rng) -> PHModel:
    """Multiply every tap by (1 + delta), delta ~ CN(0, sigma_p^2)."""
    branches = {}
    for p, taps in base.branches.items():
        s = sigma_of(p)
        delta = s * (rng.standard_normal(taps.size) + 1j * rng.standard_normal(taps.size)) / np.sqrt(2.0)
        branches[p] = taps * (1.0 + delta)
    return PHModel(branches)


def synth_population(cfg: PaPopulationConfig, drive=None, channel=None) -> list[PHModel]:
    """Randomly perturbed copies of the base model.

    Every model is redrawn until its adjacent-channel leakage, measured on
    ``drive`` over ``channel``, falls inside ``cfg.aclr_band_dbc`` on both
    sides. ``drive`` defaults to the standard PAPR-reduced test signal and
    ``channel`` to the one implied by the base-model output.
    """
    problems = cfg.validate()
    if problems:
        raise ConfigurationError("; ".join(problems))
    base = cfg.base()
    rng = np.random.default_rng(cfg.rng_seed)
    if all(cfg.sigma(p) == 0 for p in base.branches):
        return [base] * cfg.count

    from . import metrics
    from .signals import OfdmConfig, make_test_signal

    if drive is None:
        ocfg = OfdmConfig(num_symbols=3)
        drive, _ = make_test_signal(ocfg)
        if channel is None:
            channel = metrics.channel_for(apply_ph(base, drive), ocfg.occupied_bandwidth_hz)
    elif channel is None:
        raise ConfigurationError("a channel definition is required with a custom drive signal")

    lo, hi = cfg.aclr_band_dbc
    models = []
    for m in range(cfg.count):
        for _ in range(cfg.max_redraws):
            cand = perturb(base, cfg.sigma, rng)
            left, right = metrics.aclr(apply_ph(cand, drive), channel)
            if lo <= left <= hi and lo <= right <= hi:
                models.append(cand)
                break
        else:
            raise PopulationError(
                f"PA {m}: no draw within ACLR band [{lo}, {hi}] dBc after {cfg.max_redraws} tries"
            )
    return models
