"""Closed-form optimum of a third-order memoryless predistorter.

For a sub-array of memoryless third-order PAs ``f1 x + f3 |x|^2 x`` observed
through the combined feedback, the decorrelating coefficient of a
``x + conj(a) |x|^2 x`` predistorter solves, after dropping correlation terms
above |x|^8,

    conj(a) = -F [1 + (a + 2 conj(a)) E86],   F = sum f3 / sum f1,

where E86 = E|x|^8 / E|x|^6. With coupler deviations eps_m the observed
ratio becomes sum f3 (1 + eps) / sum f1 (1 + eps).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigurationError, SingularScenarioError
from .signals import as_samples


def moment_ratio(x) -> float:
    """Sample estimate of E|x|^8 / E|x|^6."""
    p = np.abs(as_samples(x)) ** 2
    if p.size == 0:
        raise ConfigurationError("moment ratio of an empty signal")
    p3 = p ** 3
    den = p3.mean()
    if den == 0:
        raise ConfigurationError("moment ratio of an all-zero signal")
    return float((p3 * p).mean() / den)


@dataclass(frozen=True)
class ThirdOrderScenario:
    f1: np.ndarray
    f3: np.ndarray
    e86: float
    deviations: np.ndarray = field(default_factory=lambda: np.zeros(0))
    coupling_gc: complex = 1.0

    def __post_init__(self):
        f1 = np.atleast_1d(np.asarray(self.f1, dtype=np.complex128)).copy()
        f3 = np.atleast_1d(np.asarray(self.f3, dtype=np.complex128)).copy()
        eps = np.asarray(self.deviations, dtype=np.complex128).reshape(-1)
        if eps.size == 0:
            eps = np.zeros(f1.size, dtype=np.complex128)
        if f1.shape != f3.shape or eps.shape != f1.shape:
            raise ConfigurationError("f1, f3 and deviations need one entry per branch")
        if not self.e86 > 0:
            raise ConfigurationError("E86 must be positive")
        if f1.sum() == 0:
            raise SingularScenarioError("sum of linear gains is zero")
        for name, v in (("f1", f1), ("f3", f3), ("deviations", eps.copy())):
            v.flags.writeable = False
            object.__setattr__(self, name, v)
        object.__setattr__(self, "e86", float(self.e86))

    @classmethod
    def from_models(cls, models, x, deviations=None, coupling_gc: complex = 1.0) -> ThirdOrderScenario:
        """Scenario from memoryless third-order PH models and a drive signal."""
        f1, f3 = [], []
        for m in models:
            orders = set(m.branches)
            if m.memory != 0 or not orders <= {1, 3}:
                raise ConfigurationError("scenario needs memoryless models of order <= 3")
            f1.append(m.branches[1][0])
            f3.append(m.branches[3][0] if 3 in m.branches else 0.0)
        eps = np.zeros(len(f1)) if deviations is None else deviations
        return cls(np.array(f1), np.array(f3), moment_ratio(x), eps, coupling_gc)

    @property
    def f31(self) -> complex:
        return complex(self.f3.sum() / self.f1.sum())

    @property
    def f31_observed(self) -> complex:
        w = 1.0 + self.deviations
        den = (self.f1 * w).sum()
        if den == 0:
            raise SingularScenarioError("mismatch-weighted sum of linear gains is zero")
        return complex((self.f3 * w).sum() / den)


def _closed_form(F: complex, e86: float) -> complex:
    den = 3.0 * abs(F) ** 2 * e86**2 + 2.0 * e86 * (F + np.conj(F)).real + 1.0
    if den == 0:
        raise SingularScenarioError(f"closed form is singular for F31={F:.6g}, E86={e86:.6g}")
    return complex(-np.conj(F) * (1.0 + F * e86) / den)


def alpha3_opt(scn: ThirdOrderScenario) -> complex:
    """Optimum coefficient with ideal feedback (deviations ignored)."""
    return _closed_form(scn.f31, scn.e86)


def alpha3_opt_mismatched(scn: ThirdOrderScenario) -> complex:
    """Coefficient the learner settles on when the feedback carries the deviations."""
    return _closed_form(scn.f31_observed, scn.e86)


def fixed_point_residual(alpha: complex, F: complex, e86: float) -> complex:
    """conj(a) + F [1 + (a + 2 conj(a)) E86]; zero at the closed-form solution."""
    a = complex(alpha)
    return a.conjugate() + F * (1.0 + (a + 2.0 * a.conjugate()) * e86)
