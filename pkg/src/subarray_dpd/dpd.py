"""Sub-array predistorter and its decorrelation-based block-adaptive learning.

The predistorter adds filtered static nonlinear terms to the input,

    x~(n) = x(n) + sum_q sum_k conj(a_{q,k}) u_q(n - k),   u_q = |x|^(q-1) x,

for odd q = 3..Q. Learning runs in an orthogonalized basis S = U T; the
raw-basis coefficients used by the main path are ``conj(T) @ alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy import linalg

from . import kernels
from .exceptions import ConfigurationError, DivergenceError, RankDeficientError
from .signals import as_samples, wrap_like

ORTHOGONALIZATIONS = ("gram_schmidt", "cholesky")


@dataclass(frozen=True)
class DpdConfig:
    order_q: int = 9
    memory: int | tuple = 3
    learning_rate_mu: float = 1.0
    block_size_b: int = 100_000
    num_iterations: int = 24
    orthogonalization: str = "gram_schmidt"
    gain_taps: int = 1

    def __post_init__(self):
        nb = len(self.orders)
        if isinstance(self.memory, (int, np.integer)):
            object.__setattr__(self, "memory", (int(self.memory),) * nb)
        else:
            object.__setattr__(self, "memory", tuple(int(m) for m in self.memory))

    @property
    def orders(self) -> tuple:
        return tuple(range(3, int(self.order_q) + 1, 2))

    @property
    def num_coeffs(self) -> int:
        return sum(m + 1 for m in self.memory)

    def column_labels(self) -> list[tuple[int, int]]:
        return [(q, k) for q, m in zip(self.orders, self.memory) for k in range(m + 1)]

    def validate(self) -> list[str]:
        problems = []
        if self.order_q < 3 or self.order_q % 2 == 0:
            problems.append(f"order_q must be an odd integer >= 3 (got {self.order_q})")
        if len(self.memory) != len(self.orders):
            problems.append(f"memory needs one entry per branch ({len(self.orders)}), got {len(self.memory)}")
        if any(m < 0 for m in self.memory):
            problems.append("memory orders must be >= 0")
        if not self.learning_rate_mu > 0:
            problems.append("learning_rate_mu must be positive")
        if self.num_iterations < 1:
            problems.append("num_iterations must be >= 1")
        if self.block_size_b < self.num_coeffs:
            problems.append(
                f"block_size_b ({self.block_size_b}) must be >= the coefficient count ({self.num_coeffs})"
            )
        if self.gain_taps < 1:
            problems.append("gain_taps must be >= 1")
        if self.orthogonalization not in ORTHOGONALIZATIONS:
            problems.append(f"orthogonalization must be one of {ORTHOGONALIZATIONS}")
        return problems

    def check(self):
        problems = self.validate()
        if problems:
            raise ConfigurationError("; ".join(problems))


@dataclass(frozen=True)
class DpdState:
    coeffs: np.ndarray
    transform: np.ndarray
    gain_estimate: complex = 1.0
    iteration: int = 0

    def __post_init__(self):
        a = np.array(self.coeffs, dtype=np.complex128, copy=True).reshape(-1)
        t = np.array(self.transform, dtype=np.complex128, copy=True)
        if t.shape != (a.size, a.size):
            raise ConfigurationError(f"transform shape {t.shape} does not match {a.size} coefficients")
        if np.any(np.tril(t, -1)) or np.any(np.diag(t) == 0):
            raise ConfigurationError("transform must be upper triangular with a nonzero diagonal")
        a.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "coeffs", a)
        object.__setattr__(self, "transform", t)

    @classmethod
    def zeros(cls, num_coeffs: int, transform=None) -> DpdState:
        t = np.eye(num_coeffs) if transform is None else transform
        return cls(np.zeros(num_coeffs), t)

    @property
    def raw_coeffs(self) -> np.ndarray:
        """Coefficients a_{q,k} of the raw basis, stacked like ``coeffs``."""
        return np.conj(self.transform) @ self.coeffs


def build_basis(x, cfg: DpdConfig, start: int = 0, length: int | None = None) -> np.ndarray:
    """Raw basis block: column (q, k) holds u_q(n - k) for n = start..start+length-1."""
    xs = as_samples(x)
    if length is None:
        length = xs.shape[0] - start
    if start < 0 or length < 0 or start + length > xs.shape[0]:
        raise ConfigurationError(f"block [{start}, {start + length}) outside signal of length {xs.shape[0]}")
    return kernels.snl_basis(xs, np.asarray(cfg.orders), np.asarray(cfg.memory), start, length)


def linear_regressors(x, taps: int, start: int = 0, length: int | None = None) -> np.ndarray:
    """Columns x(n - k), k = 0..taps-1, with zero history before the signal start."""
    xs = as_samples(x)
    if length is None:
        length = xs.shape[0] - start
    if start < 0 or length < 0 or start + length > xs.shape[0]:
        raise ConfigurationError(f"block [{start}, {start + length}) outside signal of length {xs.shape[0]}")
    return kernels.snl_basis(xs, np.array([1]), np.array([taps - 1]), start, length)


def fit_orthogonalizer(U, method: str = "gram_schmidt", labels=None, rtol: float = 1e-9,
                       project_out=None) -> np.ndarray:
    """Upper-triangular T with (U T)^H (U T) / rows = I.

    Columns are first scaled to unit RMS. ``labels`` names the columns in
    rank-deficiency errors. With ``project_out`` (a matrix of regressors with
    the same row count), T instead whitens the part of U orthogonal to those
    regressors: (P U T)^H (P U T) / rows = I with P the orthogonal projector
    onto their complement.
    """
    U = np.asarray(U, dtype=np.complex128)
    rows, ncols = U.shape
    labels = list(labels) if labels is not None else list(range(ncols))
    if project_out is not None:
        X = np.asarray(project_out, dtype=np.complex128).reshape(rows, -1)
        U = U - X @ np.linalg.lstsq(X, U, rcond=None)[0]
    rms = np.sqrt(np.mean(np.abs(U) ** 2, axis=0))
    dead = np.flatnonzero(rms == 0)
    if dead.size:
        raise RankDeficientError(f"basis column {labels[dead[0]]} is identically zero")
    V = U / rms
    if method == "gram_schmidt":
        R = np.linalg.qr(V, mode="r") / math.sqrt(rows)
    elif method == "cholesky":
        gram = V.conj().T @ V / rows
        try:
            R = np.linalg.cholesky(gram).conj().T
        except np.linalg.LinAlgError:
            d = np.linalg.eigvalsh(gram)
            raise RankDeficientError(f"basis Gram matrix is not positive definite (min eigenvalue {d[0]:.3g})")
    else:
        raise ConfigurationError(f"unknown orthogonalization {method!r}")
    diag = np.diag(R)
    # sin of the angle between each column and the span of its predecessors
    weak = np.flatnonzero(np.abs(diag) <= rtol)
    if weak.size:
        j = weak[0]
        raise RankDeficientError(
            f"basis column {labels[j]} is linearly dependent on the preceding columns "
            f"(relative residual {abs(diag[j]):.2e})"
        )
    R = (np.conj(diag) / np.abs(diag))[:, None] * R  # real positive diagonal
    Rinv = linalg.solve_triangular(R, np.eye(ncols, dtype=np.complex128), lower=False)
    return np.triu(Rinv / rms[:, None])


def estimate_linear_gain(x_block, z_block) -> complex:
    """Scalar least-squares gain (x^H z) / (x^H x)."""
    x = as_samples(x_block)
    z = as_samples(z_block)
    if x.shape != z.shape or x.size == 0:
        raise ConfigurationError("gain estimation needs equal, nonzero lengths")
    den = np.vdot(x, x).real
    if den == 0:
        raise ConfigurationError("cannot estimate a gain from an all-zero input")
    return complex(np.vdot(x, z) / den)


def estimate_linear_response(X, z_block) -> np.ndarray:
    """Least-squares FIR taps g minimizing ||z - X g||, X from ``linear_regressors``."""
    z = as_samples(z_block)
    X = np.asarray(X)
    if X.shape[0] != z.size or z.size == 0:
        raise ConfigurationError("regressor rows must match the observation length")
    if not np.any(X):
        raise ConfigurationError("cannot estimate a gain from an all-zero input")
    return np.linalg.lstsq(X, z, rcond=None)[0]


def error_signal(z, gain: complex, x):
    """e(n) = z(n) - G x(n)."""
    zs, xs = as_samples(z), as_samples(x)
    if zs.shape != xs.shape:
        raise ConfigurationError(f"length mismatch: z has {zs.size}, x has {xs.size} samples")
    return wrap_like(z, zs - gain * xs)


def decorrelation_update(state: DpdState, e_block, S_block, mu: float) -> DpdState:
    """alpha <- alpha - mu (e^H S)^T."""
    e = as_samples(e_block)
    S = np.asarray(S_block)
    if S.ndim != 2 or S.shape[0] != e.size or S.shape[1] != state.coeffs.size:
        raise ConfigurationError(
            f"basis block {S.shape} incompatible with {e.size} errors and {state.coeffs.size} coefficients"
        )
    step = S.T @ np.conj(e)
    return replace(state, coeffs=state.coeffs - mu * step, iteration=state.iteration + 1)


def _injection_taps(raw: np.ndarray, cfg: DpdConfig) -> np.ndarray:
    taps = np.zeros((len(cfg.orders), max(cfg.memory) + 1), dtype=np.complex128)
    col = 0
    for k, m in enumerate(cfg.memory):
        taps[k, : m + 1] = np.conj(raw[col : col + m + 1])
        col += m + 1
    return taps


def apply_dpd(state: DpdState, cfg: DpdConfig, x):
    """Predistorted signal x + sum conj(a_{q,k}) u_q(n - k)."""
    xs = as_samples(x)
    if state.coeffs.size != cfg.num_coeffs:
        raise ConfigurationError("state and configuration disagree on the coefficient count")
    injection = kernels.ph_eval(xs, np.asarray(cfg.orders), _injection_taps(state.raw_coeffs, cfg))
    return wrap_like(x, xs + injection)


def residual_correlation(e, S) -> np.ndarray:
    """|e^H s_j| / (||e|| ||s_j||) for every column of S."""
    e = as_samples(e)
    norms = np.linalg.norm(S, axis=0) * np.linalg.norm(e)
    corr = np.abs(S.conj().T @ e)
    return np.divide(corr, norms, out=np.zeros_like(corr), where=norms > 0)


@dataclass
class LearnTrace:
    """Per-iteration record; row i holds the coefficients used on block i."""

    coeffs: list = field(default_factory=list)
    raw_coeffs: list = field(default_factory=list)
    error_power: list = field(default_factory=list)
    gains: list = field(default_factory=list)

    def append(self, state: DpdState, e: np.ndarray, gain: complex):
        self.coeffs.append(state.coeffs.copy())
        self.raw_coeffs.append(state.raw_coeffs)
        self.error_power.append(float(np.mean(np.abs(e) ** 2)))
        self.gains.append(complex(gain))

    def rows(self, raw: bool = False):
        """(iteration, coeff_index, re, im, error_power_db) tuples."""
        data = self.raw_coeffs if raw else self.coeffs
        for i, (a, p) in enumerate(zip(data, self.error_power)):
            p_db = 10.0 * math.log10(p) if p > 0 else -math.inf
            for j, c in enumerate(a):
                yield i, j, float(c.real), float(c.imag), p_db


@dataclass(frozen=True)
class LearnResult:
    state: DpdState
    trace: LearnTrace
    residual_correlation: np.ndarray


def learn(sub, net, cfg: DpdConfig, x_source, *, observer: Callable | None = None,
          fixed_gain: complex | None = None, rng=None) -> LearnResult:
    """Block-adaptive decorrelation learning from the combined feedback.

    Block i covers samples [n_i, n_i + B) of ``x_source``, with n_i cycling
    through the whole blocks the source contains (a source of exactly B
    samples is reused every iteration). Each iteration predistorts the
    block, observes it through ``observer`` (default: the combined feedback
    of ``sub`` and ``net``), removes the linear part of the observation and
    applies

        alpha <- alpha - (mu / B) S^T conj(e / G),

    the decorrelation step on the gain-normalized error.

    The linear part is the block-LS fit of ``cfg.gain_taps`` taps on
    x(n)..x(n - gain_taps + 1); one tap is the scalar gain estimate and G is
    the sum of the taps. With ``fixed_gain`` the error is z - G x instead.

    The orthogonalizing transform is fitted on block 0 and frozen. When the
    gain is estimated, it whitens the basis after removing its projection
    onto the linear regressors: the LS fit already strips that component
    from the error, so this keeps the loop gain of every coefficient
    direction at one. After the last update the final state is evaluated
    once more, which yields the last trace row and the residual
    correlations.
    """
    cfg.check()
    x = as_samples(x_source)
    B = cfg.block_size_b
    nblocks = x.shape[0] // B
    if nblocks < 1:
        raise ConfigurationError(f"source has {x.shape[0]} samples, fewer than one block of {B}")
    if observer is None:
        from .feedback import observe

        def observer(xt):
            return observe(sub, net, xt, rng)

    estimate = fixed_gain is None
    blocks = {}

    def block(j):
        if j not in blocks:
            if len(blocks) > 8:
                blocks.clear()
            # each block is transmitted as a burst, so history before it is zero
            xb = x[j * B : (j + 1) * B]
            U = build_basis(xb, cfg)
            X = linear_regressors(xb, cfg.gain_taps) if estimate else None
            blocks[j] = (U, X)
        return blocks[j]

    U0, X0 = block(0)
    T = fit_orthogonalizer(U0, cfg.orthogonalization, cfg.column_labels(), project_out=X0)
    state = DpdState.zeros(cfg.num_coeffs, T)
    trace = LearnTrace()
    mu = cfg.learning_rate_mu / B
    prev_norm = 0.0
    corr = None
    for i in range(cfg.num_iterations + 1):
        j = i % nblocks
        U, X = block(j)
        xb = x[j * B : (j + 1) * B]
        xt = xb + U @ np.conj(state.raw_coeffs)
        z = as_samples(observer(xt))
        if not estimate:
            gain = complex(fixed_gain)
            e = z - gain * xb
        elif cfg.gain_taps == 1:
            gain = estimate_linear_gain(xb, z)
            e = z - gain * xb
        else:
            g = estimate_linear_response(X, z)
            gain = complex(g.sum())
            e = z - X @ g
        trace.append(state, e, gain)
        S = U @ T
        if i == cfg.num_iterations:
            corr = residual_correlation(e, S)
            state = replace(state, gain_estimate=gain)
            break
        state = decorrelation_update(state, e / gain, S, mu)
        state = replace(state, gain_estimate=gain)
        norm = float(np.linalg.norm(state.coeffs))
        if not np.isfinite(norm) or (prev_norm > 0 and norm > 10.0 * prev_norm):
            raise DivergenceError(
                f"coefficient norm jumped from {prev_norm:.3g} to {norm:.3g} at iteration {i + 1}"
            )
        prev_norm = norm
    return LearnResult(state, trace, corr)
