"""Experiment configuration: TOML loading, validation diagnostics and seed derivation."""

from __future__ import annotations

import re
import sys
import zlib
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .dpd import DpdConfig
from .exceptions import ConfigurationError
from .feedback import MismatchConfig
from .pa import DEFAULT_DRIVE, PaPopulationConfig, default_base_model
from .signals import OfdmConfig

SCENARIOS = ("no_dpd", "single_pa_learning", "proposed")
EVM_REFERENCES = ("symbols", "transmitted")
DEFAULT_CONFIG = Path(__file__).with_name("data") / "default.toml"

FAST_BLOCK_SIZE = 20_000
FAST_ITERATIONS = 12


def derive_seed(global_seed: int, task: str) -> int:
    """Independent 32-bit seed for a named task, fixed by the global seed."""
    ss = np.random.SeedSequence([int(global_seed), zlib.crc32(task.encode())])
    return int(ss.generate_state(1)[0])


@dataclass(frozen=True)
class PaprConfig:
    target_db: float = 8.3
    max_iters: int = 10


@dataclass(frozen=True)
class FeedbackConfig:
    coupling_gc: complex = 1.0
    noise_snr_db: float | None = None


@dataclass(frozen=True)
class MetricsConfig:
    channel_spacing_hz: float = 20e6
    occupied_fraction: float = 0.99
    evm_per_subcarrier: bool = False
    # "symbols": ideal constellation points, so clipping noise counts;
    # "transmitted": symbols of the PAPR-reduced frame, isolating PA error
    evm_reference: str = "symbols"


@dataclass(frozen=True)
class PatternConfig:
    enabled: bool = True
    angle_step_deg: float = 1.0
    antennas: tuple = (16, 32)


@dataclass(frozen=True)
class ExperimentConfig:
    ofdm: OfdmConfig = field(default_factory=OfdmConfig)
    papr: PaprConfig = field(default_factory=PaprConfig)
    population: PaPopulationConfig = field(default_factory=PaPopulationConfig)
    drive: float = DEFAULT_DRIVE
    base_model_file: str | None = None
    dpd: DpdConfig = field(default_factory=DpdConfig)
    feedback: FeedbackConfig = field(default_factory=FeedbackConfig)
    mismatch: MismatchConfig = field(default_factory=MismatchConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)
    pattern: PatternConfig = field(default_factory=PatternConfig)
    scenarios: tuple = SCENARIOS
    steering_deg: float = 30.0
    output_dir: str = "results"
    rng_seed: int = 0

    def seeds(self) -> dict:
        return {t: derive_seed(self.rng_seed, t) for t in ("ofdm", "population", "mismatch", "noise")}

    def seeded(self) -> ExperimentConfig:
        """Copy whose sub-configurations carry the seeds derived from ``rng_seed``."""
        s = self.seeds()
        return replace(
            self,
            ofdm=replace(self.ofdm, rng_seed=s["ofdm"]),
            population=replace(self.population, rng_seed=s["population"]),
            mismatch=replace(self.mismatch, rng_seed=s["mismatch"]),
        )

    def fast(self) -> ExperimentConfig:
        """CI-sized variant: B = 20k, 12 iterations, just enough OFDM symbols for one block."""
        d = replace(self.dpd, block_size_b=FAST_BLOCK_SIZE, num_iterations=FAST_ITERATIONS)
        sym = self.ofdm.symbol_length
        o = replace(self.ofdm, num_symbols=-(-FAST_BLOCK_SIZE // sym))
        return replace(self, dpd=d, ofdm=o)

    def validate(self) -> list[str]:
        out = []
        for name in ("ofdm", "population", "dpd", "mismatch"):
            out += [f"{name}: {p}" for p in getattr(self, name).validate()]
        if not self.scenarios:
            out.append("scenarios: at least one scenario is required")
        for s in self.scenarios:
            if s not in SCENARIOS:
                out.append(f"scenarios: unknown scenario {s!r} (choose from {', '.join(SCENARIOS)})")
        if not self.drive > 0:
            out.append("population: drive must be positive")
        if not self.ofdm.validate():
            n = self.ofdm.num_symbols * self.ofdm.symbol_length
            if n < self.dpd.block_size_b:
                out.append(
                    f"dpd: block_size_b ({self.dpd.block_size_b}) exceeds the {n} samples of the "
                    f"OFDM frame ({self.ofdm.num_symbols} symbols)"
                )
        if self.papr.max_iters < 0:
            out.append("papr: max_iters must be >= 0")
        m = self.metrics
        if not 0 < m.occupied_fraction <= 1:
            out.append("metrics: occupied_fraction must lie in (0, 1]")
        if m.evm_reference not in EVM_REFERENCES:
            out.append(f"metrics: evm_reference must be one of {', '.join(EVM_REFERENCES)}")
        if not m.channel_spacing_hz > 0:
            out.append("metrics: channel_spacing_hz must be positive")
        elif 1.5 * m.channel_spacing_hz > self.ofdm.sample_rate_hz / 2:
            out.append("metrics: adjacent channels must fit inside the Nyquist range")
        if not self.pattern.angle_step_deg > 0:
            out.append("pattern: angle_step_deg must be positive")
        if any(int(k) < 1 for k in self.pattern.antennas):
            out.append("pattern: antenna counts must be >= 1")
        if self.feedback.coupling_gc == 0:
            out.append("feedback: coupling_gc must be nonzero")
        if self.base_model_file is not None and not Path(self.base_model_file).is_file():
            out.append(f"population: base_model_file {self.base_model_file!r} not found")
        return out

    def base_model(self):
        if self.base_model_file is not None:
            from .io import read_models

            return read_models(self.base_model_file)[0]
        return default_base_model(self.drive, self.population.order, self.population.memory)

    def to_dict(self) -> dict:
        return {
            "ofdm": _plain(self.ofdm),
            "papr": _plain(self.papr),
            "population": {k: v for k, v in _plain(self.population).items() if k != "base_model"},
            "drive": self.drive,
            "base_model_file": self.base_model_file,
            "dpd": _plain(self.dpd),
            "feedback": _plain(self.feedback),
            "mismatch": _plain(self.mismatch),
            "metrics": _plain(self.metrics),
            "pattern": _plain(self.pattern),
            "scenarios": list(self.scenarios),
            "steering_deg": self.steering_deg,
            "output_dir": self.output_dir,
            "rng_seed": self.rng_seed,
        }


def _plain(dc) -> dict:
    return {f.name: getattr(dc, f.name) for f in fields(dc)}


# --------------------------------------------------------------------------
# TOML

# section -> (dataclass, {toml key: (field, converter)})
_TUPLE = lambda v: tuple(v)  # noqa: E731


def _complex(v):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError("complex values are written as [re, im]")
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def _memory(v):
    return tuple(int(m) for m in v) if isinstance(v, list) else int(v)


def _dispersion(v):
    if isinstance(v, dict):
        return {int(k): float(x) for k, x in v.items()}
    return float(v)


_SECTIONS = {
    "ofdm": (OfdmConfig, {
        "occupied_bandwidth_hz": float, "sample_rate_hz": float, "subcarrier_spacing_hz": float,
        "num_active_subcarriers": int, "constellation": str, "num_symbols": int,
        "cyclic_prefix_fraction": float,
    }),
    "papr": (PaprConfig, {"target_db": float, "max_iters": int}),
    "population": (PaPopulationConfig, {
        "count": int, "order": int, "memory": int, "dispersion": _dispersion,
        "aclr_band_dbc": _TUPLE, "max_redraws": int,
    }),
    "dpd": (DpdConfig, {
        "order_q": int, "memory": _memory, "learning_rate_mu": float, "block_size_b": int,
        "num_iterations": int, "orthogonalization": str, "gain_taps": int,
    }),
    "feedback": (FeedbackConfig, {"coupling_gc": _complex, "noise_snr_db": float}),
    "mismatch": (MismatchConfig, {"amplitude_range_pct": _TUPLE, "phase_range_deg": _TUPLE}),
    "metrics": (MetricsConfig, {
        "channel_spacing_hz": float, "occupied_fraction": float, "evm_per_subcarrier": bool,
        "evm_reference": str,
    }),
    "pattern": (PatternConfig, {"enabled": bool, "angle_step_deg": float, "antennas": _TUPLE}),
}
_EXTRA = {"population": {"drive": float, "base_model_file": str}}
_TOP = {"scenarios": _TUPLE, "steering_deg": float, "output_dir": str, "rng_seed": int}


def _line_of(text: str, section: str | None, key: str) -> int | None:
    """1-based line of ``key`` inside ``[section]`` (top level when None)."""
    current = None
    for no, line in enumerate(text.splitlines(), 1):
        head = re.match(r"\s*\[([^\]]+)\]", line)
        if head:
            current = head.group(1).strip()
            continue
        if current == section and re.match(rf"\s*{re.escape(key)}\s*=", line):
            return no
    return None


def _where(text, section, key):
    line = _line_of(text, section, key)
    name = f"{section}.{key}" if section else key
    return f"line {line}: {name}" if line else name


def parse(text: str, source: str = "<config>") -> tuple[ExperimentConfig | None, list[str]]:
    """Parse TOML text; returns (config or None, diagnostics)."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        return None, [f"{source}: {exc}"]
    diags = []
    kwargs = {}
    for key, value in raw.items():
        if isinstance(value, dict):
            if key not in _SECTIONS:
                diags.append(f"{source}: {_where(text, None, key)}: unknown section [{key}]")
                continue
            cls, converters = _SECTIONS[key]
            extra = _EXTRA.get(key, {})
            sub = {}
            for k, v in value.items():
                conv = converters.get(k) or extra.get(k)
                if conv is None:
                    diags.append(f"{source}: {_where(text, key, k)}: unknown field")
                    continue
                try:
                    val = conv(v)
                except (TypeError, ValueError) as exc:
                    diags.append(f"{source}: {_where(text, key, k)}: {exc}")
                    continue
                if k in extra:
                    kwargs[k] = val
                else:
                    sub[k] = val
            try:
                kwargs[key] = cls(**sub)
            except (TypeError, ValueError, ConfigurationError) as exc:
                diags.append(f"{source}: [{key}]: {exc}")
        elif key in _TOP:
            try:
                kwargs[key] = _TOP[key](value)
            except (TypeError, ValueError) as exc:
                diags.append(f"{source}: {_where(text, None, key)}: {exc}")
        else:
            diags.append(f"{source}: {_where(text, None, key)}: unknown field")
    if diags:
        return None, diags
    cfg = ExperimentConfig(**kwargs)
    for problem in cfg.validate():
        section, _, msg = problem.partition(": ")
        key = _field_named(msg)
        loc = _where(text, section if section in _SECTIONS else None, key) if key else section
        diags.append(f"{source}: {loc}: {msg}")
    return cfg, diags


def _field_named(msg: str) -> str | None:
    m = re.match(r"([a-z_]+)", msg)
    return m.group(1) if m else None


def load(path) -> ExperimentConfig:
    """Read and validate a configuration file; raises ConfigurationError with all diagnostics."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from exc
    cfg, diags = parse(text, str(path))
    if diags:
        raise ConfigurationError("\n".join(diags))
    return cfg


def validate_file(path) -> list[str]:
    """Diagnostics for a configuration file (empty when valid); unreadable files raise."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from exc
    return parse(text, str(path))[1]
