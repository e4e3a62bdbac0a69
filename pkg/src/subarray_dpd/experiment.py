"""Scenario runner: no predistortion, single-PA learning and combined-feedback learning."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import dpd, io, metrics
from .array import (EmissionPattern, SubArray, combined_main_beam, default_angle_grid,
                    emission_pattern, single_antenna_pattern)
from .config import ExperimentConfig
from .exceptions import DpdError
from .feedback import FeedbackNetwork, observe_single, sample_mismatch
from .pa import synth_population
from .signals import ComplexSignal, SymbolGrid, demodulate, make_test_signal, papr_db, psd_welch

log = logging.getLogger(__name__)


@dataclass
class Setup:
    """Everything shared by the scenarios of one run."""

    cfg: ExperimentConfig
    x: ComplexSignal
    grid: SymbolGrid
    models: list
    deviations: np.ndarray
    channel: metrics.ChannelDef
    reference: SymbolGrid | None = None

    def __post_init__(self):
        if self.reference is None:
            self.reference = self.grid

    def subarray(self, M: int) -> SubArray:
        return SubArray.steered(self.models[:M], self.cfg.steering_deg)

    def network(self, M: int) -> FeedbackNetwork:
        fb = self.cfg.feedback
        return FeedbackNetwork(fb.coupling_gc, self.deviations[:M], noise_snr_db=fb.noise_snr_db)


def prepare(cfg: ExperimentConfig, extra_antennas=()) -> Setup:
    """Test signal, PA population, coupler deviations and the measurement channel.

    Populations and deviations are drawn sequentially, so the first M of a
    larger draw equal a draw of M; pattern runs with more antennas therefore
    extend the main sub-array instead of replacing it.
    """
    cfg = cfg.seeded()
    x, grid = make_test_signal(cfg.ofdm, cfg.papr.target_db, cfg.papr.max_iters)
    M = cfg.population.count
    count = max([M, *[int(k) for k in extra_antennas]])
    pop_cfg = replace(cfg.population, count=count, base_model=cfg.base_model())
    models = synth_population(pop_cfg)
    deviations = sample_mismatch(cfg.mismatch, count)
    sub = SubArray.steered(models[:M], cfg.steering_deg)
    y0 = combined_main_beam(sub, x)
    ch = metrics.channel_for(y0, cfg.metrics.channel_spacing_hz, cfg.metrics.occupied_fraction)
    ref = grid
    if cfg.metrics.evm_reference == "transmitted":
        ref = replace(grid, symbols=demodulate(x, grid))
    return Setup(cfg, x, grid, models, deviations, ch, ref)


@dataclass
class ScenarioResult:
    report: metrics.MetricsReport
    main_beam: ComplexSignal
    predistorted: ComplexSignal
    learning: dpd.LearnResult | None = None


@dataclass
class RunResult:
    setup: Setup
    scenarios: dict = field(default_factory=dict)
    patterns: dict = field(default_factory=dict)

    def report(self) -> dict:
        s = self.setup
        out = {
            "config": s.cfg.to_dict(),
            "seeds": s.cfg.seeds(),
            "deviations": s.deviations[: s.cfg.population.count],
            "channel": s.channel.to_dict(),
            "papr_db": papr_db(s.x),
            "num_samples": len(s.x),
            "metrics": {k: r.report.to_dict() for k, r in self.scenarios.items()},
            "learning": {},
            "patterns": {},
        }
        for k, r in self.scenarios.items():
            if r.learning is None:
                continue
            t = r.learning.trace
            out["learning"][k] = {
                "error_power_db": [10 * np.log10(p) for p in t.error_power],
                "final_coeffs_raw": r.learning.state.raw_coeffs,
                "final_coeffs_orth": r.learning.state.coeffs,
                "max_residual_correlation": float(np.max(r.learning.residual_correlation)),
            }
        for k, p in self.patterns.items():
            i = int(np.argmax(p.inband_db))
            out["patterns"][k] = {"peak_angle_deg": float(p.angles_deg[i]),
                                  "oob_at_steering_db": list(p.at(p.steering_deg)[1:])}
        return out


def _learn(setup: Setup, M: int, single: bool) -> dpd.LearnResult:
    cfg = setup.cfg
    sub = setup.subarray(M)
    net = setup.network(M)
    rng = np.random.default_rng(cfg.seeds()["noise"])
    observer = None
    if single:
        def observer(xt):
            return observe_single(sub, net, xt, 0)
    return dpd.learn(sub, net, cfg.dpd, setup.x, observer=observer, rng=rng)


def run_scenario(setup: Setup, name: str) -> ScenarioResult:
    cfg = setup.cfg
    M = cfg.population.count
    learning = None
    xt = setup.x
    if name != "no_dpd":
        try:
            learning = _learn(setup, M, single=(name == "single_pa_learning"))
        except DpdError as exc:
            raise type(exc)(f"scenario {name}: {exc}") from exc
        xt = dpd.apply_dpd(learning.state, cfg.dpd, setup.x)
    y = combined_main_beam(setup.subarray(M), xt)
    rep = metrics.measure(name, y, setup.reference, setup.channel, y.sample_rate_hz,
                          cfg.metrics.evm_per_subcarrier)
    log.info("%s: EVM %.3f %%, ACLR %.2f / %.2f dBc", name, rep.evm_pct, rep.aclr_lower_dbc, rep.aclr_upper_dbc)
    return ScenarioResult(rep, y, xt, learning)


def run_patterns(setup: Setup, antennas, proposed: dict | None = None) -> dict:
    """Emission patterns per antenna count, with and without the proposed DPD, plus the single-antenna reference.

    ``proposed`` may map an antenna count to an already predistorted signal.
    """
    cfg = setup.cfg
    grid = default_angle_grid(cfg.pattern.angle_step_deg)
    out = {"single": single_antenna_pattern(cfg.base_model(), setup.x, setup.channel, grid)}
    proposed = proposed or {}
    for M in antennas:
        M = int(M)
        sub = setup.subarray(M)
        xt = proposed.get(M)
        if xt is None:
            xt = dpd.apply_dpd(_learn(setup, M, single=False).state, cfg.dpd, setup.x)
        out[f"M{M}"] = emission_pattern(sub, xt, cfg.steering_deg, setup.channel, grid)
        out[f"M{M}_no_dpd"] = emission_pattern(sub, setup.x, cfg.steering_deg, setup.channel, grid)
    return out


def run(cfg: ExperimentConfig, patterns: bool | None = None) -> RunResult:
    antennas = tuple(cfg.pattern.antennas) if (cfg.pattern.enabled if patterns is None else patterns) else ()
    setup = prepare(cfg, antennas)
    result = RunResult(setup)
    for name in cfg.scenarios:
        result.scenarios[name] = run_scenario(setup, name)
    if antennas:
        known = {}
        if "proposed" in result.scenarios:
            known[cfg.population.count] = result.scenarios["proposed"].predistorted
        result.patterns = run_patterns(setup, antennas, known)
    return result


# --------------------------------------------------------------------------
# Output files


def write_pattern(path, p: EmissionPattern):
    rows = zip(p.angles_deg, p.inband_db, p.oob_lower_db, p.oob_upper_db)
    return io.write_csv(path, ["angle_deg", "inband_db", "oob_lower_db", "oob_upper_db"], rows)


def write_outputs(result: RunResult, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    rows = [(k, r.report.evm_pct, r.report.aclr_lower_dbc, r.report.aclr_upper_dbc)
            for k, r in result.scenarios.items()]
    written.append(io.write_csv(out / "metrics.csv", ["scenario", "evm_pct", "aclr_lower_dbc", "aclr_upper_dbc"], rows))
    for k, r in result.scenarios.items():
        psd = psd_welch(r.main_beam, metrics.PSD_NFFT, metrics.PSD_OVERLAP, metrics.PSD_WINDOW)
        written.append(io.write_csv(out / f"psd_{k}.csv", ["freq_hz", "psd_db"], zip(psd.freqs_hz, psd.to_db())))
        if r.learning is not None:
            header = ["iteration", "coeff_index", "re", "im", "error_power_db"]
            written.append(io.write_csv(out / f"trace_{k}.csv", header, r.learning.trace.rows()))
            written.append(io.write_csv(out / f"trace_{k}_raw.csv", header, r.learning.trace.rows(raw=True)))
    for k, p in result.patterns.items():
        written.append(write_pattern(out / f"pattern_{k}.csv", p))
    written.append(io.write_json(out / "report.json", result.report()))
    return written
