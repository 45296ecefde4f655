"""Experiment runner: configs, figure presets, sweeps and output files."""
from __future__ import annotations

import csv
import io
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .analytic import GAUSSIAN_REGIME_LIMIT, AnalyticParams, analytic_fidelity
from .noise import (Correlation, FiberSpec, deltas_statistics, generate_profiles,
                    stack_deltas)
from .propagation import (Placement, ScheduleSpec, Scheme, cumulative_phases,
                          signed_weights, trial_fidelities)
from .qstate import make_superposition_state

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

CSV_HEADER = ("distance_m", "l", "scheme", "fidelity_mc", "stderr_mc", "fidelity_analytic")
COMPARE_HEADER = ("distance_m", "l", "abs_error", "stderr_mc", "status")


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the field."""


class EmitError(OSError):
    """Output could not be written."""


@dataclass(frozen=True)
class ExperimentConfig:
    fiber: FiberSpec
    schedule: ScheduleSpec
    l_values: tuple[int, ...]
    phi: float = 0.0
    trials: int = 10_000
    master_seed: int = 0
    sample_points: int = 20

    def __post_init__(self):
        object.__setattr__(self, "l_values", tuple(self.l_values))
        if not self.l_values:
            raise ConfigError("l_values: must be nonempty")
        for l in self.l_values:
            if isinstance(l, bool) or int(l) != l or l == 0:
                raise ConfigError(f"l_values: entries must be nonzero integers, got {l!r}")
        object.__setattr__(self, "l_values", tuple(int(l) for l in self.l_values))
        if int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError(f"trials: must be an integer >= 1, got {self.trials!r}")
        if int(self.sample_points) != self.sample_points or self.sample_points < 2:
            raise ConfigError(f"sample_points: must be an integer >= 2, got {self.sample_points!r}")
        if int(self.master_seed) != self.master_seed or self.master_seed < 0:
            raise ConfigError(f"master_seed: must be a nonnegative integer, got {self.master_seed!r}")
        if not math.isfinite(self.phi):
            raise ConfigError(f"phi: must be finite, got {self.phi!r}")


@dataclass(frozen=True)
class FidelityRow:
    distance_m: float
    l: int
    scheme: str
    fidelity_mc: float
    stderr_mc: float
    fidelity_analytic: float
    # not written to CSV
    n_effective: float = field(default=0.0, compare=False)
    dphi2: float = field(default=0.0, compare=False)


@dataclass
class FidelityCurve:
    """Rows of a fidelity experiment.

    ``kind`` is ``"distance"`` for fidelity along the fiber and ``"l"`` for
    end-of-fiber sweeps over the azimuthal order.
    """

    rows: list[FidelityRow]
    kind: str = "distance"

    def __len__(self):
        return len(self.rows)

    def series(self, l: int) -> list[FidelityRow]:
        return [r for r in self.rows if r.l == l]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def check(self):
        for r in self.rows:
            if not (0.0 <= r.fidelity_mc <= 1.0 and 0.0 <= r.fidelity_analytic <= 1.0):
                raise ValueError(f"fidelity outside [0, 1] in row {r}")
            if r.stderr_mc < 0:
                raise ValueError(f"negative stderr in row {r}")
        if self.kind == "distance":
            for l in {r.l for r in self.rows}:
                d = [r.distance_m for r in self.series(l)]
                if any(b <= a for a, b in zip(d, d[1:])):
                    raise ValueError(f"distances not strictly increasing for l={l}")


@dataclass(frozen=True)
class ComparisonRow:
    distance_m: float
    l: int
    abs_error: float
    stderr_mc: float
    status: str  # "pass", "fail" or "out-of-regime"

    @property
    def passed(self) -> bool:
        return self.status != "fail"


# --- configuration files -------------------------------------------------

_FIELDS = {
    "length_m": float, "segments": int, "sigma": float, "mean_phase": float,
    "correlation": str, "anchor_count": int, "scheme": str, "pulse_count": int,
    "placement": str, "l_values": list, "phi": float, "trials": int,
    "master_seed": int, "sample_points": int,
}
_OPTIONAL = {"placement"}


def config_from_mapping(data: Mapping) -> ExperimentConfig:
    """Build a config from flat keys; unknown or missing keys are errors."""
    unknown = sorted(set(data) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown configuration key")
    missing = sorted(set(_FIELDS) - set(data) - _OPTIONAL)
    if missing:
        raise ConfigError(f"{missing[0]}: required configuration key is missing")
    values = {}
    for key, value in data.items():
        kind = _FIELDS[key]
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if kind is int and isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, kind) or isinstance(value, bool):
            raise ConfigError(f"{key}: expected {kind.__name__}, got {value!r}")
        values[key] = value
    correlation = _enum(Correlation, "correlation", values["correlation"])
    scheme = _enum(Scheme, "scheme", values["scheme"])
    placement = _enum(Placement, "placement", values.get("placement", "EXACT"))
    try:
        fiber = FiberSpec(values["length_m"], values["segments"], values["sigma"],
                          values["mean_phase"], correlation, values["anchor_count"])
    except ValueError as exc:
        raise ConfigError(_field_message(exc, ("length_m", "segments", "sigma",
                                               "mean_phase", "anchor_count"))) from exc
    try:
        schedule = ScheduleSpec(scheme, values["pulse_count"], placement)
    except ValueError as exc:
        raise ConfigError(f"pulse_count: {exc}") from exc
    return ExperimentConfig(fiber, schedule, tuple(values["l_values"]), values["phi"],
                            values["trials"], values["master_seed"], values["sample_points"])


def _enum(kind, key: str, value: str):
    try:
        return kind(value.upper())
    except ValueError:
        choices = ", ".join(m.value for m in kind)
        raise ConfigError(f"{key}: {value!r} is not one of {choices}") from None


def _field_message(exc: Exception, candidates) -> str:
    msg = str(exc)
    for name in candidates:
        if name in msg:
            return f"{name}: {msg}"
    return f"{candidates[0]}: {msg}"


def load_config(path) -> ExperimentConfig:
    """Read a flat TOML experiment configuration."""
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return config_from_mapping(data)


def config_to_mapping(config: ExperimentConfig) -> dict:
    f, s = config.fiber, config.schedule
    return {
        "length_m": f.length_m, "segments": f.segments, "sigma": f.sigma,
        "mean_phase": f.mean_phase, "correlation": f.correlation.value,
        "anchor_count": f.anchor_count, "scheme": s.scheme.value,
        "pulse_count": s.pulse_count, "placement": s.placement.value,
        "l_values": list(config.l_values), "phi": config.phi, "trials": config.trials,
        "master_seed": config.master_seed, "sample_points": config.sample_points,
    }


def dump_config(config: ExperimentConfig) -> str:
    lines = []
    for key, value in config_to_mapping(config).items():
        if isinstance(value, str):
            value = f'"{value}"'
        elif isinstance(value, list):
            value = "[" + ", ".join(str(v) for v in value) + "]"
        else:
            value = repr(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


# --- presets -------------------------------------------------------------

# Calibrated so free evolution at l = 1 is fully dephased by ~250 m while
# 100 CPMG pulses keep l = 2 above 0.99 everywhere.
PRESET_FIBER = FiberSpec(length_m=500.0, segments=1000, sigma=0.028, mean_phase=0.0,
                         correlation=Correlation.IID, anchor_count=20)
PRESET_PULSES = 100
PRESET_SEED = 20150801

PRESETS = {
    "fig1": dict(schedule=ScheduleSpec.free(), l_values=(1, 2, 10, 50, 100)),
    "fig2": dict(schedule=ScheduleSpec.cpmg(PRESET_PULSES), l_values=(2,)),
    "fig3": dict(schedule=ScheduleSpec.cpmg(PRESET_PULSES), l_values=(10,)),
    "fig4": dict(schedule=ScheduleSpec.cpmg(PRESET_PULSES), l_values=(50,)),
    "fig5": dict(schedule=ScheduleSpec.cpmg(PRESET_PULSES), l_values=tuple(range(1, 101))),
}


def preset_config(name: str, trials: int | None = None, seed: int | None = None) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigError(f"preset: unknown preset {name!r}, choose from {sorted(PRESETS)}")
    return ExperimentConfig(
        fiber=PRESET_FIBER, phi=0.0, sample_points=20,
        trials=10_000 if trials is None else trials,
        master_seed=PRESET_SEED if seed is None else seed,
        **PRESETS[name])


def run_preset(name: str, trials: int | None = None, seed: int | None = None,
               workers: int = 1) -> FidelityCurve:
    config = preset_config(name, trials, seed)
    if name == "fig5":
        return sweep_l(config, workers=workers)
    return run_experiment(config, workers=workers)


# --- experiments ---------------------------------------------------------

def prefix_lengths(config: ExperimentConfig) -> list[tuple[float, int]]:
    """``(distance_m, segments_traversed)`` for each sample point."""
    f = config.fiber
    pts = config.sample_points
    return [(f.length_m * i / pts, f.segments * i // pts) for i in range(1, pts + 1)]


def _simulate(config: ExperimentConfig, samples: list[tuple[float, int]], workers: int):
    profiles = generate_profiles(config.fiber, config.master_seed, config.trials, workers)
    deltas = stack_deltas(profiles)
    if deltas.shape[0] >= 2:
        phi0, dphi2 = deltas_statistics(deltas)
    else:
        phi0, dphi2 = float(np.mean(deltas)), 0.0
    cum = cumulative_phases(deltas, config.schedule)
    n_eff = np.cumsum(signed_weights(config.schedule, config.fiber.segments))
    trials = deltas.shape[0]
    rows = []
    for l in config.l_values:
        psi0 = make_superposition_state(l, config.phi)
        for distance, m in samples:
            base = cum[:, m - 1] if m > 0 else np.zeros(trials)
            n = abs(float(n_eff[m - 1])) if m > 0 else 0.0
            f = trial_fidelities(psi0, l * base)
            mean = float(np.mean(f))
            se = float(np.std(f, ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
            analytic = analytic_fidelity(AnalyticParams(n, l, phi0, dphi2, config.phi))
            rows.append(FidelityRow(distance, l, config.schedule.scheme.value,
                                    min(max(mean, 0.0), 1.0), se, analytic, n, dphi2))
    return rows


def run_experiment(config: ExperimentConfig, workers: int = 1) -> FidelityCurve:
    """Monte Carlo fidelity along the fiber for every ``l`` in the config.

    Each trial's profile is generated once for the full fiber and truncated
    to the segments traversed at every sample distance; the analytic column
    uses the pooled ensemble mean and variance of the profiles.
    """
    curve = FidelityCurve(_simulate(config, prefix_lengths(config), workers), "distance")
    curve.check()
    return curve


def sweep_l(config: ExperimentConfig, workers: int = 1) -> FidelityCurve:
    """End-of-fiber fidelity, one row per ``l`` at a fixed pulse budget."""
    end = [(config.fiber.length_m, config.fiber.segments)]
    curve = FidelityCurve(_simulate(config, end, workers), "l")
    curve.check()
    return curve


def compare_analytic(config: ExperimentConfig, workers: int = 1) -> list[ComparisonRow]:
    """Check Monte Carlo against the closed form at three standard errors.

    A series whose spread ``n |l| sqrt(dphi2)`` at the largest sampled
    distance exceeds the Gaussian-regime limit is reported out-of-regime.
    """
    if config.fiber.correlation is not Correlation.FULLY_CORRELATED:
        raise ConfigError("correlation: compare requires FULLY_CORRELATED noise")
    curve = run_experiment(config, workers)
    report = []
    for l in config.l_values:
        series = curve.series(l)
        last = series[-1]
        spread = last.n_effective * abs(l) * math.sqrt(last.dphi2)
        in_regime = spread <= GAUSSIAN_REGIME_LIMIT
        for r in series:
            err = abs(r.fidelity_mc - r.fidelity_analytic)
            if not in_regime:
                status = "out-of-regime"
            else:
                status = "pass" if err <= 3.0 * r.stderr_mc else "fail"
            report.append(ComparisonRow(r.distance_m, l, err, r.stderr_mc, status))
    return report


# --- output --------------------------------------------------------------

def _num(x: float) -> str:
    return format(float(x), ".12g")


def curve_to_csv(curve: FidelityCurve) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in curve.rows:
        writer.writerow([_num(r.distance_m), str(r.l), r.scheme, _num(r.fidelity_mc),
                         _num(r.stderr_mc), _num(r.fidelity_analytic)])
    return buf.getvalue()


def comparison_to_csv(rows: Iterable[ComparisonRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COMPARE_HEADER)
    for r in rows:
        writer.writerow([_num(r.distance_m), str(r.l), _num(r.abs_error),
                         _num(r.stderr_mc), r.status])
    return buf.getvalue()


def curve_to_svg(curve: FidelityCurve) -> str:
    """Fidelity plot as SVG text, with a reference line at 0.5."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "oamfiber", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        if curve.kind == "l":
            ax.errorbar(curve.column("l"), curve.column("fidelity_mc"),
                        yerr=curve.column("stderr_mc"), marker="o", ms=3, lw=1)
            ax.set_xlabel("azimuthal order l")
        else:
            for l in sorted({r.l for r in curve.rows}):
                s = curve.series(l)
                ax.plot([r.distance_m for r in s], [r.fidelity_mc for r in s],
                        marker="o", ms=3, lw=1, label=f"l = {l}")
            ax.set_xlabel("distance (m)")
            ax.legend(loc="best", fontsize="small")
        ax.axhline(0.5, color="gray", ls="--", lw=1)
        ax.set_ylabel("fidelity")
        ax.set_ylim(0.45, 1.02)
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()


def emit(curve: FidelityCurve, path, fmt: str = "csv") -> str:
    """Write ``curve`` as CSV or SVG to ``path`` and return the text.

    An empty curve raises ``ValueError`` before anything is written.
    """
    if len(curve) == 0:
        raise ValueError("cannot emit an empty curve")
    fmt = fmt.lower()
    if fmt == "csv":
        text = curve_to_csv(curve)
    elif fmt == "svg":
        text = curve_to_svg(curve)
    else:
        raise ValueError(f"unknown format {fmt!r}, expected 'csv' or 'svg'")
    write_text(path, text)
    return text


def write_text(path, text: str):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise EmitError(f"cannot write {os.fspath(path)}: {exc.strerror or exc}") from exc
