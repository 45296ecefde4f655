"""Rayleigh phase-error profiles for a fiber built from homogeneous segments.

Every trial draws its randomness from ``mix_seed(master_seed, trial_id)``,
so a profile depends only on ``(spec, master_seed, trial_id)`` and trials
can be generated in any order or on any number of workers.

Seed mixing
-----------
``mix_seed`` chains two rounds of the SplitMix64 finalizer::

    mix_seed(s, t) = splitmix64((splitmix64(s) + t * 0x9E3779B97F4A7C15) mod 2**64)

where ``splitmix64(z)`` adds the golden-ratio increment and applies the
``(30, 27, 31)`` xor-shift-multiply avalanche. Reference values::

    splitmix64(0)   == 0xE220A8397B1DCDAF
    mix_seed(0, 0)  == 0xA706DD2F4D197E6F
    mix_seed(1, 0)  == 0x5E41AB087439611E
    mix_seed(1, 1)  == 0xF18D6CE93D6CF1EE

The mixed value seeds a ``numpy.random.PCG64`` stream.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_U53 = 2.0 ** 53

RAYLEIGH_MEAN_FACTOR = math.sqrt(math.pi / 2.0)
RAYLEIGH_VAR_FACTOR = (4.0 - math.pi) / 2.0


class Correlation(str, enum.Enum):
    IID = "IID"
    FULLY_CORRELATED = "FULLY_CORRELATED"


@dataclass(frozen=True)
class FiberSpec:
    """Segmented fiber and its phase-noise model.

    Parameters
    ----------
    length_m : float
        Total fiber length in meters.
    segments : int
        Number of concatenated homogeneous segments.
    sigma : float
        Rayleigh scale of the per-segment phase error (radians).
    mean_phase : float
        Deterministic per-segment drift (radians).
    correlation : Correlation
        ``IID`` draws ``anchor_count`` anchors per trial and interpolates
        linearly between them; ``FULLY_CORRELATED`` shares one draw across
        every segment of a trial.
    anchor_count : int
        Number of Rayleigh anchors per trial in ``IID`` mode. Defaults to
        ``segments`` (independent draw per segment).
    """

    length_m: float
    segments: int
    sigma: float
    mean_phase: float = 0.0
    correlation: Correlation = Correlation.IID
    anchor_count: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "correlation", Correlation(self.correlation))
        if self.anchor_count is None:
            object.__setattr__(self, "anchor_count", self.segments)
        if not self.length_m > 0:
            raise ValueError(f"length_m must be positive, got {self.length_m!r}")
        if int(self.segments) != self.segments or self.segments < 1:
            raise ValueError(f"segments must be a positive integer, got {self.segments!r}")
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma!r}")
        if not math.isfinite(self.mean_phase):
            raise ValueError(f"mean_phase must be finite, got {self.mean_phase!r}")
        if (int(self.anchor_count) != self.anchor_count
                or not 1 <= self.anchor_count <= self.segments):
            raise ValueError(
                f"anchor_count must lie in [1, segments={self.segments}], "
                f"got {self.anchor_count!r}")
        object.__setattr__(self, "segments", int(self.segments))
        object.__setattr__(self, "anchor_count", int(self.anchor_count))

    @property
    def segment_length(self) -> float:
        return self.length_m / self.segments


@dataclass(frozen=True, eq=False)
class NoiseProfile:
    """Per-segment phase errors for one Monte Carlo trial."""

    deltas: np.ndarray
    trial_id: int
    master_seed: int
    spec: FiberSpec | None = field(default=None, repr=False)

    def __post_init__(self):
        arr = np.array(self.deltas, dtype=float)
        if arr.ndim != 1:
            raise ValueError("deltas must be one-dimensional")
        if self.spec is not None and arr.size != self.spec.segments:
            raise ValueError(
                f"{arr.size} deltas for a {self.spec.segments}-segment fiber")
        arr.setflags(write=False)
        object.__setattr__(self, "deltas", arr)

    @property
    def segments(self) -> int:
        return self.deltas.size


def splitmix64(z: int) -> int:
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def mix_seed(master_seed: int, trial_id: int) -> int:
    """64-bit per-trial seed; see the module docstring for the definition."""
    if trial_id < 0:
        raise ValueError(f"trial_id must be nonnegative, got {trial_id!r}")
    base = splitmix64(int(master_seed) & _MASK64)
    return splitmix64((base + int(trial_id) * _GOLDEN) & _MASK64)


def trial_rng(master_seed: int, trial_id: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(mix_seed(master_seed, trial_id)))


def open_uniform(rng: np.random.Generator, size=None):
    """Uniform draws on the open interval (0, 1), 53-bit resolution."""
    k = rng.integers(0, 1 << 53, size=size, dtype=np.int64)
    return (k + 0.5) / _U53


def rayleigh_pdf(x, sigma: float):
    """Rayleigh density ``x / sigma^2 * exp(-x^2 / (2 sigma^2))``."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be nonnegative")
    out = x / sigma ** 2 * np.exp(-x ** 2 / (2.0 * sigma ** 2))
    return out if out.ndim else float(out)


def rayleigh_cdf(x, sigma: float):
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    x = np.asarray(x, dtype=float)
    out = -np.expm1(-x ** 2 / (2.0 * sigma ** 2))
    return out if out.ndim else float(out)


def sample_rayleigh(uniform_u, sigma: float):
    """Inverse-CDF Rayleigh sample ``sigma * sqrt(-2 ln(1 - u))``.

    ``uniform_u`` may be a scalar or array; every value must lie strictly
    inside (0, 1).
    """
    if not sigma >= 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma!r}")
    u = np.asarray(uniform_u, dtype=float)
    if np.any((u <= 0.0) | (u >= 1.0)) or np.any(np.isnan(u)):
        raise ValueError("uniform_u must lie in the open interval (0, 1)")
    out = sigma * np.sqrt(-2.0 * np.log1p(-u))
    return out if out.ndim else float(out)


def generate_noise_profile(spec: FiberSpec, master_seed: int, trial_id: int) -> NoiseProfile:
    """Phase-error profile for one trial.

    Rayleigh draws are re-centered by their mean ``sigma*sqrt(pi/2)`` so the
    stochastic part is zero-mean about ``spec.mean_phase``.
    """
    rng = trial_rng(master_seed, trial_id)
    center = spec.sigma * RAYLEIGH_MEAN_FACTOR
    if spec.correlation is Correlation.FULLY_CORRELATED:
        draw = sample_rayleigh(open_uniform(rng), spec.sigma)
        deltas = np.full(spec.segments, spec.mean_phase + (draw - center))
    else:
        anchors = sample_rayleigh(open_uniform(rng, spec.anchor_count), spec.sigma)
        if spec.anchor_count == spec.segments:
            wander = anchors
        else:
            positions = np.linspace(0.0, spec.segments - 1, spec.anchor_count)
            wander = np.interp(np.arange(spec.segments, dtype=float), positions, anchors)
        deltas = spec.mean_phase + (wander - center)
    return NoiseProfile(deltas, int(trial_id), int(master_seed), spec)


def generate_profiles(spec: FiberSpec, master_seed: int, trials: int,
                      workers: int = 1) -> list[NoiseProfile]:
    """Profiles for trials ``0 .. trials-1``, returned in trial order."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials!r}")
    ids = range(int(trials))
    if workers <= 1:
        return [generate_noise_profile(spec, master_seed, t) for t in ids]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda t: generate_noise_profile(spec, master_seed, t), ids))


def stack_deltas(profiles: Sequence[NoiseProfile]) -> np.ndarray:
    """``(trials, segments)`` array in ``trial_id`` order."""
    if len(profiles) == 0:
        raise ValueError("no profiles given")
    ordered = sorted(profiles, key=lambda prof: prof.trial_id)
    sizes = {prof.segments for prof in ordered}
    if len(sizes) != 1:
        raise ValueError(f"profiles disagree on segment count: {sorted(sizes)}")
    return np.stack([prof.deltas for prof in ordered])


def deltas_statistics(deltas: np.ndarray) -> tuple[float, float]:
    deltas = np.asarray(deltas, dtype=float)
    if deltas.ndim != 2 or deltas.shape[0] < 2:
        raise ValueError("need at least two profiles")
    # Shift by the first trial so degenerate ensembles give exactly zero variance.
    ref = deltas[0]
    shifted = deltas - ref
    seg_mean = shifted.mean(axis=0)
    seg_var = ((shifted - seg_mean) ** 2).sum(axis=0) / (deltas.shape[0] - 1)
    mean = float(ref[0] + np.mean((ref - ref[0]) + seg_mean))
    return mean, float(np.mean(seg_var))


def profile_statistics(profiles: Sequence[NoiseProfile]) -> tuple[float, float]:
    """Pooled per-segment ensemble mean and variance.

    For each segment the mean and the (``ddof=1``) variance are taken across
    trials; both are then averaged over segments. The variance is the
    ``Delta phi^2`` that feeds the analytic model.
    """
    if len(profiles) < 2:
        raise ValueError("profile_statistics needs at least two profiles")
    return deltas_statistics(stack_deltas(profiles))
