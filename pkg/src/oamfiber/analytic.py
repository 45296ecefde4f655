"""Closed-form dephasing model for a segmented fiber.

Summing one shared random deviation over ``n`` segments and keeping the
second cumulant gives the coherence decay ``exp(-n^2 l^2 dphi2 / 2)`` and a
mean rotation ``n l phi0`` of the off-diagonal element. The radial factor is
normalized out and the matrix is scaled to unit trace.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .qstate import DensityMatrix2

GAUSSIAN_REGIME_LIMIT = 0.5


@dataclass(frozen=True)
class AnalyticParams:
    """Inputs of the closed-form model.

    Parameters
    ----------
    n : float
        Number of segments traversed (proportional to distance).
    l : int
        Azimuthal order.
    phi0 : float
        Mean per-segment phase.
    dphi2 : float
        Variance of the per-segment phase deviation.
    theta : float
        Superposition phase of the input state.
    """

    n: float
    l: int
    phi0: float = 0.0
    dphi2: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        if not self.n >= 0:
            raise ValueError(f"n must be nonnegative, got {self.n!r}")
        if not self.dphi2 >= 0:
            raise ValueError(f"dphi2 must be nonnegative, got {self.dphi2!r}")
        if int(self.l) != self.l:
            raise ValueError(f"l must be an integer, got {self.l!r}")

    @property
    def spread(self) -> float:
        """``n |l| sqrt(dphi2)``; the model is trusted while this is <= 0.5."""
        return self.n * abs(self.l) * math.sqrt(self.dphi2)

    @property
    def in_gaussian_regime(self) -> bool:
        return self.spread <= GAUSSIAN_REGIME_LIMIT


def decoherence_factor(params: AnalyticParams) -> float:
    """``exp(-n^2 l^2 dphi2 / 2)``."""
    x = params.n * abs(params.l)
    if x == 0.0:
        return 1.0
    return math.exp(-0.5 * x * x * params.dphi2)


def analytic_rho_out(params: AnalyticParams) -> DensityMatrix2:
    """Output density matrix with diagonal 1/2 and damped, rotated coherence."""
    angle = params.l * (2.0 * params.theta + params.n * params.phi0)
    rho01 = 0.5 * decoherence_factor(params) * cmath.exp(1j * angle)
    return DensityMatrix2(0.5, rho01, 0.5)


def analytic_fidelity(params: AnalyticParams) -> float:
    """``(1 + cos(n l phi0) * exp(-n^2 l^2 dphi2 / 2)) / 2``.

    Valid for the equal-superposition input built with phase ``theta``;
    ``theta`` itself drops out.
    """
    x = params.n * abs(params.l)
    return 0.5 * (1.0 + math.cos(x * params.phi0) * decoherence_factor(params))


def fit_power_law(x, y) -> tuple[float, float]:
    """Least-squares slope and intercept of ``log y`` against ``log x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("need at least two strictly positive points")
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope), float(intercept)


def decay_rate(coherence):
    """``-ln(2 |rho01|)``, the exponent the model predicts as ``n^2 l^2 dphi2 / 2``."""
    return -np.log(2.0 * np.asarray(coherence, dtype=float))
