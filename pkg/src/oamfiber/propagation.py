"""Segment-by-segment propagation with optional CPMG dove-prism pulses.

Positions along the fiber are measured in segment units: segment ``j``
covers ``[j, j + 1)`` and a pulse at position ``x`` acts after the photon
has travelled ``x`` segments. Pulses stay at their positions in the full
fiber when only a prefix of it is propagated; if an odd number of them has
been passed, a final frame flip maps the state back onto the input basis.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .noise import NoiseProfile, stack_deltas
from .qstate import DensityMatrix2, StateVector2


class ScheduleMismatchError(ValueError):
    """A pulse schedule cannot be laid out on the given profile."""


class Scheme(str, enum.Enum):
    FREE = "FREE"
    CPMG = "CPMG"


class Placement(str, enum.Enum):
    # EXACT splits a homogeneous segment at the pulse; NEAREST_BOUNDARY snaps.
    EXACT = "EXACT"
    NEAREST_BOUNDARY = "NEAREST_BOUNDARY"


@dataclass(frozen=True)
class ScheduleSpec:
    """Dynamical-decoupling schedule.

    CPMG pulses sit at fractions ``(2k - 1) / (2 N)`` of the fiber length,
    ``k = 1 .. N``.
    """

    scheme: Scheme = Scheme.FREE
    pulse_count: int = 0
    placement: Placement = Placement.EXACT

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "placement", Placement(self.placement))
        n = self.pulse_count
        if int(n) != n:
            raise ValueError(f"pulse_count must be an integer, got {n!r}")
        object.__setattr__(self, "pulse_count", int(n))
        if self.scheme is Scheme.FREE and n != 0:
            raise ValueError("FREE schedule must have pulse_count = 0")
        if self.scheme is Scheme.CPMG and (n < 2 or n % 2):
            raise ValueError(f"CPMG needs an even pulse_count >= 2, got {n!r}")

    @classmethod
    def free(cls) -> "ScheduleSpec":
        return cls(Scheme.FREE, 0)

    @classmethod
    def cpmg(cls, pulse_count: int, placement: Placement = Placement.EXACT) -> "ScheduleSpec":
        return cls(Scheme.CPMG, pulse_count, placement)


@dataclass(frozen=True)
class PropagationResult:
    final_state: StateVector2
    accumulated_phase: float
    pulses_applied: int = 0


def segment_operator(delta_phi: float, l: int) -> np.ndarray:
    """``diag(e^{+i l dphi / 2}, e^{-i l dphi / 2})``."""
    half = 0.5 * l * delta_phi
    c, s = math.cos(half), math.sin(half)
    return np.array([[complex(c, s), 0.0], [0.0, complex(c, -s)]], dtype=complex)


def dove_prism_pulse() -> np.ndarray:
    """Exchange operator ``|+l> <-> |-l>``."""
    return np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def pulse_positions(schedule: ScheduleSpec, segments: int) -> np.ndarray:
    """Pulse positions in segment units, sorted ascending."""
    n = schedule.pulse_count
    if n == 0:
        return np.empty(0)
    if segments < n:
        raise ScheduleMismatchError(
            f"{n} pulses do not fit on a {segments}-segment profile")
    k = np.arange(1, n + 1)
    if schedule.placement is Placement.EXACT:
        return segments * (2 * k - 1) / (2.0 * n)
    # round half up in integer arithmetic: floor(S (2k-1) / 2N + 1/2); the
    # spacing S/N >= 1 keeps the snapped boundaries distinct
    bounds = (segments * (2 * k - 1) + n) // (2 * n)
    return bounds.astype(float)


def signed_weights(schedule: ScheduleSpec, segments: int, upto: int | None = None) -> np.ndarray:
    """Signed fraction of each segment traversed in the input orientation.

    The net relative phase of a trial is ``l * sum(weights * deltas)``.
    Segments at or beyond ``upto`` get zero weight.
    """
    upto = segments if upto is None else int(upto)
    if not 0 <= upto <= segments:
        raise ValueError(f"upto must lie in [0, {segments}], got {upto!r}")
    pos = pulse_positions(schedule, segments)
    before = np.searchsorted(pos, np.arange(segments), side="right")
    w = np.where(before % 2 == 0, 1.0, -1.0)
    # segments with a pulse strictly inside get their signed fractions
    for j in np.unique(np.floor(pos[pos != np.floor(pos)]).astype(int)):
        edges = np.concatenate(([j], pos[(pos > j) & (pos < j + 1)], [j + 1]))
        sign = 1.0 if before[j] % 2 == 0 else -1.0
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            total += sign * (b - a)
            sign = -sign
        w[j] = total
    w[upto:] = 0.0
    return w


def _check_l(l):
    if int(l) != l or l == 0:
        raise ValueError(f"l must be a nonzero integer, got {l!r}")


def propagate(psi: StateVector2, profile: NoiseProfile, l: int, schedule: ScheduleSpec,
              upto: int | None = None) -> PropagationResult:
    """Apply each segment operator in order, inserting pulses on schedule.

    This is the literal matrix-by-matrix path; :func:`net_phases` is the
    vectorized equivalent used for ensembles.

    Parameters
    ----------
    upto : int, optional
        Propagate only the first ``upto`` segments (default: all).
    """
    _check_l(l)
    deltas = profile.deltas
    n_seg = deltas.size
    upto = n_seg if upto is None else int(upto)
    if not 0 <= upto <= n_seg:
        raise ValueError(f"upto must lie in [0, {n_seg}], got {upto!r}")
    pos = pulse_positions(schedule, n_seg)
    flip = dove_prism_pulse()
    state = psi.as_array()
    phase = 0.0
    sign = 1.0
    applied = 0
    ip = 0
    for j in range(upto):
        d = deltas[j]
        cursor = float(j)
        while ip < pos.size and pos[ip] < j + 1:
            piece = (pos[ip] - cursor) * d
            state = segment_operator(piece, l) @ state
            phase += sign * l * piece
            state = flip @ state
            sign = -sign
            applied += 1
            cursor = pos[ip]
            ip += 1
        piece = d if cursor == j else (j + 1 - cursor) * d
        state = segment_operator(piece, l) @ state
        phase += sign * l * piece
    if applied % 2:
        state = flip @ state
    return PropagationResult(StateVector2(state[0], state[1]), phase, applied)


def net_phases(deltas, l: int, schedule: ScheduleSpec, upto: int | None = None) -> np.ndarray:
    """Relative phase of every trial in a ``(trials, segments)`` array."""
    _check_l(l)
    deltas = np.atleast_2d(np.asarray(deltas, dtype=float))
    w = signed_weights(schedule, deltas.shape[1], upto)
    return l * (deltas * w).sum(axis=1)


def cumulative_phases(deltas, schedule: ScheduleSpec) -> np.ndarray:
    """Unscaled (``l = 1``) relative phase after every prefix length.

    Column ``m - 1`` holds the phase after the first ``m`` segments.
    """
    deltas = np.atleast_2d(np.asarray(deltas, dtype=float))
    w = signed_weights(schedule, deltas.shape[1])
    return np.cumsum(deltas * w, axis=1)


def trial_fidelities(psi0: StateVector2, phases) -> np.ndarray:
    """Per-trial ``|<psi0|psi_t>|^2`` for relative phases ``phases``.

    Written as ``1 - 2 p q (1 - cos phase)`` so a zero phase gives exactly 1.
    """
    p, q = _populations(psi0)
    f = 1.0 - 2.0 * p * q * (1.0 - np.cos(np.asarray(phases, dtype=float)))
    return np.clip(f, 0.0, 1.0)


def _populations(psi: StateVector2) -> tuple[float, float]:
    p = abs(psi.amp_plus) ** 2
    p = p / (p + abs(psi.amp_minus) ** 2)
    return p, 1.0 - p


def ensemble_from_phases(psi0: StateVector2, phases) -> DensityMatrix2:
    """Average of the output projectors for the given relative phases."""
    phases = np.asarray(phases, dtype=float)
    if phases.size == 0:
        raise ValueError("empty ensemble")
    p, q = _populations(psi0)
    mean_phasor = np.mean(np.exp(1j * phases))
    rho01 = psi0.amp_plus * psi0.amp_minus.conjugate() * complex(mean_phasor)
    return DensityMatrix2(p, rho01, q)


def ensemble_density(psi0: StateVector2, profiles: Sequence[NoiseProfile], l: int,
                     schedule: ScheduleSpec, upto: int | None = None) -> DensityMatrix2:
    """Ensemble-averaged output state over a set of noise profiles.

    Trials are reduced in ``trial_id`` order, so the result does not depend
    on how the profiles were produced.
    """
    if len(profiles) == 0:
        raise ValueError("ensemble_density needs at least one profile")
    return ensemble_from_phases(psi0, net_phases(stack_deltas(profiles), l, schedule, upto))
