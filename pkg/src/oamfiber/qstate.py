"""Two-level OAM qubit algebra and Laguerre-Gauss mode math.

The qubit lives on the basis ``{|+l>, |-l>}``. The common radial factor
``|R_pl(r)|^2`` that multiplies every density matrix is normalized out, so a
2x2 block carries all of the dephasing dynamics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

NORM_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-12
IMAG_TOL = 1e-9


class InvariantViolation(ValueError):
    """Raised when a state or density matrix breaks its defining invariants."""


@dataclass(frozen=True)
class StateVector2:
    """Normalized amplitudes over ``{|+l>, |-l>}``."""

    amp_plus: complex
    amp_minus: complex

    def __post_init__(self):
        object.__setattr__(self, "amp_plus", complex(self.amp_plus))
        object.__setattr__(self, "amp_minus", complex(self.amp_minus))
        norm2 = abs(self.amp_plus) ** 2 + abs(self.amp_minus) ** 2
        if abs(norm2 - 1.0) > NORM_TOL:
            raise InvariantViolation(f"state norm^2 = {norm2!r}, expected 1")

    @classmethod
    def normalized(cls, amp_plus: complex, amp_minus: complex) -> "StateVector2":
        """Build a state from unnormalized amplitudes."""
        norm = math.hypot(abs(amp_plus), abs(amp_minus))
        if norm == 0.0:
            raise InvariantViolation("cannot normalize the zero vector")
        return cls(amp_plus / norm, amp_minus / norm)

    @classmethod
    def from_array(cls, vec) -> "StateVector2":
        vec = np.asarray(vec, dtype=complex).reshape(2)
        return cls(vec[0], vec[1])

    def as_array(self) -> np.ndarray:
        return np.array([self.amp_plus, self.amp_minus], dtype=complex)

    def apply(self, unitary) -> "StateVector2":
        """Return ``U @ psi``; no renormalization, so drift is visible."""
        out = np.asarray(unitary, dtype=complex) @ self.as_array()
        return StateVector2(out[0], out[1])

    @property
    def norm(self) -> float:
        return math.hypot(abs(self.amp_plus), abs(self.amp_minus))


@dataclass(frozen=True)
class DensityMatrix2:
    """Hermitian, unit-trace, positive-semidefinite 2x2 density matrix.

    Only ``rho00``, ``rho01`` and ``rho11`` are stored; ``rho10`` is
    ``conj(rho01)`` by construction.
    """

    rho00: float
    rho01: complex
    rho11: float

    def __post_init__(self):
        object.__setattr__(self, "rho00", float(self.rho00))
        object.__setattr__(self, "rho01", complex(self.rho01))
        object.__setattr__(self, "rho11", float(self.rho11))
        if abs(self.trace - 1.0) > TRACE_TOL:
            raise InvariantViolation(f"trace = {self.trace!r}, expected 1")
        if self.min_eigenvalue < -PSD_TOL:
            raise InvariantViolation(
                f"negative eigenvalue {self.min_eigenvalue!r}")

    @classmethod
    def from_matrix(cls, mat, atol: float = 1e-12) -> "DensityMatrix2":
        mat = np.asarray(mat, dtype=complex)
        if mat.shape != (2, 2):
            raise InvariantViolation(f"expected a 2x2 matrix, got {mat.shape}")
        if abs(mat[1, 0] - np.conj(mat[0, 1])) > atol:
            raise InvariantViolation("matrix is not Hermitian")
        if abs(mat[0, 0].imag) > atol or abs(mat[1, 1].imag) > atol:
            raise InvariantViolation("diagonal entries must be real")
        return cls(mat[0, 0].real, mat[0, 1], mat[1, 1].real)

    @classmethod
    def maximally_mixed(cls) -> "DensityMatrix2":
        return cls(0.5, 0.0, 0.5)

    @property
    def rho10(self) -> complex:
        return self.rho01.conjugate()

    @property
    def trace(self) -> float:
        return self.rho00 + self.rho11

    @property
    def eigenvalues(self) -> tuple[float, float]:
        half_tr = 0.5 * self.trace
        radius = math.hypot(0.5 * (self.rho00 - self.rho11), abs(self.rho01))
        return half_tr - radius, half_tr + radius

    @property
    def min_eigenvalue(self) -> float:
        return self.eigenvalues[0]

    @property
    def purity(self) -> float:
        """``trace(rho^2)``."""
        return self.rho00 ** 2 + self.rho11 ** 2 + 2.0 * abs(self.rho01) ** 2

    @property
    def coherence(self) -> float:
        """Magnitude of the off-diagonal element."""
        return abs(self.rho01)

    def as_array(self) -> np.ndarray:
        return np.array([[self.rho00, self.rho01],
                         [self.rho10, self.rho11]], dtype=complex)


def make_superposition_state(l: int, phi: float) -> StateVector2:
    """Equal superposition ``(e^{i l phi}, e^{-i l phi}) / sqrt(2)``.

    Parameters
    ----------
    l : int
        Azimuthal order; must be nonzero since ``l = 0`` has no +/- pair.
    phi : float
        Superposition phase in radians.
    """
    if int(l) != l or l == 0:
        raise ValueError(f"l must be a nonzero integer, got {l!r}")
    angle = l * phi
    amp = complex(math.cos(angle), math.sin(angle)) / math.sqrt(2.0)
    return StateVector2(amp, amp.conjugate())


def density_from_state(psi: StateVector2) -> DensityMatrix2:
    """Rank-1 projector ``|psi><psi|``."""
    p = abs(psi.amp_plus) ** 2
    q = abs(psi.amp_minus) ** 2
    total = p + q
    return DensityMatrix2(p / total, psi.amp_plus * psi.amp_minus.conjugate(),
                          q / total)


def fidelity(psi_initial: StateVector2, rho: DensityMatrix2) -> float:
    """Overlap ``<psi|rho|psi>`` of a pure reference state with ``rho``.

    An imaginary residue above ``IMAG_TOL`` means ``rho`` is not Hermitian in
    practice and raises :class:`InvariantViolation`; below that it is dropped.
    """
    a, b = psi_initial.amp_plus, psi_initial.amp_minus
    value = (abs(a) ** 2 * rho.rho00 + abs(b) ** 2 * rho.rho11
             + a.conjugate() * rho.rho01 * b + b.conjugate() * rho.rho10 * a)
    if abs(value.imag) > IMAG_TOL:
        raise InvariantViolation(
            f"fidelity quadratic form has imaginary part {value.imag!r}")
    f = value.real
    if f < -NORM_TOL or f > 1.0 + NORM_TOL:
        raise InvariantViolation(f"fidelity {f!r} outside [0, 1]")
    return min(max(f, 0.0), 1.0)


@dataclass(frozen=True)
class LGModeParams:
    """Laguerre-Gauss mode indices and beam geometry.

    ``w0`` and ``z`` share one length unit and ``k`` is its inverse.
    """

    p: int
    l: int
    w0: float
    k: float
    z: float = 0.0

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 0:
            raise ValueError(f"p must be a nonnegative integer, got {self.p!r}")
        if int(self.l) != self.l:
            raise ValueError(f"l must be an integer, got {self.l!r}")
        if not self.w0 > 0:
            raise ValueError(f"w0 must be positive, got {self.w0!r}")
        if not self.k > 0:
            raise ValueError(f"k must be positive, got {self.k!r}")

    @property
    def rayleigh_range(self) -> float:
        return 0.5 * self.k * self.w0 ** 2

    @property
    def beam_width(self) -> float:
        return self.w0 * math.sqrt(1.0 + (self.z / self.rayleigh_range) ** 2)

    @property
    def curvature_radius(self) -> float:
        """Wavefront radius of curvature; infinite at the waist."""
        if self.z == 0:
            return math.inf
        return self.z * (1.0 + (self.rayleigh_range / self.z) ** 2)

    @property
    def normalization(self) -> float:
        """Constant giving unit ``int |R|^2 r dr`` over ``[0, inf)``."""
        p, m = int(self.p), abs(int(self.l))
        return 2.0 * math.exp(0.5 * (gammaln(p + 1) - gammaln(p + m + 1)))


def gouy_phase(params: LGModeParams) -> float:
    """``(2p + |l| + 1) * arctan(z / z_R)``."""
    order = 2 * int(params.p) + abs(int(params.l)) + 1
    return order * math.atan(params.z / params.rayleigh_range)


def lg_radial(params: LGModeParams, r):
    """Radial Laguerre-Gauss profile ``R_pl(r)`` including both phases.

    The Gaussian envelope ``exp(-r^2/w^2)`` is included so the profile is
    square integrable. Accepts a scalar or array ``r >= 0``.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ValueError("r must be nonnegative")
    m = abs(int(params.l))
    w = params.beam_width
    x = 2.0 * r_arr ** 2 / w ** 2
    amp = (params.normalization / w * (math.sqrt(2.0) * r_arr / w) ** m
           * eval_genlaguerre(int(params.p), m, x) * np.exp(-r_arr ** 2 / w ** 2))
    rc = params.curvature_radius
    curvature = 0.0 if math.isinf(rc) else params.k * r_arr ** 2 / (2.0 * rc)
    out = amp * np.exp(1j * (curvature + gouy_phase(params)))
    return out if out.ndim else complex(out)


def qudit_dimension(p_max: int, l_max: int) -> int:
    """Alphabet size ``2 * [p(p+1)/2] * [l(l+1)/2]``."""
    for name, v in (("p_max", p_max), ("l_max", l_max)):
        if int(v) != v or v < 1:
            raise ValueError(f"{name} must be a positive integer, got {v!r}")
    p, l = int(p_max), int(l_max)
    return p * (p + 1) * l * (l + 1) // 2


def bits_per_photon(p_max: int, l_max: int) -> float:
    return math.log2(qudit_dimension(p_max, l_max))
