"""Reduced model and polariton diagonalization.

The model is a quadratic bosonic Hamiltonian on four modes — two photon
modes ``a``, ``b`` and two collective atomic excitation modes ``A``, ``C`` —

    H = g_N (a A† + A a†) + g_N (b C† + C b†) + Ω e^{iφ} A† C + Ω e^{-iφ} C† A,

so everything reduces to the 4×4 single-particle matrix ``h`` acting on the
operator column (a, b, A, C).  This module provides that matrix, its normal
modes (the polaritons D₁..D₄ with energies ±ε₁, ±ε₃ and mixing angle θ), and
the resulting Heisenberg-picture evolution matrix F(t) = exp(-i h t).

Conventions
-----------
* Canonical basis order is ``(a, b, A, C)`` for every vector and matrix.
* ``F[β, α]`` is the coefficient of mode β at time 0 in mode α's Heisenberg
  evolution; equivalently column α of F lists the creation-operator
  coefficients of the evolved α†(t) = Σ_β F[β, α] β†(0).
* For φ = 0 the matrix F is symmetric, so the row/column distinction only
  matters for φ ≠ 0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateModel, ValidationError

__all__ = [
    "ModeLabel",
    "CouplingConfig",
    "PolaritonBasis",
    "EvolutionMatrix",
    "single_particle_hamiltonian",
    "polariton_basis",
    "evolution_matrix",
    "closed_form_coefficients",
]

_TWO_PI = 2.0 * math.pi


class ModeLabel(enum.IntEnum):
    """The four bosonic modes, in canonical basis order.

    ``a`` and ``b`` are the photon modes; ``A`` and ``C`` are the collective
    atomic excitation modes.  The integer values are the row/column indices
    used by every matrix in the package.
    """

    a = 0
    b = 1
    A = 2
    C = 3


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class CouplingConfig:
    """Parameters of the reduced model.

    Parameters
    ----------
    g_N : float
        Collective coupling of each photon mode to its atomic partner
        (angular-frequency units).  Must be >= 0.
    Omega : float
        Classical drive Rabi frequency.  May be negative; its sign selects
        the polariton branch ordering through the mixing angle.
    phi : float
        Combined drive phase in radians.  Stored reduced to [0, 2π).
    """

    g_N: float
    Omega: float = 0.0
    phi: float = 0.0

    def __post_init__(self) -> None:
        if not (self.g_N >= 0.0):
            raise ValidationError(f"g_N must be >= 0, got {self.g_N}")
        if not (math.isfinite(self.g_N) and math.isfinite(self.Omega) and math.isfinite(self.phi)):
            raise ValidationError("g_N, Omega and phi must all be finite")
        object.__setattr__(self, "phi", self.phi % _TWO_PI)

    @property
    def rabi_norm(self) -> float:
        """sqrt(Omega² + 4 g_N²): the polariton branch splitting ε₁ − ε₃."""
        return math.hypot(self.Omega, 2.0 * self.g_N)


@dataclass(frozen=True)
class PolaritonBasis:
    """Normal modes of the quadratic Hamiltonian.

    Attributes
    ----------
    theta : float
        Mixing angle in [0, π/2]; θ → 0 as Omega → +∞ (D₃, D₄ photon-like)
        and θ → π/2 as Omega → −∞.
    eps : numpy.ndarray
        The four polariton energies (ε₁, ε₂, ε₃, ε₄) with ε₂ = −ε₁ and
        ε₄ = −ε₃ exactly.
    M : numpy.ndarray
        4×4 unitary whose rows express D₁..D₄ in the (a, b, A, C) basis:
        D_i = Σ_x M[i, x]·x, hence D_i† = Σ_x conj(M[i, x])·x†.
    """

    theta: float
    eps: np.ndarray = field(repr=False)
    M: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class EvolutionMatrix:
    """The linear Heisenberg map F(t) = exp(-i h t) on (a, b, A, C)."""

    t: float
    F: np.ndarray = field(repr=False)


def single_particle_hamiltonian(cfg: CouplingConfig) -> np.ndarray:
    """Build the 4×4 single-particle matrix ``h`` of the reduced model.

    Nonzero entries: h[A,a] = h[a,A] = g_N; h[C,b] = h[b,C] = g_N;
    h[A,C] = Omega·e^{iφ} and h[C,A] its conjugate.  The eigenvalues are
    {±ε₁, ±ε₃} with ε₁ = (Omega + R)/2, ε₃ = (Omega − R)/2 and
    R = sqrt(Omega² + 4 g_N²).

    Returns
    -------
    numpy.ndarray
        Hermitian complex matrix in the canonical (a, b, A, C) order.
    """
    h = np.zeros((4, 4), dtype=complex)
    g = cfg.g_N
    drive = cfg.Omega * np.exp(1j * cfg.phi)
    h[ModeLabel.A, ModeLabel.a] = h[ModeLabel.a, ModeLabel.A] = g
    h[ModeLabel.C, ModeLabel.b] = h[ModeLabel.b, ModeLabel.C] = g
    h[ModeLabel.A, ModeLabel.C] = drive
    h[ModeLabel.C, ModeLabel.A] = np.conj(drive)
    return h


def polariton_energies(cfg: CouplingConfig) -> np.ndarray:
    """Return (ε₁, ε₂, ε₃, ε₄) = ((Ω+R)/2, −(Ω+R)/2, (Ω−R)/2, −(Ω−R)/2)."""
    half_sum = 0.5 * cfg.Omega
    half_split = 0.5 * cfg.rabi_norm
    e1 = half_sum + half_split
    e3 = half_sum - half_split
    return np.array([e1, -e1, e3, -e3])


def polariton_basis(cfg: CouplingConfig) -> PolaritonBasis:
    """Diagonalize the reduced model: mixing angle, spectrum, and mode matrix.

    The mixing angle is computed as θ = ½·arccos(Omega / R), which is
    algebraically equal to arctan(2 g_N / (Omega + R)) on [0, π/2] but avoids
    the catastrophic cancellation of Omega + R for Omega ≪ 0.

    Raises
    ------
    DegenerateModel
        If g_N = Omega = 0, where the mixing angle is 0/0.
    """
    if cfg.g_N == 0.0 and cfg.Omega == 0.0:
        raise DegenerateModel("polariton basis undefined for g_N = Omega = 0")
    theta = 0.5 * math.acos(min(1.0, max(-1.0, cfg.Omega / cfg.rabi_norm)))
    s = math.sin(theta)
    c = math.cos(theta)
    e = np.exp(1j * cfg.phi)
    rt = 1.0 / math.sqrt(2.0)
    M = rt * np.array(
        [
            [s, s * e, c, c * e],
            [s, -s * e, -c, c * e],
            [c, c * e, -s, -s * e],
            [c, -c * e, s, -s * e],
        ],
        dtype=complex,
    )
    return PolaritonBasis(theta=theta, eps=_frozen(polariton_energies(cfg)), M=_frozen(M))


def evolution_matrix(cfg: CouplingConfig, t: float) -> EvolutionMatrix:
    """Evolution matrix F(t) = exp(-i h t) via the spectral decomposition.

    Uses F = M† · diag(e^{-i ε_j t}) · M with the polariton basis M, which is
    exact for all φ and t.  For φ = 0 the result agrees with the closed-form
    coefficient list (see :func:`closed_form_coefficients`) to machine
    precision; that agreement is enforced by the test suite.
    """
    if not math.isfinite(t):
        raise ValidationError(f"evolution time must be finite, got {t}")
    basis = polariton_basis(cfg)
    phases = np.exp(-1j * basis.eps * t)
    F = basis.M.conj().T @ (phases[:, None] * basis.M)
    return EvolutionMatrix(t=t, F=_frozen(F))


def closed_form_coefficients(theta: float, phi1: float, phi3: float) -> np.ndarray:
    """Closed-form F for φ = 0 as a function of (θ, φ₁, φ₃).

    The φ = 0 evolution matrix depends on the configuration and time only
    through the mixing angle θ and the accumulated phases φⱼ = εⱼ·t of the
    two positive branches.  This is the corrected coefficient list (the
    index-consistent form); it is symmetric and unitary whenever the
    arguments are realizable, and serves as the regression target for
    :func:`evolution_matrix`.

    Returns
    -------
    numpy.ndarray
        4×4 complex symmetric matrix in (a, b, A, C) order.
    """
    s2 = math.sin(theta) ** 2
    c2 = math.cos(theta) ** 2
    sc = math.sin(theta) * math.cos(theta)
    c1, s1 = math.cos(phi1), math.sin(phi1)
    c3, s3 = math.cos(phi3), math.sin(phi3)

    f_aa = c1 * s2 + c3 * c2
    f_ab = -1j * (s1 * s2 + s3 * c2)
    f_aA = -1j * sc * (s1 - s3)
    f_aC = sc * (c1 - c3)
    f_AA = c1 * c2 + c3 * s2
    f_AC = -1j * (s1 * c2 + s3 * s2)
    return np.array(
        [
            [f_aa, f_ab, f_aA, f_aC],
            [f_ab, f_aa, f_aC, f_aA],
            [f_aA, f_aC, f_AA, f_AC],
            [f_aC, f_aA, f_AC, f_AA],
        ]
    )
