"""Closed-form time evolution of Fock, coherent, and cat initial states.

Everything here rides on the single-particle propagator F(t) from
:mod:`deltapol.core`: photon-pair Fock states evolve by mapping each creation
operator through F, coherent products stay coherent with F-mapped
displacements, and even/odd cats split into two coherent branches.  The
module also predicts the photon-only times at which the two photon modes
revive or swap, as arithmetic sequences derived from the rational frequency
ratio |Omega|/sqrt(Omega^2 + 4 g_N^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import CouplingConfig, ModeLabel, evolution_matrix, polariton_energies
from .errors import IrrationalRatio, NotPhotonOnly, ValidationError
from .fock import (
    CreationPolynomial,
    TruncatedFockState,
    apply_creation_polynomial,
    entanglement_entropy,
    vacuum,
)

__all__ = [
    "PHOTON_ONLY_TOL",
    "CAT_PHOTON_ONLY_TOL",
    "RATIONAL_TOL",
    "MAX_RATIO_DENOMINATOR",
    "MATERIALIZE_TAIL",
    "CoherentAmplitudes",
    "CatState",
    "CatBranches",
    "ArithmeticSequence",
    "ResonanceTimes",
    "evolve_fock",
    "photon_limit_state",
    "photon_only_condition",
    "resonance_times",
    "entanglement_scan",
    "evolve_coherent",
    "evolve_cat",
]

#: residual below which a time counts as photon-only
PHOTON_ONLY_TOL = 1e-10
#: looser gate used by cat evolution (its branches degrade gracefully)
CAT_PHOTON_ONLY_TOL = 1e-8
#: how close Omega/rabi_norm must be to p/q to accept the rational ratio
RATIONAL_TOL = 1e-12
#: largest denominator considered when recognizing the ratio
MAX_RATIO_DENOMINATOR = 64
#: per-mode Poisson tail mass allowed when materializing coherent branches
MATERIALIZE_TAIL = 1e-12


# ---------------------------------------------------------------------------
# Value types


@dataclass(frozen=True)
class CoherentAmplitudes:
    """Coherent displacements of the four modes (a, b, A, C)."""

    alpha: complex = 0.0
    beta: complex = 0.0
    zeta: complex = 0.0
    eta: complex = 0.0

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "zeta", "eta"):
            value = complex(getattr(self, name))
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise ValidationError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.zeta, self.eta], dtype=complex)

    @classmethod
    def from_vector(cls, vec: Sequence[complex]) -> "CoherentAmplitudes":
        if len(vec) != 4:
            raise ValidationError("need exactly four coherent displacements")
        return cls(*(complex(v) for v in vec))

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))


@dataclass(frozen=True)
class CatState:
    """Even or odd coherent superposition |alpha⟩ ± |−alpha⟩ on one mode."""

    alpha: complex
    parity: str = "even"
    mode: ModeLabel = ModeLabel.a
    #: derived: prefactor making the superposition unit norm
    normalization: float = field(init=False)

    def __post_init__(self) -> None:
        if self.parity not in ("even", "odd"):
            raise ValidationError(f"parity must be 'even' or 'odd', got {self.parity!r}")
        alpha = complex(self.alpha)
        if not (math.isfinite(alpha.real) and math.isfinite(alpha.imag)):
            raise ValidationError(f"cat amplitude must be finite, got {alpha!r}")
        if self.parity == "odd" and alpha == 0:
            raise ValidationError("an odd cat with alpha = 0 is the zero vector")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "mode", ModeLabel(self.mode))
        sign = 1.0 if self.parity == "even" else -1.0
        object.__setattr__(
            self,
            "normalization",
            (2.0 + 2.0 * sign * math.exp(-2.0 * abs(alpha) ** 2)) ** -0.5,
        )

    @property
    def parity_sign(self) -> float:
        return 1.0 if self.parity == "even" else -1.0


@dataclass(frozen=True)
class ArithmeticSequence:
    """t = first + k·period for k = 0, 1, 2, …"""

    first: float
    period: float

    def times(self, count: int) -> np.ndarray:
        return self.first + self.period * np.arange(count)


@dataclass(frozen=True)
class ResonanceTimes:
    """Photon-revival and photon-swap times for a rational frequency ratio.

    ``p/q`` is |Omega|/sqrt(Omega² + 4 g_N²) in lowest terms and
    ``base_period`` is 2π over that square root — the spacing of the
    photon-only times.  Revivals recur with period q·base_period; swaps
    exist only for even q, interleaved halfway between revivals.
    """

    p: int
    q: int
    base_period: float
    revival_times: ArithmeticSequence
    swap_times: ArithmeticSequence | None


# ---------------------------------------------------------------------------
# Fock-state evolution


def evolve_fock(
    cfg: CouplingConfig,
    m: int,
    n: int,
    t: float,
    cutoffs: tuple[int, int, int, int] | None = None,
) -> TruncatedFockState:
    """Evolve |m, n⟩_ab ⊗ vac: each photon creation operator maps through F(t).

    Returns (1/√(m! n!))·[Σ_β F_β^a β†]^m·[Σ_β F_β^b β†]^n |0⟩.  The output
    carries sector m+n and is unit norm by unitarity — no renormalization
    is applied.
    """
    if m < 0 or n < 0:
        raise ValidationError(f"photon numbers must be >= 0, got ({m}, {n})")
    if cutoffs is None:
        cutoffs = (m + n + 1,) * 4
    F = evolution_matrix(cfg, t).F
    state = vacuum(cutoffs)
    for column, power in ((0, m), (1, n)):
        poly = CreationPolynomial.linear(F[:, column])
        for _ in range(power):
            state = apply_creation_polynomial(poly, state)
    amps = state.amplitudes / math.sqrt(math.factorial(m) * math.factorial(n))
    return TruncatedFockState(cutoffs=cutoffs, amplitudes=amps, sector=m + n)


def photon_limit_state(
    m: int,
    n: int,
    phase: float,
    cutoffs: tuple[int, int, int, int] | None = None,
) -> TruncatedFockState:
    """The θ = 0 limit of :func:`evolve_fock`, parametrized by the photon phase.

    When the drive dominates (θ → 0) the photon pair decouples from the
    atoms and evolves as a lossless beam splitter with mixing phase
    ``phase`` (the accumulated lower polariton phase ε₃·t):

        a† ↦ cos(phase)·a† − i·sin(phase)·b†, and b† symmetrically.
    """
    if m < 0 or n < 0:
        raise ValidationError(f"photon numbers must be >= 0, got ({m}, {n})")
    if cutoffs is None:
        cutoffs = (m + n + 1, m + n + 1, 1, 1)
    c, s = math.cos(phase), math.sin(phase)
    state = vacuum(cutoffs)
    for coeffs, power in ((np.array([c, -1j * s, 0, 0]), m), (np.array([-1j * s, c, 0, 0]), n)):
        poly = CreationPolynomial.linear(coeffs)
        for _ in range(power):
            state = apply_creation_polynomial(poly, state)
    amps = state.amplitudes / math.sqrt(math.factorial(m) * math.factorial(n))
    return TruncatedFockState(cutoffs=cutoffs, amplitudes=amps, sector=m + n)


def photon_only_condition(cfg: CouplingConfig, t: float) -> tuple[bool, float]:
    """Whether F(t) maps photons only to photons, and the leakage residual.

    The residual is max(|F_A^a|, |F_C^a|, |F_A^b|, |F_C^b|); the boolean is
    ``residual < PHOTON_ONLY_TOL``.
    """
    F = evolution_matrix(cfg, t).F
    residual = float(np.max(np.abs(F[2:4, 0:2])))
    return residual < PHOTON_ONLY_TOL, residual


# ---------------------------------------------------------------------------
# Revival and swap times


def _ratio_as_fraction(cfg: CouplingConfig) -> Fraction:
    ratio = abs(cfg.Omega) / cfg.rabi_norm
    frac = Fraction(ratio).limit_denominator(MAX_RATIO_DENOMINATOR)
    if abs(ratio - float(frac)) > RATIONAL_TOL:
        raise IrrationalRatio(
            "frequency ratio |Omega|/sqrt(Omega^2+4g_N^2) = "
            f"{ratio!r} is not within {RATIONAL_TOL} of a fraction with "
            f"denominator <= {MAX_RATIO_DENOMINATOR}"
        )
    return frac


def resonance_times(
    cfg: CouplingConfig | None = None,
    *,
    p: int | None = None,
    q: int | None = None,
    g_N: float | None = None,
) -> ResonanceTimes:
    """Predict photon revival and swap times as arithmetic sequences.

    Photon-only times are the multiples of T₀ = 2π/sqrt(Omega² + 4 g_N²).
    At t = s·T₀ the photon block is a beam splitter with mixing phase
    χ = π·s·(p/q + 1); the state revives (up to a global phase) iff
    Omega·t ∈ 2πℤ, i.e. q | s, and the modes swap iff Omega·t is an odd
    multiple of π, which requires q even and s an odd multiple of q/2.

    Call either with a configuration (the ratio must be recognizably
    rational, else :class:`IrrationalRatio`) or with explicit coprime
    integers ``p, q`` plus ``g_N``.
    """
    if cfg is not None:
        if p is not None or q is not None:
            raise ValidationError("pass either a config or explicit (p, q, g_N), not both")
        if cfg.g_N == 0:
            raise ValidationError(
                "g_N = 0 decouples the photon modes; revival structure is undefined"
            )
        frac = _ratio_as_fraction(cfg)
        p, q = frac.numerator, frac.denominator
        base_period = 2.0 * math.pi / cfg.rabi_norm
    else:
        if p is None or q is None or g_N is None:
            raise ValidationError("explicit mode needs p, q, and g_N")
        p, q = int(p), int(q)
        if not (0 <= p < q):
            raise ValidationError(f"need 0 <= p < q, got p={p}, q={q}")
        if math.gcd(p, q) != 1:
            raise ValidationError(f"p/q must be in lowest terms, got {p}/{q}")
        if not (math.isfinite(g_N) and g_N > 0):
            raise ValidationError(f"g_N must be positive, got {g_N}")
        # p/q = Omega/R and R² = Omega² + 4 g_N²  =>  R = 2 g_N q / sqrt(q² − p²)
        base_period = math.pi * math.sqrt(q * q - p * p) / (g_N * q)
    revival = ArithmeticSequence(first=q * base_period, period=q * base_period)
    swap = None
    if q % 2 == 0:
        swap = ArithmeticSequence(first=(q // 2) * base_period, period=q * base_period)
    return ResonanceTimes(
        p=p, q=q, base_period=base_period, revival_times=revival, swap_times=swap
    )


# ---------------------------------------------------------------------------
# Entanglement scans


def entanglement_scan(
    cfg: CouplingConfig,
    m: int,
    n: int,
    t_grid: Sequence[float],
    photon_limit: bool = False,
) -> list[tuple[float, float]]:
    """Entropy of the mode-a reduction of the evolved |m, n⟩_ab, over a grid.

    With ``photon_limit`` the evolution uses the exact θ = 0 beam-splitter
    form with phase ε₃·t (the configuration only sets the ε₃ rate).
    """
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or not np.all(np.isfinite(grid)):
        raise ValidationError("t_grid must be a non-empty finite 1-D sequence")
    if np.any(np.diff(grid) < 0):
        raise ValidationError("t_grid must be ascending")
    eps3 = polariton_energies(cfg)[2]
    out = []
    for t in grid:
        if photon_limit:
            state = photon_limit_state(m, n, eps3 * float(t))
        else:
            state = evolve_fock(cfg, m, n, float(t))
        out.append((float(t), entanglement_entropy(state, keep=(0,))))
    return out


# ---------------------------------------------------------------------------
# Coherent and cat states


def evolve_coherent(
    amps: CoherentAmplitudes,
    cfg: CouplingConfig,
    t: float,
    photon_limit: bool = False,
) -> CoherentAmplitudes:
    """Map coherent displacements through F(t): the state stays a product.

    With ``photon_limit`` the θ = 0 block-diagonal propagator is used: the
    photon pair mixes with phase ε₃·t and the atomic pair with ε₁·t.
    """
    if photon_limit:
        energies = polariton_energies(cfg)
        p1, p3 = energies[0] * t, energies[2] * t
        F = np.zeros((4, 4), dtype=complex)
        F[0, 0] = F[1, 1] = math.cos(p3)
        F[0, 1] = F[1, 0] = -1j * math.sin(p3)
        F[2, 2] = F[3, 3] = math.cos(p1)
        F[2, 3] = F[3, 2] = -1j * math.sin(p1)
    else:
        F = evolution_matrix(cfg, t).F
    return CoherentAmplitudes.from_vector(F @ amps.vector)


@dataclass(frozen=True)
class CatBranches:
    """Two-branch entangled-coherent-state descriptor N·(|branch₊⟩ ± |branch₋⟩).

    ``weights`` already include the normalization and the parity sign, so the
    state is weights[0]·|branches[0]⟩ + weights[1]·|branches[1]⟩ with each
    branch a four-mode coherent product.
    """

    parity: str
    weights: tuple[float, float]
    branches: tuple[CoherentAmplitudes, CoherentAmplitudes]

    def materialize(self, cutoff: int | None = None) -> TruncatedFockState:
        """Expand into a truncated Fock state on the two photon modes.

        ``cutoff`` applies to both photon modes; by default it is chosen so
        each branch's per-mode Poisson tail is below MATERIALIZE_TAIL, then
        doubled for the two-mode products.
        """
        labels = [
            (complex(br.alpha), complex(br.beta)) for br in self.branches
        ]
        for br in self.branches:
            if br.zeta != 0 or br.eta != 0:
                raise ValidationError("cat branches must live on the photon modes only")
        if cutoff is None:
            biggest = max(abs(x) for pair in labels for x in pair)
            cutoff = 2 * _poisson_cutoff(biggest)
        cutoff = int(cutoff)
        if cutoff < 1:
            raise ValidationError(f"cutoff must be >= 1, got {cutoff}")
        amps = np.zeros((cutoff, cutoff, 1, 1), dtype=complex)
        for weight, (la, lb) in zip(self.weights, labels):
            amps[:, :, 0, 0] += weight * np.outer(
                _coherent_amplitudes(la, cutoff), _coherent_amplitudes(lb, cutoff)
            )
        return TruncatedFockState(cutoffs=(cutoff, cutoff, 1, 1), amplitudes=amps, sector=None)

    def gram_entropy(self) -> float:
        """Analytic a|b entanglement entropy from the 2×2 branch Gram matrix.

        With branch labels (±x, ±y) and overlaps w_a = e^{−2|x|²},
        w_b = e^{−2|y|²}, the mode-a reduction has eigenvalues
        N²(1 ± w_a)(1 ± s·w_b), s the parity sign.
        """
        x = abs(self.branches[0].alpha)
        y = abs(self.branches[0].beta)
        sign = 1.0 if self.parity == "even" else -1.0
        w_a = math.exp(-2.0 * x * x)
        w_b = math.exp(-2.0 * y * y)
        nsq = 1.0 / (2.0 + 2.0 * sign * w_a * w_b)
        entropy = 0.0
        for lam in (nsq * (1 + w_a) * (1 + sign * w_b), nsq * (1 - w_a) * (1 - sign * w_b)):
            if lam > 1e-14:
                entropy -= lam * math.log2(lam)
        return entropy


def _poisson_cutoff(label_magnitude: float) -> int:
    """Smallest c with the Poisson(|label|²) tail mass Σ_{n≥c} below the contract."""
    lam = label_magnitude**2
    term = math.exp(-lam)
    cumulative = term
    c = 1
    while 1.0 - cumulative >= MATERIALIZE_TAIL:
        term *= lam / c
        cumulative += term
        c += 1
    return c


def _coherent_amplitudes(label: complex, cutoff: int) -> np.ndarray:
    v = np.empty(cutoff, dtype=complex)
    v[0] = math.exp(-0.5 * abs(label) ** 2)
    for k in range(1, cutoff):
        v[k] = v[k - 1] * label / math.sqrt(k)
    return v


def evolve_cat(
    cat: CatState,
    cfg: CouplingConfig,
    t: float,
    photon_limit: bool = False,
) -> CatBranches:
    """Evolve a mode-a cat at a photon-only time into its two coherent branches.

    At such times F restricts to a photon beam splitter with a common phase
    χ, so the cat becomes N·[|α cosχ, −iα sinχ⟩ ± |−α cosχ, iα sinχ⟩]_ab.
    Outside the photon-only condition the branches would leak into the
    atomic modes and stop being a two-mode entangled coherent state —
    rejected with :class:`NotPhotonOnly`.
    """
    if cat.mode != ModeLabel.a:
        raise ValidationError("cat evolution is defined for a cat on mode a")
    if not photon_limit:
        _, residual = photon_only_condition(cfg, t)
        if residual > CAT_PHOTON_ONLY_TOL:
            raise NotPhotonOnly(
                f"t = {t!r} is not a photon-only time (residual {residual:.3e} "
                f"> {CAT_PHOTON_ONLY_TOL})"
            )
    plus = evolve_coherent(
        CoherentAmplitudes(alpha=cat.alpha), cfg, t, photon_limit=photon_limit
    )
    minus = evolve_coherent(
        CoherentAmplitudes(alpha=-cat.alpha), cfg, t, photon_limit=photon_limit
    )
    norm = cat.normalization
    return CatBranches(
        parity=cat.parity,
        weights=(norm, cat.parity_sign * norm),
        branches=(
            CoherentAmplitudes(alpha=plus.alpha, beta=plus.beta),
            CoherentAmplitudes(alpha=minus.alpha, beta=minus.beta),
        ),
    )
