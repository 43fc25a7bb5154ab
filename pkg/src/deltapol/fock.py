"""Truncated four-mode bosonic Fock space.

States live on a dense complex tensor indexed by occupation numbers
``(n_a, n_b, n_A, n_C)`` with an exclusive per-mode cutoff, plus optional
total-excitation sector metadata.  Dense storage is deliberate: four modes
with cutoffs up to ~24 stay small, contractions are cache-friendly, and the
sector-restricted enumeration (where exactness matters) lives in the oracle
module instead.

Operations follow standard bosonic conventions: a†|n⟩ = √(n+1)|n+1⟩ per
mode.  Polynomials of creation operators are applied term by term with
vectorized shifted-slice adds; overflowing a cutoff raises
:class:`~deltapol.errors.CutoffOverflow` rather than silently truncating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .core import ModeLabel
from .errors import BadCutoff, CutoffOverflow, ValidationError

__all__ = [
    "TruncatedFockState",
    "CreationPolynomial",
    "vacuum",
    "fock_basis_state",
    "apply_creation_polynomial",
    "reduced_density",
    "entanglement_entropy",
]

#: Reduced-density eigenvalues below this are treated as exact zeros.
EIGENVALUE_FLOOR = 1e-14


@dataclass(frozen=True)
class TruncatedFockState:
    """A pure state of the four bosonic modes on a truncated lattice.

    Attributes
    ----------
    cutoffs : tuple of int
        Exclusive occupation bound per mode, in canonical (a, b, A, C) order;
        ``amplitudes.shape == cutoffs``.
    amplitudes : numpy.ndarray
        Complex tensor; entry ``[n_a, n_b, n_A, n_C]`` is the amplitude of
        that occupation basis state.
    sector : int or None
        Total excitation number when the state lies in a single sector
        (amplitudes are exactly zero outside it by construction); None for
        states spanning several sectors (coherent or cat states).
    """

    cutoffs: tuple[int, int, int, int]
    amplitudes: np.ndarray = field(repr=False)
    sector: int | None = None

    def __post_init__(self) -> None:
        if len(self.cutoffs) != 4 or any(int(c) < 1 for c in self.cutoffs):
            raise BadCutoff(f"cutoffs must be four integers >= 1, got {self.cutoffs!r}")
        object.__setattr__(self, "cutoffs", tuple(int(c) for c in self.cutoffs))
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != self.cutoffs:
            raise ValidationError(
                f"amplitude tensor shape {amps.shape} does not match cutoffs {self.cutoffs}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        """Two-norm of the amplitude tensor."""
        return float(np.linalg.norm(self.amplitudes.ravel()))

    def normalized(self) -> "TruncatedFockState":
        """Return the unit-norm copy of this state."""
        n = self.norm()
        if n == 0.0:
            raise ValidationError("cannot normalize the zero state")
        return replace(self, amplitudes=self.amplitudes / n)

    def overlap(self, other: "TruncatedFockState") -> complex:
        """⟨self|other⟩ (states must share cutoffs)."""
        if self.cutoffs != other.cutoffs:
            raise ValidationError("overlap requires matching cutoffs")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "TruncatedFockState") -> float:
        """|⟨self|other⟩| — global-phase-insensitive overlap magnitude."""
        return abs(self.overlap(other))

    def number_expectations(self) -> np.ndarray:
        """⟨n_x⟩ for each of the four modes, as a real 4-vector."""
        p = np.abs(self.amplitudes) ** 2
        out = np.empty(4)
        for axis in range(4):
            occ = np.arange(self.cutoffs[axis])
            out[axis] = float(np.tensordot(p.sum(axis=tuple(i for i in range(4) if i != axis)), occ, 1))
        return out


@dataclass(frozen=True)
class CreationPolynomial:
    """A polynomial in the four creation operators (a†, b†, A†, C†).

    ``terms`` is a sequence of ``(coefficient, powers)`` monomials, where
    ``powers`` gives the exponent of each mode's creation operator in
    canonical order.  The empty sequence is the zero polynomial.
    """

    terms: tuple[tuple[complex, tuple[int, int, int, int]], ...]

    def __post_init__(self) -> None:
        cleaned = []
        for coeff, powers in self.terms:
            if len(powers) != 4 or any(int(p) < 0 for p in powers):
                raise ValidationError(f"monomial powers must be four ints >= 0, got {powers!r}")
            cleaned.append((complex(coeff), tuple(int(p) for p in powers)))
        object.__setattr__(self, "terms", tuple(cleaned))

    @classmethod
    def linear(cls, coeffs: Sequence[complex]) -> "CreationPolynomial":
        """Degree-1 polynomial Σ_x coeffs[x] · x† over the canonical modes."""
        if len(coeffs) != 4:
            raise ValidationError("linear polynomial needs exactly four coefficients")
        powers = np.eye(4, dtype=int)
        return cls(tuple((c, tuple(powers[i])) for i, c in enumerate(coeffs) if c != 0))

    @property
    def degree(self) -> int:
        """Largest total power over the terms (0 for the zero polynomial)."""
        return max((sum(p) for _, p in self.terms), default=0)


def vacuum(cutoffs: Sequence[int]) -> TruncatedFockState:
    """The four-mode vacuum |0,0,0,0⟩ on the given truncation (sector 0)."""
    cutoffs = tuple(int(c) for c in cutoffs)
    if len(cutoffs) != 4 or any(c < 1 for c in cutoffs):
        raise BadCutoff(f"cutoffs must be four integers >= 1, got {cutoffs!r}")
    amps = np.zeros(cutoffs, dtype=complex)
    amps[0, 0, 0, 0] = 1.0
    return TruncatedFockState(cutoffs=cutoffs, amplitudes=amps, sector=0)


def fock_basis_state(cutoffs: Sequence[int], occupation: Sequence[int]) -> TruncatedFockState:
    """The occupation basis state |n_a, n_b, n_A, n_C⟩ on the given truncation."""
    occupation = tuple(int(n) for n in occupation)
    cutoffs = tuple(int(c) for c in cutoffs)
    if any(n < 0 for n in occupation):
        raise ValidationError(f"occupations must be >= 0, got {occupation!r}")
    if any(n >= c for n, c in zip(occupation, cutoffs)):
        raise BadCutoff(f"occupation {occupation!r} needs cutoffs above {cutoffs!r}")
    amps = np.zeros(cutoffs, dtype=complex)
    amps[occupation] = 1.0
    return TruncatedFockState(cutoffs=cutoffs, amplitudes=amps, sector=sum(occupation))


def _apply_single_creation(amps: np.ndarray, axis: int) -> np.ndarray:
    """x† on one mode: out[n+1] += sqrt(n+1) * in[n]; top slot checked by caller."""
    out = np.zeros_like(amps)
    cutoff = amps.shape[axis]
    factors = np.sqrt(np.arange(1, cutoff, dtype=float))
    shape = [1, 1, 1, 1]
    shape[axis] = cutoff - 1
    src = np.moveaxis(np.moveaxis(amps, axis, 0)[: cutoff - 1], 0, axis)
    np.moveaxis(out, axis, 0)[1:] = np.moveaxis(src * factors.reshape(shape), axis, 0)
    return out


def apply_creation_polynomial(
    p: CreationPolynomial, state: TruncatedFockState
) -> TruncatedFockState:
    """Apply a polynomial of creation operators to a state.

    The result is *not* normalized (prefactors such as 1/√(m!·n!) are the
    caller's business, matching the usual wavefunction constructions).  The
    sector advances by the polynomial degree when the input has sector
    metadata and the polynomial is homogeneous; otherwise the result carries
    no sector.

    Raises
    ------
    CutoffOverflow
        If any monomial would move existing amplitude past a mode's cutoff.
        Truncating inside a conserved sector is always a caller sizing bug,
        so it is never done silently.
    """
    degrees = {sum(powers) for coeff, powers in p.terms if coeff != 0}
    out = np.zeros(state.cutoffs, dtype=complex)
    for coeff, powers in p.terms:
        if coeff == 0:
            continue
        term = state.amplitudes
        for axis, power in enumerate(powers):
            for _ in range(power):
                top = np.moveaxis(term, axis, 0)[-1]
                if np.any(top != 0):
                    raise CutoffOverflow(
                        f"monomial {powers!r} exceeds cutoff {state.cutoffs[axis]} on "
                        f"mode {ModeLabel(axis).name}"
                    )
                term = _apply_single_creation(term, axis)
        out += coeff * term
    sector = None
    if state.sector is not None and len(degrees) == 1:
        sector = state.sector + degrees.pop()
    return TruncatedFockState(cutoffs=state.cutoffs, amplitudes=out, sector=sector)


def _split_axes(keep: Iterable[ModeLabel]) -> tuple[list[int], list[int]]:
    kept = sorted({int(m) for m in keep})
    if not kept:
        raise ValidationError("keep must name at least one mode")
    traced = [i for i in range(4) if i not in kept]
    return kept, traced


def _bipartition_matrix(state: TruncatedFockState, keep: Iterable[ModeLabel]) -> np.ndarray:
    """Amplitudes as a (kept, traced) matrix for Schmidt-style contractions."""
    kept, traced = _split_axes(keep)
    tensor = np.transpose(state.amplitudes, kept + traced)
    dim_keep = int(np.prod([state.cutoffs[i] for i in kept], dtype=int))
    return tensor.reshape(dim_keep, -1)


def reduced_density(state: TruncatedFockState, keep: Iterable[ModeLabel]) -> np.ndarray:
    """Reduced density matrix of the kept modes (others traced out).

    The row/column index runs over the kept modes' occupations in canonical
    mode order, row-major.  The input must be normalized; the output is then
    Hermitian, positive semidefinite, and has unit trace.
    """
    X = _bipartition_matrix(state, keep)
    return X @ X.conj().T


def entanglement_entropy(state: TruncatedFockState, keep: Iterable[ModeLabel]) -> float:
    """Von Neumann entropy −Tr(ρ log₂ ρ) of the kept modes, in bits.

    Computed from the singular values of the bipartition matrix (never
    forming ρ), with 0·log₂0 ≡ 0 and eigenvalues below ``EIGENVALUE_FLOOR``
    treated as exact zeros.  The input must be normalized and pure.
    """
    sv = np.linalg.svd(_bipartition_matrix(state, keep), compute_uv=False)
    lam = sv**2
    lam = lam[lam > EIGENVALUE_FLOOR]
    if lam.size == 0:
        return 0.0
    return max(0.0, float(-np.sum(lam * np.log2(lam))))
