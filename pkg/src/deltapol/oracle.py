"""Independent ground-truth backends.

Four validation devices, deliberately built on different machinery than the
closed-form dynamics they check:

1. **Sector-exact propagation** of the bosonized model: total excitation is
   conserved, so each sector is a small dense block diagonalized once and
   propagated exactly (:func:`expm_propagate`).
2. **Finite-N Dicke simulation** keeping the true collective spin operators
   on the symmetric subspace (:func:`exact_finite_N_propagate`), with the
   matrix elements gated by a full 3^N tensor-product mini-oracle for
   N ≤ 3 (:func:`tensor_mini_oracle`) rather than trusted.
3. **Bosonization error quantification**: trace distance between finite-N and
   bosonized photon dynamics as a function of N (:func:`bosonization_error`).
4. **Full-lattice coherent propagation** via sparse Krylov matrix
   exponentials, for moment checks where states span many sectors
   (:func:`coherent_first_moments`).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache, reduce
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .core import CouplingConfig, ModeLabel, single_particle_hamiltonian
from .errors import CutoffOverflow, SectorMissing, ValidationError
from .fock import TruncatedFockState

__all__ = [
    "SectorBasis",
    "sector_basis",
    "sector_hamiltonian",
    "sector_coupling_parts",
    "expm_propagate",
    "DickeState",
    "dicke_ground",
    "dicke_atomic_states",
    "dicke_atomic_operators",
    "DickeOperators",
    "dicke_operators",
    "tensor_mini_oracle",
    "exact_finite_N_propagate",
    "BosonizationReport",
    "bosonization_error",
    "coherent_first_moments",
]


# ---------------------------------------------------------------------------
# Bosonized model, sector-restricted


@dataclass(frozen=True)
class SectorBasis:
    """Enumeration of all (n_a, n_b, n_A, n_C) with fixed total excitation.

    States are listed in lexicographic order; ``dim == C(s+3, 3)``.
    """

    sector: int
    states: tuple[tuple[int, int, int, int], ...]
    index: Mapping[tuple[int, int, int, int], int] = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.states)


@lru_cache(maxsize=None)
def sector_basis(s: int) -> SectorBasis:
    """The lexicographic basis of the total-excitation-``s`` sector."""
    if s < 0:
        raise ValidationError(f"sector must be >= 0, got {s}")
    states = tuple(
        (na, nb, nA, s - na - nb - nA)
        for na in range(s + 1)
        for nb in range(s + 1 - na)
        for nA in range(s + 1 - na - nb)
    )
    return SectorBasis(sector=s, states=states, index={st: i for i, st in enumerate(states)})


def _sector_quadratic(s: int, h: np.ndarray) -> np.ndarray:
    """Σ_{x,y} h[x,y]·x†y restricted to the excitation-s sector (dense)."""
    basis = sector_basis(s)
    H = np.zeros((basis.dim, basis.dim), dtype=complex)
    for i, occ in enumerate(basis.states):
        for x in range(4):
            for y in range(4):
                hxy = h[x, y]
                if hxy == 0 or occ[y] == 0:
                    continue
                shifted = list(occ)
                shifted[y] -= 1
                amp = math.sqrt(occ[y])
                shifted[x] += 1
                amp *= math.sqrt(shifted[x])
                H[basis.index[tuple(shifted)], i] += hxy * amp
    return H


@lru_cache(maxsize=None)
def sector_coupling_parts(s: int) -> tuple[np.ndarray, np.ndarray]:
    """Unit-coefficient pieces (H_g, H_W) of the sector Hamiltonian.

    ``H = g_N·H_g + Omega·H_W`` for φ = 0, with H_g the photon–atom exchange
    (a A† + b C† + h.c.) and H_W the drive (A† C + h.c.).  Used by the
    time-dependent integrator, which re-scales H_W as Omega(t) changes.
    """
    h_g = np.zeros((4, 4))
    h_g[ModeLabel.a, ModeLabel.A] = h_g[ModeLabel.A, ModeLabel.a] = 1.0
    h_g[ModeLabel.b, ModeLabel.C] = h_g[ModeLabel.C, ModeLabel.b] = 1.0
    h_w = np.zeros((4, 4))
    h_w[ModeLabel.A, ModeLabel.C] = h_w[ModeLabel.C, ModeLabel.A] = 1.0
    Hg = _sector_quadratic(s, h_g).real
    Hw = _sector_quadratic(s, h_w).real
    Hg.setflags(write=False)
    Hw.setflags(write=False)
    return Hg, Hw


@lru_cache(maxsize=None)
def _sector_eig(g: float, omega: float, phi: float, s: int):
    H = _sector_quadratic(s, single_particle_hamiltonian(CouplingConfig(g, omega, phi)))
    energies, vectors = np.linalg.eigh(H)
    return energies, vectors


def sector_hamiltonian(cfg: CouplingConfig, s: int) -> np.ndarray:
    """The bosonized many-body Hamiltonian restricted to sector ``s``."""
    return _sector_quadratic(s, single_particle_hamiltonian(cfg))


def expm_propagate(initial: TruncatedFockState, cfg: CouplingConfig, t: float) -> TruncatedFockState:
    """Exact evolution of a single-sector state via Hermitian eigendecomposition.

    The many-body Hamiltonian restricted to the state's excitation sector is
    diagonalized once (and cached per configuration), so scans over many
    times reuse the decomposition.  Unitary to machine precision.

    Raises
    ------
    SectorMissing
        If the state carries no sector metadata.
    CutoffOverflow
        If the cutoffs cannot represent every basis state of the sector
        (evolution populates them all, so clipping would lose norm).
    """
    if initial.sector is None:
        raise SectorMissing("expm_propagate needs total-excitation sector metadata")
    if min(initial.cutoffs) < initial.sector + 1:
        raise CutoffOverflow(
            f"sector {initial.sector} needs per-mode cutoffs of at least "
            f"{initial.sector + 1}, got {initial.cutoffs}"
        )
    basis = sector_basis(initial.sector)
    energies, vectors = _sector_eig(cfg.g_N, cfg.Omega, cfg.phi, initial.sector)
    psi = np.array([initial.amplitudes[occ] for occ in basis.states])
    psi = vectors @ (np.exp(-1j * energies * t) * (vectors.conj().T @ psi))
    out = np.zeros(initial.cutoffs, dtype=complex)
    for i, occ in enumerate(basis.states):
        out[occ] = psi[i]
    return TruncatedFockState(cutoffs=initial.cutoffs, amplitudes=out, sector=initial.sector)


# ---------------------------------------------------------------------------
# Finite-N collective atoms (Dicke symmetric subspace)


@dataclass(frozen=True)
class DickeState:
    """N atoms (symmetric subspace) plus two truncated photon modes.

    Amplitudes are indexed ``[n_ph_a, n_ph_b, n_a, n_c]`` where (n_a, n_c)
    count atoms excited to levels a and c; entries with n_a + n_c > N are
    structurally zero.
    """

    N: int
    cutoffs: tuple[int, int]
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValidationError(f"atom number must be >= 1, got {self.N}")
        object.__setattr__(self, "cutoffs", (int(self.cutoffs[0]), int(self.cutoffs[1])))
        amps = np.asarray(self.amplitudes, dtype=complex)
        expected = (*self.cutoffs, self.N + 1, self.N + 1)
        if amps.shape != expected:
            raise ValidationError(f"amplitude shape {amps.shape}, expected {expected}")
        na = np.arange(self.N + 1)[:, None]
        nc = np.arange(self.N + 1)[None, :]
        if np.any(amps[:, :, na + nc > self.N] != 0):
            raise ValidationError("amplitudes outside n_a + n_c <= N must vanish")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes.ravel()))

    def normalized(self) -> "DickeState":
        return replace(self, amplitudes=self.amplitudes / self.norm())

    def overlap(self, other: "DickeState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def photon_density(self) -> np.ndarray:
        """Reduced density matrix of the two photon modes (atoms traced out)."""
        X = self.amplitudes.reshape(self.cutoffs[0] * self.cutoffs[1], -1)
        return X @ X.conj().T

    def total_excitation(self) -> float:
        """Expectation of n_ph_a + n_ph_b + n_a + n_c."""
        p = np.abs(self.amplitudes) ** 2
        total = 0.0
        for axis in range(4):
            occ = np.arange(self.amplitudes.shape[axis])
            marg = p.sum(axis=tuple(i for i in range(4) if i != axis))
            total += float(marg @ occ)
        return total


def dicke_ground(N: int, cutoffs: tuple[int, int], photons: tuple[int, int] = (0, 0)) -> DickeState:
    """|m_a, m_b⟩ photons with every atom in the ground level."""
    amps = np.zeros((*cutoffs, N + 1, N + 1), dtype=complex)
    amps[photons[0], photons[1], 0, 0] = 1.0
    return DickeState(N=N, cutoffs=tuple(cutoffs), amplitudes=amps)


@lru_cache(maxsize=None)
def dicke_atomic_states(N: int) -> tuple[tuple[int, int], ...]:
    """Lexicographic (n_a, n_c) pairs with n_a + n_c <= N."""
    return tuple((na, nc) for na in range(N + 1) for nc in range(N + 1 - na))


@lru_cache(maxsize=None)
def dicke_atomic_operators(N: int) -> dict:
    """Collective operators on the atomic symmetric subspace, as dense matrices.

    Matrix elements (the paper-level definitions never write them; they are
    standard symmetric-subspace combinatorics, validated against the full
    tensor mini-oracle for N <= 3):

    * (Σσ_ba)|n_a, n_c⟩ = √(n_a (N − n_a − n_c + 1)) |n_a−1, n_c⟩, A = that/√N
    * (Σσ_bc)|n_a, n_c⟩ = √(n_c (N − n_a − n_c + 1)) |n_a, n_c−1⟩, C = that/√N
    * T⁻|n_a, n_c⟩ = √(n_a (n_c + 1)) |n_a−1, n_c+1⟩,  T⁺ = (T⁻)†
    * T^z diagonal with n_a − n_c
    """
    states = dicke_atomic_states(N)
    idx = {st: i for i, st in enumerate(states)}
    dim = len(states)
    Sba = np.zeros((dim, dim))
    Sbc = np.zeros((dim, dim))
    Tm = np.zeros((dim, dim))
    Tz = np.zeros((dim, dim))
    for i, (na, nc) in enumerate(states):
        Tz[i, i] = na - nc
        if na >= 1:
            Sba[idx[(na - 1, nc)], i] = math.sqrt(na * (N - na - nc + 1))
            Tm[idx[(na - 1, nc + 1)], i] = math.sqrt(na * (nc + 1))
        if nc >= 1:
            Sbc[idx[(na, nc - 1)], i] = math.sqrt(nc * (N - na - nc + 1))
    root_N = math.sqrt(N)
    ops = {
        "Sba": Sba,
        "Sbc": Sbc,
        "A": Sba / root_N,
        "C": Sbc / root_N,
        "Tm": Tm,
        "Tp": Tm.T.copy(),
        "Tz": Tz,
    }
    for mat in ops.values():
        mat.setflags(write=False)
    return ops


@dataclass(frozen=True)
class DickeOperators:
    """Full-space matrices (photon_a ⊗ photon_b ⊗ atoms) of the model operators."""

    N: int
    cutoffs: tuple[int, int]
    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    A: np.ndarray = field(repr=False)
    C: np.ndarray = field(repr=False)
    Tp: np.ndarray = field(repr=False)
    Tm: np.ndarray = field(repr=False)
    Tz: np.ndarray = field(repr=False)


def _ladder(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1.0, cutoff)), 1)


def dicke_operators(N: int, cutoffs: tuple[int, int] = (2, 2)) -> DickeOperators:
    """Matrix representations of a, b, A, C, T⁺, T⁻, T^z on the full space."""
    atomic = dicke_atomic_operators(N)
    dim_at = len(dicke_atomic_states(N))
    ca, cb = int(cutoffs[0]), int(cutoffs[1])
    eye_a, eye_b, eye_at = np.eye(ca), np.eye(cb), np.eye(dim_at)

    def k3(x, y, z):
        return reduce(np.kron, (x, y, z))

    return DickeOperators(
        N=N,
        cutoffs=(ca, cb),
        a=k3(_ladder(ca), eye_b, eye_at),
        b=k3(eye_a, _ladder(cb), eye_at),
        A=k3(eye_a, eye_b, atomic["A"]),
        C=k3(eye_a, eye_b, atomic["C"]),
        Tp=k3(eye_a, eye_b, atomic["Tp"]),
        Tm=k3(eye_a, eye_b, atomic["Tm"]),
        Tz=k3(eye_a, eye_b, atomic["Tz"]),
    )


def tensor_mini_oracle(N: int) -> dict:
    """Full 3^N tensor-product construction of the collective atomic operators.

    Builds every operator from scratch on the unsymmetrized N-atom space
    (levels ordered b, a, c per site) together with the normalized symmetric
    Dicke vectors, and returns the symmetric-subspace projections.  Only
    intended for N <= 3; used to gate the closed-form matrix elements of
    :func:`dicke_atomic_operators`.
    """
    if N > 3:
        raise ValidationError("the tensor mini-oracle is restricted to N <= 3")
    LEVEL_B, LEVEL_A, LEVEL_C = 0, 1, 2

    def site_op(row: int, col: int) -> np.ndarray:
        m = np.zeros((3, 3))
        m[row, col] = 1.0
        return m

    def collective(row: int, col: int) -> np.ndarray:
        total = np.zeros((3**N, 3**N))
        for j in range(N):
            factors = [np.eye(3)] * N
            factors[j] = site_op(row, col)
            total += reduce(np.kron, factors)
        return total

    root_N = math.sqrt(N)
    ops_full = {
        "Sba": collective(LEVEL_B, LEVEL_A),
        "Sbc": collective(LEVEL_B, LEVEL_C),
        "Tm": collective(LEVEL_C, LEVEL_A),
        "Tz": collective(LEVEL_A, LEVEL_A) - collective(LEVEL_C, LEVEL_C),
    }
    ops_full["A"] = ops_full["Sba"] / root_N
    ops_full["C"] = ops_full["Sbc"] / root_N
    ops_full["Tp"] = ops_full["Tm"].T.copy()

    # normalized symmetric vectors |n_a, n_c⟩: equal weight on every word
    # with the given letter counts
    states = dicke_atomic_states(N)
    vectors = np.zeros((3**N, len(states)))
    for word in range(3**N):
        letters = [(word // 3**site) % 3 for site in range(N)]
        occ = (letters.count(LEVEL_A), letters.count(LEVEL_C))
        vectors[word, states.index(occ)] = 1.0
    vectors /= np.linalg.norm(vectors, axis=0)

    projected = {name: vectors.T @ op @ vectors for name, op in ops_full.items()}
    return {"operators": projected, "vectors": vectors, "states": states}


# ---------------------------------------------------------------------------
# Finite-N propagation and the bosonization error


@lru_cache(maxsize=None)
def _finite_sector_states(N: int, cutoffs: tuple[int, int], s: int):
    states = tuple(
        (ma, mb, na, nc)
        for ma in range(min(s, cutoffs[0] - 1) + 1)
        for mb in range(min(s - ma, cutoffs[1] - 1) + 1)
        for na in range(min(s - ma - mb, N) + 1)
        for nc in [s - ma - mb - na]
        if na + nc <= N
    )
    return states, {st: i for i, st in enumerate(states)}


@lru_cache(maxsize=None)
def _finite_sector_eig(N: int, cutoffs: tuple[int, int], s: int, g: float, omega: float, phi: float):
    states, idx = _finite_sector_states(N, cutoffs, s)
    dim = len(states)
    H = np.zeros((dim, dim), dtype=complex)
    drive = omega * np.exp(1j * phi)
    for i, (ma, mb, na, nc) in enumerate(states):
        if ma >= 1 and na + nc < N:  # g·a A† (photon a absorbed into excitation a)
            val = g * math.sqrt(ma) * math.sqrt((na + 1) * (N - na - nc) / N)
            j = idx[(ma - 1, mb, na + 1, nc)]
            H[j, i] += val
            H[i, j] += val
        if mb >= 1 and na + nc < N:  # g·b C†
            val = g * math.sqrt(mb) * math.sqrt((nc + 1) * (N - na - nc) / N)
            j = idx[(ma, mb - 1, na, nc + 1)]
            H[j, i] += val
            H[i, j] += val
        if nc >= 1:  # Ω e^{iφ}·T⁺ (c-excitation promoted to a-excitation)
            val = math.sqrt((na + 1) * nc)
            j = idx[(ma, mb, na + 1, nc - 1)]
            H[j, i] += drive * val
            H[i, j] += np.conj(drive) * val
    energies, vectors = np.linalg.eigh(H)
    return states, idx, energies, vectors


def exact_finite_N_propagate(initial: DickeState, cfg: CouplingConfig, t: float) -> DickeState:
    """Exact unitary evolution under the finite-N Hamiltonian (true spin T⁺).

    Decomposes the state into total-excitation sectors, propagates each via a
    cached sector eigendecomposition, and reassembles.

    Raises
    ------
    CutoffOverflow
        If a populated sector could place more photons in a mode than its
        cutoff admits (the restricted dynamics would be truncated, not exact).
    """
    N, cutoffs = initial.N, initial.cutoffs
    amps = initial.amplitudes
    occupied = np.argwhere(np.abs(amps) > 0)
    sectors = sorted({int(i.sum()) for i in occupied})
    out = np.zeros_like(amps)
    for s in sectors:
        if s >= cutoffs[0] or s >= cutoffs[1]:
            raise CutoffOverflow(
                f"sector {s} needs photon cutoffs of at least {s + 1}, got {cutoffs}"
            )
        states, idx, energies, vectors = _finite_sector_eig(
            N, cutoffs, s, cfg.g_N, cfg.Omega, cfg.phi
        )
        psi = np.array([amps[st] for st in states])
        psi = vectors @ (np.exp(-1j * energies * t) * (vectors.conj().T @ psi))
        for i, st in enumerate(states):
            out[st] += psi[i]
    return DickeState(N=N, cutoffs=cutoffs, amplitudes=out)


def _bosonized_photon_density(s: int, cfg: CouplingConfig, t: float, photon_dim: int) -> np.ndarray:
    basis = sector_basis(s)
    energies, vectors = _sector_eig(cfg.g_N, cfg.Omega, cfg.phi, s)
    psi0 = np.zeros(basis.dim, dtype=complex)
    psi0[basis.index[(s, 0, 0, 0)]] = 1.0
    psi = vectors @ (np.exp(-1j * energies * t) * (vectors.conj().T @ psi0))
    tensor = np.zeros((photon_dim, photon_dim, s + 1, s + 1), dtype=complex)
    for i, occ in enumerate(basis.states):
        tensor[occ] = psi[i]
    X = tensor.reshape(photon_dim * photon_dim, -1)
    return X @ X.conj().T


@dataclass(frozen=True)
class BosonizationReport:
    """Max-over-time photon trace distances and their N-doubling ratios."""

    s: int
    N_values: tuple[int, ...]
    errors: dict
    ratios: dict


def _trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(rho - sigma))))


def bosonization_error(
    N_values: Sequence[int], s: int, cfg: CouplingConfig, t_grid: Sequence[float]
) -> BosonizationReport:
    """Quantify the finite-N deviation from the bosonized model.

    For each requested N, propagates |s, 0⟩_ab ⊗ ground under both the exact
    finite-N Hamiltonian and the bosonized one, and records the maximum over
    ``t_grid`` of the trace distance between the two-photon-mode reduced
    density matrices.  The report includes err(N)/err(2N) for every pair with
    both members requested — the observable O(1/N) scaling.

    The low-excitation condition s <= N/4 is advisory: a violation emits a
    warning (the deliberately-stressed small-N comparisons need to run).
    """
    N_values = tuple(int(N) for N in N_values)
    if s < 0:
        raise ValidationError(f"excitation number must be >= 0, got {s}")
    for N in N_values:
        if s > N / 4:
            warnings.warn(
                f"bosonization comparison outside its regime: s={s} > N/4 for N={N}",
                stacklevel=2,
            )
    photon_dim = s + 1
    cutoffs = (photon_dim, photon_dim)
    errors = {}
    for N in N_values:
        initial = dicke_ground(N, cutoffs, photons=(s, 0))
        worst = 0.0
        for t in t_grid:
            fin = exact_finite_N_propagate(initial, cfg, t)
            rho_fin = fin.photon_density()
            rho_bos = _bosonized_photon_density(s, cfg, t, photon_dim)
            worst = max(worst, _trace_distance(rho_fin, rho_bos))
        errors[N] = worst
    ratios = {}
    for N in N_values:
        if 2 * N in errors:
            num, denom = errors[N], errors[2 * N]
            if denom != 0.0:
                ratios[(N, 2 * N)] = num / denom
            else:
                ratios[(N, 2 * N)] = math.nan if num == 0.0 else math.inf
    return BosonizationReport(s=s, N_values=N_values, errors=errors, ratios=ratios)


# ---------------------------------------------------------------------------
# Full-lattice sparse propagation (coherent-state moment oracle)


@lru_cache(maxsize=None)
def _lattice_ops(cutoff: int):
    ann = sp.diags(np.sqrt(np.arange(1.0, cutoff)), 1, format="csc")
    eye = sp.identity(cutoff, format="csc")

    def embed(op, axis):
        mats = [eye] * 4
        mats[axis] = op
        return reduce(lambda x, y: sp.kron(x, y, format="csc"), mats)

    return tuple(embed(ann, axis) for axis in range(4))


@lru_cache(maxsize=None)
def _lattice_hamiltonian(g: float, omega: float, phi: float, cutoff: int):
    h = single_particle_hamiltonian(CouplingConfig(g, omega, phi))
    ops = _lattice_ops(cutoff)
    H = sp.csc_matrix((cutoff**4, cutoff**4), dtype=complex)
    for x in range(4):
        for y in range(4):
            if h[x, y] != 0:
                H = H + h[x, y] * (ops[x].conj().T @ ops[y])
    return H


def _coherent_vector(alpha: complex, cutoff: int) -> np.ndarray:
    v = np.empty(cutoff, dtype=complex)
    v[0] = math.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, cutoff):
        v[n] = v[n - 1] * alpha / math.sqrt(n)
    return v


def coherent_first_moments(
    amps: Sequence[complex], cfg: CouplingConfig, t: float, cutoff: int = 12
) -> np.ndarray:
    """Oracle ⟨a⟩, ⟨b⟩, ⟨A⟩, ⟨C⟩ from full-lattice truncated propagation.

    Builds the product coherent state with the given displacements on the
    cutoff⁴ occupation lattice, propagates it with a sparse Krylov matrix
    exponential, and measures the four first moments.  Truncation bias is
    governed by the Poisson tails at the cutoff, so keep |amps| modest.
    """
    if len(amps) != 4:
        raise ValidationError("need exactly four coherent displacements")
    psi = reduce(np.kron, (_coherent_vector(complex(a), cutoff) for a in amps))
    H = _lattice_hamiltonian(cfg.g_N, cfg.Omega, cfg.phi, cutoff)
    psi_t = expm_multiply(-1j * t * H, psi)
    ops = _lattice_ops(cutoff)
    return np.array([np.vdot(psi_t, op @ psi_t) for op in ops])
