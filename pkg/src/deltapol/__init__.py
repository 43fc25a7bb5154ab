"""deltapol: polariton dynamics for a driven three-level ensemble in two optical modes.

A simulation library and CLI for a cyclic three-level atomic ensemble coupled
to two quantized optical modes and one classical drive: closed-form polariton
dynamics, Fock/coherent/cat-state propagation, entanglement scans, resonance
(revival/swap) times, adiabatic photon storage and retrieval, and independent
brute-force oracles (sector-exact matrix exponentials, finite-N Dicke
simulation, full tensor-product mini-oracle).
"""

from .adiabatic import (
    PassageResult,
    Schedule,
    adiabatic_evolve,
    constant_schedule,
    decomposition_coefficients,
    dynamic_phase,
    exact_timeordered_evolve,
    inverse_decomposition_coefficients,
    inverse_passage,
    linear_ramp,
    phase_tuned,
    schedule_from_obj,
    schedule_from_samples,
    schedule_to_obj,
    tanh_ramp,
)
from .core import (
    CouplingConfig,
    EvolutionMatrix,
    ModeLabel,
    PolaritonBasis,
    closed_form_coefficients,
    evolution_matrix,
    polariton_basis,
    polariton_energies,
    single_particle_hamiltonian,
)
from .errors import (
    BadCutoff,
    CutoffOverflow,
    DegenerateModel,
    DeltapolError,
    IntegratorFailure,
    IrrationalRatio,
    NotPhotonOnly,
    NumericsError,
    QuadratureFailure,
    SectorMissing,
    ValidationError,
)
from .dynamics import (
    ArithmeticSequence,
    CatBranches,
    CatState,
    CoherentAmplitudes,
    ResonanceTimes,
    entanglement_scan,
    evolve_cat,
    evolve_coherent,
    evolve_fock,
    photon_limit_state,
    photon_only_condition,
    resonance_times,
)
from .fock import (
    CreationPolynomial,
    TruncatedFockState,
    apply_creation_polynomial,
    entanglement_entropy,
    fock_basis_state,
    reduced_density,
    vacuum,
)
from .oracle import (
    BosonizationReport,
    DickeOperators,
    DickeState,
    SectorBasis,
    bosonization_error,
    coherent_first_moments,
    dicke_atomic_operators,
    dicke_atomic_states,
    dicke_ground,
    dicke_operators,
    exact_finite_N_propagate,
    expm_propagate,
    sector_basis,
    sector_coupling_parts,
    sector_hamiltonian,
    tensor_mini_oracle,
)
from .serialize import (
    dumps_json,
    format_float,
    state_from_obj,
    state_to_obj,
    write_csv_rows,
)
from .cli import build_parser, main, run_scenario

__version__ = "0.1.0"
