"""Schedules, dynamic phase, and adiabatic storage/retrieval passages."""

import math

import numpy as np
import pytest
from scipy.integrate import simpson

from deltapol.adiabatic import (
    CONVERGENCE_TOL,
    PHASE_TUNE_TOL,
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
from deltapol.core import CouplingConfig
from deltapol.errors import (
    CutoffOverflow,
    IntegratorFailure,
    SectorMissing,
    ValidationError,
)
from deltapol.fock import (
    CreationPolynomial,
    TruncatedFockState,
    apply_creation_polynomial,
    fock_basis_state,
    vacuum,
)
from deltapol.oracle import expm_propagate

ROOT2 = math.sqrt(2.0)


def _wrap(x):
    return (x + math.pi) % (2.0 * math.pi) - math.pi


class TestSchedule:
    def test_tanh_defaults(self):
        sch = tanh_ramp(1.0, 200.0)
        assert sch.params["steepness"] == pytest.approx(4.0 / 200.0)
        assert sch.params["omega_max"] == pytest.approx(20.0)
        assert sch.omega_start == pytest.approx(20.0 * math.tanh(2.0))
        assert sch.omega_end == pytest.approx(-20.0 * math.tanh(2.0))
        assert sch.t_start == 0.0
        assert sch.t_end == pytest.approx(200.0)
        assert sch.storage_grade

    def test_tanh_ascending_flips_sign(self):
        sch = tanh_ramp(2.0, 100.0, ascending=True)
        assert sch.omega_start < 0 < sch.omega_end
        assert sch.omega_end == pytest.approx(40.0 * math.tanh(2.0))

    def test_weak_drive_is_not_storage_grade(self):
        assert not tanh_ramp(1.0, 50.0, omega_max=5.0).storage_grade

    def test_omega_constant_outside_ramp(self):
        sch = tanh_ramp(1.0, 80.0)
        assert sch.omega(-3.0) == pytest.approx(sch.omega_start)
        assert sch.omega(500.0) == pytest.approx(sch.omega_end)

    def test_hold_extends_the_window(self):
        sch = tanh_ramp(1.0, 80.0).with_hold(7.0)
        assert sch.ramp_end == pytest.approx(80.0)
        assert sch.t_end == pytest.approx(87.0)
        assert sch.omega(85.0) == pytest.approx(sch.omega_end)

    def test_constant_and_linear(self):
        flat = constant_schedule(1.0, 3.0, 10.0)
        assert flat.omega(4.2) == pytest.approx(3.0)
        ramp = linear_ramp(1.0, 10.0, -2.0, 6.0)
        assert ramp.omega(5.0) == pytest.approx(2.0)
        assert ramp.omega(np.array([0.0, 10.0])) == pytest.approx([-2.0, 6.0])

    def test_sampled_interpolation_modes(self):
        pts = [[0.0, 0.0], [1.0, 1.0], [2.0, 0.0]]
        lin = schedule_from_samples(1.0, pts, interpolation="linear")
        assert lin.omega(0.5) == pytest.approx(0.5)
        cub = schedule_from_samples(1.0, pts, interpolation="monotone-cubic")
        assert cub.omega(1.0) == pytest.approx(1.0)
        assert abs(cub.omega(0.5)) <= 1.0  # shape preserving, no overshoot

    def test_validation(self):
        with pytest.raises(ValidationError):
            Schedule(g_N=0.0, family="linear", samples=np.array([[0.0, 1.0], [1.0, 1.0]]))
        with pytest.raises(ValidationError):
            schedule_from_samples(1.0, [[0.0, 1.0]])
        with pytest.raises(ValidationError):
            schedule_from_samples(1.0, [[1.0, 1.0], [0.0, 2.0]])
        with pytest.raises(ValidationError):
            schedule_from_samples(1.0, [[0.0, 1.0], [0.0, 2.0]])
        with pytest.raises(ValidationError):
            schedule_from_samples(1.0, [[0.0, 1.0], [1.0, math.nan]])
        with pytest.raises(ValidationError):
            schedule_from_samples(1.0, [[0.0, 1.0], [1.0, 2.0]], interpolation="spline")
        with pytest.raises(ValidationError):
            Schedule(g_N=1.0, family="cosine", samples=np.array([[0.0, 1.0], [1.0, 1.0]]))
        with pytest.raises(ValidationError):
            tanh_ramp(1.0, 50.0).with_hold(-1.0)


class TestScheduleJson:
    def test_tanh_round_trip(self):
        sch = phase_tuned(tanh_ramp(1.5, 120.0, omega_max=18.0))
        obj = schedule_to_obj(sch)
        assert obj["family"] == "tanh"
        assert obj["hold_tail"] is True
        back = schedule_from_obj(obj)
        ts = np.linspace(0.0, 120.0, 97)
        np.testing.assert_allclose(back.omega(ts), sch.omega(ts), atol=0.0)
        assert back.hold == sch.hold
        assert back.g_N == sch.g_N

    def test_samples_round_trip(self):
        sch = schedule_from_samples(2.0, [[0.0, 1.0], [1.0, 0.25], [3.0, -1.0]])
        obj = schedule_to_obj(sch)
        assert obj["hold_tail"] is False
        assert "hold" not in obj
        back = schedule_from_obj(obj)
        np.testing.assert_allclose(back.samples, sch.samples)
        assert back.interpolation == "monotone-cubic"

    def test_linear_round_trip(self):
        sch = linear_ramp(1.0, 10.0, -4.0, 4.0, t_start=2.0).with_hold(1.5)
        back = schedule_from_obj(schedule_to_obj(sch))
        assert back.omega(7.0) == pytest.approx(sch.omega(7.0))
        assert back.hold == pytest.approx(1.5)
        assert back.t_start == pytest.approx(2.0)

    def test_malformed_objects_rejected(self):
        with pytest.raises(ValidationError):
            schedule_from_obj({"family": "tanh"})
        with pytest.raises(ValidationError):
            schedule_from_obj({"g_N": 1.0, "family": "fourier"})
        with pytest.raises(ValidationError):
            schedule_from_obj({"g_N": 1.0, "family": "tanh", "duration": 10.0})
        with pytest.raises(ValidationError):
            schedule_from_obj({"g_N": 1.0, "family": "samples", "samples": [[0, 1]]})
        with pytest.raises(ValidationError):
            schedule_from_obj([1, 2, 3])


def _theta0_string(d3_count, total, cutoffs):
    """(D3†)^{d3_count} (D4†)^{total−d3_count} |0⟩ in the photon-limit basis."""
    d3 = CreationPolynomial.linear(np.array([1.0, 1.0, 0.0, 0.0]) / ROOT2)
    d4 = CreationPolynomial.linear(np.array([1.0, -1.0, 0.0, 0.0]) / ROOT2)
    state = vacuum(cutoffs)
    for _ in range(d3_count):
        state = apply_creation_polynomial(d3, state)
    for _ in range(total - d3_count):
        state = apply_creation_polynomial(d4, state)
    return state


def _assemble(coefficients, total, cutoffs):
    amps = np.zeros(cutoffs, dtype=complex)
    for (j, k), weight in coefficients.items():
        amps += weight * _theta0_string(j + k, total, cutoffs).amplitudes
    return amps


class TestDecompositionCoefficients:
    def test_single_photon_examples(self):
        f10 = decomposition_coefficients(1, 0)
        assert f10[(1, 0)] == pytest.approx(1.0 / ROOT2)
        assert f10[(0, 0)] == pytest.approx(1.0 / ROOT2)
        f01 = decomposition_coefficients(0, 1)
        assert f01[(0, 1)] == pytest.approx(1.0 / ROOT2)
        assert f01[(0, 0)] == pytest.approx(-1.0 / ROOT2)

    def test_pair_example(self):
        f11 = decomposition_coefficients(1, 1)
        assert f11[(1, 1)] == pytest.approx(0.5)
        assert f11[(1, 0)] == pytest.approx(-0.5)
        assert f11[(0, 1)] == pytest.approx(0.5)
        assert f11[(0, 0)] == pytest.approx(-0.5)

    def test_reconstruction_identity(self):
        for m in range(5):
            for n in range(5 - m):
                cutoffs = (m + n + 1,) * 4
                assembled = _assemble(decomposition_coefficients(m, n), m + n, cutoffs)
                expected = np.zeros(cutoffs, dtype=complex)
                expected[m, n, 0, 0] = 1.0
                assert np.max(np.abs(assembled - expected)) < 1e-12

    def test_squared_binomial_variant_fails(self):
        # The same reconstruction with C(m,j)²C(n,k)² weights breaks down as
        # soon as a binomial coefficient exceeds 1 — the negative control
        # that the linear-binomial form above is the correct one.
        for m, n in [(2, 0), (2, 1)]:
            scale = 1.0 / math.sqrt(2.0 ** (m + n) * math.factorial(m) * math.factorial(n))
            wrong = {
                (j, k): (-1.0) ** (n - k) * math.comb(m, j) ** 2 * math.comb(n, k) ** 2 * scale
                for j in range(m + 1)
                for k in range(n + 1)
            }
            cutoffs = (m + n + 1,) * 4
            assembled = _assemble(wrong, m + n, cutoffs)
            expected = np.zeros(cutoffs, dtype=complex)
            expected[m, n, 0, 0] = 1.0
            assert np.max(np.abs(assembled - expected)) > 1e-6

    def test_inverse_single_excitation(self):
        c10 = inverse_decomposition_coefficients(1, 0)
        assert c10[(1, 0)] == pytest.approx(-1.0 / ROOT2)
        assert c10[(0, 0)] == pytest.approx(1.0 / ROOT2)
        c01 = inverse_decomposition_coefficients(0, 1)
        assert c01[(0, 1)] == pytest.approx(-1.0 / ROOT2)
        assert c01[(0, 0)] == pytest.approx(-1.0 / ROOT2)

    def test_inverse_reconstruction_at_atomic_end(self):
        # At θ = π/2, D3† = −(A†+C†)/√2 and D4† = (A†−C†)/√2; assembling the
        # strings with the inverse coefficients must give |n_A, n_C⟩ exactly.
        d3 = CreationPolynomial.linear(np.array([0.0, 0.0, -1.0, -1.0]) / ROOT2)
        d4 = CreationPolynomial.linear(np.array([0.0, 0.0, 1.0, -1.0]) / ROOT2)
        for n_A in range(3):
            for n_C in range(3 - n_A):
                total = n_A + n_C
                cutoffs = (total + 1,) * 4
                amps = np.zeros(cutoffs, dtype=complex)
                for (j, k), w in inverse_decomposition_coefficients(n_A, n_C).items():
                    state = vacuum(cutoffs)
                    for _ in range(j + k):
                        state = apply_creation_polynomial(d3, state)
                    for _ in range(total - j - k):
                        state = apply_creation_polynomial(d4, state)
                    amps += w * state.amplitudes
                expected = np.zeros(cutoffs, dtype=complex)
                expected[0, 0, n_A, n_C] = 1.0
                assert np.max(np.abs(amps - expected)) < 1e-12

    def test_negative_arguments_rejected(self):
        with pytest.raises(ValidationError):
            decomposition_coefficients(-1, 0)
        with pytest.raises(ValidationError):
            inverse_decomposition_coefficients(0, -2)


class TestDynamicPhase:
    def test_undriven_hold_accumulates_minus_t(self):
        # At Omega = 0, ε₃ = −g, so a flat window of length T gives −g·T.
        assert dynamic_phase(constant_schedule(1.0, 0.0, 7.5)) == pytest.approx(-7.5, abs=1e-9)
        assert dynamic_phase(constant_schedule(2.0, 0.0, 3.0)) == pytest.approx(-6.0, abs=1e-9)

    def test_antisymmetric_sweep_is_half_rabi_area(self):
        # For Omega antisymmetric about mid-sweep, ∫Omega dt = 0 and the
        # phase reduces to −(1/2)∫ sqrt(Omega² + 4g²) dt.
        sch = tanh_ramp(1.3, 60.0)
        ts = np.linspace(0.0, 60.0, 1 << 15 | 1)
        rabi_area = simpson(np.hypot(sch.omega(ts), 2.0 * 1.3), x=ts)
        assert dynamic_phase(sch) == pytest.approx(-0.5 * rabi_area, abs=1e-8)

    def test_self_convergence(self):
        sch = tanh_ramp(1.0, 200.0)
        ts = np.linspace(0.0, 200.0, (1 << 17) + 1)
        reference = simpson(0.5 * (sch.omega(ts) - np.hypot(sch.omega(ts), 2.0)), x=ts)
        assert dynamic_phase(sch) == pytest.approx(reference, abs=2e-9)

    def test_hold_part_is_closed_form(self):
        sch = tanh_ramp(1.0, 50.0)
        base = dynamic_phase(sch)
        rate = 0.5 * (sch.omega_end - math.hypot(sch.omega_end, 2.0))
        assert dynamic_phase(sch.with_hold(4.0)) == pytest.approx(base + 4.0 * rate, abs=1e-9)


class TestPhaseTuned:
    def test_forward_residual_within_contract(self):
        tuned = phase_tuned(tanh_ramp(1.0, 50.0))
        assert tuned.hold >= 0.0
        assert abs(_wrap(dynamic_phase(tuned))) <= PHASE_TUNE_TOL

    def test_offset_target(self):
        tuned = phase_tuned(tanh_ramp(1.0, 50.0), offset=math.pi / 2)
        assert abs(_wrap(dynamic_phase(tuned) - math.pi / 2)) <= PHASE_TUNE_TOL

    def test_retuning_replaces_the_hold(self):
        once = phase_tuned(tanh_ramp(1.0, 80.0))
        twice = phase_tuned(once)
        assert twice.hold == pytest.approx(once.hold, abs=1e-9)

    def test_inverse_sweep_hold_is_longer(self):
        # The retrieval sweep ends at large positive Omega where |ε₃| is
        # small, so winding the phase takes far longer than forward.
        fwd = phase_tuned(tanh_ramp(1.0, 200.0))
        inv = phase_tuned(tanh_ramp(1.0, 200.0, ascending=True))
        assert inv.hold > 10.0 * fwd.hold


class TestExactTimeorderedEvolve:
    def test_constant_schedule_matches_spectral_oracle(self):
        cfg = CouplingConfig(1.3, 0.7, 0.0)
        for occ, duration in [((1, 0, 0, 0), 2.1), ((1, 1, 0, 0), 1.7)]:
            initial = fock_basis_state((4, 4, 4, 4), occ)
            expected = expm_propagate(initial, cfg, duration)
            got = exact_timeordered_evolve(initial, constant_schedule(1.3, 0.7, duration))
            assert np.max(np.abs(got.amplitudes - expected.amplitudes)) < 1e-9

    def test_norm_preserved_across_sweep(self):
        state = fock_basis_state((3, 3, 3, 3), (1, 1, 0, 0))
        out = exact_timeordered_evolve(state, phase_tuned(tanh_ramp(1.0, 50.0)))
        assert abs(out.norm() - 1.0) < 1e-9
        assert out.sector == 2

    def test_sampled_schedule_tracks_analytic_profile(self):
        base = tanh_ramp(1.0, 50.0, sample_count=513)
        resampled = schedule_from_samples(1.0, np.asarray(base.samples)).with_hold(0.5)
        state = fock_basis_state((3, 3, 3, 3), (1, 1, 0, 0))
        a = exact_timeordered_evolve(state, base.with_hold(0.5))
        b = exact_timeordered_evolve(state, resampled)
        assert a.fidelity(b) > 0.9999

    def test_quench_leaves_atoms_dark(self):
        # Dropping the drive suddenly to Omega = −20g leaves a photon almost
        # decoupled: the atomic modes stay empty to O((g/Omega)²).
        evolved = exact_timeordered_evolve(
            fock_basis_state((2, 2, 2, 2), (1, 0, 0, 0)),
            constant_schedule(1.0, -20.0, 5.0),
        )
        occupations = evolved.number_expectations()
        assert occupations[2] + occupations[3] < 0.05

    def test_slow_sweep_transfers_to_atoms(self):
        evolved = exact_timeordered_evolve(
            fock_basis_state((2, 2, 2, 2), (1, 0, 0, 0)),
            phase_tuned(tanh_ramp(1.0, 50.0)),
        )
        occupations = evolved.number_expectations()
        assert occupations[2] + occupations[3] > 0.9

    def test_sector_metadata_required(self):
        bare = TruncatedFockState(
            cutoffs=(2, 2, 2, 2),
            amplitudes=fock_basis_state((2, 2, 2, 2), (1, 0, 0, 0)).amplitudes,
            sector=None,
        )
        with pytest.raises(SectorMissing):
            exact_timeordered_evolve(bare, constant_schedule(1.0, 0.0, 1.0))

    def test_cutoffs_must_hold_the_sector(self):
        state = fock_basis_state((2, 2, 2, 2), (1, 1, 0, 0))
        with pytest.raises(CutoffOverflow):
            exact_timeordered_evolve(state, constant_schedule(1.0, 0.0, 1.0))

    def test_exhausted_step_budget_raises(self):
        state = fock_basis_state((2, 2, 2, 2), (1, 0, 0, 0))
        with pytest.raises(IntegratorFailure):
            exact_timeordered_evolve(state, tanh_ramp(1.0, 50.0), max_steps=128)


FORWARD_200 = None  # computed lazily, shared by the storage tests


def _forward_200():
    global FORWARD_200
    if FORWARD_200 is None:
        FORWARD_200 = adiabatic_evolve(1, 0, phase_tuned(tanh_ramp(1.0, 200.0)))
    return FORWARD_200


class TestAdiabaticEvolve:
    def test_storage_fidelity_at_t200(self):
        result = _forward_200()
        target = fock_basis_state((2, 2, 2, 2), (0, 0, 0, 1))
        amplitude = result.exact_state.overlap(target)
        assert abs(amplitude) > 0.99
        # the (−1)^{m+n} sign: the stored amplitude is real and negative
        assert amplitude.real < -0.99
        assert abs(amplitude.imag) < 5e-3

    def test_prediction_tracks_exact_within_honest_bound(self):
        # The closed-form prediction uses the end-of-sweep basis, whose
        # overlap with the exact propagation is capped near 0.998 at the
        # 20:1 drive ratio — hence 0.995 rather than a tighter figure.
        assert _forward_200().fidelity_vs_exact > 0.995

    @pytest.mark.xfail(
        strict=True,
        reason="prediction/exact fidelity 0.999 is unreachable at a 20:1 "
        "drive ratio; the end-basis mismatch alone caps it near 0.998",
    )
    def test_prediction_tracks_exact_at_published_figure(self):
        assert _forward_200().fidelity_vs_exact > 0.999

    def test_pair_storage(self):
        result = adiabatic_evolve(1, 1, phase_tuned(tanh_ramp(1.0, 200.0)))
        target = fock_basis_state((3, 3, 3, 3), (0, 0, 1, 1))
        amplitude = result.exact_state.overlap(target)
        # (−1)^{m+n} = +1 for the pair: positive real amplitude
        assert amplitude.real > 0.99
        assert result.fidelity_vs_target > 0.99

    def test_longer_sweep_does_not_degrade(self):
        short = _forward_200()
        longer = adiabatic_evolve(1, 0, phase_tuned(tanh_ramp(1.0, 400.0)))
        target = fock_basis_state((2, 2, 2, 2), (0, 0, 0, 1))
        f_short = abs(short.exact_state.overlap(target))
        f_long = abs(longer.exact_state.overlap(target))
        assert f_long >= f_short - 1e-3

    def test_phase_integral_field_matches_dynamic_phase(self):
        schedule = phase_tuned(tanh_ramp(1.0, 50.0))
        result = adiabatic_evolve(1, 0, schedule)
        assert result.dynamic_phase_integral == pytest.approx(
            dynamic_phase(schedule), abs=1e-9
        )
        assert 0.0 <= result.fidelity_vs_target <= 1.0
        assert result.fidelity_vs_exact > 0.95

    def test_mistuned_phase_scrambles_single_photon_storage(self):
        # A quarter-turn offset puts ±i between the polariton strings of a
        # single photon; the naive target overlap collapses.
        base = tanh_ramp(1.0, 100.0)
        target = fock_basis_state((2, 2, 2, 2), (0, 0, 0, 1))
        tuned = adiabatic_evolve(1, 0, phase_tuned(base))
        detuned = adiabatic_evolve(1, 0, phase_tuned(base, offset=math.pi / 2))
        assert abs(tuned.exact_state.overlap(target)) > 0.98
        assert abs(detuned.exact_state.overlap(target)) < 0.2

    def test_mistuned_phase_scrambles_pair_storage(self):
        # For m = n = 1 the string phases go as e^{−i(2(j+k)−2)Θ}; the
        # damaging offset is π/4 (giving ±i between even classes), not π.
        base = tanh_ramp(1.0, 100.0)
        target = fock_basis_state((3, 3, 3, 3), (0, 0, 1, 1))
        tuned = adiabatic_evolve(1, 1, phase_tuned(base))
        detuned = adiabatic_evolve(1, 1, phase_tuned(base, offset=math.pi / 4))
        assert abs(tuned.exact_state.overlap(target)) > 0.98
        assert abs(detuned.exact_state.overlap(target)) < 0.2

    @pytest.mark.xfail(
        strict=True,
        reason="a π offset is inert for m = n = 1: every string phase moves "
        "by a multiple of 2π, so no parity classes flip and the fidelity "
        "barely moves",
    )
    def test_pi_offset_flips_pair_parity_classes(self):
        base = tanh_ramp(1.0, 100.0)
        target = fock_basis_state((3, 3, 3, 3), (0, 0, 1, 1))
        tuned = adiabatic_evolve(1, 1, phase_tuned(base))
        shifted = adiabatic_evolve(1, 1, phase_tuned(base, offset=math.pi))
        drop = abs(tuned.exact_state.overlap(target)) - abs(
            shifted.exact_state.overlap(target)
        )
        assert drop > 0.1

    def test_wrong_direction_rejected(self):
        with pytest.raises(ValidationError):
            adiabatic_evolve(1, 0, tanh_ramp(1.0, 50.0, ascending=True))

    def test_below_grade_schedule_warns(self):
        with pytest.warns(UserWarning):
            adiabatic_evolve(1, 0, phase_tuned(tanh_ramp(1.0, 30.0, omega_max=5.0)))

    def test_negative_photon_numbers_rejected(self):
        with pytest.raises(ValidationError):
            adiabatic_evolve(-1, 0, tanh_ramp(1.0, 50.0))


class TestInversePassage:
    def test_single_excitation_retrieval(self):
        schedule = phase_tuned(tanh_ramp(1.0, 100.0, ascending=True))
        result = inverse_passage(1, 0, schedule)
        # n_A = 1 retrieves into mode b with a (−1)^{n_A+n_C} sign
        target = fock_basis_state((2, 2, 2, 2), (0, 1, 0, 0))
        amplitude = result.exact_state.overlap(target)
        assert amplitude.real < -0.97
        assert result.fidelity_vs_exact > 0.97
        assert result.fidelity_vs_target > 0.99

    def test_crossed_mode_assignment(self):
        schedule = phase_tuned(tanh_ramp(1.0, 100.0, ascending=True))
        result = inverse_passage(0, 1, schedule)
        target = fock_basis_state((2, 2, 2, 2), (1, 0, 0, 0))
        assert abs(result.exact_state.overlap(target)) > 0.97

    def test_wrong_direction_rejected(self):
        with pytest.raises(ValidationError):
            inverse_passage(1, 0, tanh_ramp(1.0, 50.0))


class TestPassageResult:
    def test_fidelities_must_be_probabilities(self):
        state = vacuum((1, 1, 1, 1))
        with pytest.raises(ValidationError):
            PassageResult(
                final_state=state,
                exact_state=state,
                dynamic_phase_integral=0.0,
                fidelity_vs_target=1.2,
                fidelity_vs_exact=0.5,
            )
