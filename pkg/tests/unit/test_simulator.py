"""
Unit tests for the classical and quantum bath simulators and the exponent fit.
"""
import math

import numpy as np
import pytest

from app.config import get_settings
from app.exceptions import InputError, InsufficientDataError, NonHermitianError
from app.models.bath import ClassicalBathModel, ConstantBath, FunctionBath, SpinBathModel
from app.models.dfs import DFSState
from app.schemas.schemas import BathKindEnum
from app.services import dfs, simulator
from app.services.sequences import a3_sequence, free_evolution, s3_sequence, udd_sequence


class TestAccumulatedPhases:
    def test_constant_bath_is_averaged_by_a3(self):
        # every qubit sees every bath for T/3
        thetas = simulator.accumulated_phases(a3_sequence(1), ConstantBath((1.0, 2.0, 4.0)), 3.0)
        assert thetas == pytest.approx((7.0, 7.0, 7.0))

    def test_zero_bath(self):
        thetas = simulator.accumulated_phases(a3_sequence(2), ConstantBath((0.0, 0.0, 0.0)), 1.0)
        assert thetas == (0.0, 0.0, 0.0)

    def test_linear_bath(self):
        # B1 = t over [0,1/3], [1/3,2/3], [2/3,1] on qubits 1, 2, 3
        bath = FunctionBath((lambda t: t, lambda t: 0.0, lambda t: 0.0))
        thetas = simulator.accumulated_phases(a3_sequence(1), bath, 1.0)
        assert thetas == pytest.approx((1 / 18, 1 / 6, 5 / 18), abs=1e-12)
        assert sum(thetas) == pytest.approx(0.5, abs=1e-12)

    def test_function_bath_tolerance_follows_settings(self, monkeypatch):
        monkeypatch.setattr(get_settings(), "phase_quad_rel_tolerance", 1e-9)
        assert FunctionBath((lambda t: t, lambda t: 0.0, lambda t: 0.0)).rel_tolerance == 1e-9

    def test_free_evolution_infidelity(self):
        # r = 1: 1 - F = sin^2(th1 - th2)
        state = DFSState(r=1.0, phi=0.0)
        bath = ConstantBath((0.3, 0.1, 0.0))
        value = simulator.classical_infidelity_fast(free_evolution(), bath, 1.0, state)
        assert value == pytest.approx(math.sin(0.2) ** 2)


class TestClassicalPaths:
    def test_fast_path_matches_propagator(self):
        rng = np.random.default_rng(21)
        sequences = [free_evolution(), udd_sequence(2), a3_sequence(1), a3_sequence(3), s3_sequence(1)]
        for k in range(100):
            seq = sequences[k % len(sequences)]
            bath = ClassicalBathModel.draw(rng, rms_mhz=100.0, bandwidth_mhz=100.0, modes=5)
            state = dfs.random_dfs_state(rng)
            T = 10 ** rng.uniform(-10, -8)
            fast = simulator.classical_infidelity_fast(seq, bath, T, state)
            slow = simulator.classical_infidelity_unitary(seq, bath, T, state)
            assert fast == pytest.approx(slow, abs=1e-10)

    def test_propagator_is_unitary(self):
        bath = ClassicalBathModel.draw(np.random.default_rng(4), 100.0, 100.0, 10)
        U = simulator.classical_propagator(a3_sequence(2), bath, 1e-8)
        assert np.allclose(U.conj().T @ U, np.eye(8), atol=1e-12)

    def test_bath_integrals_match_quadrature(self):
        bath = ClassicalBathModel.draw(np.random.default_rng(8), 1.0, 1.0, 4)
        t0, t1 = np.array([0.0, 1e-7]), np.array([1e-7, 3e-7])
        reference = FunctionBath(tuple(lambda t, j=j: float(bath.value(j, t)) for j in (1, 2, 3)))
        assert np.allclose(bath.integrals(t0, t1), reference.integrals(t0, t1), rtol=1e-9, atol=1e-12)

    def test_bath_normalisation(self):
        bath = ClassicalBathModel.draw(np.random.default_rng(9), 50.0, 10.0, 6)
        # sum a^2 / 2 = 1 per bath, so the rms is the requested scale
        assert np.sum(bath.amplitudes ** 2, axis=1) / 2 == pytest.approx(np.ones(3))


class TestQuantumBath:
    @pytest.fixture
    def decoupled_model(self):
        return SpinBathModel(
            J=0.0,
            beta=2 * math.pi * 1e4,
            r_system=np.ones((3, 2)),
            r_bath=np.triu(np.ones((6, 6)), k=1),
        )

    def test_no_system_coupling_keeps_fidelity(self, decoupled_model):
        rng = np.random.default_rng(3)
        state = dfs.random_dfs_state(rng)
        bath_state = simulator.random_bath_state(rng)
        F = simulator.quantum_fidelity(a3_sequence(1), decoupled_model, 1e-5, state, bath_state)
        assert F == pytest.approx(1.0, abs=1e-12)

    def test_hamiltonian_is_real_symmetric(self):
        model = SpinBathModel.draw(np.random.default_rng(1), 100.0, 10.0)
        H = model.hamiltonian()
        assert H.shape == (512, 512)
        assert np.allclose(H, H.T)
        # six system-bath couplings and fifteen bath pairs
        assert len(model.couplings()) == 21

    def test_infidelity_grows_with_time(self):
        rng = np.random.default_rng(12)
        model = SpinBathModel.draw(rng, 100.0, 10.0)
        propagator = simulator.EigenPropagator.of(model.hamiltonian())
        state = dfs.random_dfs_state(rng)
        bath_state = simulator.random_bath_state(rng)
        small = simulator.quantum_infidelity(free_evolution(), propagator, 1e-10, state, bath_state)
        large = simulator.quantum_infidelity(free_evolution(), propagator, 1e-9, state, bath_state)
        assert 0.0 <= small < large

    def test_bad_bath_state(self, decoupled_model):
        state = DFSState(r=1.0, phi=0.0)
        with pytest.raises(InputError):
            simulator.quantum_infidelity(free_evolution(), decoupled_model, 1e-6, state, np.ones(64))

    def test_trials_draw_their_own_bath_hamiltonian(self):
        first = simulator.trial_spin_bath(5, 0)
        second = simulator.trial_spin_bath(5, 1)
        strengths = lambda model: [c[2] for c in model.couplings()]
        assert strengths(first) != strengths(second)
        assert strengths(simulator.trial_spin_bath(5, 0)) == strengths(first)

    def test_sweep_sequences(self):
        assert simulator.sweep_sequence(BathKindEnum.quantum, 3).n_intervals == 26
        assert simulator.sweep_sequence(BathKindEnum.quantum, 2).n_intervals == 11
        assert simulator.sweep_sequence(BathKindEnum.classical, 2).n_intervals == 5
        with pytest.raises(InputError):
            simulator.sweep_sequence(BathKindEnum.quantum, 4)


class TestExponentials:
    def test_hermitian_exp(self):
        H = np.diag([1.0, -2.0])
        assert np.allclose(simulator.hermitian_exp(H, 0.5), np.diag(np.exp([-0.5j, 1.0j])))

    def test_non_hermitian(self):
        with pytest.raises(NonHermitianError):
            simulator.hermitian_exp(np.array([[0.0, 1.0], [0.0, 0.0]]), 1.0)

    def test_eigen_propagator_matches(self):
        rng = np.random.default_rng(6)
        A = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        H = A + A.conj().T
        prop = simulator.EigenPropagator.of(H)
        psi = rng.normal(size=6) + 0j
        assert np.allclose(prop.evolve(psi, 0.3), simulator.hermitian_exp(H, 0.3) @ psi)
        assert np.allclose(prop.unitary(0.3), simulator.hermitian_exp(H, 0.3))


class TestFitExponent:
    def test_exact_power_law(self):
        T = np.logspace(-3, -1, 10)
        fit = simulator.fit_exponent(T, 3.0 * T ** 4, window=(1e-20, 1.0))
        assert fit.exponent == pytest.approx(4.0, abs=1e-9)
        assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-8)
        assert fit.r2 == pytest.approx(1.0)
        assert fit.points == 10

    def test_window_selects_points(self):
        T = np.logspace(-3, 0, 7)
        y = T ** 2
        fit = simulator.fit_exponent(T, y, window=(5e-6, 0.5))
        # y = 1e-6, 1e-5, ..., 1; only 1e-5 .. 1e-1 fall inside
        assert fit.points == 5

    def test_too_few_points(self):
        T = np.logspace(-3, -1, 5)
        with pytest.raises(InsufficientDataError):
            simulator.fit_exponent(T, T ** 2, window=(1e-3, 1e-2))

    def test_zero_infidelities_are_skipped(self):
        T = np.array([1.0, 2.0, 3.0, 4.0])
        with pytest.raises(InsufficientDataError) as exc:
            simulator.fit_exponent(T, np.zeros(4))
        assert exc.value.points == 0


class TestSweep:
    def test_seeded_sweeps_repeat(self):
        kwargs = dict(trials=2, seed=7, states=3, n_jobs=1)
        a = simulator.sweep_infidelity(BathKindEnum.classical, [0, 1], [1e-3, 1e-2], **kwargs)
        b = simulator.sweep_infidelity(BathKindEnum.classical, [0, 1], [1e-3, 1e-2], **kwargs)
        assert np.array_equal(a.mean, b.mean)
        assert np.array_equal(a.stderr, b.stderr)

    def test_frame_and_summaries(self):
        result = simulator.sweep_infidelity(BathKindEnum.classical, [1], [1e-3, 2e-3], trials=1, seed=1, states=2)
        frame = result.to_frame()
        assert list(frame.columns) == ["kind", "order", "T_us", "trials", "mean_infidelity", "stderr"]
        assert len(frame) == 2
        assert (frame["stderr"] == 0.0).all()
        # two points can never support a fit
        assert result.empty_windows == [1]
        assert result.fit_summaries()[0].window_empty

    def test_invalid_grid(self):
        with pytest.raises(InputError):
            simulator.sweep_infidelity(BathKindEnum.classical, [0], [1e-2, 1e-3], trials=1)
        with pytest.raises(InputError):
            simulator.T_grid(0.0, 1.0, 3)

    def test_quantum_sweep_draws_one_hamiltonian_per_trial(self, mocker):
        spy = mocker.spy(SpinBathModel, "draw")
        result = simulator.sweep_infidelity(BathKindEnum.quantum, [0, 1], [1e-4, 1e-3], trials=2, seed=3, n_jobs=1)
        # drawn once per trial and reused across orders
        assert spy.call_count == 2
        assert result.mean.shape == (2, 2)
        assert np.all(np.isfinite(result.mean))

    def test_zero_overrides_are_not_replaced_by_settings(self):
        result = simulator.sweep_infidelity(
            BathKindEnum.classical, [0], [1e-3, 2e-3, 3e-3], trials=1, seed=1, states=2, rms_mhz=0.0
        )
        assert np.all(result.mean == 0.0)
        assert result.fits[0] is None
