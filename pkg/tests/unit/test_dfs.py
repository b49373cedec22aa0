"""
Unit tests for the DFS basis, closed-form fidelity, Pauli orbits and permutations.
"""
import math

import numpy as np
import pytest

from app.exceptions import NonUnitaryError, SequenceValidationError
from app.models.dfs import DFSState, PauliWord
from app.services import dfs
from app.services import permutations as perms


def _diagonal_propagator(thetas) -> np.ndarray:
    """exp(-i sum_j Z_j theta_j) on three qubits."""
    z = np.array([[1.0 - 2.0 * ((x >> (3 - j)) & 1) for j in (1, 2, 3)] for x in range(8)])
    return np.diag(np.exp(-1j * (z @ np.asarray(thetas))))


class TestBasis:
    def test_orthonormal(self):
        rows = dfs.dfs_basis().rows
        assert np.allclose(rows @ rows.T, np.eye(8), atol=1e-15)

    def test_projector_rank_four(self):
        P = dfs.projector_valid()
        assert P.rank == 4
        assert np.allclose(P.matrix @ P.matrix, P.matrix, atol=1e-15)

    def test_valid_states_commute_with_permutations(self):
        # total-spin eigenspaces are invariant under every qubit permutation
        P = dfs.projector_valid().matrix
        for pi in perms.all_permutations():
            U = perms.permutation_unitary(pi)
            assert np.allclose(U @ P @ U.T, P, atol=1e-14)


class TestFidelityCoefficients:
    def test_sum_to_one(self):
        for r in np.linspace(0.0, 1.0, 100):
            for phi in np.linspace(0.0, 2 * math.pi, 100):
                assert sum(dfs.fidelity_coefficients(r, phi)) == pytest.approx(1.0, abs=1e-14)

    def test_logical_zero(self):
        # r = 1: F = 1/2 + 1/2 cos 2(th1 - th2)
        state = DFSState(r=1.0, phi=0.0)
        assert dfs.closed_form_fidelity(state, (0.3, 0.0, 0.0)) == pytest.approx(0.5 + 0.5 * math.cos(0.6))

    def test_equal_phases_are_harmless(self):
        state = DFSState(r=0.6, phi=1.1)
        assert dfs.closed_form_infidelity(state, (0.7, 0.7, 0.7)) == pytest.approx(0.0, abs=1e-16)

    def test_rejects_r_outside_unit_interval(self):
        with pytest.raises(ValueError):
            dfs.fidelity_coefficients(1.5, 0.0)

    def test_matches_projected_fidelity(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            state = dfs.random_dfs_state(rng)
            thetas = rng.uniform(-math.pi, math.pi, 3)
            U = _diagonal_propagator(thetas)
            assert dfs.closed_form_fidelity(state, thetas) == pytest.approx(
                dfs.encoded_fidelity(U, state), abs=1e-10
            )
            assert dfs.closed_form_infidelity(state, thetas) == pytest.approx(
                dfs.encoded_infidelity(U, state), abs=1e-10
            )

    def test_collective_phase_does_not_leak(self):
        rng = np.random.default_rng(5)
        state = dfs.random_dfs_state(rng)
        assert dfs.leakage_probability(_diagonal_propagator((0.4, 0.4, 0.4)), state) == pytest.approx(0.0, abs=1e-14)


class TestEncodedFidelity:
    def test_identity(self):
        state = DFSState(r=0.3, phi=0.2, gauge=(0j, 1 + 0j))
        assert dfs.encoded_fidelity(np.eye(8), state) == pytest.approx(1.0, abs=1e-14)

    def test_non_unitary_rejected(self):
        state = DFSState(r=0.3, phi=0.2)
        with pytest.raises(NonUnitaryError):
            dfs.encoded_fidelity(1.01 * np.eye(8), state)

    def test_wrong_shape_rejected(self):
        with pytest.raises(ValueError):
            dfs.encoded_fidelity(np.eye(4), DFSState(r=1.0, phi=0.0))

    def test_unnormalised_gauge_rejected(self):
        with pytest.raises(ValueError):
            DFSState(r=0.5, phi=0.0, gauge=(1 + 0j, 1 + 0j))

    def test_initial_state_is_valid(self):
        state = dfs.random_dfs_state(np.random.default_rng(3))
        psi = dfs.initial_system_state(state)
        P = dfs.projector_valid()
        assert np.linalg.norm(psi) == pytest.approx(1.0)
        assert np.allclose(P @ psi, psi, atol=1e-14)


class TestPauliOrbits:
    def test_twenty_orbits(self):
        table = dfs.pauli_orbits()
        assert len(table) == 20
        assert sum(len(o) for o in table.orbits) == 64

    def test_orbit_of_single_qubit_x(self):
        orbit = dfs.pauli_orbits().orbit(PauliWord.parse("X2"))
        assert {w.label for w in orbit} == {"X1", "X2", "X3"}

    def test_mixed_letters_have_six_members(self):
        orbit = dfs.pauli_orbits().orbit(PauliWord.parse("X1Y2Z3"))
        assert len(orbit) == 6


class TestPauliWord:
    def test_code_layout(self):
        # code = 16*l1 + 4*l2 + l3 with I=0, X=1, Y=2, Z=3
        assert PauliWord.from_letters("XYZ").code == 16 + 8 + 3
        assert PauliWord.parse("Z3").letters == "IIZ"
        assert PauliWord.parse("I").code == 0

    def test_label(self):
        assert PauliWord.from_letters("XIZ").label == "X1Z3"
        assert PauliWord(0).label == "I"
        assert PauliWord.from_letters("IYI").weight == 1

    def test_permute_moves_letters(self):
        assert PauliWord.parse("X1").permute((2, 3, 1)).label == "X2"

    def test_bad_input(self):
        with pytest.raises(ValueError):
            PauliWord(64)
        with pytest.raises(ValueError):
            PauliWord.parse("Q1")


class TestPermutations:
    def test_pulse_names(self):
        assert perms.transition_pulse(1, 2) == "P"
        assert perms.transition_pulse(2, 1) == "Pinv"
        assert perms.transition_pulse(1, 4) == "P12"
        assert perms.closing_pulse(1) == "none"

    def test_disallowed_transition(self):
        # H1 -> H5 needs the 1-3 exchange, which is not an allowed pulse
        with pytest.raises(SequenceValidationError):
            perms.transition_pulse(1, 5)

    def test_unitary_composition(self):
        P = perms.permutation_unitary((3, 1, 2))
        assert np.allclose(perms.pulse_unitary("P23") @ perms.pulse_unitary("P12"), P)

    def test_apply_pulse_matches_unitary(self):
        rng = np.random.default_rng(2)
        psi = rng.normal(size=8) + 1j * rng.normal(size=8)
        for kind in ("P", "Pinv", "P12", "P23"):
            assert np.allclose(perms.apply_pulse(kind, psi), perms.pulse_unitary(kind) @ psi)

    def test_conjugate_label(self):
        # swapping two qubits turns one 3-cycle into the other
        assert perms.conjugate_label(2, (2, 1, 3)) == 3
        assert perms.conjugate_label(1, (3, 2, 1)) == 1

    def test_unknown_label(self):
        with pytest.raises(SequenceValidationError):
            perms.check_label(7)
