"""
Unit tests for the switching-time solver.
"""
import numpy as np
import pytest

from app.exceptions import SequenceValidationError, UnderdeterminedSystemError
from app.services import solver, tables
from app.services.sequences import a3_hamiltonians, s3_hamiltonians, udd_sequence
from app.services.switching import FamilySet, family_values


def _nudged(times, size=1e-7):
    """Stored times moved symmetrically off the solution."""
    t = np.array(times)
    shift = size * np.where(t < 0.5, 1.0, -1.0)
    shift[np.isclose(t, 0.5)] = 0.0
    return (t + shift).tolist()


class TestStructuredSolve:
    def test_a3_order_one(self):
        times = solver.solve_times(a3_hamiltonians(1), 1)
        assert times == pytest.approx([1 / 3, 2 / 3], abs=1e-13)

    def test_a3_order_two(self):
        report = solver.solve_report(a3_hamiltonians(2), 2)
        assert report.times == pytest.approx([1 / 6, 1 / 3, 2 / 3, 5 / 6], abs=1e-13)
        assert report.residual < 1e-13
        assert report.strategy.startswith("newton")

    def test_s3_order_one(self):
        times = solver.solve_times(s3_hamiltonians(1), 1)
        assert times == pytest.approx(tables.s3_table_times(1), abs=1e-12)

    def test_udd_times_need_no_iteration(self):
        # UDD solutions are exact, so Newton stops at the starting point
        seq = udd_sequence(3)
        report = solver.solve_report(seq.hamiltonians, 3)
        assert report.times == pytest.approx(list(seq.times), abs=1e-13)

    def test_order_zero_is_trivial(self):
        report = solver.solve_report([1], 0)
        assert report.times == []
        assert report.strategy == "trivial"


class TestStoredTablesReproduced:
    @pytest.mark.parametrize("n", tables.STORED_ORDERS)
    def test_a3(self, n):
        stored = tables.a3_table_times(n)
        times = solver.solve_times(a3_hamiltonians(n), n, guess=_nudged(stored))
        assert times == pytest.approx(stored, abs=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_s3(self, n):
        stored = tables.s3_table_times(n)
        times = solver.solve_times(s3_hamiltonians(n), n, guess=_nudged(stored))
        assert times == pytest.approx(stored, abs=1e-12)


class TestStoredTablesFromStructuredGuesses:
    @pytest.mark.parametrize("n", range(1, 11))
    def test_a3(self, n):
        times = solver.solve_times(a3_hamiltonians(n), n)
        assert times == pytest.approx(tables.a3_table_times(n), abs=1e-12)

    @pytest.mark.parametrize("n", range(1, 11))
    def test_s3(self, n):
        times = solver.solve_times(s3_hamiltonians(n), n)
        assert times == pytest.approx(tables.s3_table_times(n), abs=1e-12)


class TestSolverErrors:
    def test_wrong_time_count(self):
        with pytest.raises(SequenceValidationError):
            solver.solve_times(a3_hamiltonians(2), 3)

    def test_order_out_of_range(self):
        with pytest.raises(SequenceValidationError):
            solver.solve_times(a3_hamiltonians(1), -1)

    def test_guess_length(self):
        with pytest.raises(SequenceValidationError):
            solver.solve_times(a3_hamiltonians(2), 2, guess=[0.2, 0.8])

    def test_s3_without_normalisation_is_underdetermined(self):
        with pytest.raises(UnderdeterminedSystemError) as exc:
            solver.solve_times(s3_hamiltonians(2), 2, normalize=False)
        assert exc.value.unknowns == 5


class TestHelpers:
    def test_expected_time_count(self):
        assert solver.expected_time_count(FamilySet.a3, 4) == 8
        assert solver.expected_time_count(FamilySet.s3, 2) == 10
        assert solver.expected_time_count(FamilySet.udd, 3) == 3

    def test_periodic_hamiltonians(self):
        assert solver.periodic_hamiltonians(solver.A3_PERIOD, 6) == [1, 2, 3, 2, 1, 2]

    def test_symmetric_layout_round_trip(self):
        layout = solver.SymmetricLayout(5)
        x = np.array([0.1, 0.3])
        assert layout.expand(x).tolist() == pytest.approx([0.1, 0.3, 0.5, 0.7, 0.9])
        assert layout.reduce(layout.expand(x)) == pytest.approx(x)

    def test_a3_guess_brackets_udd(self):
        guess = solver.a3_guess(3)
        udd = tables.udd_switching_times(3)
        assert len(guess) == 6
        for j, t in enumerate(udd):
            assert guess[2 * j] < t < guess[2 * j + 1]

    def test_legendre_residuals_vanish_at_solution(self):
        f = family_values(a3_hamiltonians(2), FamilySet.a3).values
        R = solver.legendre_residuals(f, tables.a3_table_times(2), 2)
        assert np.max(np.abs(R)) < 1e-14
