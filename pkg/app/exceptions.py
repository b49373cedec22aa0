"""
Domain errors raised by the services layer.

Front ends translate these: the CLI into exit codes, the HTTP layer into 422s.
"""


class DecouplingError(Exception):
    """Root of every error raised by the toolkit."""


class InputError(DecouplingError):
    """Malformed file, argument or request."""


class SequenceValidationError(DecouplingError):
    """A pulse sequence violates one of its structural invariants."""


class NonUnitaryError(DecouplingError):
    def __init__(self, deviation: float, tolerance: float):
        self.deviation = deviation
        self.tolerance = tolerance
        super().__init__(
            f"propagator is not unitary: max|U^dag U - I| = {deviation:.3e} > {tolerance:.1e}"
        )


class NonHermitianError(DecouplingError):
    def __init__(self, deviation: float):
        self.deviation = deviation
        super().__init__(f"Hamiltonian is not Hermitian: max|H - H^dag| = {deviation:.3e}")


class SolverConvergenceError(DecouplingError):
    def __init__(self, residual_norm: float, iterations: int, detail: str = ""):
        self.residual_norm = residual_norm
        self.iterations = iterations
        msg = f"switching-time solver did not converge: max residual {residual_norm:.3e} after {iterations} iterations"
        if detail:
            msg = f"{msg} ({detail})"
        super().__init__(msg)


class UnderdeterminedSystemError(DecouplingError):
    def __init__(self, rank: int, unknowns: int):
        self.rank = rank
        self.unknowns = unknowns
        super().__init__(
            f"constraint system is underdetermined: Jacobian rank {rank} < {unknowns} unknowns"
        )


class ExpansionOrderError(DecouplingError):
    """Requested expansion order exceeds the supported bound."""


class IntegrationError(DecouplingError):
    """Decoherence integral did not converge."""


class InsufficientDataError(DecouplingError):
    def __init__(self, points: int, required: int = 3):
        self.points = points
        self.required = required
        super().__init__(f"only {points} points inside the fit window, need at least {required}")
