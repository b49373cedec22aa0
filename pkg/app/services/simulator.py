"""
Evolution of the encoded qubit under pulse sequences.

Classical baths: phases theta_j = int B_alpha_j(s)(s) ds in the toggling frame
(fast path) or the lab-frame 8x8 product of diagonal interval unitaries and
exchange pulses (cross-check). Quantum bath: the 512-dim system (x) six-spin
state evolved under the lab Hamiltonian between pulses on the system qubits.

Units: services take T in seconds; sweeps take the grid in microseconds.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from scipy import linalg, stats

from app.config import get_settings
from app.exceptions import InputError, InsufficientDataError, NonHermitianError
from app.models.bath import ClassicalBathModel, SpinBathModel
from app.models.dfs import DFSState
from app.models.sequence import PulseSequence
from app.models.sweep import FitResult, SweepResult
from app.schemas.schemas import BathKindEnum
from app.services import dfs
from app.services import permutations as perms
from app.services.sequences import a3_sequence, free_evolution, qdd3_sequence, s3_sequence

logger = logging.getLogger(__name__)
settings = get_settings()

US = 1e-6
MODEL_STREAM = 1000            # rng stream for a trial's bath Hamiltonian, shared by every order
_KIND_CODE = {BathKindEnum.classical: 0, BathKindEnum.quantum: 1}

# z_j(x) = +1 for |0>, -1 for |1> on qubit j of a 3-qubit basis index
_Z_SIGNS = np.array([[1.0 - 2.0 * ((x >> (3 - j)) & 1) for j in (1, 2, 3)] for x in range(8)])


# ---------------------------------------------------------------------------
# Matrix exponentials
# ---------------------------------------------------------------------------

def check_hermitian(H: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(H))), 1.0)
    deviation = float(np.max(np.abs(H - H.conj().T)))
    if deviation > 1e-12 * scale:
        raise NonHermitianError(deviation)
    return deviation


def hermitian_exp(H: np.ndarray, t: float) -> np.ndarray:
    """exp(-i H t) by eigendecomposition."""
    check_hermitian(H)
    w, V = linalg.eigh(H)
    return (V * np.exp(-1j * w * t)) @ V.conj().T


@dataclass(frozen=True)
class EigenPropagator:
    """Eigendecomposition of a Hermitian H, reused for every interval length."""
    energies: np.ndarray
    vectors: np.ndarray

    @classmethod
    def of(cls, H: np.ndarray) -> "EigenPropagator":
        check_hermitian(H)
        w, V = linalg.eigh(H)
        return cls(energies=w, vectors=V)

    def evolve(self, psi: np.ndarray, t: float) -> np.ndarray:
        V = self.vectors
        return V @ (np.exp(-1j * self.energies * t) * (V.conj().T @ psi))

    def unitary(self, t: float) -> np.ndarray:
        V = self.vectors
        return (V * np.exp(-1j * self.energies * t)) @ V.conj().T


# ---------------------------------------------------------------------------
# Classical baths
# ---------------------------------------------------------------------------

def _interval_integrals(seq: PulseSequence, bath, T: float) -> np.ndarray:
    """(3, N) lab-frame integrals int B_j over every interval."""
    b = seq.boundaries * T
    return bath.integrals(b[:-1], b[1:])


def accumulated_phases(seq: PulseSequence, bath, T: float) -> tuple[float, float, float]:
    """theta_j(T) = sum_k int_k B_alpha_sigma(k)(j)(s) ds."""
    phi = _interval_integrals(seq, bath, T)
    thetas = np.zeros(3)
    for k, label in enumerate(seq.hamiltonians):
        alpha = perms.BATH_MAP[label]
        for j in range(3):
            thetas[j] += phi[alpha[j] - 1, k]
    return float(thetas[0]), float(thetas[1]), float(thetas[2])


def classical_infidelity_fast(seq: PulseSequence, bath, T: float, state: DFSState) -> float:
    return dfs.closed_form_infidelity(state, accumulated_phases(seq, bath, T))


def classical_fidelity_fast(seq: PulseSequence, bath, T: float, state: DFSState) -> float:
    return dfs.closed_form_fidelity(state, accumulated_phases(seq, bath, T))


def classical_propagator(seq: PulseSequence, bath, T: float) -> np.ndarray:
    """Lab-frame Q_N D_N ... Q_1 D_1 with D_k = exp(-i sum_j Z_j int_k B_j)."""
    phi = _interval_integrals(seq, bath, T)
    U = np.eye(8, dtype=complex)
    for k, pulse in enumerate(seq.pulses):
        D = np.exp(-1j * (_Z_SIGNS @ phi[:, k]))
        U = perms.pulse_unitary(pulse.value) @ (D[:, None] * U)
    return U


def classical_fidelity_unitary(seq: PulseSequence, bath, T: float, state: DFSState) -> float:
    return dfs.encoded_fidelity(classical_propagator(seq, bath, T), state)


def classical_infidelity_unitary(seq: PulseSequence, bath, T: float, state: DFSState) -> float:
    return dfs.encoded_infidelity(classical_propagator(seq, bath, T), state)


# ---------------------------------------------------------------------------
# Quantum bath
# ---------------------------------------------------------------------------

def random_bath_state(rng: np.random.Generator, dim: int = SpinBathModel.BATH_DIM) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def _evolve_quantum(seq: PulseSequence, propagator: EigenPropagator, T: float, psi: np.ndarray) -> np.ndarray:
    for tau, pulse in zip(seq.intervals, seq.pulses):
        psi = propagator.evolve(psi, float(tau) * T)
        psi = perms.apply_pulse(pulse.value, psi, total_qubits=SpinBathModel.N_QUBITS)
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > 1e-12:
        logger.warning("State norm drifted to %.15f during quantum evolution", norm)
    return psi


def _final_state(seq, model, T, state, bath_state) -> np.ndarray:
    propagator = model if isinstance(model, EigenPropagator) else EigenPropagator.of(model.hamiltonian())
    bath_state = np.asarray(bath_state, dtype=complex)
    if bath_state.shape != (SpinBathModel.BATH_DIM,) or abs(np.linalg.norm(bath_state) - 1.0) > 1e-12:
        raise InputError("bath state must be a 64-dim unit vector")
    psi0 = np.kron(dfs.initial_system_state(state), bath_state)
    return _evolve_quantum(seq, propagator, T, psi0)


def quantum_infidelity(
    seq: PulseSequence,
    model: SpinBathModel | EigenPropagator,
    T: float,
    state: DFSState,
    bath_state: np.ndarray,
) -> float:
    """1 - F for the system (x) bath simulation, bath and gauge traced out."""
    psi = _final_state(seq, model, T, state, bath_state)
    return dfs.encoded_infidelity_from_state(psi, state, SpinBathModel.BATH_DIM)


def quantum_fidelity(
    seq: PulseSequence,
    model: SpinBathModel | EigenPropagator,
    T: float,
    state: DFSState,
    bath_state: np.ndarray,
) -> float:
    psi = _final_state(seq, model, T, state, bath_state)
    return dfs.encoded_fidelity_from_state(psi, state, SpinBathModel.BATH_DIM)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def sweep_sequence(kind: BathKindEnum, n: int) -> PulseSequence:
    """Free evolution at n = 0; A3 for classical baths, S3 / third-order table for quantum."""
    if n == 0:
        return free_evolution()
    if kind is BathKindEnum.classical:
        return a3_sequence(n)
    if n in (1, 2):
        return s3_sequence(n)
    if n == 3:
        return qdd3_sequence()
    raise InputError(f"no quantum-bath sequence of order {n}; supported orders are 0..3")


def T_grid(start_us: float, stop_us: float, points: int) -> np.ndarray:
    if not 0 < start_us <= stop_us:
        raise InputError("T grid must be positive and ascending")
    return np.logspace(math.log10(start_us), math.log10(stop_us), points)


def _classical_trial(seq, T_s, rng_key, states, rms_mhz, bandwidth_mhz, modes) -> np.ndarray:
    rng = np.random.default_rng(rng_key)
    bath = ClassicalBathModel.draw(rng, rms_mhz, bandwidth_mhz, modes)
    draws = [dfs.random_dfs_state(rng) for _ in range(states)]
    out = np.zeros(len(T_s))
    for i, T in enumerate(T_s):
        out[i] = np.mean([classical_infidelity_fast(seq, bath, T, s) for s in draws])
    return out


def trial_spin_bath(seed: int, trial: int, J_mhz: float | None = None, beta_khz: float | None = None) -> SpinBathModel:
    """Bath Hamiltonian of one quantum trial, drawn from default_rng([seed, kind, trial, MODEL_STREAM])."""
    return SpinBathModel.draw(
        np.random.default_rng([seed, _KIND_CODE[BathKindEnum.quantum], trial, MODEL_STREAM]),
        settings.spin_bath_j_mhz if J_mhz is None else J_mhz,
        settings.spin_bath_beta_khz if beta_khz is None else beta_khz,
    )


def _trial_propagator(seed, trial, J_mhz, beta_khz) -> EigenPropagator:
    return EigenPropagator.of(trial_spin_bath(seed, trial, J_mhz, beta_khz).hamiltonian())


def _quantum_trial(seq, T_s, rng_key, propagator) -> np.ndarray:
    rng = np.random.default_rng(rng_key)
    state = dfs.random_dfs_state(rng)
    bath_state = random_bath_state(rng)
    return np.array([quantum_infidelity(seq, propagator, T, state, bath_state) for T in T_s])


def sweep_infidelity(
    kind: BathKindEnum,
    orders,
    T_us,
    trials: int,
    seed: int | None = None,
    states: int | None = None,
    window: tuple[float, float] | None = None,
    n_jobs: int | None = None,
    rms_mhz: float | None = None,
    bandwidth_mhz: float | None = None,
    modes: int | None = None,
    J_mhz: float | None = None,
    beta_khz: float | None = None,
) -> SweepResult:
    """
    Mean 1 - F per (order, T) over seeded trials, with a log-log fit per order.

    Trial i of order n draws from default_rng([seed, kind, n, i]); classical
    trials are one bath instance averaged over `states` encoded states, quantum
    trials one encoded state and one Haar-random bath state. Quantum trial i
    also has its own bath Hamiltonian (`trial_spin_bath`), diagonalised once
    and shared by every order so orders are compared on the same draws.
    """
    if trials < 1:
        raise InputError("trials must be at least 1")
    T_us = np.asarray(T_us, dtype=float)
    if np.any(T_us <= 0) or np.any(np.diff(T_us) < 0):
        raise InputError("T grid must be positive and ascending")
    seed = settings.seed if seed is None else seed
    window = (settings.fit_window_min, settings.fit_window_max) if window is None else window
    jobs = settings.n_jobs if n_jobs is None else n_jobs
    states = settings.classical_states if states is None else states
    rms_mhz = settings.bath_rms_mhz if rms_mhz is None else rms_mhz
    bandwidth_mhz = settings.bath_bandwidth_mhz if bandwidth_mhz is None else bandwidth_mhz
    modes = settings.bath_modes if modes is None else modes
    T_s = T_us * US
    code = _KIND_CODE[kind]

    propagators: list[EigenPropagator] = []
    if kind is BathKindEnum.quantum:
        propagators = Parallel(n_jobs=jobs)(
            delayed(_trial_propagator)(seed, t, J_mhz, beta_khz) for t in range(trials)
        )

    orders = [int(n) for n in orders]
    mean = np.zeros((len(orders), len(T_us)))
    stderr = np.zeros_like(mean)
    for i, n in enumerate(orders):
        seq = sweep_sequence(kind, n)
        if kind is BathKindEnum.classical:
            per_trial = Parallel(n_jobs=jobs)(
                delayed(_classical_trial)(
                    seq, T_s, [seed, code, n, t], states, rms_mhz, bandwidth_mhz, modes
                )
                for t in range(trials)
            )
        else:
            per_trial = Parallel(n_jobs=jobs)(
                delayed(_quantum_trial)(seq, T_s, [seed, code, n, t], propagators[t]) for t in range(trials)
            )
        data = np.array(per_trial)
        mean[i] = data.mean(axis=0)
        stderr[i] = data.std(axis=0, ddof=1) / math.sqrt(trials) if trials > 1 else 0.0
        logger.info("Sweep %s order %d: %d trials over %d T values", kind.value, n, trials, len(T_us))

    result = SweepResult(kind=kind, orders=orders, T_us=T_us, trials=trials, mean=mean, stderr=stderr, window=window)
    for i, n in enumerate(orders):
        try:
            fit = fit_exponent(T_us, mean[i], window)
        except InsufficientDataError as exc:
            logger.warning("Order %d: %s; no exponent reported", n, exc)
            fit = None
        else:
            logger.info("Order %d: exponent %.3f (expected %d), r2 %.5f", n, fit.exponent, 2 * (n + 1), fit.r2)
        result.fits[n] = fit
    return result


def fit_exponent(T_values, infidelities, window: tuple[float, float] | None = None) -> FitResult:
    """Least-squares slope of log(1 - F) against log T, using points inside the window."""
    lo, hi = (settings.fit_window_min, settings.fit_window_max) if window is None else window
    T = np.asarray(T_values, dtype=float)
    y = np.asarray(infidelities, dtype=float)
    mask = np.isfinite(y) & (y > 0) & (y >= lo) & (y <= hi)
    points = int(np.count_nonzero(mask))
    if points < 3:
        raise InsufficientDataError(points)
    fit = stats.linregress(np.log(T[mask]), np.log(y[mask]))
    ci95 = float(stats.t.ppf(0.975, points - 2) * fit.stderr)
    return FitResult(
        exponent=float(fit.slope),
        intercept=float(fit.intercept),
        r2=float(fit.rvalue ** 2),
        ci95=ci95,
        points=points,
    )
