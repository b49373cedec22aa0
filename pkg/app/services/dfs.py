"""
DFS basis, valid-subspace projector, Pauli orbits and encoded fidelity.

The basis rows are stored in computational order |000>..|111> (qubit 1 most
significant). Valid states carry DFS coordinates k = 2e + g: e is the encoded
bit (|1>,|2> encode 0; |3>,|4> encode 1) and g the gauge bit.

The logical 1 amplitude is embedded with a minus sign (ENCODED_SIGNS). Under
this phase convention the closed-form coefficients of fidelity_coefficients
reproduce the projected fidelity term by term.
"""
import logging
import math
from functools import lru_cache

import numpy as np

from app.config import get_settings
from app.exceptions import NonUnitaryError
from app.models.dfs import DfsBasis, DFSState, OrbitTable, PauliWord, ValidProjector
from app.services.permutations import all_permutations

logger = logging.getLogger(__name__)
settings = get_settings()

_S2 = 1.0 / math.sqrt(2.0)
_S3 = 1.0 / math.sqrt(3.0)
_S6 = 1.0 / math.sqrt(6.0)
_S23 = math.sqrt(2.0 / 3.0)

# rows |1>..|8>, columns |000>..|111>
BASIS = np.array([
    [0, 0, _S2, 0, -_S2, 0, 0, 0],
    [0, 0, 0, _S2, 0, -_S2, 0, 0],
    [0, _S23, -_S6, 0, -_S6, 0, 0, 0],
    [0, 0, 0, _S6, 0, _S6, -_S23, 0],
    [1, 0, 0, 0, 0, 0, 0, 0],
    [0, _S3, _S3, 0, _S3, 0, 0, 0],
    [0, 0, 0, _S3, 0, _S3, _S3, 0],
    [0, 0, 0, 0, 0, 0, 0, 1],
], dtype=float)
BASIS.setflags(write=False)

ENCODED_SIGNS = np.array([1.0, -1.0])


# ---------------------------------------------------------------------------
# Basis and projector
# ---------------------------------------------------------------------------

def dfs_basis() -> DfsBasis:
    return DfsBasis(rows=BASIS.copy())


def projector_valid() -> ValidProjector:
    valid = BASIS[:4]
    return ValidProjector(matrix=valid.T @ valid)


# ---------------------------------------------------------------------------
# Closed-form fidelity coefficients
# ---------------------------------------------------------------------------

def fidelity_coefficients(r: float, phi: float) -> tuple[float, float, float, float]:
    """
    (c0, c1, c2, c3) for the encoded state (r, sqrt(1-r^2) e^{i phi}).

    F = c0 + c1 cos2(th2-th3) + c2 cos2(th3-th1) + c3 cos2(th1-th2)
    for a propagator exp(-i sum_j Z_j th_j).
    """
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"r must lie in [0, 1], got {r}")
    r2 = r * r
    q2 = 1.0 - r2
    cross = 2.0 * r * math.sqrt(3.0 * q2) * math.cos(phi)
    c0 = (3.0 - 2.0 * r2 + 2.0 * r2 * r2 + 2.0 * r2 * q2 * math.cos(2.0 * phi)) / 6.0
    c1 = 2.0 / 9.0 * q2 * (1.0 + 2.0 * r2 + cross)
    c2 = 2.0 / 9.0 * q2 * (1.0 + 2.0 * r2 - cross)
    c3 = (1.0 - 2.0 * r2 + 10.0 * r2 * r2 - 6.0 * r2 * q2 * math.cos(2.0 * phi)) / 18.0
    return c0, c1, c2, c3


def closed_form_fidelity(state: DFSState, thetas) -> float:
    th1, th2, th3 = thetas
    c0, c1, c2, c3 = fidelity_coefficients(state.r, state.phi)
    return (
        c0
        + c1 * math.cos(2.0 * (th2 - th3))
        + c2 * math.cos(2.0 * (th3 - th1))
        + c3 * math.cos(2.0 * (th1 - th2))
    )


def closed_form_infidelity(state: DFSState, thetas) -> float:
    """1 - F written as 2 sum_j c_j sin^2(...) so small values keep full precision."""
    th1, th2, th3 = thetas
    _, c1, c2, c3 = fidelity_coefficients(state.r, state.phi)
    return 2.0 * (
        c1 * math.sin(th2 - th3) ** 2
        + c2 * math.sin(th3 - th1) ** 2
        + c3 * math.sin(th1 - th2) ** 2
    )


# ---------------------------------------------------------------------------
# Pauli orbits
# ---------------------------------------------------------------------------

@lru_cache(maxsize=1)
def pauli_orbits() -> OrbitTable:
    """Orbits of the 64 Pauli words under the six qubit permutations."""
    perms = all_permutations()
    seen: dict[int, int] = {}
    orbits: list[tuple[int, ...]] = []
    for code in range(64):
        if code in seen:
            continue
        word = PauliWord(code)
        members = tuple(sorted({word.permute(p).code for p in perms}))
        for m in members:
            seen[m] = len(orbits)
        orbits.append(members)
    logger.debug("Pauli words fall into %d permutation orbits", len(orbits))
    return OrbitTable(orbits=tuple(orbits), orbit_of=seen)


# ---------------------------------------------------------------------------
# Encoded states
# ---------------------------------------------------------------------------

def random_dfs_state(rng: np.random.Generator) -> DFSState:
    """Encoded state uniform on the Bloch sphere, Haar-random gauge state."""
    r = math.sqrt(rng.uniform(0.0, 1.0))
    phi = rng.uniform(0.0, 2.0 * math.pi)
    g = rng.normal(size=2) + 1j * rng.normal(size=2)
    g /= np.linalg.norm(g)
    return DFSState(r=r, phi=phi, gauge=(complex(g[0]), complex(g[1])))


def _signed_encoded(state: DFSState) -> np.ndarray:
    return ENCODED_SIGNS * state.encoded


def dfs_coordinates(state: DFSState) -> np.ndarray:
    """8 DFS-basis amplitudes of the initial system state."""
    coords = np.zeros(8, dtype=complex)
    coords[:4] = np.kron(_signed_encoded(state), state.gauge_vector)
    return coords


def initial_system_state(state: DFSState) -> np.ndarray:
    """The initial system state in the computational basis."""
    return BASIS.T @ dfs_coordinates(state)


def check_unitary(U: np.ndarray, tolerance: float | None = None) -> float:
    tol = settings.unitarity_tolerance if tolerance is None else tolerance
    deviation = float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))
    if deviation > tol:
        raise NonUnitaryError(deviation, tol)
    return deviation


def _split(psi: np.ndarray, state: DFSState, bath_dim: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Project a system (x) bath state onto the encoded state, its complement and
    the leaked block. Returns (kept, orthogonal, leaked) amplitude arrays.
    """
    C = BASIS @ np.asarray(psi, dtype=complex).reshape(8, bath_dim)
    valid = C[:4].reshape(2, 2, bath_dim)        # (encoded, gauge, bath)
    v = _signed_encoded(state)
    v_perp = np.array([-np.conj(v[1]), np.conj(v[0])])
    kept = np.einsum("e,egb->gb", v.conj(), valid)
    orthogonal = np.einsum("e,egb->gb", v_perp.conj(), valid)
    return kept, orthogonal, C[4:]


def encoded_fidelity(U: np.ndarray, state: DFSState) -> float:
    """
    F = sum_mu |<mu|<psi_e| Pi U Pi |psi_e>|psi_g>|^2, the gauge traced out.
    """
    U = np.asarray(U, dtype=complex)
    if U.shape != (8, 8):
        raise ValueError(f"expected an 8x8 propagator, got {U.shape}")
    check_unitary(U)
    kept, _, _ = _split(U @ initial_system_state(state), state, 1)
    return float(np.sum(np.abs(kept) ** 2))


def encoded_infidelity(U: np.ndarray, state: DFSState) -> float:
    """1 - F accumulated from the small amplitudes, without cancellation."""
    U = np.asarray(U, dtype=complex)
    check_unitary(U)
    return encoded_infidelity_from_state(U @ initial_system_state(state), state, 1)


def encoded_infidelity_from_state(psi: np.ndarray, state: DFSState, bath_dim: int) -> float:
    """1 - F for an evolved system (x) bath vector (system factor first), bath traced."""
    _, orthogonal, leaked = _split(psi, state, bath_dim)
    return float(np.sum(np.abs(orthogonal) ** 2) + np.sum(np.abs(leaked) ** 2))


def encoded_fidelity_from_state(psi: np.ndarray, state: DFSState, bath_dim: int) -> float:
    kept, _, _ = _split(psi, state, bath_dim)
    return float(np.sum(np.abs(kept) ** 2))


def leakage_probability(U: np.ndarray, state: DFSState) -> float:
    """Weight of the evolved state outside the valid subspace."""
    U = np.asarray(U, dtype=complex)
    check_unitary(U)
    _, _, leaked = _split(U @ initial_system_state(state), state, 1)
    return float(np.sum(np.abs(leaked) ** 2))
