"""
Qubit permutations, exchange pulses and Hamiltonian-type frames.

Conventions:
  - A permutation is a 1-based tuple of images: perm[j-1] = pi(j).
  - U(pi) moves qubit j to position pi(j), so U(pi) Z_j U(pi)^dag = Z_pi(j)
    and U(pi) U(rho) = U(pi o rho).
  - Basis index of |x1 x2 ... xN> is sum_j x_j 2^(N-j): qubit 1 is the most
    significant bit and |0> has Z = +1.
  - Hamiltonian type sigma has bath map alpha_sigma (qubit j sees bath alpha(j))
    and frame unitary W_sigma = U(alpha_sigma), so W^dag H_1 W = H_sigma.
"""
from functools import lru_cache
from itertools import permutations as _all_permutations

import numpy as np

from app.exceptions import SequenceValidationError

Permutation = tuple[int, int, int]

IDENTITY: Permutation = (1, 2, 3)

# ---------------------------------------------------------------------------
# Hamiltonian types
# ---------------------------------------------------------------------------

# alpha_j: which bath constituent qubit j sees under H_label
BATH_MAP: dict[int, Permutation] = {
    1: (1, 2, 3),
    2: (3, 1, 2),
    3: (2, 3, 1),
    4: (2, 1, 3),
    5: (3, 2, 1),
    6: (1, 3, 2),
}
EVEN_TYPES = (1, 2, 3)
ODD_TYPES = (4, 5, 6)

# ---------------------------------------------------------------------------
# Pulses
# ---------------------------------------------------------------------------

# P = P23 . P12 ; Pinv = P^-1
PULSE_PERMUTATIONS: dict[str, Permutation] = {
    "none": (1, 2, 3),
    "P": (3, 1, 2),
    "Pinv": (2, 3, 1),
    "P12": (2, 1, 3),
    "P23": (1, 3, 2),
}


def compose(pi: Permutation, rho: Permutation) -> Permutation:
    """pi o rho: apply rho first."""
    return tuple(pi[rho[j] - 1] for j in range(3))  # type: ignore[return-value]


def inverse(pi: Permutation) -> Permutation:
    inv = [0, 0, 0]
    for j, image in enumerate(pi, start=1):
        inv[image - 1] = j
    return tuple(inv)  # type: ignore[return-value]


def is_even(pi: Permutation) -> bool:
    inversions = sum(1 for i in range(3) for j in range(i + 1, 3) if pi[i] > pi[j])
    return inversions % 2 == 0


def all_permutations() -> list[Permutation]:
    return [tuple(p) for p in _all_permutations((1, 2, 3))]  # type: ignore[misc]


def check_label(label: int) -> None:
    if label not in BATH_MAP:
        raise SequenceValidationError(f"unknown Hamiltonian type H{label}; expected 1..6")


def qubit_of_bath(label: int) -> Permutation:
    """q(b): the qubit that couples to bath b under H_label (inverse of the bath map)."""
    check_label(label)
    return inverse(BATH_MAP[label])


def frame_permutation(label: int) -> Permutation:
    check_label(label)
    return BATH_MAP[label]


def pulse_label(pi: Permutation) -> str:
    """Name of the exchange pulse realising permutation pi."""
    for name, perm in PULSE_PERMUTATIONS.items():
        if perm == pi:
            return name
    raise SequenceValidationError(
        f"permutation {pi} is not a single allowed pulse (P, Pinv, P12, P23)"
    )


def transition_pulse(current: int, nxt: int) -> str:
    """Pulse taking the toggling frame of H_current to that of H_next."""
    pi = compose(frame_permutation(nxt), inverse(frame_permutation(current)))
    return pulse_label(pi)


def closing_pulse(last: int) -> str:
    """Final pulse returning the frame of H_last to the laboratory frame."""
    return pulse_label(inverse(frame_permutation(last)))


def conjugate_label(label: int, relabel: Permutation) -> int:
    """Type obtained by renaming qubits and baths together with `relabel`."""
    alpha = BATH_MAP[label]
    image = compose(relabel, compose(alpha, inverse(relabel)))
    for other, perm in BATH_MAP.items():
        if perm == image:
            return other
    raise SequenceValidationError(f"no Hamiltonian type for bath map {image}")


# ---------------------------------------------------------------------------
# Permutation unitaries
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def permutation_source_indices(pi: Permutation, total_qubits: int = 3) -> np.ndarray:
    """
    Index array src with (U(pi) psi)[y] = psi[src[y]], where U(pi) permutes the
    first three of `total_qubits` qubits and leaves the rest untouched.
    """
    dim = 2 ** total_qubits
    x = np.arange(dim)
    bits = [(x >> (total_qubits - j)) & 1 for j in range(1, total_qubits + 1)]
    moved = list(bits)
    for j in range(1, 4):
        moved[pi[j - 1] - 1] = bits[j - 1]
    dest = np.zeros(dim, dtype=np.int64)
    for j, b in enumerate(moved, start=1):
        dest |= b << (total_qubits - j)
    src = np.empty(dim, dtype=np.int64)
    src[dest] = x
    src.setflags(write=False)
    return src


def permutation_unitary(pi: Permutation, total_qubits: int = 3) -> np.ndarray:
    dim = 2 ** total_qubits
    src = permutation_source_indices(pi, total_qubits)
    U = np.zeros((dim, dim))
    U[np.arange(dim), src] = 1.0
    return U


def pulse_unitary(kind: str) -> np.ndarray:
    if kind not in PULSE_PERMUTATIONS:
        raise SequenceValidationError(f"unknown pulse {kind!r}")
    return permutation_unitary(PULSE_PERMUTATIONS[kind])


def apply_pulse(kind: str, state: np.ndarray, total_qubits: int = 3) -> np.ndarray:
    """Apply an exchange pulse to the leading axis of `state` (vector or column batch)."""
    if kind == "none":
        return state
    return state[permutation_source_indices(PULSE_PERMUTATIONS[kind], total_qubits)]
