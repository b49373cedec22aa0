"""
Value types for the 3-qubit decoherence-free subsystem.
"""
import re
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

LETTERS = "IXYZ"

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class DfsBasis:
    rows: np.ndarray            # (8, 8) real, row k-1 is |k> in computational order

    def vector(self, k: int) -> np.ndarray:
        """|k>, 1-based as in the state labels."""
        return self.rows[k - 1]

    @property
    def valid(self) -> np.ndarray:
        return self.rows[:4]


@dataclass(frozen=True)
class ValidProjector:
    matrix: np.ndarray          # (8, 8)

    def __matmul__(self, other: np.ndarray) -> np.ndarray:
        return self.matrix @ other

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.matrix).real))


@dataclass(frozen=True, order=True)
class PauliWord:
    """Three-qubit Pauli product; code = 16*l1 + 4*l2 + l3 with I=0, X=1, Y=2, Z=3."""
    code: int

    def __post_init__(self):
        if not 0 <= self.code < 64:
            raise ValueError(f"Pauli word code must be in 0..63, got {self.code}")

    @classmethod
    def from_letters(cls, letters: str) -> "PauliWord":
        if len(letters) != 3 or any(ch not in LETTERS for ch in letters):
            raise ValueError(f"expected three letters from IXYZ, got {letters!r}")
        return cls(sum(LETTERS.index(ch) << (2 * (2 - j)) for j, ch in enumerate(letters)))

    @classmethod
    def parse(cls, label: str) -> "PauliWord":
        """'X1Y2' style labels; 'I' (or '') is the identity."""
        letters = ["I", "I", "I"]
        if label not in ("", "I", "III"):
            tokens = re.findall(r"([XYZ])([123])", label)
            if "".join(a + b for a, b in tokens) != label:
                raise ValueError(f"cannot parse Pauli label {label!r}")
            for letter, qubit in tokens:
                letters[int(qubit) - 1] = letter
        return cls.from_letters("".join(letters))

    @property
    def letters(self) -> str:
        return "".join(LETTERS[(self.code >> (2 * (2 - j))) & 3] for j in range(3))

    @property
    def weight(self) -> int:
        return sum(1 for ch in self.letters if ch != "I")

    @property
    def label(self) -> str:
        parts = [f"{ch}{j}" for j, ch in enumerate(self.letters, start=1) if ch != "I"]
        return "".join(parts) or "I"

    def permute(self, perm: tuple[int, int, int]) -> "PauliWord":
        """Move the letter on qubit j to qubit perm[j-1]."""
        out = ["I", "I", "I"]
        for j, ch in enumerate(self.letters):
            out[perm[j] - 1] = ch
        return PauliWord.from_letters("".join(out))

    def matrix(self) -> np.ndarray:
        return reduce(np.kron, [_PAULI[ch] for ch in self.letters])

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class OrbitTable:
    orbits: tuple[tuple[int, ...], ...]          # sorted codes per orbit
    orbit_of: dict[int, int] = field(repr=False)  # code -> orbit index

    def orbit(self, word: PauliWord) -> frozenset[PauliWord]:
        return frozenset(PauliWord(c) for c in self.orbits[self.orbit_of[word.code]])

    def label(self, index: int) -> str:
        """Orbit named by its smallest member."""
        return PauliWord(self.orbits[index][0]).label

    def __len__(self) -> int:
        return len(self.orbits)


@dataclass(frozen=True)
class DFSState:
    """Encoded state (r, sqrt(1-r^2) e^{i phi}) times a gauge state."""
    r: float
    phi: float
    gauge: tuple[complex, complex] = (1.0 + 0j, 0j)

    def __post_init__(self):
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"r must lie in [0, 1], got {self.r}")
        norm = abs(self.gauge[0]) ** 2 + abs(self.gauge[1]) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"gauge state must be normalised, |g|^2 = {norm}")

    @property
    def encoded(self) -> np.ndarray:
        return np.array([self.r, np.sqrt(1.0 - self.r ** 2) * np.exp(1j * self.phi)])

    @property
    def gauge_vector(self) -> np.ndarray:
        return np.asarray(self.gauge, dtype=complex)
