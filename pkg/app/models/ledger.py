"""
Expansion ledger and globalization report.

Bath words are tuples of symbol indices; symbol 0 is the pure-bath operator
B0 and 1 + 3(b-1) + a is B_{b,a} with a = 0, 1, 2 for x, y, z.
"""
import re
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from app.models.dfs import PauliWord

N_SYMBOLS = 10
AXES = "xyz"


def symbol_label(symbol: int) -> str:
    if symbol == 0:
        return "B0"
    bath, axis = divmod(symbol - 1, 3)
    return f"B{bath + 1}{AXES[axis]}"


def parse_symbol(label: str) -> int:
    if label == "B0":
        return 0
    m = re.fullmatch(r"B([123])([xyz])", label)
    if not m:
        raise ValueError(f"unknown bath symbol {label!r}")
    return 1 + 3 * (int(m.group(1)) - 1) + AXES.index(m.group(2))


def word_index(word: tuple[int, ...]) -> int:
    """Base-10 index, leftmost symbol most significant."""
    index = 0
    for s in word:
        index = index * N_SYMBOLS + s
    return index


def word_from_index(index: int, length: int) -> tuple[int, ...]:
    digits = []
    for _ in range(length):
        index, s = divmod(index, N_SYMBOLS)
        digits.append(s)
    return tuple(reversed(digits))


def word_label(word: tuple[int, ...]) -> str:
    return ".".join(symbol_label(s) for s in word) or "1"


@dataclass(frozen=True)
class ExpansionLedger:
    """
    coefficients[l][w, code]: coefficient of PauliWord(code) (x) bath word w
    of length l in the truncated product of interval propagators.
    """
    order: int
    coefficients: tuple[np.ndarray, ...]

    def coefficient(self, pauli: PauliWord | str, bath_word: tuple[int, ...] | str = ()) -> complex:
        if isinstance(pauli, str):
            pauli = PauliWord.parse(pauli)
        if isinstance(bath_word, str):
            bath_word = tuple(parse_symbol(s) for s in bath_word.split(".") if s and s != "1")
        length = len(bath_word)
        if length > self.order:
            return 0j
        return complex(self.coefficients[length][word_index(bath_word), pauli.code])

    def items(self, min_abs: float = 0.0) -> Iterator[tuple[PauliWord, tuple[int, ...], complex]]:
        for length, block in enumerate(self.coefficients):
            words, codes = np.nonzero(np.abs(block) > min_abs)
            for w, c in zip(words, codes):
                yield PauliWord(int(c)), word_from_index(int(w), length), complex(block[w, c])

    def system_operator(self, bath_word: tuple[int, ...]) -> np.ndarray:
        """8x8 system operator multiplying a given bath word."""
        row = self.coefficients[len(bath_word)][word_index(bath_word)]
        return sum(row[code] * PauliWord(code).matrix() for code in range(64) if row[code] != 0)


@dataclass
class GlobalizationReport:
    order: int
    tolerance: float
    # order -> orbit label -> max over bath words of the relative within-orbit spread
    spreads: dict[int, dict[str, float]]
    # order -> orbit label -> bath word attaining that spread
    worst_words: dict[int, dict[str, str]] = field(default_factory=dict)

    @property
    def max_spread(self) -> dict[int, float]:
        return {k: max(v.values(), default=0.0) for k, v in self.spreads.items()}

    @property
    def verdict(self) -> int:
        """Highest order m such that every order 1..m is globalized."""
        verdict = 0
        for k in sorted(self.spreads):
            if k != verdict + 1 or self.max_spread[k] > self.tolerance:
                break
            verdict = k
        return verdict

    def to_document(self) -> dict:
        return {
            "order": self.order,
            "verdict": self.verdict,
            "tolerance": self.tolerance,
            "spreads": {str(k): v for k, v in self.spreads.items()},
            "passed": self.verdict >= self.order,
        }
