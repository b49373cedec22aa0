"""
Order-by-order expansion of interval-propagator products against quantum baths.

Each toggling-frame Hamiltonian is written as sum_s M_s (x) B_s over the ten
formal bath symbols (B0 and B_{b,a}). A truncated product is stored as blocks
indexed by bath words: block[l][w] is the 8x8 system operator multiplying the
ordered bath word w of length l. Because (S (x) B)(S' (x) B') = SS' (x) BB',
block products are einsums over word indices with the left factor's word
placed first.

Flow for globalization_report:
  1. per-interval exponential series truncated at order m
  2. right-to-left product in time order
  3. Pauli coefficients Tr(P M) / 8 of every block
  4. within-orbit spreads per bath word, relative to the order's largest coefficient
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from joblib import Parallel, delayed
from scipy import optimize

from app.config import get_settings
from app.exceptions import ExpansionOrderError, InputError, SequenceValidationError
from app.models.dfs import PauliWord
from app.models.ledger import (
    N_SYMBOLS,
    ExpansionLedger,
    GlobalizationReport,
    word_from_index,
    word_label,
)
from app.models.sequence import PulseSequence
from app.schemas.schemas import GroupEnum, SearchHitDocument
from app.services import permutations as perms
from app.services.dfs import pauli_orbits
from app.services.sequences import make_sequence, qdd3_sequence  # noqa: F401  (re-exported)

logger = logging.getLogger(__name__)
settings = get_settings()

PAULI_MATRICES = np.stack([PauliWord(code).matrix() for code in range(64)])
PAULI_MATRICES.setflags(write=False)


# ---------------------------------------------------------------------------
# Hamiltonians
# ---------------------------------------------------------------------------

def quantum_hamiltonian(label: int) -> list[tuple[PauliWord, int, complex]]:
    """
    H_label = B0 + sum_b S_q(b) . B_b as (PauliWord, symbol, coefficient)
    terms, q(b) being the qubit coupled to bath b under this type.
    """
    perms.check_label(label)
    q = perms.qubit_of_bath(label)
    terms = [(PauliWord(0), 0, 1.0 + 0j)]
    for b in (1, 2, 3):
        for a, letter in enumerate("XYZ"):
            letters = ["I", "I", "I"]
            letters[q[b - 1] - 1] = letter
            terms.append((PauliWord.from_letters("".join(letters)), 1 + 3 * (b - 1) + a, 1.0 + 0j))
    return terms


@lru_cache(maxsize=6)
def _symbol_operators(label: int) -> np.ndarray:
    ops = np.zeros((N_SYMBOLS, 8, 8), dtype=complex)
    for word, symbol, coeff in quantum_hamiltonian(label):
        ops[symbol] += coeff * word.matrix()
    ops.setflags(write=False)
    return ops


@lru_cache(maxsize=64)
def _powers(label: int, m: int) -> tuple[np.ndarray, ...]:
    """Word blocks of H_label^l, l = 0..m."""
    ops = _symbol_operators(label)
    out = [np.eye(8, dtype=complex)[None]]
    for _ in range(m):
        out.append(np.einsum("aij,bjk->abik", out[-1], ops).reshape(-1, 8, 8))
    return tuple(out)


# ---------------------------------------------------------------------------
# Truncated products
# ---------------------------------------------------------------------------

def _multiply(left: list[np.ndarray], right: list[np.ndarray], m: int) -> list[np.ndarray]:
    out = []
    for total in range(m + 1):
        acc = 0
        for l in range(total + 1):
            acc = acc + np.einsum("aij,bjk->abik", left[l], right[total - l]).reshape(-1, 8, 8)
        out.append(acc)
    return out


def _interval_series(label: int, tau: float, m: int) -> list[np.ndarray]:
    return [((-1j * tau) ** l / math.factorial(l)) * block for l, block in enumerate(_powers(label, m))]


def _check_order(m: int) -> None:
    if m < 0 or m > settings.max_expansion_order:
        raise ExpansionOrderError(
            f"expansion order {m} outside the supported range 0..{settings.max_expansion_order}"
        )


def _product_blocks(hamiltonians, intervals, m: int) -> list[np.ndarray]:
    acc = [np.eye(8, dtype=complex)[None]] + [np.zeros((N_SYMBOLS ** l, 8, 8), dtype=complex) for l in range(1, m + 1)]
    for label, tau in zip(hamiltonians, intervals):
        acc = _multiply(_interval_series(int(label), float(tau), m), acc, m)
    return acc


def _pauli_coefficients(block: np.ndarray) -> np.ndarray:
    """(words, 64) coefficients Tr(P M) / 8."""
    return np.einsum("wij,pji->wp", block, PAULI_MATRICES) / 8.0


def expand_schedule(hamiltonians, intervals, m: int) -> ExpansionLedger:
    """Ledger of prod_k exp(-i H_sigma(k) tau_k), latest interval leftmost."""
    _check_order(m)
    blocks = _product_blocks(hamiltonians, intervals, m)
    return ExpansionLedger(order=m, coefficients=tuple(_pauli_coefficients(b) for b in blocks))


def expand_product(seq: PulseSequence, m: int, scale: float = 1.0) -> ExpansionLedger:
    """
    Truncated expansion of the toggling-frame product of `seq` through order m.
    `scale` multiplies every Hamiltonian (coupling strength).
    """
    return expand_schedule(seq.hamiltonians, seq.intervals * scale, m)


# ---------------------------------------------------------------------------
# Globalization
# ---------------------------------------------------------------------------

def _orbit_spread(C: np.ndarray, orbit: tuple[int, ...]) -> np.ndarray:
    """max pairwise |c_P - c_P'| inside one orbit, per bath word."""
    sub = C[:, list(orbit)]
    return np.abs(sub[:, :, None] - sub[:, None, :]).max(axis=(1, 2))


def globalization_from_ledger(ledger: ExpansionLedger, tolerance: float | None = None) -> GlobalizationReport:
    tol = settings.globalization_tolerance if tolerance is None else tolerance
    table = pauli_orbits()
    spreads: dict[int, dict[str, float]] = {}
    worst: dict[int, dict[str, str]] = {}
    for l in range(1, ledger.order + 1):
        C = ledger.coefficients[l]
        scale = float(np.max(np.abs(C))) or 1.0
        spreads[l], worst[l] = {}, {}
        for i, orbit in enumerate(table.orbits):
            name = table.label(i)
            if len(orbit) == 1:
                spreads[l][name] = 0.0
                continue
            per_word = _orbit_spread(C, orbit)
            w = int(np.argmax(per_word))
            spreads[l][name] = float(per_word[w]) / scale
            worst[l][name] = word_label(word_from_index(w, l))
    return GlobalizationReport(order=ledger.order, tolerance=tol, spreads=spreads, worst_words=worst)


def globalization_report(seq: PulseSequence, m: int, tolerance: float | None = None) -> GlobalizationReport:
    """Decoupling order of `seq` against quantum baths, checked through order m."""
    report = globalization_from_ledger(expand_product(seq, m), tolerance)
    logger.info(
        "Globalization %s order %d (%d intervals): verdict %d, max spreads %s",
        seq.group.value, m, seq.n_intervals, report.verdict,
        {k: f"{v:.1e}" for k, v in report.max_spread.items()},
    )
    return report


# ---------------------------------------------------------------------------
# Exact cross-check
# ---------------------------------------------------------------------------

def full_hamiltonian(label: int, bath_ops: np.ndarray) -> np.ndarray:
    """sum_s M_s (x) B_s for numeric bath operators B_s (shape (10, d, d))."""
    ops = _symbol_operators(label)
    d = bath_ops.shape[-1]
    return np.einsum("sij,skl->ikjl", ops, bath_ops).reshape(8 * d, 8 * d)


def exact_product(hamiltonians, intervals, bath_ops: np.ndarray, scale: float = 1.0) -> np.ndarray:
    from app.services.simulator import hermitian_exp

    d = bath_ops.shape[-1]
    U = np.eye(8 * d, dtype=complex)
    for label, tau in zip(hamiltonians, intervals):
        U = hermitian_exp(full_hamiltonian(int(label), bath_ops), scale * float(tau)) @ U
    return U


def evaluate_ledger(ledger: ExpansionLedger, bath_ops: np.ndarray) -> np.ndarray:
    """Substitute numeric bath operators into the truncated expansion."""
    d = bath_ops.shape[-1]
    words = np.eye(d, dtype=complex)[None]
    total = np.zeros((8 * d, 8 * d), dtype=complex)
    for l, C in enumerate(ledger.coefficients):
        if l > 0:
            words = np.einsum("aij,bjk->abik", words, bath_ops).reshape(-1, d, d)
        system = np.einsum("wp,pij->wij", C, PAULI_MATRICES)
        total += np.einsum("wij,wkl->ikjl", system, words).reshape(8 * d, 8 * d)
    return total


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SearchHit:
    sequence: PulseSequence
    residual: float
    ratio: float
    index: int

    def to_document(self) -> SearchHitDocument:
        return SearchHitDocument(
            hamiltonians=list(self.sequence.hamiltonians),
            intervals=[float(t) for t in self.sequence.intervals],
            pulses=list(self.sequence.pulses),
            residual=self.residual,
            ratio=self.ratio,
        )


def _allowed(current: int, nxt: int) -> bool:
    try:
        perms.transition_pulse(current, nxt)
    except SequenceValidationError:
        return False
    return True


def _closes(last: int) -> bool:
    try:
        perms.closing_pulse(last)
    except SequenceValidationError:
        return False
    return True


def enumerate_schedules(max_intervals: int, pool) -> list[tuple[int, ...]]:
    """
    Type schedules starting in the laboratory frame, shortest first and
    lexicographic within a length: no repeated adjacent type, every pulse a
    single allowed exchange pulse.
    """
    pool = sorted(set(int(h) for h in pool))
    for label in pool:
        perms.check_label(label)
    if 1 not in pool:
        return []
    by_length: list[list[tuple[int, ...]]] = [[(1,)]]
    for _ in range(max_intervals - 1):
        by_length.append([
            s + (h,) for s in by_length[-1] for h in pool if h != s[-1] and _allowed(s[-1], h)
        ])
    return [s for level in by_length for s in level if _closes(s[-1])]


def _canonical(schedule: tuple[int, ...]) -> bool:
    """True when no valid qubit relabeling of the schedule sorts before it."""
    for relabel in perms.all_permutations():
        image = tuple(perms.conjugate_label(h, relabel) for h in schedule)
        if image < schedule and all(_allowed(a, b) for a, b in zip(image, image[1:])) and _closes(image[-1]):
            return False
    return True


def _first_order_feasible(schedule: tuple[int, ...]) -> bool:
    """Equal bath-to-qubit exposure must be reachable with non-negative intervals."""
    rows = []
    for b in (1, 2, 3):
        seen = {perms.qubit_of_bath(h)[b - 1] for h in schedule}
        if seen != {1, 2, 3}:
            return False
        for j in (1, 2, 3):
            rows.append([1.0 if perms.qubit_of_bath(h)[b - 1] == j else 0.0 for h in schedule])
    A = np.array(rows)
    fit = optimize.lsq_linear(A, np.full(len(rows), 1.0 / 3.0), bounds=(0.0, 1.0))
    return bool(np.max(np.abs(A @ fit.x - 1.0 / 3.0)) < 1e-9)


@lru_cache(maxsize=1)
def _orbit_pairs() -> tuple[np.ndarray, np.ndarray]:
    base, member = [], []
    for orbit in pauli_orbits().orbits:
        for code in orbit[1:]:
            base.append(orbit[0])
            member.append(code)
    return np.array(base), np.array(member)


def _equality_residuals(x: np.ndarray, schedule: tuple[int, ...], m: int) -> np.ndarray:
    tau = x ** 2 / np.sum(x ** 2)
    blocks = _product_blocks(schedule, tau, m)
    base, member = _orbit_pairs()
    parts = []
    for block in blocks[1:]:
        C = _pauli_coefficients(block)
        d = C[:, member] - C[:, base]
        parts.append(d.real.ravel())
        parts.append(d.imag.ravel())
    return np.concatenate(parts)


def _solve_schedule(schedule, m, index, seed, restarts, tolerance, min_interval):
    starts = [np.ones(len(schedule))]
    rng = np.random.default_rng([seed, index])
    starts += [rng.uniform(0.5, 1.5, len(schedule)) for _ in range(restarts)]
    for x0 in starts:
        fit = optimize.least_squares(
            _equality_residuals, x0, args=(schedule, m), xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=400,
        )
        residual = float(np.max(np.abs(fit.fun)))
        tau = fit.x ** 2 / np.sum(fit.x ** 2)
        if residual < tolerance and tau.min() / tau.max() > min_interval:
            return tau, residual
    return None


def _solve_chunk(chunk, m, seed, restarts, tolerance, min_interval):
    found = []
    for index, schedule in chunk:
        solved = _solve_schedule(schedule, m, index, seed, restarts, tolerance, min_interval)
        if solved is not None:
            found.append((index, schedule, *solved))
    return found


def search_sequences(m: int, max_intervals: int, pool, n_jobs: int | None = None, seed: int | None = None) -> list[SearchHit]:
    """
    Brute-force search for schedules globalized through order m.

    Candidates are pruned for first-order feasibility and reduced modulo
    qubit relabeling; each survivor is solved for tau = x^2 / sum x^2 by
    nonlinear least squares. Hits come back sorted by max/min interval ratio.
    """
    if m not in (1, 2):
        raise ExpansionOrderError(f"search supports orders 1 and 2, got {m}")
    if not 1 <= max_intervals <= settings.max_search_intervals:
        raise InputError(f"max_intervals must lie in 1..{settings.max_search_intervals}, got {max_intervals}")
    seed = settings.seed if seed is None else seed

    schedules = enumerate_schedules(max_intervals, pool)
    candidates = [
        (i, s) for i, s in enumerate(schedules) if _canonical(s) and _first_order_feasible(s)
    ]
    logger.info("Search order %d: %d schedules, %d candidates after pruning", m, len(schedules), len(candidates))

    chunks: dict[tuple[int, ...], list] = {}
    for i, s in candidates:
        chunks.setdefault(s[:3], []).append((i, s))
    results = Parallel(n_jobs=settings.n_jobs if n_jobs is None else n_jobs)(
        delayed(_solve_chunk)(
            chunk, m, seed, settings.search_restarts, settings.search_residual_tolerance, settings.search_min_interval,
        )
        for chunk in chunks.values()
    )

    hits = []
    for index, schedule, tau, residual in sorted(hit for part in results for hit in part):
        seq = make_sequence(GroupEnum.custom, m, schedule, np.cumsum(tau)[:-1])
        hits.append(SearchHit(sequence=seq, residual=residual, ratio=float(tau.max() / tau.min()), index=index))
    hits.sort(key=lambda h: (h.ratio, h.index))
    logger.info("Search order %d: %d sequences found", m, len(hits))
    return hits
