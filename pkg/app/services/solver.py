"""
Newton solver for the switching-time moment equations.

Unknowns are the switching times below 1/2; the rest follow by reflection
about 1/2 (and 1/2 itself is a switching time when the count is odd).
Moments are taken against shifted Legendre polynomials P_p(2s - 1), which
span the same space as s^p for p < n but keep the Jacobian well conditioned.

Strategy:
  1. damped Gauss-Newton (least-squares steps, monotone backtracking)
     from the structured guess, then from a few perturbed guesses
  2. homotopy R(x) - (1 - lam) R(x0) marched from lam = 0 to 1
  3. SolverConvergenceError carrying the best residual
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre

from app.config import get_settings
from app.exceptions import (
    SequenceValidationError,
    SolverConvergenceError,
    UnderdeterminedSystemError,
)
from app.services import tables
from app.services.switching import FamilySet, family_values, infer_family_set

logger = logging.getLogger(__name__)
settings = get_settings()

A3_PERIOD = (1, 2, 3, 2)
S3_PERIOD = (1, 4, 2, 5, 3, 6, 3, 5, 2, 4)

# (lower, upper) distance of the bracketing pair from each UDD angle, in units of pi/2(n+1)
BRACKET_OFFSETS = ((0.19, 0.175), (0.17, 0.17), (0.21, 0.19), (0.15, 0.15))
# S3-only times: first as a fraction of the first A3 time, then pairs inside A3 gaps
S3_FRACTIONS = ((0.475, 0.26, 0.76), (0.47, 0.25, 0.75), (0.48, 0.27, 0.77), (0.46, 0.24, 0.74))

HOMOTOPY_STEPS = 20


def expected_time_count(family_set: FamilySet, n: int) -> int:
    return {FamilySet.udd: n, FamilySet.a3: 2 * n, FamilySet.s3: 5 * n}[family_set]


def periodic_hamiltonians(period: tuple[int, ...], count: int) -> list[int]:
    reps = math.ceil(count / len(period))
    return list(period * reps)[:count]


# ---------------------------------------------------------------------------
# Residuals and Jacobian
# ---------------------------------------------------------------------------

def _antiderivatives(t: np.ndarray, n: int) -> np.ndarray:
    """G[p, k] = integral from 0 to t_k of P_p(2s - 1) ds, p < n."""
    u = 2.0 * np.asarray(t, dtype=float) - 1.0
    V = legendre.legvander(u, n)
    G = np.empty((n, u.size))
    G[0] = u + 1.0
    for p in range(1, n):
        G[p] = (V[:, p + 1] - V[:, p - 1]) / (2 * p + 1)
    return 0.5 * G


def legendre_residuals(f: np.ndarray, times, n: int) -> np.ndarray:
    """(families, n) moments of the switching functions against P_p(2s - 1)."""
    if n == 0:
        return np.zeros((f.shape[0], 0))
    bounds = np.concatenate([[0.0], np.asarray(times, dtype=float), [1.0]])
    return f @ np.diff(_antiderivatives(bounds, n), axis=1).T


def _time_jacobian(f: np.ndarray, times: np.ndarray, n: int) -> np.ndarray:
    """d residual / d t_j = (f_j - f_{j+1}) P_p(2 t_j - 1)."""
    jumps = f[:, :-1] - f[:, 1:]
    basis = legendre.legvander(2.0 * times - 1.0, n - 1).T
    return (jumps[:, None, :] * basis[None, :, :]).reshape(-1, times.size)


@dataclass(frozen=True)
class SymmetricLayout:
    n_times: int

    @property
    def n_unknowns(self) -> int:
        return self.n_times // 2

    @property
    def has_midpoint(self) -> bool:
        return self.n_times % 2 == 1

    def expand(self, x: np.ndarray) -> np.ndarray:
        mid = [0.5] if self.has_midpoint else []
        return np.concatenate([x, mid, (1.0 - x)[::-1]])

    def reduce(self, times) -> np.ndarray:
        t = np.asarray(times, dtype=float)
        m = self.n_unknowns
        return 0.5 * (t[:m] + 1.0 - t[::-1][:m])

    def chain(self) -> np.ndarray:
        M = np.zeros((self.n_times, self.n_unknowns))
        for i in range(self.n_unknowns):
            M[i, i] = 1.0
            M[self.n_times - 1 - i, i] = -1.0
        return M

    def admissible(self, x: np.ndarray) -> bool:
        return bool(x.size == 0 or (x[0] > 0.0 and x[-1] < 0.5 and np.all(np.diff(x) > 0.0)))


@dataclass
class _Problem:
    f: np.ndarray
    n: int
    layout: SymmetricLayout
    offset: np.ndarray | None = None

    def residual(self, x: np.ndarray) -> np.ndarray:
        r = legendre_residuals(self.f, self.layout.expand(x), self.n).ravel()
        return r if self.offset is None else r - self.offset

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        return _time_jacobian(self.f, self.layout.expand(x), self.n) @ self.layout.chain()


@dataclass
class SolveReport:
    times: list[float]
    iterations: int
    residual: float
    strategy: str
    history: list[float] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Newton core
# ---------------------------------------------------------------------------

def _gauss_newton(problem: _Problem, x0: np.ndarray, tol: float, max_iter: int) -> tuple[np.ndarray, int, list[float]]:
    x = np.array(x0, dtype=float)
    r = problem.residual(x)
    history = [float(np.max(np.abs(r)))]
    for it in range(1, max_iter + 1):
        if history[-1] < tol:
            return x, it - 1, history
        step, *_ = np.linalg.lstsq(problem.jacobian(x), -r, rcond=None)
        norm = np.linalg.norm(r)
        lam = 1.0
        while lam > 1e-10:
            trial = x + lam * step
            if problem.layout.admissible(trial):
                r_trial = problem.residual(trial)
                worst = float(np.max(np.abs(r_trial)))
                if worst < tol or np.linalg.norm(r_trial) < norm:
                    break
            lam *= 0.5
        else:
            raise SolverConvergenceError(history[-1], it, "line search stalled")
        x, r = trial, r_trial
        history.append(worst)
        if 0.0 < worst and 0.0 < history[-2] < 1.0:
            # convergence order estimate, ~2 in the quadratic regime
            ratio = math.log(worst) / math.log(history[-2])
            logger.debug("iteration %d: max residual %.3e (step %.3g, log-ratio %.2f)", it, worst, lam, ratio)
        else:
            logger.debug("iteration %d: max residual %.3e (step %.3g)", it, worst, lam)
    if history[-1] < tol:
        return x, max_iter, history
    raise SolverConvergenceError(history[-1], max_iter)


def _homotopy(problem: _Problem, x0: np.ndarray, tol: float, max_iter: int) -> tuple[np.ndarray, int, list[float]]:
    r0 = problem.residual(x0)
    x = np.array(x0, dtype=float)
    iterations = 0
    for k in range(1, HOMOTOPY_STEPS + 1):
        lam = k / HOMOTOPY_STEPS
        stage = _Problem(problem.f, problem.n, problem.layout, offset=(1.0 - lam) * r0)
        stage_tol = tol if k == HOMOTOPY_STEPS else max(tol, 1e-9)
        x, its, history = _gauss_newton(stage, x, stage_tol, max_iter)
        iterations += its
    return x, iterations, history


def _check_rank(problem: _Problem, x0: np.ndarray) -> None:
    m = problem.layout.n_unknowns
    if m == 0:
        return
    sv = np.linalg.svd(problem.jacobian(x0), compute_uv=False)
    rank = int(np.sum(sv > settings.solver_rank_rcond * (sv[0] if sv.size else 0.0)))
    if rank < m:
        raise UnderdeterminedSystemError(rank, m)


# ---------------------------------------------------------------------------
# Initial guesses
# ---------------------------------------------------------------------------

def a3_guess(n: int, offsets: tuple[float, float] = BRACKET_OFFSETS[0]) -> list[float]:
    """A pair of times bracketing every UDD time, sin^2(j d -+ a d)."""
    lower, upper = offsets
    delta = math.pi / (2 * (n + 1))
    times: list[float] = []
    for j in range(1, n + 1):
        theta = j * delta
        times += [math.sin(theta - lower * delta) ** 2, math.sin(theta + upper * delta) ** 2]
    return sorted(times)


def s3_guess(n: int, a3_times, fractions: tuple[float, float, float] = S3_FRACTIONS[0]) -> list[float]:
    """A3 times, UDD times and the S3-only times placed inside the A3 gaps."""
    first, lo_frac, hi_frac = fractions
    A = sorted(a3_times)
    extras = [first * A[0]]
    for m in range(1, n + 1):
        if 2 * m < len(A):
            lo, hi = A[2 * m - 1], A[2 * m]
            extras += [lo + lo_frac * (hi - lo), lo + hi_frac * (hi - lo)]
    half = tuple(e for e in extras if e < 0.5)
    times = set(tables.reflect(half)) | set(A) | set(tables.udd_switching_times(n))
    return sorted(times)


def _a3_times_for_guess(n: int) -> list[float]:
    if n in tables.A3_HALF_TIMES:
        return tables.a3_table_times(n)
    return solve_times(periodic_hamiltonians(A3_PERIOD, 2 * n + 1), n)


def _structured_guesses(hamiltonians: list[int], family_set: FamilySet, n: int) -> list[list[float]]:
    N = len(hamiltonians)
    if family_set is FamilySet.a3 and hamiltonians == periodic_hamiltonians(A3_PERIOD, N):
        return [a3_guess(n, off) for off in BRACKET_OFFSETS]
    if family_set is FamilySet.s3 and hamiltonians == periodic_hamiltonians(S3_PERIOD, N):
        a3 = _a3_times_for_guess(n)
        return [s3_guess(n, a3, fr) for fr in S3_FRACTIONS]
    if family_set is FamilySet.udd:
        return [tables.udd_switching_times(n)]
    return [list(np.arange(1, N) / N)]


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------

def solve_report(
    hamiltonians,
    n: int,
    guess=None,
    normalize: bool = True,
) -> SolveReport:
    hamiltonians = [int(h) for h in hamiltonians]
    family_set = infer_family_set(hamiltonians)
    if n < 0 or n > settings.max_solver_order:
        raise SequenceValidationError(f"order must be in 0..{settings.max_solver_order}, got {n}")
    n_times = len(hamiltonians) - 1
    expected = expected_time_count(family_set, n)
    if n_times != expected:
        raise SequenceValidationError(
            f"{family_set.value} order {n} needs {expected} switching times "
            f"({expected + 1} intervals), got {n_times}"
        )
    if n_times == 0:
        return SolveReport(times=[], iterations=0, residual=0.0, strategy="trivial")

    f = family_values(hamiltonians, family_set, normalize=normalize).values
    layout = SymmetricLayout(n_times)
    problem = _Problem(f, n, layout)
    tol = settings.solver_tolerance
    max_iter = settings.solver_max_iterations

    if guess is not None:
        if len(guess) != n_times:
            raise SequenceValidationError(f"guess must contain {n_times} times, got {len(guess)}")
        starts = [layout.reduce(sorted(guess))]
    else:
        starts = [layout.reduce(g) for g in _structured_guesses(hamiltonians, family_set, n)]
    starts = [x for x in starts if layout.admissible(x)]
    if not starts:
        raise SequenceValidationError("initial switching times are not strictly increasing inside (0, 1)")

    _check_rank(problem, starts[0])
    if layout.n_unknowns == 0:
        residual = float(np.max(np.abs(problem.residual(starts[0]))))
        if residual >= tol:
            raise SolverConvergenceError(residual, 0, "no free switching times")
        return SolveReport(times=layout.expand(starts[0]).tolist(), iterations=0, residual=residual, strategy="fixed")

    best = math.inf
    for k, x0 in enumerate(starts):
        try:
            x, its, history = _gauss_newton(problem, x0, tol, max_iter)
            strategy = "newton" if k == 0 else f"newton-restart-{k}"
            break
        except SolverConvergenceError as exc:
            best = min(best, exc.residual_norm)
    else:
        logger.warning(
            "Newton failed from %d starts (best residual %.3e); switching to homotopy", len(starts), best
        )
        try:
            x, its, history = _homotopy(problem, starts[0], tol, max_iter)
            strategy = "homotopy"
        except SolverConvergenceError as exc:
            raise SolverConvergenceError(min(best, exc.residual_norm), exc.iterations, "all strategies failed") from exc

    times = layout.expand(x)
    logger.info(
        "Solved %s order %d: %d times, %d iterations (%s), max residual %.2e",
        family_set.value, n, n_times, its, strategy, history[-1],
    )
    return SolveReport(times=times.tolist(), iterations=its, residual=history[-1], strategy=strategy, history=history)


def solve_times(hamiltonians, n: int, guess=None, normalize: bool = True) -> list[float]:
    """
    Switching times making every switching-function moment p < n vanish.

    Raises UnderdeterminedSystemError when the Jacobian at the start point has
    rank below the number of unknowns (S3 without normalize, for instance) and
    SolverConvergenceError with the best residual when no strategy converges.
    """
    return solve_report(hamiltonians, n, guess=guess, normalize=normalize).times
