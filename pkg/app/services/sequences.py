"""
UDD, A3 and S3 pulse-sequence construction and verification.

Flow for a stored order:
  1. Hamiltonian schedule from the periodic pattern
  2. switching times from the stored tables (or the solver when solve=True)
  3. pulses derived from consecutive toggling frames, closing to the identity
"""
import logging
from functools import reduce

import numpy as np
from pydantic import ValidationError

from app.config import get_settings
from app.exceptions import InputError, SequenceValidationError
from app.models.sequence import PulseSequence, SwitchingFunctions
from app.schemas.schemas import GroupEnum, MomentReport, PulseEnum
from app.services import permutations as perms
from app.services import tables
from app.services.solver import (
    A3_PERIOD,
    S3_PERIOD,
    legendre_residuals,
    periodic_hamiltonians,
    solve_times,
)
from app.services.switching import FamilySet, family_values, infer_family_set

logger = logging.getLogger(__name__)
settings = get_settings()

UDD_PERIOD = (1, 4)


def _check_order(n: int) -> None:
    if n < 0:
        raise InputError(f"decoupling order must be non-negative, got {n}")
    if n > settings.max_solver_order:
        raise InputError(f"decoupling order {n} exceeds the supported maximum {settings.max_solver_order}")


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

def derive_pulses(hamiltonians) -> list[PulseEnum]:
    """Transition pulses between consecutive frames plus the closing pulse."""
    labels = [int(h) for h in hamiltonians]
    if labels[0] != 1:
        raise SequenceValidationError(f"sequences start in the laboratory frame (H1), got H{labels[0]}")
    pulses = [perms.transition_pulse(a, b) for a, b in zip(labels, labels[1:])]
    pulses.append(perms.closing_pulse(labels[-1]))
    return [PulseEnum(p) for p in pulses]


def make_sequence(group: GroupEnum, order: int, hamiltonians, times, pulses=None, check_frames: bool = True) -> PulseSequence:
    """
    Validated PulseSequence; pulses are derived when not given.

    Explicit pulses must close to the identity and match the schedule
    (`validate_sequence`) unless check_frames is False.
    """
    labels = tuple(int(h) for h in hamiltonians)
    derived = pulses is None
    if derived:
        pulses = derive_pulses(labels)
    try:
        seq = PulseSequence(
            group=group,
            order=order,
            hamiltonians=labels,
            times=tuple(float(t) for t in times),
            pulses=tuple(PulseEnum(p) for p in pulses),
        )
    except ValidationError as exc:
        raise SequenceValidationError(str(exc)) from exc
    if not derived and check_frames:
        validate_sequence(seq)
    return seq


def from_hamiltonians(hamiltonians, times, group: GroupEnum = GroupEnum.custom, order: int = 0) -> PulseSequence:
    return make_sequence(group, order, hamiltonians, times)


def free_evolution(group: GroupEnum = GroupEnum.a3) -> PulseSequence:
    """Order-0 sequence: one H1 interval, no pulse."""
    return make_sequence(group, 0, (1,), (), (PulseEnum.none,))


def udd_times(n: int) -> list[float]:
    """t_j = sin^2(j pi / 2(n+1)), j = 1..n."""
    _check_order(n)
    return tables.udd_switching_times(n)


def udd_sequence(n: int) -> PulseSequence:
    """UDD as an exchange sequence toggling H1 <-> H4 with P12 swaps."""
    _check_order(n)
    if n == 0:
        return free_evolution(GroupEnum.udd)
    return make_sequence(GroupEnum.udd, n, periodic_hamiltonians(UDD_PERIOD, n + 1), udd_times(n))


def a3_hamiltonians(n: int) -> list[int]:
    return periodic_hamiltonians(A3_PERIOD, 2 * n + 1)


def s3_hamiltonians(n: int) -> list[int]:
    return periodic_hamiltonians(S3_PERIOD, 5 * n + 1)


def a3_sequence(n: int, solve: bool = False) -> PulseSequence:
    """
    Order-n A3 sequence over the period {H1, H2, H3, H2}: 2n + 1 intervals.

    Orders 1..10 come from the stored table unless solve=True.
    """
    _check_order(n)
    if n == 0:
        return free_evolution(GroupEnum.a3)
    hamiltonians = a3_hamiltonians(n)
    if not solve and n in tables.A3_HALF_TIMES:
        times = tables.a3_table_times(n)
    else:
        times = solve_times(hamiltonians, n)
    seq = make_sequence(GroupEnum.a3, n, hamiltonians, times)
    logger.info("A3 order %d: %d intervals, final pulse %s", n, seq.n_intervals, seq.pulses[-1].value)
    return seq


def s3_sequence(n: int, solve: bool = False) -> PulseSequence:
    """
    Order-n S3 sequence over the period {H1,H4,H2,H5,H3,H6,H3,H5,H2,H4}:
    5n + 1 intervals alternating even and odd types, equal even/odd weight.
    """
    _check_order(n)
    if n == 0:
        return free_evolution(GroupEnum.s3)
    hamiltonians = s3_hamiltonians(n)
    if not solve and n in tables.S3_EXTRA_HALF_TIMES:
        times = tables.s3_table_times(n)
    else:
        times = solve_times(hamiltonians, n)
    seq = make_sequence(GroupEnum.s3, n, hamiltonians, times)
    logger.info("S3 order %d: %d intervals", n, seq.n_intervals)
    return seq


def build_sequence(group: GroupEnum, n: int, solve: bool = False) -> PulseSequence:
    if group is GroupEnum.udd:
        return udd_sequence(n)
    if group is GroupEnum.a3:
        return a3_sequence(n, solve=solve)
    if group is GroupEnum.s3:
        return s3_sequence(n, solve=solve)
    if group is GroupEnum.qdd3:
        return qdd3_sequence()
    raise InputError(f"group {group.value!r} has no generator; load it from a sequence file")


def qdd3_sequence() -> PulseSequence:
    """
    Third-order quantum-bath sequence: 13 even intervals followed by their
    image under H1->H4, H2->H6, H3->H5 with identical timings (26 in total).
    """
    even = [h for h, _ in tables.QDD3_EVEN_HALF]
    lengths = [tau for _, tau in tables.QDD3_EVEN_HALF]
    hamiltonians = even + [tables.HALF_EXCHANGE[h] for h in even]
    boundaries = np.cumsum(lengths + lengths)
    return make_sequence(GroupEnum.qdd3, 3, hamiltonians, boundaries[:-1])


def stored_orders(group: GroupEnum) -> tuple[int, ...]:
    if group in (GroupEnum.a3, GroupEnum.s3):
        return tables.STORED_ORDERS
    if group is GroupEnum.qdd3:
        return (3,)
    return ()


def stored_times(group: GroupEnum, n: int) -> list[float]:
    if group is GroupEnum.a3 and n in tables.A3_HALF_TIMES:
        return tables.a3_table_times(n)
    if group is GroupEnum.s3 and n in tables.S3_EXTRA_HALF_TIMES:
        return tables.s3_table_times(n)
    raise InputError(f"no stored {group.value} times for order {n}")


# ---------------------------------------------------------------------------
# Switching functions and moments
# ---------------------------------------------------------------------------

def family_set_for(seq: PulseSequence) -> FamilySet:
    if seq.group is GroupEnum.udd:
        return FamilySet.udd
    if seq.group is GroupEnum.a3:
        return FamilySet.a3
    if seq.group in (GroupEnum.s3, GroupEnum.qdd3):
        return FamilySet.s3
    return infer_family_set(seq.hamiltonians)


def switching_functions(seq: PulseSequence) -> SwitchingFunctions:
    """Per-interval values of the switching functions of the sequence's group."""
    return family_values(seq.hamiltonians, family_set_for(seq))


def moment_residuals(seq: PulseSequence, n: int) -> np.ndarray:
    """
    R[i, p] = integral_0^1 f_i(s) s^p ds, p = 0..n-1, in closed form:
    sum_k f_ik (t_k^{p+1} - t_{k-1}^{p+1}) / (p + 1).
    """
    f = switching_functions(seq).values
    if n == 0:
        return np.zeros((f.shape[0], 0))
    p = np.arange(1, n + 1)
    powers = seq.boundaries[:, None] ** p[None, :] / p[None, :]
    return f @ np.diff(powers, axis=0)


def max_moment_residual(seq: PulseSequence, n: int) -> float:
    """Largest residual over both the monomial and the Legendre moments."""
    if n == 0:
        return 0.0
    raw = np.max(np.abs(moment_residuals(seq, n)))
    f = switching_functions(seq).values
    leg = np.max(np.abs(legendre_residuals(f, seq.times, n)))
    return float(max(raw, leg))


def permutation_weights(seq: PulseSequence) -> dict[int, float]:
    """Total time spent under each Hamiltonian type."""
    weights = {label: 0.0 for label in perms.BATH_MAP}
    for label, tau in zip(seq.hamiltonians, seq.intervals):
        weights[label] += float(tau)
    return weights


# ---------------------------------------------------------------------------
# Structural checks
# ---------------------------------------------------------------------------

def pulse_product(seq: PulseSequence) -> np.ndarray:
    """Q_N ... Q_1 as an 8x8 matrix."""
    return reduce(lambda acc, p: perms.pulse_unitary(p.value) @ acc, seq.pulses, np.eye(8))


def frame_consistency(seq: PulseSequence, baths=(0.37, -1.21, 0.83)) -> float:
    """
    Largest deviation between R_k^dag H1 R_k (R_k the product of all earlier
    pulses) and the declared H_sigma(k), with H instantiated as sum_j Z_j b_alpha(j)
    for three distinct numeric bath constants.
    """
    z = [np.diag([1.0 if (x >> (3 - j)) & 1 == 0 else -1.0 for x in range(8)]) for j in (1, 2, 3)]

    def hamiltonian(label: int) -> np.ndarray:
        alpha = perms.BATH_MAP[label]
        return sum(z[j] * baths[alpha[j] - 1] for j in range(3))

    h1 = hamiltonian(1)
    frame = np.eye(8)
    worst = 0.0
    for label, pulse in zip(seq.hamiltonians, seq.pulses):
        worst = max(worst, float(np.max(np.abs(frame.T @ h1 @ frame - hamiltonian(label)))))
        frame = perms.pulse_unitary(pulse.value) @ frame
    return worst


def validate_sequence(seq: PulseSequence, tolerance: float = 1e-13) -> None:
    """Pulse product must be the identity and every frame must match its declared type."""
    closure = float(np.max(np.abs(pulse_product(seq) - np.eye(8))))
    if closure > tolerance:
        raise SequenceValidationError(f"pulses multiply to a non-identity permutation (deviation {closure:.1e})")
    mismatch = frame_consistency(seq)
    if mismatch > tolerance:
        raise SequenceValidationError(f"pulses are inconsistent with the Hamiltonian schedule ({mismatch:.1e})")


# ---------------------------------------------------------------------------
# Symmetry maps
# ---------------------------------------------------------------------------

def half_exchange(seq: PulseSequence) -> PulseSequence:
    """
    Image under H1<->H4, H2<->H6, H3<->H5 with timings and pulses kept.

    The image starts in the H4 frame, so it is a building block (the odd half
    of a doubly palindromic sequence) rather than a closed sequence on its own.
    """
    mapped = [tables.HALF_EXCHANGE[h] for h in seq.hamiltonians]
    return make_sequence(GroupEnum.custom, seq.order, mapped, seq.times, seq.pulses, check_frames=False)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def moment_report(seq: PulseSequence, n: int, tolerance: float = 1e-12) -> MomentReport:
    """Per-family monomial moments through order n, gated on the worst residual."""
    worst = max_moment_residual(seq, n)
    return MomentReport(
        group=seq.group,
        order=n,
        families=list(switching_functions(seq).names),
        residuals=moment_residuals(seq, n).tolist(),
        max_residual=worst,
        tolerance=tolerance,
        passed=worst <= tolerance,
    )
