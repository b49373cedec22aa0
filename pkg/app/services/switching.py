"""
Switching-function families.

For bath map alpha (qubit j sees bath alpha(j)) let D[j, b] = [alpha(j) == b].

  A3   f1 = D[1,1] - D[2,1], f2 = D[1,2] - D[2,2]      (theta1 - theta2 on B1, B2)
  S3   f1, f2, g1 = D[2,1] - D[3,1], g2 = D[2,2] - D[3,2] and the parity
       function (+1 on even types, -1 on odd types)
  UDD  f = parity, for sequences toggling between H1 and H4

The B3 coefficient is minus the sum of the other two, so two functions per
phase difference suffice. Two phase differences fix the third.
"""
from enum import Enum

import numpy as np

from app.models.sequence import SwitchingFunctions
from app.services.permutations import BATH_MAP, EVEN_TYPES, check_label


class FamilySet(str, Enum):
    udd = "udd"
    a3 = "a3"
    s3 = "s3"


FAMILY_NAMES: dict[FamilySet, tuple[str, ...]] = {
    FamilySet.udd: ("f",),
    FamilySet.a3: ("f1", "f2"),
    FamilySet.s3: ("f1", "f2", "g1", "g2", "parity"),
}


def _indicator(label: int, qubit: int, bath: int) -> int:
    return 1 if BATH_MAP[label][qubit - 1] == bath else 0


def _parity(label: int) -> int:
    return 1 if label in EVEN_TYPES else -1


def _value(name: str, label: int) -> int:
    if name == "f1":
        return _indicator(label, 1, 1) - _indicator(label, 2, 1)
    if name == "f2":
        return _indicator(label, 1, 2) - _indicator(label, 2, 2)
    if name == "g1":
        return _indicator(label, 2, 1) - _indicator(label, 3, 1)
    if name == "g2":
        return _indicator(label, 2, 2) - _indicator(label, 3, 2)
    if name in ("f", "parity"):
        return _parity(label)
    raise KeyError(name)


def infer_family_set(hamiltonians) -> FamilySet:
    labels = set(hamiltonians)
    for label in labels:
        check_label(label)
    if labels <= {1, 2, 3}:
        return FamilySet.a3
    if labels <= {1, 4}:
        return FamilySet.udd
    return FamilySet.s3


def family_values(hamiltonians, family_set: FamilySet, normalize: bool = True) -> SwitchingFunctions:
    """
    Per-interval values of every family. With normalize=False the S3 parity
    family (the equal even/odd weighting condition) is left out.
    """
    for label in hamiltonians:
        check_label(label)
    names = FAMILY_NAMES[family_set]
    if family_set is FamilySet.s3 and not normalize:
        names = names[:-1]
    values = np.array([[_value(name, h) for h in hamiltonians] for name in names], dtype=float)
    return SwitchingFunctions(names=names, values=values)
