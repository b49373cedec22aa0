"""
Pulse sequences and their switching functions.
"""
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.schemas.schemas import GroupEnum, PulseEnum


class PulseSequence(BaseModel):
    """
    N free-evolution intervals on [0, 1].

    hamiltonians[k] is the toggling-frame type of interval k, times are the
    N-1 interior switching times and pulses[k] is applied after interval k.
    """
    model_config = ConfigDict(frozen=True)

    group: GroupEnum
    order: int = Field(..., ge=0)
    hamiltonians: tuple[int, ...] = Field(..., min_length=1)
    times: tuple[float, ...]
    pulses: tuple[PulseEnum, ...]

    @field_validator("hamiltonians")
    @classmethod
    def labels_in_range(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        bad = [h for h in v if h not in range(1, 7)]
        if bad:
            raise ValueError(f"Hamiltonian labels must be 1..6, got {bad}")
        return v

    @model_validator(mode="after")
    def check_shape(self) -> "PulseSequence":
        if len(self.times) != len(self.hamiltonians) - 1:
            raise ValueError(
                f"{len(self.hamiltonians)} intervals need {len(self.hamiltonians) - 1} "
                f"switching times, got {len(self.times)}"
            )
        if len(self.pulses) != len(self.hamiltonians):
            raise ValueError("need exactly one pulse after every interval")
        bounds = (0.0, *self.times, 1.0)
        if any(b <= a for a, b in zip(bounds, bounds[1:])):
            raise ValueError("switching times must be strictly increasing inside (0, 1)")
        return self

    @property
    def n_intervals(self) -> int:
        return len(self.hamiltonians)

    @property
    def boundaries(self) -> np.ndarray:
        return np.array([0.0, *self.times, 1.0])

    @property
    def intervals(self) -> np.ndarray:
        return np.diff(self.boundaries)

    @property
    def pulse_names(self) -> tuple[str, ...]:
        return tuple(p.value for p in self.pulses)


@dataclass(frozen=True)
class SwitchingFunctions:
    """Per-interval values (-1, 0, 1) of each switching function family."""
    names: tuple[str, ...]
    values: np.ndarray          # (families, intervals)

    def __len__(self) -> int:
        return len(self.names)

    def index(self, which: int | str) -> int:
        if isinstance(which, str):
            if which not in self.names:
                raise KeyError(f"no switching function {which!r}; have {self.names}")
            return self.names.index(which)
        if not 0 <= which < len(self.names):
            raise IndexError(f"switching function index {which} out of range")
        return which

    def row(self, which: int | str) -> np.ndarray:
        return self.values[self.index(which)]

    @property
    def f3(self) -> np.ndarray:
        """-(f1 + f2); only meaningful for the A3 families."""
        return -(self.row("f1") + self.row("f2"))
