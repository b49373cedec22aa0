"""
Infidelity sweeps and power-law fits.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd

from app.schemas.schemas import BathKindEnum, FitSummaryDocument


@dataclass(frozen=True)
class FitResult:
    exponent: float
    intercept: float            # natural log of the prefactor
    r2: float
    ci95: float                 # half-width of the 95% interval on the exponent
    points: int


@dataclass
class SweepResult:
    kind: BathKindEnum
    orders: list[int]
    T_us: np.ndarray                    # (points,)
    trials: int
    mean: np.ndarray                    # (orders, points)
    stderr: np.ndarray                  # (orders, points)
    window: tuple[float, float]
    fits: dict[int, Optional[FitResult]] = field(default_factory=dict)

    @property
    def empty_windows(self) -> list[int]:
        return [n for n, fit in self.fits.items() if fit is None]

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for i, n in enumerate(self.orders):
            for k, T in enumerate(self.T_us):
                rows.append({
                    "kind": self.kind.value,
                    "order": n,
                    "T_us": float(T),
                    "trials": self.trials,
                    "mean_infidelity": float(self.mean[i, k]),
                    "stderr": float(self.stderr[i, k]),
                })
        return pd.DataFrame(rows, columns=["kind", "order", "T_us", "trials", "mean_infidelity", "stderr"])

    def fit_summaries(self) -> list[FitSummaryDocument]:
        out = []
        for n in self.orders:
            fit = self.fits.get(n)
            out.append(FitSummaryDocument(
                kind=self.kind,
                order=n,
                exponent=None if fit is None else fit.exponent,
                expected_exponent=2 * (n + 1),
                r2=None if fit is None else fit.r2,
                ci95=None if fit is None else fit.ci95,
                points=0 if fit is None else fit.points,
                window=self.window,
                window_empty=fit is None,
            ))
        return out
