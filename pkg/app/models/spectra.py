"""
Filter curves and noise spectral densities.
"""
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import pandas as pd


@dataclass(frozen=True)
class FilterCurve:
    name: str
    omega_t: np.ndarray         # dimensionless omega*T grid
    values: np.ndarray          # omega^2 |f(omega)|^2, dimensionless

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"omegaT": self.omega_t, "filter_value": self.values})


@dataclass(frozen=True)
class SpectralDensity:
    """
    One-sided S(omega), omega and S in rad/s.

    The integration domain is [lower, upper]; upper may be infinite, in which
    case the integral is extended panel by panel until the tail converges.
    features are frequencies the quadrature must split at (peak centres, edges).
    """
    func: Callable[[float], float]
    name: str = "custom"
    lower: float = 0.0
    upper: float = math.inf
    features: tuple[float, ...] = field(default=())

    def __call__(self, omega):
        return self.func(omega)

    @property
    def has_cutoff(self) -> bool:
        return math.isfinite(self.upper)

    # --- constructors -------------------------------------------------------

    @classmethod
    def zero(cls) -> "SpectralDensity":
        return cls(func=lambda w: 0.0 * w, name="zero")

    @classmethod
    def gaussian_peak(cls, weight: float, omega0: float, width: float) -> "SpectralDensity":
        """Normalised Gaussian of total weight `weight` centred on omega0."""
        norm = weight / (math.sqrt(2.0 * math.pi) * width)

        def func(w):
            return norm * np.exp(-0.5 * ((w - omega0) / width) ** 2)

        lo = max(0.0, omega0 - 12.0 * width)
        hi = omega0 + 12.0 * width
        marks = tuple(x for x in (omega0 - 3 * width, omega0, omega0 + 3 * width) if lo < x < hi)
        return cls(func=func, name="gaussian", lower=lo, upper=hi, features=marks)

    @classmethod
    def lorentzian(cls, amplitude: float, omega0: float, width: float) -> "SpectralDensity":
        def func(w):
            return amplitude * width ** 2 / ((w - omega0) ** 2 + width ** 2)

        return cls(func=func, name="lorentzian", features=(omega0,) if omega0 > 0 else ())

    @classmethod
    def ohmic(cls, alpha: float, omega_c: float) -> "SpectralDensity":
        def func(w):
            return alpha * w * np.exp(-w / omega_c)

        return cls(func=func, name="ohmic", features=(omega_c,))

    @classmethod
    def one_over_f(cls, amplitude: float, omega_ir: float, omega_c: float) -> "SpectralDensity":
        if not 0.0 < omega_ir < omega_c:
            raise ValueError("need 0 < omega_ir < omega_c")

        def func(w):
            return amplitude / w

        return cls(func=func, name="one-over-f", lower=omega_ir, upper=omega_c)
