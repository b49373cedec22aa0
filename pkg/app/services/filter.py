"""
Filter functions and the decoherence integral.

For a switching function with interval values f_k on [0, 1] (boundaries
t_0 = 0 < t_1 < ... < t_N = 1) and x = omega*T:

    filter(x) = |sum_k f_k (e^{i x t_k} - e^{i x t_(k-1)})|^2 = omega^2 |f(omega)|^2

and chi(T) = int_0^inf (d omega / 2 pi) S(omega) filter(omega T) / omega^2.
"""
import logging
import math

import numpy as np
from scipy import integrate

from app.config import get_settings
from app.exceptions import InputError, IntegrationError
from app.models.sequence import SwitchingFunctions
from app.models.spectra import FilterCurve, SpectralDensity

logger = logging.getLogger(__name__)
settings = get_settings()

PANEL = math.pi / 2.0          # quadrature panel width in omega*T
TAIL_PANELS = 16               # panels per block for tail convergence and extrapolation


def _boundaries(times) -> np.ndarray:
    return np.array([0.0, *np.asarray(times, dtype=float), 1.0])


def _edge_weights(values) -> np.ndarray:
    """d_j = f_j - f_(j+1) at every boundary, with f = 0 outside [0, 1]."""
    padded = np.concatenate(([0.0], np.asarray(values, dtype=float), [0.0]))
    return padded[:-1] - padded[1:]


def _amplitude(values, times, omega_t) -> np.ndarray:
    """sum_j d_j e^{i x t_j}, equal to i x times the normalised transform."""
    x = np.atleast_1d(np.asarray(omega_t, dtype=float))
    phases = np.exp(1j * np.outer(x, _boundaries(times)))
    return phases @ _edge_weights(values)


def _select(functions: SwitchingFunctions | np.ndarray, which) -> np.ndarray:
    if isinstance(functions, SwitchingFunctions):
        return functions.row(which)
    values = np.asarray(functions, dtype=float)
    return values if values.ndim == 1 else values[which]


# ---------------------------------------------------------------------------
# Filter values and curves
# ---------------------------------------------------------------------------

def filter_value(functions, which, times, omega_t):
    """omega^2 |f|^2 for one switching function, scalar or array in omega*T."""
    values = _select(functions, which)
    if len(values) != len(times) + 1:
        raise ValueError(f"{len(values)} interval values need {len(values) - 1} switching times")
    out = np.abs(_amplitude(values, times, omega_t)) ** 2
    return float(out[0]) if np.ndim(omega_t) == 0 else out


def default_grid(points: int | None = None, lo: float | None = None, hi: float | None = None) -> np.ndarray:
    lo = settings.filter_grid_min if lo is None else lo
    hi = settings.filter_grid_max if hi is None else hi
    if not 0 < lo <= hi:
        raise InputError(f"filter grid needs 0 < lo <= hi, got {lo}, {hi}")
    points = settings.filter_grid_points if points is None else points
    return np.logspace(math.log10(lo), math.log10(hi), points)


def filter_curve(functions: SwitchingFunctions, which, times, grid=None) -> FilterCurve:
    omega_t = default_grid() if grid is None else np.asarray(grid, dtype=float)
    name = functions.names[functions.index(which)]
    return FilterCurve(name=name, omega_t=omega_t, values=filter_value(functions, which, times, omega_t))


def low_frequency_slope(functions, which, times, omega_t=(1e-2, 2e-2)) -> float:
    """Log-log slope of the filter between two small omega*T values."""
    lo, hi = omega_t
    a, b = filter_value(functions, which, times, np.array([lo, hi]))
    if a <= 0.0 or b <= 0.0:
        raise ValueError("switching function has no weight at low frequency")
    return float(math.log(b / a) / math.log(hi / lo))


def time_reverse(values, times) -> tuple[np.ndarray, np.ndarray]:
    """Interval values reversed and switching times reflected about 1/2."""
    return np.asarray(values, dtype=float)[::-1].copy(), np.sort(1.0 - np.asarray(times, dtype=float))


# ---------------------------------------------------------------------------
# Decoherence integral
# ---------------------------------------------------------------------------

def _normalised_power(values, times, x: float) -> float:
    """|int_0^1 f(s) e^{i x s} ds|^2."""
    if x == 0.0:
        return float(np.dot(values, np.diff(_boundaries(times)))) ** 2
    return float(np.abs(_amplitude(values, times, x)[0]) ** 2) / (x * x)


def _quad(func, a: float, b: float) -> float:
    value, abserr = integrate.quad(func, a, b, epsrel=settings.chi_rel_tolerance, epsabs=0.0, limit=200)
    if not math.isfinite(value) or abserr > max(1e-6 * abs(value), 1e-300):
        raise IntegrationError(f"quadrature on [{a:.4g}, {b:.4g}] failed (value {value:.3e}, error {abserr:.1e})")
    return value


def _panel_edges(lo: float, hi: float, width: float, features) -> np.ndarray:
    edges = np.arange(lo, hi, width)
    extra = [f for f in features if lo < f < hi]
    return np.unique(np.concatenate((edges, extra, [hi])))


def chi(S: SpectralDensity, functions, which, times, T: float) -> float:
    """
    chi(T) by Gauss-Kronrod panels of width pi/(2T) in omega.

    Finite-cutoff densities are integrated on [lower, upper]; otherwise panels
    are added until the last TAIL_PANELS together change the total by less
    than the relative tolerance, and the rest of the tail is extrapolated from
    a power law fitted to the last two blocks of TAIL_PANELS. A non-decaying
    integrand raises IntegrationError.
    """
    if T <= 0:
        raise ValueError(f"T must be positive, got {T}")
    values = _select(functions, which)

    def integrand(omega: float) -> float:
        # S(w) filter(wT)/w^2 = S(w) T^2 |F(wT)|^2
        return float(S(omega)) * T * T * _normalised_power(values, times, omega * T) / (2.0 * math.pi)

    width = PANEL / T
    if S.has_cutoff:
        edges = _panel_edges(S.lower, S.upper, width, S.features)
        if len(edges) - 1 > settings.chi_max_panels:
            raise IntegrationError(f"{len(edges) - 1} quadrature panels exceed the limit {settings.chi_max_panels}")
        return float(sum(_quad(integrand, a, b) for a, b in zip(edges, edges[1:])))

    start_tail = max((S.lower, *S.features)) + width
    edges = _panel_edges(S.lower, start_tail, width, S.features)
    total = sum(_quad(integrand, a, b) for a, b in zip(edges, edges[1:]))
    parts: list[float] = []
    a = float(edges[-1])
    for _ in range(settings.chi_max_panels):
        part = _quad(integrand, a, a + width)
        total += part
        a += width
        parts.append(abs(part))
        if len(parts) < 2 * TAIL_PANELS:
            continue
        older = sum(parts[-2 * TAIL_PANELS:-TAIL_PANELS])
        newer = sum(parts[-TAIL_PANELS:])
        if total == 0.0 and newer == 0.0:
            return 0.0
        if newer > settings.chi_rel_tolerance * abs(total):
            continue
        remainder = _power_law_tail(older, newer, a, TAIL_PANELS * width)
        if remainder is not None:
            return float(total + remainder)
    raise IntegrationError(
        f"decoherence integral for {S.name!r} did not converge within {settings.chi_max_panels} panels"
    )


def _power_law_tail(older: float, newer: float, end: float, span: float) -> float | None:
    """
    Integral beyond `end` of the power law C w^-p through two adjacent block
    sums of width `span`, or None when the blocks do not decay faster than 1/w.
    """
    if newer <= 0.0:
        return 0.0
    if older <= 0.0:
        return None
    p = math.log(older / newer) / math.log((end - 0.5 * span) / (end - 1.5 * span))
    if p <= 1.0:
        return None
    # tail / last block = 1 / ((1 - span/end)^(1-p) - 1)
    return newer / math.expm1(min((1.0 - p) * math.log1p(-span / end), 700.0))


def decoherence_function(chi_value: float) -> float:
    """W = exp(-chi)."""
    if chi_value < 0:
        raise ValueError(f"chi must be non-negative, got {chi_value}")
    return math.exp(-chi_value)


def dephasing_fidelity(W: float) -> float:
    """Fidelity of an equatorial qubit state after dephasing with coherence W."""
    return 0.5 * (1.0 + W)


def parseval_integral(functions, which, times, omega_t_max: float = 2000.0) -> float:
    """
    int_0^inf (dx / pi) |F(x)|^2; equals int_0^1 f(s)^2 ds.

    Integrated to omega_t_max by panels, plus the averaged 1/x^2 tail.
    """
    values = _select(functions, which)
    edges = _panel_edges(0.0, omega_t_max, PANEL, ())
    body = sum(
        integrate.quad(lambda x: _normalised_power(values, times, x), a, b, epsrel=1e-10, limit=200)[0]
        for a, b in zip(edges, edges[1:])
    )
    mean_power = float(np.sum(_edge_weights(values) ** 2))
    return (body + mean_power / omega_t_max) / math.pi
