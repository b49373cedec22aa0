"""
Classical dephasing baths and the six-spin quantum bath.

Classical baths expose integrals(t0, t1) -> (3, K) array of int B_j(s) ds over
K sub-intervals, times in seconds, B in rad/s.
"""
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from app.config import get_settings

MHZ = 2.0 * math.pi * 1e6
KHZ = 2.0 * math.pi * 1e3


@dataclass(frozen=True)
class ClassicalBathModel:
    """
    B_j(t) = A sum_m a_jm cos(w_jm t + phi_jm), with sum_m a_jm^2 / 2 = 1 so
    that A is the RMS value of every bath.
    """
    rms: float                       # rad/s
    amplitudes: np.ndarray           # (3, M)
    frequencies: np.ndarray          # (3, M) rad/s
    phases: np.ndarray               # (3, M)

    @classmethod
    def draw(cls, rng: np.random.Generator, rms_mhz: float, bandwidth_mhz: float, modes: int) -> "ClassicalBathModel":
        a = rng.normal(size=(3, modes))
        a /= np.sqrt(np.sum(a ** 2, axis=1, keepdims=True) / 2.0)
        return cls(
            rms=rms_mhz * MHZ,
            amplitudes=a,
            frequencies=rng.uniform(0.0, bandwidth_mhz * MHZ, size=(3, modes)),
            phases=rng.uniform(0.0, 2.0 * math.pi, size=(3, modes)),
        )

    def value(self, j: int, t) -> np.ndarray:
        """B_j(t), j = 1..3."""
        t = np.asarray(t, dtype=float)
        w, a, p = self.frequencies[j - 1], self.amplitudes[j - 1], self.phases[j - 1]
        return self.rms * np.sum(a * np.cos(np.multiply.outer(t, w) + p), axis=-1)

    def integrals(self, t0, t1) -> np.ndarray:
        # sin(w t1 + p) - sin(w t0 + p) = 2 cos(w (t0 + t1)/2 + p) sin(w (t1 - t0)/2)
        t0 = np.asarray(t0, dtype=float)[None, :, None]
        t1 = np.asarray(t1, dtype=float)[None, :, None]
        w = self.frequencies[:, None, :]
        p = self.phases[:, None, :]
        a = self.amplitudes[:, None, :]
        half = 0.5 * (t1 - t0)
        # sin(w h) / w, with the w -> 0 limit h
        sinc_part = half * np.sinc(w * half / math.pi)
        terms = 2.0 * a * np.cos(w * 0.5 * (t0 + t1) + p) * sinc_part
        return self.rms * np.sum(terms, axis=-1)


@dataclass(frozen=True)
class ConstantBath:
    values: tuple[float, float, float]

    def integrals(self, t0, t1) -> np.ndarray:
        dt = np.asarray(t1, dtype=float) - np.asarray(t0, dtype=float)
        return np.outer(np.asarray(self.values, dtype=float), dt)


@dataclass(frozen=True)
class FunctionBath:
    """Arbitrary bath callables, integrated by adaptive quadrature."""
    funcs: Sequence[Callable[[float], float]]
    rel_tolerance: float = field(default_factory=lambda: get_settings().phase_quad_rel_tolerance)

    def integrals(self, t0, t1) -> np.ndarray:
        out = np.zeros((3, len(np.atleast_1d(t0))))
        for j, f in enumerate(self.funcs):
            for k, (a, b) in enumerate(zip(np.atleast_1d(t0), np.atleast_1d(t1))):
                out[j, k] = integrate.quad(f, a, b, epsrel=self.rel_tolerance, epsabs=0.0, limit=200)[0]
        return out


@dataclass(frozen=True)
class SpinBathModel:
    """
    H = J sum_j sum_{s in bath(j)} r_js sigma_j . I_s + beta sum_{s<s'} r_ss' I_s . I_s'

    Nine qubits: system qubits 1..3 then bath spins 4..9; system qubit j
    couples to bath spins 2j-1 and 2j. Spin operators are Pauli matrices.
    """
    J: float                         # rad/s
    beta: float                      # rad/s
    r_system: np.ndarray             # (3, 2)
    r_bath: np.ndarray               # (6, 6), upper triangle used

    N_QUBITS = 9
    BATH_DIM = 64

    @classmethod
    def draw(cls, rng: np.random.Generator, J_mhz: float, beta_khz: float) -> "SpinBathModel":
        return cls(
            J=J_mhz * MHZ,
            beta=beta_khz * KHZ,
            r_system=rng.uniform(0.0, 1.0, size=(3, 2)),
            r_bath=np.triu(rng.uniform(0.0, 1.0, size=(6, 6)), k=1),
        )

    def couplings(self) -> list[tuple[int, int, float]]:
        """(qubit a, qubit b, strength) over the nine-qubit register, 1-based."""
        out = []
        for j in range(1, 4):
            for slot in range(2):
                out.append((j, 3 + 2 * (j - 1) + slot + 1, self.J * self.r_system[j - 1, slot]))
        for s, t in combinations(range(6), 2):
            out.append((4 + s, 4 + t, self.beta * self.r_bath[s, t]))
        return out

    def hamiltonian(self) -> np.ndarray:
        """Dense 512x512 real matrix, using sigma.sigma = 2 SWAP - 1."""
        n = self.N_QUBITS
        dim = 2 ** n
        x = np.arange(dim)
        H = np.zeros((dim, dim))
        for a, b, c in self.couplings():
            sa, sb = n - a, n - b
            bit_a, bit_b = (x >> sa) & 1, (x >> sb) & 1
            swapped = x ^ (((bit_a ^ bit_b) << sa) | ((bit_a ^ bit_b) << sb))
            H[x, swapped] += 2.0 * c
            H[x, x] -= c
        return H
