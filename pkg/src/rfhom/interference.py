"""Hybrid coupler, energy detection, and closed-form HOM oracles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decomposition import Decomposition
from .waveform import ComplexTrace

INV_SQRT2 = 1.0 / math.sqrt(2.0)


class GridMismatch(ValueError):
    pass


class DegenerateState(ValueError):
    pass


@dataclass(frozen=True)
class CouplerOutput:
    out1: ComplexTrace
    out2: ComplexTrace


@dataclass(frozen=True)
class MomentTriple:
    """Phase-averaged detector energies ``<E1>``, ``<E2>`` and ``<E1 E2>``."""

    e1_mean: float
    e2_mean: float
    e1e2_mean: float

    @property
    def g2(self) -> float:
        return self.e1e2_mean / (self.e1_mean * self.e2_mean)


def couple_arrays(in1: np.ndarray, in2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Coupler unitary on raw sample arrays (broadcasts over leading axes)."""
    return (in1 + 1j * in2) * INV_SQRT2, (1j * in1 + in2) * INV_SQRT2


def hybrid_couple(in1: ComplexTrace, in2: ComplexTrace) -> CouplerOutput:
    """90 degree hybrid: ``((in1 + i in2)/sqrt2, (i in1 + in2)/sqrt2)``."""
    if not in1.same_grid(in2):
        raise GridMismatch("coupler inputs sampled on different grids")
    o1, o2 = couple_arrays(in1.samples, in2.samples)
    return CouplerOutput(ComplexTrace(o1, in1.sample_period, in1.start_time),
                         ComplexTrace(o2, in1.sample_period, in1.start_time))


def pulse_energy(trace: ComplexTrace):
    """``sum |s_k|^2 dt`` over the record; batched traces reduce the last axis."""
    s = trace.samples
    e = np.sum(s.real ** 2 + s.imag ** 2, axis=-1) * trace.sample_period
    return float(e) if np.ndim(e) == 0 else e


def overlap_f(delta_tau: float, tau: float) -> float:
    """Fractional overlap of two width-``tau`` rectangles shifted by ``delta_tau``."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    d = abs(delta_tau)
    return 1.0 - d / tau if d <= tau else 0.0


def _check_f(f):
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"overlap must lie in [0, 1], got {f}")


def g2_phac_analytic(f: float) -> float:
    _check_f(f)
    return 1.0 - f * f / 2.0


def g2_single_analytic(f: float) -> float:
    """Baseline-normalized dip for two single photons."""
    _check_f(f)
    return 1.0 - f * f


def classical_moments(a: float, b: float, f: float) -> MomentTriple:
    """Relative-phase-averaged coupler energies for coherent inputs ``a``, ``b`` (tau = 1).

    Per relative phase ``phi``: ``E1,2 = (a^2+b^2)/2 -/+ f a b sin(phi)``;
    averaging ``sin^2`` to 1/2 gives the product term.
    """
    if a < 0 or b < 0:
        raise ValueError("amplitudes must be non-negative")
    _check_f(f)
    s = (a * a + b * b) / 2.0
    return MomentTriple(s, s, s * s - f * f * a * a * b * b / 2.0)


def decomposition_moments(dec: Decomposition) -> tuple[float, float]:
    """``(M2, M4) = (sum c a^2, sum c a^4)`` over the untruncated PhAC states."""
    c = np.array(dec.coefficients)
    a2 = dec.grid.as_array() ** 2
    return math.fsum(c * a2), math.fsum(c * a2 * a2)


def conditional_g2_analytic(dec: Decomposition, f: float) -> tuple[float, float]:
    """``(raw, normalized)`` dip of two identical signed mixtures at overlap ``f``."""
    _check_f(f)
    m2, m4 = decomposition_moments(dec)
    if m2 <= 0:
        raise DegenerateState(f"mean photon number {m2} <= 0")
    numerator = (m4 + m2 * m2) / 2.0 - f * f * m2 * m2 / 2.0
    return numerator / (m2 * m2), numerator / ((m4 + m2 * m2) / 2.0)
