"""Truncated Fock-space vectors for states diagonal in the photon-number basis."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_N_MAX = 32
TRACE_TOL = 1e-9


@dataclass(frozen=True)
class FockVector:
    """Photon-number weights p_0..p_{n_max}.

    ``signed=True`` marks reconstructions from signed mixtures, whose entries
    may be negative; physical vectors must be non-negative.
    """

    weights: np.ndarray
    signed: bool = False

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if not self.signed and np.any(w < 0):
            raise ValueError("physical FockVector has negative weights")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n_max(self) -> int:
        return self.weights.size - 1

    @property
    def trace(self) -> float:
        return float(math.fsum(self.weights))

    def is_normalized(self, tol: float = TRACE_TOL) -> bool:
        return abs(self.trace - 1.0) <= tol

    def padded(self, n_max: int) -> np.ndarray:
        """Weights zero-padded (or cut) to length ``n_max + 1``."""
        out = np.zeros(n_max + 1)
        k = min(n_max, self.n_max) + 1
        out[:k] = self.weights[:k]
        return out

    @classmethod
    def fock_state(cls, n: int, n_max: int = DEFAULT_N_MAX) -> "FockVector":
        if not 0 <= n <= n_max:
            raise ValueError(f"photon number {n} outside 0..{n_max}")
        w = np.zeros(n_max + 1)
        w[n] = 1.0
        return cls(w)

    @classmethod
    def vacuum(cls, n_max: int = DEFAULT_N_MAX) -> "FockVector":
        return cls.fock_state(0, n_max)


@dataclass(frozen=True)
class PhACSpec:
    """Phase-averaged coherent state of field amplitude ``|alpha|``."""

    amplitude: float

    def __post_init__(self):
        if not (math.isfinite(self.amplitude) and self.amplitude >= 0):
            raise ValueError(f"amplitude must be finite and >= 0, got {self.amplitude}")


def poisson_weights(amplitude: float, n_max: int) -> np.ndarray:
    # p_{n+1} = p_n * |a|^2 / (n+1); no factorials, no overflow
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    mean = float(amplitude) ** 2
    w = np.empty(n_max + 1)
    w[0] = math.exp(-mean)
    for n in range(n_max):
        w[n + 1] = w[n] * mean / (n + 1)
    return w


def phac_fock(spec: PhACSpec | float, n_max: int = DEFAULT_N_MAX) -> FockVector:
    """Poisson photon statistics of a PhAC state, truncated at ``n_max``.

    The truncated vector is not renormalized; see :func:`tail_mass`.
    """
    amp = spec.amplitude if isinstance(spec, PhACSpec) else PhACSpec(float(spec)).amplitude
    return FockVector(poisson_weights(amp, n_max))


def tail_mass(spec: PhACSpec | float, n_max: int = DEFAULT_N_MAX) -> float:
    """Probability mass above ``n_max`` dropped by truncation."""
    amp = spec.amplitude if isinstance(spec, PhACSpec) else PhACSpec(float(spec)).amplitude
    mean = amp * amp
    w = poisson_weights(amp, n_max)
    if mean == 0.0:
        return 0.0
    if w[-1] == 0.0:
        # underflowed head: nothing left to continue from
        return max(0.0, 1.0 - math.fsum(w))
    # 1 - sum(head) cancels catastrophically; sum the tail terms directly
    terms = []
    t, n, peak = w[-1], n_max, 0.0
    while True:
        t *= mean / (n + 1)
        n += 1
        if t == 0.0:
            break
        terms.append(t)
        peak = max(peak, t)
        if n > mean and t <= 1e-17 * peak:
            break
    return math.fsum(terms)


def moment_m2m4(fock: FockVector) -> tuple[float, float]:
    """First and second factorial moments ``(<n>, <n(n-1)>)``.

    For a diagonal state these are the normally ordered moments
    ``<a^dag a>`` and ``<a^dag^2 a^2>``.
    """
    n = np.arange(fock.weights.size, dtype=float)
    m2 = math.fsum(n * fock.weights)
    m4 = math.fsum(n * (n - 1.0) * fock.weights)
    return m2, m4


def fidelity_to_single_photon(fock: FockVector) -> float:
    """Overlap with ``|1><1|``, i.e. the one-photon weight."""
    if fock.n_max < 1:
        return 0.0
    return float(fock.weights[1])
