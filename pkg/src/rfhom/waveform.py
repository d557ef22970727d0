"""Complex-baseband rectangular RF pulses and fixed-PSD additive noise."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DelayOutOfRange(ValueError):
    pass


class UndefinedSNR(ValueError):
    pass


@dataclass(frozen=True)
class PulseSpec:
    carrier_freq: float = 1.2e8
    cycles_per_pulse: int = 82
    samples_per_cycle: int = 8
    envelope: str = "rectangular"

    def __post_init__(self):
        if not self.carrier_freq > 0:
            raise ValueError("carrier_freq must be positive")
        if self.cycles_per_pulse < 1:
            raise ValueError("cycles_per_pulse must be >= 1")
        if self.samples_per_cycle < 2:
            raise ValueError("samples_per_cycle must be >= 2")
        if self.envelope != "rectangular":
            raise ValueError(f"unsupported envelope {self.envelope!r}")

    @property
    def tau(self) -> float:
        """Pulse width in seconds."""
        return self.cycles_per_pulse / self.carrier_freq

    @property
    def sample_period(self) -> float:
        return 1.0 / (self.samples_per_cycle * self.carrier_freq)

    @property
    def pulse_samples(self) -> int:
        return self.cycles_per_pulse * self.samples_per_cycle


@dataclass(frozen=True)
class ComplexTrace:
    samples: np.ndarray
    sample_period: float
    start_time: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if not self.sample_period > 0:
            raise ValueError("sample_period must be positive")
        if not np.all(np.isfinite(s)):
            raise ValueError("trace samples must be finite")
        object.__setattr__(self, "samples", s)

    def __len__(self):
        return self.samples.shape[-1]

    def same_grid(self, other: "ComplexTrace") -> bool:
        return (len(self) == len(other) and self.sample_period == other.sample_period
                and self.start_time == other.start_time)

    def to_text(self) -> str:
        """Three-column dump ``time, re, im`` for inspection."""
        t = self.start_time + self.sample_period * np.arange(len(self))
        rows = (f"{ti:.9e},{s.real:.9e},{s.imag:.9e}" for ti, s in zip(t, self.samples))
        return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class NoiseModel:
    """Per-quadrature, per-sample Gaussian noise variances.

    Both variances are independent of the signal (fixed power spectral
    density). ``source_variance`` is added at each generator output,
    ``coupler_variance`` at each coupler output.
    """

    source_variance: float = 0.0
    coupler_variance: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.source_variance < 0 or self.coupler_variance < 0:
            raise ValueError("noise variances must be non-negative")

    @property
    def noiseless(self) -> bool:
        return self.source_variance == 0 and self.coupler_variance == 0


def delay_to_samples(delay: float, sample_period: float) -> int:
    # round half away from zero so +d and -d quantize symmetrically
    k = delay / sample_period
    return int(math.copysign(math.floor(abs(k) + 0.5), k))


def synthesize(spec: PulseSpec, amplitude: float, phase: float, delay: float,
               record_length: float) -> ComplexTrace:
    """Rectangular pulse ``amplitude * exp(i phase)`` starting ``delay`` seconds into the record.

    The delay is quantized to the nearest sample.
    """
    if amplitude < 0:
        raise ValueError("amplitude must be non-negative")
    dt = spec.sample_period
    n_rec = int(round(record_length / dt))
    n_pulse = spec.pulse_samples
    if n_rec < n_pulse:
        raise DelayOutOfRange(f"record of {n_rec} samples shorter than pulse ({n_pulse})")
    start = delay_to_samples(delay, dt)
    if start < 0 or start + n_pulse > n_rec:
        raise DelayOutOfRange(f"pulse [{start}, {start + n_pulse}) leaves record [0, {n_rec})")
    s = np.zeros(n_rec, dtype=complex)
    s[start:start + n_pulse] = amplitude * np.exp(1j * phase)
    return ComplexTrace(s, dt)


def add_noise(trace: ComplexTrace, variance: float, stream: np.random.Generator) -> ComplexTrace:
    """Add white complex Gaussian noise with ``variance`` per quadrature."""
    if variance < 0:
        raise ValueError("variance must be non-negative")
    if variance == 0:
        return trace
    sd = math.sqrt(variance)
    shape = trace.samples.shape
    noise = stream.normal(0.0, sd, shape) + 1j * stream.normal(0.0, sd, shape)
    return ComplexTrace(trace.samples + noise, trace.sample_period, trace.start_time)


def snr_db(amplitude: float, noise: NoiseModel | float) -> float:
    """In-pulse signal power over total noise power per sample, in dB."""
    var = noise.source_variance if isinstance(noise, NoiseModel) else float(noise)
    if var == 0:
        raise UndefinedSNR("SNR undefined for zero noise variance")
    if amplitude <= 0:
        raise ValueError("amplitude must be positive")
    return 10.0 * math.log10(amplitude ** 2 / (2.0 * var))


def calibrate_noise(reference_amplitude: float, target_snr_db: float) -> float:
    """Source variance that puts ``reference_amplitude`` at ``target_snr_db``."""
    if reference_amplitude <= 0:
        raise ValueError("reference amplitude must be positive")
    return reference_amplitude ** 2 / (2.0 * 10.0 ** (target_snr_db / 10.0))
