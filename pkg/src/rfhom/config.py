"""Flat INI-style run configuration.

Every section and key is optional; unknown ones are rejected. Defaults
reproduce the 120 MHz / 82-cycle / 16-phase setup on the six-amplitude grid.

    [pulse]
    carrier_freq = 1.2e8          # Hz
    cycles_per_pulse = 82
    samples_per_cycle = 8

    [noise]
    source_variance = 1.6e-4      # per quadrature, per sample (overrides snr_db)
    coupler_variance = 0
    snr_db = 25                   # calibration target ...
    snr_reference_amplitude = 0.4 # ... at this relative amplitude
    seed = 0

    [sweep]
    phase_count = 16
    delays = 201                  # points on [-delay_half_width, +delay_half_width]
    delay_half_width = 1.5        # units of tau
    shots = 200                   # noisy runs; noiseless runs use 1
    record_taus = 3.0
    normalization = baseline      # or raw
    baseline_min_delay = 1.2
    gate = false
    subtract_noise_baseline = false
    noise_method = projected      # or samples
    workers = 1

    [fit]
    grid = 0.05, 0.1, 0.2, 0.4, 0.8, 1.45
    bounds = 40                   # one value for all, or one per amplitude
    n_max = 32
    nonnegative = false
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

from .decomposition import BOUNDS_LOOSE, DEFAULT_GRID
from .fock import DEFAULT_N_MAX

SCHEMA = {
    "pulse": {"carrier_freq": float, "cycles_per_pulse": int, "samples_per_cycle": int},
    "noise": {"source_variance": float, "coupler_variance": float, "snr_db": float,
              "snr_reference_amplitude": float, "seed": int},
    "sweep": {"phase_count": int, "delays": int, "delay_half_width": float, "shots": int,
              "record_taus": float, "normalization": str, "baseline_min_delay": float,
              "gate": bool, "subtract_noise_baseline": bool, "noise_method": str, "workers": int},
    "fit": {"grid": tuple, "bounds": tuple, "n_max": int, "nonnegative": bool},
}


class ConfigError(ValueError):
    pass


@dataclass
class RunSettings:
    carrier_freq: float = 1.2e8
    cycles_per_pulse: int = 82
    samples_per_cycle: int = 8
    source_variance: float | None = None
    coupler_variance: float = 0.0
    snr_db: float = 25.0
    snr_reference_amplitude: float = 0.4
    seed: int = 0
    phase_count: int = 16
    delays: int = 201
    delay_half_width: float = 1.5
    shots: int | None = None
    record_taus: float = 3.0
    normalization: str = "baseline"
    baseline_min_delay: float = 1.2
    gate: bool = False
    subtract_noise_baseline: bool = False
    noise_method: str = "projected"
    workers: int = 1
    grid: tuple = DEFAULT_GRID
    bounds: tuple = BOUNDS_LOOSE
    n_max: int = DEFAULT_N_MAX
    nonnegative: bool = False
    sources: list = field(default_factory=list)

    def bounds_for(self, count: int) -> tuple[float, ...]:
        b = tuple(self.bounds)
        if len(b) == 1:
            return b * count
        if len(b) != count:
            raise ConfigError(f"{len(b)} bounds given for {count} amplitudes")
        return b


def _convert(section, key, typ, raw: str):
    try:
        if typ is bool:
            v = raw.strip().lower()
            if v in ("1", "true", "yes", "on"):
                return True
            if v in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if typ is tuple:
            return tuple(float(x) for x in raw.replace(";", ",").split(",") if x.strip())
        return typ(raw.strip())
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from exc


def parse_config(text: str, settings: RunSettings | None = None) -> RunSettings:
    settings = settings or RunSettings()
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    cp.optionxform = str
    cp.read_string(text)
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            setattr(settings, key, _convert(section, key, SCHEMA[section][key], raw))
    return settings


def load_config(path) -> RunSettings:
    with open(path) as fh:
        settings = parse_config(fh.read())
    settings.sources.append(str(path))
    return settings
