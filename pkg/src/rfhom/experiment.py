"""Delay sweeps over amplitude pairs, relative phases and noise shots.

Every sweep point ``(j, k, d)`` (amplitude of arm 1, amplitude of arm 2,
delay index) draws from its own random stream derived from
``(seed, j, k, d)``, so the points can be evaluated in any order or split
across workers and merged afterwards with identical results.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .decomposition import AmplitudeGrid, Decomposition
from .interference import MomentTriple, couple_arrays, hybrid_couple, pulse_energy
from .waveform import ComplexTrace, DelayOutOfRange, NoiseModel, PulseSpec, add_noise

MODES = ("phac_pairs", "conditional")
NORMALIZATIONS = ("baseline", "raw")
NOISE_METHODS = ("projected", "samples")
CSV_COLUMNS = ("delta_tau_over_tau", "g2_raw", "g2_normalized", "stderr", "shots")


class ConfigMismatch(ValueError):
    pass


class DegenerateDenominator(ArithmeticError):
    pass


def default_delay_grid(points: int = 201, half_width: float = 1.5) -> tuple[float, ...]:
    return tuple(float(v) for v in np.linspace(-half_width, half_width, points))


@dataclass(frozen=True)
class SweepConfig:
    """Full description of one sweep.

    ``delay_grid`` is in units of the pulse width; ``record_taus`` is the
    detector integration record, also in pulse widths. ``amplitudes`` is an
    :class:`AmplitudeGrid` for ``phac_pairs`` (one equal-amplitude curve per
    entry) and a :class:`Decomposition` for ``conditional``.
    """

    amplitudes: AmplitudeGrid | Decomposition
    mode: str = "phac_pairs"
    pulse: PulseSpec = PulseSpec()
    noise: NoiseModel = NoiseModel()
    phase_count: int = 16
    delay_grid: tuple[float, ...] = field(default_factory=default_delay_grid)
    shots_per_point: int = 1
    normalization: str = "baseline"
    baseline_min_delay: float = 1.2
    record_taus: float = 3.0
    gate: bool = False
    subtract_noise_baseline: bool = False
    noise_method: str = "projected"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.mode == "phac_pairs" and not isinstance(self.amplitudes, AmplitudeGrid):
            raise ValueError("phac_pairs mode needs an AmplitudeGrid")
        if self.mode == "conditional" and not isinstance(self.amplitudes, Decomposition):
            raise ValueError("conditional mode needs a Decomposition")
        if self.phase_count < 2:
            raise ValueError("phase_count must be >= 2")
        if self.shots_per_point < 1:
            raise ValueError("shots_per_point must be >= 1")
        grid = tuple(float(v) for v in self.delay_grid)
        if not grid or any(b < a for a, b in zip(grid, grid[1:])):
            raise ValueError("delay grid must be non-empty and sorted")
        object.__setattr__(self, "delay_grid", grid)
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
        if self.noise_method not in NOISE_METHODS:
            raise ValueError(f"noise_method must be one of {NOISE_METHODS}")
        if max(abs(grid[0]), abs(grid[-1])) + 1.0 > self.record_taus + 1e-12:
            raise DelayOutOfRange("record too short for the largest delay")

    @property
    def seed(self) -> int:
        return self.noise.seed

    @property
    def record_samples(self) -> int:
        return int(round(self.record_taus * self.pulse.pulse_samples))

    def digest(self) -> str:
        """Short hash identifying every field that affects the sweep output."""
        def enc(v):
            if isinstance(v, Decomposition):
                return {"grid": v.grid.amplitudes, "coefficients": v.coefficients}
            if isinstance(v, AmplitudeGrid):
                return {"grid": v.amplitudes}
            if dataclasses.is_dataclass(v):
                return {f.name: enc(getattr(v, f.name)) for f in dataclasses.fields(v)}
            return v

        payload = json.dumps(enc(self), sort_keys=True, default=repr)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class Point:
    curve: int
    j: int
    k: int
    d: int
    a: float
    b: float
    weight: float


def sweep_points(config: SweepConfig) -> list[Point]:
    """All sweep points in canonical order."""
    pts = []
    if config.mode == "phac_pairs":
        for i, a in enumerate(config.amplitudes.amplitudes):
            for d in range(len(config.delay_grid)):
                pts.append(Point(i, i, i, d, a, a, 1.0))
    else:
        dec = config.amplitudes
        amps, c = dec.grid.amplitudes, dec.coefficients
        for j in range(len(amps)):
            for k in range(len(amps)):
                for d in range(len(config.delay_grid)):
                    pts.append(Point(0, j, k, d, amps[j], amps[k], c[j] * c[k]))
    return pts


def point_stream(seed: int, j: int, k: int, d: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(j, k, d)))


def delay_samples(delta_tau: float, pulse: PulseSpec) -> int:
    return int(round(delta_tau * pulse.pulse_samples))


def realized_delays(config: SweepConfig) -> np.ndarray:
    """Delay grid after quantization to whole samples, in units of tau."""
    n = config.pulse.pulse_samples
    return np.array([delay_samples(d, config.pulse) / n for d in config.delay_grid])


def _placement(k: int, n_pulse: int, n_rec: int) -> tuple[int, int]:
    span = n_pulse + abs(k)
    if span > n_rec:
        raise DelayOutOfRange(f"pulses spanning {span} samples exceed record of {n_rec}")
    lo = (n_rec - span) // 2
    s1 = lo if k >= 0 else lo - k
    return s1, s1 + k


def _phases(count: int) -> np.ndarray:
    return -math.pi + 2.0 * math.pi * np.arange(count) / count


def point_samples(a: float, b: float, delta_tau: float, config: SweepConfig,
                  stream: np.random.Generator | None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-shot, phase-averaged ``(E1, E2, E1*E2)`` in units of ``tau`` (energy / tau)."""
    pulse = config.pulse
    n_pulse, n_rec, dt = pulse.pulse_samples, config.record_samples, pulse.sample_period
    k = delay_samples(delta_tau, pulse)
    s1, s2 = _placement(k, n_pulse, n_rec)
    in1 = _synth(pulse, a, 0.0, s1, n_rec)
    in2 = np.stack([_synth(pulse, b, ph, s2, n_rec) for ph in _phases(config.phase_count)])
    if config.gate:
        lo, hi = min(s1, s2), max(s1, s2) + n_pulse
        in1, in2 = in1[lo:hi], in2[:, lo:hi]
    n_int = in1.shape[-1]
    norm = 1.0 / n_pulse  # sum |s|^2 dt / tau
    shots = config.shots_per_point
    noise = config.noise

    if noise.noiseless:
        o1, o2 = couple_arrays(in1[None, :], in2)
        e1 = np.sum(o1.real ** 2 + o1.imag ** 2, axis=-1) * norm
        e2 = np.sum(o2.real ** 2 + o2.imag ** 2, axis=-1) * norm
        one = np.ones(shots)
        return e1.mean() * one, e2.mean() * one, (e1 * e2).mean() * one

    if stream is None:
        raise ValueError("noisy sweep point needs a random stream")
    if config.noise_method == "samples":
        tau = n_pulse * dt
        e1, e2 = _noisy_energies_samples(in1, in2, noise, stream, shots, dt)
        e1, e2 = e1 / tau, e2 / tau
    else:
        e1, e2 = _noisy_energies_projected(in1, in2, noise, stream, shots)
        e1, e2 = e1 * norm, e2 * norm
    if config.subtract_noise_baseline:
        floor = 2.0 * (noise.source_variance + noise.coupler_variance) * n_int * norm
        e1, e2 = e1 - floor, e2 - floor
    return e1.mean(axis=1), e2.mean(axis=1), (e1 * e2).mean(axis=1)


def _synth(pulse: PulseSpec, amplitude: float, phase: float, start: int, n_rec: int) -> np.ndarray:
    s = np.zeros(n_rec, dtype=complex)
    s[start:start + pulse.pulse_samples] = amplitude * np.exp(1j * phase)
    return s


def _noisy_energies_samples(in1, in2, noise, stream, shots, dt):
    """Literal pipeline: noise at sources, coupler, noise at outputs, energy detection."""
    p = in2.shape[0]
    e1 = np.empty((shots, p))
    e2 = np.empty((shots, p))
    chunk = max(1, 2_000_000 // in2.size)
    for lo in range(0, shots, chunk):
        n = min(chunk, shots - lo)
        t1 = ComplexTrace(np.broadcast_to(in1, (n, p, in1.size)).copy(), dt)
        t2 = ComplexTrace(np.broadcast_to(in2, (n, p, in1.size)).copy(), dt)
        out = hybrid_couple(add_noise(t1, noise.source_variance, stream),
                            add_noise(t2, noise.source_variance, stream))
        o1 = add_noise(out.out1, noise.coupler_variance, stream)
        o2 = add_noise(out.out2, noise.coupler_variance, stream)
        e1[lo:lo + n] = pulse_energy(o1)
        e2[lo:lo + n] = pulse_energy(o2)
    return e1, e2


def _noisy_energies_projected(in1, in2, noise, stream, shots):
    """Exact draw of detector energies from three scalars per output.

    Output noise is white circular Gaussian with per-quadrature variance
    ``v = source + coupler`` and independent between ports (the coupler is
    unitary). Splitting it into the component along the clean output and
    the orthogonal remainder gives ``|s + w|^2 = |(|s| + z)|^2 + v chi2(2n-2)``.
    """
    o1, o2 = couple_arrays(in1[None, :], in2)
    n_int = o1.shape[-1]
    v = noise.source_variance + noise.coupler_variance
    amp = np.sqrt(np.stack([np.sum(np.abs(o1) ** 2, axis=-1),
                            np.sum(np.abs(o2) ** 2, axis=-1)], axis=-1))  # (P, 2)
    sd = math.sqrt(v)
    z = stream.standard_normal((shots,) + amp.shape + (2,)) * sd
    rest = stream.chisquare(2 * n_int - 2, (shots,) + amp.shape) * v if n_int > 1 else 0.0
    e = (amp + z[..., 0]) ** 2 + z[..., 1] ** 2 + rest
    return e[..., 0], e[..., 1]


def run_point(a: float, b: float, delta_tau: float, config: SweepConfig,
              stream: np.random.Generator | None = None) -> MomentTriple:
    """Phase- and shot-averaged moments for one amplitude pair and delay."""
    if a < 0 or b < 0:
        raise ValueError("amplitudes must be non-negative")
    e1, e2, e12 = point_samples(a, b, delta_tau, config, stream)
    return MomentTriple(float(e1.mean()), float(e2.mean()), float(e12.mean()))


# -- accumulation -------------------------------------------------------------

@dataclass
class CorrelationAccumulator:
    """Signed-weighted sums for one (curve, delay) cell.

    The per-shot arrays hold ``sum_points w * E`` for each shot index, so
    that shot-to-shot spread of the whole weighted estimator is available
    for error bars after any number of merges.
    """

    digest: str
    w_sum: float
    we1: np.ndarray
    we2: np.ndarray
    we1e2: np.ndarray

    @classmethod
    def empty(cls, digest: str, shots: int) -> "CorrelationAccumulator":
        z = np.zeros(shots)
        return cls(digest, 0.0, z.copy(), z.copy(), z.copy())

    @property
    def shot_count(self) -> int:
        return self.we1.size

    @property
    def we1_sum(self) -> float:
        return float(self.we1.mean())

    @property
    def we2_sum(self) -> float:
        return float(self.we2.mean())

    @property
    def we1e2_sum(self) -> float:
        return float(self.we1e2.mean())

    def add(self, weight: float, e1, e2, e12) -> None:
        self.w_sum += weight
        self.we1 += weight * np.asarray(e1)
        self.we2 += weight * np.asarray(e2)
        self.we1e2 += weight * np.asarray(e12)

    def copy(self) -> "CorrelationAccumulator":
        return CorrelationAccumulator(self.digest, self.w_sum, self.we1.copy(),
                                      self.we2.copy(), self.we1e2.copy())

    def ratio(self) -> tuple[float, float]:
        """``(g2, stderr)`` from the weighted means, delta-method error."""
        w = self.w_sum
        m1, m2, m12 = self.we1_sum / w, self.we2_sum / w, self.we1e2_sum / w
        if m1 <= 0 or m2 <= 0:
            raise DegenerateDenominator(f"weighted mean energy <= 0 ({m1:g}, {m2:g})")
        g = m12 / (m1 * m2)
        n = self.shot_count
        if n < 2:
            return g, 0.0
        # relative gradient of log g w.r.t. the three per-shot means
        samples = np.stack([self.we1e2 / w / m12, self.we1 / w / m1, self.we2 / w / m2])
        grad = np.array([1.0, -1.0, -1.0])
        cov = np.cov(samples) / n
        var = float(grad @ cov @ grad)
        return g, abs(g) * math.sqrt(max(var, 0.0))


def merge_accumulators(accs) -> CorrelationAccumulator:
    accs = list(accs)
    if not accs:
        raise ValueError("nothing to merge")
    digests = {a.digest for a in accs}
    if len(digests) > 1:
        raise ConfigMismatch(f"accumulators from different configs: {sorted(digests)}")
    if len({a.shot_count for a in accs}) > 1:
        raise ConfigMismatch("accumulators with different shot counts")
    out = accs[0].copy()
    for a in accs[1:]:
        out.w_sum += a.w_sum
        out.we1 += a.we1
        out.we2 += a.we2
        out.we1e2 += a.we1e2
    return out


def accumulate(config: SweepConfig, shard: int = 0, shard_count: int = 1
               ) -> dict[tuple[int, int], CorrelationAccumulator]:
    """Evaluate the points ``p`` with ``index(p) % shard_count == shard``.

    Returns accumulators keyed by ``(curve, delay index)``.
    """
    if not 0 <= shard < shard_count:
        raise ValueError("shard index out of range")
    digest = config.digest()
    shots = config.shots_per_point
    out: dict[tuple[int, int], CorrelationAccumulator] = {}
    for idx, p in enumerate(sweep_points(config)):
        if idx % shard_count != shard:
            continue
        stream = None if config.noise.noiseless else point_stream(config.seed, p.j, p.k, p.d)
        e1, e2, e12 = point_samples(p.a, p.b, config.delay_grid[p.d], config, stream)
        acc = out.setdefault((p.curve, p.d), CorrelationAccumulator.empty(digest, shots))
        acc.add(p.weight, e1, e2, e12)
    return out


def merge_shards(shards) -> dict[tuple[int, int], CorrelationAccumulator]:
    cells: dict[tuple[int, int], list] = {}
    for shard in shards:
        for key, acc in shard.items():
            cells.setdefault(key, []).append(acc)
    return {key: merge_accumulators(cells[key]) for key in sorted(cells)}


def _accumulate_parallel(config: SweepConfig, workers: int):
    if workers <= 1:
        return accumulate(config)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(accumulate, config, i, workers) for i in range(workers)]
        return merge_shards(f.result() for f in futures)


# -- curves -------------------------------------------------------------------

@dataclass
class HOMCurve:
    delays: np.ndarray
    g2_raw: np.ndarray
    g2_normalized: np.ndarray
    stderr: np.ndarray
    shots: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.delays)
        for name in ("g2_raw", "g2_normalized", "stderr", "shots"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} length differs from delays")

    def baseline_mask(self, min_delay: float = 1.2) -> np.ndarray:
        return np.abs(self.delays) >= min_delay - 1e-12


def curves_from_accumulators(config: SweepConfig, cells) -> list[HOMCurve]:
    delays = realized_delays(config)
    n_curves = len(config.amplitudes) if config.mode == "phac_pairs" else 1
    curves = []
    for ci in range(n_curves):
        raw = np.empty(len(delays))
        err = np.empty(len(delays))
        shots = np.empty(len(delays), dtype=int)
        for d in range(len(delays)):
            acc = cells[(ci, d)]
            raw[d], err[d] = acc.ratio()
            shots[d] = acc.shot_count
        meta = {"config_digest": config.digest(), "seed": config.seed, "mode": config.mode,
                "normalization": config.normalization}
        if config.mode == "phac_pairs":
            meta["amplitude"] = config.amplitudes.amplitudes[ci]
        else:
            dec = config.amplitudes
            meta["fidelity"] = dec.fidelity
            meta["total_weight"] = dec.total_weight
            # signed weights inflate shot-noise variance by roughly C^2
            meta["variance_inflation"] = dec.total_weight ** 2
        if config.normalization == "baseline":
            mask = np.abs(delays) >= config.baseline_min_delay - 1e-12
            if not mask.any():
                raise ValueError(f"no delays with |delay| >= {config.baseline_min_delay} for the baseline")
            base = float(raw[mask].mean())
            norm, nerr = raw / base, err / abs(base)
            meta["baseline"] = base
        else:
            norm, nerr = raw.copy(), err
        meta["stderr_column"] = "normalized" if config.normalization == "baseline" else "raw"
        curves.append(HOMCurve(delays, raw, norm, nerr, shots, meta))
    return curves


def run_phac_hom(config: SweepConfig, workers: int = 1) -> list[HOMCurve]:
    """One equal-amplitude curve per entry of the amplitude grid."""
    if config.mode != "phac_pairs":
        raise ValueError("run_phac_hom needs mode='phac_pairs'")
    return curves_from_accumulators(config, _accumulate_parallel(config, workers))


def run_conditional_hom(config: SweepConfig, workers: int = 1) -> HOMCurve:
    """Signed ``c_j c_k`` weighted curve for the conditionally built state."""
    if config.mode != "conditional":
        raise ValueError("run_conditional_hom needs mode='conditional'")
    return curves_from_accumulators(config, _accumulate_parallel(config, workers))[0]


# -- CSV ----------------------------------------------------------------------

def _num(v: float) -> str:
    return f"{v:.8e}"


def format_curve_csv(curve: HOMCurve) -> str:
    """Header comments plus fixed 9-significant-digit rows, LF endings."""
    lines = []
    for key in ("config_digest", "seed", "mode", "fidelity", "amplitude", "label"):
        if key in curve.metadata:
            v = curve.metadata[key]
            lines.append(f"# {key}={'na' if v is None else v}")
    lines.append(",".join(CSV_COLUMNS))
    for row in zip(curve.delays, curve.g2_raw, curve.g2_normalized, curve.stderr, curve.shots):
        lines.append(",".join([_num(row[0]), _num(row[1]), _num(row[2]), _num(row[3]), str(int(row[4]))]))
    return "\n".join(lines) + "\n"


def write_curve_csv(curve: HOMCurve, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(format_curve_csv(curve))


def parse_curve_csv(text: str) -> HOMCurve:
    meta: dict = {}
    rows = []
    for line in text.splitlines():
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key] = value
            continue
        if line.startswith(CSV_COLUMNS[0]):
            continue
        rows.append([float(v) for v in line.split(",")])
    for key in ("seed",):
        if key in meta:
            meta[key] = int(meta[key])
    for key in ("fidelity", "amplitude"):
        if key in meta:
            meta[key] = None if meta[key] == "na" else float(meta[key])
    arr = np.array(rows, dtype=float).reshape(-1, len(CSV_COLUMNS))
    return HOMCurve(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], arr[:, 4].astype(int), meta)


def read_curve_csv(path) -> HOMCurve:
    with open(path) as fh:
        return parse_curve_csv(fh.read())


def oracle_curve(kind: str, config: SweepConfig | None = None, *, amplitude: float | None = None,
                 decomposition: Decomposition | None = None) -> HOMCurve:
    """Closed-form curve on the (quantized) delay grid of ``config``.

    ``kind`` is ``"phac"``, ``"single"`` or ``"conditional"``. The single-photon
    raw column uses the exact ``|1>`` moments, whose far-delay baseline is 1/2.
    """
    from .interference import conditional_g2_analytic, g2_phac_analytic, g2_single_analytic, overlap_f

    if config is None:
        config = SweepConfig(AmplitudeGrid((1.0,)))
    delays = realized_delays(config)
    f = [overlap_f(d, 1.0) for d in delays]
    meta = {"config_digest": config.digest(), "seed": config.seed, "mode": f"oracle-{kind}"}
    if kind == "phac":
        raw = np.array([g2_phac_analytic(x) for x in f])
        norm = raw.copy()
        if amplitude is not None:
            meta["amplitude"] = amplitude
    elif kind == "single":
        norm = np.array([g2_single_analytic(x) for x in f])
        raw = norm / 2.0
        meta["fidelity"] = 1.0
    elif kind == "conditional":
        if decomposition is None:
            raise ValueError("conditional oracle needs a decomposition")
        pairs = np.array([conditional_g2_analytic(decomposition, x) for x in f])
        raw, norm = pairs[:, 0], pairs[:, 1]
        meta["fidelity"] = decomposition.fidelity
    else:
        raise ValueError(f"unknown oracle kind {kind!r}")
    n = len(delays)
    return HOMCurve(delays, raw, norm, np.zeros(n), np.zeros(n, dtype=int), meta)
