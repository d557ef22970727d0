"""Signed decomposition of a diagonal target state into PhAC states.

The target is approximated as ``sum_j c_j rho(alpha_j)`` with real, possibly
negative ``c_j``, unit trace ``sum_j c_j = 1`` and per-coefficient bounds
``|c_j| <= B_j``. Negative weights are realised by a binary sign ancilla
(:func:`sign_split`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .fock import DEFAULT_N_MAX, FockVector, fidelity_to_single_photon, poisson_weights
from .qp import solve_lsq

DEFAULT_GRID = (0.05, 0.1, 0.2, 0.4, 0.8, 1.45)
BOUNDS_LOOSE = (40.0,) * 6
BOUNDS_TIGHT = (5.0, 10.0, 10.0, 10.0, 10.0, 10.0)


class InfeasibleBounds(ValueError):
    """The trace constraint cannot be met within the coefficient bounds."""


class DegenerateGrid(ValueError):
    """Two grid amplitudes coincide."""


@dataclass(frozen=True)
class AmplitudeGrid:
    amplitudes: tuple[float, ...]

    def __post_init__(self):
        a = tuple(float(v) for v in self.amplitudes)
        if not a:
            raise ValueError("amplitude grid is empty")
        if not all(math.isfinite(v) and v >= 0 for v in a):
            raise ValueError("amplitudes must be finite and non-negative")
        for lo, hi in zip(a, a[1:]):
            if abs(hi - lo) <= 1e-12:
                raise DegenerateGrid(f"amplitudes {lo} and {hi} coincide")
            if hi < lo:
                raise ValueError("amplitudes must be strictly increasing")
        object.__setattr__(self, "amplitudes", a)

    def __len__(self):
        return len(self.amplitudes)

    def as_array(self) -> np.ndarray:
        return np.array(self.amplitudes)


@dataclass(frozen=True)
class CoefficientBounds:
    per_coefficient_max: tuple[float, ...]

    def __post_init__(self):
        b = tuple(float(v) for v in self.per_coefficient_max)
        if not all(v > 0 and math.isfinite(v) for v in b):
            raise ValueError("coefficient bounds must be positive and finite")
        object.__setattr__(self, "per_coefficient_max", b)

    @classmethod
    def uniform(cls, value: float, count: int) -> "CoefficientBounds":
        return cls((float(value),) * count)

    def __len__(self):
        return len(self.per_coefficient_max)

    def as_array(self) -> np.ndarray:
        return np.array(self.per_coefficient_max)


@dataclass(frozen=True)
class Decomposition:
    """Grid, signed coefficients and fit diagnostics.

    ``fidelity`` and ``l2_residual`` are ``None`` once the decomposition has
    been rescaled, since they refer to the unscaled target.
    """

    grid: AmplitudeGrid
    coefficients: tuple[float, ...]
    fidelity: float | None = None
    l2_residual: float | None = None
    negativity: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        c = tuple(float(v) for v in self.coefficients)
        if len(c) != len(self.grid):
            raise ValueError("one coefficient per grid amplitude required")
        if abs(math.fsum(c) - 1.0) > 1e-9:
            raise ValueError(f"coefficients must sum to 1, got {math.fsum(c)!r}")
        object.__setattr__(self, "coefficients", c)

    @property
    def total_weight(self) -> float:
        return math.fsum(abs(v) for v in self.coefficients)

    @classmethod
    def single(cls, amplitude: float, n_max: int = DEFAULT_N_MAX) -> "Decomposition":
        """Pure PhAC state as a one-term decomposition."""
        grid = AmplitudeGrid((amplitude,))
        rec = poisson_weights(amplitude, n_max)
        return cls(grid, (1.0,), fidelity=float(rec[1]) if n_max >= 1 else 0.0,
                   l2_residual=None, negativity=0.0)


@dataclass(frozen=True)
class AncillaRepresentation:
    """Sign-ancilla form: ``(|c|, alpha)`` pairs conditioned on ``|+>``/``|->``."""

    positive_branch: tuple[tuple[float, float], ...]
    negative_branch: tuple[tuple[float, float], ...]
    total_weight: float

    def sample_probabilities(self) -> list[tuple[float, int, float]]:
        """``(alpha, sign, |c|/C)`` for drawing probe states."""
        c = self.total_weight
        out = [(a, +1, w / c) for a, w in self.positive_branch]
        out += [(a, -1, w / c) for a, w in self.negative_branch]
        return out


def phac_basis(grid: AmplitudeGrid, n_max: int = DEFAULT_N_MAX) -> np.ndarray:
    """Matrix whose column j holds the truncated Poisson weights of alpha_j."""
    return np.column_stack([poisson_weights(a, n_max) for a in grid.amplitudes])


def fit_target(
    target: FockVector,
    grid: AmplitudeGrid,
    bounds: CoefficientBounds,
    n_max: int = DEFAULT_N_MAX,
    *,
    nonnegative: bool = False,
) -> Decomposition:
    """Bound-constrained signed fit of ``target`` by PhAC states on ``grid``.

    Minimizes ``sum_{n <= n_max} (target_n - recon_n)^2`` subject to
    ``sum c = 1`` and ``|c_j| <= B_j``. With ``nonnegative=True`` the
    reconstruction is additionally kept physical (``recon_n >= 0``).
    """
    if target.signed:
        raise ValueError("target must be a physical FockVector")
    if len(bounds) != len(grid):
        raise ValueError(f"{len(bounds)} bounds for {len(grid)} amplitudes")
    b = bounds.as_array()
    if math.fsum(b) < 1.0:
        raise InfeasibleBounds(f"sum of bounds {math.fsum(b):g} < 1; unit trace unreachable")

    basis = phac_basis(grid, n_max)
    t = target.padded(n_max)
    J = len(grid)

    eye = np.eye(J)
    a_in = [eye, -eye]
    b_in = [-b, -b]
    if nonnegative:
        norms = np.linalg.norm(basis, axis=1)
        keep = norms > 0
        a_in.append(basis[keep] / norms[keep, None])
        b_in.append(np.zeros(int(keep.sum())))
    # positive and inside every box, hence feasible for all constraints
    x0 = b / b.sum()
    res = solve_lsq(basis, t, np.ones((1, J)), [1.0], np.vstack(a_in), np.concatenate(b_in), x0)

    c = np.clip(res.x, -b, b)
    # land exactly on the trace; the correction is at the 1e-16 level
    c = c + (1.0 - math.fsum(c)) / J
    meta = {"nonnegative": nonnegative, "n_max": n_max,
            "bounds": tuple(bounds.per_coefficient_max)}
    return _with_diagnostics(grid, c, t, n_max, meta)


def _with_diagnostics(grid, c, target, n_max, meta) -> Decomposition:
    basis = phac_basis(grid, n_max)
    rec = basis @ np.asarray(c)
    return Decomposition(
        grid=grid,
        coefficients=tuple(float(v) for v in c),
        fidelity=float(rec[1]) if n_max >= 1 else 0.0,
        l2_residual=float(np.linalg.norm(rec - target)),
        negativity=float(np.maximum(0.0, -rec).sum()),
        meta=meta,
    )


def fit_single_photon(grid=DEFAULT_GRID, bounds=BOUNDS_LOOSE, n_max: int = DEFAULT_N_MAX,
                      **kwargs) -> Decomposition:
    """Convenience wrapper: fit ``|1><1|`` on plain sequences."""
    g = grid if isinstance(grid, AmplitudeGrid) else AmplitudeGrid(tuple(grid))
    bd = bounds if isinstance(bounds, CoefficientBounds) else CoefficientBounds(tuple(bounds))
    return fit_target(FockVector.fock_state(1, n_max), g, bd, n_max, **kwargs)


def reconstruct(dec: Decomposition, n_max: int = DEFAULT_N_MAX) -> FockVector:
    """Signed Fock vector ``sum_j c_j phac(alpha_j)``."""
    return FockVector(phac_basis(dec.grid, n_max) @ np.array(dec.coefficients), signed=True)


def sign_split(dec: Decomposition) -> AncillaRepresentation:
    pos = tuple((a, c) for a, c in zip(dec.grid.amplitudes, dec.coefficients) if c > 0)
    neg = tuple((a, -c) for a, c in zip(dec.grid.amplitudes, dec.coefficients) if c < 0)
    return AncillaRepresentation(pos, neg, dec.total_weight)


def scale(dec: Decomposition, x: float) -> Decomposition:
    """Rescale every probe amplitude by ``x``; coefficients are unchanged."""
    if not x > 0:
        raise ValueError("scale factor must be positive")
    if x == 1.0:
        return dec
    grid = AmplitudeGrid(tuple(x * a for a in dec.grid.amplitudes))
    n_max = dec.meta.get("n_max", DEFAULT_N_MAX)
    rec = phac_basis(grid, n_max) @ np.array(dec.coefficients)
    return replace(dec, grid=grid, fidelity=None, l2_residual=None,
                   negativity=float(np.maximum(0.0, -rec).sum()),
                   meta={**dec.meta, "scale": dec.meta.get("scale", 1.0) * x})


def single_photon_fidelity(dec: Decomposition, n_max: int = DEFAULT_N_MAX) -> float:
    return fidelity_to_single_photon(reconstruct(dec, n_max))


# -- flat text record ---------------------------------------------------------

def _fmt_opt(v):
    return "na" if v is None else repr(float(v))


def dump_record(dec: Decomposition) -> str:
    """Serialize as ``# key=value`` header lines plus ``index,amplitude,coefficient`` rows."""
    lines = [
        f"# fidelity={_fmt_opt(dec.fidelity)}",
        f"# residual={_fmt_opt(dec.l2_residual)}",
        f"# negativity={dec.negativity!r}",
        f"# total_weight={dec.total_weight!r}",
    ]
    for key in ("nonnegative", "n_max", "scale"):
        if key in dec.meta:
            lines.append(f"# {key}={dec.meta[key]}")
    lines.append("index,amplitude,coefficient")
    for j, (a, c) in enumerate(zip(dec.grid.amplitudes, dec.coefficients), start=1):
        lines.append(f"{j},{a!r},{c!r}")
    return "\n".join(lines) + "\n"


def load_record(text: str) -> Decomposition:
    header: dict[str, str] = {}
    amps, coefs = [], []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            header[key.strip()] = value.strip()
            continue
        if line.startswith("index"):
            continue
        idx, a, c = line.split(",")
        if int(idx) != len(amps) + 1:
            raise ValueError(f"record rows out of order at index {idx}")
        amps.append(float(a))
        coefs.append(float(c))

    def opt(key):
        v = header.get(key, "na")
        return None if v == "na" else float(v)

    meta = {}
    if "nonnegative" in header:
        meta["nonnegative"] = header["nonnegative"] == "True"
    if "n_max" in header:
        meta["n_max"] = int(header["n_max"])
    if "scale" in header:
        meta["scale"] = float(header["scale"])
    return Decomposition(AmplitudeGrid(tuple(amps)), tuple(coefs), fidelity=opt("fidelity"),
                         l2_residual=opt("residual"), negativity=float(header.get("negativity", 0.0)),
                         meta=meta)
