"""Command-line front end: ``rfhom {fit,sweep-phac,sweep-conditional,oracle,snr}``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, RunSettings, load_config
from .decomposition import (AmplitudeGrid, CoefficientBounds, Decomposition, DegenerateGrid,
                            InfeasibleBounds, dump_record, fit_target, load_record)
from .experiment import (SweepConfig, default_delay_grid, oracle_curve, run_conditional_hom,
                         run_phac_hom, write_curve_csv)
from .fock import FockVector
from .waveform import NoiseModel, PulseSpec, calibrate_noise, snr_db

COMMANDS = ("fit", "sweep-phac", "sweep-conditional", "oracle", "snr")
DEFAULT_OUTPUT = {
    "fit": "decomposition.txt",
    "sweep-phac": "hom_phac.csv",
    "sweep-conditional": "hom_conditional.csv",
    "oracle": "oracle.csv",
}


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _snr_spec(text: str) -> tuple[float, float]:
    db, _, amp = text.partition("@")
    try:
        return float(db), float(amp or 0.4)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X@AMP, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI run configuration")
    common.add_argument("--output", type=Path, help="output file (or stem for several curves)")
    common.add_argument("--seed", type=int)
    common.add_argument("--noiseless", action="store_true", help="disable all noise")
    common.add_argument("--shots", type=int, help="noise realizations per (pair, phase, delay)")
    common.add_argument("--phases", type=int, help="relative phases on [-pi, pi)")
    common.add_argument("--delays", type=int, help="points on the delay grid")
    common.add_argument("--snr-db", type=_snr_spec, metavar="X@AMP",
                        help="calibrate source noise to X dB at relative amplitude AMP")
    common.add_argument("--plot", type=Path, help="also write an SVG plot")
    common.add_argument("--grid", type=_floats, help="comma-separated amplitudes")
    common.add_argument("--bounds", type=_floats, help="|c_j| bounds: one value or one per amplitude")
    common.add_argument("--nonnegative", action="store_true", help="keep the fitted state physical")
    common.add_argument("--decomposition", type=Path, help="decomposition record from `fit`")
    common.add_argument("--amplitude", type=_floats, help="PhAC amplitude(s) for sweep-phac/oracle")
    common.add_argument("--workers", type=int, help="worker processes for sweeps")
    common.add_argument("--kind", choices=("phac", "single", "conditional", "all"), default="all",
                        help="oracle curve(s) to emit")
    common.add_argument("--dump-trace", type=Path, help="write one synthesized pulse as time,re,im text")

    parser = argparse.ArgumentParser(prog="rfhom", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def settings_from_args(args) -> RunSettings:
    s = load_config(args.config) if args.config else RunSettings()
    if args.seed is not None:
        s.seed = args.seed
    if args.shots is not None:
        s.shots = args.shots
    if args.phases is not None:
        s.phase_count = args.phases
    if args.delays is not None:
        s.delays = args.delays
    if args.snr_db is not None:
        s.snr_db, s.snr_reference_amplitude = args.snr_db
        s.source_variance = None
    if args.grid is not None:
        s.grid = args.grid
    if args.bounds is not None:
        s.bounds = args.bounds
    if args.nonnegative:
        s.nonnegative = True
    if args.workers is not None:
        s.workers = args.workers
    return s


def noise_model(s: RunSettings, noiseless: bool) -> NoiseModel:
    if noiseless:
        return NoiseModel(0.0, 0.0, s.seed)
    var = s.source_variance
    if var is None:
        var = calibrate_noise(s.snr_reference_amplitude, s.snr_db)
    return NoiseModel(var, s.coupler_variance, s.seed)


def sweep_config(s: RunSettings, amplitudes, mode: str, noiseless: bool) -> SweepConfig:
    noise = noise_model(s, noiseless)
    shots = 1 if noise.noiseless else (s.shots or 200)
    return SweepConfig(
        amplitudes=amplitudes,
        mode=mode,
        pulse=PulseSpec(s.carrier_freq, s.cycles_per_pulse, s.samples_per_cycle),
        noise=noise,
        phase_count=s.phase_count,
        delay_grid=default_delay_grid(s.delays, s.delay_half_width),
        shots_per_point=shots,
        normalization=s.normalization,
        baseline_min_delay=s.baseline_min_delay,
        record_taus=s.record_taus,
        gate=s.gate,
        subtract_noise_baseline=s.subtract_noise_baseline,
        noise_method=s.noise_method,
    )


def _fit(s: RunSettings) -> Decomposition:
    grid = AmplitudeGrid(tuple(s.grid))
    bounds = CoefficientBounds(s.bounds_for(len(grid)))
    return fit_target(FockVector.fock_state(1, s.n_max), grid, bounds, s.n_max,
                      nonnegative=s.nonnegative)


def _curve_paths(output: Path, labels: list[str]) -> list[Path]:
    if len(labels) == 1:
        return [output]
    return [output.with_name(f"{output.stem}_{label}{output.suffix or '.csv'}") for label in labels]


def _plot(path: Path, curves, oracles, labels) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for curve, oracle, label in zip(curves, oracles, labels):
        line, = ax.plot(curve.delays, curve.g2_normalized, ".", ms=3, label=label)
        if oracle is not None:
            ax.plot(oracle.delays, oracle.g2_normalized, "-", lw=1, color=line.get_color())
    ax.axhline(0.5, color="grey", ls=":", lw=1)
    ax.set_xlabel(r"$\delta\tau/\tau$")
    ax.set_ylabel(r"$g^{(2)}_{12}$ (normalized)")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def cmd_fit(args, s: RunSettings) -> int:
    dec = _fit(s)
    out = args.output or Path(DEFAULT_OUTPUT["fit"])
    out.write_text(dump_record(dec))
    print(f"fidelity={dec.fidelity!r}")
    print(f"residual={dec.l2_residual!r}")
    print(f"negativity={dec.negativity!r}")
    print(f"total_weight={dec.total_weight!r}")
    return 0


def cmd_sweep(args, s: RunSettings) -> int:
    out = args.output or Path(DEFAULT_OUTPUT[args.command])
    if args.command == "sweep-phac":
        amps = args.amplitude or tuple(s.grid)
        cfg = sweep_config(s, AmplitudeGrid(tuple(amps)), "phac_pairs", args.noiseless)
        curves = run_phac_hom(cfg, workers=s.workers)
        labels = [f"alpha{a:g}" for a in amps]
        oracles = [oracle_curve("phac", cfg, amplitude=a) for a in amps]
    else:
        dec = load_record(args.decomposition.read_text()) if args.decomposition else _fit(s)
        cfg = sweep_config(s, dec, "conditional", args.noiseless)
        curves = [run_conditional_hom(cfg, workers=s.workers)]
        labels = ["conditional"]
        oracles = [oracle_curve("conditional", cfg, decomposition=dec)]
    paths = _curve_paths(out, labels)
    for curve, path, label in zip(curves, paths, labels):
        curve.metadata["label"] = label
        write_curve_csv(curve, path)
        print(f"wrote {path}")
    if args.plot:
        _plot(args.plot, curves, oracles, labels)
        print(f"wrote {args.plot}")
    if args.dump_trace:
        from .waveform import synthesize

        tau = cfg.pulse.tau
        a = cfg.amplitudes.amplitudes[-1] if args.command == "sweep-phac" else 1.0
        trace = synthesize(cfg.pulse, a, 0.0, tau, cfg.record_taus * tau)
        args.dump_trace.write_text(trace.to_text())
    return 0


def cmd_oracle(args, s: RunSettings) -> int:
    cfg = sweep_config(s, AmplitudeGrid((1.0,)), "phac_pairs", noiseless=True)
    dec = load_record(args.decomposition.read_text()) if args.decomposition else None
    kinds = ["phac", "single", "conditional"] if args.kind == "all" else [args.kind]
    if dec is None and "conditional" in kinds:
        if args.kind == "conditional":
            raise ValueError("conditional oracle needs --decomposition")
        kinds.remove("conditional")
    amp = args.amplitude[0] if args.amplitude else None
    curves = [oracle_curve(k, cfg, amplitude=amp, decomposition=dec) for k in kinds]
    paths = _curve_paths(args.output or Path(DEFAULT_OUTPUT["oracle"]), kinds)
    for curve, path, kind in zip(curves, paths, kinds):
        curve.metadata["label"] = kind
        write_curve_csv(curve, path)
        print(f"wrote {path}")
    if args.plot:
        _plot(args.plot, curves, [None] * len(curves), kinds)
    return 0


def cmd_snr(args, s: RunSettings) -> int:
    noise = noise_model(s, noiseless=False)
    amps = args.amplitude or tuple(s.grid)
    print(f"source_variance={noise.source_variance!r}")
    for a in amps:
        print(f"amplitude={a:g} snr_db={snr_db(a, noise):.4f}")
    return 0


HANDLERS = {"fit": cmd_fit, "sweep-phac": cmd_sweep, "sweep-conditional": cmd_sweep,
            "oracle": cmd_oracle, "snr": cmd_snr}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = settings_from_args(args)
        return HANDLERS[args.command](args, settings)
    except (InfeasibleBounds, DegenerateGrid, ConfigError, ValueError, ArithmeticError, OSError) as exc:
        print(f"error: type={type(exc).__name__} message={str(exc)!r}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
