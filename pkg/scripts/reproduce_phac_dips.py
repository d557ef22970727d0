"""Noisy PhAC HOM dips on the six-amplitude grid (dip depth vs amplitude)."""

import argparse

from rfhom import AmplitudeGrid, SweepConfig, run_phac_hom
from rfhom.decomposition import DEFAULT_GRID
from rfhom.experiment import write_curve_csv
from rfhom.waveform import NoiseModel, calibrate_noise, snr_db


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--snr-db", type=float, default=25.0, help="SNR at relative amplitude 0.4")
    p.add_argument("--shots", type=int, default=200)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, help="optional CSV stem")
    args = p.parse_args()

    noise = NoiseModel(calibrate_noise(0.4, args.snr_db), 0.0, args.seed)
    cfg = SweepConfig(AmplitudeGrid(DEFAULT_GRID), noise=noise, shots_per_point=args.shots)
    print("amplitude  snr_db  min_g2  depth")
    for a, curve in zip(DEFAULT_GRID, run_phac_hom(cfg, workers=args.workers)):
        lo = curve.g2_normalized.min()
        print(f"{a:9.2f}  {snr_db(a, noise):6.2f}  {lo:6.3f}  {1 - lo:5.3f}")
        if args.out:
            write_curve_csv(curve, f"{args.out}_alpha{a:g}.csv")


if __name__ == "__main__":
    main()
