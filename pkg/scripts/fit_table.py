"""Fit diagnostics for the six-amplitude grid under both bound regimes."""

from rfhom.decomposition import BOUNDS_LOOSE, BOUNDS_TIGHT, DEFAULT_GRID, fit_single_photon
from rfhom.interference import conditional_g2_analytic

for nonneg in (False, True):
    for name, bounds in (("A", BOUNDS_LOOSE), ("B", BOUNDS_TIGHT)):
        dec = fit_single_photon(DEFAULT_GRID, bounds, nonnegative=nonneg)
        dip = conditional_g2_analytic(dec, 1.0)[1]
        coeffs = " ".join(f"{c:+.4f}" for c in dec.coefficients)
        print(f"{name} nonneg={nonneg!s:5} F={dec.fidelity:.6f} neg={dec.negativity:.2e} "
              f"dip={dip:+.4f} c=[{coeffs}]")
