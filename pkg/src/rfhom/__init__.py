"""Radio-frequency HOM interference with conditionally built single-photon states."""

from .decomposition import (AmplitudeGrid, CoefficientBounds, Decomposition, fit_single_photon,
                            fit_target, reconstruct, scale, sign_split)
from .experiment import SweepConfig, run_conditional_hom, run_phac_hom, run_point
from .fock import FockVector, PhACSpec, moment_m2m4, phac_fock, tail_mass

__all__ = [
    "AmplitudeGrid", "CoefficientBounds", "Decomposition", "FockVector", "PhACSpec",
    "SweepConfig", "fit_single_photon", "fit_target", "moment_m2m4", "phac_fock",
    "reconstruct", "run_conditional_hom", "run_phac_hom", "run_point", "scale",
    "sign_split", "tail_mass",
]
