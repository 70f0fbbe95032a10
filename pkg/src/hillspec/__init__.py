"""Spectra of higher-order periodic operators with distributional potentials.

The operator (-d^2/dx^2)^m + V on the period [-1, 1] is studied in the Fourier
basis e^{ik pi x}, where it acts as D_m + B(v): a diagonal with entries
(k pi)^{2m} plus the Toeplitz convolution by the coefficients v(k).
"""

__version__ = "0.1.0"

from .seqspace import CoeffSeq, SpaceSpec, SplitPotential, make_potential, split_tail, weighted_norm
from .operator import OperatorSpec, TruncatedOperator, assemble, free_eigenvalue
from .eig import EigenSolverError, SpectrumResult, spectrum, truncation_study
from .locate import localization_report, min_certificate, asymptotic_ratios

__all__ = [
    "__version__",
    "CoeffSeq",
    "SpaceSpec",
    "SplitPotential",
    "make_potential",
    "split_tail",
    "weighted_norm",
    "OperatorSpec",
    "TruncatedOperator",
    "assemble",
    "free_eigenvalue",
    "EigenSolverError",
    "SpectrumResult",
    "spectrum",
    "truncation_study",
    "localization_report",
    "min_certificate",
    "asymptotic_ratios",
]
