"""Inverse spectral solver for Sturm-Liouville operators with a
piecewise-constant density.

The library recovers the potential q(x) of

    -y'' + q(x) y = lambda^2 rho(x) y,   y'(0) = 0,  y(pi) = 0,

with rho = 1 on [0, a] and rho = alpha^2 on (a, pi], from the spectral
data {lambda_n, alpha_n} (eigenvalues and norming numbers).  The solver
discretizes the main integral equation for the transformation-operator
kernel A(x, .) slice by slice; an independent shooting-method forward
solver provides oracle spectra and verification.

Setting the environment variable ``SLGL_THREADS`` to a positive integer
caps the BLAS/OpenMP thread pools; the cap must take effect before numpy
is first imported, so it is applied here, at package import time
(malformed values are ignored; the CLI validates them separately).
"""

import os as _os


def _cap_threads() -> None:
    cap = _os.environ.get("SLGL_THREADS")
    if not cap:
        return
    try:
        n = max(1, int(cap))
    except ValueError:
        return
    for var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
        "VECLIB_MAXIMUM_THREADS",
    ):
        _os.environ.setdefault(var, str(n))


_cap_threads()

from .density import DensityProfile, mu
from .baseline import BaselineSpectrum, baseline_spectrum, delta0, phi0
from .forward import (
    AsymptoticsReport,
    PotentialSpec,
    SpectralData,
    characteristic,
    check_asymptotics,
    eigenvalues,
    integrate_phi,
    norming_numbers,
    spectral_data,
)
from .kernels import KernelSeries, KernelTables, b_series, build_tables, complete_tail
from .glm import SliceSystem, TriangularKernel, assemble_slice, solve_kernel, solve_slice
from .reconstruct import (
    ReconstructionResult,
    potential_from_kernel,
    reconstruct_full,
    verification_suite,
    verify_boundary,
    verify_orthogonality,
    verify_parseval,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticsReport",
    "BaselineSpectrum",
    "DensityProfile",
    "KernelSeries",
    "KernelTables",
    "PotentialSpec",
    "ReconstructionResult",
    "SliceSystem",
    "SpectralData",
    "TriangularKernel",
    "assemble_slice",
    "b_series",
    "baseline_spectrum",
    "build_tables",
    "characteristic",
    "check_asymptotics",
    "complete_tail",
    "delta0",
    "eigenvalues",
    "integrate_phi",
    "mu",
    "norming_numbers",
    "phi0",
    "potential_from_kernel",
    "reconstruct_full",
    "solve_kernel",
    "solve_slice",
    "spectral_data",
    "verification_suite",
    "verify_boundary",
    "verify_orthogonality",
    "verify_parseval",
]
