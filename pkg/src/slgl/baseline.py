"""Unperturbed (q = 0) spectral objects.

For the zero potential the problem has closed-form solutions

    phi0(x, lam) = (1/2)(1 + 1/sqrt(rho)) cos(lam mu_plus(x))
                 + (1/2)(1 - 1/sqrt(rho)) cos(lam mu_minus(x)),

a characteristic function Delta0(lam) = phi0(pi, lam) whose positive
zeros lam_n^0 are the baseline eigenvalues, and baseline norming numbers
alpha_n^0 = int rho phi0^2.  These anchor both the data asymptotics and
the kernel series of the main equation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .density import DensityProfile

__all__ = [
    "BaselineSpectrum",
    "baseline_spectrum",
    "bisect_many",
    "delta0",
    "phi0",
    "piece_nodes",
    "scan_zeros",
    "simpson_weights",
]


def phi0(profile: DensityProfile, x, lam) -> np.ndarray:
    """Zero-potential solution, shape (len(x), len(lam)).

    Scalar inputs are broadcast; the result always carries both axes.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    s = profile.srho(x)[:, None]
    mp = profile.mu_plus(x)[:, None]
    mm = profile.mu_minus(x)[:, None]
    L = lam[None, :]
    return 0.5 * (1.0 + 1.0 / s) * np.cos(L * mp) + 0.5 * (1.0 - 1.0 / s) * np.cos(L * mm)


def delta0(profile: DensityProfile, lam) -> np.ndarray:
    """Baseline characteristic function phi0(pi, lam); even in lam."""
    lam = np.asarray(lam, dtype=float)
    al = profile.alpha
    mp = profile.mu_span
    mm = -al * np.pi + profile.a * (1.0 + al)
    return 0.5 * (1.0 + 1.0 / al) * np.cos(lam * mp) + 0.5 * (1.0 - 1.0 / al) * np.cos(
        lam * mm
    )


def bisect_many(f, lo, hi, iters: int = 80) -> np.ndarray:
    """Vectorized bisection on brackets [lo_i, hi_i] with sign changes."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        left = (flo * fm) <= 0
        hi = np.where(left, mid, hi)
        lo = np.where(left, lo, mid)
        flo = np.where(left, flo, fm)
        if np.max(hi - lo) < 1e-13:
            break
    return 0.5 * (lo + hi)


def scan_zeros(f, n_max: int, step: float, lam_max: float) -> np.ndarray:
    """First ``n_max`` positive zeros of ``f`` by sign scan + bisection.

    The scan starts just above lambda = 0 so a zero at the origin is
    never reported.  Raises when the window holds too few brackets.
    """
    grid = np.arange(0.0, lam_max, step)
    vals = f(grid)
    sgn = np.sign(vals)
    idx = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]
    if len(idx) < n_max:
        raise RuntimeError(
            f"scan resolution error: bracketed only {len(idx)} of {n_max} "
            f"zeros on [0, {lam_max:.3f}] with step {step:.4f}"
        )
    idx = idx[:n_max]
    return bisect_many(f, grid[idx], grid[idx + 1])


def simpson_weights(n: int, h: float) -> np.ndarray:
    """Composite Simpson weights for n intervals (n even), n+1 nodes."""
    if n % 2 != 0:
        raise ValueError("Simpson rule needs an even interval count")
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * h / 3.0


def piece_nodes(x0: float, x1: float, lam_max: float, srho: float, min_n: int = 64):
    """Simpson grid on one smooth piece, >= 64 panels per half wavelength
    of the fastest integrand cos(lam srho x)^2."""
    L = x1 - x0
    half_wave = np.pi / (2.0 * max(lam_max, 1.0) * srho)
    n = max(min_n, int(np.ceil(64 * L / half_wave)))
    n += n % 2
    return np.linspace(x0, x1, n + 1), L / n


@dataclass(frozen=True)
class BaselineSpectrum:
    """First ``n_max`` baseline eigenvalues and norming numbers."""

    profile: DensityProfile
    n_max: int
    lambdas0: np.ndarray
    normings0: np.ndarray

    def __post_init__(self) -> None:
        if len(self.lambdas0) != self.n_max or len(self.normings0) != self.n_max:
            raise ValueError("stored arrays must have length n_max")
        if np.any(np.diff(self.lambdas0) <= 0) or np.any(self.lambdas0 <= 0):
            raise ValueError("baseline eigenvalues must be positive and increasing")
        if np.any(self.normings0 <= 0):
            raise ValueError("baseline norming numbers must be positive")


def baseline_spectrum(profile: DensityProfile, n_max: int) -> BaselineSpectrum:
    """Locate the zeros of Delta0 and integrate the norming numbers.

    The sign scan uses step pi / (8 mu_plus(pi)), well below the minimal
    zero spacing of the two-frequency cosine sum, and refines each
    bracket by bisection.  Norming integrals use composite Simpson on
    each smooth piece so the interface kink never sits inside a panel.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    mupi = profile.mu_span
    step = np.pi / (8.0 * mupi)
    lam_max = (n_max + 5) * np.pi / mupi + 2.0
    lam0 = scan_zeros(lambda l: delta0(profile, l), n_max, step, lam_max)
    gaps = np.diff(lam0)
    if np.any(gaps < step / 4.0):
        warnings.warn(
            "near-double baseline eigenvalues detected; distinctness of the "
            "spectrum is assumed by the inverse problem",
            RuntimeWarning,
            stacklevel=2,
        )
    xl, hl = piece_nodes(0.0, profile.a, lam0[-1], 1.0)
    xr, hr = piece_nodes(profile.a, np.pi, lam0[-1], profile.alpha)
    wl = simpson_weights(len(xl) - 1, hl)
    wr = simpson_weights(len(xr) - 1, hr)
    al0 = wl @ phi0(profile, xl, lam0) ** 2 + profile.alpha**2 * (
        wr @ phi0(profile, xr, lam0) ** 2
    )
    return BaselineSpectrum(profile=profile, n_max=n_max, lambdas0=lam0, normings0=al0)
