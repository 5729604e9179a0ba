"""Data-driven kernels of the main integral equation.

The input kernel is the paired difference series

    F0(xi, t) = sum_n [ phi0(t, lam_n) cos(lam_n xi) / alpha_n
                      - phi0(t, lam_n^0) cos(lam_n^0 xi) / alpha_n^0 ],

combined into

    F(x, t) = (1/2)(1 + 1/sqrt(rho(x))) F0(mu_plus(x), t)
            + (1/2)(1 - 1/sqrt(rho(x))) F0(mu_minus(x), t),

where F0 is even in its first argument (every term is a cosine), which
makes the mu_minus < 0 evaluations exact.  The series is always summed
pairwise: only the differences decay, never the halves separately.

``KernelSeries`` evaluates the series exactly where needed, including a
product-integration form (integrals of F0 against hat functions) that
integrates the cosine terms in closed form.  ``KernelTables`` offers a
sampled view for inspection and export.  ``complete_tail`` extends
measured data by fitting the almost-periodic asymptotic laws of the
eigenvalue shifts and norming ratios.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .baseline import BaselineSpectrum, phi0
from .density import DensityProfile
from .forward import SpectralData

__all__ = [
    "KernelSeries",
    "KernelTables",
    "b_series",
    "build_tables",
    "complete_tail",
    "hat_cos_weights",
]


def hat_cos_weights(xi: np.ndarray, lams) -> np.ndarray:
    """W[n, j] = closed-form integral of hat_j(s) cos(lam_n s) ds.

    hat_j is the piecewise-linear nodal basis on the (possibly nonuniform)
    grid ``xi``; the row W[n] therefore integrates any piecewise-linear
    function against cos(lam_n .) exactly.  A series expansion guards the
    small-argument limit of the closed forms.
    """
    lams = np.asarray(lams, dtype=float)
    x0, x1 = xi[:-1], xi[1:]
    h = x1 - x0
    L = lams[:, None]
    small = np.abs(L * h[None, :]) < 1e-6
    Ls = np.where(np.abs(L) < 1e-12, 1.0, L)
    s0, s1 = np.sin(Ls * x0[None, :]), np.sin(Ls * x1[None, :])
    c0, c1 = np.cos(Ls * x0[None, :]), np.cos(Ls * x1[None, :])
    I_tot = (s1 - s0) / Ls
    I_xcos = (x1[None, :] * s1 - x0[None, :] * s0) / Ls + (c1 - c0) / Ls**2
    I_right = (I_xcos - x0[None, :] * I_tot) / h[None, :]
    # the small-argument midpoint rule must use the true lam (L), not the
    # division-sanitized Ls, or the lam = 0 row would evaluate cos(mid)
    mid = 0.5 * (x0 + x1)[None, :] * np.ones_like(L)
    I_tot = np.where(small, h[None, :] * np.cos(L * mid), I_tot)
    I_right = np.where(small, 0.5 * h[None, :] * np.cos(L * mid), I_right)
    I_left = I_tot - I_right
    W = np.zeros((len(lams), len(xi)))
    W[:, :-1] += I_left
    W[:, 1:] += I_right
    return W


class KernelSeries:
    """Exact evaluator for F0 and F from spectral data and baseline.

    ``n_terms`` defaults to the full supplied data length; it may not
    exceed the length of either sequence.
    """

    def __init__(
        self,
        profile: DensityProfile,
        data: SpectralData,
        baseline: BaselineSpectrum,
        n_terms: int | None = None,
    ) -> None:
        n = len(data) if n_terms is None else int(n_terms)
        if n > len(data) or n > baseline.n_max:
            raise ValueError(
                f"n_terms={n} exceeds data length {len(data)} or baseline "
                f"length {baseline.n_max}"
            )
        self.profile = profile
        self.n_terms = n
        self.lam = np.asarray(data.lambdas[:n], dtype=float)
        self.al = np.asarray(data.normings[:n], dtype=float)
        self.lam0 = np.asarray(baseline.lambdas0[:n], dtype=float)
        self.al0 = np.asarray(baseline.normings0[:n], dtype=float)

    def f0(self, xi, t) -> np.ndarray:
        """F0 on the grid product xi x t, shape (len(xi), len(t))."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        t = np.atleast_1d(np.asarray(t, dtype=float))
        V = np.cos(np.outer(xi, self.lam))
        U = phi0(self.profile, t, self.lam) / self.al
        V0 = np.cos(np.outer(xi, self.lam0))
        U0 = phi0(self.profile, t, self.lam0) / self.al0
        return V @ U.T - V0 @ U0.T

    def f(self, x: float, t) -> np.ndarray:
        """Combined kernel F(x, t) for one slice position x."""
        s = float(self.profile.srho(x))
        mp = float(self.profile.mu_plus(x))
        mm = float(self.profile.mu_minus(x))
        F = 0.5 * (1.0 + 1.0 / s) * self.f0(np.array([abs(mp)]), t)
        F += 0.5 * (1.0 - 1.0 / s) * self.f0(np.array([abs(mm)]), t)
        return F[0]

    def f0_integrated(self, xi: np.ndarray, t) -> np.ndarray:
        """Product-integration matrix: entry (i, j) integrates F0(., t_i)
        against the hat function at node xi_j, exactly for the cosine
        series (piecewise-linear quadrature with no sampling error)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        W = hat_cos_weights(xi, self.lam)
        W0 = hat_cos_weights(xi, self.lam0)
        U = phi0(self.profile, t, self.lam) / self.al
        U0 = phi0(self.profile, t, self.lam0) / self.al0
        return U @ W - U0 @ W0


@dataclass(frozen=True)
class KernelTables:
    """Sampled F0 and F for inspection/export; finite by construction."""

    profile: DensityProfile
    n_terms: int
    xi_grid: np.ndarray
    t_grid: np.ndarray
    f0_grid: np.ndarray
    x_grid: np.ndarray
    f_grid: np.ndarray

    def __post_init__(self) -> None:
        if not (
            np.all(np.isfinite(self.f0_grid)) and np.all(np.isfinite(self.f_grid))
        ):
            raise ValueError("kernel tables contain non-finite samples")


def build_tables(
    profile: DensityProfile,
    data: SpectralData,
    baseline: BaselineSpectrum,
    n_xi: int = 257,
    n_t: int = 257,
    n_terms: int | None = None,
) -> KernelTables:
    """Tabulate F0 on [0, mu_plus(pi)] x [0, pi] and F on [0, pi] x [0, pi].

    The grids must resolve the highest retained frequency with at least
    4 samples per period; coarser grids are rejected.
    """
    series = KernelSeries(profile, data, baseline, n_terms)
    lam_top = max(series.lam[-1], series.lam0[-1])
    span = profile.mu_span
    if (n_xi - 1) / span < 4.0 * lam_top / (2.0 * np.pi) or (
        n_t - 1
    ) / np.pi < 4.0 * lam_top / (2.0 * np.pi):
        raise ValueError(
            "kernel table grid under-resolved: need >= 4 samples per period "
            f"of cos({lam_top:.2f} x)"
        )
    xi = np.linspace(0.0, span, n_xi)
    t = np.linspace(0.0, np.pi, n_t)
    x = np.linspace(0.0, np.pi, n_xi)
    f0g = series.f0(xi, t)
    fg = np.vstack([series.f(xv, t) for xv in x])
    return KernelTables(
        profile=profile,
        n_terms=series.n_terms,
        xi_grid=xi,
        t_grid=t,
        f0_grid=f0g,
        x_grid=x,
        f_grid=fg,
    )


def b_series(
    data: SpectralData,
    baseline: BaselineSpectrum,
    n_terms: int | None = None,
    n_grid: int = 401,
):
    """Smoothness diagnostic sum_n [cos(lam_n x)/(al_n lam_n^2) - baseline
    term] on a uniform grid; rejects zero eigenvalues."""
    n = len(data) if n_terms is None else int(n_terms)
    if n > len(data) or n > baseline.n_max:
        raise ValueError("n_terms exceeds available data")
    lam = data.lambdas[:n]
    lam0 = baseline.lambdas0[:n]
    if np.any(lam == 0) or np.any(lam0 == 0):
        raise ValueError("b series requires nonzero eigenvalues")
    al = data.normings[:n]
    al0 = baseline.normings0[:n]
    x = np.linspace(0.0, np.pi, n_grid)
    terms = np.cos(np.outer(x, lam)) / (al * lam**2) - np.cos(np.outer(x, lam0)) / (
        al0 * lam0**2
    )
    return x, terms.sum(axis=1)


def complete_tail(
    data: SpectralData, baseline: BaselineSpectrum, n_ext: int
) -> SpectralData:
    """Extend measured data to ``n_ext`` modes by asymptotic fitting.

    The eigenvalue shifts lambda_n^2 - (lambda_n^0)^2 and norming ratios
    alpha_n/alpha_n^0 - 1 of this operator family are asymptotically
    almost-periodic in lambda_n^0 with the interface frequency 2a (the
    shifts approach a three-term model [1, cos(2a lam), sin(2a lam)];
    the ratios carry an extra 1/lambda decay).  Both models are fitted
    on the trailing half of the supplied modes, where the asymptotic
    regime holds best, and evaluated on baseline indices N..n_ext.
    """
    N = len(data)
    if n_ext < N:
        raise ValueError("extension target shorter than supplied data")
    if n_ext > baseline.n_max:
        raise ValueError("baseline too short for requested extension")
    if n_ext == N:
        return data
    lam, al = data.lambdas, data.normings
    lam0 = baseline.lambdas0[:n_ext]
    al0 = baseline.normings0[:n_ext]
    a = data.profile.a
    shifts = lam**2 - lam0[:N] ** 2
    ratios = al / al0[:N] - 1.0
    cs = np.cos(2.0 * a * lam0)
    sn = np.sin(2.0 * a * lam0)
    sel = np.arange(N // 2, N)
    D = np.vstack([np.ones(N), cs[:N], sn[:N]]).T
    cf_s, *_ = np.linalg.lstsq(D[sel], shifts[sel], rcond=None)
    Dr = np.vstack([1.0 / lam0, cs / lam0, sn / lam0]).T
    cf_r, *_ = np.linalg.lstsq(Dr[:N][sel], ratios[sel], rcond=None)
    idx = np.arange(N, n_ext)
    sh_pred = np.vstack([np.ones(len(idx)), cs[idx], sn[idx]]).T @ cf_s
    rn_pred = Dr[idx] @ cf_r
    lam_ext = np.sqrt(np.maximum(lam0[idx] ** 2 + sh_pred, 1e-12))
    al_ext = al0[idx] * (1.0 + rn_pred)
    return SpectralData(
        profile=data.profile,
        lambdas=np.concatenate([lam, lam_ext]),
        normings=np.concatenate([al, al_ext]),
    )
