"""Slice-by-slice discretization and solve of the main integral equation.

For each position x the transformation kernel g(xi) = A(x, xi) on
[0, mu_plus(x)] satisfies a second-kind integral equation.  After the
change of variables s = mu_plus(t) the collocation row at node s_i with
t_i = mu_plus^{-1}(s_i) reads

    g(t_i) [2 / (1 + sqrt(rho(t_i)))]                       (identity part)
  + sum_{k>=1} g(t_i) beta^k A(x, mu_plus(t_i) + 2 a k)     (transmitted images)
  + [t_i <= a]  sum_{k>=0} beta^{k+1} A(x, mu_minus(t_i) + 2 a k)
                                                            (reflected images)
  + integral_0^{mu_plus(x)} A(x, xi) F0(xi, t_i) d xi  =  -F(x, t_i),

with beta = (1 - alpha) / (1 + alpha) the interface reflection
coefficient.  Image targets beyond mu_plus(x) vanish (the kernel is
zero-extended past its support).  The reflected-image sum stays active
at t_i = a: there its leading term lands on the diagonal and
1 + beta = 2 / (1 + alpha) matches the right-limit identity
coefficient, so the discrete rows are continuous across the interface.

The quadrature term uses product integration: A is represented as
piecewise linear on the slice grid and integrated against the cosine
series of F0 in closed form (see ``KernelSeries.f0_integrated``).

Slice grids align an exact lattice with spacing a/n1 across [0, a] and
beyond, so every image target 2ak away lands exactly on a node, and a
fixed narrow node pair straddles the kernel's jump at |mu_minus(x)| so
the jump geometry is independent of grid refinement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .density import DensityProfile
from .kernels import KernelSeries

__all__ = [
    "SliceSystem",
    "TriangularKernel",
    "assemble_slice",
    "slice_nodes",
    "solve_kernel",
    "solve_slice",
]

RESIDUAL_GATE = 1e-10


def slice_nodes(profile: DensityProfile, x: float, m: int) -> np.ndarray:
    """Quadrature/collocation nodes on [0, mu_plus(x)] for the slice at x.

    For x <= a the grid is uniform.  Past the interface the grid is the
    lattice j * (a/n1) spanning [0, a] and onward (so reflection targets
    2a - t and image targets t + 2ak land exactly on nodes), closed by
    the endpoint mu_plus(x), plus a fixed straddle pair at distance 1e-6
    around the kernel jump at |mu_minus(x)|.
    """
    a = profile.a
    top = float(profile.mu_plus(x))
    if x <= a or a >= top - 1e-12:
        return np.linspace(0.0, top, m + 1)
    h0 = top / m
    n1 = max(2, int(round(a / h0)))
    h1 = a / n1
    nodes = list(np.arange(0, n1 + 1) * h1)
    v = a + h1
    while v < top - 1e-9 * top:
        nodes.append(v)
        v += h1
    nodes.append(top)
    xi = np.array(nodes)
    xstar = abs(float(profile.mu_minus(x)))
    delta = 1e-6
    if 2 * delta < xstar < top - 2 * delta and abs(xstar - a) > 2 * delta:
        keep = np.abs(xi - xstar) > 0.25 * h1
        xi = np.concatenate([xi[keep], [xstar - delta, xstar + delta]])
    return np.sort(xi)


@dataclass
class SliceSystem:
    """Dense collocation system for one slice of the main equation."""

    x: float
    nodes: np.ndarray
    matrix: np.ndarray
    rhs: np.ndarray
    condition_estimate: Optional[float] = None
    residual: Optional[float] = None

    def __post_init__(self) -> None:
        n = len(self.nodes)
        if self.matrix.shape != (n, n):
            raise ValueError("system matrix must be square of the node count")
        if not np.all(np.isfinite(self.rhs)):
            raise ValueError("right-hand side contains non-finite values")


def assemble_slice(
    profile: DensityProfile,
    series: KernelSeries,
    x: float,
    m: int = 128,
    pin_origin: bool = False,
) -> SliceSystem:
    """Build the dense system for the slice at x (x in (0, pi]).

    ``pin_origin`` replaces the first collocation row by the constraint
    A(x, 0) = 0.  The identity A(x, 0) = 0 holds only for data whose
    zeroth spectral moments match the baseline's, which finite measured
    data never satisfies exactly, so the default keeps the honest
    collocation row at t = 0 (see the reconstruction notes in README).
    """
    if not (0.0 < x <= np.pi):
        raise ValueError("slice position must lie in (0, pi]")
    if m < 8:
        raise ValueError("at least 8 nodes per slice are required")
    a, alpha = profile.a, profile.alpha
    xi = slice_nodes(profile, x, m)
    n = len(xi)
    t = profile.mu_plus_inverse(xi)
    M = series.f0_integrated(xi, t)
    srt = profile.srho(t)
    M[np.arange(n), np.arange(n)] += 2.0 / (1.0 + srt)
    beta = (1.0 - alpha) / (1.0 + alpha)
    top = xi[-1]

    def add_at(i: int, p: float, c: float) -> None:
        # linear-interpolation stamp of coefficient c at position p,
        # zero-extended beyond the kernel support
        if abs(c) < 1e-15 or p < 0 or p > top + 1e-12:
            return
        p = min(p, top)
        j = int(np.searchsorted(xi, p)) - 1
        j = min(max(j, 0), n - 2)
        th = (p - xi[j]) / (xi[j + 1] - xi[j])
        M[i, j] += c * (1.0 - th)
        M[i, j + 1] += c * th

    mup_t = profile.mu_plus(t)
    mum_t = profile.mu_minus(t)
    g_t = 2.0 / (1.0 + srt)
    for i in range(n):
        k = 1
        while mup_t[i] + 2 * a * k <= top + 1e-12:
            add_at(i, mup_t[i] + 2 * a * k, g_t[i] * beta**k)
            k += 1
        if t[i] <= a + 1e-12:
            # reflected-image ladder; at t == a the k = 0 term lands on
            # the diagonal and 1 + beta equals the right-limit identity
            # 2/(1+alpha), keeping the rows continuous across t = a
            k = 0
            while mum_t[i] + 2 * a * k <= top + 1e-12:
                add_at(i, mum_t[i] + 2 * a * k, beta ** (k + 1))
                k += 1
    rhs = -series.f(x, t)
    if pin_origin:
        M[0, :] = 0.0
        M[0, 0] = 1.0
        rhs[0] = 0.0
    return SliceSystem(x=x, nodes=xi, matrix=M, rhs=rhs)


def solve_slice(
    system: SliceSystem,
    check_residual: bool = True,
    condition_cap: Optional[float] = None,
    estimate_condition: bool = True,
) -> np.ndarray:
    """Direct dense solve; records the collocation residual and a 1-norm
    condition estimate on the system.

    The relative residual must stay at solver precision (gate 1e-10);
    a condition estimate above ``condition_cap`` signals that the
    unique-solvability contract of the data is violated numerically.
    """
    M, rhs = system.matrix, system.rhs
    g = np.linalg.solve(M, rhs)
    res = float(np.abs(M @ g - rhs).max() / (1.0 + np.abs(rhs).max()))
    system.residual = res
    if estimate_condition:
        system.condition_estimate = float(np.linalg.cond(M, 1))
    if check_residual and res > RESIDUAL_GATE:
        raise RuntimeError(
            f"slice x={system.x:.6f}: collocation residual {res:.3e} above "
            f"{RESIDUAL_GATE:.0e}"
        )
    if condition_cap is not None and system.condition_estimate is not None:
        if system.condition_estimate > condition_cap:
            raise RuntimeError(
                f"slice x={system.x:.6f}: condition estimate "
                f"{system.condition_estimate:.3e} above cap {condition_cap:.3e}"
            )
    return g


@dataclass
class TriangularKernel:
    """Solved kernel A(x, .) per slice, with diagnostics.

    ``diagonal`` holds A(x, mu_plus(x)) (last node per slice) and ``a0``
    holds A(x, 0) (first node); both are the inputs of the potential
    recovery.  Queries beyond a slice's support return 0.
    """

    profile: DensityProfile
    x_grid: np.ndarray
    nodes: list = field(default_factory=list)
    values: list = field(default_factory=list)
    diagonal: np.ndarray = field(default_factory=lambda: np.zeros(0))
    a0: np.ndarray = field(default_factory=lambda: np.zeros(0))
    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    conditions: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def evaluate(self, slice_index: int, xi) -> np.ndarray:
        """A(x_i, xi) by linear interpolation, zero beyond the support."""
        xi = np.asarray(xi, dtype=float)
        nd, vl = self.nodes[slice_index], self.values[slice_index]
        if len(nd) == 0:
            return np.zeros_like(xi)
        return np.interp(xi, nd, vl, left=vl[0], right=0.0)


def solve_kernel(
    profile: DensityProfile,
    series: KernelSeries,
    x_grid: np.ndarray,
    m: int = 128,
    pin_origin: bool = False,
    condition_cap: Optional[float] = None,
    estimate_condition: bool = True,
) -> TriangularKernel:
    """Solve every slice of ``x_grid`` independently.

    x = 0 is a degenerate (empty) slice: its kernel is identically zero
    and it is stored as such without a solve.  Any slice failure is
    re-raised with the slice position attached by the solver itself.
    """
    x_grid = np.asarray(x_grid, dtype=float)
    kern = TriangularKernel(profile=profile, x_grid=x_grid)
    n_slices = len(x_grid)
    diag = np.zeros(n_slices)
    a0 = np.zeros(n_slices)
    res = np.zeros(n_slices)
    cond = np.zeros(n_slices)
    for i, x in enumerate(x_grid):
        if x == 0.0:
            kern.nodes.append(np.zeros(1))
            kern.values.append(np.zeros(1))
            continue
        system = assemble_slice(profile, series, x, m, pin_origin=pin_origin)
        g = solve_slice(
            system,
            condition_cap=condition_cap,
            estimate_condition=estimate_condition,
        )
        kern.nodes.append(system.nodes)
        kern.values.append(g)
        diag[i] = g[-1]
        a0[i] = g[0]
        res[i] = system.residual
        cond[i] = system.condition_estimate if estimate_condition else np.nan
    kern.diagonal = diag
    kern.a0 = a0
    kern.residuals = res
    kern.conditions = cond
    return kern
