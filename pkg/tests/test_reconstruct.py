"""Potential recovery and the verification machinery."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import slgl
from slgl import DensityProfile, potential_from_kernel, reconstruct_full
from slgl.glm import TriangularKernel
from slgl.reconstruct import cascade_response, conv_cascade, extension_cap


def synthetic_kernel(profile, diag_fn, n=41):
    xg = np.linspace(0.0, np.pi, n)
    ia = int(np.argmin(np.abs(xg - profile.a)))
    xg[ia] = profile.a
    z = np.zeros_like(xg)
    return TriangularKernel(
        profile=profile,
        x_grid=xg,
        diagonal=diag_fn(xg),
        a0=z.copy(),
        residuals=z.copy(),
        conditions=z.copy(),
    )


def test_synthetic_quadratic_diagonal_gives_linear_potential(prof_classical):
    # diagonal x^2/2 with rho = 1: q = 2 d/dx (x^2/2) = 2x, exactly,
    # because the per-piece second-order gradient is exact on quadratics
    kern = synthetic_kernel(prof_classical, lambda x: x**2 / 2)
    res = potential_from_kernel(kern, smooth=False)
    np.testing.assert_allclose(res.q_values, 2 * kern.x_grid, atol=1e-12)


def test_scaling_uses_density_jump(prof):
    # same diagonal slope s on both pieces: q = 4 rho/(sqrt(rho)+1) * s.
    # The recovery rescales the first right-piece node by the physical
    # interface jump ratio, so the first two right nodes are excluded.
    kern = synthetic_kernel(prof, lambda x: 0.5 * x)
    res = potential_from_kernel(kern, smooth=False)
    h = np.pi / (len(kern.x_grid) - 1)
    left = kern.x_grid < prof.a
    right = kern.x_grid > prof.a + 2.5 * h
    np.testing.assert_allclose(res.q_values[left], 4 / 2 * 0.5, atol=1e-10)
    np.testing.assert_allclose(res.q_values[right], 16 / 3 * 0.5, atol=1e-10)


def test_gradient_never_crosses_the_interface(prof):
    # a diagonal jump at x = a must not contaminate interior derivatives
    def diag(x):
        return np.where(x <= prof.a, 0.0, 1.0)

    kern = synthetic_kernel(prof, diag, n=81)
    res = potential_from_kernel(kern, smooth=False)
    interior_left = kern.x_grid < prof.a - 0.2
    interior_right = kern.x_grid > prof.a + 0.2
    assert np.abs(res.q_values[interior_left]).max() < 1e-12
    assert np.abs(res.q_values[interior_right]).max() < 1e-12


def test_potential_from_kernel_needs_enough_slices(prof):
    kern = synthetic_kernel(prof, lambda x: x, n=4)
    with pytest.raises(ValueError):
        potential_from_kernel(kern, smooth=False)


def test_smoothing_requires_top_eigenvalue(prof):
    kern = synthetic_kernel(prof, lambda x: x)
    with pytest.raises(ValueError):
        potential_from_kernel(kern, smooth=True)


def test_conv_cascade_preserves_constants():
    y = np.full(64, 3.25)
    out = conv_cascade(y, (np.ones(5), np.ones(5), np.array([1.0, 2.0, 1.0])))
    np.testing.assert_allclose(out, 3.25, rtol=1e-14)


def test_conv_cascade_preserves_linear_in_interior():
    x = np.linspace(0, 1, 64)
    out = conv_cascade(x, (np.ones(5), np.ones(5), np.array([1.0, 2.0, 1.0])))
    np.testing.assert_allclose(out[6:-6], x[6:-6], atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=12, max_size=60))
def test_conv_cascade_respects_range(values):
    y = np.array(values)
    out = conv_cascade(y, (np.ones(5), np.ones(3)))
    assert out.max() <= y.max() + 1e-12
    assert out.min() >= y.min() - 1e-12


def test_cascade_response_dc_and_nulls():
    assert np.isclose(cascade_response(np.array([0.0]))[0], 1.0)
    # box-5 null at 2 pi / 5, binomial null at pi
    assert abs(cascade_response(np.array([2 * np.pi / 5]))[0]) < 1e-14
    assert abs(cascade_response(np.array([np.pi]))[0]) < 1e-14


def test_extension_cap_bounds(prof):
    hx = np.pi / 200
    cap = extension_cap(hx, [1.0, prof.alpha], lam_top=20.0)
    assert cap <= 3.2 * 20.0
    assert cap <= 0.475 * np.pi / (hx * prof.alpha)
    # ripple frequencies of both pieces land in the filter stop band
    oms = 2.0 * cap * np.array([1.0, prof.alpha]) * hx
    oms = np.abs((oms + np.pi) % (2 * np.pi) - np.pi)
    assert cascade_response(oms).max() < 0.05


def test_reconstruct_requires_minimum_data(prof, base150):
    data = slgl.SpectralData(
        profile=prof, lambdas=base150.lambdas0[:3], normings=base150.normings0[:3]
    )
    with pytest.raises(ValueError):
        reconstruct_full(prof, data)


def test_reconstruct_warns_on_shape_violation(prof, base150):
    # a constant +0.5 eigenvalue offset violates the 1/n gap decay
    data = slgl.SpectralData(
        profile=prof,
        lambdas=base150.lambdas0[:12] + 0.5,
        normings=base150.normings0[:12],
    )
    with pytest.warns(RuntimeWarning):
        reconstruct_full(
            prof, data, baseline=base150, n_slices=24, m=16, smooth=False
        )


def test_reconstruction_result_metadata(recon30):
    meta = recon30.meta
    assert meta["n_modes_supplied"] == 30
    assert meta["n_modes_used"] >= 30
    assert meta["n_slices"] == 200
    assert meta["asymptotics_bounded"] is True
    assert recon30.residual_max <= 1e-10
    assert np.isfinite(recon30.condition_max)


def test_reconstruction_grid_contains_interface(recon30, prof):
    assert np.abs(recon30.x_grid - prof.a).min() == 0.0
    assert recon30.x_grid[0] == 0.0 and np.isclose(recon30.x_grid[-1], np.pi)


def test_interior_accuracy_beats_full_range(recon30, prof):
    from conftest import rel_l2

    q_true = np.sin(recon30.x_grid)
    full = rel_l2(recon30.x_grid, recon30.q_values, q_true)
    inner = (recon30.x_grid > 0.35) & (recon30.x_grid < np.pi - 0.35)
    mask_seam = np.abs(recon30.x_grid - prof.a) > 0.35
    mask_fold = np.abs(recon30.x_grid - prof.fold) > 0.35
    sel = inner & mask_seam & mask_fold
    core = rel_l2(recon30.x_grid[sel], recon30.q_values[sel], q_true[sel])
    assert core < full
    assert core < 0.03


def test_unsmoothed_reconstruction_is_noisier_but_unbiased(
    prof, sin_data30, base150
):
    from conftest import rel_l2

    raw = reconstruct_full(
        prof, sin_data30, baseline=base150, smooth=False
    )
    q_true = np.sin(raw.x_grid)
    sel = (raw.x_grid > 0.3) & (raw.x_grid < np.pi - 0.3)
    err_raw = rel_l2(raw.x_grid[sel], raw.q_values[sel], q_true[sel])
    assert np.isfinite(err_raw)
    # the truncation ripple dominates the raw derivative; smoothing is
    # what makes the pipeline accurate
    assert err_raw > 0.05


def test_forward_verify_ops_on_true_potential(prof, sin_data30):
    _, off, diag = slgl.verify_orthogonality(prof, np.sin, sin_data30)
    assert off <= 1e-6 and diag <= 1e-6
    lhs, rhs, gap = slgl.verify_parseval(prof, np.sin, sin_data30)
    assert gap <= 1e-6
    assert slgl.verify_boundary(prof, np.sin, sin_data30) <= 1e-9


def test_forward_verify_ops_reject_wrong_potential(prof, sin_data30):
    # a wrong candidate must fail the identities by a wide margin
    wrong = lambda x: np.sin(x) + 0.5
    assert slgl.verify_boundary(prof, wrong, sin_data30) > 1e-4
    _, off, diag = slgl.verify_orthogonality(prof, wrong, sin_data30)
    assert max(off, diag) > 1e-4


def test_verification_suite_fast_configuration(prof, sin_data30, base150):
    suite = slgl.verification_suite(
        prof,
        sin_data30,
        base150,
        n_modes=16,
        m=64,
        m_boundary=256,
        simpson_panels=(128, 192),
    )
    assert suite["boundary"] < 1e-3
    assert suite["ortho"] < 1e-3
    assert suite["parseval"] < 1e-2
    for key in ("boundary", "ortho", "parseval"):
        assert suite[f"{key}_degradation"] > 10.0


def test_suite_negative_control_is_much_worse(suite30):
    assert suite30["boundary_shifted"] > 0.05
    assert suite30["ortho_shifted"] > 0.05
    assert suite30["parseval_shifted"] > 0.05
