"""Forward spectral solver: oracle identities and input validation."""

import numpy as np
import pytest

import slgl
from slgl import (
    PotentialSpec,
    SpectralData,
    characteristic,
    check_asymptotics,
    eigenvalues,
    integrate_phi,
    norming_numbers,
    spectral_data,
)


def test_constant_shift_law_classical(prof_classical):
    # for rho = 1 and q = c: lambda_n = sqrt(((2n-1)/2)^2 + c)
    c = 0.7
    lams = eigenvalues(prof_classical, PotentialSpec(kind="constant", c=c), 10)
    n = np.arange(1, 11)
    expected = np.sqrt(((2 * n - 1) / 2) ** 2 + c)
    np.testing.assert_allclose(lams, expected, atol=2e-8)


def test_zero_potential_matches_baseline(prof, base150, zero_data40):
    assert np.abs(zero_data40.lambdas - base150.lambdas0[:40]).max() < 1e-8
    rel = np.abs(zero_data40.normings / base150.normings0[:40] - 1.0).max()
    assert rel < 1e-6


def test_eigenfunction_boundary_condition(prof, sin_data30):
    score = slgl.verify_boundary(prof, np.sin, sin_data30)
    assert score <= 1e-9


def test_eigenfunction_orthogonality(prof, sin_data30):
    _, off, diag = slgl.verify_orthogonality(prof, np.sin, sin_data30)
    assert off <= 1e-6
    assert diag <= 1e-6


def test_characteristic_sign_change_between_eigenvalues(prof, sin_data30):
    lam = sin_data30.lambdas
    mids = 0.5 * (lam[:-1] + lam[1:])
    vals = characteristic(prof, np.sin, mids)
    assert np.all(np.abs(vals) > 1e-6)
    signs = np.sign(vals)
    assert np.all(signs[:-1] == -signs[1:])


def test_norming_numbers_positive(prof, sin_data30):
    assert np.all(sin_data30.normings > 0)


def test_integrate_phi_initial_conditions(prof):
    lam = np.array([1.1])
    _, _, (xs1, tr1, _, _) = integrate_phi(prof, None, lam, store=True)
    assert np.isclose(tr1[0, 0], 1.0)
    # Neumann start: phi is even in x near 0
    assert abs(tr1[1, 0] - tr1[0, 0]) < 1e-4


def test_integrate_phi_continuous_at_interface(prof):
    lam = np.array([2.3])
    _, _, (xs1, tr1, xs2, tr2) = integrate_phi(prof, np.sin, lam, store=True)
    assert np.isclose(xs1[-1], prof.a)
    assert np.isclose(xs2[0], prof.a)
    assert abs(tr1[-1, 0] - tr2[0, 0]) < 1e-12


def test_potential_spec_kinds():
    assert PotentialSpec(kind="zero")(np.array([1.0]))[0] == 0.0
    assert PotentialSpec(kind="constant", c=2.5)(np.array([1.0]))[0] == 2.5
    assert np.isclose(PotentialSpec(kind="sin")(np.array([1.0]))[0], np.sin(1.0))
    assert np.isclose(
        PotentialSpec(kind="cos", c=3.0)(np.array([1.0]))[0], 3.0 * np.cos(1.0)
    )
    tab = PotentialSpec(
        kind="tabulated", x_samples=[0.0, np.pi], q_samples=[0.0, np.pi]
    )
    assert np.isclose(tab(np.array([1.0]))[0], 1.0)


def test_potential_spec_validation():
    with pytest.raises(ValueError):
        PotentialSpec(kind="warp")
    with pytest.raises(ValueError):
        PotentialSpec(kind="tabulated", x_samples=[0.0, 1.0], q_samples=[0.0, 1.0])
    with pytest.raises(ValueError):
        PotentialSpec(
            kind="tabulated", x_samples=[0.0, 2.0, 1.0, np.pi], q_samples=[0] * 4
        )
    with pytest.raises(ValueError):
        PotentialSpec(kind="callable")


def test_spectral_data_validation(prof):
    with pytest.raises(ValueError):
        SpectralData(profile=prof, lambdas=[2.0, 1.0], normings=[1.0, 1.0])
    with pytest.raises(ValueError):
        SpectralData(profile=prof, lambdas=[1.0, 2.0], normings=[1.0, -1.0])
    with pytest.raises(ValueError):
        SpectralData(profile=prof, lambdas=[1.0, 2.0], normings=[1.0])
    with pytest.raises(ValueError):
        SpectralData(profile=prof, lambdas=[1.0, np.nan], normings=[1.0, 1.0])


def test_spectral_data_truncation(sin_data30):
    short = sin_data30.truncated(7)
    assert len(short) == 7
    np.testing.assert_array_equal(short.lambdas, sin_data30.lambdas[:7])


def test_eigenvalues_rejects_bad_count(prof):
    with pytest.raises(ValueError):
        eigenvalues(prof, None, 0)


def test_check_asymptotics_scaled_gaps(prof, base150, sin_data30):
    report = check_asymptotics(sin_data30, base150, bound_gap=5.0, bound_norming=20.0)
    assert report.bounded
    assert report.sup_scaled_gap < 5.0
    # the scaled gaps must not grow with n (1/n decay of the raw gaps)
    first = np.abs(report.scaled_gaps[:10]).max()
    last = np.abs(report.scaled_gaps[-10:]).max()
    assert last < 4 * max(first, 0.1)


def test_check_asymptotics_rejects_profile_mismatch(prof, base150):
    other = slgl.DensityProfile(a=1.0, alpha=2.0)
    data = SpectralData(profile=other, lambdas=[1.0], normings=[1.0])
    with pytest.raises(ValueError):
        check_asymptotics(data, base150)


def test_spectral_data_oracle_is_deterministic(prof):
    d1 = spectral_data(prof, np.sin, 5)
    d2 = spectral_data(prof, np.sin, 5)
    np.testing.assert_array_equal(d1.lambdas, d2.lambdas)
    np.testing.assert_array_equal(d1.normings, d2.normings)


def test_norming_matches_independent_trapezoid(prof):
    # dual quadrature route on a dense uniform grid per piece
    lam = np.array([1.7])
    al = norming_numbers(prof, np.sin, lam)[0]
    _, _, (xs1, tr1, xs2, tr2) = integrate_phi(prof, np.sin, lam, store=True)
    trapezoid = getattr(np, "trapezoid", None) or np.trapz
    direct = trapezoid(tr1[:, 0] ** 2, xs1) + prof.alpha**2 * trapezoid(
        tr2[:, 0] ** 2, xs2
    )
    assert abs(al - direct) / direct < 1e-6
