import numpy as np
import pytest
from scipy.special import spherical_jn

from diracgeom.errors import DomainError, NoSignChange
from diracgeom.radial import (RadialProblem, aleph_profile, radial_rhs, radial_matrix, real_matrix,
                              shoot_bound_state, find_levels, matching_function, angular_modes,
                              angular_residual, constrained_ansatz_residual, spectrum_scan)
from conftest import observed_order


def dirac_coulomb(n, kappa, Zalpha, m=1.0):
    gam = np.sqrt(kappa ** 2 - Zalpha ** 2)
    return m / np.sqrt(1 + (Zalpha / (n - abs(kappa) + gam)) ** 2)


def test_rhs_hand_evaluated():
    prob = RadialProblem(Zalpha=0.0, k=1, m=1.3)
    d = radial_rhs(0.7, np.array(2.0), np.array([1, 0, 1, 0]), prob)
    assert np.allclose(d, [0.6j, 0.5, -0.6j, 0.5], atol=1e-15)


def test_free_spherical_wave_solves_system():
    m, E = 1.0, 1.4
    p = np.sqrt(E * E - m * m)
    r = np.linspace(0.3, 8, 50)
    j0, j1 = spherical_jn(0, p * r), spherical_jn(1, p * r)
    G = r * j0
    dG = j0 + r * p * spherical_jn(0, p * r, derivative=True)
    F = -p / (E + m) * r * j1
    dF = -p / (E + m) * (j1 + r * p * spherical_jn(1, p * r, derivative=True))
    a, b = (G + 1j * F) / 2, (G - 1j * F) / 2
    da, db = (dG + 1j * dF) / 2, (dG - 1j * dF) / 2
    y, dy = np.stack([a, b, b, a], -1), np.stack([da, db, db, da], -1)
    assert np.abs(radial_rhs(E, r, y, RadialProblem(Zalpha=0.0, k=1)) - dy).max() < 1e-13


def test_real_form_is_real():
    prob = RadialProblem(Zalpha=0.4, k=2, aleph_mode="spherical")
    r = np.linspace(1.1, 5, 7)
    from diracgeom.radial import _T, _Tinv
    Mx = _T @ radial_matrix(0.8, r, prob) @ _Tinv
    assert np.abs(Mx.imag).max() < 1e-14
    assert np.allclose(real_matrix(0.8, r, prob), Mx.real)


def test_ground_state_coulomb():
    prob = RadialProblem(Zalpha=0.5, k=1, n_nodes=2000)
    pr = shoot_bound_state(prob, (0.80, 0.90))
    assert abs(pr.E - dirac_coulomb(1, -1, 0.5)) < 1e-10
    from scipy.integrate import trapezoid
    assert np.isclose(trapezoid(np.sum(np.abs(pr.state) ** 2, -1), pr.r), 1.0)
    # the symmetric channel keeps u_L = d_R and u_R = d_L
    assert np.abs(pr.uL - pr.dR).max() < 1e-12 and np.abs(pr.uR - pr.dL).max() < 1e-12
    assert pr.meta["max_radial_flux"] < 1e-10
    assert pr.meta["tail_ratio"] < 1e-8


@pytest.mark.parametrize("k,channel,n,kappa", [(1, "symmetric", 2, -1), (1, "antisymmetric", 2, 1),
                                               (2, "symmetric", 2, -2), (1, "symmetric", 3, -1)])
def test_excited_levels(k, channel, n, kappa):
    E0 = dirac_coulomb(n, kappa, 0.5)
    prob = RadialProblem(Zalpha=0.5, k=k, n_nodes=800, adaptive=False, r_max=120)
    pr = shoot_bound_state(prob, (E0 - 0.005, E0 + 0.0025), channel=channel, xtol=1e-14)
    assert abs(pr.E - E0) < 1e-8


def test_level_search_finds_degenerate_pair():
    prob = RadialProblem(Zalpha=0.5, k=1, n_nodes=400, adaptive=False, r_max=120)
    levels, scans = find_levels(prob, (0.8, 0.975), 60)
    E = [round(l.E, 6) for l in levels]
    assert set(scans) == {"symmetric", "antisymmetric"}
    E1, E2 = dirac_coulomb(1, -1, 0.5), dirac_coulomb(2, -1, 0.5)
    assert E.count(round(E2, 6)) == 2 and E.count(round(E1, 6)) == 1


def test_convergence_order_on_excited_level():
    E0 = dirac_coulomb(2, -1, 0.5)
    errs = []
    for N in (100, 200, 400):
        prob = RadialProblem(Zalpha=0.5, k=1, n_nodes=N, adaptive=False, r_max=120)
        errs.append(abs(shoot_bound_state(prob, (0.94, 0.97), xtol=1e-14).E - E0))
    assert observed_order(errs[0], errs[1]) >= 2 and observed_order(errs[1], errs[2]) >= 2


def test_no_sign_change():
    prob = RadialProblem(Zalpha=0.5, k=1, n_nodes=500)
    with pytest.raises(NoSignChange):
        shoot_bound_state(prob, (0.88, 0.9))


def test_empty_scan():
    assert spectrum_scan(RadialProblem(n_nodes=50), (0.9, 0.5), 10) == []


def test_domain_errors():
    with pytest.raises(DomainError):
        aleph_profile(1.0, np.array([0.5, 2.0]))
    with pytest.raises(DomainError):
        RadialProblem(aleph_mode="spherical", r_min=0.9)
    with pytest.raises(ValueError):
        RadialProblem(aleph_mode="sideways")


def test_aleph_profile_is_minus_gradient():
    r = np.linspace(1.2, 6.0, 4001)
    U, al = aleph_profile(2.0, r, g_coupling=0.7)
    dU = np.gradient(U, r)
    assert np.abs((2 * 0.7 * al + dU)[5:-5]).max() < 1e-5
    assert np.allclose(np.sin(U), 1 / (2.0 * r))


def test_aleph_levels_stable_under_refinement():
    out = []
    for N in (800, 1600):
        prob = RadialProblem(Zalpha=0.5, k=1, aleph_mode="spherical", n_nodes=N)
        levels, _ = find_levels(prob, (0.3, 0.96), 30)
        out.append([l.E for l in levels])
    assert len(out[0]) == len(out[1]) >= 2
    assert np.allclose(out[0], out[1], atol=1e-6)


def test_constrained_ansatz_scales_with_amplitude():
    prob = RadialProblem(Zalpha=0.5, k=1, aleph_mode="spherical")
    full, _ = constrained_ansatz_residual(prob, 0.9, 1.0)
    half, _ = constrained_ansatz_residual(prob, 0.9, 0.5)
    assert 0.45 <= half / full <= 0.55
    free, _ = constrained_ansatz_residual(RadialProblem(Zalpha=0.5, k=1), 0.9, 1.0)
    assert free < 1e-3 * full


@pytest.mark.parametrize("k", [1.0, 2.0, 3.0])
def test_angular_closed_form(k):
    md = angular_modes(k, 0)
    th = np.linspace(0.1, np.pi - 0.1, 40)
    assert max(angular_residual(md, th, 0.3)) < 1e-9
    assert md.closed_form


@pytest.mark.parametrize("k,mz", [(1.5, 1), (2.5, 2)])
def test_angular_numerical_modes(k, mz):
    md = angular_modes(k, mz)
    th = np.linspace(0.3, np.pi - 0.3, 40)
    assert max(angular_residual(md, th, 0.7)) < 1e-7
    assert not md.closed_form


def test_angular_zero_k():
    with pytest.raises(ValueError):
        angular_modes(0.0)


def test_matching_function_changes_sign_across_level():
    prob = RadialProblem(Zalpha=0.5, k=1, n_nodes=500)
    E0 = dirac_coulomb(1, -1, 0.5)
    lo = matching_function(E0 - 0.01, prob, channel="symmetric")
    hi = matching_function(E0 + 0.01, prob, channel="symmetric")
    assert lo * hi < 0
