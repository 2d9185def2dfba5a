import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diracgeom.algebra import ETA, bilinears, random_spinors
from diracgeom.errors import NonUnimodular
from diracgeom.lorentz import (rotation, boost, random_spin_transform, induced_lorentz, lorentz_residuals,
                               verify_tensor_law, spin_transform, exp_traceless)
from diracgeom.algebra import TAU


def rot_matrix(axis, phi):
    i, j = {1: (2, 3), 2: (3, 1), 3: (1, 2)}[axis]
    L = np.eye(4)
    L[i, i] = L[j, j] = np.cos(phi)
    L[i, j], L[j, i] = -np.sin(phi), np.sin(phi)
    return L


def boost_matrix(axis, eta):
    L = np.eye(4)
    L[0, 0] = L[axis, axis] = np.cosh(eta)
    L[0, axis] = L[axis, 0] = -np.sinh(eta)
    return L


@pytest.mark.parametrize("axis", [1, 2, 3])
@pytest.mark.parametrize("angle", [0.0, 0.3, -1.1, 2.9])
def test_rotation_closed_form(axis, angle):
    S = rotation(axis, angle)
    assert np.abs(induced_lorentz(S) - rot_matrix(axis, angle)).max() < 1e-14
    assert np.allclose(S.lambda2 @ S.lambda2.conj().T, np.eye(2))


@pytest.mark.parametrize("axis", [1, 2, 3])
@pytest.mark.parametrize("rapidity", [0.0, 0.7, -1.5, 3.0])
def test_boost_closed_form(axis, rapidity):
    S = boost(axis, rapidity)
    L = induced_lorentz(S)
    assert np.abs(L - boost_matrix(axis, rapidity)).max() < 1e-13 * np.cosh(rapidity) ** 2
    assert np.allclose(S.lambda2, S.lambda2.conj().T)


def test_rest_spinor_boost_current():
    psi = np.array([1, 0, 1, 0]) / np.sqrt(2)
    j = bilinears(boost(3, 1.0).apply(psi)).j
    assert np.allclose(j, [np.cosh(1.0), 0, 0, -np.sinh(1.0)], atol=1e-14)


def test_full_turn_is_minus_identity():
    S = rotation(2, 2 * np.pi)
    assert np.allclose(S.S4, -np.eye(4))
    assert np.allclose(induced_lorentz(S), np.eye(4))


def test_non_unimodular_rejected():
    with pytest.raises(NonUnimodular):
        spin_transform(2 * np.eye(2))
    S = spin_transform(np.diag([2.0, 1.0]), check=False)
    with pytest.raises(NonUnimodular):
        induced_lorentz(S)


def test_bad_axis():
    with pytest.raises(ValueError):
        rotation(0, 0.1)


def test_exp_traceless_matches_scipy(rng):
    from scipy.linalg import expm
    for _ in range(20):
        z = rng.normal(size=3) + 1j * rng.normal(size=3)
        X = np.einsum("k,kij->ij", z, TAU)
        assert np.allclose(exp_traceless(X), expm(X), atol=1e-12)
    X = 1e-10 * TAU[0]
    assert np.allclose(exp_traceless(X), expm(X), atol=1e-16)


def test_homomorphism(rng):
    for _ in range(50):
        A, B = random_spin_transform(rng), random_spin_transform(rng)
        lhs = induced_lorentz(A @ B)
        rhs = induced_lorentz(A) @ induced_lorentz(B)
        assert np.abs(lhs - rhs).max() < 1e-11 * np.abs(rhs).max()
        assert np.allclose(induced_lorentz(-A), induced_lorentz(A))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_tensor_law_property(seed):
    rng = np.random.default_rng(seed)
    S = random_spin_transform(rng)
    L = induced_lorentz(S)
    res = lorentz_residuals(L, S)
    assert res["metric_preserved"] < 1e-10 and res["expansion"] < 1e-10
    assert res["orthochronous"] == 0.0
    psi = random_spinors(8, rng)
    law = verify_tensor_law(psi, S)
    for k in ("j", "Jax", "M"):
        assert law[k] < 1e-10
    for k in ("S", "P", "R"):
        assert law[k] < 1e-12
    assert np.isclose(abs(np.linalg.det(L)), 1.0)
