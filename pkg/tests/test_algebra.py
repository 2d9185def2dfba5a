import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from diracgeom.algebra import (MATS, ETA, EPS4, bilinears, matrix_identity_residuals, invariant_report,
                               tensor_dual_product_residual, random_spinors, dual, lower2, mink,
                               tensor_generators, degeneracy_threshold)
from diracgeom.errors import TimelikeViolation

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)
spinor = arrays(np.float64, (8,), elements=finite).map(lambda v: v[:4] + 1j * v[4:])


def test_matrix_table_identities_exact():
    res = matrix_identity_residuals()
    assert set(res) >= {"clifford", "sigma_algebra", "rho_algebra", "hermitian", "rho2_from_rho3_rho1"}
    assert max(res.values()) == 0.0


def test_explicit_blocks():
    al, (r1, r2, r3) = MATS.alpha, MATS.rho
    assert np.array_equal(al[0], np.eye(4))
    assert np.array_equal(np.diag(al[3]).real, [1, -1, -1, 1])
    assert np.array_equal(r3, np.diag([1, -1, -1, 1]) * 0 + np.diag([1, 1, -1, -1]))
    assert np.array_equal(r1 @ r1, np.eye(4))
    assert EPS4[0, 1, 2, 3] == 1 and EPS4[1, 0, 2, 3] == -1


def test_rest_spinor_bilinears():
    psi = np.array([1, 0, 1, 0]) / np.sqrt(2)
    b = bilinears(psi)
    assert np.allclose(b.j, [1, 0, 0, 0])
    assert np.isclose(b.S, 1) and np.isclose(b.P, 0) and np.isclose(b.R, 1)
    assert np.isclose(b.Upsilon, 0)


def test_chiral_spinor_is_degenerate():
    b = bilinears(np.array([1, 0, 0, 0], dtype=complex))
    assert b.R == 0 and bool(b.degenerate) and np.isnan(b.Upsilon)
    assert np.allclose(b.j, -b.Jax * 0 + b.j) and np.isclose(mink(b.j, b.j), 0)


def test_rejects_nonfinite():
    with pytest.raises(ValueError):
        bilinears(np.array([np.nan, 0, 0, 0]))


def test_corrupted_matrices_give_timelike_violation():
    from diracgeom.algebra import DiracMatrices
    al = MATS.alpha.copy()
    al[1:] *= 3.0                      # spatial current outruns the density
    bad = DiracMatrices(alpha=al, rho=MATS.rho, sigma=MATS.sigma)
    with pytest.raises(TimelikeViolation):
        bilinears(np.array([1, 0, 0, 0]), mats=bad)


def test_invariant_identities_batch(rng):
    b = bilinears(random_spinors(10000, rng))
    rep = invariant_report(b)
    assert max(rep.values()) < 1e-12
    assert tensor_dual_product_residual(b) < 1e-12


@settings(max_examples=200, deadline=None)
@given(spinor)
def test_invariant_identities_property(psi):
    b = bilinears(psi)
    scale = max(1.0, b.norm2) ** 2
    assert max(invariant_report(b).values()) <= 1e-13 * scale
    assert tensor_dual_product_residual(b) <= 1e-13 * scale


@settings(max_examples=100, deadline=None)
@given(spinor, st.floats(0.1, 5))
def test_bilinears_scale_quadratically(psi, c):
    b, bc = bilinears(psi), bilinears(c * psi)
    assert np.allclose(bc.j, c * c * b.j, atol=1e-12 * max(1, bc.norm2))
    assert np.isclose(bc.R, c * c * b.R, atol=1e-12 * max(1, bc.norm2))


@settings(max_examples=100, deadline=None)
@given(spinor, st.floats(-np.pi, np.pi))
def test_global_phase_invariance(psi, a):
    b, bp = bilinears(psi), bilinears(np.exp(1j * a) * psi)
    assert np.allclose(b.M, bp.M, atol=1e-12 * max(1, b.norm2))
    assert np.isclose(b.S, bp.S, atol=1e-12 * max(1, b.norm2))


def test_current_is_timelike_or_null(rng):
    b = bilinears(random_spinors(2000, rng))
    assert np.all(mink(b.j, b.j) >= -1e-12) and np.all(b.j[:, 0] > 0)


def test_dual_is_antiinvolution(rng):
    M = rng.normal(size=(4, 4))
    M = M - M.T
    assert np.allclose(dual(dual(M)), -M)


def test_generators_antisymmetric():
    X = tensor_generators()
    assert np.allclose(X, -np.swapaxes(X, 0, 1))


def test_degeneracy_threshold_relative():
    assert degeneracy_threshold(2.0) == pytest.approx(2e-12)
