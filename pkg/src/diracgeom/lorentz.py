"""SL(2,C) spin transformations and the Lorentz matrices they induce on bilinears."""
from dataclasses import dataclass

import numpy as np

from .algebra import MATS, TAU, ETA, bilinears
from .errors import NonUnimodular

I2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class SpinTransform:
    lambda2: np.ndarray
    S4: np.ndarray

    def __matmul__(self, other):
        return spin_transform(self.lambda2 @ other.lambda2, check=False)

    def __neg__(self):
        return SpinTransform(-self.lambda2, -self.S4)

    def apply(self, psi):
        return np.einsum("ij,...j->...i", self.S4, psi)


def spin_transform(lam, check=True, tol=1e-10):
    """Build the 4x4 block matrix diag(lam, (lam^dagger)^-1) acting on spinors."""
    lam = np.asarray(lam, dtype=complex)
    det = np.linalg.det(lam)
    if check and abs(det - 1) > tol:
        raise NonUnimodular(f"det lambda = {det}")
    # inverse of a unimodular 2x2 via the adjugate; falls back to solve otherwise
    adj = np.array([[lam[1, 1], -lam[0, 1]], [-lam[1, 0], lam[0, 0]]])
    inv = adj / det
    S4 = np.zeros((4, 4), dtype=complex)
    S4[:2, :2] = lam
    S4[2:, 2:] = inv.conj().T
    return SpinTransform(lam, S4)


def _check_axis(axis):
    if axis not in (1, 2, 3):
        raise ValueError(f"axis must be 1, 2 or 3, got {axis}")


def rotation(axis, phi):
    """exp(-i phi sigma_axis / 2) in closed form."""
    _check_axis(axis)
    lam = np.cos(phi / 2) * I2 - 1j * np.sin(phi / 2) * TAU[axis - 1]
    return spin_transform(lam, check=False)


def boost(axis, eta):
    """exp(-eta alpha_axis / 2) in closed form. Hermitian and not unitary for eta != 0."""
    _check_axis(axis)
    lam = np.cosh(eta / 2) * I2 - np.sinh(eta / 2) * TAU[axis - 1]
    return spin_transform(lam, check=False)


def exp_traceless(X):
    """exp of a traceless 2x2 matrix, using X^2 = -det(X) I."""
    s = np.sqrt(complex(-np.linalg.det(X)))
    if abs(s) < 1e-8:
        c, sh = 1 + s * s / 2, 1 + s * s / 6
    else:
        c, sh = np.cosh(s), np.sinh(s) / s
    return c * I2 + sh * X


def random_spin_transform(rng, scale=0.5):
    """exp of a random traceless 2x2 generator: a general unimodular lambda."""
    z = scale * (rng.normal(size=3) + 1j * rng.normal(size=3))
    X = np.einsum("k,kij->ij", z, TAU)
    return spin_transform(exp_traceless(X), check=False)


def induced_lorentz(S: SpinTransform, mats=MATS, tol=1e-10):
    """Lambda^a_b with S^dagger alpha^a S = Lambda^a_b alpha^b.

    The alpha^a are orthogonal under the trace form, tr(alpha^a alpha^b) = 4 delta^{ab},
    so the expansion coefficients are plain quarter traces.
    """
    det = np.linalg.det(S.lambda2)
    if abs(det - 1) > tol:
        raise NonUnimodular(f"det lambda = {det}")
    al = mats.alpha
    Sd = S.S4.conj().T
    transformed = np.einsum("ij,ajk,kl->ail", Sd, al, S.S4)
    Lam = 0.25 * np.einsum("aij,bji->ab", transformed, al)
    return Lam.real


def lorentz_residuals(Lam, S: SpinTransform = None, mats=MATS):
    out = {"metric_preserved": float(np.abs(Lam.T @ ETA @ Lam - ETA).max()),
           "orthochronous": float(max(0.0, 1 - Lam[0, 0]))}
    if S is not None:
        Sd = S.S4.conj().T
        lhs = np.einsum("ij,ajk,kl->ail", Sd, mats.alpha, S.S4)
        rhs = np.einsum("ab,bij->aij", Lam, mats.alpha)
        out["expansion"] = float(np.abs(lhs - rhs).max())
    return out


def verify_tensor_law(psi, S: SpinTransform, mats=MATS):
    """Compare bilinears of S psi with the Lorentz image of the bilinears of psi."""
    Lam = induced_lorentz(S, mats)
    b = bilinears(psi, mats)
    bp = bilinears(S.apply(psi), mats)
    Mt = np.einsum("ac,...cd,bd->...ab", Lam, b.M, Lam)
    res = {
        "j": np.abs(bp.j - np.einsum("ab,...b->...a", Lam, b.j)),
        "Jax": np.abs(bp.Jax - np.einsum("ab,...b->...a", Lam, b.Jax)),
        "M": np.abs(bp.M - Mt).reshape(*np.shape(b.S), 16).max(axis=-1),
        "S": np.abs(bp.S - b.S),
        "P": np.abs(bp.P - b.P),
        "R": np.abs(bp.R - b.R),
    }
    res["j"] = res["j"].max(axis=-1)
    res["Jax"] = res["Jax"].max(axis=-1)
    dU = np.angle(np.exp(1j * (bp.Upsilon - b.Upsilon)))
    res["Upsilon"] = np.abs(np.nan_to_num(dU))
    return {k: float(np.max(v)) for k, v in res.items()}
