"""Dirac matrices in the spinor (chiral) representation and the bilinear covariants.

Index conventions used throughout the package:

* ordinal indices a, b, ... run over 0..3 with signature eta = diag(1, -1, -1, -1);
* ``alpha[a]`` carries an upper index, alpha^0 is the identity;
* ``eps4`` is the alternating symbol with all indices up and eps^{0123} = +1,
  the all-lower symbol is ``-eps4`` (det eta = -1).

Every function accepts a single spinor of shape (4,) or a batch (..., 4).
"""
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .errors import TimelikeViolation

ETA = np.diag([1.0, -1.0, -1.0, -1.0])
ETA_DIAG = np.array([1.0, -1.0, -1.0, -1.0])

TAU = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)

I2 = np.eye(2, dtype=complex)
Z2 = np.zeros((2, 2), dtype=complex)


def _levi_civita(n):
    eps = np.zeros((n,) * n)
    for perm in permutations(range(n)):
        p = np.array(perm)
        # parity by counting inversions
        inv = sum(1 for i in range(n) for k in range(i + 1, n) if p[i] > p[k])
        eps[perm] = -1.0 if inv % 2 else 1.0
    return eps


EPS3 = _levi_civita(3)
EPS4 = _levi_civita(4)          # eps^{abcd}, eps^{0123} = +1
EPS4_LOWER = -EPS4              # eps_{abcd}


@dataclass(frozen=True)
class DiracMatrices:
    alpha: np.ndarray           # (4, 4, 4): alpha^a
    rho: np.ndarray             # (3, 4, 4): rho_1, rho_2, rho_3
    sigma: np.ndarray           # (3, 4, 4): sigma_1, sigma_2, sigma_3
    eta: np.ndarray = field(default_factory=lambda: ETA.copy())
    eps4: np.ndarray = field(default_factory=lambda: EPS4.copy())

    @property
    def beta(self):
        return self.rho[0]

    def alpha_lower(self):
        """alpha_a = eta_ab alpha^b."""
        return ETA_DIAG[:, None, None] * self.alpha


def build_matrices():
    """Return the exact spinor-representation matrices."""
    alpha = np.zeros((4, 4, 4), dtype=complex)
    alpha[0] = np.eye(4)
    for i in range(3):
        alpha[i + 1] = np.block([[TAU[i], Z2], [Z2, -TAU[i]]])
    rho = np.zeros((3, 4, 4), dtype=complex)
    rho[0] = np.block([[Z2, I2], [I2, Z2]])
    rho[1] = np.block([[Z2, -1j * I2], [1j * I2, Z2]])
    rho[2] = np.block([[I2, Z2], [Z2, -I2]])
    sigma = np.array([rho[2] @ alpha[i + 1] for i in range(3)])
    return DiracMatrices(alpha=alpha, rho=rho, sigma=sigma)


MATS = build_matrices()


def clifford_residual(mats=MATS):
    """max |alpha^a rho1 alpha^b + alpha^b rho1 alpha^a - 2 rho1 eta^{ab}|."""
    b = mats.rho[0]
    worst = 0.0
    for a in range(4):
        for c in range(4):
            r = mats.alpha[a] @ b @ mats.alpha[c] + mats.alpha[c] @ b @ mats.alpha[a] - 2 * b * ETA[a, c]
            worst = max(worst, np.abs(r).max())
    return worst


def matrix_identity_residuals(mats=MATS):
    """Residuals of every algebraic relation the matrix table must satisfy."""
    al, rh, sg = mats.alpha, mats.rho, mats.sigma
    I4 = np.eye(4)
    out = {"clifford": clifford_residual(mats)}
    r_s = r_r = r_c = 0.0
    for i in range(3):
        for k in range(3):
            lhs = sg[i] @ sg[k]
            rhs = (i == k) * I4 + 1j * np.einsum("l,lij->ij", EPS3[i, k], sg)
            r_s = max(r_s, np.abs(lhs - rhs).max())
            lhs = rh[i] @ rh[k]
            rhs = (i == k) * I4 + 1j * np.einsum("l,lij->ij", EPS3[i, k], rh)
            r_r = max(r_r, np.abs(lhs - rhs).max())
            r_c = max(r_c, np.abs(sg[i] @ rh[k] - rh[k] @ sg[i]).max())
    out["sigma_algebra"] = r_s
    out["rho_algebra"] = r_r
    out["sigma_rho_commute"] = r_c
    herm = 0.0
    for m in list(al) + list(rh) + list(sg):
        herm = max(herm, np.abs(m - m.conj().T).max())
    out["hermitian"] = herm
    out["rho3_from_alphas"] = np.abs(rh[2] + 1j * al[1] @ al[2] @ al[3]).max()
    # rho_2 = -i rho_3 rho_1 is the ordering consistent with the Pauli algebra of the rho's
    out["rho2_from_rho3_rho1"] = np.abs(rh[1] + 1j * rh[2] @ rh[0]).max()
    out["sigma_from_rho3_alpha"] = max(np.abs(sg[i] - rh[2] @ al[i + 1]).max() for i in range(3))
    return out


@dataclass
class BilinearSet:
    j: np.ndarray               # (..., 4) upper index
    Jax: np.ndarray             # (..., 4) upper index
    S: np.ndarray
    P: np.ndarray
    M: np.ndarray               # (..., 4, 4) upper indices, antisymmetric
    K: np.ndarray               # (..., 3)
    L: np.ndarray               # (..., 3)
    R: np.ndarray
    Upsilon: np.ndarray
    norm2: np.ndarray           # psi^dagger psi
    degenerate: np.ndarray      # bool, R <= eps_R

    def __getitem__(self, idx):
        return BilinearSet(*(getattr(self, f)[idx] for f in self.__dataclass_fields__))

    @property
    def Mdual(self):
        return dual(self.M)


def sesq(psi, mat, phi=None):
    """psi^dagger mat phi, batched over leading axes."""
    if phi is None:
        phi = psi
    return np.einsum("...i,ij,...j->...", psi.conj(), mat, phi)


def lower(v):
    """Lower the ordinal index of a (..., 4) vector."""
    return v * ETA_DIAG


def lower2(t):
    return t * ETA_DIAG[:, None] * ETA_DIAG[None, :]


def mink(u, v):
    return np.sum(u * v * ETA_DIAG, axis=-1)


def dual(M):
    """Hodge dual (1/2) eps^{abcd} M_cd of an upper-index antisymmetric tensor."""
    return 0.5 * np.einsum("abcd,...cd->...ab", EPS4, lower2(M))


def tensor_generators(mats=MATS):
    """(i/2)[alpha^a rho1 alpha^b - alpha^b rho1 alpha^a] for all a, b: shape (4, 4, 4, 4)."""
    al, b = mats.alpha, mats.rho[0]
    out = np.zeros((4, 4, 4, 4), dtype=complex)
    for a in range(4):
        for c in range(4):
            out[a, c] = 0.5j * (al[a] @ b @ al[c] - al[c] @ b @ al[a])
    return out


def degeneracy_threshold(norm2):
    return 1e-12 * norm2


def bilinears(psi, mats=MATS, timelike_tol=1e-12):
    """Evaluate all sixteen bilinear covariants of psi (shape (4,) or (..., 4))."""
    psi = np.asarray(psi, dtype=complex)
    if not np.all(np.isfinite(psi)):
        raise ValueError("spinor has non-finite entries")
    al, rh, sg = mats.alpha, mats.rho, mats.sigma
    pc = psi.conj()
    j = np.einsum("...i,aij,...j->...a", pc, al, psi).real
    Jax = np.einsum("...i,aij,...j->...a", pc, np.einsum("ij,ajk->aik", rh[2], al), psi).real
    S = sesq(psi, rh[0]).real
    P = sesq(psi, rh[1]).real
    M = np.einsum("...i,abij,...j->...ab", pc, tensor_generators(mats), psi).real
    K = np.einsum("...i,kij,...j->...k", pc, np.einsum("ij,kjl->kil", rh[1], sg), psi).real
    L = np.einsum("...i,kij,...j->...k", pc, np.einsum("ij,kjl->kil", rh[0], sg), psi).real
    norm2 = np.einsum("...i,...i->...", pc, psi).real
    jj = mink(j, j)
    if np.any(jj < -timelike_tol * np.maximum(norm2, 1e-300) ** 2):
        raise TimelikeViolation(f"j.j = {np.min(jj):.3e} < 0")
    # S^2 + P^2 equals j.j identically and carries no cancellation for fast-moving frames
    R = np.hypot(S, P)
    degenerate = R <= degeneracy_threshold(norm2)
    Ups = np.where(degenerate, np.nan, np.arctan2(P, S))
    return BilinearSet(j=j, Jax=Jax, S=S, P=P, M=M, K=K, L=L, R=R, Upsilon=Ups,
                       norm2=norm2, degenerate=degenerate)


def invariant_report(b: BilinearSet):
    """Absolute residuals of the invariant identities and the chiral-angle parametrization.

    Returns a dict label -> max abs residual over the batch. Υ-dependent lines
    use atan2(P, S) directly so they stay defined at degenerate points.
    """
    R2 = b.R ** 2
    Ups = np.arctan2(b.P, b.S)
    LK = np.sum(b.L * b.K, axis=-1)
    L2 = np.sum(b.L ** 2, axis=-1)
    K2 = np.sum(b.K ** 2, axis=-1)
    jj, JJ, jJ = mink(b.j, b.j), mink(b.Jax, b.Jax), mink(b.j, b.Jax)
    res = {
        "jj_eq_minus_JJ": np.abs(jj + JJ),
        "jj_eq_S2_plus_P2": np.abs(jj - (b.S ** 2 + b.P ** 2)),
        "J_dot_j": np.abs(jJ),
        "S2_minus_P2_eq_L2_minus_K2": np.abs(b.S ** 2 - b.P ** 2 - (L2 - K2)),
        "SP_eq_L_dot_K": np.abs(b.S * b.P - LK),
        "cos_2upsilon": np.abs(b.S ** 2 - b.P ** 2 - R2 * np.cos(2 * Ups)),
        "sin_2upsilon": np.abs(2 * b.S * b.P - R2 * np.sin(2 * Ups)),
    }
    return {k: float(np.max(v)) if np.size(v) else 0.0 for k, v in res.items()}


def tensor_dual_product_residual(b: BilinearSet):
    """max |M^{ab} Mdual_{bc} - (L.K) delta^a_c|."""
    Md = lower2(dual(b.M))
    prod = np.einsum("...ab,...bc->...ac", b.M, Md)
    LK = np.sum(b.L * b.K, axis=-1)
    return float(np.max(np.abs(prod - LK[..., None, None] * np.eye(4))))


def random_spinors(n, rng):
    """n spinors with real and imaginary parts uniform in [-1, 1]."""
    return rng.uniform(-1, 1, (n, 4)) + 1j * rng.uniform(-1, 1, (n, 4))
