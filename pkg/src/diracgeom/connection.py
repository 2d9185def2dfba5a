"""Spinor connection, covariant derivatives and the commutator of covariant derivatives.

Frame quantities carry lower ordinal indices: A[..., b], aleph[..., b],
omega[..., a, b, c] as in grid.py. Connection matrices have shape (..., 4(b), 4, 4).
"""
from dataclasses import dataclass

import numpy as np

from .algebra import MATS, ETA_DIAG, EPS4, dual, lower2, tensor_generators
from .grid import _contract_frame, gradient

_al = MATS.alpha
_r1, _r2, _r3 = MATS.rho
_sg = MATS.sigma
_al_low = ETA_DIAG[:, None, None] * _al
# rho1 alpha^c rho1 alpha^d for all c, d
_PAIR = np.einsum("ij,cjk,kl,dlm->cdim", _r1, _al, _r1, _al)
_I4 = np.eye(4)


@dataclass
class ConnectionInputs:
    omega: np.ndarray
    A: np.ndarray = None
    aleph: np.ndarray = None
    e_charge: float = 0.0
    g_coupling: float = 0.0
    m: float = 1.0

    def __post_init__(self):
        shp = self.omega.shape[:-3] + (4,)
        if self.A is None:
            self.A = np.zeros(shp)
        if self.aleph is None:
            self.aleph = np.zeros(shp)


def rotation_part(omega):
    """Omega_b = (1/4) omega_cdb rho1 alpha^c rho1 alpha^d."""
    return 0.25 * np.einsum("...cdb,cdij->...bij", omega, _PAIR)


def rotation_part_explicit(omega):
    """The same matrices written with boost and rotation generators.

    +1/2 omega_0kb rho3 sigma_k - (i/4) eps^{0kim} omega_imb sigma_k. The sign of
    the boost piece is the one for which this agrees with the compact form.
    """
    rs = np.einsum("ij,kjl->kil", _r3, _sg)
    boost = 0.5 * np.einsum("...kb,kij->...bij", omega[..., 0, 1:, :], rs)
    rot = -0.25j * np.einsum("kim,...imb,kxy->...bxy", EPS4[0, 1:, 1:, 1:], omega[..., 1:, 1:, :], _sg)
    return boost + rot


def build_connection(inp: ConnectionInputs):
    """Gamma_b = i e A_b + i g rho3 aleph_b + Omega_b."""
    G = rotation_part(inp.omega).astype(complex)
    G = G + 1j * inp.e_charge * inp.A[..., :, None, None] * _I4
    G = G + 1j * inp.g_coupling * inp.aleph[..., :, None, None] * _r3
    return G


def _dag(X):
    return np.conj(np.swapaxes(X, -1, -2))


def connection_residuals(G, inp: ConnectionInputs):
    """Max residuals of the defining relation, rho3 commutation and the rho1/rho2 pattern."""
    Gd = _dag(G)
    lhs = np.einsum("...bij,ajk->...abik", Gd, _al_low) + np.einsum("aij,...bjk->...abik", _al_low, G)
    rhs = np.einsum("...acb,cik->...abik", inp.omega, _al)
    g, al = inp.g_coupling, inp.aleph
    r1 = Gd @ _r1 + _r1 @ G - 2 * g * al[..., :, None, None] * _r2
    r2 = Gd @ _r2 + _r2 @ G + 2 * g * al[..., :, None, None] * _r1
    comm = G @ _r3 - _r3 @ G
    explicit = rotation_part_explicit(inp.omega) - rotation_part(inp.omega)
    return {
        "defining_relation": float(np.abs(lhs - rhs).max()),
        "rho3_commutes": float(np.abs(comm).max()),
        "rho1_pattern": float(np.abs(r1).max()),
        "rho2_pattern": float(np.abs(r2).max()),
        "compact_vs_explicit": float(np.abs(explicit).max()),
    }


def covariant_derivative(grid, psi, G, e):
    """D_a psi = e_(a)^mu d_mu psi - Gamma_a psi, shape (*dims, 4(a), 4)."""
    dpsi = _contract_frame(e, gradient(grid, psi))
    return dpsi - np.einsum("...aij,...j->...ai", G, psi)


def frame_d(grid, e, f):
    return _contract_frame(e, gradient(grid, f))


def bilinear_from(psi, mat, phi):
    return np.einsum("...i,ij,...j->...", np.conj(psi), mat, phi)


def covariant_of_bilinear(psi, Dpsi, mat):
    """D_a (psi^dag mat psi) from spinor covariant derivatives (product rule)."""
    a = np.einsum("...i,ij,...aj->...a", np.conj(psi), mat, Dpsi)
    return (a + np.conj(a)).real


def scalar_derivatives(grid, psi, e, aleph, g_coupling):
    """(D_a S, D_a P, D_a Upsilon) from the closed formulas with the axial potential."""
    S = bilinear_from(psi, _r1, psi).real
    P = bilinear_from(psi, _r2, psi).real
    dS, dP = frame_d(grid, e, S), frame_d(grid, e, P)
    R2 = S ** 2 + P ** 2
    # derivative of atan2 without branch jumps
    dU = (S[..., None] * dP - P[..., None] * dS) / R2[..., None]
    DS = dS - 2 * g_coupling * P[..., None] * aleph
    DP = dP + 2 * g_coupling * S[..., None] * aleph
    DU = dU + 2 * g_coupling * aleph
    return DS, DP, DU


def transport_residuals(grid, psi, Dpsi, e, inp: ConnectionInputs):
    """Vector, scalar and tensor transport laws compared with the product-rule derivatives.

    D_b j_a = d_b j_a - omega_acb j^c
    D_a S = d_a S - 2 g P aleph_a,   D_a P = d_a P + 2 g S aleph_a
    D_c M_ab = nabla_c M_ab + 2 g aleph_c Mdual_ab and D_c Mdual_ab = nabla_c Mdual_ab - 2 g aleph_c M_ab
    (signs for eps^{0123} = +1)
    """
    om, g, al = inp.omega, inp.g_coupling, inp.aleph
    j_low = np.einsum("...i,cij,...j->...c", np.conj(psi), _al_low, psi).real
    j_up = j_low * ETA_DIAG
    Dj_spin = np.stack([covariant_of_bilinear(psi, Dpsi, _al_low[a]) for a in range(4)], axis=-1)  # [..., b, a]
    dj = frame_d(grid, e, j_low)                                                         # [..., b, a]
    Dj_formula = dj - np.einsum("...acb,...c->...ba", om, j_up)
    out = {"vector": np.abs(Dj_spin - Dj_formula)}
    DS_spin = covariant_of_bilinear(psi, Dpsi, _r1)
    DP_spin = covariant_of_bilinear(psi, Dpsi, _r2)
    DS, DP, _ = scalar_derivatives(grid, psi, e, al, g)
    out["scalar"] = np.abs(DS_spin - DS)
    out["pseudoscalar"] = np.abs(DP_spin - DP)
    # tensor: M_ab with lowered indices from generators
    gen = lower2(tensor_generators().transpose(2, 3, 0, 1)).transpose(2, 3, 0, 1)
    M_low = np.einsum("...i,abij,...j->...ab", np.conj(psi), gen, psi).real
    DM_spin = np.zeros(psi.shape[:-1] + (4, 4, 4))
    for a in range(4):
        for b in range(4):
            DM_spin[..., :, a, b] = covariant_of_bilinear(psi, Dpsi, gen[a, b])
    dM = frame_d(grid, e, M_low)                                    # [..., c, a, b]
    nablaM = dM - np.einsum("...adc,d,...db->...cab", om, ETA_DIAG, M_low) \
        - np.einsum("...bdc,d,...ad->...cab", om, ETA_DIAG, M_low)
    Md_low = lower2(dual(lower2(M_low)))
    out["tensor"] = np.abs(DM_spin - (nablaM + 2 * g * al[..., :, None, None] * Md_low[..., None, :, :]))
    gend = np.einsum("abcd,c,d,cdij->abij", 0.5 * EPS4, ETA_DIAG, ETA_DIAG, tensor_generators())
    gend = lower2(gend.transpose(2, 3, 0, 1)).transpose(2, 3, 0, 1)
    DMd_spin = np.zeros_like(DM_spin)
    for a in range(4):
        for b in range(4):
            DMd_spin[..., :, a, b] = covariant_of_bilinear(psi, Dpsi, gend[a, b])
    dMd = frame_d(grid, e, Md_low)
    nablaMd = dMd - np.einsum("...adc,d,...db->...cab", om, ETA_DIAG, Md_low) \
        - np.einsum("...bdc,d,...ad->...cab", om, ETA_DIAG, Md_low)
    out["tensor_dual"] = np.abs(DMd_spin - (nablaMd - 2 * g * al[..., :, None, None] * M_low[..., None, :, :]))
    return out


def anholonomy(omega):
    """C[..., c, a, b] = omega_cab - omega_cba, so [d_a, d_b] = sum_c eta_c C_cab d_c."""
    return omega - np.swapaxes(omega, -1, -2)


def frame_curl(grid, e, omega, V):
    """d_a V_b - d_b V_a - sum_c eta_c C_cab V_c for a frame covector field V."""
    dV = frame_d(grid, e, V)
    C = anholonomy(omega)
    return dV - np.swapaxes(dV, -1, -2) - np.einsum("c,...cab,...c->...ab", ETA_DIAG, C, V)


def commutator_curvature(R_abcd, F=None, U=None, e_charge=0.0, g_coupling=0.0):
    """-(1/4) R_abcd rho1 alpha^c rho1 alpha^d + i e F_ab + i g rho3 U_ab: shape (..., 4, 4, 4, 4)."""
    D = -0.25 * np.einsum("...abcd,cdij->...abij", R_abcd, _PAIR).astype(complex)
    if F is not None:
        D = D + 1j * e_charge * F[..., None, None] * _I4
    if U is not None:
        D = D + 1j * g_coupling * U[..., None, None] * _r3
    return D


def commutator_from_connection(grid, e, omega, G):
    """d_a Gamma_b - d_b Gamma_a - [Gamma_a, Gamma_b] - sum_c eta_c C_cab Gamma_c by finite differences."""
    dG = frame_d(grid, e, G)                    # [..., a, b, i, j]
    C = anholonomy(omega)
    comm = np.einsum("...aij,...bjk->...abik", G, G) - np.einsum("...bij,...ajk->...abik", G, G)
    return dG - np.swapaxes(dG, -3, -4) - comm - np.einsum("c,...cab,...cij->...abij", ETA_DIAG, C, G)


def commutator_split_residual(grid, psi, e, omega, G, Dmat):
    """[D_a, D_b] psi - sum_c eta_c C_cab D_c psi + DD_ab psi, evaluated with finite differences."""
    Dpsi = covariant_derivative(grid, psi, G, e)
    DD = np.stack([covariant_derivative(grid, Dpsi[..., b, :], G, e) for b in range(4)], axis=-2)
    # DD[..., a, b, :] = D_a D_b psi
    comm = DD - np.swapaxes(DD, -2, -3)
    C = anholonomy(omega)
    return comm - np.einsum("c,...cab,...ci->...abi", ETA_DIAG, C, Dpsi) + np.einsum("...abij,...j->...abi", Dmat, psi)


def ricci_tetrad(R_abcd):
    """R_bd = sum_a eta_a R_abad."""
    return np.einsum("a,...abad->...bd", ETA_DIAG, R_abcd)


def contracted_commutator(R_abcd, F, U, e_charge, g_coupling):
    """alpha^a DD_ab from the full matrices and from the reduced Ricci form.

    With the Ricci tensor contracted on the first and third index (as ricci_tetrad and
    the coordinate Ricci tensor are) the curvature term is -(1/2) alpha^a R_ab; the
    totally antisymmetric part drops out by the first Bianchi identity.
    """
    Dm = commutator_curvature(R_abcd, F, U, e_charge, g_coupling)
    full = np.einsum("aij,...abjk->...bik", _al, Dm)
    Ric = ricci_tetrad(R_abcd)
    red = -0.5 * np.einsum("aij,...ab->...bij", _al, Ric).astype(complex)
    red = red + 1j * e_charge * np.einsum("aij,...ab->...bij", _al, F)
    red = red + 1j * g_coupling * np.einsum("jk,akl,...ab->...bjl", _r3, _al, U)
    return full, red
