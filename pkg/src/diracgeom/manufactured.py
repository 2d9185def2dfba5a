"""Synthetic spinor and tetrad fields with known differential properties.

These are the oracles for the residual evaluators: free plane-wave
superpositions seen from a position-dependent frame (exactly on-shell), the flat
spherical frame, and frames whose rotation coefficients are known in closed form.
Grid axes are ordered (t, x, y, z) unless a helper says otherwise.
"""
import numpy as np

from .algebra import MATS, TAU, ETA
from .errors import DomainError
from .grid import Grid

_al = MATS.alpha
_r1 = MATS.rho[0]


def plane_wave(p, m, spin=0):
    """Positive-energy solution u of (alpha.p + m rho1) u = E u with u^dagger u = 1.

    spin picks one of the two degenerate eigenvectors after diagonalizing the
    helicity-like operator sigma.p inside the positive-energy space.
    """
    p = np.asarray(p, dtype=float)
    H = np.einsum("k,kij->ij", p, _al[1:]) + m * _r1
    w, v = np.linalg.eigh(H)
    pos = v[:, w > 0]
    E = float(np.sqrt(p @ p + m * m))
    # split the degenerate pair by sigma_3 (or sigma.p when p != 0)
    n = p / np.linalg.norm(p) if np.linalg.norm(p) > 0 else np.array([0.0, 0.0, 1.0])
    sp = np.einsum("k,kij->ij", n, MATS.sigma)
    ws, vs = np.linalg.eigh(pos.conj().T @ sp @ pos)
    u = pos @ vs[:, 1 - spin]
    # fix the global phase so results are reproducible
    k = np.argmax(np.abs(u))
    u = u * np.exp(-1j * np.angle(u[k]))
    return u, E


def plane_wave_field(grid: Grid, modes, m):
    """Sum of c * u(p) exp(-i E t + i p.x) over modes given as (c, p, spin)."""
    T, X, Y, Z = grid.mesh()
    psi = np.zeros(grid.dims + (4,), dtype=complex)
    for c, p, spin in modes:
        u, E = plane_wave(p, m, spin)
        ph = np.exp(-1j * E * T + 1j * (p[0] * X + p[1] * Y + p[2] * Z))
        psi += c * ph[..., None] * u
    return psi


def lambda_field(z):
    """exp(z_k tau_k) for a complex field z of shape (..., 3), closed form."""
    s = np.sqrt(np.sum(z * z, axis=-1).astype(complex))
    small = np.abs(s) < 1e-8
    ssafe = np.where(small, 1.0, s)
    c = np.where(small, 1 + s * s / 2, np.cosh(s))
    sh = np.where(small, 1 + s * s / 6, np.sinh(ssafe) / ssafe)
    X = np.einsum("...k,kij->...ij", z, TAU)
    return c[..., None, None] * np.eye(2) + sh[..., None, None] * X


def spin_field(z):
    """Block matrices diag(lam, (lam^dagger)^-1) for lam = exp(z.tau), shape (..., 4, 4)."""
    lam = lambda_field(z)
    # unimodular: inverse is the adjugate
    adj = np.stack([np.stack([lam[..., 1, 1], -lam[..., 0, 1]], -1),
                    np.stack([-lam[..., 1, 0], lam[..., 0, 0]], -1)], -2)
    S = np.zeros(z.shape[:-1] + (4, 4), dtype=complex)
    S[..., :2, :2] = lam
    S[..., 2:, 2:] = np.conj(np.swapaxes(adj, -1, -2))
    return S


def lorentz_field(S):
    """Lambda^a_b with S^dagger alpha^a S = Lambda^a_b alpha^b, batched."""
    Sd = np.conj(np.swapaxes(S, -1, -2))
    tr = np.einsum("...ij,ajk,...kl,bli->...ab", Sd, _al, S, _al)
    return 0.25 * tr.real


def framed_field(psi_cart, S):
    """Frame components of a Cartesian spinor field and the matching tetrad.

    With psi_frame = S^-1 psi and e_(a)^mu = Lambda^mu_a the bilinears of
    psi_frame are the frame components of the Cartesian bilinears.
    """
    Lam = lorentz_field(S)
    e = np.swapaxes(Lam, -1, -2).copy()
    psi_f = np.linalg.solve(S, psi_cart[..., None])[..., 0]
    return psi_f, e


def smooth_generators(grid: Grid, amp=0.3, seed=0):
    """A smooth complex generator field z(x) for spin_field, deterministic in seed."""
    rng = np.random.default_rng(seed)
    T, X, Y, Z = grid.mesh()
    coeff = rng.normal(size=(3, 2, 4)) * amp
    ph = rng.uniform(0, 2 * np.pi, size=(3, 2))
    z = np.zeros(grid.dims + (3,), dtype=complex)
    for k in range(3):
        for part in range(2):
            arg = coeff[k, part, 0] * T + coeff[k, part, 1] * X + coeff[k, part, 2] * Y + coeff[k, part, 3] * Z
            val = amp * np.sin(arg + ph[k, part])
            z[..., k] += val if part == 0 else 1j * val
    return z


def identity_tetrad(grid: Grid):
    e = np.zeros(grid.dims + (4, 4))
    for a in range(4):
        e[..., a, a] = 1.0
    return e


def spherical_grid(r0, r1, th0, th1, n_r, n_th, n_phi=1, n_t=1):
    """Grid over (t, r, theta, phi); axes of extent 1 are symmetry directions."""
    dr = (r1 - r0) / (n_r - 1)
    dth = (th1 - th0) / (n_th - 1) if n_th > 1 else 1.0
    return Grid((n_t, n_r, n_th, n_phi), (1.0, dr, dth, 1.0), origin=(0.0, r0, th0, 0.0),
                coords=("t", "r", "theta", "phi"))


def spherical_flat_tetrad(grid: Grid):
    """e_0 = d_t, e_1 = theta hat, e_2 = phi hat, e_3 = r hat on flat space in (t, r, theta, phi)."""
    _, r, th, _ = grid.mesh()
    e = np.zeros(grid.dims + (4, 4))
    e[..., 0, 0] = 1.0
    e[..., 1, 2] = 1.0 / r
    e[..., 2, 3] = 1.0 / (r * np.sin(th))
    e[..., 3, 1] = 1.0
    return e


def spherical_flat_metric(grid: Grid):
    _, r, th, _ = grid.mesh()
    g = np.zeros(grid.dims + (4, 4))
    g[..., 0, 0] = 1.0
    g[..., 1, 1] = -1.0
    g[..., 2, 2] = -r ** 2
    g[..., 3, 3] = -(r * np.sin(th)) ** 2
    return g


def spherical_flat_omega(r, th):
    """Closed-form rotation coefficients of the flat spherical frame (same storage as grid.py)."""
    r = np.asarray(r, dtype=float)
    om = np.zeros(r.shape + (4, 4, 4))

    def put(a, b, c, v):
        om[..., a, b, c] = v
        om[..., b, a, c] = -v
    put(1, 3, 1, 1.0 / r)
    put(2, 3, 2, 1.0 / r)
    put(2, 1, 2, np.cos(th) / (np.sin(th) * r))
    return om


def rest_spinor(R, Upsilon, chi=0.0):
    """Spinor at rest in its frame, spin along e_3, with density R and chiral angle Upsilon.

    Its current is R e_0, its axial current R e_3, S = R cos Upsilon, P = R sin Upsilon.
    """
    R, U, chi = np.broadcast_arrays(np.asarray(R, float), np.asarray(Upsilon, float), np.asarray(chi, float))
    amp = np.sqrt(R / 2)
    psi = np.zeros(R.shape + (4,), dtype=complex)
    psi[..., 0] = amp * np.exp(1j * (chi - U / 2))
    psi[..., 2] = amp * np.exp(1j * (chi + U / 2))
    return psi


def boost_tz_tetrad(zeta):
    """Tetrad boosted by rapidity zeta(t, z) in the (t, z) plane of flat Cartesian space."""
    e = np.zeros(np.shape(zeta) + (4, 4))
    ch, sh = np.cosh(zeta), np.sinh(zeta)
    e[..., 0, 0], e[..., 0, 3] = ch, sh
    e[..., 3, 0], e[..., 3, 3] = sh, ch
    e[..., 1, 1] = 1.0
    e[..., 2, 2] = 1.0
    return e


def tetrad_from_current(J):
    """Tetrad with e_0 = J/|J| and the remaining legs by eta Gram-Schmidt on the coordinate axes.

    J is a coordinate vector field (..., 4) on flat space, timelike everywhere.
    Returns (e, R) with R = |J|.
    """
    J = np.asarray(J, float)
    R = np.sqrt(np.einsum("...m,mn,...n->...", J, ETA, J))
    legs = [J / R[..., None]]
    for k in (1, 2, 3):
        w = np.zeros_like(J)
        w[..., k] = 1.0
        for u in legs:
            w = w - (np.einsum("...m,mn,...n->...", w, ETA, u) /
                     np.einsum("...m,mn,...n->...", u, ETA, u))[..., None] * u
        n2 = -np.einsum("...m,mn,...n->...", w, ETA, w)
        legs.append(w / np.sqrt(n2)[..., None])
    return np.stack(legs, axis=-2), R


# ---------------------------------------------------------------- closed-form frame data

def _stencil(fn, X, k, delta):
    """4th-order central derivative of fn along coordinate k at points X (..., 4)."""
    def at(s):
        Y = np.array(X, dtype=float, copy=True)
        Y[..., k] += s * delta
        return fn(Y)
    return (-at(2) + 8 * at(1) - 8 * at(-1) + at(-2)) / (12 * delta)


def closed_form_frame_data(psi_fn, e_fn, X, delta=1e-3):
    """psi, e, d_mu psi, omega at points X of flat Cartesian space from closed-form callables.

    psi_fn(X) -> (..., 4) frame components, e_fn(X) -> (..., 4, 4) e[a, mu].
    Derivatives use a 4th-order stencil of width delta, far below grid spacings.
    """
    psi, e = psi_fn(X), e_fn(X)
    dpsi = np.stack([_stencil(psi_fn, X, k, delta) for k in range(4)], axis=-2)   # (..., mu, 4)
    de = np.stack([_stencil(e_fn, X, k, delta) for k in range(4)], axis=-3)        # (..., mu, a, nu)
    e_low = e * np.diag(ETA)
    # omega[a, b, c] = e_(b)nu e_(c)^mu d_mu e_(a)^nu on flat space
    om = np.einsum("...bn,...cm,...man->...abc", e_low, e, de)
    om = 0.5 * (om - np.swapaxes(om, -3, -2))
    return psi, e, dpsi, om


def _boost_field_functions(m, amp=1.0):
    """Closed-form (t, z) field: curl-free current R e_0 = grad phi and a rest spinor in that frame."""
    def phi_derivs(X):
        t, z = X[..., 0], X[..., 3]
        pt = 1.3 + 0.2 * amp * 0.5 * np.cos(z + 0.5 * t) + 0.1 * amp * np.sin(2 * z - t)
        pz = 0.2 * amp * np.cos(z + 0.5 * t) - 0.2 * amp * np.sin(2 * z - t)
        return pt, pz

    def e_fn(X):
        pt, pz = phi_derivs(X)
        return boost_tz_tetrad(np.arctanh(-pz / pt))

    def psi_fn(X):
        pt, pz = phi_derivs(X)
        t, z = X[..., 0], X[..., 3]
        R = np.sqrt(pt ** 2 - pz ** 2)
        U = 0.5 + 0.3 * amp * np.sin(t + 2 * z)
        chi = 0.4 * amp * np.cos(z - t)
        return rest_spinor(R, U, chi)
    return psi_fn, e_fn


def constraint_potentials(psi, dpsi, e, omega, m, g_coupling, e_charge):
    """Pointwise (A, aleph) making both omega-T and omega-P constraints hold exactly.

    Both constraints are affine in the eight real potentials, so the map is
    sampled on a basis and solved by least squares at every node. Returns
    (A, aleph, defect) with defect the largest remaining equation residual.
    """
    from .connection import rotation_part
    from .identities import constraint_equations
    Om = rotation_part(omega)
    D0 = np.einsum("...am,...mi->...ai", e, dpsi) - np.einsum("...aij,...j->...ai", Om, psi)
    shape = psi.shape[:-1]

    def residual(x):
        A, al = x[..., :4], x[..., 4:]
        D = D0 - 1j * e_charge * A[..., :, None] * psi[..., None, :] \
            - 1j * g_coupling * al[..., :, None] * np.einsum("ij,...j->...i", _rho3, psi)[..., None, :]
        return constraint_equations(psi, D, omega, m, g_coupling, al)
    b0 = residual(np.zeros(shape + (8,)))
    cols = []
    for k in range(8):
        x = np.zeros(shape + (8,))
        x[..., k] = 1.0
        cols.append(residual(x) - b0)
    Mx = np.stack(cols, axis=-1)
    sol = np.zeros(shape + (8,))
    flatM = Mx.reshape(-1, Mx.shape[-2], 8)
    flatb = b0.reshape(-1, b0.shape[-1])
    out = np.empty((flatM.shape[0], 8))
    for i in range(flatM.shape[0]):
        out[i] = np.linalg.lstsq(flatM[i], -flatb[i], rcond=None)[0]
    sol = out.reshape(shape + (8,))
    defect = np.abs(residual(sol)).max()
    return sol[..., :4], sol[..., 4:], float(defect)


_rho3 = MATS.rho[2]


def constraint_field(grid: Grid, m=1.0, g_coupling=1.0, e_charge=1.0, amp=1.0):
    """Field on a (t, x, y, z) grid depending on (t, z) that satisfies the omega-T and
    omega-P constraints in the continuum, with potentials solved from exact derivatives.

    Returns dict with psi, e, A, aleph, omega (closed form) and the solve defect.
    """
    psi_fn, e_fn = _boost_field_functions(m, amp)
    X = np.stack(grid.mesh(), axis=-1)
    psi, e, dpsi, om = closed_form_frame_data(psi_fn, e_fn, X)
    A, al, defect = constraint_potentials(psi, dpsi, e, om, m, g_coupling, e_charge)
    return {"psi": psi, "e": e, "A": A, "aleph": al, "omega": om, "defect": defect}


def normal_radial_omega(r, m=1.0, branch=1, w=0.7, v=0.3, p=0.2, q=-0.4):
    """Rotation coefficients of a normal radial frame satisfying the spherical bending relations.

    Built per node from free parameters (w, v, p, q) and the branch sign s. With
    t = 1/(2 w r^2) and X = 1/(r sqrt(m^2 r^2 - 1)):
    omega_131 = omega_232 = 1/r, omega_312 = omega_321 = s/r, omega_313 = t,
    omega_323 = s t, omega_100 = 2 w + t, omega_200 = s (2 w + t), so that
    w_1 = (omega_100 + omega_133)/2 = w and w_2 = s w; omega_023 = X/(2 w r),
    omega_013 = -s omega_023. Returns (omega, Upsilon, X) with Upsilon = arcsin(1/(m r))
    and X = -d Upsilon/dr.
    """
    r = np.asarray(r, dtype=float)
    if np.any(m * r <= 1):
        raise DomainError("needs m r > 1 at every node")
    s = 1.0 if branch > 0 else -1.0
    X = 1.0 / (r * np.sqrt(m * m * r * r - 1))
    t = 1 / (2 * w * r * r)
    om = np.zeros(r.shape + (4, 4, 4))

    def put(a, b, c, val):
        om[..., a, b, c] = val
        om[..., b, a, c] = -val
    put(1, 3, 1, 1 / r)
    put(2, 3, 2, 1 / r)
    put(3, 1, 2, s / r)
    put(3, 2, 1, s / r)
    put(3, 1, 3, t)
    put(3, 2, 3, s * t)
    put(1, 0, 0, 2 * w + t)
    put(2, 0, 0, s * (2 * w + t))
    put(0, 2, 3, X / (2 * w * r))
    put(0, 1, 3, -s * X / (2 * w * r))
    # ratios of the b = 0, 1, 2 equations and the normality of e_3
    put(3, 1, 0, v)
    put(3, 2, 0, -s * v)
    put(0, 3, 1, -v)
    put(0, 3, 2, s * v)
    put(0, 1, 1, p)
    put(0, 2, 1, s * p)
    put(0, 1, 2, q)
    put(0, 2, 2, s * q)
    return om, np.arcsin(1 / (m * r)), X
