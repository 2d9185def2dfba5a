"""Finite-difference geometry on structured 4D grids.

Fields are plain arrays whose first four axes are the grid axes, e.g. a metric
field has shape (*dims, 4, 4). An axis of extent 1 is treated as a direction of
symmetry: the field does not depend on it and its derivative is zero.

Rotation coefficients are stored as omega[a, b, c] = e_(b)nu e_(c)^mu nabla_mu e_(a)^nu,
antisymmetric in (a, b); the last index is the direction of differentiation.
"""
from dataclasses import dataclass

import numpy as np

from .algebra import ETA, ETA_DIAG, EPS4
from .errors import GridTooSmall, SingularMetric

PERIODIC = "periodic"
ONE_SIDED = "one_sided"
MIN_EXTENT = 5


@dataclass
class Grid:
    dims: tuple
    spacing: tuple
    origin: tuple = (0.0, 0.0, 0.0, 0.0)
    coords: tuple = ("x0", "x1", "x2", "x3")
    boundary: tuple = (ONE_SIDED,) * 4

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        self.spacing = tuple(float(h) for h in self.spacing)
        self.origin = tuple(float(o) for o in self.origin)
        if isinstance(self.boundary, str):
            self.boundary = (self.boundary,) * 4
        if len(self.dims) != 4 or len(self.spacing) != 4:
            raise ValueError("grid needs four extents and four spacings")
        if any(h <= 0 for h in self.spacing):
            raise ValueError("spacings must be positive")

    def axis(self, k):
        return self.origin[k] + self.spacing[k] * np.arange(self.dims[k])

    def mesh(self):
        """Coordinate arrays, each of shape dims."""
        return np.meshgrid(*(self.axis(k) for k in range(4)), indexing="ij")

    def active(self, k):
        return self.dims[k] > 1

    def refine(self, factor=2):
        """Same physical extent with spacing divided by factor on every active axis."""
        dims, sp = [], []
        for k in range(4):
            if not self.active(k):
                dims.append(1)
                sp.append(self.spacing[k])
            elif self.boundary[k] == PERIODIC:
                dims.append(self.dims[k] * factor)
                sp.append(self.spacing[k] / factor)
            else:
                dims.append((self.dims[k] - 1) * factor + 1)
                sp.append(self.spacing[k] / factor)
        return Grid(tuple(dims), tuple(sp), self.origin, self.coords, self.boundary)

    def interior(self, margin=1):
        """Index tuple dropping margin nodes at one-sided edges of active axes."""
        sl = []
        for k in range(4):
            if self.active(k) and self.boundary[k] != PERIODIC and margin:
                sl.append(slice(margin, self.dims[k] - margin))
            else:
                sl.append(slice(None))
        return tuple(sl)


def partial(grid, f, axis):
    """d f / d x^axis: central 2nd order inside, one-sided 2nd order at edges or periodic wrap."""
    f = np.asarray(f)
    n = grid.dims[axis]
    if n == 1:
        return np.zeros_like(f)
    if n < MIN_EXTENT:
        raise GridTooSmall(f"axis {axis} has {n} nodes, need at least {MIN_EXTENT}")
    h = grid.spacing[axis]
    if grid.boundary[axis] == PERIODIC:
        return (np.roll(f, -1, axis=axis) - np.roll(f, 1, axis=axis)) / (2 * h)
    out = np.empty_like(f)
    fm = np.moveaxis(f, axis, 0)
    om = np.moveaxis(out, axis, 0)
    om[1:-1] = (fm[2:] - fm[:-2]) / (2 * h)
    om[0] = (-3 * fm[0] + 4 * fm[1] - fm[2]) / (2 * h)
    om[-1] = (3 * fm[-1] - 4 * fm[-2] + fm[-3]) / (2 * h)
    return out


def gradient(grid, f):
    """All four partials stacked on a new axis right after the grid axes: (*dims, 4, ...)."""
    return np.stack([partial(grid, f, k) for k in range(4)], axis=4)


def frame_derivative(grid, e, f):
    """Directional derivatives d_a f = e_(a)^mu d_mu f for a field f of shape (*dims, ...)."""
    return _contract_frame(e, gradient(grid, f))


def _contract_frame(e, df):
    # e: (*dims, 4, 4) as e[a, mu]; df: (*dims, 4(mu), *rest)
    rest = df.shape[5:]
    dflat = df.reshape(df.shape[:5] + (-1,))
    out = np.einsum("...am,...mk->...ak", e, dflat)
    return out.reshape(out.shape[:5] + rest)


def metric_inverse(g):
    det = np.linalg.det(g)
    if np.any(np.abs(det) < 1e-14) or not np.all(np.isfinite(det)):
        raise SingularMetric("metric is singular at some node")
    return np.linalg.inv(g)


def christoffel(grid, g, dg=None):
    """Gamma^s_{mu nu} with shape (*dims, 4(s), 4(mu), 4(nu)) from finite differences of g."""
    ginv = metric_inverse(g)
    if dg is None:
        dg = gradient(grid, g)              # dg[..., l, m, n] = d_l g_mn
    # d_m g_ln + d_n g_lm - d_l g_mn
    t = np.einsum("...mln->...lmn", dg) + np.einsum("...nlm->...lmn", dg) - dg
    return 0.5 * np.einsum("...sl,...lmn->...smn", ginv, t)


def metric_from_tetrads(einv):
    """g_{mu nu} = eta_ab e^(a)_mu e^(b)_nu for a co-tetrad field einv[..., mu, a]."""
    return np.einsum("...ma,a,...na->...mn", einv, ETA_DIAG, einv)


def covariant_derivative_vector(grid, v, gam):
    """nabla_mu v^nu with shape (*dims, 4(mu), 4(nu))."""
    dv = gradient(grid, v)
    return dv + np.einsum("...nml,...l->...mn", gam, v)


def metric_compatibility(grid, g, gam):
    """nabla_l g_mn, which vanishes for the Levi-Civita connection."""
    dg = gradient(grid, g)
    return dg - np.einsum("...slm,...sn->...lmn", gam, g) - np.einsum("...sln,...ms->...lmn", gam, g)


@dataclass
class RotationCoefficients:
    omega: np.ndarray           # (*dims, 4, 4, 4)
    w: np.ndarray               # (*dims, 4)
    k: np.ndarray               # (*dims, 4), k[..., 0] unused (zero)
    aleph: np.ndarray = None


def rotation_coefficients(grid, e, g=None, gam=None, antisymmetrize=True):
    """omega[a, b, c] = e_(b)nu e_(c)^mu nabla_mu e_(a)^nu for a tetrad field e[..., a, mu]."""
    if g is None:
        g = metric_from_tetrads(np.linalg.inv(e))
    if gam is None:
        gam = christoffel(grid, g)
    de = gradient(grid, e)                      # (*dims, mu, a, nu)
    nab = de + np.einsum("...nml,...al->...man", gam, e)
    e_low = np.einsum("...mn,...bn->...bm", g, e)
    omega = np.einsum("...bn,...cm,...man->...abc", e_low, e, nab)
    if antisymmetrize:
        omega = 0.5 * (omega - np.swapaxes(omega, -3, -2))
    return derived_invariants(omega)


def derived_invariants(omega):
    w = -0.5 * np.einsum("acdb,...acd->...b", -EPS4, omega)
    k = np.zeros(omega.shape[:-3] + (4,))
    for i in range(1, 4):
        for jx in range(1, 4):
            if jx != i:
                k[..., i] += omega[..., jx, i, jx]
    return RotationCoefficients(omega=omega, w=w, k=k)


def reconstruct_nabla_e(e, g, omega):
    """nabla_mu e_(b)nu rebuilt from omega: sum_{a,c} eta_a eta_c omega_bca e^(a)... in coordinates.

    With e_(b)nu;mu = sum_{c,a} eta_(c) eta_(a) omega[b, c, a] e_(c)nu e_(a)mu.
    """
    e_low = np.einsum("...mn,...bn->...bm", g, e)
    return np.einsum("c,a,...bca,...cn,...am->...mbn", ETA_DIAG, ETA_DIAG, omega, e_low, e_low)


def direct_nabla_e_lower(grid, e, g, gam):
    e_low = np.einsum("...mn,...bn->...bm", g, e)
    de = gradient(grid, e_low)                  # (*dims, mu, b, nu)
    return de - np.einsum("...lmn,...bl->...mbn", gam, e_low)


@dataclass
class CurvatureBundle:
    riemann_coord: np.ndarray   # R^r_{s m n} lowered to R_{r s m n}
    riemann_tetrad: np.ndarray  # R_{abcd}
    ricci: np.ndarray
    scalar: np.ndarray


def riemann_coordinate(grid, gam, g):
    """R_{r s m n} = g_{r p} R^p_{s m n},
    R^p_{s m n} = d_m Gam^p_{n s} - d_n Gam^p_{m s} + Gam^p_{m l} Gam^l_{n s} - Gam^p_{n l} Gam^l_{m s}."""
    dG = gradient(grid, gam)                    # (*dims, d, p, a, b)
    term = np.einsum("...mpns->...psmn", dG)
    term = term - np.einsum("...mpns->...psnm", dG)
    quad = np.einsum("...pml,...lns->...psmn", gam, gam)
    Rup = term + quad - np.swapaxes(quad, -1, -2)
    return np.einsum("...rp,...psmn->...rsmn", g, Rup)


def ricci_from_riemann(Rlow, ginv):
    """R_{s n} = g^{r m} R_{r s m n}; scalar = g^{s n} R_{s n}."""
    ric = np.einsum("...rm,...rsmn->...sn", ginv, Rlow)
    return ric, np.einsum("...sn,...sn->...", ginv, ric)


def riemann_tetrad_from_omega(grid, e, omega):
    """Tetrad Riemann tensor from rotation coefficients.

    R_abcd = d_d omega_abc - d_c omega_abd
             + sum_f eta_f [omega_fad omega_fbc - omega_fac omega_fbd + omega_abf (omega_fcd - omega_fdc)]
    with d_d = e_(d)^mu d_mu.
    """
    dom = _contract_frame(e, gradient(grid, omega))   # (*dims, d, a, b, c)
    t1 = np.einsum("...dabc->...abcd", dom)
    t2 = np.einsum("...cabd->...abcd", dom)
    q = np.einsum("f,...fad,...fbc->...abcd", ETA_DIAG, omega, omega)
    q = q - np.einsum("f,...fac,...fbd->...abcd", ETA_DIAG, omega, omega)
    anh = omega - np.swapaxes(omega, -1, -2)           # omega_fcd - omega_fdc
    q = q + np.einsum("f,...abf,...fcd->...abcd", ETA_DIAG, omega, anh)
    return t1 - t2 + q


def project_riemann(Rlow, e):
    """R_abcd = R_{r s m n} e_(a)^r e_(b)^s e_(c)^m e_(d)^n."""
    return np.einsum("...rsmn,...ar,...bs,...cm,...dn->...abcd", Rlow, e, e, e, e)


def riemann(grid, g, e=None, omega=None):
    """Coordinate curvature from g; tetrad form from omega when a tetrad field is supplied."""
    gam = christoffel(grid, g)
    Rlow = riemann_coordinate(grid, gam, g)
    ginv = metric_inverse(g)
    ric, scal = ricci_from_riemann(Rlow, ginv)
    Rt = None
    if e is not None:
        if omega is None:
            omega = rotation_coefficients(grid, e, g, gam).omega
        Rt = riemann_tetrad_from_omega(grid, e, omega)
    return CurvatureBundle(riemann_coord=Rlow, riemann_tetrad=Rt, ricci=ric, scalar=scal)


def time_function_diagnostics(grid, e, omega, R, g=None):
    """Residual fields for the normal time-congruence conditions.

    (i)   omega_0ab - omega_0ba over spatial a, b
    (ii)  d ln R / d s_a + omega_a00 for spatial a
    (iii) nabla_nu e_(0)^nu + d ln R / d s_0, with the divergence also compared to
          sum_a eta_a omega_0aa
    (iv)  d_t (R sqrt(det of the spatial metric block))
    """
    if g is None:
        g = metric_from_tetrads(np.linalg.inv(e))
    lnR = np.log(R)
    dlnR = _contract_frame(e, gradient(grid, lnR))          # (*dims, 4)
    om = omega
    normality = np.abs(om[..., 0, 1:, 1:] - np.swapaxes(om[..., 0, 1:, 1:], -1, -2))
    grad_cons = np.abs(dlnR[..., 1:] + om[..., 1:, 0, 0])
    sq = np.sqrt(np.abs(np.linalg.det(g)))
    div = sum(partial(grid, sq * e[..., 0, m], m) for m in range(4)) / sq
    div_from_omega = np.einsum("a,...aa->...", ETA_DIAG, om[..., 0, :, :])
    divergence = np.abs(div + dlnR[..., 0])
    spatial = np.abs(np.linalg.det(g[..., 1:, 1:]))
    conservation = np.abs(partial(grid, R * np.sqrt(spatial), 0))
    return {
        "normality": normality,
        "gradient_consistency": grad_cons,
        "divergence": divergence,
        "divergence_vs_omega": np.abs(div - div_from_omega),
        "volume_conservation": conservation,
    }
