"""Orthonormal tetrad built from the bilinears of a spinor, its reciprocal and the metric."""
from dataclasses import dataclass

import numpy as np

from .algebra import ETA, bilinears, dual, lower, lower2, mink
from .errors import DegenerateDensity, SingularTetrad

FROM_EH = "from_EH"
GAUGE_COMPLETED = "gauge_completed"

# The transverse seed vectors are quadratic in psi and vanish identically for a
# single commuting spinor (M is a combination of j^J and its dual), so rounding
# noise must not be mistaken for a direction. Relative to psi^dagger psi.
SEED_THRESHOLD = 1e-8


@dataclass
class Tetrad:
    e: np.ndarray               # e[a, mu] = e_(a)^mu
    einv: np.ndarray            # einv[mu, a] = e^(a)_mu
    gauge_flag: str = GAUGE_COMPLETED


@dataclass
class MetricPoint:
    g: np.ndarray
    ginv: np.ndarray
    sqrt_minus_g: float


def transverse_seeds(b):
    """The four transverse vectors built from M and its dual, returned with upper index.

    Keys: 'E', 'E*', 'H', 'H*'.
    """
    R = b.R
    jl, Jl = lower(b.j), lower(b.Jax)
    Ml, Mdl = lower2(b.M), lower2(dual(b.M))
    d = np.eye(4)
    projJ = d + np.outer(b.Jax, Jl) / R ** 2
    projj = d - np.outer(b.j, jl) / R ** 2
    cov = {
        "E": (b.j / R) @ Ml @ projJ,
        "E*": (b.Jax / R) @ Mdl @ projj,
        "H": (b.Jax / R) @ Ml @ projj,
        "H*": (b.j / R) @ Mdl @ projJ,
    }
    return {k: lower(v) for k, v in cov.items()}


def _spacelike_unit(v, basis):
    """Remove components along the orthonormal vectors in basis, then eta-normalize."""
    w = np.array(v, dtype=float)
    # two passes of modified Gram-Schmidt keep orthogonality at rounding level for boosted frames
    for _ in range(2):
        for u in basis:
            w = w - mink(w, u) / mink(u, u) * u
    n2 = -mink(w, w)
    return w, n2


def _complete(e0, e3, seeds=None):
    """Pick e1, e2 orthonormal to e0, e3. Seeds are tried first, then coordinate axes."""
    cands = list(seeds or []) + [np.eye(4)[k] for k in (1, 2, 3)]
    basis = [e0, e3]
    legs = []
    for _ in range(2):
        best, best_n2 = None, 0.0
        for c in cands:
            w, n2 = _spacelike_unit(c, basis)
            # strict '>' keeps the first (lowest index) candidate on ties
            if n2 > best_n2 * (1 + 1e-12) + 1e-300:
                best, best_n2 = w, n2
        if best is None or best_n2 <= 0:
            raise SingularTetrad("could not complete the transverse plane")
        u = best / np.sqrt(best_n2)
        legs.append(u)
        basis.append(u)
    return legs


def build_tetrad(b, chart="local"):
    """Tetrad with e_(0) = j/R, e_(3) = Jax/R and transverse legs from the seed vectors.

    chart='local' gives components in the chart where the ordinal frame is
    orthonormal under eta. chart='world_time' rescales the time coordinate so that
    dt = R ds_0, which puts 1/R^2 on g_00 for a spinor at rest.
    """
    if np.any(b.degenerate) or b.R <= 1e-12 * b.norm2:
        raise DegenerateDensity(f"R = {float(b.R):.3e}")
    e0 = b.j / b.R
    e3, _ = _spacelike_unit(b.Jax / b.R, [e0])
    e3 = e3 / np.sqrt(-mink(e3, e3))
    seeds = transverse_seeds(b)
    ups = abs(float(np.arctan2(b.P, b.S)))
    pair = ("H", "H*") if ups < np.pi / 4 else ("E", "E*")
    thr = SEED_THRESHOLD * b.norm2
    use = [seeds[k] for k in pair if -mink(seeds[k], seeds[k]) > thr ** 2]
    flag = FROM_EH if len(use) == 2 else GAUGE_COMPLETED
    e1, e2 = _complete(e0, e3, use if flag == FROM_EH else None)
    e = np.array([e0, e1, e2, e3])
    if np.linalg.det(e) < 0:
        e[2] = -e[2]
    if chart == "world_time":
        e[:, 0] *= b.R
    elif chart != "local":
        raise ValueError(f"unknown chart {chart!r}")
    return Tetrad(e=e, einv=reciprocal(e), gauge_flag=flag)


def tetrad_from_spinor(psi, chart="local"):
    return build_tetrad(bilinears(psi), chart=chart)


def reciprocal(e, tol=1e-10):
    """Co-tetrad einv[mu, a] with sum_mu e[a, mu] einv[mu, b] = delta_ab."""
    e = np.asarray(e, dtype=float)
    det = np.linalg.det(e)
    if abs(det) < tol:
        raise SingularTetrad(f"|det e| = {abs(det):.3e}")
    return np.linalg.inv(e)


def metric_from_tetrad(t):
    """g_{mu nu} = eta_ab e^(a)_mu e^(b)_nu and its inverse from the legs directly."""
    e = t.e if isinstance(t, Tetrad) else np.asarray(t)
    einv = t.einv if isinstance(t, Tetrad) else reciprocal(e)
    g = einv @ ETA @ einv.T
    ginv = e.T @ ETA @ e
    det = np.linalg.det(g)
    if not det < 0:
        raise SingularTetrad(f"metric determinant {det:.3e} not negative")
    return MetricPoint(g=g, ginv=ginv, sqrt_minus_g=float(np.sqrt(-det)))


def tetrad_residuals(t, m=None):
    """Residuals of both reciprocal contractions and of g e_a e_b = eta_ab."""
    if m is None:
        m = metric_from_tetrad(t)
    e, einv = t.e, t.einv
    I4 = np.eye(4)
    return {
        "e_einv": float(np.abs(e @ einv - I4).max()),
        "einv_e": float(np.abs(einv @ e - I4).max()),
        "g_e_e": float(np.abs(e @ m.g @ e.T - ETA).max()),
        "g_ginv": float(np.abs(m.g @ m.ginv - I4).max()),
        "orientation": float(max(0.0, -np.linalg.det(e))),
    }
