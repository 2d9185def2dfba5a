import functools

import numpy as np
import pytest

from diracgeom.grid import Grid
from diracgeom.manufactured import (plane_wave_field, spin_field, smooth_generators, framed_field,
                                    constraint_field)
from diracgeom.identities import spinor_fields

MODES = [(1.0, (0.3, 0, 0.2), 0), (0.5j, (-0.4, 0, 0.1), 1), (0.3, (0.1, 0, -0.5), 0)]


def observed_order(e_coarse, e_fine, factor=2.0):
    return float(np.log(e_coarse / e_fine) / np.log(factor))


@functools.lru_cache(maxsize=None)
def framed_plane_waves(n, m=1.3):
    """Superposed free plane waves seen in a smoothly rotating and boosting frame (on shell)."""
    h = 1.0 / (n - 1)
    gr = Grid((n, n, 1, n), (h, h, 1, h))
    psi = plane_wave_field(gr, MODES, m)
    S = spin_field(smooth_generators(gr, 0.4, 1))
    pf, e = framed_field(psi, S)
    return spinor_fields(gr, pf, e, m=m)


@functools.lru_cache(maxsize=None)
def constraint_solution(n, m=1.0, g=0.8, ec=0.6):
    """The (t, z) field whose A and aleph are solved from both momentum constraints."""
    h = 1.0 / (n - 1)
    gr = Grid((n, 1, 1, n), (h, 1, 1, h))
    cf = constraint_field(gr, m=m, g_coupling=g, e_charge=ec)
    f = spinor_fields(gr, cf["psi"], cf["e"], A=cf["A"], aleph=cf["aleph"], e_charge=ec,
                      g_coupling=g, m=m, omega=cf["omega"])
    return f, cf


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@functools.lru_cache(maxsize=None)
def curved_frame_field(n):
    """A smooth non-orthonormal-looking frame with spinor, A and aleph fields on (t, x, y)."""
    h = 1.0 / (n - 1)
    gr = Grid((n, n, n, 1), (h, h, h, 1.0))
    T, X, Y, _ = gr.mesh()
    e = np.zeros(gr.dims + (4, 4))
    for a in range(4):
        e[..., a, a] = 1
    e[..., 0, 0] += 0.2 * np.sin(X + Y)
    e[..., 1, 1] += 0.3 * np.cos(T * X)
    e[..., 2, 1] = 0.1 * np.sin(Y * T)
    e[..., 3, 2] = 0.2 * X * Y
    e[..., 0, 3] = 0.15 * np.cos(X - T)
    e[..., 2, 2] += 0.1 * Y * T
    e[..., 1, 0] = 0.1 * np.sin(Y)
    psi = np.stack([np.exp(1j * X) * (1 + 0.3 * Y), 0.5 * np.cos(T + Y) + 0.2j,
                    0.4 * np.sin(X * Y) + 1j * T, 0.7 + 0.1 * X * T], -1)
    A = np.stack([0.3 * np.sin(X), 0.2 * Y * T, 0.1 * np.cos(X + T), 0 * X], -1)
    aleph = np.stack([0.1 * T * X, 0.2 * np.sin(Y), 0.3 * X, 0.1 * np.cos(T)], -1)
    return gr, e, psi, A, aleph
