import numpy as np
import pytest

from diracgeom.errors import BlowUp, FixedPointDivergence
from diracgeom.evolve import (Evolution1p1Config, Packet, run, step, initial_state, closure_R, reduce_1p1,
                              apply_H, conservation_drift, group_velocity, refraction_ensemble,
                              localization_time, to_csv, COLUMNS)

SMALL = dict(N=128, L=64.0)


def test_linear_conservation():
    drift, res = conservation_drift(Evolution1p1Config(nonlinear=False, steps=1000, initial=Packet(momentum=0.5)))
    assert drift < 1e-8
    assert res.status == "ok"


def test_nonlinear_conservation_with_fixed_background():
    cfg = Evolution1p1Config(steps=300, bump_height=1.0, bump_center=10.0, **SMALL)
    drift, _ = conservation_drift(cfg)
    assert drift < 1e-10


def test_vacuum_bit_matches_linear():
    lin = run(Evolution1p1Config(nonlinear=False, steps=200, **SMALL))
    vac = run(Evolution1p1Config(nonlinear=True, R0=1.0, steps=200, **SMALL))
    assert np.array_equal(lin.final.xi, vac.final.xi)
    assert [r["centroid"] for r in lin.rows] == [r["centroid"] for r in vac.rows]


def test_zero_field_stays_zero():
    res = run(Evolution1p1Config(steps=20, initial=Packet(amplitude=0.0), **SMALL))
    assert not np.any(res.final.xi) and res.status == "ok"


def test_group_velocity_matches_free_value():
    v, v0, _ = group_velocity(Evolution1p1Config(L=160, N=512, nonlinear=False, steps=400,
                                                 initial=Packet(momentum=0.5, width=10.0)))
    assert abs(v / v0 - 1) < 0.01


def test_hamiltonian_is_hermitian(rng):
    cfg = Evolution1p1Config(**SMALL)
    k = reduce_1p1(cfg)["k"]
    u = rng.normal(size=(cfg.N, 4)) + 1j * rng.normal(size=(cfg.N, 4))
    v = rng.normal(size=(cfg.N, 4)) + 1j * rng.normal(size=(cfg.N, 4))
    lhs = np.vdot(u, apply_H(v, k, cfg.m))
    rhs = np.vdot(apply_H(u, k, cfg.m), v)
    assert abs(lhs - rhs) < 1e-10 * abs(lhs)


def test_plane_wave_modulus_stationary():
    cfg = Evolution1p1Config(nonlinear=False, steps=50, **SMALL)
    x = cfg.grid()
    p = 2 * np.pi * 3 / cfg.L
    w, vecs = np.linalg.eigh(p * np.diag([1, -1, -1, 1]) + cfg.m * np.block([[0 * np.eye(2), np.eye(2)],
                                                                             [np.eye(2), 0 * np.eye(2)]]))
    xi = np.exp(1j * p * x)[:, None] * vecs[:, -1][None, :]
    st = initial_state(cfg)
    st.xi, st.R = xi, np.ones(cfg.N)
    for _ in range(50):
        st = step(st, cfg)
    assert np.abs(np.abs(st.xi) - np.abs(xi)).max() < 1e-10


def test_refraction_sign_ensemble():
    drifts = refraction_ensemble(seed=1, n_runs=10, steps=80)
    assert np.all(drifts > 0)


@pytest.mark.parametrize("a,tol", [(0.0, 1e-10), (0.1, 1e-8)])
def test_mirror_symmetric_setup_does_not_drift(a, tol):
    res = run(Evolution1p1Config(steps=200, bump_height=1.0, bump_center=0.0, self_coupling=a,
                                 initial=Packet(center=0.0, spinor=(1, 0, 1, 0))))
    assert np.abs(res.column("centroid")).max() < tol


def test_localization_faster_with_stronger_coupling():
    times = [localization_time(Evolution1p1Config(steps=1500, self_coupling=a,
                                                  initial=Packet(width=3.0, amplitude=1.0), **SMALL))[0]
             for a in (0.2, 0.35, 0.5)]
    assert np.all(np.isfinite(times))
    assert times[0] > times[1] > times[2]


def test_caustic_stops_run():
    res = run(Evolution1p1Config(steps=1500, self_coupling=0.5, initial=Packet(width=3.0, amplitude=1.0), **SMALL))
    assert res.status == "caustic" and res.stop_time > 0
    assert "t =" in res.message


def test_blowup_on_step():
    cfg = Evolution1p1Config(steps=10, self_coupling=0.5, initial=Packet(width=3.0), **SMALL)
    st = initial_state(cfg)
    st.xi = st.xi * 3.0          # a |xi|^2 > 1 somewhere: the closure has no fixed point
    with pytest.raises(BlowUp):
        step(st, cfg)


def test_closure_fixed_point():
    rho = np.array([0.1, 0.5, 0.9])
    xi = np.sqrt(rho)[:, None] * np.array([1, 0, 0, 0])[None, :]
    R, _ = closure_R(xi, np.ones(3), 0.5)
    assert np.allclose(R, 1 / (1 - 0.5 * rho))
    with pytest.raises(FixedPointDivergence):
        closure_R(xi, np.ones(3), 2.0)


def test_config_validation():
    with pytest.raises(ValueError):
        Evolution1p1Config(N=32)
    with pytest.raises(ValueError):
        Evolution1p1Config(L=64.0, N=128, dt=1.0)
    with pytest.raises(ValueError):
        Evolution1p1Config(R0=1.0, bump_height=-2.0)


def test_initial_state_consistent():
    st = initial_state(Evolution1p1Config(self_coupling=0.3, initial=Packet(width=3.0, amplitude=0.8), **SMALL))
    assert st.diagnostics["init_consistency"] < 1e-9


def test_csv_columns():
    res = run(Evolution1p1Config(nonlinear=False, steps=20, **SMALL))
    text = to_csv(res.rows)
    assert text.splitlines()[0].split(",") == list(COLUMNS)
    assert len(text.splitlines()) == len(res.rows) + 1
