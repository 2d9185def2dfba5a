import numpy as np
import pytest

from diracgeom.algebra import ETA, MATS, random_spinors
from diracgeom.errors import DomainError, BranchAmbiguity
from diracgeom.grid import Grid, rotation_coefficients
from diracgeom.identities import (current_identities, momentum_report, momentum_constraints, aleph_from_bending,
                                  curvature_constraint, spherical_relations, axial_decomposition,
                                  pion_wave_residual, field_source, circular_source_split, frame_field_strength,
                                  scalar_wave, maxwell_residuals, field_from_potential, gyromagnetic_moment,
                                  bending_equations, ResidualReport)
from diracgeom.manufactured import (spherical_grid, spherical_flat_tetrad, spherical_flat_metric,
                                    spherical_flat_omega, normal_radial_omega, tetrad_from_current,
                                    identity_tetrad)
from conftest import framed_plane_waves, constraint_solution, observed_order

SIZES = (17, 33)


def series(build, label, report):
    return [report(build(n)).max(label) for n in SIZES]


# ---------------------------------------------------------------- currents and momentum tensors

@pytest.mark.parametrize("label", ["vector_current_conservation", "axial_current_balance"])
def test_current_identities_second_order(label):
    reps = [current_identities(framed_plane_waves(n)) for n in SIZES]
    assert all(r.context["on_shell"] and r[label]["asserted"] for r in reps)
    assert observed_order(reps[0].max(label), reps[1].max(label)) > 1.8


@pytest.mark.parametrize("label", ["imag_T_half_nabla_j", "imag_P_half_nabla_J"])
def test_momentum_imaginary_parts(label):
    e = series(framed_plane_waves, label, momentum_report)
    assert observed_order(*e) > 1.8


def test_off_shell_field_not_asserted():
    f, _ = constraint_solution(17)
    rep = current_identities(f)
    assert not rep.context["on_shell"]
    assert rep.failures(1e-6) == []


# ---------------------------------------------------------------- omega-T / omega-P constraints

@pytest.fixture(scope="module")
def constraint_reports():
    return [momentum_constraints(constraint_solution(n)[0]) for n in (17, 33, 65)]


@pytest.mark.parametrize("label", ["momentum_constraint", "stress_constraint", "stress_constraint_gradient_form",
                                   "momentum_constraint_imag_vanishes", "stress_constraint_real_vanishes",
                                   "gradient_form_vs_imag_stress", "aleph_pair_agreement"])
def test_constraint_pair_second_order(constraint_reports, label):
    e = [r.max(label) for r in constraint_reports]
    assert all(r[label]["asserted"] for r in constraint_reports)
    assert observed_order(e[1], e[2]) > 1.8


def test_constraint_curl_form_needs_shell(constraint_reports):
    assert not constraint_reports[0]["curl_form_vs_real_momentum"]["asserted"]


def test_constraint_independent_forms_on_shell():
    reps = [momentum_constraints(framed_plane_waves(n), expect_constraints=False) for n in SIZES]
    for lab in ("curl_form_vs_real_momentum", "gradient_form_vs_imag_stress"):
        assert observed_order(reps[0].max(lab), reps[1].max(lab)) > 1.8
    # a generic on-shell superposition does not obey the constraints
    assert reps[1].max("stress_constraint") > 0.1


# ---------------------------------------------------------------- bending, curvature and spherical relations

R_NODES = np.linspace(1.5, 4.0, 11)


@pytest.mark.parametrize("branch", [1, -1])
def test_aleph_from_normal_radial_frame(branch):
    om, U, X = normal_radial_omega(R_NODES, branch=branch)
    al, rep = aleph_from_bending(om, U, 1.0, g_coupling=0.5, form="normal_radial")
    assert np.abs(2 * 0.5 * al[..., 3] - X).max() < 1e-12
    assert np.abs(al[..., :3]).max() < 1e-12
    assert rep.failures(1e-12) == []
    assert rep.context["ill_conditioned_nodes"] == 0


def test_general_bending_form_runs(rng):
    om = rng.normal(size=(6, 4, 4, 4))
    om = om - np.swapaxes(om, -3, -2)
    Ls, Lc, _ = bending_equations(om)
    assert Ls.shape == Lc.shape == (6, 4)
    _, rep = aleph_from_bending(om, rng.uniform(0, 1, 6), 1.0, expect_consistent=False)
    assert rep.failures(1e-12) == []
    with pytest.raises(ValueError):
        bending_equations(om, form="helix")


def test_aleph_gradient_property_second_order():
    errs = []
    for n in (21, 41, 81):
        gr = spherical_grid(1.5, 4.0, 0.5, 1.2, n, 5)
        _, r, _, _ = gr.mesh()
        om, U, _ = normal_radial_omega(r)
        e = spherical_flat_tetrad(gr)
        fo = rotation_coefficients(gr, e, spherical_flat_metric(gr)).omega
        _, rep = aleph_from_bending(om, U, 1.0, g_coupling=1.0, form="normal_radial", grid=gr, e=e,
                                    frame_omega=fo, region=(r >= 2.0) & (r <= 3.5))
        errs.append(rep.max("gradient_property"))
        assert rep.max("gradient_curl") < 1e-12
    for a, b in zip(errs, errs[1:]):
        assert 3.7 < a / b < 4.3


def test_curvature_constraint_spherical_ansatz():
    gr = spherical_grid(1.2, 3.0, 0.4, 2.0, 9, 9)
    _, r, th, _ = gr.mesh()
    # the flat spherical frame bends with curvature sum 2/r
    rep = curvature_constraint(spherical_flat_omega(r, th), np.arcsin(1 / r), 1.0)
    assert rep.max("curvature_constraint") < 1e-12
    om, U, _ = normal_radial_omega(R_NODES, m=1.0)
    rep = curvature_constraint(om, U, 1.0)
    assert rep.max("curvature_constraint") < 1e-12 and rep.max("mass_bound") == 0.0
    assert rep.context["max_sin_upsilon"] < 1


def test_curvature_bound_violation_reported():
    om = spherical_flat_omega(np.array([0.5]), np.array([1.0]))
    rep = curvature_constraint(om, np.array([np.pi / 2]), 1.0)
    assert rep.max("mass_bound") > 0
    assert rep.context["saturated_nodes"] == 1


@pytest.mark.parametrize("branch", [1, -1])
def test_spherical_relations_branch(branch):
    om, U, _ = normal_radial_omega(R_NODES, branch=branch)
    al, _ = aleph_from_bending(om, U, 1.0, form="normal_radial")
    rep = spherical_relations(om, al, 1.0, R_NODES)
    assert rep.context["branch"] == branch and not rep.context["branch_ambiguous"]
    assert rep.failures(1e-12) == []


def test_spherical_relations_domain():
    with pytest.raises(DomainError):
        normal_radial_omega(np.array([0.5, 2.0]))
    om, _, _ = normal_radial_omega(R_NODES)
    with pytest.raises(DomainError):
        spherical_relations(om, None, 1.0, R_NODES * 0.5)


def test_branch_ambiguity_when_tangential_terms_vanish():
    om = np.zeros((3, 4, 4, 4))
    with pytest.raises(BranchAmbiguity):
        spherical_relations(om, None, 1.0, np.array([2.0, 3.0, 4.0]), strict=True)


def test_gyromagnetic_moment_exact():
    assert gyromagnetic_moment() == 0.5
    assert gyromagnetic_moment(e=0.3, m=2.0) == 0.3 / (2 * 2.0)


# ---------------------------------------------------------------- axial current, pion wave, field source

def test_axial_decomposition_second_order():
    e = [axial_decomposition(framed_plane_waves(n))[2].max("polarization_current") for n in SIZES]
    assert observed_order(*e) > 1.8


@pytest.mark.parametrize("label", ["axial_balance_form", "wave_equation", "quadratic_vs_hamilton_jacobi"])
def test_pion_wave_equation(label):
    reps = [pion_wave_residual(framed_plane_waves(n)) for n in SIZES]
    assert all(r[label]["asserted"] for r in reps)
    assert observed_order(reps[0].max(label), reps[1].max(label)) > 1.8


def test_semiclassical_terms_not_asserted():
    rep = pion_wave_residual(framed_plane_waves(17))
    assert not rep["wave_equation_semiclassical"]["asserted"]
    assert not rep["anholonomy_source"]["asserted"]


def test_klein_gordon_mode():
    # cos(k t) solves the scalar wave equation with the curvature term standing in for k^2
    errs = []
    for n in SIZES:
        h = 1.0 / (n - 1)
        gr = Grid((n, n, 1, n), (h, h, 1, h))
        t = gr.mesh()[0]
        k = 2.0
        res = scalar_wave(gr, identity_tetrad(gr), np.zeros(gr.dims + (4, 4, 4)), np.cos(k * t), -2 * k * k)
        errs.append(np.abs(res[gr.interior(2)]).max())
    assert observed_order(*errs) > 1.8


def test_field_source_forms(rng):
    psi = random_spinors(20, rng)
    E, B = rng.normal(size=(20, 3)), rng.normal(size=(20, 3))
    F = frame_field_strength(E, B)
    r1, r2 = MATS.rho[0], MATS.rho[1]
    sg = MATS.sigma
    op = np.einsum("ij,kjl,nk->nil", r1, sg, E) - np.einsum("ij,kjl,nk->nil", r2, sg, B)
    expected = -2 * 0.7 * np.einsum("ni,nij,nj->n", psi.conj(), op, psi).real
    assert np.allclose(field_source(F, psi, 0.7), expected, atol=1e-12)
    tot, plus, minus = circular_source_split(E, B, psi, 0.7)
    assert np.allclose(tot, expected, atol=1e-12)
    assert np.allclose(plus, np.conj(minus))
    assert np.isfinite(field_source(F, psi, 0.7, form="literal")).all()
    with pytest.raises(ValueError):
        field_source(F, psi, 0.7, form="other")


# ---------------------------------------------------------------- Maxwell and the curl of the current

def _maxwell_grid(n):
    h = 1.0 / (n - 1)
    gr = Grid((n, n, n, n), (h, h, h, h))
    return gr, gr.mesh(), np.broadcast_to(ETA, gr.dims + (4, 4)).copy()


@pytest.fixture(scope="module")
def maxwell_reports():
    out = []
    for n in (9, 17):
        gr, (T, X, Y, Z), g = _maxwell_grid(n)
        A = np.stack([np.sin(X + T), np.cos(Y * Z), T * X ** 2, np.sin(Y)], -1)
        J = np.stack([2 + 0.2 * np.sin(X + Y), 0.3 * np.sin(Y + T) + 0.2 * Z, 0.1 * np.cos(Z - X),
                      0.2 * np.sin(X + 2 * T)], -1)
        e, _ = tetrad_from_current(J)
        out.append(maxwell_residuals(gr, field_from_potential(gr, A), J, g, e_tetrad=e, expect_sourced=False))
    return out


def test_maxwell_bianchi_exact(maxwell_reports):
    assert maxwell_reports[-1].max("bianchi") < 1e-12
    assert maxwell_reports[-1].max("frame_alignment") < 1e-14


@pytest.mark.parametrize("label", ["normality_obstruction", "boost_relation"])
def test_current_curl_ties_to_rotation(maxwell_reports, label):
    e = [r.max(label) for r in maxwell_reports]
    assert observed_order(*e) > 1.6


def test_maxwell_divergence_with_source():
    errs = []
    for n in (9, 17):
        gr, (T, X, Y, Z), g = _maxwell_grid(n)
        ec = 0.5
        A = np.stack([np.sin(X), 0 * X, 0 * X, 0 * X], -1)
        J = np.stack([np.sin(X) / ec, 0 * X, 0 * X, 0 * X], -1)
        rep = maxwell_residuals(gr, field_from_potential(gr, A), J, g, e_charge=ec)
        errs.append(rep.max("divergence"))
        assert rep.max("current_conservation") < 1e-12
    assert observed_order(*errs) > 1.8


def test_gradient_current_is_curl_free():
    gr, (T, X, Y, Z), g = _maxwell_grid(9)
    from diracgeom.grid import gradient
    phi = 2 * np.cosh(0.3 * X) + 0.4 * T ** 2 + 0.1 * T * np.sin(Y) + 3 * T
    J = gradient(gr, phi) * np.diag(ETA)
    rep = maxwell_residuals(gr, np.zeros(gr.dims + (4, 4)), J, g, expect_sourced=False, expect_curl_free=True)
    assert rep.max("current_curl") < 1e-12


def test_report_json_roundtrip():
    import json
    rep = ResidualReport(h=0.1)
    rep.add("x", np.array([1e-3, -2e-3]), scale=1.0)
    d = json.loads(rep.to_json())
    assert d["residuals"]["x"]["max"] == 2e-3 and d["residuals"]["x"]["relative"] == 2e-3
    assert rep.failures(1e-3) == ["x"] and rep.failures(1e-2) == []
