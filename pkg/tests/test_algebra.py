import json
from fractions import Fraction

import numpy as np
import pytest

import g2deform as g
from g2deform import algebra

E = np.eye(7)

# Hodge dual of the seven-term 3-form, derived once by brute-force
# dualization over sorted index quadruples and frozen here (0-based).
GOLDEN_STAR_PHI = {
    (0, 1, 3, 6): -1.0,
    (0, 1, 4, 5): -1.0,
    (0, 2, 3, 5): -1.0,
    (0, 2, 4, 6): 1.0,
    (1, 2, 3, 4): 1.0,
    (1, 2, 5, 6): 1.0,
    (3, 4, 5, 6): 1.0,
}


@pytest.fixture(scope="module")
def st():
    return g.standard_phi()


@pytest.fixture(scope="module")
def stq():
    return g.standard_phi(exact=True)


def test_phi0_coefficients(st):
    assert st.phi(E[0], E[1], E[2]) == 1.0
    assert st.phi(E[1], E[4], E[6]) == -1.0
    assert st.phi(E[0], E[1], E[3]) == 0.0


def test_form_storage_roundtrip(st):
    # arbitrary index order returns the signed sorted coefficient
    assert st.phi.coefficient(2, 1, 0) == -1.0
    assert st.phi.coefficient(0, 0, 1) == 0.0
    arr = st.phi.coeffs
    assert np.allclose(arr, -np.swapaxes(arr, 0, 1))
    assert np.allclose(arr, -np.swapaxes(arr, 1, 2))


def test_form_json_roundtrip(st, stq):
    for form in (st.phi, stq.phi, st.star_phi):
        back = g.Form.from_json(json.loads(json.dumps(form.to_json())))
        assert back.degree == form.degree
        assert back.terms() == form.terms()


def test_metric_from_phi0_is_identity(st):
    built = g.metric_from_3form(st.phi)
    assert np.allclose(built.metric, np.eye(7), atol=1e-13)


def test_metric_from_exact_phi0():
    stq = g.standard_phi(exact=True)
    built = g.metric_from_3form(stq.phi)
    assert built.exact
    assert all(built.metric[i, j] == Fraction(int(i == j))
               for i in range(7) for j in range(7))


def test_metric_scaling_law(st):
    # pulling back by x -> c x scales the 3-form by c^3 and the metric by c^2
    c = 1.7
    built = g.metric_from_3form(g.Form(3, (c ** 3) * st.phi.coeffs))
    assert np.allclose(built.metric, c ** 2 * np.eye(7), atol=1e-12)


def test_metric_exact_scaling():
    stq = g.standard_phi(exact=True)
    scaled = g.Form(3, stq.phi.coeffs * Fraction(8), exact=True)
    built = g.metric_from_3form(scaled)
    assert built.exact and built.metric[0, 0] == Fraction(4)


def test_degenerate_form_rejected():
    lone = g.Form.from_terms(3, {(0, 1, 2): 1.0})
    with pytest.raises(g.DegenerateForm):
        g.metric_from_3form(lone)


def test_hodge_star_basic(st):
    a = g.Form.from_terms(3, {(0, 1, 2): 1.0})
    sa = st.hodge_star(a)
    assert sa.terms() == {(3, 4, 5, 6): 1.0}


def test_hodge_star_involution(st):
    rng = np.random.default_rng(2)
    psi = _random_form(rng, 3)
    back = st.hodge_star(st.hodge_star(psi))
    assert np.allclose(back.coeffs, psi.coeffs, atol=1e-13)


def test_hodge_star_involution_scaled_metric(st):
    scaled = g.G2Structure(st.phi, 1.3 * np.eye(7))
    rng = np.random.default_rng(3)
    psi = _random_form(rng, 4)
    back = scaled.hodge_star(scaled.hodge_star(psi))
    assert np.allclose(back.coeffs, psi.coeffs, atol=1e-12)


def test_star_phi_matches_golden_table(st, stq):
    assert {k: float(v) for k, v in st.star_phi.terms().items()} == GOLDEN_STAR_PHI
    assert {k: float(v) for k, v in stq.star_phi.terms().items()} == GOLDEN_STAR_PHI


def _random_form(rng, degree):
    import itertools

    terms = {idx: rng.standard_normal()
             for idx in itertools.combinations(range(7), degree)}
    return g.Form.from_terms(degree, terms)


def test_cross_table(st):
    assert np.allclose(st.cross(E[0], E[1]), E[2])
    assert np.allclose(st.cross(E[0], E[3]), E[4])
    u = np.array([0.3, -1.0, 2.0, 0.1, 0.0, 1.0, -0.5])
    assert np.allclose(st.cross(u, u), 0.0)


def test_cross_antisymmetry_and_compat(st):
    rng = np.random.default_rng(4)
    for _ in range(200):
        u, v = rng.standard_normal((2, 7))
        c = st.cross(u, v)
        assert np.allclose(c, -st.cross(v, u), atol=1e-12)
        lhs = c @ c
        rhs = (u @ u) * (v @ v) - (u @ v) ** 2
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))


def test_chi_values(st):
    assert np.allclose(st.chi(E[0], E[1], E[2]), 0.0)
    u = np.array([0.2, 0.4, -1.0, 0.0, 0.3, 0.0, 1.1])
    w = np.array([1.0, 0.0, 0.5, -0.2, 0.0, 0.7, 0.0])
    assert np.allclose(st.chi(u, u, w), 0.0)
    # from the golden dual table: the only quadruple containing (0,1,3) is
    # (0,1,3,6) with coefficient -1
    assert np.allclose(st.chi(E[0], E[1], E[3]), -E[6])


def test_chi_orthogonality_thousand(st):
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(1000):
        u, v, w = rng.standard_normal((3, 7))
        c = st.chi(u, v, w)
        worst = max(worst, abs(c @ u), abs(c @ v), abs(c @ w))
    assert worst <= 1e-12 * 100  # scale-free vectors of norm ~ sqrt(7)


def test_assoc_residual(st):
    assert g.assoc_residual(g.Plane(E[[0, 1, 2]]), st) == 0.0
    assert g.assoc_residual(g.Plane(E[[0, 3, 4]]), st) == 0.0
    val = g.assoc_residual(g.Plane(E[[0, 1, 3]]), st)
    assert abs(val - 1.0) < 1e-14  # |chi(e1, e2, e4)| = |e7|


def test_assoc_residual_basis_independent(st):
    rng = np.random.default_rng(6)
    a = rng.standard_normal(7)
    a /= np.linalg.norm(a)
    b = rng.standard_normal(7)
    b -= (b @ a) * a
    b /= np.linalg.norm(b)
    c = st.cross(a, b)
    base = np.vstack([a, b, c])
    r1 = g.assoc_residual(g.Plane(base), st)
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    r2 = g.assoc_residual(g.Plane(q @ base), st)
    assert abs(r1 - r2) < 1e-12


def test_coassoc_residual(st):
    assert g.coassoc_residual(g.Plane(E[[3, 4, 5, 6]]), st) == 0.0
    assert g.coassoc_residual(g.Plane(E[[1, 2, 3, 4]]), st) == 0.0
    assert abs(g.coassoc_residual(g.Plane(E[[0, 1, 2, 3]]), st) - 1.0) < 1e-14


def test_plane_requires_orthonormal_basis():
    with pytest.raises(ValueError):
        g.Plane(np.vstack([E[0], E[0] + E[1], E[2]]))


def test_free_margin(st):
    margin = g.free_margin(g.Plane(E[[1, 2, 3, 4]]), st, samples=512, refine_steps=25)
    assert margin > 0.5
    near_zero = g.free_margin(g.Plane(E[[0, 1, 2, 3]]), st, samples=512, refine_steps=40)
    assert near_zero < 1e-6


def test_free_margin_basis_independent(st):
    rng = np.random.default_rng(7)
    q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    p = g.Plane(E[[1, 2, 3, 4]])
    p2 = g.Plane(q @ p.basis)
    m1 = g.free_margin(p, st, samples=256, refine_steps=10)
    m2 = g.free_margin(p2, st, samples=256, refine_steps=10)
    assert abs(m1 - m2) <= 1e-10


def test_decompose3_phi_and_seven_piece(st):
    d = g.decompose3(st.phi.as_float(), st)
    assert np.allclose(d.pi1.coeffs, st.phi.as_float().coeffs, atol=1e-12)
    assert np.max(np.abs(d.pi7.coeffs)) < 1e-12
    assert np.max(np.abs(d.pi27.coeffs)) < 1e-12

    alpha = g.Form(1, E[0].astype(float))
    w7 = st.hodge_star(g.wedge(st.phi.as_float(), alpha))
    d7 = g.decompose3(w7, st)
    assert np.allclose(d7.pi7.coeffs, w7.coeffs, atol=1e-12)
    assert np.max(np.abs(d7.pi1.coeffs)) < 1e-12
    assert np.max(np.abs(d7.pi27.coeffs)) < 1e-12


def test_decompose3_idempotent(st):
    rng = np.random.default_rng(8)
    psi = _random_form(rng, 3)
    d = g.decompose3(psi, st)
    again = g.decompose3(d.pi27, st)
    assert np.allclose(again.pi27.coeffs, d.pi27.coeffs, atol=1e-12)
    assert np.max(np.abs(again.pi1.coeffs)) < 1e-12


def test_projector_matrix_algebra(st):
    p1, p7, p27, _, _ = st._projectors3()
    eye = np.eye(35)
    assert np.allclose(p1 + p7 + p27, eye, atol=1e-12)
    for p in (p1, p7, p27):
        assert np.allclose(p @ p, p, atol=1e-12)
    for a, b in ((p1, p7), (p1, p27), (p7, p27)):
        assert np.max(np.abs(a @ b)) <= 1e-12


def test_p_operator_eigenvalues(st):
    rng = np.random.default_rng(9)
    assert np.allclose(g.p_operator(st.phi, st).coeffs,
                       (4.0 / 3.0) * st.phi.as_float().coeffs, atol=1e-12)
    psi = _random_form(rng, 3)
    d = g.decompose3(psi, st)
    assert np.allclose(g.p_operator(d.pi27, st).coeffs, -d.pi27.coeffs, atol=1e-12)
    assert np.allclose(g.p_operator(d.pi7, st).coeffs, d.pi7.coeffs, atol=1e-12)


def test_theta_derivative_is_star_of_p(st):
    rng = np.random.default_rng(10)
    psi = _random_form(rng, 3)
    lhs = g.theta_derivative(psi, st)
    rhs = st.hodge_star(g.p_operator(psi, st))
    assert np.allclose(lhs.coeffs, rhs.coeffs, atol=1e-12)


def test_reconstruct_section_axis_plane(st):
    plane = g.Plane(E[[0, 1, 2]])
    out = g.reconstruct_section(E[3], plane, st)
    assert np.allclose(out, E[3], atol=1e-13)
    assert np.allclose(g.reconstruct_section(np.zeros(7), plane, st), 0.0)


def test_reconstruct_section_random_plane(st):
    rng = np.random.default_rng(11)
    plane = g.Plane(E[[0, 3, 4]])
    s = rng.standard_normal(7)
    s -= plane.basis.T @ (plane.basis @ s)
    out = g.reconstruct_section(s, plane, st)
    assert np.linalg.norm(out - s) <= 1e-12 * np.linalg.norm(s)


def test_reconstruct_section_rejects_nonassociative(st):
    with pytest.raises(g.NotAssociative):
        g.reconstruct_section(E[6], g.Plane(E[[0, 1, 3]]), st)


def test_pullback_requires_orthogonal():
    amap = g.AffineMap(np.diag([2.0, 1, 1, 1, 1, 1, 1]), np.zeros(7))
    with pytest.raises(ValueError):
        g.pullback(g.standard_phi().phi, amap)


def test_joyce_pullbacks_exact(stq):
    invs = g.joyce_involutions(exact=True)
    phi = stq.phi
    for name in ("alpha", "beta", "gamma", "sigma0"):
        assert np.array_equal(g.pullback(phi, invs[name]).coeffs, phi.coeffs), name
    assert np.array_equal(g.pullback(phi, invs["tau0"]).coeffs, (-phi).coeffs)
    for name, m in invs.items():
        assert m.is_torus_involution(), name


def test_affine_map_json_roundtrip():
    invs = g.joyce_involutions(exact=True)
    m = invs["sigma0"]
    back = algebra.AffineMap.from_json(json.loads(json.dumps(m.to_json())))
    assert np.array_equal(back.matrix, m.matrix)
    assert np.array_equal(back.translation, m.translation)


def test_associative_plane_identity_float(st):
    rng = np.random.default_rng(12)
    for _ in range(20):
        a = rng.standard_normal(7)
        a /= np.linalg.norm(a)
        b = rng.standard_normal(7)
        b -= (b @ a) * a
        b /= np.linalg.norm(b)
        c = st.cross(a, b)
        base = np.vstack([a, b, c])
        u, v, w = (rng.standard_normal(3) @ base for _ in range(3))
        lhs = st.cross(st.cross(v, w), u)
        rhs = (u @ v) * w - (u @ w) * v
        assert np.allclose(lhs, rhs, atol=1e-10)


def test_exact_cross_on_rationals(stq):
    u = np.array([Fraction(1, 2), Fraction(-3), Fraction(0), Fraction(2, 7),
                  Fraction(1), Fraction(0), Fraction(5)], dtype=object)
    v = np.array([Fraction(4), Fraction(1, 3), Fraction(-1), Fraction(0),
                  Fraction(2), Fraction(1, 5), Fraction(0)], dtype=object)
    c = stq.cross(u, v)
    assert np.array_equal(c, -stq.cross(v, u))
    lhs = stq.vec_inner(c, c)
    rhs = stq.vec_inner(u, u) * stq.vec_inner(v, v) - stq.vec_inner(u, v) ** 2
    assert lhs == rhs
