import numpy as np
import pytest

import g2deform as g
from g2deform import patches

E = np.eye(7)


def holomorphic_curve_patch():
    """Graph of w -> (w, w^2, const) in the complex 3-space, crossed with
    the first coordinate line; a curved calibrated 3-dimensional patch."""
    def chart(p):
        t, u, v = p
        return np.array([t, u, v, u * u - v * v, 2 * u * v, 0.3, -0.1])

    return g.ImmersedPatch(chart, 3)


def test_flat_patch_frames():
    patch = g.flat_plane_patch()
    fr = g.adapted_frame(patch, np.array([0.1, 0.2, 0.3]))
    assert np.allclose(fr.tangent, E[:3])
    assert np.allclose(fr.normal @ fr.normal.T, np.eye(4), atol=1e-12)
    assert np.allclose(fr.normal @ fr.tangent.T, 0.0, atol=1e-12)


def test_swapped_inputs_orientation_repair():
    def chart(u):
        x = np.zeros(7)
        x[0], x[1], x[2] = u[1], u[0], u[2]
        return x

    patch = g.ImmersedPatch(chart, 3)
    fr = g.adapted_frame(patch, np.zeros(3))
    st = patch.structure
    assert np.allclose(st.cross(fr.tangent[0], fr.tangent[1]), fr.tangent[2], atol=1e-12)


def test_adapted_frames_over_grid():
    patch = g.sphere_patch(0.7)
    params = [np.array([a, b]) for a in (0.1, 0.4) for b in (0.0, 1.0, 2.5)]
    frames = g.adapted_frames(patch, params)
    assert len(frames) == 6
    for u, fr in zip(params, frames):
        x = patch.point(u)
        nu_part = fr.normal.T @ (fr.normal @ x)
        assert abs(np.linalg.norm(nu_part) - 0.7) < 1e-10


def test_rank_deficient_chart():
    def chart(u):
        x = np.zeros(7)
        x[0] = u[0]
        x[1] = u[0]  # second direction collapses
        return x

    patch = g.ImmersedPatch(lambda u: chart(u), 2)
    with pytest.raises(g.RankDeficient):
        g.adapted_frame(patch, np.zeros(2))


def test_fd_matches_analytic_derivatives():
    analytic = g.sphere_patch(1.3)
    fd = g.ImmersedPatch(analytic.chart, 2, scale=1.3)
    u = np.array([0.4, 0.9])
    assert np.allclose(fd.jacobian(u), analytic.jacobian(u), atol=1e-9)
    assert np.allclose(fd.hessian(u), analytic.hessian(u), atol=1e-6)


def test_second_fundamental_flat_vanishes():
    patch = g.flat_plane_patch()
    sff = g.second_fundamental(patch, np.array([0.0, 0.0, 0.0]))
    assert np.max(np.abs(sff.A)) == 0.0


def test_sphere_principal_curvatures_inward():
    rho = 0.8
    patch = g.sphere_patch(rho)
    u = np.array([0.3, 1.1])
    sff = g.second_fundamental(patch, u)
    x = patch.point(u)
    inward = np.zeros(7)
    inward[:3] = -x[:3] / rho
    pk = sff.principal_curvatures(inward)
    assert np.allclose(pk, [1 / rho, 1 / rho], atol=1e-6)
    assert abs(sff.mean_curvature(inward) - 1 / rho) < 1e-6


def test_ellipsoid_against_closed_form():
    patch = g.ellipsoid_patch(1.0, 1.0, 2.0)
    u = np.array([0.5, 0.8])   # away from the umbilic poles
    x = patch.point(u)
    ks = patches.ellipsoid_principal_curvatures(1.0, 1.0, 2.0, x[:3])
    grad = np.array([2 * x[0], 2 * x[1], 2 * x[2] / 4.0])
    inward = np.zeros(7)
    inward[:3] = -grad / np.linalg.norm(grad)
    sff = g.second_fundamental(patch, u)
    pk = np.sort(sff.principal_curvatures(inward))
    assert pk[0] != pytest.approx(pk[1], rel=1e-2)  # umbilic-free point
    assert np.allclose(pk, np.sort(ks), atol=1e-6)


def test_simons_flat_ambient():
    patch = g.sphere_patch(1.0)
    ops = g.simons_operators(patch, np.array([0.3, 1.1]))
    assert np.max(np.abs(ops.calR)) == 0.0
    assert np.allclose(ops.calRnu, -ops.calA, atol=1e-14)
    assert np.min(np.linalg.eigvalsh(ops.calA)) >= -1e-10


def test_simons_flat_torus_patch():
    patch = g.flat_plane_patch()
    ops = g.simons_operators(patch, np.array([0.2, 0.5, 0.8]))
    assert np.max(np.abs(ops.calRnu)) == 0.0


def test_simons_constant_curvature_oracle():
    kappa = 0.7
    R = patches.constant_curvature_tensor(kappa)
    patch = g.sphere_patch(1.0)
    ops = g.simons_operators(patch, np.array([0.3, 1.1]), curvature=R)
    assert np.allclose(ops.calR, -2 * kappa * np.eye(5), atol=1e-12)


def test_frame_independence_of_operators():
    patch = g.ellipsoid_patch(1.0, 1.2, 0.9)
    u = np.array([0.4, 0.7])
    ops = g.simons_operators(patch, u)
    spec = np.linalg.eigvalsh(ops.calA)

    def rotated_chart(p):
        q = np.array([[0.6, -0.8], [0.8, 0.6]]) @ p
        return patch.chart(q)

    patch2 = g.ImmersedPatch(rotated_chart, 2)
    u2 = np.array([[0.6, 0.8], [-0.8, 0.6]]) @ u
    ops2 = g.simons_operators(patch2, u2)
    assert np.allclose(np.linalg.eigvalsh(ops2.calA), spec, atol=1e-6)


def test_rigidity_verdicts():
    flat = g.flat_plane_patch()
    ops = [g.simons_operators(flat, np.array([a, b, 0.0]))
           for a in (0.0, 0.4) for b in (0.1, 0.9)]
    verdict, margin = g.rigidity_check(ops)
    assert verdict == "nonpositive" and margin == 0.0

    synthetic = [0.25 * np.eye(4) for _ in range(5)]
    verdict, margin = g.rigidity_check(synthetic)
    assert verdict == "positive" and margin > 0.2

    mixed = [np.diag([0.5, -0.5, 0.1, 0.1])]
    assert g.rigidity_check(mixed)[0] == "indefinite"


def test_cross_product_derivative_rule():
    st = g.standard_phi()
    rng = np.random.default_rng(3)
    A, B = rng.standard_normal((2, 7))
    C, D = rng.standard_normal((2, 7))

    def u(t):
        return A * np.cos(t) + B * np.sin(2 * t)

    def v(t):
        return C * np.exp(0.3 * t) + D * t

    def du(t):
        return -A * np.sin(t) + 2 * B * np.cos(2 * t)

    def dv(t):
        return 0.3 * C * np.exp(0.3 * t) + D

    t0 = 0.37
    errs = []
    for h in (1e-3, 5e-4):
        fd = (st.cross(u(t0 + h), v(t0 + h)) - st.cross(u(t0 - h), v(t0 - h))) / (2 * h)
        exact = st.cross(du(t0), v(t0)) + st.cross(u(t0), dv(t0))
        errs.append(np.linalg.norm(fd - exact))
    assert errs[1] <= errs[0] / 3.0  # second-order decay
    assert errs[1] < 1e-5


def test_curved_calibrated_patch_is_minimal():
    patch = holomorphic_curve_patch()
    st = patch.structure
    for pt in ([0.2, 0.4, -0.3], [0.0, -0.5, 0.2], [1.0, 0.1, 0.1]):
        fr = g.adapted_frame(patch, np.array(pt))
        assert g.assoc_residual(g.Plane(fr.tangent), st) < 1e-9
        assert np.allclose(st.cross(fr.tangent[0], fr.tangent[1]), fr.tangent[2],
                           atol=1e-12)
        sff = g.second_fundamental(patch, np.array(pt), fr)
        traces = np.trace(sff.A, axis1=1, axis2=2)
        assert np.max(np.abs(traces)) < 1e-5


def test_patch_from_json():
    spec = {"type": "sphere", "params": {"radius": 0.5}}
    patch = g.patch_from_json(spec)
    assert abs(np.linalg.norm(patch.point([0.2, 0.7])) - 0.5) < 1e-12
    for kind, params in (("flat-plane", {}), ("ellipsoid", {"a": 1, "b": 1, "c": 2}),
                         ("torus", {"R": 2.0, "r": 0.5})):
        g.patch_from_json({"type": kind, "params": params})
    with pytest.raises(KeyError):
        g.patch_from_json({"type": "helicoid"})
