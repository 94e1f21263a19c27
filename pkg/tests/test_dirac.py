import numpy as np
import pytest

import g2deform as g
from g2deform import dirac
from g2deform.dirac import MU_X, NU_X, GridDomain, GridSection

E = np.eye(7)


@pytest.fixture(scope="module")
def torus_op():
    return g.assemble_dirac(GridDomain.torus(8))


@pytest.fixture(scope="module")
def strip_op():
    return g.assemble_dirac(GridDomain.strip(8))


def test_domain_validation():
    with pytest.raises(ValueError):
        GridDomain("torus3", (2, 8, 8))
    with pytest.raises(ValueError):
        GridDomain("moebius", (8, 8, 8))
    dom = GridDomain.strip(8)
    assert dom.shape == (16, 8, 8)
    assert dom.spacing[0] == pytest.approx(0.5 / 15)


def test_grid_section_validation():
    dom = GridDomain.torus(8)
    with pytest.raises(ValueError):
        GridSection(dom, np.zeros((8, 8, 4, 4)))
    s = GridSection(GridDomain.strip(8), np.zeros((16, 8, 8, 4)))
    lo, hi = s.boundary_slices()
    assert lo.shape == (8, 8, 4)
    with pytest.raises(ValueError):
        GridSection(dom, np.zeros((8, 8, 8, 4))).boundary_slices()


def test_invalid_frame_rejected():
    with pytest.raises(g.InvalidFrame):
        g.assemble_dirac(GridDomain.torus(8), tangent=E[[1, 0, 2]], normal=E[3:])
    # a fiber not stable under the cross action
    with pytest.raises(g.InvalidFrame):
        dirac.cross_action_matrices(tangent=E[:3], normal=E[[3, 4, 5]])


def test_symbol_blocks(torus_op):
    # the zero-frequency block is the zero map: constants are in the kernel
    assert np.max(np.abs(torus_op.torus_block((0, 0, 0)))) == 0.0
    assert g.weitzenbock_block_residual(torus_op) == 0.0


def test_apply_single_mode(torus_op):
    dom = torus_op.domain
    x1 = np.arange(8) / 8
    vals = np.zeros(dom.shape + (4,))
    vals[..., 0] = np.sin(2 * np.pi * x1)[:, None, None]   # s = sin(2 pi x1) e4
    out = torus_op.apply(vals)
    expected = np.zeros_like(vals)
    expected[..., 1] = 2 * np.pi * np.cos(2 * np.pi * x1)[:, None, None]  # e1 x e4 = e5
    assert np.allclose(out, expected, atol=1e-10)


def test_matrix_linear_operator(torus_op):
    mat = torus_op.matrix
    rng = np.random.default_rng(0)
    x = rng.standard_normal(mat.shape[1])
    y = mat @ x
    assert y.shape == x.shape
    direct = torus_op.apply(x.reshape(torus_op.domain.shape + (4,))).ravel()
    assert np.allclose(y, direct)


def test_constrain_validation(strip_op):
    strip_op.constrain(NU_X)
    strip_op.constrain(MU_X)
    bad = dirac.BoundaryConditionSpec(np.eye(4)[:, [0, 2]], tag="bad")
    with pytest.raises(g.NotComplexLine):
        strip_op.constrain(bad)
    with pytest.raises(ValueError):
        g.assemble_dirac(GridDomain.torus(8)).constrain(NU_X)


def test_boundary_spec_complement():
    comp = NU_X.complement()
    assert comp.tag == "mu_X"
    assert np.allclose(np.abs(comp.line.T @ MU_X.line), np.eye(2), atol=1e-12)


def test_torus_kernel(torus_op):
    rep = g.kernel_dims(torus_op)
    assert rep.dim_ker == 4 and rep.dim_coker == 4 and rep.index == 0
    assert rep.converged
    sv = np.sort(rep.singular_values)
    assert np.max(sv[:4]) <= 1e-12 * sv[-1]
    assert sv[4] >= 2 * np.pi * (1 - 1e-10)


def test_strip_kernels_and_duality(strip_op):
    rep_nu = g.kernel_dims(strip_op.constrain(NU_X))
    rep_mu = g.kernel_dims(strip_op.constrain(MU_X))
    assert (rep_nu.dim_ker, rep_nu.dim_coker, rep_nu.index) == (2, 2, 0)
    assert (rep_mu.dim_ker, rep_mu.dim_coker, rep_mu.index) == (2, 2, 0)
    assert rep_nu.dim_coker == rep_mu.dim_ker
    assert rep_nu.converged and rep_mu.converged


def test_strip_mode_oracle_matches():
    dom = GridDomain.strip(8)
    assert g.strip_mode_kernel_dim(dom, NU_X.line) == 2
    assert g.strip_mode_kernel_dim(dom, MU_X.line) == 2


def test_kernel_dims_requires_boundary(strip_op):
    with pytest.raises(ValueError):
        g.kernel_dims(strip_op)


def test_spectral_report_serialization(torus_op):
    rep = g.kernel_dims(torus_op, example="torus-test")
    payload = rep.to_json()
    assert payload["dim_ker"] == 4
    assert payload["singular_value_count"] == len(rep.singular_values)
    csv = rep.spectrum_csv().strip().splitlines()
    vals = [float(v) for v in csv]
    assert vals == sorted(vals)


def test_nonlinear_residual_zero_and_translation():
    dom = GridDomain.torus(8)
    zero = np.zeros(dom.shape + (4,))
    assert np.max(np.abs(g.nonlinear_residual(dom, zero))) == 0.0
    const = np.zeros(dom.shape + (4,))
    const[..., 0] = 0.37   # translate along the first transverse axis
    assert np.max(np.abs(g.nonlinear_residual(dom, const))) <= 1e-14


def test_nonlinear_residual_immersion_lost():
    # normal-valued displacements never degenerate (the tangent block of the
    # pushed frame is the identity); an ambient displacement with a strong
    # tangential shear does
    dom = GridDomain.torus(8)
    x1 = np.arange(8) / 8
    shear = np.zeros(dom.shape + (7,))
    shear[..., 0] = -(1.0 / (2 * np.pi)) * np.sin(2 * np.pi * x1)[:, None, None]
    with pytest.raises(g.ImmersionLost):
        g.nonlinear_residual(dom, shear)


def test_linearization_small_sample():
    dom = GridDomain.torus(8)
    op = g.assemble_dirac(dom)
    dirs = [dirac.random_smooth_section(dom, seed=j) for j in range(5)]
    assert g.linearization_residual(op, dirs, t=1e-5) <= 1e-6


def test_weitzenbock_fd_orders():
    resids = [g.weitzenbock_residual(g.assemble_dirac(GridDomain.strip(r)),
                                     samples=2, seed=5) for r in (8, 16)]
    assert resids[1] <= resids[0] / 3.0


def test_torsion_term_is_pointwise():
    dom = GridDomain.torus(8)
    shift = np.array([0.1, -0.2, 0.3, 0.4])
    op = g.assemble_dirac(dom, torsion_field=lambda vals: vals * 0 + shift)
    zero = np.zeros(dom.shape + (4,))
    assert np.allclose(op.apply(zero), np.broadcast_to(shift, zero.shape))


def test_selfadjoint_residual(strip_op):
    dom = strip_op.domain
    s = dirac.random_smooth_section(dom, seed=1)
    assert g.selfadjoint_residual(strip_op, s, s) < 5e-3   # O(h^2) interior defect
    mask = np.zeros(dom.shape + (1,))
    mask[4:-4] = 1.0
    a = GridSection(dom, s.values * mask)
    b = GridSection(dom, dirac.random_smooth_section(dom, seed=2).values * mask)
    assert g.selfadjoint_residual(strip_op, a, b) <= 1e-10


def test_bochner_terms_on_kernel(strip_op):
    op = strip_op.constrain(MU_X)
    vals = np.zeros(op.domain.shape + (4,))
    vals[..., 2] = 1.0
    terms = g.bochner_terms(op, vals, boundary_operator=lambda end, sl: np.zeros_like(sl))
    assert terms["total"] <= 1e-12
    assert terms["grad"] == 0.0
    # a non-kernel section just reports its value
    bump = dirac.random_smooth_section(op.domain, seed=3)
    t2 = g.bochner_terms(op, bump)
    assert t2["grad"] > 0.0


def test_dvee_kernel_and_square():
    dom = GridDomain.torus(8)
    op = g.assemble_dvee(dom)
    assert g.dvee_square_residual(op) == 0.0
    rep = g.kernel_dims(op)
    assert rep.dim_ker == 4 and rep.converged


def test_dvee_reference_route():
    dom = GridDomain.torus(8)
    op = g.assemble_dvee(dom)
    for seed in range(5):
        s = dirac.random_smooth_section(dom, seed=seed)
        ref = g.dvee_reference_apply(dom, s.values)
        assert np.max(np.abs(op.apply(s.values) - ref)) <= 1e-12 * np.max(np.abs(s.values)) * 100


def test_perturbed_dvee_kernel_drop():
    dom = GridDomain.torus(8)
    pop = g.perturbed_dvee(dom, lam=0.1)
    rep = g.kernel_dims(pop)
    assert rep.dim_ker == 3 and rep.converged
    # the lost direction is the constant function component
    B0 = pop.torus_block((0, 0, 0))
    _, sv, vt = np.linalg.svd(B0)
    null = vt[sv < 1e-10]
    assert null.shape[0] == 3
    assert np.max(np.abs(null[:, 3])) <= 1e-12


def test_dvee_rejects_strip():
    with pytest.raises(ValueError):
        g.assemble_dvee(GridDomain.strip(8))


def test_random_section_deterministic():
    dom = GridDomain.torus(8)
    a = dirac.random_smooth_section(dom, seed=9)
    b = dirac.random_smooth_section(dom, seed=9)
    assert np.array_equal(a.values, b.values)


def test_forms_domain_alias():
    dom = GridDomain.torus(8, kind="torus3-forms")
    rep = g.kernel_dims(g.assemble_dvee(dom))
    assert rep.dim_ker == 4


def test_strip_index_stability_three_resolutions():
    # the reported index stays 0 as the grid is refined twice
    for r in (8, 16, 32):
        rep = g.kernel_dims(g.assemble_dirac(GridDomain.strip(r)).constrain(NU_X))
        assert (rep.dim_ker, rep.dim_coker, rep.index) == (2, 2, 0), r
        assert rep.converged
