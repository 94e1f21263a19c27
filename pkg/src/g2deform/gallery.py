"""Example catalog, verification checks, and report plumbing.

Binds the model configurations (flat calibrated tori, the boundary strip,
round and ellipsoidal ball boundaries, the Hodge-pair torus, the exact
torus involutions) to the operator modules, runs named check lists over
them, and serializes the results as JSON reports validated against the
schema shipped with the package.
"""

from __future__ import annotations

import json
import os
import tempfile
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import algebra, boundary, meshes
from .algebra import Form, Plane, joyce_involutions, pullback, standard_phi
from .dirac import (GridDomain, GridSection, MU_X, NU_X, assemble_dirac,
                    assemble_dvee, bochner_terms, dvee_reference_apply,
                    dvee_square_residual, kernel_dims, linearization_residual,
                    nonlinear_residual, perturbed_dvee, random_smooth_section,
                    selfadjoint_residual, strip_mode_kernel_dim,
                    weitzenbock_block_residual, weitzenbock_residual)

__all__ = [
    "RunConfig",
    "CheckResult",
    "EXAMPLES",
    "run_example",
    "write_report",
    "validate_report",
    "CRITERIA",
    "verify_all",
]

SCHEMA_VERSION = "1"
_GAP_CAP = 1e18


@dataclass
class RunConfig:
    """Execution knobs shared by the examples and the CLI."""

    out_dir: str | None = None
    formats: tuple = ("json",)
    seed: int = 0
    bit_reproducible: bool = False
    refine: int = 0
    resolution: int | None = None
    tolerance: float = 1e-8
    rho: float = 0.5
    lam: float = 0.05
    a: float = 1.0
    e_vector: tuple = (0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0)
    subdivisions: int = 3
    parallel: bool = False


@dataclass
class CheckResult:
    """One named pass/fail verification with its measured value."""

    name: str
    law: str
    passed: bool
    value: object = None
    expected: object = None
    tolerance: float | None = None

    def to_json(self):
        def clean(x):
            if isinstance(x, bool):
                return x
            if isinstance(x, (np.floating, float)):
                x = float(x)
                return min(max(x, -_GAP_CAP), _GAP_CAP)
            if isinstance(x, (np.integer, int)):
                return int(x)
            if isinstance(x, (list, tuple)):
                return [clean(v) for v in x]
            if isinstance(x, dict):
                return {str(k): clean(v) for k, v in x.items()}
            if isinstance(x, str) or x is None:
                return x
            return str(x)

        return {"name": self.name, "law": self.law, "pass": bool(self.passed),
                "value": clean(self.value), "expected": clean(self.expected),
                "tolerance": None if self.tolerance is None else float(self.tolerance)}


def _report_skeleton(example, config, params=None):
    return {
        "schema_version": SCHEMA_VERSION,
        "example": example,
        "parameters": params or {},
        "scheme": None,
        "resolution": None,
        "tolerance": config.tolerance,
        "singular_values": [],
        "singular_value_count": 0,
        "dim_ker": None,
        "dim_coker": None,
        "index": None,
        "gap_ratio": None,
        "converged": None,
        "residuals": {},
        "checks": [],
        "seed": config.seed,
        "wall_time_ms": 0.0,
    }


def _merge_spectral(report, spec_report):
    j = spec_report.to_json()
    for key in ("scheme", "resolution", "singular_values", "singular_value_count",
                "dim_ker", "dim_coker", "index", "converged"):
        report[key] = j[key]
    report["gap_ratio"] = min(j["gap_ratio"], _GAP_CAP)
    report["residuals"].update(j["residuals"])
    return report


def _orders(residuals):
    """Observed convergence orders between successive halvings."""
    r = np.asarray(residuals, dtype=float)
    r = np.maximum(r, 1e-300)
    return list(np.log2(r[:-1] / r[1:]))


def _rational_vectors(rng, count, span=None):
    """Random small-denominator rational 7-vectors (optionally in a span)."""
    out = []
    for _ in range(count):
        num = rng.integers(-9, 10, size=DIM7 if span is None else len(span))
        den = int(rng.integers(1, 8))
        coef = np.array([Fraction(int(n), den) for n in num], dtype=object)
        if span is None:
            out.append(coef)
        else:
            v = np.zeros(DIM7, dtype=object)
            v[:] = Fraction(0)
            for c, axis in zip(coef, span):
                v[axis] = c
            out.append(v)
    return out


DIM7 = 7


# ---------------------------------------------------------------------------
# Acceptance criteria


def criterion_exact_algebra(config=None):
    """Exact identities of the flat structure in rational arithmetic."""
    t0 = time.perf_counter()
    st = standard_phi(exact=True)
    rng = np.random.default_rng(11)
    checks = []

    pairs = _rational_vectors(rng, 40)
    ok = all(np.array_equal(st.cross(u, v), -st.cross(v, u))
             for u, v in zip(pairs[::2], pairs[1::2]))
    checks.append(CheckResult("cross-antisymmetry", "cross(u,v) = -cross(v,u)", ok,
                              value="exact", expected="exact"))

    triples = _rational_vectors(rng, 30)
    ok = True
    for u, v, w in zip(triples[::3], triples[1::3], triples[2::3]):
        c = st.chi(u, v, w)
        ok &= np.array_equal(c, -st.chi(v, u, w))
        ok &= np.array_equal(c, -st.chi(u, w, v))
        ok &= np.array_equal(c, -st.chi(w, v, u))
        ok &= all(x == 0 for x in (st.vec_inner(c, u), st.vec_inner(c, v),
                                   st.vec_inner(c, w)))
    checks.append(CheckResult("chi-alternating-orthogonal",
                              "chi alternating and orthogonal to its arguments", ok,
                              value="exact", expected="exact"))

    ok = True
    for u, v in zip(pairs[::2], pairs[1::2]):
        lhs = st.vec_inner(st.cross(u, v), st.cross(u, v))
        rhs = st.vec_inner(u, u) * st.vec_inner(v, v) - st.vec_inner(u, v) ** 2
        ok &= lhs == rhs
    checks.append(CheckResult("cross-compatibility",
                              "|u x v|^2 = |u|^2 |v|^2 - <u,v>^2", ok,
                              value="exact", expected="exact"))

    ok = True
    planes = list(algebra.PHI0_TERMS)
    for axes in planes:
        u, v, w = _rational_vectors(rng, 3, span=axes)
        lhs = st.cross(st.cross(v, w), u)
        rhs = st.vec_inner(u, v) * w - st.vec_inner(u, w) * v
        ok &= np.array_equal(lhs, rhs)
    checks.append(CheckResult("calibrated-plane-identity",
                              "(v x w) x u = <u,v> w - <u,w> v on stable 3-planes", ok,
                              value="exact", expected="exact"))

    invs = joyce_involutions(exact=True)
    phi = st.phi
    ok_each = {
        "alpha": np.array_equal(pullback(phi, invs["alpha"]).coeffs, phi.coeffs),
        "beta": np.array_equal(pullback(phi, invs["beta"]).coeffs, phi.coeffs),
        "gamma": np.array_equal(pullback(phi, invs["gamma"]).coeffs, phi.coeffs),
        "sigma0": np.array_equal(pullback(phi, invs["sigma0"]).coeffs, phi.coeffs),
        "tau0": np.array_equal(pullback(phi, invs["tau0"]).coeffs, (-phi).coeffs),
    }
    checks.append(CheckResult("torus-involution-pullbacks",
                              "alpha/beta/gamma/sigma0 preserve phi, tau0 negates it",
                              all(ok_each.values()), value=ok_each, expected="all exact"))

    ok = all(m.is_torus_involution() for m in invs.values())
    checks.append(CheckResult("involutions-square-to-identity",
                              "each map composed with itself is the identity on the torus",
                              ok, value="exact", expected="exact"))

    elapsed = time.perf_counter() - t0
    checks.append(CheckResult("exact-suite-runtime", "runtime under 5 s",
                              elapsed < 5.0, value=elapsed, expected="< 5 s",
                              tolerance=5.0))
    return checks


def criterion_decomposition(config=None):
    st = standard_phi()
    checks = []
    p1, p7, p27, _, _ = st._projectors3()
    ranks = tuple(int(np.linalg.matrix_rank(p)) for p in (p1, p7, p27))
    checks.append(CheckResult("projector-ranks", "3-form projector ranks (1, 7, 27)",
                              ranks == (1, 7, 27), value=ranks, expected=(1, 7, 27)))

    pphi = algebra.p_operator(st.phi, st)
    resid = np.max(np.abs(pphi.coeffs - (4.0 / 3.0) * st.phi.as_float().coeffs))
    checks.append(CheckResult("p-on-phi", "P(phi) = (4/3) phi", resid <= 1e-12,
                              value=resid, expected=0.0, tolerance=1e-12))

    worst7 = 0.0
    for l in range(7):
        al = np.zeros(7)
        al[l] = 1.0
        w = st.hodge_star(algebra.wedge(st.phi.as_float(), Form(1, al)))
        worst7 = max(worst7, np.max(np.abs(algebra.p_operator(w, st).coeffs - w.coeffs)))
    checks.append(CheckResult("p-identity-on-7", "P restricts to the identity on the "
                              "7-dimensional piece", worst7 <= 1e-12,
                              value=worst7, expected=0.0, tolerance=1e-12))

    rng = np.random.default_rng(5)
    worst27 = 0.0
    worst_sum = 0.0
    worst_orth = 0.0
    for _ in range(10):
        psi = Form(3, _random_three_form(rng))
        d = algebra.decompose3(psi, st)
        worst_sum = max(worst_sum, np.max(np.abs(d.total().coeffs - psi.coeffs)))
        for a, b in ((d.pi1, d.pi7), (d.pi1, d.pi27), (d.pi7, d.pi27)):
            worst_orth = max(worst_orth, abs(float(algebra.form_inner(a, b, st))))
        psi27 = d.pi27
        worst27 = max(worst27, np.max(np.abs(algebra.p_operator(psi27, st).coeffs
                                             + psi27.coeffs)))
    checks.append(CheckResult("p-negates-27", "P = -identity on the 27-dimensional piece",
                              worst27 <= 1e-12, value=worst27, expected=0.0, tolerance=1e-12))
    checks.append(CheckResult("decomposition-sum", "components sum to the input",
                              worst_sum <= 1e-12, value=worst_sum, expected=0.0,
                              tolerance=1e-12))
    checks.append(CheckResult("decomposition-orthogonal", "components pairwise orthogonal",
                              worst_orth <= 1e-12, value=worst_orth, expected=0.0,
                              tolerance=1e-12))
    return checks


def _random_three_form(rng):
    import itertools as it

    arr = np.zeros((7,) * 3)
    for idx in it.combinations(range(7), 3):
        val = rng.standard_normal()
        for p in it.permutations(range(3)):
            arr[tuple(idx[q] for q in p)] = algebra.perm_parity(p) * val
    return arr


def criterion_reconstruction(config=None, count=100):
    st = standard_phi()
    rng = np.random.default_rng(23)
    worst = 0.0
    for _ in range(count):
        a = rng.standard_normal(7)
        a /= np.linalg.norm(a)
        b = rng.standard_normal(7)
        b -= (b @ a) * a
        b /= np.linalg.norm(b)
        c = st.cross(a, b)
        plane = Plane(np.vstack([a, b, c]))
        basis = plane.basis
        s = rng.standard_normal(7)
        s -= basis.T @ (basis @ s)
        rec = algebra.reconstruct_section(s, plane, st)
        worst = max(worst, np.linalg.norm(rec - s) / np.linalg.norm(s))
    return [CheckResult("normal-reconstruction",
                        "1-form round trip is the identity on normal vectors",
                        worst <= 1e-12, value=worst, expected=0.0, tolerance=1e-12)]


def criterion_torus_kernel(config=None):
    res = (config.resolution if config and config.resolution else 16)
    t0 = time.perf_counter()
    dom = GridDomain.torus(res)
    op = assemble_dirac(dom)
    rep = kernel_dims(op, example="torus3-closed")
    elapsed = time.perf_counter() - t0
    checks = [
        CheckResult("torus-kernel-dim", "closed-torus kernel = constant sections",
                    rep.dim_ker == 4, value=rep.dim_ker, expected=4),
        CheckResult("torus-spectral-gap", "gap ratio between 4th and 5th singular values",
                    rep.converged and rep.gap_ratio >= 1e4, value=rep.gap_ratio,
                    expected=">= 1e4", tolerance=1e4),
        CheckResult("torus-index", "closed problem has index 0",
                    rep.index == 0, value=rep.index, expected=0),
    ]
    sv = np.sort(rep.singular_values)
    checks.append(CheckResult("torus-first-nonzero", "5th singular value is the first "
                              "frequency 2*pi", sv[4] >= 2 * np.pi * (1 - 1e-10),
                              value=float(sv[4]), expected=float(2 * np.pi)))
    checks.append(CheckResult("torus-runtime", "runtime under 60 s", elapsed < 60.0,
                              value=elapsed, expected="< 60 s", tolerance=60.0))
    return checks, rep


def criterion_strip_kernels(config=None, resolutions=(8, 16)):
    checks = []
    reports = []
    for r in resolutions:
        dom = GridDomain.strip(r)
        op = assemble_dirac(dom)
        rep_nu = kernel_dims(op.constrain(NU_X), example=f"strip-nu-{r}")
        rep_mu = kernel_dims(op.constrain(MU_X), example=f"strip-mu-{r}")
        oracle_nu = strip_mode_kernel_dim(dom, NU_X.line)
        oracle_mu = strip_mode_kernel_dim(dom, MU_X.line)
        ok = (rep_nu.dim_ker == 2 and rep_nu.dim_coker == 2 and rep_nu.index == 0
              and rep_nu.converged)
        checks.append(CheckResult(f"strip-kernels-res{r}",
                                  "ker = coker = 2, index 0 for the coassociative "
                                  "boundary condition", ok,
                                  value=(rep_nu.dim_ker, rep_nu.dim_coker, rep_nu.index),
                                  expected=(2, 2, 0)))
        checks.append(CheckResult(f"strip-oracle-res{r}",
                                  "independent per-frequency solve confirms both kernels",
                                  oracle_nu == rep_nu.dim_ker and oracle_mu == rep_mu.dim_ker,
                                  value=(oracle_nu, oracle_mu), expected=(2, 2)))
        checks.append(CheckResult(f"strip-adjoint-duality-res{r}",
                                  "cokernel of one condition equals kernel of its complement",
                                  rep_nu.dim_coker == rep_mu.dim_ker,
                                  value=(rep_nu.dim_coker, rep_mu.dim_ker), expected="equal"))
        reports.append((rep_nu, rep_mu))
    return checks, reports


def criterion_linearization(config=None, n_dirs=50, t=1e-5, tol=1e-6):
    res = (config.resolution if config and config.resolution else 16)
    dom = GridDomain.torus(res)
    op = assemble_dirac(dom)
    dirs = [random_smooth_section(dom, fiber=4, seed=100 + j) for j in range(n_dirs)]
    worst = linearization_residual(op, dirs, t=t)
    return [CheckResult("linearization", "centered difference of the nonlinear residual "
                        "matches the assembled operator", worst <= tol, value=worst,
                        expected=0.0, tolerance=tol)]


def criterion_weitzenbock(config=None, resolutions=(8, 16, 32), order_threshold=1.8):
    res = (config.resolution if config and config.resolution else 16)
    dom = GridDomain.torus(res)
    op = assemble_dirac(dom)
    block = weitzenbock_block_residual(op)
    checks = [CheckResult("weitzenbock-exact", "D^2 equals the connection Laplacian per "
                          "frequency", block <= 1e-12, value=block, expected=0.0,
                          tolerance=1e-12)]
    resids = []
    for r in resolutions:
        sop = assemble_dirac(GridDomain.strip(r))
        resids.append(weitzenbock_residual(sop, samples=3, seed=7))
    orders = _orders(resids)
    checks.append(CheckResult("weitzenbock-fd-order", "finite-difference interior residual "
                              "decays at second order", min(orders) >= order_threshold,
                              value={"residuals": resids, "orders": orders},
                              expected=f"orders >= {order_threshold}",
                              tolerance=order_threshold))
    return checks


def criterion_selfadjoint(config=None, resolutions=(8, 16, 32), order_threshold=1.8):
    resids = []
    for r in resolutions:
        dom = GridDomain.strip(r)
        op = assemble_dirac(dom)
        s = random_smooth_section(dom, seed=31)
        sp = random_smooth_section(dom, seed=37)
        resids.append(selfadjoint_residual(op, s, sp))
    orders = _orders(resids)
    checks = [CheckResult("selfadjoint-order", "boundary-corrected symmetry residual decays "
                          "at second order", min(orders) >= order_threshold,
                          value={"residuals": resids, "orders": orders},
                          expected=f"orders >= {order_threshold}",
                          tolerance=order_threshold)]
    dom = GridDomain.strip(16)
    op = assemble_dirac(dom)
    s = random_smooth_section(dom, seed=41)
    sp = random_smooth_section(dom, seed=43)
    mask = np.zeros(dom.shape + (1,))
    m = dom.shape[0]
    mask[4:m - 4] = 1.0
    a = GridSection(dom, s.values * mask)
    b = GridSection(dom, sp.values * mask)
    resid = selfadjoint_residual(op, a, b)
    checks.append(CheckResult("selfadjoint-interior", "pure interior sections satisfy the "
                              "identity to near machine precision", resid <= 1e-10,
                              value=resid, expected=0.0, tolerance=1e-10))
    return checks


def criterion_boundary_laws(config=None, order_threshold=0.9):
    rho = config.rho if config else 0.5
    levels = (1, 2, 3)
    e = np.zeros(7)
    e[3] = 1.0
    checks = []
    # trace law under refinement, against the mesh-estimated mean curvature;
    # the ellipsoid's normal field is nonlinear so the estimate carries a
    # resolution-dependent error (on a sphere it is exact at every level)
    trace_resids = []
    worst_asym = 0.0
    for level in levels:
        mesh = meshes.ellipsoid_mesh(1.0, 1.0, 2.0, level=level)
        mu = boundary.ComplementBundle(boundary.SpanEBundle(e))
        dl = boundary.assemble_DL(mesh, mu)
        h_mesh = np.array([_mesh_h_estimate(mesh, i) for i in range(len(mesh.vertices))])
        res = boundary.check_trace_symmetry(dl, h_mesh)
        worst_asym = max(worst_asym, res["asymmetry"])
        trace_resids.append(res["trace_residual"])
    orders = _orders(trace_resids)
    checks.append(CheckResult("boundary-symmetry", "assembled boundary operator is symmetric",
                              worst_asym <= 1e-8, value=worst_asym, expected=0.0,
                              tolerance=1e-8))
    checks.append(CheckResult("boundary-trace-law", "trace approaches twice the mesh mean "
                              "curvature under refinement", min(orders) >= order_threshold,
                              value={"residuals": trace_resids, "orders": orders},
                              expected=f"orders >= {order_threshold}",
                              tolerance=order_threshold))

    mesh3 = meshes.icosphere_mesh(level=3, radius=rho)
    mu = boundary.ComplementBundle(boundary.SpanEBundle(e))
    dl_s = boundary.assemble_DL(mesh3, mu)
    spec = boundary.dl_spectra(dl_s)
    rel = np.max(np.abs(spec - 1.0 / rho)) * rho
    checks.append(CheckResult("sphere-spectrum", "spectrum of the transverse boundary "
                              "operator is the inverse radius pair", rel <= 0.02,
                              value=float(rel), expected=0.0, tolerance=0.02))
    h_sphere = np.array([mesh3.mean_curvature(i) for i in range(len(mesh3.vertices))])
    sres = boundary.check_trace_symmetry(dl_s, h_sphere)
    checks.append(CheckResult("sphere-trace", "sphere trace equals twice the inverse radius",
                              sres["trace_residual"] <= 1e-10,
                              value=sres["trace_residual"], expected=0.0, tolerance=1e-10))

    ell = meshes.ellipsoid_mesh(1.0, 1.0, 2.0, level=3)
    dl_e = boundary.assemble_DL(ell, boundary.ComplementBundle(boundary.SpanEBundle(e)))
    spec_e = boundary.dl_spectra(dl_e)
    worst_e = 0.0
    for i in range(0, len(ell.vertices), 7):
        pk = ell.principal_curvatures(i)
        worst_e = max(worst_e, np.max(np.abs(np.sort(spec_e[i]) - np.sort(pk))))
    checks.append(CheckResult("ellipsoid-spectrum", "boundary operator eigenvalues match "
                              "the principal curvatures", worst_e <= 1e-8,
                              value=worst_e, expected=0.0, tolerance=1e-8))

    tor = meshes.flat_torus_mesh(16)
    for name, bundle in (("nu", boundary.ConstantBundle(np.eye(7)[3:5])),
                         ("mu", boundary.ConstantBundle(np.eye(7)[5:7]))):
        dl_t = boundary.assemble_DL(tor, bundle)
        checks.append(CheckResult(f"flat-boundary-{name}", "flat boundary tori give a "
                                  "vanishing boundary operator",
                                  float(np.max(np.abs(dl_t))) == 0.0,
                                  value=float(np.max(np.abs(dl_t))), expected=0.0,
                                  tolerance=0.0))
    return checks


def _mesh_h_estimate(mesh, i):
    """Mean curvature from the least-squares normal derivative (ignores any
    analytic evaluator attached to the mesh)."""
    if not hasattr(mesh, "_h_cache"):
        est = meshes.SurfaceMesh(mesh.vertices, mesh.faces, mesh.normals,
                                 mesh.normal_space, dn_matrices=None)
        mesh._h_cache = np.array([est.mean_curvature(j)
                                  for j in range(len(mesh.vertices))])
    return mesh._h_cache[i]


def criterion_index_formula(config=None):
    checks = []
    rho = config.rho if config else 0.5
    e = np.zeros(7)
    e[3] = 1.0

    ball = meshes.icosphere_mesh(level=3, radius=rho)
    nu = boundary.SpanEBundle(e)
    mu = boundary.ComplementBundle(nu)
    idx = boundary.index_of(ball, nu)
    checks.append(CheckResult("ball-index", "round boundary with constant transverse "
                              "direction has index 1", (idx.genus, idx.c1, idx.index) == (0, 0, 1),
                              value=idx.to_json(), expected={"genus": 0, "c1": 0, "index": 1}))

    tor = meshes.flat_torus_mesh(16)
    nu_t = boundary.ConstantBundle(np.eye(7)[3:5], name="nu_X")
    idx_t = boundary.index_of(tor, nu_t)
    checks.append(CheckResult("strip-index", "flat boundary tori have index 0",
                              (idx_t.genus, idx_t.c1, idx_t.index) == (1, 0, 0),
                              value=idx_t.to_json(), expected={"genus": 1, "c1": 0, "index": 0}))

    dom = GridDomain.strip(8)
    rep = kernel_dims(assemble_dirac(dom).constrain(NU_X))
    checks.append(CheckResult("index-cross-module", "surface index formula matches the "
                              "computed kernel minus cokernel on the strip",
                              idx_t.index == rep.index,
                              value=(idx_t.index, rep.index), expected="equal"))

    c_sphere = boundary.chern_number(ball, boundary.TangentBundle())
    g2mesh = meshes.genus2_mesh()
    c_torus = boundary.chern_number(tor, boundary.TangentBundle())
    c_genus2 = boundary.chern_number(g2mesh, boundary.TangentBundle())
    euler2 = g2mesh.euler_characteristic()
    checks.append(CheckResult("tangent-chern-numbers", "tangent bundle degrees are the "
                              "Euler numbers 2, 0, -2",
                              (c_sphere, c_torus, c_genus2) == (2, 0, -2) and euler2 == -2,
                              value=(c_sphere, c_torus, c_genus2), expected=(2, 0, -2)))

    rel_ball = boundary.tensor_relation_check(ball, nu, mu)
    tor_rel = boundary.tensor_relation_check(
        tor, nu_t, boundary.ConstantBundle(np.eye(7)[5:7], name="mu_X"))

    J = np.zeros((7, 7))
    for (p, q) in ((1, 2), (3, 4), (5, 6)):
        J[q, p] = 1.0
        J[p, q] = -1.0
    slmesh = meshes.icosphere_mesh(level=3, radius=rho, axes=(1, 3, 5))
    nu_sl = boundary.JRotatedTangentBundle(J)
    mu_sl = boundary.SpanEBundle(np.eye(7)[0])
    rel_sl = boundary.tensor_relation_check(slmesh, nu_sl, mu_sl)
    ok = (rel_ball["residual"] == 0 and tor_rel["residual"] == 0
          and rel_sl["residual"] == 0)
    checks.append(CheckResult("tensor-relation", "-c1(mu) = c1(nu) + c1(tangent) on all "
                              "three gallery bundle families", ok,
                              value={"ball": rel_ball, "torus": tor_rel, "product": rel_sl},
                              expected="residual 0"))

    idx_sl = boundary.index_of(slmesh, nu_sl)
    checks.append(CheckResult("product-boundary-index", "rotated-tangent constraint bundle "
                              "gives index genus - 1", idx_sl.index == idx_sl.genus - 1
                              and idx_sl.c1 == -2,
                              value=idx_sl.to_json(), expected={"c1": -2, "index": -1}))
    return checks


def criterion_hodge(config=None, count=100):
    res = (config.resolution if config and config.resolution else 16)
    lam = config.lam if config else 0.05
    a = config.a if config else 1.0
    dom = GridDomain.torus(res)
    op = assemble_dvee(dom)
    worst = 0.0
    for j in range(count):
        s = random_smooth_section(dom, fiber=4, seed=200 + j)
        ref = dvee_reference_apply(dom, s.values)
        got = op.apply(s.values)
        worst = max(worst, np.max(np.abs(got - ref)) / np.max(np.abs(s.values)))
    checks = [CheckResult("hodge-reference-match", "assembled operator equals the composed "
                          "exterior-derivative route", worst <= 1e-12, value=worst,
                          expected=0.0, tolerance=1e-12)]

    sq = dvee_square_residual(op)
    checks.append(CheckResult("hodge-square", "operator squared equals the connection Laplacian",
                              sq <= 1e-12, value=sq, expected=0.0, tolerance=1e-12))

    rep = kernel_dims(op, example="cy-torus-s1")
    checks.append(CheckResult("hodge-kernel", "kernel dimension is first Betti number "
                              "plus one", rep.dim_ker == 4 and rep.converged,
                              value=rep.dim_ker, expected=4))

    harm = _hodge_kernel_harmonicity(dom, op)
    checks.append(CheckResult("hodge-kernel-harmonic", "kernel elements have constant "
                              "function part and closed, coclosed 1-form part",
                              harm <= 1e-10, value=harm, expected=0.0, tolerance=1e-10))

    pop = perturbed_dvee(dom, lam, a)
    rep_p = kernel_dims(pop, example="cy-torus-perturbed")
    lost = _perturbed_lost_direction(pop)
    checks.append(CheckResult("hodge-perturbed-kernel", "small perturbation drops the "
                              "kernel to 3", rep_p.dim_ker == 3 and rep_p.converged,
                              value=rep_p.dim_ker, expected=3))
    checks.append(CheckResult("hodge-lost-direction", "the expelled direction is the "
                              "constant function part", lost <= 1e-10, value=lost,
                              expected=0.0, tolerance=1e-10))
    return checks, (rep, rep_p)


def _hodge_kernel_harmonicity(dom, op):
    """Max of |d alpha|, |d* alpha| and |tau - mean(tau)| over grid sections
    reconstructed from the kernel basis of the frequency blocks."""
    from .dirac import _spectral_derivative

    worst = 0.0
    for k, B in op.iter_torus_blocks():
        _, sv, vt = np.linalg.svd(B)
        null = vt[sv < 1e-8].conj()
        if len(null) == 0:
            continue
        phase = np.ones(dom.shape, dtype=complex)
        for axis, freq in enumerate(k):
            x = np.arange(dom.shape[axis]) / dom.shape[axis]
            shape = [1, 1, 1]
            shape[axis] = -1
            phase = phase * np.exp(2j * np.pi * freq * x).reshape(shape)
        for vec in null:
            vals = np.real(phase[..., None] * vec[None, None, None, :])
            ds = [_spectral_derivative(vals, i) for i in range(3)]
            curl = np.stack([ds[1][..., 2] - ds[2][..., 1],
                             ds[2][..., 0] - ds[0][..., 2],
                             ds[0][..., 1] - ds[1][..., 0]], axis=-1)
            div = ds[0][..., 0] + ds[1][..., 1] + ds[2][..., 2]
            tau = vals[..., 3]
            worst = max(worst,
                        float(np.max(np.abs(curl))),
                        float(np.max(np.abs(div))),
                        float(np.max(np.abs(tau - tau.mean()))))
    return worst


def _perturbed_lost_direction(pop):
    """Max |tau component| over the perturbed kernel basis."""
    worst = 0.0
    for k, B in pop.iter_torus_blocks():
        _, sv, vt = np.linalg.svd(B)
        null = vt[sv < 1e-8].conj()
        for vec in null:
            worst = max(worst, abs(vec[3]))
    return worst


def criterion_bochner(config=None, resolutions=(8, 16, 32), order_threshold=0.9):
    checks = []
    dom = GridDomain.strip(16)
    op = assemble_dirac(dom).constrain(MU_X)
    const = np.zeros(dom.shape + (4,))
    const[..., 2] = 0.7
    const[..., 3] = -0.4
    terms = bochner_terms(op, const, boundary_operator=lambda end, sl: np.zeros_like(sl))
    ok = all(abs(terms[k]) <= 1e-10 for k in ("grad", "curvature", "boundary"))
    checks.append(CheckResult("bochner-kernel", "all three integrated terms vanish on "
                              "kernel elements", ok, value=terms, expected=0.0,
                              tolerance=1e-10))

    resids = []
    for r in resolutions:
        d = GridDomain.strip(r)
        o = assemble_dirac(d).constrain(MU_X)
        h = d.spacing[0]
        x1 = d.x1_nodes()
        x2 = np.arange(d.shape[1]) / d.shape[1]
        bump = (np.cos(np.pi * x1)[:, None, None]
                * np.cos(2 * np.pi * x2)[None, :, None]
                * np.ones((1, 1, d.shape[2])))
        vals = np.zeros(d.shape + (4,))
        vals[..., 2] = 0.7 + h * bump
        vals[..., 3] = -0.4
        t = bochner_terms(o, vals, boundary_operator=lambda end, sl: np.zeros_like(sl))
        resids.append(t["total"])
    orders = _orders(resids)
    checks.append(CheckResult("bochner-perturbed-order", "identity residual decays at "
                              "least linearly on perturbed elements",
                              min(orders) >= order_threshold,
                              value={"residuals": resids, "orders": orders},
                              expected=f"orders >= {order_threshold}",
                              tolerance=order_threshold))
    return checks


CRITERIA = (
    ("1", "exact-algebra", lambda cfg: criterion_exact_algebra(cfg)),
    ("2", "three-form-decomposition", lambda cfg: criterion_decomposition(cfg)),
    ("3", "normal-reconstruction", lambda cfg: criterion_reconstruction(cfg)),
    ("4", "closed-torus-kernel", lambda cfg: criterion_torus_kernel(cfg)[0]),
    ("5", "strip-boundary-kernels", lambda cfg: criterion_strip_kernels(cfg)[0]),
    ("6", "linearization", lambda cfg: criterion_linearization(cfg)),
    ("7", "weitzenbock-identity", lambda cfg: criterion_weitzenbock(cfg)),
    ("8", "selfadjointness", lambda cfg: criterion_selfadjoint(cfg)),
    ("9", "boundary-operator-laws", lambda cfg: criterion_boundary_laws(cfg)),
    ("10", "index-formula", lambda cfg: criterion_index_formula(cfg)),
    ("11", "hodge-operator", lambda cfg: criterion_hodge(cfg)[0]),
    ("12", "integrated-positivity", lambda cfg: criterion_bochner(cfg)),
)


def verify_all(config=None):
    """Run every acceptance criterion; returns (rows, all_passed)."""
    config = config or RunConfig()
    rows = []
    ok = True
    for num, name, fn in CRITERIA:
        t0 = time.perf_counter()
        checks = fn(config)
        elapsed = (time.perf_counter() - t0) * 1e3
        passed = all(c.passed for c in checks)
        ok &= passed
        rows.append({"criterion": num, "name": name, "pass": passed,
                     "wall_time_ms": elapsed,
                     "checks": [c.to_json() for c in checks]})
    return rows, ok


# ---------------------------------------------------------------------------
# Example catalog


def _refinement_checks(base_report, rebuild, refine):
    """Kernel/cokernel stability across doubled resolutions."""
    checks = []
    dims = (base_report.dim_ker, base_report.dim_coker, base_report.index)
    res = base_report.resolution
    for _ in range(refine):
        res = tuple(2 * n for n in res)
        rep = rebuild(res)
        ok = ((rep.dim_ker, rep.dim_coker, rep.index) == dims
              and rep.converged)
        checks.append(CheckResult(f"refinement-stability-{'x'.join(map(str, res))}",
                                  "kernel, cokernel and index stable under refinement",
                                  ok, value=(rep.dim_ker, rep.dim_coker, rep.index),
                                  expected=dims))
        dims = (rep.dim_ker, rep.dim_coker, rep.index)
    return checks


def _run_torus3(config):
    report = _report_skeleton("torus3-closed", config,
                              {"resolution": config.resolution or 16})
    checks, rep = criterion_torus_kernel(config)
    _merge_spectral(report, rep)
    report["residuals"]["weitzenbock"] = float(
        weitzenbock_block_residual(assemble_dirac(GridDomain.torus(config.resolution or 16))))
    checks += _refinement_checks(
        rep, lambda res: kernel_dims(assemble_dirac(GridDomain("torus3", res))),
        config.refine)
    report["checks"] = [c.to_json() for c in checks]
    return report


def _run_strip(config):
    r = config.resolution or 16
    report = _report_skeleton("strip-coassoc", config, {"resolution": r})
    checks, reports = criterion_strip_kernels(config, resolutions=(max(4, r // 2), r))
    _merge_spectral(report, reports[-1][0])
    dom = GridDomain.strip(r)
    op = assemble_dirac(dom)
    s = random_smooth_section(dom, seed=config.seed + 1)
    sp = random_smooth_section(dom, seed=config.seed + 2)
    report["residuals"]["selfadjoint"] = float(selfadjoint_residual(op, s, sp))
    report["residuals"]["weitzenbock"] = float(weitzenbock_residual(op, samples=2,
                                                                    seed=config.seed))
    const = np.zeros(dom.shape + (4,))
    const[..., 2] = 1.0
    report["residuals"]["bochner"] = float(
        bochner_terms(op.constrain(MU_X), const,
                      boundary_operator=lambda end, sl: np.zeros_like(sl))["total"])
    checks += _refinement_checks(
        reports[-1][0],
        lambda res: kernel_dims(assemble_dirac(GridDomain("strip", res)).constrain(NU_X)),
        config.refine)
    report["checks"] = [c.to_json() for c in checks]
    return report


def _run_ball(config):
    report = _report_skeleton("ball-constant-e", config,
                              {"rho": config.rho, "e": list(config.e_vector),
                               "subdivisions": config.subdivisions})
    e = np.asarray(config.e_vector, dtype=float)
    mesh = meshes.icosphere_mesh(level=config.subdivisions, radius=config.rho)
    nu = boundary.SpanEBundle(e)
    mu = boundary.ComplementBundle(nu)
    idx = boundary.index_of(mesh, nu)
    report["index"] = idx.index
    dl_nu = boundary.assemble_DL(mesh, nu)
    dl_mu = boundary.assemble_DL(mesh, mu)
    spec_nu = boundary.dl_spectra(dl_nu)
    spec_mu = boundary.dl_spectra(dl_mu)
    h = np.array([mesh.mean_curvature(i) for i in range(len(mesh.vertices))])
    sym = boundary.check_trace_symmetry(dl_mu, h)
    report["residuals"].update({"dl_asymmetry": sym["asymmetry"],
                                "dl_trace": sym["trace_residual"]})
    inv_rho = 1.0 / config.rho
    checks = [
        CheckResult("ball-index", "index of the round boundary problem",
                    (idx.genus, idx.c1, idx.index) == (0, 0, 1), value=idx.to_json(),
                    expected={"genus": 0, "c1": 0, "index": 1}),
        CheckResult("mu-spectrum", "transverse spectrum is the inverse radius",
                    float(np.max(np.abs(spec_mu - inv_rho))) <= 0.02 * inv_rho,
                    value=float(np.max(np.abs(spec_mu - inv_rho))), tolerance=0.02 * inv_rho,
                    expected=0.0),
        CheckResult("nu-kernel-direction", "the constant transverse direction lies in the "
                    "kernel with complementary eigenvalue twice the mean curvature",
                    float(np.max(np.abs(spec_nu[:, 0]))) <= 1e-8
                    and float(np.max(np.abs(spec_nu[:, 1] - 2 * h))) <= 1e-8,
                    value=[float(np.max(np.abs(spec_nu[:, 0]))),
                           float(np.max(np.abs(spec_nu[:, 1] - 2 * h)))],
                    expected=[0.0, 0.0], tolerance=1e-8),
    ]
    report["checks"] = [c.to_json() for c in checks]
    return report


def _run_sphere_rho(config):
    report = _run_ball(config)
    report["example"] = "sphere-rho"
    return report


def _run_ellipsoid(config):
    report = _report_skeleton("ellipsoid", config, {"abc": [1.0, 1.0, 2.0],
                                                    "subdivisions": config.subdivisions})
    e = np.asarray(config.e_vector, dtype=float)
    mesh = meshes.ellipsoid_mesh(1.0, 1.0, 2.0, level=config.subdivisions)
    mu = boundary.ComplementBundle(boundary.SpanEBundle(e))
    dl = boundary.assemble_DL(mesh, mu)
    spec = boundary.dl_spectra(dl)
    worst = 0.0
    for i in range(len(mesh.vertices)):
        pk = mesh.principal_curvatures(i)
        worst = max(worst, float(np.max(np.abs(np.sort(spec[i]) - np.sort(pk)))))
    report["residuals"]["principal_curvature_mismatch"] = worst
    checks = [CheckResult("ellipsoid-eigenvalues", "boundary operator diagonalizes along "
                          "the principal curvatures", worst <= 1e-8, value=worst,
                          expected=0.0, tolerance=1e-8)]
    report["checks"] = [c.to_json() for c in checks]
    return report


def _run_cy_torus(config):
    report = _report_skeleton("cy-torus-s1", config, {"resolution": config.resolution or 16})
    checks, (rep, _) = criterion_hodge(config, count=20)
    _merge_spectral(report, rep)
    report["residuals"]["dvee_square"] = float(
        dvee_square_residual(assemble_dvee(GridDomain.torus(config.resolution or 16))))
    report["checks"] = [c.to_json() for c in checks[:4]]
    return report


def _run_cy_perturbed(config):
    report = _report_skeleton("cy-torus-perturbed", config,
                              {"resolution": config.resolution or 16,
                               "lambda": config.lam, "a": config.a})
    checks, (_, rep_p) = criterion_hodge(config, count=5)
    _merge_spectral(report, rep_p)
    report["checks"] = [c.to_json() for c in checks[-2:]]
    return report


def _run_joyce(config):
    report = _report_skeleton("joyce-involutions", config)
    checks = criterion_exact_algebra(config)
    report["checks"] = [c.to_json() for c in checks if "involution" in c.name
                        or "pullback" in c.name]
    return report


EXAMPLES = {
    "torus3-closed": _run_torus3,
    "strip-coassoc": _run_strip,
    "ball-constant-e": _run_ball,
    "sphere-rho": _run_sphere_rho,
    "ellipsoid": _run_ellipsoid,
    "cy-torus-s1": _run_cy_torus,
    "cy-torus-perturbed": _run_cy_perturbed,
    "joyce-involutions": _run_joyce,
}


def run_example(name, config=None):
    """Run one catalog example and return its validated report."""
    config = config or RunConfig()
    if name not in EXAMPLES:
        raise KeyError(f"unknown example {name!r}; catalog: {sorted(EXAMPLES)}")
    t0 = time.perf_counter()
    report = EXAMPLES[name](config)
    if config.bit_reproducible:
        report["wall_time_ms"] = 0.0
        for c in report["checks"]:
            if "runtime" in c["name"]:
                c["value"] = 0.0
    else:
        report["wall_time_ms"] = (time.perf_counter() - t0) * 1e3
    validate_report(report)
    if config.out_dir:
        write_report(report, config)
    return report


def _schema():
    path = os.path.join(os.path.dirname(__file__), "report_schema.json")
    with open(path) as fh:
        return json.load(fh)


def validate_report(report):
    import jsonschema

    jsonschema.validate(report, _schema())


def write_report(report, config):
    """Atomic JSON (and optional CSV spectrum) dump of one report."""
    os.makedirs(config.out_dir, exist_ok=True)
    base = os.path.join(config.out_dir, report["example"])
    if "json" in config.formats:
        payload = json.dumps(report, indent=1, sort_keys=True)
        _atomic_write(base + ".json", payload)
    if "csv" in config.formats and report["singular_values"]:
        lines = "\n".join(f"{v:.17g}" for v in report["singular_values"]) + "\n"
        _atomic_write(base + ".csv", lines)


def _atomic_write(path, text):
    d = os.path.dirname(path)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
