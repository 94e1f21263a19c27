"""Boundary geometry on triangulated surfaces.

Implements the 0-order boundary operator

    D_L s = pi_L( v x grad_w s  -  w x grad_v s )

for rank-2 sub-bundles L of the normal bundle restricted to the boundary
surface, invariant under the complex structure J = n x (n the inward
normal).  D_L is symmetric with trace twice the boundary mean curvature;
on a round sphere with a constant transverse direction its spectrum is
the pair of principal curvatures.

The same bundles carry a discrete connection (orthogonal projection
transport between neighboring fibers) whose holonomy, summed over faces,
quantizes to the first Chern number.  Combined with the genus this gives
the deformation index  c1 + 1 - g  of the boundary problem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import DIM
from .dirac import NotComplexLine

__all__ = [
    "NonIntegral",
    "ConstantBundle",
    "SpanEBundle",
    "ComplementBundle",
    "TangentBundle",
    "JRotatedTangentBundle",
    "bundle_from_json",
    "assemble_DL",
    "dl_spectra",
    "check_trace_symmetry",
    "chern_number",
    "tensor_relation_check",
    "IndexData",
    "index_of",
]


class NonIntegral(RuntimeError):
    """Summed holonomy is not close to an integer (mesh too coarse)."""


# ---------------------------------------------------------------------------
# Bundles


class _LineBundle:
    """A rank-2 sub-bundle of nu restricted to the boundary, with the
    complex structure b -> n x b."""

    name = "bundle"

    def fiber(self, mesh, i):
        """Orthonormal pair (b1, b2 = n x b1) spanning the fiber at vertex i."""
        raise NotImplementedError

    def sections(self, mesh, i):
        """Two local sections spanning the bundle near vertex i, each as
        ``(value, derivative)`` with ``derivative(u)`` the ambient
        directional derivative of the analytic extension."""
        raise NotImplementedError

    def all_fibers(self, mesh):
        V = len(mesh.vertices)
        out = np.zeros((V, 2, DIM))
        for i in range(V):
            b1, b2 = self.fiber(mesh, i)
            out[i, 0], out[i, 1] = b1, b2
        return out

    def check_complex_line(self, mesh, tol=1e-9, sample=64):
        st = mesh.structure
        V = len(mesh.vertices)
        step = max(1, V // sample)
        for i in range(0, V, step):
            b1, b2 = self.fiber(mesh, i)
            P = np.outer(b1, b1) + np.outer(b2, b2)
            jb = st.cross(mesh.normals[i], b1)
            if np.linalg.norm(jb - P @ jb) > tol:
                raise NotComplexLine(f"{self.name}: fiber at vertex {i} is not "
                                     "invariant under the normal cross action")


class ConstantBundle(_LineBundle):
    def __init__(self, basis, name="constant"):
        basis = np.asarray(basis, dtype=float)
        q, _ = np.linalg.qr(basis.T)
        self.basis = q.T[:2]
        self.name = name

    def fiber(self, mesh, i):
        return self.basis[0], self.basis[1]

    def sections(self, mesh, i):
        zero = lambda u: np.zeros(DIM)
        return [(self.basis[0], zero), (self.basis[1], zero)]


class SpanEBundle(_LineBundle):
    """span(e, n x e) for a constant unit transverse direction e; the
    sub-bundle cut out on the boundary by the 4-dimensional constraint
    generated by e."""

    name = "nu_X"

    def __init__(self, e):
        e = np.asarray(e, dtype=float)
        self.e = e / np.linalg.norm(e)

    def fiber(self, mesh, i):
        return self.e, mesh.structure.cross(mesh.normals[i], self.e)

    def sections(self, mesh, i):
        st = mesh.structure
        n = mesh.normals[i]
        d = mesh.dn(i)
        s2 = st.cross(n, self.e)

        def ds2(u):
            return st.cross(d @ u, self.e)

        return [(self.e, lambda u: np.zeros(DIM)), (s2, ds2)]


class ComplementBundle(_LineBundle):
    """Orthogonal complement of a SpanEBundle inside the body's rank-4
    normal space."""

    name = "mu_X"

    def __init__(self, span_e):
        self.inner = span_e
        self.e = span_e.e

    def _reference(self, mesh, i):
        m = mesh.structure.cross(mesh.normals[i], self.e)
        best, best_norm = None, -1.0
        for c in mesh.normal_space:
            y = c - (c @ self.e) * self.e - (c @ m) * m
            nrm = np.linalg.norm(y)
            if nrm > best_norm:
                best, best_norm = c, nrm
        return best

    def _section_from(self, mesh, i, c):
        st = mesh.structure
        n = mesh.normals[i]
        d = mesh.dn(i)
        m = st.cross(n, self.e)
        y = c - (c @ self.e) * self.e - (c @ m) * m
        ny = np.linalg.norm(y)
        s = y / ny

        def ds(u):
            dm = st.cross(d @ u, self.e)
            dy = -(c @ dm) * m - (c @ m) * dm
            return (dy - (dy @ s) * s) / ny

        return s, ds

    def fiber(self, mesh, i):
        s1, _ = self._section_from(mesh, i, self._reference(mesh, i))
        return s1, mesh.structure.cross(mesh.normals[i], s1)

    def sections(self, mesh, i):
        st = mesh.structure
        n = mesh.normals[i]
        d = mesh.dn(i)
        c = self._reference(mesh, i)
        s1, ds1 = self._section_from(mesh, i, c)
        s2 = st.cross(n, s1)

        def ds2(u):
            return st.cross(d @ u, s1) + st.cross(n, ds1(u))

        return [(s1, ds1), (s2, ds2)]


class TangentBundle(_LineBundle):
    """The tangent bundle of the boundary surface with J = n x; used for
    Chern numbers only."""

    name = "tangent"

    def fiber(self, mesh, i):
        return mesh.frames_v[i], mesh.frames_w[i]

    def check_complex_line(self, mesh, tol=1e-9, sample=64):
        pass  # w = n x v by construction


class JRotatedTangentBundle(_LineBundle):
    """Fibers J(T boundary) for an ambient complex structure J; realizes
    the constraint bundle of the product of a volume-zero 3-body in a
    complex 3-space with a circle factor."""

    name = "j-tangent"

    def __init__(self, J):
        self.J = np.asarray(J, dtype=float)

    def fiber(self, mesh, i):
        b1 = self.J @ mesh.frames_v[i]
        b2 = mesh.structure.cross(mesh.normals[i], b1)
        return b1, b2


def bundle_from_json(spec):
    kind = spec["type"]
    if kind == "constant":
        return ConstantBundle(np.asarray(spec["basis"], dtype=float))
    if kind == "span-e":
        return SpanEBundle(np.asarray(spec["e"], dtype=float))
    if kind == "complement-e":
        return ComplementBundle(SpanEBundle(np.asarray(spec["e"], dtype=float)))
    if kind == "tangent-rotated":
        return TangentBundle()
    raise KeyError(f"unknown bundle type {kind!r}")


# ---------------------------------------------------------------------------
# The boundary operator


def assemble_DL(mesh, bundle):
    """Per-vertex 2x2 matrices of D_L in the bundle's orthonormal fibers.

    Derivatives of the bundle's local sections are taken analytically
    through the mesh's normal-derivative evaluator, so the only
    discretization error is the one carried by that evaluator.
    """
    bundle.check_complex_line(mesh)
    st = mesh.structure
    Pnu = mesh.normal_space.T @ mesh.normal_space
    V = len(mesh.vertices)
    out = np.zeros((V, 2, 2))
    for i in range(V):
        v, w = mesh.frames_v[i], mesh.frames_w[i]
        secs = bundle.sections(mesh, i)
        basis = [secs[0][0], secs[1][0]]
        for b, (s, ds) in enumerate(secs):
            val = st.cross(v, Pnu @ ds(w)) - st.cross(w, Pnu @ ds(v))
            out[i, 0, b] = basis[0] @ val
            out[i, 1, b] = basis[1] @ val
    return out


def dl_spectra(dl_field):
    """Eigenvalues of the symmetrized matrices, (V, 2) ascending."""
    sym = 0.5 * (dl_field + np.transpose(dl_field, (0, 2, 1)))
    return np.linalg.eigvalsh(sym)


def check_trace_symmetry(dl_field, h_field):
    """Residuals of the order-0 laws: trace D_L = 2 H and symmetry."""
    traces = np.trace(dl_field, axis1=1, axis2=2)
    asym = np.abs(dl_field[:, 0, 1] - dl_field[:, 1, 0])
    return {
        "trace_residual": float(np.max(np.abs(traces - 2.0 * np.asarray(h_field)))),
        "asymmetry": float(np.max(asym)),
    }


# ---------------------------------------------------------------------------
# Chern numbers, tensor relation, index


def chern_number(mesh, bundle, round_tol=0.1):
    """First Chern number from summed holonomy of the projection
    connection.

    For each face the fiber frames at its corners are compared pairwise
    (the angle of one frame's first vector inside the next fiber); the
    summed angle, taken with the face's intrinsic orientation sign, is
    the curvature of the induced connection and adds up to 2 pi c1.
    """
    bundle.check_complex_line(mesh)
    fibers = bundle.all_fibers(mesh)
    signs = mesh.face_orientation_signs()
    B1, B2 = fibers[:, 0, :], fibers[:, 1, :]
    f = mesh.faces
    angles = np.zeros(len(f))
    for p, q in ((0, 1), (1, 2), (2, 0)):
        a, b = f[:, p], f[:, q]
        # polar angle of the 2x2 projection between the fibers (the rotation
        # part survives, the first-order projection distortion cancels)
        cosv = 0.5 * (np.einsum("ix,ix->i", B1[a], B1[b])
                      + np.einsum("ix,ix->i", B2[a], B2[b]))
        sinv = 0.5 * (np.einsum("ix,ix->i", B1[a], B2[b])
                      - np.einsum("ix,ix->i", B2[a], B1[b]))
        angles += np.arctan2(sinv, cosv)
    angles = (angles + np.pi) % (2 * np.pi) - np.pi
    total = float(np.sum(signs * angles) / (2 * np.pi))
    nearest = round(total)
    if abs(total - nearest) > round_tol:
        raise NonIntegral(f"holonomy sum {total:.4f} is not integral; refine the mesh")
    return int(nearest)


def tensor_relation_check(mesh, nu_bundle, mu_bundle):
    """Degree residual of the bundle relation tying the two boundary
    constraint bundles to the surface tangent: -c1(mu) = c1(nu) + c1(T)."""
    c_nu = chern_number(mesh, nu_bundle)
    c_mu = chern_number(mesh, mu_bundle)
    c_t = chern_number(mesh, TangentBundle())
    return {"c1_nu": c_nu, "c1_mu": c_mu, "c1_tangent": c_t,
            "residual": abs(-c_mu - c_nu - c_t)}


@dataclass(frozen=True)
class IndexData:
    genus: int
    c1: int
    index: int

    def to_json(self):
        return {"genus": self.genus, "c1": self.c1, "index": self.index}


def index_of(mesh, nu_bundle):
    """Deformation index of the boundary problem: c1(nu_X) + 1 - genus."""
    g = mesh.genus()
    c1 = chern_number(mesh, nu_bundle)
    return IndexData(genus=g, c1=c1, index=c1 + 1 - g)
