"""Differential geometry of parametrized submanifold patches.

A patch is a chart from a parameter box in R^p (p = 2 or 3) into R^7,
with derivatives either supplied analytically or obtained by central
finite differences.  On top of the chart we build adapted orthonormal
frames, the second fundamental form A(s)(u) = -grad^T_u s, mean and
principal curvatures, and the 0-order curvature operators acting on the
normal bundle:

    calR s  = pi_nu sum_i R(e_i, s) e_i      (partial Ricci)
    calA    = A^t A                          (symmetric, PSD)
    calRnu  = calR - calA

together with a spectral positivity check of calRnu, which decides
rigidity of the patch under normal deformations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import DIM, standard_phi

__all__ = [
    "RankDeficient",
    "ImmersedPatch",
    "AdaptedFrame",
    "adapted_frame",
    "adapted_frames",
    "SecondFundamental",
    "second_fundamental",
    "CurvatureOperators",
    "simons_operators",
    "rigidity_check",
    "constant_curvature_tensor",
    "flat_plane_patch",
    "sphere_patch",
    "ellipsoid_patch",
    "torus_patch",
    "patch_from_json",
]


class RankDeficient(ValueError):
    """Chart derivative drops rank at a sampled parameter point."""


class ImmersedPatch:
    """A parametrized submanifold chart into flat R^7 (or the 7-torus).

    Parameters
    ----------
    chart : callable
        Map from a parameter point (length p) to a 7-vector.
    dim : int
        Parameter dimension p, 2 or 3.
    jacobian, hessian : callable, optional
        Analytic first and second derivatives; when missing they are
        replaced by central finite differences of step ``fd_step``.
    structure : G2Structure, optional
        Ambient structure; defaults to the flat standard one.
    fd_step : float, optional
        Finite-difference step; default ``eps**(1/3)`` scaled by the
        patch diameter proxy ``scale``.
    """

    def __init__(self, chart, dim, jacobian=None, hessian=None, structure=None,
                 fd_step=None, scale=1.0):
        if dim not in (2, 3):
            raise ValueError("parameter dimension must be 2 or 3")
        self.chart = chart
        self.dim = dim
        self._jacobian = jacobian
        self._hessian = hessian
        self.structure = structure if structure is not None else standard_phi()
        self.fd_step = float(fd_step) if fd_step else (np.finfo(float).eps ** (1 / 3)) * scale

    def point(self, u):
        return np.asarray(self.chart(np.asarray(u, dtype=float)), dtype=float)

    def jacobian(self, u):
        """d(chart) as a (7, p) matrix."""
        u = np.asarray(u, dtype=float)
        if self._jacobian is not None:
            return np.asarray(self._jacobian(u), dtype=float)
        h = self.fd_step
        cols = []
        for a in range(self.dim):
            du = np.zeros(self.dim)
            du[a] = h
            cols.append((self.point(u + du) - self.point(u - du)) / (2 * h))
        return np.array(cols).T

    def hessian(self, u):
        """Second chart derivatives as a (7, p, p) array."""
        u = np.asarray(u, dtype=float)
        if self._hessian is not None:
            return np.asarray(self._hessian(u), dtype=float)
        # central differences of the jacobian keep O(h^2) accuracy
        h = self.fd_step
        out = np.empty((DIM, self.dim, self.dim))
        for a in range(self.dim):
            du = np.zeros(self.dim)
            du[a] = h
            dj = (self.jacobian(u + du) - self.jacobian(u - du)) / (2 * h)
            out[:, :, a] = dj
        return 0.5 * (out + out.transpose(0, 2, 1))


@dataclass(frozen=True)
class AdaptedFrame:
    """Orthonormal tangent and normal frames at one parameter point."""

    tangent: np.ndarray   # (p, 7)
    normal: np.ndarray    # (7 - p, 7)
    coords: np.ndarray    # (p, p); tangent[i] = jacobian @ coords[i]

    def all_vectors(self):
        return np.vstack([self.tangent, self.normal])


def adapted_frame(patch, u, rank_tol=1e-10, assoc_tol=1e-8):
    """Gram-Schmidt tangent frame plus an orthonormal normal completion.

    For 3-dimensional patches whose tangent plane is closed under the
    cross product, the third tangent vector is replaced by e1 x e2 so the
    frame calibrates the plane positively.
    """
    J = patch.jacobian(u)
    sv = np.linalg.svd(J, compute_uv=False)
    if sv[-1] < rank_tol * max(1.0, sv[0]):
        raise RankDeficient(f"chart rank drops at {u} (singular values {sv})")
    tangent = []
    coords = []
    for a in range(patch.dim):
        v = J[:, a].copy()
        c = np.zeros(patch.dim)
        c[a] = 1.0
        for t, tc in zip(tangent, coords):
            proj = v @ t
            v -= proj * t
            c -= proj * tc
        n = np.linalg.norm(v)
        tangent.append(v / n)
        coords.append(c / n)
    tangent = np.array(tangent)
    coords = np.array(coords)
    if patch.dim == 3:
        c12 = patch.structure.cross(tangent[0], tangent[1])
        in_span = np.linalg.norm(c12 - tangent.T @ (tangent @ c12))
        if in_span < assoc_tol:
            # orientation repair: e3 = e1 x e2 exactly in span
            tangent[2] = c12
            coords[2] = np.linalg.lstsq(J, c12, rcond=None)[0]
    _, _, vt = np.linalg.svd(tangent)
    normal = vt[patch.dim:]
    return AdaptedFrame(tangent=tangent, normal=normal, coords=coords)


def adapted_frames(patch, params, **kw):
    """Frames over an iterable of parameter points."""
    return [adapted_frame(patch, u, **kw) for u in params]


@dataclass(frozen=True)
class SecondFundamental:
    """A(eta_k) as symmetric p x p matrices in the adapted frame."""

    A: np.ndarray          # (q, p, p)
    frame: AdaptedFrame

    def along(self, normal_vector):
        """Shape operator A(eta) for an arbitrary normal vector eta."""
        weights = self.frame.normal @ np.asarray(normal_vector, dtype=float)
        return np.einsum("k,kij->ij", weights, self.A)

    def mean_curvature(self, normal_vector):
        """(1/p) trace of the shape operator along the given normal."""
        m = self.along(normal_vector)
        return float(np.trace(m)) / m.shape[0]

    def principal_curvatures(self, normal_vector):
        return np.linalg.eigvalsh(self.along(normal_vector))


def second_fundamental(patch, u, frame=None):
    """Second fundamental form from the chart Hessian.

    With E_i = J c_i the adapted tangent frame, the normal part of the
    ambient derivative of E_j along E_i is the chart Hessian contracted
    with the frame coordinates, so

        A(eta)(E_i, E_j) = <eta, hess(c_i, c_j)>,

    symmetric by construction.
    """
    if frame is None:
        frame = adapted_frame(patch, u)
    hess = patch.hessian(u)
    hc = np.einsum("xab,ia,jb->xij", hess, frame.coords, frame.coords)
    A = np.einsum("kx,xij->kij", frame.normal, hc)
    return SecondFundamental(A=A, frame=frame)


@dataclass(frozen=True)
class CurvatureOperators:
    """Simons' 0-order operators in the normal frame."""

    A: np.ndarray        # second fundamental form, (q, p, p)
    calA: np.ndarray     # (q, q), symmetric PSD
    calR: np.ndarray     # (q, q), symmetric
    calRnu: np.ndarray   # calR - calA
    frame: AdaptedFrame


def constant_curvature_tensor(kappa):
    """R(u, v) w = kappa (<v, w> u - <u, w> v)."""
    def R(u, v, w):
        u, v, w = (np.asarray(x, dtype=float) for x in (u, v, w))
        return kappa * ((v @ w) * u - (u @ w) * v)
    return R


def simons_operators(patch, u, curvature=None, frame=None):
    """Assemble calR, calA and calR - calA at a parameter point.

    ``curvature`` is an ambient evaluator ``R(u, v, w)``; None means flat
    ambient, for which calR = 0 and calRnu = -calA <= 0.
    """
    if frame is None:
        frame = adapted_frame(patch, u)
    sff = second_fundamental(patch, u, frame)
    q = frame.normal.shape[0]
    calA = np.einsum("kij,lij->kl", sff.A, sff.A)
    calR = np.zeros((q, q))
    if curvature is not None:
        for l in range(q):
            acc = np.zeros(DIM)
            for e in frame.tangent:
                acc = acc + curvature(e, frame.normal[l], e)
            calR[:, l] = frame.normal @ acc
        calR = 0.5 * (calR + calR.T)
    return CurvatureOperators(A=sff.A, calA=calA, calR=calR, calRnu=calR - calA, frame=frame)


def rigidity_check(operators, tol=1e-10):
    """Spectral verdict for a field of calRnu operators over a patch.

    Returns ``(verdict, margin)`` where margin is the minimum eigenvalue
    over the sampled grid; 'positive' when the minimum exceeds ``tol``,
    'nonpositive' when no eigenvalue exceeds ``tol``, and 'indefinite'
    otherwise.
    """
    mins, maxs = [], []
    for op in operators:
        m = op.calRnu if isinstance(op, CurvatureOperators) else np.asarray(op)
        w = np.linalg.eigvalsh(0.5 * (m + m.T))
        mins.append(w[0])
        maxs.append(w[-1])
    lo, hi = float(min(mins)), float(max(maxs))
    if lo > tol:
        verdict = "positive"
    elif hi <= tol:
        verdict = "nonpositive"
    else:
        verdict = "indefinite"
    return verdict, lo


# ---------------------------------------------------------------------------
# Chart factories


def flat_plane_patch(axes=(0, 1, 2), offset=None, structure=None):
    """Linear chart spanning the given coordinate axes."""
    axes = tuple(axes)
    base = np.zeros(DIM) if offset is None else np.asarray(offset, dtype=float)

    def chart(u):
        x = base.copy()
        for a, ua in zip(axes, u):
            x[a] += ua
        return x

    def jac(u):
        J = np.zeros((DIM, len(axes)))
        for i, a in enumerate(axes):
            J[a, i] = 1.0
        return J

    def hess(u):
        return np.zeros((DIM, len(axes), len(axes)))

    return ImmersedPatch(chart, len(axes), jacobian=jac, hessian=hess, structure=structure)


def sphere_patch(radius, center=None, axes=(0, 1, 2), structure=None):
    """Sphere of given radius inside the 3-space of ``axes``, chart
    (u1, u2) -> radius (cos u1 cos u2, cos u1 sin u2, sin u1)."""
    c = np.zeros(DIM) if center is None else np.asarray(center, dtype=float)
    a0, a1, a2 = axes
    r = float(radius)

    def chart(u):
        x = c.copy()
        x[a0] += r * np.cos(u[0]) * np.cos(u[1])
        x[a1] += r * np.cos(u[0]) * np.sin(u[1])
        x[a2] += r * np.sin(u[0])
        return x

    def jac(u):
        J = np.zeros((DIM, 2))
        J[a0] = [-r * np.sin(u[0]) * np.cos(u[1]), -r * np.cos(u[0]) * np.sin(u[1])]
        J[a1] = [-r * np.sin(u[0]) * np.sin(u[1]), r * np.cos(u[0]) * np.cos(u[1])]
        J[a2] = [r * np.cos(u[0]), 0.0]
        return J

    def hess(u):
        H = np.zeros((DIM, 2, 2))
        cu, su = np.cos(u[0]), np.sin(u[0])
        cv, sv = np.cos(u[1]), np.sin(u[1])
        H[a0] = r * np.array([[-cu * cv, su * sv], [su * sv, -cu * cv]])
        H[a1] = r * np.array([[-cu * sv, -su * cv], [-su * cv, -cu * sv]])
        H[a2] = r * np.array([[-su, 0.0], [0.0, 0.0]])
        return H

    return ImmersedPatch(chart, 2, jacobian=jac, hessian=hess, structure=structure, scale=r)


def ellipsoid_patch(a, b, c, axes=(0, 1, 2), structure=None):
    """Ellipsoid x^2/a^2 + y^2/b^2 + z^2/c^2 = 1 in the 3-space of ``axes``."""
    a0, a1, a2 = axes
    rads = (float(a), float(b), float(c))

    def chart(u):
        x = np.zeros(DIM)
        x[a0] = rads[0] * np.cos(u[0]) * np.cos(u[1])
        x[a1] = rads[1] * np.cos(u[0]) * np.sin(u[1])
        x[a2] = rads[2] * np.sin(u[0])
        return x

    return ImmersedPatch(chart, 2, structure=structure, scale=max(rads))


def torus_patch(R, r, axes=(0, 1, 2), structure=None):
    """Donut of radii (R, r) in the 3-space of ``axes``."""
    a0, a1, a2 = axes

    def chart(u):
        x = np.zeros(DIM)
        w = R + r * np.cos(u[1])
        x[a0] = w * np.cos(u[0])
        x[a1] = w * np.sin(u[0])
        x[a2] = r * np.sin(u[1])
        return x

    return ImmersedPatch(chart, 2, structure=structure, scale=R + r)


def ellipsoid_principal_curvatures(a, b, c, point3):
    """Closed-form principal curvatures of an ellipsoid at a surface point,
    signed for the inward normal (positive on convex bodies)."""
    a2, b2, c2 = a * a, b * b, c * c
    x, y, z = point3
    grad = np.array([2 * x / a2, 2 * y / b2, 2 * z / c2])
    hess = np.diag([2 / a2, 2 / b2, 2 / c2])
    gn = np.linalg.norm(grad)
    n_out = grad / gn
    # Weingarten map of the inward normal: dn_in = -(I - nn^T) H / |grad|
    P = np.eye(3) - np.outer(n_out, n_out)
    W = P @ hess @ P / gn
    w = np.linalg.eigvalsh(W)
    return np.sort(w[np.argsort(np.abs(w))[1:]])  # drop the zero normal mode


def patch_from_json(spec, structure=None):
    """Build a gallery patch from ``{"type": ..., "params": {...}}``."""
    kind = spec["type"]
    params = spec.get("params", {})
    if kind == "flat-plane":
        return flat_plane_patch(axes=tuple(params.get("axes", (0, 1, 2))),
                                offset=params.get("offset"), structure=structure)
    if kind == "sphere":
        return sphere_patch(params["radius"], center=params.get("center"),
                            axes=tuple(params.get("axes", (0, 1, 2))), structure=structure)
    if kind == "ellipsoid":
        return ellipsoid_patch(params["a"], params["b"], params["c"],
                               axes=tuple(params.get("axes", (0, 1, 2))), structure=structure)
    if kind == "torus":
        return torus_patch(params["R"], params["r"],
                           axes=tuple(params.get("axes", (0, 1, 2))), structure=structure)
    raise KeyError(f"unknown patch type {kind!r}")
