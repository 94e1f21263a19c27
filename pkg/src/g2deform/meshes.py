"""Triangulated boundary surfaces embedded in flat R^7.

A surface mesh carries, per vertex, the inward unit normal n of the
boundary inside the 3-dimensional body it bounds, an orthonormal tangent
frame (v, w = n x v) of the surface, and the constant rank-4 normal space
of the body inside R^7.  The cross product requires the body's 3-space to
be closed under it, which holds for the two gallery 3-spaces
span(e1, e2, e3) and span(e2, e4, e6).

Normal-field derivatives are supplied analytically for the gallery
surfaces (sphere, ellipsoid, implicit genus-2 body, flat torus) and can
otherwise be estimated per vertex by a least-squares fit over the 1-ring.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import DIM, standard_phi

__all__ = [
    "SurfaceMesh",
    "icosphere_mesh",
    "ellipsoid_mesh",
    "flat_torus_mesh",
    "genus2_mesh",
    "load_off",
    "load_obj",
]


def _pad7(points3, axes=(0, 1, 2)):
    out = np.zeros((len(points3), DIM))
    for i, a in enumerate(axes):
        out[:, a] = np.asarray(points3)[:, i]
    return out


@dataclass
class SurfaceMesh:
    """Closed oriented triangulated surface with adapted frames."""

    vertices: np.ndarray          # (V, 7)
    faces: np.ndarray             # (F, 3) int
    normals: np.ndarray           # (V, 7) inward unit normal within the body
    normal_space: np.ndarray      # (4, 7) orthonormal basis of the body's normal bundle
    dn_matrices: np.ndarray | None = None   # (V, 7, 7) analytic normal derivatives
    structure: object = None
    frames_v: np.ndarray = field(init=False)
    frames_w: np.ndarray = field(init=False)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        self.faces = np.asarray(self.faces, dtype=int)
        self.normals = np.asarray(self.normals, dtype=float)
        self.normal_space = np.asarray(self.normal_space, dtype=float)
        if self.structure is None:
            self.structure = standard_phi()
        self._build_frames()

    def _build_frames(self):
        st = self.structure
        V = len(self.vertices)
        v = np.zeros((V, DIM))
        w = np.zeros((V, DIM))
        seeds = np.eye(DIM)
        ring = self.vertex_rings()
        for i in range(V):
            n = self.normals[i]
            cand = None
            if ring[i]:
                j = ring[i][0]
                cand = self.vertices[j] - self.vertices[i]
                cand = cand - (cand @ n) * n
            if cand is None or np.linalg.norm(cand) < 1e-9:
                for s in seeds:
                    cand = s - (s @ n) * n
                    cand -= self.normal_space.T @ (self.normal_space @ cand)
                    if np.linalg.norm(cand) > 0.3:
                        break
            v[i] = cand / np.linalg.norm(cand)
            w[i] = st.cross(n, v[i])
        self.frames_v = v
        self.frames_w = w

    # -- combinatorics -------------------------------------------------
    def edges(self):
        e = set()
        for a, b, c in self.faces:
            e.add((min(a, b), max(a, b)))
            e.add((min(b, c), max(b, c)))
            e.add((min(c, a), max(c, a)))
        return sorted(e)

    def vertex_rings(self):
        if not hasattr(self, "_rings"):
            rings = [[] for _ in range(len(self.vertices))]
            for a, b in self.edges():
                rings[a].append(b)
                rings[b].append(a)
            self._rings = [sorted(r) for r in rings]
        return self._rings

    def euler_characteristic(self):
        return len(self.vertices) - len(self.edges()) + len(self.faces)

    def genus(self):
        chi = self.euler_characteristic()
        if (2 - chi) % 2:
            raise ValueError(f"odd Euler characteristic {chi}; surface not closed?")
        return (2 - chi) // 2

    # -- normal derivatives and curvature -------------------------------
    def dn(self, i):
        """7x7 derivative of the inward normal field at vertex i."""
        if self.dn_matrices is not None:
            return self.dn_matrices[i]
        if not hasattr(self, "_dn_cache"):
            self._dn_cache = self._estimate_dn()
        return self._dn_cache[i]

    def _estimate_dn(self):
        rings = self.vertex_rings()
        out = np.zeros((len(self.vertices), DIM, DIM))
        for i, ring in enumerate(rings):
            if len(ring) < 2:
                continue
            dx = self.vertices[ring] - self.vertices[i]
            dnv = self.normals[ring] - self.normals[i]
            t = np.stack([dx @ self.frames_v[i], dx @ self.frames_w[i]], axis=1)
            sol, *_ = np.linalg.lstsq(t, dnv, rcond=None)
            out[i] = np.outer(sol[0], self.frames_v[i]) + np.outer(sol[1], self.frames_w[i])
        return out

    def mean_curvature(self, i):
        """H with trace taken against the outward direction, positive on
        convex bodies: H = -(1/2) tr_{T boundary} dn."""
        d = self.dn(i)
        return -0.5 * (self.frames_v[i] @ d @ self.frames_v[i]
                       + self.frames_w[i] @ d @ self.frames_w[i])

    def shape_operator(self, i):
        d = self.dn(i)
        fv, fw = self.frames_v[i], self.frames_w[i]
        return -np.array([[fv @ d @ fv, fv @ d @ fw],
                          [fw @ d @ fv, fw @ d @ fw]])

    def principal_curvatures(self, i):
        s = self.shape_operator(i)
        return np.linalg.eigvalsh(0.5 * (s + s.T))

    def face_orientation_signs(self):
        """+1 where the stored circuit of a face agrees with the (v, w)
        orientation of the surface, -1 otherwise."""
        a, b, c = (self.faces[:, j] for j in range(3))
        e1 = self.vertices[b] - self.vertices[a]
        e2 = self.vertices[c] - self.vertices[a]
        p = np.einsum("ix,ix->i", e1, self.frames_v[a])
        q = np.einsum("ix,ix->i", e1, self.frames_w[a])
        r = np.einsum("ix,ix->i", e2, self.frames_v[a])
        s = np.einsum("ix,ix->i", e2, self.frames_w[a])
        return np.sign(p * s - q * r)


# ---------------------------------------------------------------------------
# Builders


_ICO_T = (1 + 5 ** 0.5) / 2
_ICO_VERTS = [(-1, _ICO_T, 0), (1, _ICO_T, 0), (-1, -_ICO_T, 0), (1, -_ICO_T, 0),
              (0, -1, _ICO_T), (0, 1, _ICO_T), (0, -1, -_ICO_T), (0, 1, -_ICO_T),
              (_ICO_T, 0, -1), (_ICO_T, 0, 1), (-_ICO_T, 0, -1), (-_ICO_T, 0, 1)]
_ICO_FACES = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
              (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
              (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
              (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]


def _unit_icosphere(level):
    verts = [np.array(p, dtype=float) / np.linalg.norm(p) for p in _ICO_VERTS]
    faces = list(_ICO_FACES)
    for _ in range(level):
        cache = {}

        def midpoint(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    return np.array(verts), np.array(faces, dtype=int)


def _complement_basis(axes):
    comp = [i for i in range(DIM) if i not in axes]
    return np.eye(DIM)[comp]


def icosphere_mesh(level=3, radius=1.0, center=None, axes=(0, 1, 2)):
    """Sphere boundary of a round ball, inward normals, analytic dn."""
    pts, faces = _unit_icosphere(level)
    verts3 = pts * radius
    if center is not None:
        verts3 = verts3 + np.asarray(center, float)[None, :]
    verts = _pad7(verts3, axes)
    normals = -_pad7(pts, axes)
    P = _pad7(np.eye(3), axes)   # rows span the 3-space
    tang_proj = P.T @ P
    dn = np.repeat(((-1.0 / radius) * tang_proj)[None], len(verts), axis=0)
    # remove the radial column so dn acts as the tangential derivative
    for i in range(len(verts)):
        nh = -normals[i]
        dn[i] = dn[i] @ (np.eye(DIM) - np.outer(nh, nh))
    return SurfaceMesh(verts, faces, normals, _complement_basis(axes), dn_matrices=dn)


def _implicit_mesh_data(verts3, grad_fn, hess_fn, axes):
    normals3 = []
    dns = []
    P = _pad7(np.eye(3), axes)
    for p in verts3:
        g = grad_fn(p)
        H = hess_fn(p)
        gn = np.linalg.norm(g)
        ghat = g / gn
        n3 = -ghat
        dn3 = -(np.eye(3) - np.outer(ghat, ghat)) @ H / gn
        normals3.append(n3)
        dns.append(P.T @ dn3 @ P)
    return _pad7(normals3, axes), np.array(dns)


def ellipsoid_mesh(a, b, c, level=3, axes=(0, 1, 2)):
    """Boundary of the solid x^2/a^2 + y^2/b^2 + z^2/c^2 <= 1."""
    pts, faces = _unit_icosphere(level)
    verts3 = pts * np.array([a, b, c])[None, :]
    diag = np.diag([2.0 / a ** 2, 2.0 / b ** 2, 2.0 / c ** 2])
    normals, dns = _implicit_mesh_data(
        verts3, lambda p: diag @ p, lambda p: diag, axes)
    return SurfaceMesh(_pad7(verts3, axes), faces, normals,
                       _complement_basis(axes), dn_matrices=dns)


def flat_torus_mesh(n=16, x1=0.0, inward_sign=1.0, axes=(0, 1, 2)):
    """One flat boundary torus {x1} x T^2 of the strip, inward normal
    along +/- e1; all bundle data is constant so dn vanishes."""
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    verts = np.zeros((n * n, DIM))
    verts[:, axes[0]] = x1
    verts[:, axes[1]] = (ii.ravel()) / n
    verts[:, axes[2]] = (jj.ravel()) / n
    faces = []
    for i in range(n):
        for j in range(n):
            v00 = i * n + j
            v10 = ((i + 1) % n) * n + j
            v01 = i * n + (j + 1) % n
            v11 = ((i + 1) % n) * n + (j + 1) % n
            faces.append((v00, v10, v11))
            faces.append((v00, v11, v01))
    normals = np.zeros((n * n, DIM))
    normals[:, axes[0]] = inward_sign
    dn = np.zeros((n * n, DIM, DIM))
    return SurfaceMesh(verts, np.array(faces, int), normals,
                       _complement_basis(axes), dn_matrices=dn)


def genus2_mesh(resolution=72, tube=0.18, axes=(0, 1, 2)):
    """Genus-2 surface: boundary of a tube around a figure-eight curve,
    the zero set of f = (x^2 (1 - x^2) - y^2)^2 + z^2 - tube^2."""
    from skimage.measure import marching_cubes

    t2 = tube * tube
    nx, ny, nz = resolution, resolution // 2, resolution // 3
    xs = np.linspace(-1.35, 1.35, nx)
    ys = np.linspace(-0.75, 0.75, ny)
    zs = np.linspace(-0.45, 0.45, nz)
    X, Y, Z = np.meshgrid(xs, ys, zs, indexing="ij")
    G = X * X * (1 - X * X) - Y * Y
    F = G * G + Z * Z - t2
    verts3, faces, _, _ = marching_cubes(
        F, level=0.0,
        spacing=(xs[1] - xs[0], ys[1] - ys[0], zs[1] - zs[0]))
    verts3 = verts3 + np.array([xs[0], ys[0], zs[0]])

    def grad(p):
        x, y, z = p
        g = x * x * (1 - x * x) - y * y
        dgdx = 2 * x - 4 * x ** 3
        return np.array([2 * g * dgdx, -4 * g * y, 2 * z])

    def hess(p):
        x, y, z = p
        g = x * x * (1 - x * x) - y * y
        dgdx = 2 * x - 4 * x ** 3
        H = np.zeros((3, 3))
        H[0, 0] = 2 * dgdx * dgdx + 2 * g * (2 - 12 * x * x)
        H[0, 1] = H[1, 0] = -4 * y * dgdx
        H[1, 1] = -4 * g + 8 * y * y
        H[2, 2] = 2.0
        return H

    normals, dns = _implicit_mesh_data(verts3, grad, hess, axes)
    return SurfaceMesh(_pad7(verts3, axes), np.asarray(faces, int), normals,
                       _complement_basis(axes), dn_matrices=dns)


# ---------------------------------------------------------------------------
# Ingestion (positions zero-padded into the 3-space of the first axes)


def _mesh_from_loaded(verts3, faces, axes):
    verts3 = np.asarray(verts3, dtype=float)
    faces = np.asarray(faces, dtype=int)
    # orientation normal of the stored faces, area-weighted per vertex
    acc = np.zeros((len(verts3), 3))
    for a, b, c in faces:
        fn = np.cross(verts3[b] - verts3[a], verts3[c] - verts3[a])
        acc[a] += fn
        acc[b] += fn
        acc[c] += fn
    acc /= np.linalg.norm(acc, axis=1, keepdims=True)
    normals = _pad7(-acc, axes)   # files store outward circuits; n points inward
    return SurfaceMesh(_pad7(verts3, axes), faces, normals, _complement_basis(axes))


def load_off(path, axes=(0, 1, 2)):
    with open(path) as fh:
        tokens = []
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if tokens[0] != "OFF":
        raise ValueError("not an OFF file")
    nv, nf = int(tokens[1]), int(tokens[2])
    pos = 4
    verts = []
    for _ in range(nv):
        verts.append([float(t) for t in tokens[pos:pos + 3]])
        pos += 3
    faces = []
    for _ in range(nf):
        cnt = int(tokens[pos])
        if cnt != 3:
            raise ValueError("only triangle faces are supported")
        faces.append([int(t) for t in tokens[pos + 1:pos + 4]])
        pos += 1 + cnt
    return _mesh_from_loaded(verts, faces, axes)


def load_obj(path, axes=(0, 1, 2)):
    verts, faces = [], []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                idx = [int(p.split("/")[0]) - 1 for p in parts[1:]]
                if len(idx) != 3:
                    raise ValueError("only triangle faces are supported")
                faces.append(idx)
    return _mesh_from_loaded(verts, faces, axes)
