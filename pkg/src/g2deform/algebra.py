"""Pointwise multilinear algebra of G2-structures on a 7-dimensional space.

Differential forms are stored as dense, fully antisymmetric coefficient
arrays over the standard basis e1..e7, either in float64 or in exact
rational arithmetic (``fractions.Fraction`` entries).  The flat reference
structure is generated by the seven-term 3-form

    phi0 = dx123 + dx145 + dx167 + dx246 - dx257 - dx347 - dx356

whose associated metric is the identity.  From a nondegenerate 3-form we
derive the metric, the cross product ``<u x v, w> = phi(u, v, w)``, the
Hodge star, the vector-valued 3-form ``chi`` with
``<chi(u, v, w), h> = (*phi)(u, v, w, h)``, and the decomposition of
3-forms into the irreducible pieces of dimensions 1, 7 and 27.

Everything here is a pure function of its arguments; structures cache
derived tensors but are immutable after construction.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "DegenerateForm",
    "NotAssociative",
    "Form",
    "wedge",
    "interior",
    "G2Structure",
    "standard_phi",
    "metric_from_3form",
    "hodge_star",
    "cross",
    "chi",
    "Plane",
    "assoc_residual",
    "coassoc_residual",
    "free_margin",
    "Decomposition3",
    "decompose3",
    "p_operator",
    "theta_derivative",
    "reconstruct_section",
    "AffineMap",
    "pullback",
    "joyce_involutions",
    "PHI0_TERMS",
]

DIM = 7

#: Nonzero coefficients of phi0 on sorted index triples (0-based).
PHI0_TERMS = {
    (0, 1, 2): 1,
    (0, 3, 4): 1,
    (0, 5, 6): 1,
    (1, 3, 5): 1,
    (1, 4, 6): -1,
    (2, 3, 6): -1,
    (2, 4, 5): -1,
}


class DegenerateForm(ValueError):
    """The bilinear form derived from a 3-form is not definite."""


class NotAssociative(ValueError):
    """A plane expected to be associative fails the chi test."""


def perm_parity(seq):
    """Sign of the permutation sorting ``seq`` (entries assumed distinct)."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def _zero(exact):
    return Fraction(0) if exact else 0.0


def _zeros(shape, exact):
    if exact:
        arr = np.empty(shape, dtype=object)
        arr.fill(Fraction(0))
        return arr
    return np.zeros(shape)


def _as_scalar(x, exact):
    return Fraction(x) if exact else float(x)


def _max_abs(arr):
    """max |entry|, dtype-agnostic (works for Fraction object arrays)."""
    flat = np.asarray(arr).ravel()
    if flat.dtype == object:
        return max((abs(x) for x in flat), default=0)
    if flat.size == 0:
        return 0.0
    return float(np.max(np.abs(flat)))


class Form:
    """A fully antisymmetric covariant k-tensor on R^7.

    Parameters
    ----------
    degree : int
        Form degree, 0 <= degree <= 7.
    coeffs : ndarray
        Dense coefficient array of shape ``(7,) * degree``.  Must already
        be antisymmetric; use :meth:`from_terms` to build one safely.
    exact : bool
        True when coefficients are ``Fraction`` objects.

    The coefficient on an arbitrary index tuple equals the signed
    coefficient on the sorted tuple, and evaluation on basis vectors
    returns exactly the stored coefficient.
    """

    __slots__ = ("degree", "coeffs", "exact")

    def __init__(self, degree, coeffs, exact=False):
        coeffs = np.asarray(coeffs)
        if coeffs.shape != (DIM,) * degree:
            raise ValueError(f"expected shape {(DIM,) * degree}, got {coeffs.shape}")
        self.degree = degree
        self.coeffs = coeffs
        self.exact = exact

    @classmethod
    def from_terms(cls, degree, terms, exact=False):
        """Build a form from ``{sorted 0-based index tuple: value}``."""
        arr = _zeros((DIM,) * degree, exact)
        for idx, val in terms.items():
            idx = tuple(idx)
            if len(set(idx)) != len(idx) or tuple(sorted(idx)) != idx:
                raise ValueError(f"indices must be sorted and distinct: {idx}")
            v = _as_scalar(val, exact)
            for p in itertools.permutations(range(degree)):
                arr[tuple(idx[q] for q in p)] = perm_parity(p) * v
        return cls(degree, arr, exact)

    @classmethod
    def zero(cls, degree, exact=False):
        return cls(degree, _zeros((DIM,) * degree, exact), exact)

    def coefficient(self, *indices):
        """Coefficient on a basis index tuple (0-based, any order)."""
        if len(set(indices)) != len(indices):
            return _zero(self.exact)
        return self.coeffs[tuple(indices)]

    def terms(self):
        """Nonzero coefficients keyed by sorted index tuple."""
        out = {}
        for idx in itertools.combinations(range(DIM), self.degree):
            v = self.coeffs[idx] if self.degree else self.coeffs[()]
            if v != 0:
                out[idx] = v
        return out

    def __call__(self, *vectors):
        if len(vectors) != self.degree:
            raise ValueError(f"need {self.degree} vectors")
        out = self.coeffs
        for v in vectors:
            out = np.einsum("i...,i->...", out, np.asarray(v))
        return out[()] if isinstance(out, np.ndarray) else out

    def __add__(self, other):
        self._check(other)
        return Form(self.degree, self.coeffs + other.coeffs, self.exact)

    def __sub__(self, other):
        self._check(other)
        return Form(self.degree, self.coeffs - other.coeffs, self.exact)

    def __mul__(self, scalar):
        return Form(self.degree, self.coeffs * _as_scalar(scalar, self.exact), self.exact)

    __rmul__ = __mul__

    def __neg__(self):
        return Form(self.degree, -self.coeffs, self.exact)

    def _check(self, other):
        if not isinstance(other, Form) or other.degree != self.degree:
            raise ValueError("degree mismatch")

    def as_float(self):
        if not self.exact:
            return self
        return Form(self.degree, self.coeffs.astype(float), exact=False)

    def to_json(self):
        """Serialize as a list of sorted nonzero coefficients (1-based)."""
        terms = []
        for idx, v in sorted(self.terms().items()):
            value = str(v) if self.exact else float(v)
            terms.append({"indices": [i + 1 for i in idx], "value": value})
        return {"degree": self.degree, "exact": self.exact, "terms": terms}

    @classmethod
    def from_json(cls, obj):
        exact = bool(obj.get("exact", False))
        terms = {}
        for t in obj["terms"]:
            idx = tuple(i - 1 for i in t["indices"])
            val = Fraction(t["value"]) if exact else float(t["value"])
            terms[idx] = val
        return cls.from_terms(obj["degree"], terms, exact)

    def __repr__(self):
        return f"Form(degree={self.degree}, terms={self.terms()!r})"


def wedge(a, b):
    """Exterior product, with (dx1 ^ dx2)(e1, e2) = 1 normalization."""
    k, l = a.degree, b.degree
    if k + l > DIM:
        raise ValueError("wedge degree exceeds the dimension")
    exact = a.exact and b.exact
    out = _zeros((DIM,) * (k + l), exact)
    for idx in itertools.combinations(range(DIM), k + l):
        tot = _zero(exact)
        for sel in itertools.combinations(range(k + l), k):
            rest = tuple(t for t in range(k + l) if t not in sel)
            sgn = perm_parity(sel + rest)
            tot = tot + sgn * a.coeffs[tuple(idx[s] for s in sel)] * b.coeffs[tuple(idx[t] for t in rest)]
        for p in itertools.permutations(range(k + l)):
            out[tuple(idx[q] for q in p)] = perm_parity(p) * tot
    return Form(k + l, out, exact)


def interior(u, a):
    """Interior product u . a, inserting u in the first slot."""
    if a.degree == 0:
        raise ValueError("cannot contract a 0-form")
    coeffs = np.einsum("i,i...->...", np.asarray(u), a.coeffs)
    return Form(a.degree - 1, coeffs, a.exact)


def _raise_indices(coeffs, degree, metric_inv):
    out = coeffs
    for slot in range(degree):
        out = np.moveaxis(np.einsum("ab,b...->a...", metric_inv, np.moveaxis(out, slot, 0)), 0, slot)
    return out


def form_inner(a, b, structure=None):
    """Inner product on k-forms; Gram matrix of the structure's metric."""
    if a.degree != b.degree:
        raise ValueError("degree mismatch")
    if a.degree == 0:
        return a.coeffs[()] * b.coeffs[()]
    if structure is None or structure.metric_is_identity:
        raised = b.coeffs
    else:
        raised = _raise_indices(b.coeffs, b.degree, structure.metric_inv)
    total = (a.coeffs * raised).sum()
    if a.exact and b.exact:
        return total / Fraction(math.factorial(a.degree))
    return total / math.factorial(a.degree)


# ---------------------------------------------------------------------------
# G2 structures


def _exact_root(value, n):
    """Exact n-th root of a Fraction, or None when irrational."""
    value = Fraction(value)
    if value <= 0:
        return None

    def iroot(m):
        if m == 0:
            return 0
        r = round(m ** (1.0 / n))
        for c in (r - 1, r, r + 1):
            if c >= 0 and c ** n == m:
                return c
        return None

    p, q = iroot(value.numerator), iroot(value.denominator)
    if p is None or q is None:
        return None
    return Fraction(p, q)


def _det(mat, exact):
    if not exact:
        return float(np.linalg.det(mat))
    m = [[Fraction(x) for x in row] for row in np.asarray(mat)]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] * inv
            if f:
                for c in range(col, n):
                    m[r][c] -= f * m[col][c]
    return det


def _inv(mat, exact):
    if not exact:
        return np.linalg.inv(mat)
    n = len(mat)
    m = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(np.asarray(mat))]
    for col in range(n):
        piv = next(r for r in range(col, n) if m[r][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col]:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        out[i, :] = m[i][n:]
    return out


class G2Structure:
    """A nondegenerate 3-form together with its derived metric data.

    Holds ``phi``, the metric, the Hodge dual ``star_phi`` (cached), and
    the raised tensors realizing the cross product and chi.  Instances are
    immutable; all caches are filled at construction.
    """

    def __init__(self, phi, metric, exact=False):
        self.phi = phi
        self.exact = exact
        self.metric = np.asarray(metric)
        self.metric_is_identity = _max_abs(self.metric - np.eye(DIM)) == 0 if exact \
            else bool(np.allclose(self.metric, np.eye(DIM), atol=1e-15))
        self.metric_inv = _inv(self.metric, exact)
        det = _det(self.metric, exact)
        if exact:
            root = _exact_root(det, 2)
            if root is None:
                raise ValueError("metric determinant has no rational square root; "
                                 "use a float structure instead")
            self.sqrt_det = root
        else:
            self.sqrt_det = float(np.sqrt(det))
        self.star_phi = self._star(phi)
        # <u x v, .> raised on the last slot, and likewise for chi.
        self._cross_tensor = _raise_last(phi.coeffs, self.metric_inv)
        self._chi_tensor = _raise_last(self.star_phi.coeffs, self.metric_inv)
        self._proj3 = None

    # -- Hodge star ---------------------------------------------------
    def _star(self, form):
        k = form.degree
        exact = form.exact and self.exact
        if self.metric_is_identity:
            raised = form.coeffs
        else:
            raised = _raise_indices(form.coeffs, k, self.metric_inv)
        out = _zeros((DIM,) * (DIM - k), exact)
        allidx = set(range(DIM))
        for I in itertools.combinations(range(DIM), k):
            J = tuple(sorted(allidx - set(I)))
            sgn = perm_parity(I + J)
            val = sgn * (raised[I] if k else raised[()]) * self.sqrt_det
            for p in itertools.permutations(range(DIM - k)):
                out[tuple(J[q] for q in p)] = perm_parity(p) * val
        return Form(DIM - k, out, exact)

    def hodge_star(self, form):
        """Metric Hodge dual; an involution on every degree in dimension 7."""
        return self._star(form)

    # -- cross product and chi ----------------------------------------
    def cross(self, u, v):
        """The vector with ``<u x v, w> = phi(u, v, w)`` for all w."""
        return np.einsum("ijk,i,j->k", self._cross_tensor, np.asarray(u), np.asarray(v))

    def chi(self, u, v, w):
        """The vector with ``<chi(u,v,w), h> = (*phi)(u, v, w, h)``."""
        return np.einsum("ijml,i,j,m->l", self._chi_tensor,
                         np.asarray(u), np.asarray(v), np.asarray(w))

    def vec_inner(self, u, v):
        return np.asarray(u) @ self.metric @ np.asarray(v)

    def vec_norm(self, u):
        val = self.vec_inner(u, u)
        return math.sqrt(float(val))

    # -- irreducible decomposition of 3-forms --------------------------
    def _projectors3(self):
        """35x35 orthogonal projectors onto the 1-, 7- and 27-pieces."""
        if self._proj3 is not None:
            return self._proj3
        combos = list(itertools.combinations(range(DIM), 3))
        phi = self.phi.as_float()
        gram = np.empty((35, 35))
        ginv = np.asarray(self.metric_inv, dtype=float)
        for a, I in enumerate(combos):
            for b, J in enumerate(combos):
                gram[a, b] = np.linalg.det(ginv[np.ix_(I, J)])
        phiv = _form_vec(phi)
        p1 = np.outer(phiv, gram @ phiv) / (phiv @ gram @ phiv)
        cols = []
        st = self if not self.exact else G2Structure(phi, self.metric.astype(float), exact=False)
        for l in range(DIM):
            al = np.zeros(DIM)
            al[l] = 1.0
            w = st.hodge_star(wedge(phi, Form(1, al)))
            cols.append(_form_vec(w))
        V = np.array(cols).T
        p7 = V @ np.linalg.solve(V.T @ gram @ V, V.T @ gram)
        p27 = np.eye(35) - p1 - p7
        self._proj3 = (p1, p7, p27, combos, gram)
        return self._proj3


def _raise_last(coeffs, metric_inv):
    return np.einsum("...l,lk->...k", coeffs, metric_inv)


def _form_vec(form):
    combos = list(itertools.combinations(range(DIM), form.degree))
    return np.array([float(form.coeffs[c]) for c in combos])


def _vec_form(vec, degree):
    combos = list(itertools.combinations(range(DIM), degree))
    arr = np.zeros((DIM,) * degree)
    for val, idx in zip(vec, combos):
        for p in itertools.permutations(range(degree)):
            arr[tuple(idx[q] for q in p)] = perm_parity(p) * val
    return Form(degree, arr, exact=False)


def standard_phi(exact=False):
    """The flat structure: phi0 with the identity metric."""
    phi = Form.from_terms(3, PHI0_TERMS, exact=exact)
    metric = np.eye(DIM) if not exact else _exact_eye()
    return G2Structure(phi, metric, exact=exact)


def _exact_eye():
    out = np.empty((DIM, DIM), dtype=object)
    for i in range(DIM):
        for j in range(DIM):
            out[i, j] = Fraction(int(i == j))
    return out


def metric_from_3form(phi, degenerate_tol=1e-10):
    """Recover the G2 structure whose 3-form is ``phi``.

    Uses the bilinear form ``B(u, v) vol = (1/6) (u . phi) ^ (v . phi) ^ phi``
    normalized by ``det(B)^(-1/9)``.  Raises :class:`DegenerateForm` when the
    normalized form is not definite (smallest eigenvalue below
    ``degenerate_tol``).  Falls back to float arithmetic when the exact 9th
    root does not exist.
    """
    exact = phi.exact
    B = _zeros((DIM, DIM), exact)
    basis = np.eye(DIM) if not exact else _exact_eye()
    six = Fraction(6) if exact else 6.0
    for i in range(DIM):
        ui = interior(basis[i], phi)
        for j in range(i, DIM):
            w = wedge(wedge(ui, interior(basis[j], phi)), phi)
            B[i, j] = B[j, i] = w.coeffs[tuple(range(DIM))] / six
    det = _det(B, exact)
    if det == 0:
        raise DegenerateForm("derived bilinear form is singular")
    if exact:
        root = _exact_root(abs(Fraction(det)), 9)
        if root is None:
            B = B.astype(float)
            det = float(det)
            exact = False
    if exact:
        scale = (1 if det > 0 else -1) / root
        metric = B * scale
        sylvester_ok = all(_det(metric[:k, :k], True) > 0 for k in range(1, DIM + 1))
        if not sylvester_ok:
            raise DegenerateForm("derived bilinear form is not definite")
    else:
        scale = math.copysign(abs(det) ** (-1.0 / 9.0), det)
        metric = np.asarray(B, dtype=float) * scale
        eigs = np.linalg.eigvalsh(metric)
        if eigs.min() <= degenerate_tol:
            raise DegenerateForm(f"smallest eigenvalue {eigs.min():.3e} not positive")
    return G2Structure(phi if exact == phi.exact else phi.as_float(), metric, exact=exact)


def hodge_star(form, structure):
    return structure.hodge_star(form)


def cross(u, v, structure):
    return structure.cross(u, v)


def chi(u, v, w, structure):
    return structure.chi(u, v, w)


# ---------------------------------------------------------------------------
# Planes and calibration residuals


@dataclass(frozen=True)
class Plane:
    """A k-plane (k = 3 or 4) given by an orthonormal basis and a sign."""

    basis: np.ndarray
    orientation: int = 1

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=float)
        object.__setattr__(self, "basis", basis)
        if basis.ndim != 2 or basis.shape[1] != DIM:
            raise ValueError("basis must be (k, 7)")
        gram = basis @ basis.T
        if not np.allclose(gram, np.eye(len(basis)), atol=1e-12):
            raise ValueError("basis is not orthonormal to 1e-12")

    @property
    def k(self):
        return self.basis.shape[0]

    def projector(self):
        return self.basis.T @ self.basis


def assoc_residual(plane, structure):
    """|chi(e1, e2, e3)|; zero exactly on associative 3-planes."""
    if plane.k != 3:
        raise ValueError("assoc_residual needs a 3-plane")
    b = plane.basis
    val = structure.chi(b[0], b[1], b[2])
    return structure.vec_norm(val)


def coassoc_residual(plane, structure):
    """Norm of phi restricted to a 4-plane; zero iff coassociative."""
    if plane.k != 4:
        raise ValueError("coassoc_residual needs a 4-plane")
    b = plane.basis
    total = 0.0
    for i, j, k in itertools.combinations(range(4), 3):
        total += float(structure.phi(b[i], b[j], b[k])) ** 2
    return math.sqrt(total)


def _residual_of_line(plane4, structure, n_coords):
    """assoc residual of the 3-plane orthogonal to a unit line in plane4."""
    # complete n to an orthonormal basis of the plane's coordinates
    n = n_coords / np.linalg.norm(n_coords)
    e = np.zeros(4)
    e[0] = 1.0
    u = n - e if n[0] < 0 else n + e
    H = np.eye(4) - 2.0 * np.outer(u, u) / (u @ u)  # Householder, H e1 = -/+ n
    coords = H[:, 1:]  # orthonormal complement of n in R^4
    triple = coords.T @ plane4.basis
    val = structure.chi(triple[0], triple[1], triple[2])
    return structure.vec_norm(val)


def _canonical_basis4(plane4):
    """Deterministic orthonormal basis of span(plane4), basis-independent."""
    proj = plane4.projector()
    w, vecs = np.linalg.eigh(proj)
    basis = vecs[:, -4:].T
    fixed = []
    for row in basis:
        j = int(np.argmax(np.abs(row)))
        fixed.append(row if row[j] > 0 else -row)
    return Plane(np.array(fixed))


def free_margin(plane4, structure, samples=2000, refine_steps=50, seed=7):
    """Approximate min of assoc_residual over all 3-planes inside a 4-plane.

    3-planes inside the 4-plane are parametrized by unit lines (a 3-plane is
    a line's orthocomplement).  The unit sphere of lines is swept with a
    quasi-random sample, then the best candidate is polished by projected
    gradient descent on the sphere.  A positive return value certifies
    phi-freedom at the sampling resolution.
    """
    from scipy.stats import qmc
    from scipy.special import ndtri

    plane = _canonical_basis4(plane4)
    m = max(1, int(samples))
    pow2 = 1 << (m - 1).bit_length()
    sob = qmc.Sobol(d=4, scramble=True, seed=seed)
    pts = np.clip(sob.random_base2(pow2.bit_length() - 1)[:m], 1e-12, 1 - 1e-12)
    dirs = ndtri(pts)
    norms = np.linalg.norm(dirs, axis=1)
    dirs[norms < 1e-9] = np.array([1.0, 0.3, -0.2, 0.5])
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)

    vals = np.array([_residual_of_line(plane, structure, d) for d in dirs])
    best = dirs[int(np.argmin(vals))]
    fbest = float(vals.min())

    step = 0.1
    h = 1e-6
    x = best
    for _ in range(int(refine_steps)):
        grad = np.zeros(4)
        for a in range(4):
            dx = np.zeros(4)
            dx[a] = h
            grad[a] = (_residual_of_line(plane, structure, x + dx)
                       - _residual_of_line(plane, structure, x - dx)) / (2 * h)
        grad -= (grad @ x) * x
        gn = np.linalg.norm(grad)
        if gn < 1e-14:
            break
        cand = x - step * grad / gn
        cand /= np.linalg.norm(cand)
        fcand = _residual_of_line(plane, structure, cand)
        if fcand < fbest:
            x, fbest = cand, fcand
            step *= 1.2
        else:
            step *= 0.5
    return fbest


# ---------------------------------------------------------------------------
# Irreducible decomposition and the derivative operator of the 4-form map


@dataclass(frozen=True)
class Decomposition3:
    """Orthogonal components of a 3-form: multiples of phi, the image of
    ``alpha -> *(phi ^ alpha)``, and the 27-dimensional remainder."""

    pi1: Form
    pi7: Form
    pi27: Form

    def total(self):
        return self.pi1 + self.pi7 + self.pi27


def decompose3(psi, structure):
    p1, p7, p27, _, _ = structure._projectors3()
    v = _form_vec(psi.as_float())
    return Decomposition3(_vec_form(p1 @ v, 3), _vec_form(p7 @ v, 3), _vec_form(p27 @ v, 3))


def p_operator(psi, structure):
    """(4/3) pi1 + pi7 - pi27 applied to a 3-form (float arithmetic)."""
    d = decompose3(psi, structure)
    return (4.0 / 3.0) * d.pi1 + d.pi7 - d.pi27


def theta_derivative(psi, structure):
    """Derivative of the nonlinear 4-form map at the structure: *(P(psi))."""
    return structure.hodge_star(p_operator(psi, structure))


def reconstruct_section(s, plane, structure, tol=1e-10):
    """Round-trip a normal vector of an associative plane through the
    1-form/3-form correspondence.

    Given an associative 3-plane with oriented frame (e1, e2, e3 = e1 x e2)
    and a vector s orthogonal to it, evaluates

        sum_l  [* P(*(phi ^ alpha))](e1, e2, e3, eta_l) eta_l

    with alpha the metric dual of s and eta a normal frame, which must
    return s.  Raises :class:`NotAssociative` when the plane fails the chi
    test at tolerance ``tol``.
    """
    if plane.k != 3:
        raise ValueError("need a 3-plane")
    if assoc_residual(plane, structure) > tol:
        raise NotAssociative("plane fails the associativity test")
    b = np.array(plane.basis, dtype=float)
    c = structure.cross(b[0], b[1])
    if float(c @ b[2]) < 0:  # enforce phi(e1,e2,e3) = +1
        b[2] = -b[2]
    s = np.asarray(s, dtype=float)
    if np.linalg.norm(b @ s) > 1e-8 * max(1.0, np.linalg.norm(s)):
        raise ValueError("section must be orthogonal to the plane")
    _, _, vt = np.linalg.svd(b)
    etas = vt[3:]
    alpha = Form(1, np.asarray(structure.metric, dtype=float) @ s)
    theta = theta_derivative(structure.hodge_star(wedge(structure.phi.as_float(), alpha)),
                             structure)
    out = np.zeros(DIM)
    for eta in etas:
        coeff = theta(b[0], b[1], b[2], eta)
        out += float(coeff) * eta
    return out


# ---------------------------------------------------------------------------
# Affine maps and pullbacks


@dataclass(frozen=True)
class AffineMap:
    """x -> A x + t on R^7 or the unit 7-torus; A orthogonal for pullbacks."""

    matrix: np.ndarray
    translation: np.ndarray
    exact: bool = False

    @classmethod
    def from_diag_shift(cls, signs, shifts, exact=True):
        n = len(signs)
        if exact:
            mat = np.empty((n, n), dtype=object)
            for i in range(n):
                for j in range(n):
                    mat[i, j] = Fraction(signs[i]) if i == j else Fraction(0)
            tr = np.array([Fraction(s) for s in shifts], dtype=object)
        else:
            mat = np.diag(np.asarray(signs, dtype=float))
            tr = np.asarray(shifts, dtype=float)
        return cls(mat, tr, exact)

    def __call__(self, x):
        return self.matrix @ np.asarray(x) + self.translation

    def compose(self, other):
        """self after other."""
        return AffineMap(self.matrix @ other.matrix,
                         self.matrix @ other.translation + self.translation,
                         self.exact and other.exact)

    def is_orthogonal(self, tol=1e-12):
        g = self.matrix.T @ self.matrix
        if self.exact:
            return _max_abs(g - _exact_eye()) == 0
        return bool(np.allclose(np.asarray(g, dtype=float), np.eye(DIM), atol=tol))

    def is_torus_involution(self):
        """True when the map squares to the identity on the unit torus."""
        sq = self.compose(self)
        if _max_abs(np.asarray(sq.matrix) - (np.eye(DIM) if not self.exact else _exact_eye())) != 0:
            return False
        return all(Fraction(t) == int(Fraction(t)) for t in sq.translation) if self.exact \
            else bool(np.allclose(np.mod(np.asarray(sq.translation, float) + 0.5, 1.0), 0.5))

    def to_json(self):
        conv = (lambda x: str(x)) if self.exact else float
        return {"matrix": [[conv(v) for v in row] for row in np.asarray(self.matrix)],
                "translation": [conv(v) for v in np.asarray(self.translation)],
                "exact": self.exact}

    @classmethod
    def from_json(cls, obj):
        exact = bool(obj.get("exact", False))
        conv = Fraction if exact else float
        mat = np.array([[conv(v) for v in row] for row in obj["matrix"]],
                       dtype=object if exact else float)
        tr = np.array([conv(v) for v in obj["translation"]], dtype=object if exact else float)
        return cls(mat, tr, exact)


def pullback(form, amap):
    """Pullback of a constant-coefficient form by an affine map.

    Translations act trivially; the linear part must be orthogonal (the
    gallery maps are isometries).
    """
    if not amap.is_orthogonal():
        raise ValueError("linear part must be orthogonal")
    out = form.coeffs
    A = amap.matrix
    for slot in range(form.degree):
        out = np.moveaxis(np.einsum("ji,j...->i...", A, np.moveaxis(out, slot, 0)), 0, slot)
    return Form(form.degree, out, form.exact and amap.exact)


def joyce_involutions(exact=True):
    """The five isometric involutions of the flat 7-torus used to build a
    quotient carrying the standard structure.

    Returns a dict with keys 'alpha', 'beta', 'gamma', 'sigma0', 'tau0'.
    The first four preserve phi0 exactly, tau0 reverses its sign.
    """
    h = Fraction(1, 2) if exact else 0.5
    z = Fraction(0) if exact else 0.0
    table = {
        "alpha": ([1, 1, 1, -1, -1, -1, -1], [z] * 7),
        "beta": ([1, -1, -1, 1, 1, -1, -1], [z, z, z, z, z, h, z]),
        "gamma": ([-1, 1, -1, 1, -1, 1, -1], [z, z, z, z, h, z, h]),
        "sigma0": ([1, -1, -1, 1, 1, -1, -1], [z, h, h, z, z, z, h]),
        "tau0": ([1, 1, -1, -1, 1, 1, -1], [z, z, h, h, z, z, h]),
    }
    return {name: AffineMap.from_diag_shift(signs, shifts, exact)
            for name, (signs, shifts) in table.items()}


def forms_to_json_file(forms, path):
    with open(path, "w") as fh:
        json.dump([f.to_json() for f in forms], fh, indent=1)
