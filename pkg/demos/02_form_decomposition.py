"""Irreducible decomposition of 3-forms and the reconstruction identity.

3-forms on the structured R^7 split into orthogonal pieces of dimensions
1, 7 and 27.  The derivative of the nonlinear 4-form map acts as 4/3 on
the first piece, +1 on the second and -1 on the third, and feeding it the
dual 1-form of a normal vector reproduces that vector on any calibrated
3-plane.
"""

import numpy as np

import g2deform as g
from g2deform.algebra import Form, wedge

st = g.standard_phi()
rng = np.random.default_rng(0)

p1, p7, p27, _, _ = st._projectors3()
print("projector ranks:", [int(np.linalg.matrix_rank(p)) for p in (p1, p7, p27)])

print("P(phi) = (4/3) phi:",
      np.allclose(g.p_operator(st.phi, st).coeffs, 4 / 3 * st.phi.as_float().coeffs))

alpha = Form(1, np.eye(7)[0].astype(float))
w7 = st.hodge_star(wedge(st.phi.as_float(), alpha))
print("P = id on the 7-piece:",
      np.allclose(g.p_operator(w7, st).coeffs, w7.coeffs, atol=1e-13))

# reconstruction: a random calibrated plane and a random normal vector
a = rng.standard_normal(7)
a /= np.linalg.norm(a)
b = rng.standard_normal(7)
b -= (b @ a) * a
b /= np.linalg.norm(b)
plane = g.Plane(np.vstack([a, b, st.cross(a, b)]))
s = rng.standard_normal(7)
s -= plane.basis.T @ (plane.basis @ s)
rec = g.reconstruct_section(s, plane, st)
print("reconstruction relative error:",
      np.linalg.norm(rec - s) / np.linalg.norm(s))
