"""Second fundamental forms and the spectral rigidity check.

The curvature operators of a patch decide whether transverse deformations
can exist: when the partial Ricci term minus the squared second
fundamental form is positive, the patch is rigid.  Flat ambients always
land on the nonpositive side (the term is minus a square); the
constant-curvature evaluator checks the assembly against a closed form,
and a synthetic positive field shows the rigid verdict.
"""

import numpy as np

import g2deform as g
from g2deform.patches import constant_curvature_tensor

sphere = g.sphere_patch(0.8)
u = np.array([0.3, 1.1])
sff = g.second_fundamental(sphere, u)
x = sphere.point(u)
inward = np.zeros(7)
inward[:3] = -x[:3] / 0.8
print("sphere principal curvatures (inward):", sff.principal_curvatures(inward))
print("mean curvature:", sff.mean_curvature(inward))

flat = g.flat_plane_patch()
grid = [np.array([a, b, 0.0]) for a in (0.0, 0.3) for b in (0.0, 0.5)]
ops = [g.simons_operators(flat, p) for p in grid]
print("\nflat patch verdict:", g.rigidity_check(ops))

curved = [g.simons_operators(sphere, u, curvature=constant_curvature_tensor(0.7))]
print("constant-curvature evaluator, closed form -p*kappa on transverse "
      "directions:", curved[0].calR[0, 0], "(expected", -2 * 0.7, ")")
print("verdict with that ambient:", g.rigidity_check(curved))

synthetic = [0.25 * np.eye(4) for _ in range(4)]
print("synthetic positive field:", g.rigidity_check(synthetic))
