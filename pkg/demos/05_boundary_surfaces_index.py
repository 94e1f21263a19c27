"""Boundary surfaces: the 0-order operator, Chern numbers, and the index.

On the boundary of a round ball the transverse boundary operator is
diagonal with both eigenvalues equal to the inverse radius; its trace is
twice the boundary mean curvature on every surface.  Summed holonomy of
the projection connection quantizes bundle degrees, and the deformation
index of the boundary problem is  c1 + 1 - genus.
"""

import numpy as np

import g2deform as g
from g2deform import boundary, meshes

e = np.eye(7)[3]
rho = 0.5

sphere = meshes.icosphere_mesh(level=3, radius=rho)
nu = boundary.SpanEBundle(e)
mu = boundary.ComplementBundle(nu)

spec_mu = boundary.dl_spectra(boundary.assemble_DL(sphere, mu))
print(f"sphere rho={rho}: transverse spectrum "
      f"[{spec_mu.min():.12f}, {spec_mu.max():.12f}]  (1/rho = {1/rho})")

ell = meshes.ellipsoid_mesh(1.0, 1.0, 2.0, level=3)
spec_e = boundary.dl_spectra(boundary.assemble_DL(
    ell, boundary.ComplementBundle(boundary.SpanEBundle(e))))
i = 17
print("ellipsoid vertex spectrum:", np.sort(spec_e[i]).round(9),
      " principal curvatures:", np.sort(ell.principal_curvatures(i)).round(9))

torus = meshes.flat_torus_mesh(16)
dl_t = boundary.assemble_DL(torus, boundary.ConstantBundle(np.eye(7)[3:5]))
print("flat boundary torus: max |D_L| =", np.max(np.abs(dl_t)))

print("\nChern numbers (tangent bundles):")
genus2 = meshes.genus2_mesh()
for name, mesh in (("sphere", sphere), ("torus", torus), ("genus-2", genus2)):
    print(f"  {name:8s}:", boundary.chern_number(mesh, boundary.TangentBundle()))

print("\nindex = c1 + 1 - genus:")
print("  ball boundary:", boundary.index_of(sphere, nu).to_json())
print("  strip torus:  ", boundary.index_of(
    torus, boundary.ConstantBundle(np.eye(7)[3:5])).to_json())

rel = boundary.tensor_relation_check(sphere, nu, mu)
print("\nbundle degree relation -c1(mu) = c1(nu) + c1(T):", rel)
