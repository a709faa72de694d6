"""Mesh construction and the exactness of the assembled operators.

Builds uniform triangulations of the unit square, assembles the P1 mass and
stiffness matrices, and demonstrates the discrete identities every solver in
the package leans on: partition of unity, the constant kernel of the
stiffness operator, and exact integration of the cubic potential term.
"""

import numpy as np

from phenofield import (assemble_nonlinear_cubic, build_operators,
                        build_uniform_mesh, interpolate)

for nx in (1, 8, 64, 120):
    mesh = build_uniform_mesh(nx)
    print(f"nx = {nx:4d}: {mesh.n_nodes:6d} nodes, {mesh.n_triangles:6d} triangles, "
          f"total area = {mesh.areas.sum():.15f}")

print()
mesh = build_uniform_mesh(32)
ops = build_operators(mesh)
ones = np.ones(mesh.n_nodes)

print("partition of unity:      1'M1 =", ones @ (ops.mass @ ones))
print("constants in the kernel: max|K1| =", np.abs(ops.stiffness @ ones).max())

# the Dirichlet energy of the coordinate function x over the unit square is
# exactly one, and P1 interpolation reproduces linear fields exactly
xs = interpolate(lambda x, y: x, mesh)
print("Dirichlet energy of x:   x'Kx =", xs.values @ (ops.stiffness @ xs.values))

# the cubic potential term and its Jacobian are integrated exactly, so a
# finite-difference probe of the Jacobian converges at first order
rng = np.random.default_rng(0)
phi = rng.uniform(-1, 1, mesh.n_nodes)
d = rng.uniform(-1, 1, mesh.n_nodes)
n0, jac = assemble_nonlinear_cubic(mesh, phi)
print("\nJacobian finite-difference probe:")
for h in (1e-3, 1e-4, 1e-5):
    n1, _ = assemble_nonlinear_cubic(mesh, phi + h * d)
    err = np.abs((n1 - n0) / h - jac @ d).max()
    print(f"  h = {h:.0e}: max deviation = {err:.3e}")
