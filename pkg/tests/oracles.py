"""Independent oracles used by the tests.

These deliberately avoid every code path they are used to check: triangle
integrals go through a tensor-product Gauss rule on the Duffy-transformed
square, the radial nutrient profile through a dense 1-D finite-difference
solve, and reference sums through plain Python loops.
"""

import numpy as np

_GAUSS_N = 12
_gx, _gw = np.polynomial.legendre.leggauss(_GAUSS_N)
_gx = 0.5 * (_gx + 1.0)  # map to [0, 1]
_gw = 0.5 * _gw


def triangle_quadrature(fn, p0, p1, p2):
    """Integrate fn(x, y) over the triangle (p0, p1, p2).

    Duffy transform of a 12x12 Gauss-Legendre grid; exact for polynomials
    far beyond degree ten.
    """
    total = 0.0
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    jac2 = abs((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0]))
    for iu, u in enumerate(_gx):
        for iv, v in enumerate(_gx):
            # reference coordinates on the unit triangle via Duffy
            lam1 = u * (1.0 - v)
            lam2 = u * v
            lam0 = 1.0 - lam1 - lam2
            x = lam0 * p0[0] + lam1 * p1[0] + lam2 * p2[0]
            y = lam0 * p0[1] + lam1 * p1[1] + lam2 * p2[1]
            total += _gw[iu] * _gw[iv] * u * fn(x, y) * jac2
    return total


def p1_on_triangle(values, p0, p1, p2):
    """Return the linear interpolant of nodal values on one triangle."""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0])

    def interp(x, y):
        lam1 = ((x - p0[0]) * (p2[1] - p0[1]) - (y - p0[1]) * (p2[0] - p0[0])) / det
        lam2 = ((p1[0] - p0[0]) * (y - p0[1]) - (p1[1] - p0[1]) * (x - p0[0])) / det
        lam0 = 1.0 - lam1 - lam2
        return lam0 * values[0] + lam1 * values[1] + lam2 * values[2]

    return interp


def mesh_integral(mesh, fn):
    """Integrate fn(x, y) over every triangle of a mesh with the dense rule."""
    total = 0.0
    for tri in mesh.triangles:
        total += triangle_quadrature(fn, *mesh.nodes[tri])
    return total


def cubic_load_oracle(mesh, phi_values):
    """N_i = int (phi_h)^3 chi_i by dense quadrature, one hat at a time."""
    n = np.zeros(mesh.n_nodes)
    for tri in mesh.triangles:
        pts = mesh.nodes[tri]
        phi_loc = phi_values[tri]
        phi_fn = p1_on_triangle(phi_loc, *pts)
        for local, node in enumerate(tri):
            hat = np.zeros(3)
            hat[local] = 1.0
            hat_fn = p1_on_triangle(hat, *pts)
            n[node] += triangle_quadrature(
                lambda x, y: phi_fn(x, y) ** 3 * hat_fn(x, y), *pts)
    return n


def weighted_mass_block_oracle(coeff_values, p0, p1, p2):
    """Local 3x3 block of int c_h chi_i chi_j by dense quadrature."""
    c_fn = p1_on_triangle(coeff_values, *[p0, p1, p2])
    block = np.zeros((3, 3))
    for i in range(3):
        hi = np.zeros(3)
        hi[i] = 1.0
        hi_fn = p1_on_triangle(hi, p0, p1, p2)
        for j in range(3):
            hj = np.zeros(3)
            hj[j] = 1.0
            hj_fn = p1_on_triangle(hj, p0, p1, p2)
            block[i, j] = triangle_quadrature(
                lambda x, y: c_fn(x, y) * hi_fn(x, y) * hj_fn(x, y), p0, p1, p2)
    return block


def double_well_oracle(mesh, phi_values):
    """int F(phi_h) with F(r) = (r^2-1)^2/4 by dense quadrature."""
    total = 0.0
    for tri in mesh.triangles:
        pts = mesh.nodes[tri]
        phi_fn = p1_on_triangle(phi_values[tri], *pts)
        total += triangle_quadrature(
            lambda x, y: 0.25 * (phi_fn(x, y) ** 2 - 1.0) ** 2, *pts)
    return total


def radial_steady_nutrient(d_sigma, b, sigma_b, k_inside, disk_radius,
                           outer_radius, n_points=4000):
    """Steady nutrient profile of the radially symmetric two-region problem.

    Solves -D (u'' + u'/r) + c(r) u = b (sigma_b - u) on (0, R) with Neumann
    ends by dense central finite differences, where the consumption c(r)
    equals k_inside on r < disk_radius and zero outside.  Returns (r, u).
    """
    r = np.linspace(0.0, outer_radius, n_points)
    h = r[1] - r[0]
    main = np.zeros(n_points)
    lower = np.zeros(n_points - 1)
    upper = np.zeros(n_points - 1)
    rhs = np.full(n_points, b * sigma_b)
    for i in range(1, n_points - 1):
        c = k_inside if r[i] < disk_radius else 0.0
        main[i] = 2.0 * d_sigma / h ** 2 + c + b
        lower[i - 1] = -d_sigma / h ** 2 + d_sigma / (2.0 * r[i] * h)
        upper[i] = -d_sigma / h ** 2 - d_sigma / (2.0 * r[i] * h)
    # symmetry at r = 0: u'(0) = 0, u0 = u1; Neumann at the outer end
    main[0] = 1.0
    upper[0] = -1.0
    rhs[0] = 0.0
    main[-1] = 1.0
    lower[-1] = -1.0
    rhs[-1] = 0.0
    mat = np.diag(main) + np.diag(lower, -1) + np.diag(upper, 1)
    return r, np.linalg.solve(mat, rhs)
