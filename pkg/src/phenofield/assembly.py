"""P1 finite-element operator assembly on triangle meshes.

All element integrals are evaluated exactly through the barycentric monomial
formula

    int_T  l0^a * l1^b * l2^c  =  2*A * a! b! c! / (a+b+c+2)!

so that products of P1 fields up to total degree four (needed for the cubic
potential term and the quartic well) carry no quadrature error.  Assembled
matrices are scipy CSR with sorted indices, summed duplicates, and no
explicitly stored zeros.
"""

from dataclasses import dataclass
from math import factorial

import numpy as np
import scipy.sparse as sp

from .mesh import Mesh, ScalarField


def _barycentric_tensor(order: int) -> np.ndarray:
    """Exact integrals of products of ``order`` hat functions on a unit-area
    triangle, indexed by the local vertex of each factor."""
    shape = (3,) * order
    out = np.empty(shape)
    denom = factorial(order + 2)
    for idx in np.ndindex(shape):
        mult = [0, 0, 0]
        for v in idx:
            mult[v] += 1
        out[idx] = 2.0 * factorial(mult[0]) * factorial(mult[1]) * factorial(mult[2]) / denom
    return out


# int l_i l_j, int l_a l_i l_j, int l_a l_b l_i l_j on a unit-area element
_C2 = _barycentric_tensor(2)
_C3 = _barycentric_tensor(3)
_C4 = _barycentric_tensor(4)


def _finalize(mesh: Mesh, local: np.ndarray) -> sp.csr_matrix:
    """Scatter per-element 3x3 blocks into a finalized CSR matrix."""
    tri = mesh.triangles
    rows = np.broadcast_to(tri[:, :, None], (tri.shape[0], 3, 3)).ravel()
    cols = np.broadcast_to(tri[:, None, :], (tri.shape[0], 3, 3)).ravel()
    n = mesh.n_nodes
    mat = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    mat.sum_duplicates()
    mat.eliminate_zeros()
    mat.sort_indices()
    return mat


def _coeff_values(coeff) -> np.ndarray:
    return coeff.values if isinstance(coeff, ScalarField) else np.asarray(coeff, dtype=float)


def assemble_mass(mesh: Mesh) -> sp.csr_matrix:
    """Mass matrix M_ij = int chi_i chi_j.

    The element block is (A/12) * [[2,1,1],[1,2,1],[1,1,2]].
    """
    local = mesh.areas[:, None, None] * _C2[None, :, :]
    return _finalize(mesh, local)


def assemble_stiffness(mesh: Mesh) -> sp.csr_matrix:
    """Stiffness matrix K_ij = int grad(chi_i) . grad(chi_j).

    Symmetric positive semidefinite; constants span the kernel, which is the
    natural (zero-flux) boundary treatment.
    """
    local = np.einsum("tid,tjd->tij", mesh.grads, mesh.grads) * mesh.areas[:, None, None]
    return _finalize(mesh, local)


def assemble_weighted_mass(mesh: Mesh, coeff) -> sp.csr_matrix:
    """Weighted mass matrix W_ij = int c_h chi_i chi_j.

    ``coeff`` holds nodal values; c_h is its P1 interpolant, and the cubic
    integrand is integrated exactly.  Linear in the coefficient.
    """
    c = _coeff_values(coeff)
    c_elem = c[mesh.triangles]
    local = np.einsum("ta,aij->tij", c_elem, _C3, optimize=True) * mesh.areas[:, None, None]
    return _finalize(mesh, local)


def cubic_load_vector(mesh: Mesh, phi) -> np.ndarray:
    """N_i(phi) = int (phi_h)^3 chi_i, exact for the degree-four integrand."""
    p = _coeff_values(phi)[mesh.triangles]
    pp = np.einsum("ta,tb->tab", p, p)
    vec_local = np.einsum("tab,tc,abci->ti", pp, p, _C4, optimize=True) * mesh.areas[:, None]
    return np.bincount(mesh.triangles.ravel(), weights=vec_local.ravel(),
                       minlength=mesh.n_nodes)


def assemble_nonlinear_cubic(mesh: Mesh, phi) -> tuple[np.ndarray, sp.csr_matrix]:
    """Cubic load vector N_i(phi) = int (phi_h)^3 chi_i and its Jacobian.

    The Jacobian dN_i/dphi_j = int 3 phi_h^2 chi_i chi_j is integrated by the
    same exact degree-four rule, so finite differences of N converge to J at
    first order in the step.
    """
    p = _coeff_values(phi)[mesh.triangles]
    pp = np.einsum("ta,tb->tab", p, p)
    jac_local = 3.0 * np.einsum("tab,abij->tij", pp, _C4, optimize=True) * mesh.areas[:, None, None]
    return cubic_load_vector(mesh, phi), _finalize(mesh, jac_local)


def double_well_integral(mesh: Mesh, phi) -> float:
    """Exact integral of F(phi_h) with F(r) = (r^2 - 1)^2 / 4.

    This is the quartic split sum F_c + F_e with F_c = (r^4+1)/4 and
    F_e = -r^2/2, integrated element by element without quadrature error.
    """
    p = _coeff_values(phi)[mesh.triangles]
    pp = np.einsum("ta,tb->tab", p, p)
    e4 = np.einsum("tab,tcd,abcd->t", pp, pp, _C4, optimize=True)
    e2 = np.einsum("tab,ab->t", pp, _C2, optimize=True)
    return float(np.sum(mesh.areas * 0.25 * (e4 - 2.0 * e2 + 1.0)))


@dataclass(frozen=True)
class Operators:
    """Mesh plus the constant assembled operators shared by all solvers."""

    mesh: Mesh
    mass: sp.csr_matrix
    stiffness: sp.csr_matrix

    @property
    def n_nodes(self) -> int:
        return self.mesh.n_nodes


def build_operators(mesh: Mesh) -> Operators:
    return Operators(mesh=mesh, mass=assemble_mass(mesh), stiffness=assemble_stiffness(mesh))
