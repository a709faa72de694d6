"""Uniform triangulations of the unit square and nodal fields.

The spatial domain is always [0,1]^2.  Every lattice cell is split into two
triangles along the same diagonal (lower-left to upper-right), which keeps
assembly reproducible bit for bit and gives the mesh a symmetry group
containing the main-diagonal reflection and the half-turn about the centre.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Mesh:
    """Triangulation with precomputed element geometry.

    Attributes
    ----------
    nodes : ndarray, shape (n_nodes, 2)
        Vertex coordinates.
    triangles : ndarray, shape (n_tri, 3)
        Vertex indices, counterclockwise.
    areas : ndarray, shape (n_tri,)
        Element areas (all positive).
    grads : ndarray, shape (n_tri, 3, 2)
        Constant gradients of the three linear hat functions per element.
    """

    nodes: np.ndarray
    triangles: np.ndarray
    areas: np.ndarray
    grads: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]


@dataclass
class ScalarField:
    """Nodal values of one scalar unknown over a mesh.

    ``tag`` names the unknown ("phi", "mu" or "sigma" for the solver state;
    other tags are allowed for coefficient fields).
    """

    values: np.ndarray
    tag: str = "phi"

    def copy(self) -> "ScalarField":
        return ScalarField(self.values.copy(), self.tag)


def build_uniform_mesh(nx: int) -> Mesh:
    """Triangulate the unit square with ``nx`` subdivisions per side.

    Produces (nx+1)^2 nodes on the uniform lattice and 2*nx^2 right
    triangles, each of area 1/(2*nx^2).  Node (ix, iy) gets the index
    iy*(nx+1) + ix.
    """
    if nx < 1:
        raise ValueError(f"nx must be a positive integer, got {nx}")
    ticks = np.linspace(0.0, 1.0, nx + 1)
    xg, yg = np.meshgrid(ticks, ticks)
    nodes = np.column_stack([xg.ravel(), yg.ravel()])

    ix, iy = np.meshgrid(np.arange(nx), np.arange(nx))
    n00 = (iy * (nx + 1) + ix).ravel()
    n10 = n00 + 1
    n01 = n00 + (nx + 1)
    n11 = n01 + 1
    # split along the lower-left to upper-right diagonal, both CCW
    lower = np.column_stack([n00, n10, n11])
    upper = np.column_stack([n00, n11, n01])
    triangles = np.vstack([lower, upper])

    p0 = nodes[triangles[:, 0]]
    p1 = nodes[triangles[:, 1]]
    p2 = nodes[triangles[:, 2]]
    twice_area = (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1]) - (
        p1[:, 1] - p0[:, 1]
    ) * (p2[:, 0] - p0[:, 0])
    if np.any(twice_area <= 0):
        raise ValueError("degenerate or inverted triangle in mesh construction")
    areas = 0.5 * twice_area

    # grad(hat_i) is the inward normal of the opposite edge over 2A
    grads = np.empty((triangles.shape[0], 3, 2))
    grads[:, 0, 0] = p1[:, 1] - p2[:, 1]
    grads[:, 0, 1] = p2[:, 0] - p1[:, 0]
    grads[:, 1, 0] = p2[:, 1] - p0[:, 1]
    grads[:, 1, 1] = p0[:, 0] - p2[:, 0]
    grads[:, 2, 0] = p0[:, 1] - p1[:, 1]
    grads[:, 2, 1] = p1[:, 0] - p0[:, 0]
    grads /= twice_area[:, None, None]

    return Mesh(nodes=nodes, triangles=triangles, areas=areas, grads=grads)


def interpolate(fn, mesh: Mesh, tag: str = "phi") -> ScalarField:
    """Nodal interpolation of a function of (x, y).

    ``fn`` may be vectorized over coordinate arrays; scalar-only callables
    are evaluated node by node.
    """
    x = mesh.nodes[:, 0]
    y = mesh.nodes[:, 1]
    try:
        values = np.asarray(fn(x, y), dtype=float)
        if values.shape != x.shape:
            raise TypeError
    except (TypeError, ValueError):
        values = np.array([float(fn(xi, yi)) for xi, yi in mesh.nodes])
    return ScalarField(values, tag)
