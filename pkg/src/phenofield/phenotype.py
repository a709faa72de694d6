"""Phenotype-space discretization and the selection-mutation update.

The trait interval [y_min, y_max] is discretized uniformly and every discrete
integral (kernel normalization, initial profile, moments) uses one shared set
of trapezoidal weights.  Normalizing the transition kernel per source column
against those same weights makes the per-node unit mass of the distribution an
algebraic identity of the explicit update, conserved to machine precision
rather than approximately.
"""

from dataclasses import dataclass

import numpy as np

from .mesh import ScalarField


@dataclass(frozen=True)
class PhenotypeGrid:
    """Uniform trait grid with shared quadrature weights."""

    y_values: np.ndarray
    dy: float
    weights: np.ndarray

    @property
    def n_points(self) -> int:
        return self.y_values.shape[0]


@dataclass(frozen=True)
class KernelMatrix:
    """Discrete transition kernel.

    ``entries[i, j]`` approximates the density of transitions from trait
    y_j to trait y_i; every column satisfies sum_i weights_i * entries[i, j]
    = 1 by construction.
    """

    entries: np.ndarray


@dataclass
class PhenotypeField:
    """Per-mesh-node trait distribution, one row per node.

    Rows are unit-mass densities with respect to the grid weights and stay
    nonnegative under the stepping bound enforced by :func:`phenotype_step`.
    """

    values: np.ndarray
    grid: PhenotypeGrid

    def copy(self) -> "PhenotypeField":
        return PhenotypeField(self.values.copy(), self.grid)

    def node_masses(self) -> np.ndarray:
        return self.values @ self.grid.weights


def build_grid(y_min: float, y_max: float, n_y: int) -> PhenotypeGrid:
    """Uniform grid y_i = y_min + i*dy for i = 0..n_y with trapezoid weights."""
    if not y_min < y_max:
        raise ValueError(f"degenerate trait interval [{y_min}, {y_max}]")
    if n_y < 1:
        raise ValueError(f"n_y must be >= 1, got {n_y}")
    dy = (y_max - y_min) / n_y
    y = np.linspace(y_min, y_max, n_y + 1)
    w = np.full(n_y + 1, dy)
    w[0] = w[-1] = 0.5 * dy
    return PhenotypeGrid(y_values=y, dy=dy, weights=w)


def build_kernel_matrix(grid: PhenotypeGrid, kernel) -> KernelMatrix:
    """Evaluate and column-normalize a transition kernel on the grid.

    entries[i, j] = kernel(y_j, y_i) / sum_k w_k kernel(y_j, y_k), so the
    weighted column sums equal one exactly.
    """
    ysrc = grid.y_values[None, :]
    ydst = grid.y_values[:, None]
    raw = np.asarray(kernel(ysrc, ydst), dtype=float)
    if raw.shape != (grid.n_points, grid.n_points):
        raise ValueError("kernel callable must broadcast over grid arrays")
    if np.any(raw < 0):
        raise ValueError("kernel values must be nonnegative on the grid")
    denom = grid.weights @ raw
    dead = np.flatnonzero(denom == 0.0)
    if dead.size:
        raise ValueError(
            f"kernel column {dead[0]} (y = {grid.y_values[dead[0]]:g}) is identically "
            "zero; normalization impossible"
        )
    return KernelMatrix(entries=raw / denom[None, :])


def moment(f_node: np.ndarray, g, grid: PhenotypeGrid) -> float:
    """Weighted moment sum_i w_i g(y_i) f_i of one nodal distribution."""
    f_node = np.asarray(f_node, dtype=float)
    if f_node.shape != grid.y_values.shape:
        raise ValueError("distribution length does not match the grid")
    gy = np.asarray(g(grid.y_values), dtype=float)
    return float(np.sum(grid.weights * gy * f_node))


def mean_and_variance(f_node: np.ndarray, grid: PhenotypeGrid) -> tuple[float, float]:
    """Mean trait and trait variance of one nodal distribution.

    The variance is clamped below at zero against roundoff for sharply
    concentrated distributions.
    """
    mean = moment(f_node, lambda y: y, grid)
    second = moment(f_node, lambda y: y * y, grid)
    return mean, max(second - mean * mean, 0.0)


def initial_distribution(grid: PhenotypeGrid, a: float, y_bar0: float) -> np.ndarray:
    """Discretely normalized Gaussian profile exp(-a (y - y_bar0)^2)."""
    if a <= 0:
        raise ValueError(f"concentration parameter a must be positive, got {a}")
    raw = np.exp(-a * (grid.y_values - y_bar0) ** 2)
    return raw / (grid.weights @ raw)


def fitness_oscillation(fns, grid: PhenotypeGrid) -> float:
    """Spread max - min of the fitness over the grid points.

    This is the sharp constant in the nonnegativity bound of the explicit
    update: the mean fitness is a convex combination of grid values, so the
    shrink factor of any entry is at most dt*alpha*h*(theta + oscillation).
    """
    r = np.asarray(fns.fitness(grid.y_values), dtype=float)
    return float(r.max() - r.min())


def step_bound(fns, grid: PhenotypeGrid, alpha: float, theta: float, dt: float,
               h_max: float = 1.0) -> float:
    """Value of dt*alpha*h_max*(theta + fitness oscillation); must be < 1."""
    return dt * alpha * h_max * (theta + fitness_oscillation(fns, grid))


def phenotype_step(f: PhenotypeField, phi: ScalarField, fns, kernel: KernelMatrix,
                   grid: PhenotypeGrid, alpha: float, theta: float, dt: float) -> PhenotypeField:
    """One explicit step of the selection-mutation dynamics at every node.

    f_i <- f_i + dt*alpha*h(phi(x)) * [ theta*((K f)_i - f_i)
                                        + (R(y_i) - Rbar) f_i ]

    with (K f)_i = sum_j w_j entries_ij f_j and Rbar = sum_j w_j R(y_j) f_j.
    The weighted sum at every node is preserved identically because the
    kernel columns are weighted-normalized; nonnegativity is guaranteed by
    the stepping bound, which is checked (not clipped) up front.
    """
    h_vals = np.asarray(fns.truncation(phi.values), dtype=float)
    h_max = float(h_vals.max(initial=0.0))
    bound = step_bound(fns, grid, alpha, theta, dt, h_max=h_max)
    if bound >= 1.0:
        raise ValueError(
            f"nonnegativity bound violated: dt*alpha*h*(theta + fitness spread) = "
            f"{bound:g} >= 1; reduce dt"
        )

    values = f.values
    w = grid.weights
    r = np.asarray(fns.fitness(grid.y_values), dtype=float)
    r_bar = values @ (w * r)
    mixed = (values * w[None, :]) @ kernel.entries.T
    rate = theta * (mixed - values) + (r[None, :] - r_bar[:, None]) * values
    new_values = values + (dt * alpha) * h_vals[:, None] * rate
    return PhenotypeField(new_values, grid)
