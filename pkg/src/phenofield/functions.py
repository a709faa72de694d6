"""Model function set: rates, fitness landscape, transition kernel,
truncation weight, and the split double-well derivatives.

All callables are vectorized over numpy arrays.  The defaults implement the
simulated scenario set: constant proliferation and consumption, a quadratic
death penalty away from the fittest trait y = 1, a narrow Gaussian transition
kernel normalized over the trait interval, and the quartic double well split
into a convex part treated implicitly and a concave part treated explicitly.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import erf


@dataclass(frozen=True)
class ModelFunctions:
    """Bundle of phenotype- and phase-dependent model functions.

    ``kernel(y_source, y_dest)`` is a transition density, normalized over the
    destination trait.  ``truncation`` maps the phase variable to a weight in
    [0, 1] that switches tumour-only processes off in healthy tissue.  The
    potential derivatives satisfy F_c'(r) + F_e'(r) = r^3 - r for the default
    quartic splitting.
    """

    p_rate: Callable[[np.ndarray], np.ndarray]
    q_rate: Callable[[np.ndarray], np.ndarray]
    k_rate: Callable[[np.ndarray], np.ndarray]
    w_mob: Callable[[np.ndarray], np.ndarray]
    fitness: Callable[[np.ndarray], np.ndarray]
    kernel: Callable[[np.ndarray, np.ndarray], np.ndarray]
    truncation: Callable[[np.ndarray], np.ndarray]
    potential_convex_deriv: Callable[[np.ndarray], np.ndarray]
    potential_expansive_deriv: Callable[[np.ndarray], np.ndarray]


def gaussian_kernel(scale: float, y_min: float, y_max: float):
    """Gaussian transition density exp(-scale (y' - y)^2) normalized over
    [y_min, y_max] in the destination variable (closed form via erf)."""
    root = np.sqrt(scale)
    prefactor = 0.5 * np.sqrt(np.pi / scale)

    def kernel(y_source, y_dest):
        norm = prefactor * (erf(root * (y_max - y_source)) - erf(root * (y_min - y_source)))
        return np.exp(-scale * (y_source - y_dest) ** 2) / norm

    return kernel


def clipped_linear_truncation(phi):
    """Truncation weight (1 + phi)/2 clipped to [0, 1].

    The clip keeps the weight nonnegative and bounded on all of R, which the
    raw linear form is not once the quartic potential lets phi undershoot
    -1; without it the consumption operator loses positivity and the trait
    dynamics can run backwards in barely-undershooting healthy tissue.
    """
    return np.clip(0.5 * (1.0 + np.asarray(phi, dtype=float)), 0.0, 1.0)


def default_model_functions(y_min: float = 0.0, y_max: float = 2.0) -> ModelFunctions:
    """The simulated scenario set on the trait interval [y_min, y_max].

    p(y) = 1.5, q(y) = (1-y)^2, k(y) = 1, w(y) = 1,
    fitness R(y) = 1 - 0.1 (1-y)^2, Gaussian kernel with scale 100,
    truncation (1+phi)/2 clipped to [0,1], and the quartic splitting
    F_c'(r) = r^3, F_e'(r) = -r.
    """
    return ModelFunctions(
        p_rate=lambda y: np.full_like(np.asarray(y, dtype=float), 1.5),
        q_rate=lambda y: (1.0 - np.asarray(y, dtype=float)) ** 2,
        k_rate=lambda y: np.ones_like(np.asarray(y, dtype=float)),
        w_mob=lambda y: np.ones_like(np.asarray(y, dtype=float)),
        fitness=lambda y: 1.0 - 0.1 * (1.0 - np.asarray(y, dtype=float)) ** 2,
        kernel=gaussian_kernel(100.0, y_min, y_max),
        truncation=clipped_linear_truncation,
        potential_convex_deriv=lambda r: np.asarray(r, dtype=float) ** 3,
        potential_expansive_deriv=lambda r: -np.asarray(r, dtype=float),
    )
