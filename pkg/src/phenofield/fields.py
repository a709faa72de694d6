"""Coupled phase/chemical-potential stepping and the nutrient solves.

One time level advances the phase pair (phi, mu) through a semi-implicit
convex-splitting scheme: the convex part of the double well (derivative
phi^3) is implicit, the expansive part (derivative -phi) explicit, which
makes the discrete energy nonincreasing for any step size.  The nutrient is
advanced by backward Euler with implicit consumption and supply, a symmetric
positive definite system solved by CG.  All couplings between the unknowns
use the previous time level, so the three updates within a step commute.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .assembly import (Operators, assemble_nonlinear_cubic, assemble_weighted_mass,
                       cubic_load_vector)
from .mesh import ScalarField
from .phenotype import PhenotypeField
from .solvers import NewtonError, SolveReport, SolverControls, cg_solve, newton_solve


class SolverFailure(RuntimeError):
    """A field solve failed beyond the built-in retry."""


@dataclass
class ChState:
    """Phase variable and chemical potential at one time level."""

    phi: ScalarField
    mu: ScalarField
    step: int = 0
    last_report: Optional[SolveReport] = None


def newton_controls(cfg) -> SolverControls:
    return SolverControls(rel_tol=cfg.newton_tol, abs_tol=1e-11,
                          max_iter=cfg.newton_max_iter)


def linear_controls(cfg) -> SolverControls:
    return SolverControls(rel_tol=cfg.linear_tol, abs_tol=0.0,
                          max_iter=cfg.linear_max_iter)


def chemical_potential_init(phi0: ScalarField, ops: Operators, eps: float,
                            controls: SolverControls | None = None) -> ScalarField:
    """Chemical potential consistent with a given phase field.

    There is no independent initial condition for mu; it is defined by the
    constitutive equation evaluated once with both potential slots at phi0:
    M mu = eps K phi0 + (1/eps)(N(phi0) - M phi0).
    """
    controls = controls or SolverControls()
    cubic = cubic_load_vector(ops.mesh, phi0)
    rhs = eps * (ops.stiffness @ phi0.values) + (cubic - ops.mass @ phi0.values) / eps
    mu, rep = cg_solve(ops.mass, rhs, controls=controls)
    if not rep.converged:
        raise SolverFailure(f"mass solve for the initial chemical potential stalled "
                            f"(residual {rep.residual:.3e})")
    return ScalarField(mu, "mu")


def _ch_newton(phi_n: np.ndarray, mu_n: np.ndarray, source: np.ndarray,
               m_mob: float, eps: float, dt: float, ops: Operators,
               newton_ctl: SolverControls, linear_ctl: SolverControls):
    mass = ops.mass
    stiff = ops.stiffness
    n = ops.n_nodes
    b1 = mass @ (phi_n / dt + source)
    b2 = -(mass @ phi_n) / eps

    # Solve for the scaled chemical potential mu~ = scale * mu and scale the
    # constitutive equation so the four Jacobian blocks are balanced after
    # diagonal preconditioning; the roots are unchanged, but BiCGSTAB sees a
    # well-scaled system instead of blocks five orders of magnitude apart.
    m_bar = float(mass.diagonal().mean())
    k_bar = float(stiff.diagonal().mean())
    scale = np.sqrt(m_mob * k_bar * dt / (eps * k_bar + 3.0 * m_bar / eps))
    row2 = scale / dt

    def residual(x):
        phi = x[:n]
        mu = x[n:] / scale
        cubic = cubic_load_vector(ops.mesh, phi)
        r1 = mass @ (phi / dt) + m_mob * (stiff @ mu) - b1
        r2 = mass @ mu - eps * (stiff @ phi) - cubic / eps - b2
        return np.concatenate([r1, row2 * r2])

    def jacobian(x):
        phi = x[:n]
        _, cubic_jac = assemble_nonlinear_cubic(ops.mesh, phi)
        return sp.bmat(
            [[mass / dt, (m_mob / scale) * stiff],
             [-row2 * (eps * stiff + cubic_jac / eps), (row2 / scale) * mass]],
            format="csr",
        )

    x0 = np.concatenate([phi_n, scale * mu_n])
    x, rep = newton_solve(residual, jacobian, x0, controls=newton_ctl,
                          linear_controls=linear_ctl)
    x[n:] /= scale
    return x, rep


def ch_step(state: ChState, source: np.ndarray, m_mob: float, eps: float, dt: float,
            ops: Operators, newton_ctl: SolverControls | None = None,
            linear_ctl: SolverControls | None = None) -> ChState:
    """Advance the coupled phase system by one step.

    ``source`` holds the nodal proliferation/death forcing assembled from the
    previous time level.  On Newton failure the step is retried once as two
    half steps before giving up.
    """
    newton_ctl = newton_ctl or SolverControls(rel_tol=1e-10, abs_tol=1e-11, max_iter=20)
    linear_ctl = linear_ctl or SolverControls()
    n = ops.n_nodes

    def attempt(phi_n, mu_n, step_dt):
        x, rep = _ch_newton(phi_n, mu_n, source, m_mob, eps, step_dt, ops,
                            newton_ctl, linear_ctl)
        if not rep.converged:
            raise NewtonError(
                f"Newton stalled (residual {rep.residual:.3e} after {rep.iterations} steps)",
                step=rep.iterations)
        return x, rep

    try:
        x, rep = attempt(state.phi.values, state.mu.values, dt)
    except NewtonError:
        half1, _ = attempt(state.phi.values, state.mu.values, dt / 2)
        x, rep = attempt(half1[:n], half1[n:], dt / 2)

    return ChState(phi=ScalarField(x[:n], "phi"), mu=ScalarField(x[n:], "mu"),
                   step=state.step + 1, last_report=rep)


def consumption_coefficient(phi_n: ScalarField, f_n: PhenotypeField, fns) -> np.ndarray:
    """Nodal coefficient h(phi) * mean consumption rate of the distribution."""
    k_vals = np.asarray(fns.k_rate(f_n.grid.y_values), dtype=float)
    k_bar = f_n.values @ (f_n.grid.weights * k_vals)
    return np.asarray(fns.truncation(phi_n.values), dtype=float) * k_bar


def sigma_step(sigma_n: ScalarField, phi_n: ScalarField, f_n: PhenotypeField, fns,
               cfg, ops: Operators, controls: SolverControls | None = None,
               coefficient: np.ndarray | None = None) -> ScalarField:
    """Backward-Euler nutrient step with implicit consumption and supply.

    Solves (M/dt + D K + W + b M) sigma = (M/dt) sigma_n + b sigma_b M 1 by
    CG, where W is the weighted mass matrix of the consumption coefficient
    evaluated at the previous level.
    """
    controls = controls or SolverControls()
    coeff = consumption_coefficient(phi_n, f_n, fns) if coefficient is None else coefficient
    w_mat = assemble_weighted_mass(ops.mesh, coeff)
    a = ops.mass / cfg.dt + cfg.d_sigma * ops.stiffness + w_mat + cfg.b * ops.mass
    rhs = ops.mass @ (sigma_n.values / cfg.dt + cfg.b * cfg.sigma_b * np.ones(ops.n_nodes))
    sigma, rep = cg_solve(a, rhs, x0=sigma_n.values, controls=controls)
    if not rep.converged:
        raise SolverFailure(f"nutrient CG stalled (residual {rep.residual:.3e} "
                            f"after {rep.iterations} iterations)")
    return ScalarField(sigma, "sigma")


def sigma_steady_init(phi0: ScalarField, f0: PhenotypeField, fns, cfg,
                      ops: Operators, controls: SolverControls | None = None) -> ScalarField:
    """Steady-state nutrient field for the initial data.

    Solves (D K + W0 + b M) sigma = b sigma_b M 1 with zero-flux natural
    boundary conditions.
    """
    controls = controls or SolverControls()
    coeff = consumption_coefficient(phi0, f0, fns)
    w_mat = assemble_weighted_mass(ops.mesh, coeff)
    a = cfg.d_sigma * ops.stiffness + w_mat + cfg.b * ops.mass
    rhs = cfg.b * cfg.sigma_b * (ops.mass @ np.ones(ops.n_nodes))
    x0 = np.full(ops.n_nodes, cfg.sigma_b)
    sigma, rep = cg_solve(a, rhs, x0=x0, controls=controls)
    if not rep.converged:
        raise SolverFailure(f"steady nutrient CG stalled (residual {rep.residual:.3e} "
                            f"after {rep.iterations} iterations)")
    return ScalarField(sigma, "sigma")
