"""Time loop, initial data, invariant monitoring, and run orchestration.

A step advances the three sub-systems in a fixed order (moments of the trait
distribution, then the phase pair, then the trait update, then the nutrient),
with every coupling evaluated at the previous time level, so the order is a
reproducibility convention rather than an approximation choice.  Two discrete
identities are monitored at every step and abort the run beyond 1e-10: the
per-node unit mass of the trait distribution, and the phase mass balance
1'M(phi^{n+1} - phi^n) = dt * 1'M g.  Nonnegativity of the distribution is
asserted outright.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .assembly import Operators, build_operators
from .config import SimulationConfig, validate_assumptions
from .fields import (ChState, chemical_potential_init, ch_step, consumption_coefficient,
                     linear_controls, newton_controls, sigma_steady_init, sigma_step)
from .functions import ModelFunctions, default_model_functions
from .mesh import ScalarField, build_uniform_mesh
from .observables import ObservableRecord, nearest_node, observable_record
from .phenotype import (KernelMatrix, PhenotypeField, build_grid, build_kernel_matrix,
                        initial_distribution, phenotype_step)

MONITOR_TOL = 1e-10


class SimulationAbort(RuntimeError):
    """Run stopped by a solver failure or an invariant violation.

    ``step`` is the last good step index; ``partial`` carries the results
    collected so far when the abort happens inside :func:`run`.
    """

    def __init__(self, message: str, step: int, partial=None):
        super().__init__(message)
        self.step = step
        self.partial = partial


@dataclass
class SimulationState:
    """Full unknown set at one time level."""

    time: float
    step: int
    ch: ChState
    f: PhenotypeField
    sigma: ScalarField


@dataclass
class StepDiagnostics:
    mass_balance_err: float
    fmass_err: float
    f_min: float


@dataclass
class Problem:
    """Static data shared by every step of one run."""

    cfg: SimulationConfig
    fns: ModelFunctions
    ops: Operators
    kernel: KernelMatrix
    probe_nodes: tuple[int, int, int]


def setup_problem(cfg: SimulationConfig, fns: Optional[ModelFunctions] = None) -> Problem:
    fns = fns or default_model_functions(cfg.y_min, cfg.y_max)
    mesh = build_uniform_mesh(cfg.nx)
    ops = build_operators(mesh)
    grid = build_grid(cfg.y_min, cfg.y_max, cfg.n_y)
    kernel = build_kernel_matrix(grid, fns.kernel)
    probes = (nearest_node(mesh, cfg.output.probe_a),
              nearest_node(mesh, cfg.output.probe_b),
              nearest_node(mesh, cfg.output.probe_c))
    return Problem(cfg=cfg, fns=fns, ops=ops, kernel=kernel, probe_nodes=probes)


def build_initial_state(problem: Problem) -> SimulationState:
    """Initial data: indicator phase disk, one shared trait profile, steady
    nutrient, and the consistent chemical potential."""
    cfg = problem.cfg
    ops = problem.ops
    mesh = ops.mesh
    cx, cy = cfg.ic_phi.disk_center
    inside = ((mesh.nodes[:, 0] - cx) ** 2 + (mesh.nodes[:, 1] - cy) ** 2
              <= cfg.ic_phi.disk_radius_sq)
    phi0 = ScalarField(np.where(inside, 1.0, -1.0), "phi")

    grid = build_grid(cfg.y_min, cfg.y_max, cfg.n_y)
    profile = initial_distribution(grid, cfg.ic_f.a, cfg.ic_f.y_bar0)
    f0 = PhenotypeField(np.tile(profile, (mesh.n_nodes, 1)), grid)

    lin = linear_controls(cfg)
    sigma0 = sigma_steady_init(phi0, f0, problem.fns, cfg, ops, controls=lin)
    mu0 = chemical_potential_init(phi0, ops, cfg.eps, controls=lin)
    return SimulationState(time=0.0, step=0,
                           ch=ChState(phi=phi0, mu=mu0, step=0),
                           f=f0, sigma=sigma0)


def advance(state: SimulationState, problem: Problem) -> tuple[SimulationState, StepDiagnostics]:
    """One full time step in the fixed order, with invariant monitors.

    Raises :class:`SimulationAbort` on a solver failure or when a monitored
    identity drifts beyond 1e-10.
    """
    cfg = problem.cfg
    fns = problem.fns
    ops = problem.ops
    f_n = state.f
    phi_n = state.ch.phi
    sigma_n = state.sigma
    grid = f_n.grid

    # moments of the level-n distribution
    w = grid.weights
    p_bar = f_n.values @ (w * np.asarray(fns.p_rate(grid.y_values), dtype=float))
    q_bar = f_n.values @ (w * np.asarray(fns.q_rate(grid.y_values), dtype=float))
    h_vals = np.asarray(fns.truncation(phi_n.values), dtype=float)
    source = h_vals * (sigma_n.values * p_bar - q_bar)
    consumption = consumption_coefficient(phi_n, f_n, fns)

    try:
        ch_new = ch_step(state.ch, source, cfg.m_mob, cfg.eps, cfg.dt, ops,
                         newton_ctl=newton_controls(cfg), linear_ctl=linear_controls(cfg))
        f_new = phenotype_step(f_n, phi_n, fns, problem.kernel, grid,
                               cfg.alpha, cfg.theta, cfg.dt)
        sigma_new = sigma_step(sigma_n, phi_n, f_n, fns, cfg, ops,
                               controls=linear_controls(cfg), coefficient=consumption)
    except Exception as exc:
        raise SimulationAbort(f"solver failure at step {state.step + 1}: {exc}",
                              step=state.step) from exc

    ones = np.ones(ops.n_nodes)
    balance_lhs = float(ones @ (ops.mass @ (ch_new.phi.values - phi_n.values)))
    balance_rhs = cfg.dt * float(ones @ (ops.mass @ source))
    mass_balance_err = abs(balance_lhs - balance_rhs)
    fmass_err = float(np.abs(f_new.node_masses() - 1.0).max())
    f_min = float(f_new.values.min())

    step = state.step + 1
    if mass_balance_err > MONITOR_TOL:
        raise SimulationAbort(
            f"phase mass-balance identity violated at step {step}: "
            f"{mass_balance_err:.3e} > {MONITOR_TOL:g}", step=state.step)
    if fmass_err > MONITOR_TOL:
        raise SimulationAbort(
            f"trait distribution mass drifted at step {step}: "
            f"{fmass_err:.3e} > {MONITOR_TOL:g}", step=state.step)
    if f_min < 0.0:
        raise SimulationAbort(
            f"trait distribution went negative at step {step}: min = {f_min:.3e}",
            step=state.step)

    new_state = SimulationState(time=step * cfg.dt, step=step, ch=ch_new,
                                f=f_new, sigma=sigma_new)
    return new_state, StepDiagnostics(mass_balance_err=mass_balance_err,
                                      fmass_err=fmass_err, f_min=f_min)


@dataclass
class RunResult:
    """Everything a run produces, kept in memory for chaining and export."""

    records: list[ObservableRecord]
    snapshots: dict[int, tuple[np.ndarray, np.ndarray]]
    final_state: Optional[SimulationState]
    monitors: dict[str, float]
    probe_truncation: list[tuple[float, float, float]] = field(default_factory=list)
    probe_distributions: dict[str, list] = field(default_factory=dict)
    completed: bool = True


def run(cfg: SimulationConfig, fns: Optional[ModelFunctions] = None,
        on_record: Optional[Callable[[ObservableRecord], None]] = None,
        problem: Optional[Problem] = None) -> RunResult:
    """Execute a full simulation.

    Records observables at t = 0 and after every step; snapshots of (phi,
    sigma) are kept every ``output.snapshot_stride`` steps (0 disables them).
    A failing assumption report raises ValueError before any stepping;
    mid-run failures raise :class:`SimulationAbort` with the partial result
    attached.
    """
    if problem is None:
        problem = setup_problem(cfg, fns)
    report = validate_assumptions(cfg, problem.fns)
    if not report.ok:
        raise ValueError("model function validation failed:\n" + report.format())

    result = RunResult(records=[], snapshots={}, final_state=None, monitors={
        "max_fmass_err": 0.0, "max_mass_balance_err": 0.0, "min_f": float("inf"),
    }, probe_distributions={"A": [], "B": [], "C": []})
    try:
        state = build_initial_state(problem)
    except Exception as exc:
        result.completed = False
        raise SimulationAbort(f"initial data solve failed: {exc}", step=0,
                              partial=result) from exc

    def record_state(st: SimulationState):
        rec = observable_record(st.time, st.ch.phi, st.sigma, st.f, cfg,
                                problem.fns, problem.ops, problem.probe_nodes)
        result.records.append(rec)
        h = np.asarray(problem.fns.truncation(
            st.ch.phi.values[list(problem.probe_nodes)]), dtype=float)
        result.probe_truncation.append((float(h[0]), float(h[1]), float(h[2])))
        for name, node in zip(("A", "B", "C"), problem.probe_nodes):
            result.probe_distributions[name].append(st.f.values[node].copy())
        if on_record is not None:
            on_record(rec)
        stride = cfg.output.snapshot_stride
        n_steps = cfg.n_steps
        if stride > 0 and (st.step % stride == 0 or st.step == n_steps):
            result.snapshots[st.step] = (st.ch.phi.values.copy(), st.sigma.values.copy())

    record_state(state)
    result.monitors["min_f"] = float(state.f.values.min())
    result.monitors["max_fmass_err"] = float(np.abs(state.f.node_masses() - 1.0).max())

    for _ in range(cfg.n_steps):
        try:
            state, diag = advance(state, problem)
        except SimulationAbort as exc:
            result.final_state = state
            result.completed = False
            exc.partial = result
            raise
        result.monitors["max_fmass_err"] = max(result.monitors["max_fmass_err"],
                                               diag.fmass_err)
        result.monitors["max_mass_balance_err"] = max(
            result.monitors["max_mass_balance_err"], diag.mass_balance_err)
        result.monitors["min_f"] = min(result.monitors["min_f"], diag.f_min)
        record_state(state)

    result.final_state = state
    return result
