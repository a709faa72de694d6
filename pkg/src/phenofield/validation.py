"""Standalone invariant suites behind ``simulate validate``.

Each suite returns (name, passed, detail) triples with the measured value
printed against its tolerance, so a failed gate is diagnosable from the
command line without rerunning anything.
"""

from dataclasses import replace

import numpy as np

from .assembly import assemble_mass, assemble_nonlinear_cubic, build_operators
from .config import default_config
from .driver import run
from .fields import ChState, chemical_potential_init, ch_step, sigma_step
from .functions import default_model_functions
from .mesh import ScalarField, build_uniform_mesh, interpolate
from .observables import energy
from .phenotype import PhenotypeField, build_grid

SUITES = ("assembly", "conservation", "energy", "convergence", "scenario")


def _desk_config(nx: int, t_end: float, **overrides):
    cfg = replace(default_config(), nx=nx, t_end=t_end)
    return replace(cfg, **overrides) if overrides else cfg


def suite_assembly():
    checks = []
    mesh = build_uniform_mesh(2)
    ops = build_operators(mesh)
    ones = np.ones(ops.n_nodes)

    total = float(ones @ (ops.mass @ ones))
    checks.append(("mass partition of unity", abs(total - 1.0) <= 1e-12,
                   f"1'M1 = {total!r}, tol 1e-12"))

    k1 = float(np.abs(ops.stiffness @ ones).max())
    checks.append(("stiffness kernel contains constants", k1 <= 1e-12,
                   f"max |K 1| = {k1:.3e}, tol 1e-12"))

    xs = interpolate(lambda x, y: x, mesh)
    dirichlet = float(xs.values @ (ops.stiffness @ xs.values))
    checks.append(("stiffness energy of linear field", abs(dirichlet - 1.0) <= 1e-12,
                   f"x'Kx = {dirichlet!r}, expected 1"))

    rng = np.random.default_rng(7)
    phi = rng.uniform(-1, 1, ops.n_nodes)
    c = 0.73
    n_const, _ = assemble_nonlinear_cubic(mesh, np.full(ops.n_nodes, c))
    ref = c ** 3 * (assemble_mass(mesh) @ ones)
    err = float(np.abs(n_const - ref).max())
    checks.append(("cubic term on constants", err <= 1e-12,
                   f"max dev = {err:.3e}, tol 1e-12"))

    n_phi, jac = assemble_nonlinear_cubic(mesh, phi)
    d = rng.uniform(-1, 1, ops.n_nodes)
    h = 1e-6
    n_pert, _ = assemble_nonlinear_cubic(mesh, phi + h * d)
    fd_err = float(np.abs((n_pert - n_phi) / h - jac @ d).max())
    checks.append(("cubic Jacobian finite-difference check", fd_err <= 1e-4,
                   f"max dev = {fd_err:.3e} at h = {h:g}"))
    return checks


def suite_conservation():
    cfg = _desk_config(nx=32, t_end=0.5)
    result = run(cfg)
    checks = [
        ("trait mass drift over 500 steps",
         result.monitors["max_fmass_err"] <= 1e-10,
         f"max |mass - 1| = {result.monitors['max_fmass_err']:.3e}, tol 1e-10"),
        ("phase mass-balance identity",
         result.monitors["max_mass_balance_err"] <= 1e-10,
         f"max dev = {result.monitors['max_mass_balance_err']:.3e}, tol 1e-10"),
        ("trait distribution nonnegative",
         result.monitors["min_f"] >= 0.0,
         f"min f = {result.monitors['min_f']:.3e}"),
    ]
    return checks


def suite_energy():
    cfg = default_config()
    mesh = build_uniform_mesh(16)
    ops = build_operators(mesh)
    rng = np.random.default_rng(3)
    phi0 = rng.uniform(-1.0, 1.0, ops.n_nodes)
    source = np.zeros(ops.n_nodes)
    checks = []
    for dt in (1e-3, 1e-2, 1e-1):
        state = ChState(phi=ScalarField(phi0.copy(), "phi"),
                        mu=chemical_potential_init(ScalarField(phi0.copy()), ops, cfg.eps))
        e_prev = energy(state.phi, ops, cfg.eps)
        worst = -np.inf
        for _ in range(100):
            state = ch_step(state, source, cfg.m_mob, cfg.eps, dt, ops)
            e_now = energy(state.phi, ops, cfg.eps)
            worst = max(worst, (e_now - e_prev) / (1.0 + abs(e_prev)))
            e_prev = e_now
        checks.append((f"energy decay at dt = {dt:g}", worst <= 1e-9,
                       f"max relative increase = {worst:.3e}, tol 1e-9"))
    return checks


def heat_convergence_errors(resolutions=(8, 16, 32), d_sigma=1.0, t_final=0.1):
    """L2 errors of the nutrient step on the pure heat sub-problem.

    The truncation weight is switched off by a phi = -1 background and the
    supply by b = 0, leaving backward Euler for sigma_t = D lap(sigma); the
    manufactured solution cos(pi x) cos(pi y) exp(-2 pi^2 D t) satisfies the
    zero-flux conditions.  dt scales with h^2 so both error sources reduce
    fourfold per mesh doubling.
    """
    fns = default_model_functions()
    errors = []
    for nx in resolutions:
        steps = 8 * (nx // 8) ** 2
        dt = t_final / steps
        cfg = replace(default_config(), nx=nx, d_sigma=d_sigma, b=0.0, dt=dt,
                      t_end=t_final)
        mesh = build_uniform_mesh(nx)
        ops = build_operators(mesh)
        grid = build_grid(cfg.y_min, cfg.y_max, cfg.n_y)
        f_bg = PhenotypeField(np.tile(np.full(grid.n_points, 1.0 / (cfg.y_max - cfg.y_min)),
                                      (mesh.n_nodes, 1)), grid)
        phi_bg = ScalarField(np.full(mesh.n_nodes, -1.0), "phi")
        sigma = interpolate(lambda x, y: np.cos(np.pi * x) * np.cos(np.pi * y), mesh, "sigma")
        for _ in range(steps):
            sigma = sigma_step(sigma, phi_bg, f_bg, fns, cfg, ops)
        exact = interpolate(
            lambda x, y: np.cos(np.pi * x) * np.cos(np.pi * y)
            * np.exp(-2.0 * np.pi ** 2 * d_sigma * t_final), mesh).values
        diff = sigma.values - exact
        errors.append(float(np.sqrt(diff @ (ops.mass @ diff))))
    return errors


def suite_convergence():
    errors = heat_convergence_errors()
    checks = []
    for coarse, fine, e0, e1 in zip((8, 16), (16, 32), errors, errors[1:]):
        ratio = e0 / e1
        checks.append((f"L2 error ratio nx {coarse} -> {fine}", ratio >= 3.5,
                       f"ratio = {ratio:.3f}, requires >= 3.5"))
    return checks


def suite_scenario():
    cfg = _desk_config(nx=32, t_end=0.3)
    result = run(cfg)
    recs = result.records
    sigma_lo = min(r.sigma_min for r in recs)
    sigma_hi = max(r.sigma_max for r in recs)
    measures = [r.tumour_measure for r in recs]
    mean0 = recs[0].probe_a_mean
    mean_t = recs[-1].probe_a_mean
    checks = [
        ("nutrient bounds", sigma_lo >= -1e-8 and sigma_hi <= cfg.sigma_b + 1e-8,
         f"sigma in [{sigma_lo:.3e}, {sigma_hi:.6f}], allowed [-1e-8, {cfg.sigma_b}+1e-8]"),
        ("tumour measure in [0, 1] and growing",
         all(0.0 <= m <= 1.0 for m in measures) and measures[-1] > measures[0],
         f"range [{min(measures):.4f}, {max(measures):.4f}]"),
        ("centre trait mean moves toward the fitness peak",
         abs(mean_t - 1.0) < abs(mean0 - 1.0),
         f"|mean-1| moved {abs(mean0 - 1.0):.4f} -> {abs(mean_t - 1.0):.4f}"),
    ]
    return checks


def run_suite(name: str):
    if name == "assembly":
        return suite_assembly()
    if name == "conservation":
        return suite_conservation()
    if name == "energy":
        return suite_energy()
    if name == "convergence":
        return suite_convergence()
    if name == "scenario":
        return suite_scenario()
    raise ValueError(f"unknown suite: {name!r} (choose from {', '.join(SUITES)})")
